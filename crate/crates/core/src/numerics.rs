//! Complex 3-vector / 3x3 matrix arithmetic and the small dense kernels the
//! rest of the crate is built on: quadratic roots, Hermitian eigensystems and
//! unitary propagators.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Column vector of three complex amplitudes.
pub type Vector3 = [Complex; 3];

/// Relative threshold below which a leading coefficient counts as zero.
pub const EPS_LEAD: f64 = 1e-13;
/// Absolute floor under which a coefficient vector is considered empty.
pub const COEFF_FLOOR: f64 = 1e-300;
/// Relative Hermiticity / unitarity tolerance used for certification.
pub const TOL_HERM: f64 = 1e-12;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// `<a|b>`, antilinear in the first slot.
pub fn inner(a: &Vector3, b: &Vector3) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &Vector3) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale(v: &Vector3, s: Complex) -> Vector3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn add(a: &Vector3, b: &Vector3) -> Vector3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Vector3, b: &Vector3) -> Vector3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn conj(v: &Vector3) -> Vector3 {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

/// Bilinear cross product (no conjugation). For rows `a`, `b` of a matrix
/// `A`, `A (a x b)` vanishes in the first two components.
pub fn cross(a: &Vector3, b: &Vector3) -> Vector3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn max_abs_diff(a: &Vector3, b: &Vector3) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn normalize(v: &Vector3) -> Option<Vector3> {
    let n = norm(v);
    if n.is_finite() && n > 0.0 {
        Some(scale(v, c(1.0 / n, 0.0)))
    } else {
        None
    }
}

/// Dense complex 3x3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3 {
    pub m: [[Complex; 3]; 3],
}

impl Matrix3 {
    pub const fn from_rows(m: [[Complex; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self { m: [[ZERO; 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::diag([ONE; 3])
    }

    pub fn diag(d: [Complex; 3]) -> Self {
        let mut out = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            out.m[i][i] = x;
        }
        out
    }

    pub fn from_real(r: [[f64; 3]; 3]) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = c(r[i][j], 0.0);
            }
        }
        out
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vector3; 3]) -> Self {
        let mut out = Self::zero();
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                out.m[i][j] = col[i];
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vector3 {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    pub fn row(&self, i: usize) -> Vector3 {
        self.m[i]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[j][i].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[j][i];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for x in row.iter_mut() {
                *x = f(*x);
            }
        }
        out
    }

    pub fn scale(&self, s: Complex) -> Self {
        self.map(|x| x * s)
    }

    pub fn apply(&self, v: &Vector3) -> Vector3 {
        let mut out = [ZERO; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.m[i][0] * v[0] + self.m[i][1] * v[1] + self.m[i][2] * v[2];
        }
        out
    }

    pub fn trace(&self) -> Complex {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> Complex {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// `||A - A^dagger||_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm()
    }

    /// `||A A^dagger - I||_F`.
    pub fn unitarity_residual(&self) -> f64 {
        (*self * self.adjoint() - Self::identity()).frobenius_norm()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Add for Matrix3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }
}

impl Sub for Matrix3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Matrix3 {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl Mul for Matrix3 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        out
    }
}

impl Mul<f64> for Matrix3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(c(rhs, 0.0))
    }
}

/// Roots of a polynomial of nominal degree two.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub finite_roots: Vec<Complex>,
    pub roots_at_infinity: usize,
}

/// Roots of `a2 x^2 + a1 x + a0`.
///
/// A leading coefficient below `EPS_LEAD` relative to the largest one is
/// treated as zero and the missing roots are reported as roots at infinity.
/// The non-degenerate branch uses the cancellation-free form: one root from
/// the sign-matched discriminant, the other from Vieta's product.
pub fn solve_quadratic(a2: Complex, a1: Complex, a0: Complex) -> Result<RootSet> {
    let scale = a2.norm().max(a1.norm()).max(a0.norm());
    if scale.is_nan() || scale <= COEFF_FLOOR || !scale.is_finite() {
        return Err(Error::AllCoefficientsZero);
    }
    let lead_zero = a2.norm() < EPS_LEAD * scale;
    if lead_zero {
        if a1.norm() < EPS_LEAD * scale {
            return Ok(RootSet { finite_roots: vec![], roots_at_infinity: 2 });
        }
        return Ok(RootSet { finite_roots: vec![-a0 / a1], roots_at_infinity: 1 });
    }
    let disc = (a1 * a1 - a2 * a0 * 4.0).sqrt();
    let sign = if (a1.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -(a1 + disc * sign) * 0.5;
    let roots = if q.norm() == 0.0 {
        // a1 = 0 and a0 = 0: double root at the origin
        vec![ZERO, ZERO]
    } else {
        vec![q / a2, a0 / q]
    };
    Ok(RootSet { finite_roots: roots, roots_at_infinity: 0 })
}

/// Eigen-decomposition of a Hermitian 3x3 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: [f64; 3],
    /// Orthonormal eigenvectors, `vectors[i]` belongs to `values[i]`.
    pub vectors: [Vector3; 3],
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> Matrix3 {
        let v = Matrix3::from_columns(&self.vectors);
        let d = Matrix3::diag(self.values.map(|x| c(x, 0.0)));
        v * d * v.adjoint()
    }
}

pub fn check_hermitian(h: &Matrix3) -> Result<()> {
    let residual = h.hermiticity_residual();
    if !h.is_finite() || residual > TOL_HERM * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian 3x3 matrix.
///
/// Eigenvalues come from the trigonometric solution of the characteristic
/// cubic. The most isolated eigenvector is taken from a cross product of two
/// rows of `H - lambda I`; the remaining pair is obtained by diagonalizing the
/// 2x2 block on its orthogonal complement. A couple of Jacobi sweeps then
/// polish the basis to working precision. Degenerate eigenspaces get an
/// arbitrary orthonormal basis.
pub fn eig_hermitian3(h: &Matrix3) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    // symmetrize away the certified-small anti-Hermitian part
    let h = (*h + h.adjoint()) * 0.5;
    let scale = h.frobenius_norm();
    if scale == 0.0 {
        return Ok(HermitianEigen { values: [0.0; 3], vectors: canonical_basis() });
    }

    let q = h.trace().re / 3.0;
    let b = h - Matrix3::identity() * q;
    let p = (b.frobenius_norm().powi(2) / 6.0).sqrt();
    let mut vectors = if p <= 1e-15 * scale {
        canonical_basis()
    } else {
        let r = ((b * (1.0 / p)).det().re / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let hi = q + 2.0 * p * phi.cos();
        let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
        let mid = 3.0 * q - hi - lo;
        let isolated = if hi - mid >= mid - lo { hi } else { lo };
        initial_basis(&h, isolated)
    };

    gram_schmidt(&mut vectors);
    jacobi_polish(&h, &mut vectors);

    let v = Matrix3::from_columns(&vectors);
    let d = v.adjoint() * h * v;
    let mut pairs: Vec<(f64, Vector3)> = (0..3).map(|i| (d.m[i][i].re, vectors[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(HermitianEigen {
        values: [pairs[0].0, pairs[1].0, pairs[2].0],
        vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
    })
}

fn canonical_basis() -> [Vector3; 3] {
    [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]]
}

fn initial_basis(h: &Matrix3, lambda: f64) -> [Vector3; 3] {
    let a = *h - Matrix3::identity() * lambda;
    let candidates = [
        cross(&a.row(0), &a.row(1)),
        cross(&a.row(0), &a.row(2)),
        cross(&a.row(1), &a.row(2)),
    ];
    let best = candidates
        .iter()
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))
        .copied()
        .unwrap();
    let Some(v0) = normalize(&best) else {
        return canonical_basis();
    };
    let (e1, e2) = complement(&v0);
    let he1 = h.apply(&e1);
    let he2 = h.apply(&e2);
    let block = [[inner(&e1, &he1).re, 0.0], [0.0, inner(&e2, &he2).re]];
    let off = inner(&e1, &he2);
    let (w_a, w_b) = eig2(block[0][0], block[1][1], off);
    let lift = |w: [Complex; 2]| add(&scale(&e1, w[0]), &scale(&e2, w[1]));
    [v0, lift(w_a), lift(w_b)]
}

/// Two unit vectors completing `v` to an orthonormal basis.
fn complement(v: &Vector3) -> (Vector3, Vector3) {
    let k = (0..3)
        .min_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()))
        .unwrap();
    let mut e = [ZERO; 3];
    e[k] = ONE;
    let e1 = normalize(&sub(&e, &scale(v, inner(v, &e)))).unwrap();
    let e2 = conj(&cross(v, &e1));
    (e1, e2)
}

/// Eigenvectors of the Hermitian 2x2 matrix `[[a, b], [b*, d]]`.
fn eig2(a: f64, d: f64, b: Complex) -> ([Complex; 2], [Complex; 2]) {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let rad = half.hypot(b.norm());
    if rad == 0.0 || b.norm() <= 1e-300 {
        return ([ONE, ZERO], [ZERO, ONE]);
    }
    let up = mean + rad;
    let cand1 = [b, c(up - a, 0.0)];
    let cand2 = [c(up - d, 0.0), b.conj()];
    let n1 = (cand1[0].norm_sqr() + cand1[1].norm_sqr()).sqrt();
    let n2 = (cand2[0].norm_sqr() + cand2[1].norm_sqr()).sqrt();
    let (w, n) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    let w = [w[0] / n, w[1] / n];
    let w_perp = [-w[1].conj(), w[0].conj()];
    (w, w_perp)
}

fn gram_schmidt(vs: &mut [Vector3; 3]) {
    for i in 0..3 {
        let mut v = vs[i];
        for j in 0..i {
            let proj = inner(&vs[j], &v);
            v = sub(&v, &scale(&vs[j], proj));
        }
        vs[i] = normalize(&v).unwrap_or_else(|| {
            // fall back to a complement of the previous vectors
            if i == 2 {
                conj(&cross(&vs[0], &vs[1]))
            } else {
                complement(&vs[0]).0
            }
        });
    }
}

fn jacobi_polish(h: &Matrix3, vs: &mut [Vector3; 3]) {
    let scale = h.frobenius_norm();
    for _sweep in 0..6 {
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let hp = h.apply(&vs[p]);
            let hq = h.apply(&vs[q]);
            let app = inner(&vs[p], &hp).re;
            let aqq = inner(&vs[q], &hq).re;
            let apq = inner(&vs[p], &hq);
            if apq.norm() <= 1e-17 * scale {
                continue;
            }
            rotated = true;
            let (w_a, w_b) = eig2(app, aqq, apq);
            let (vp, vq) = (vs[p], vs[q]);
            vs[p] = add(&scale_v(&vp, w_a[0]), &scale_v(&vq, w_a[1]));
            vs[q] = add(&scale_v(&vp, w_b[0]), &scale_v(&vq, w_b[1]));
        }
        gram_schmidt(vs);
        if !rotated {
            break;
        }
    }
}

#[inline]
fn scale_v(v: &Vector3, s: Complex) -> Vector3 {
    scale(v, s)
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn propagator(h: &Matrix3, t: f64) -> Result<Matrix3> {
    let eig = eig_hermitian3(h)?;
    let v = Matrix3::from_columns(&eig.vectors);
    let phases = eig.values.map(|l| Complex::from_polar(1.0, -l * t));
    Ok(v * Matrix3::diag(phases) * v.adjoint())
}
