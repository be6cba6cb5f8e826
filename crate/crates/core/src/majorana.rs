//! Majorana stellar representation of a qutrit: two points ("stars") on the
//! unit sphere, the roots of the Majorana polynomial written as
//! `tan(theta/2) e^{i phi}`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::numerics::{c, solve_quadratic, Complex, Vector3};
use crate::states::{gauge_fix_quadrupolar, is_quadrupolar, QutritState, TOL_QUADRUPOLAR};

/// Unit vector in R^3.
pub type UnitVector = [f64; 3];

pub fn dot(a: &UnitVector, b: &UnitVector) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &UnitVector, b: &UnitVector) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Great-circle distance, accurate for small and near-antipodal separations.
pub fn great_circle(a: &UnitVector, b: &UnitVector) -> f64 {
    let cr = cross3(a, b);
    let s = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
    s.atan2(dot(a, b))
}

pub fn normalize3(v: [f64; 3]) -> UnitVector {
    let n = dot(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Point on the unit sphere. `phi` is kept in `[0, 2pi)` and set to zero at
/// the poles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Star {
    theta: f64,
    phi: f64,
}

impl Star {
    pub fn new(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        if theta == 0.0 || theta == PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub const NORTH: Star = Star { theta: 0.0, phi: 0.0 };
    pub const SOUTH: Star = Star { theta: PI, phi: 0.0 };

    pub fn from_unit_vector(u: &UnitVector) -> Self {
        let rho = u[0].hypot(u[1]);
        let theta = rho.atan2(u[2]);
        let phi = if rho == 0.0 { 0.0 } else { u[1].atan2(u[0]) };
        Self::new(theta, phi)
    }

    /// Star of a polynomial root `tan(theta/2) e^{i phi}`; `None` is the root
    /// at infinity (south pole).
    pub fn from_root(root: Option<Complex>) -> Self {
        match root {
            None => Self::SOUTH,
            Some(x) => {
                let r = x.norm();
                if r == 0.0 {
                    Self::NORTH
                } else {
                    Self::new(2.0 * r.atan(), x.arg())
                }
            }
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> UnitVector {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn antipode(&self) -> Self {
        Self::new(PI - self.theta, self.phi + PI)
    }

    pub fn distance(&self, other: &Star) -> f64 {
        great_circle(&self.unit_vector(), &other.unit_vector())
    }

    /// Spin-1/2 coherent spinor `cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>`.
    pub fn spinor(&self) -> [Complex; 2] {
        let (s, co) = (self.theta / 2.0).sin_cos();
        [c(co, 0.0), Complex::from_polar(s, self.phi)]
    }
}

/// Unordered pair of stars.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StarSet {
    pub stars: [Star; 2],
}

impl StarSet {
    pub fn new(a: Star, b: Star) -> Self {
        Self { stars: [a, b] }
    }

    pub fn unit_vectors(&self) -> [UnitVector; 2] {
        self.stars.map(|s| s.unit_vector())
    }

    /// Largest matched great-circle distance under the better of the two
    /// pairings.
    pub fn matching_distance(&self, other: &StarSet) -> f64 {
        let [a, b] = self.stars;
        let [x, y] = other.stars;
        let direct = a.distance(&x).max(b.distance(&y));
        let swapped = a.distance(&y).max(b.distance(&x));
        direct.min(swapped)
    }

    pub fn approx_eq(&self, other: &StarSet, tol: f64) -> bool {
        self.matching_distance(other) <= tol
    }

    pub fn separation(&self) -> f64 {
        self.stars[0].distance(&self.stars[1])
    }
}

impl PartialEq for StarSet {
    /// Order-free equality.
    fn eq(&self, other: &Self) -> bool {
        let [a, b] = self.stars;
        let [x, y] = other.stars;
        (a == x && b == y) || (a == y && b == x)
    }
}

/// Coefficients `(a0, a1, a2)` of `a0 x^2 + a1 x + a2`, with
/// `a_r = (-1)^r c_{1-r} / sqrt((2-r)! r!)`.
pub fn majorana_polynomial(psi: &QutritState) -> [Complex; 3] {
    let [p, z, m] = *psi.amps();
    [p / SQRT_2, -z, m / SQRT_2]
}

pub fn stars_from_state(psi: &QutritState) -> StarSet {
    let [a0, a1, a2] = majorana_polynomial(psi);
    let roots = solve_quadratic(a0, a1, a2).expect("normalized state has a nonzero polynomial");
    let mut stars: Vec<Star> = roots.finite_roots.iter().map(|&x| Star::from_root(Some(x))).collect();
    stars.extend(std::iter::repeat_n(Star::SOUTH, roots.roots_at_infinity));
    StarSet::new(stars[0], stars[1])
}

/// Symmetrized product `|u1>|u2> + |u2>|u1>` in the qubit basis
/// `|up up>, |up down>, |down up>, |down down>`, unnormalized.
fn symmetrized_product(stars: &StarSet) -> [Complex; 4] {
    let [s1, s2] = stars.stars.map(|s| s.spinor());
    let mut out = [Complex::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            out[2 * a + b] = s1[a] * s2[b] + s2[a] * s1[b];
        }
    }
    out
}

/// Squared norm of the unnormalized symmetrized two-star state.
pub fn symmetrized_norm_sq(stars: &StarSet) -> f64 {
    symmetrized_product(stars).iter().map(|z| z.norm_sqr()).sum()
}

/// Inverse of `stars_from_state`, up to a global phase.
///
/// The output is gauge-fixed: quadrupolar states through
/// `gauge_fix_quadrupolar`, the rest by making the first nonzero amplitude
/// real and positive.
pub fn state_from_stars(stars: &StarSet) -> QutritState {
    let v = symmetrized_product(stars);
    let amps: Vector3 = [v[0], (v[1] + v[2]) / SQRT_2, v[3]];
    let psi = QutritState::normalized(amps).expect("symmetrized two-star state never vanishes");
    if is_quadrupolar(&psi, TOL_QUADRUPOLAR) {
        if let Ok(fixed) = gauge_fix_quadrupolar(&psi) {
            return fixed;
        }
    }
    let lead = psi.amps().iter().find(|z| z.norm() > 1e-12).copied().unwrap();
    psi.with_phase(-lead.arg())
}

/// `u1 . u2 <= -1 + tol`.
pub fn are_antipodal(stars: &StarSet, tol: f64) -> bool {
    let [u, v] = stars.unit_vectors();
    dot(&u, &v) <= -1.0 + tol
}

/// True when reflecting across the x-z plane maps the star set onto itself:
/// either the stars are mirror images of each other, or both lie in the
/// plane.
pub fn mirror_pair_check(stars: &StarSet, tol: f64) -> bool {
    let mirrored = stars.stars.map(|s| Star::from_unit_vector(&mirror(&s.unit_vector())));
    stars.matching_distance(&StarSet::new(mirrored[0], mirrored[1])) <= tol
}

fn mirror(u: &UnitVector) -> UnitVector {
    [u[0], -u[1], u[2]]
}

/// Symmetric two-qubit state carrying the stars, with the purity of either
/// single-qubit reduced state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitLift {
    /// Amplitudes on `|up up>, |up down>, |down up>, |down down>`.
    pub amps: [Complex; 4],
    pub reduced_purity: f64,
}

pub fn symmetrized_two_qubit(stars: &StarSet) -> TwoQubitLift {
    let v = symmetrized_product(stars);
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let amps = v.map(|z| z / n);
    TwoQubitLift { amps, reduced_purity: reduced_purity(&amps) }
}

/// `tr(rho_A^2)` of the first qubit.
pub fn reduced_purity(amps: &[Complex; 4]) -> f64 {
    let mut purity = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let rho: Complex = (0..2).map(|k| amps[2 * a + k] * amps[2 * b + k].conj()).sum();
            purity += rho.norm_sqr();
        }
    }
    purity
}
