//! Fixed spin-1 matrices and operator constructions: spin operators in the
//! `S_z` and real bases, quadrupole tensor components, quadrupolar
//! Hamiltonians, the global unitary mapping quadrupolar states to real ones,
//! its interpolating family, and the anti-unitary symmetries.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c, Complex, Matrix3, TOL_HERM};
use crate::states::QutritState;

const O: Complex = Complex::new(0.0, 0.0);

/// 3x3 operator with certified Hermitian / unitary flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct Operator3 {
    matrix: Matrix3,
    hermitian: bool,
    unitary: bool,
}

/// Wire form: `{"entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub entries: [[[f64; 2]; 3]; 3],
}

impl TryFrom<OperatorJson> for Operator3 {
    type Error = Error;
    fn try_from(j: OperatorJson) -> Result<Self> {
        let m = Matrix3::from_rows(j.entries.map(|row| row.map(|[re, im]| c(re, im))));
        if !m.is_finite() {
            return Err(Error::DegenerateVector);
        }
        Ok(Operator3::new(m))
    }
}

impl From<Operator3> for OperatorJson {
    fn from(op: Operator3) -> Self {
        OperatorJson { entries: op.matrix.m.map(|row| row.map(|z| [z.re, z.im])) }
    }
}

impl Operator3 {
    pub fn new(matrix: Matrix3) -> Self {
        let scale = matrix.frobenius_norm().max(1.0);
        let hermitian = matrix.hermiticity_residual() <= TOL_HERM * scale;
        let unitary = matrix.unitarity_residual() <= TOL_HERM;
        Self { matrix, hermitian, unitary }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.matrix.adjoint())
    }

    pub fn apply(&self, psi: &QutritState) -> Result<QutritState> {
        QutritState::normalized(self.matrix.apply(psi.amps()))
    }

    /// Linear combination `sum w_k A_k`.
    pub fn combination<'a>(terms: impl IntoIterator<Item = (f64, &'a Operator3)>) -> Self {
        let m = terms
            .into_iter()
            .fold(Matrix3::zero(), |acc, (w, op)| acc + op.matrix * w);
        Self::new(m)
    }
}

impl std::ops::Mul for Operator3 {
    type Output = Operator3;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.matrix * rhs.matrix)
    }
}

/// `S_x, S_y, S_z` in the `S_z` basis.
pub fn spin_operators() -> [Operator3; 3] {
    let h = FRAC_1_SQRT_2;
    let sx = Matrix3::from_real([[0.0, h, 0.0], [h, 0.0, h], [0.0, h, 0.0]]);
    let sy = Matrix3::from_rows([
        [O, c(0.0, -h), O],
        [c(0.0, h), O, c(0.0, -h)],
        [O, c(0.0, h), O],
    ]);
    let sz = Matrix3::from_real([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
    [sx, sy, sz].map(Operator3::new)
}

/// Spin operators in the real basis, purely imaginary.
///
/// `S'_x = U S_x U^dagger`, while `S'_y = -U S_y U^dagger` and
/// `S'_z = -U S_z U^dagger` (a pi rotation about x on top of the basis change),
/// which still satisfies `[S'_x, S'_y] = i S'_z`.
pub fn spin_operators_real_basis() -> [Operator3; 3] {
    let i = c(0.0, 1.0);
    let sx = Matrix3::from_rows([[O, i, O], [-i, O, O], [O, O, O]]);
    let sy = Matrix3::from_rows([[O, O, O], [O, O, -i], [O, i, O]]);
    let sz = Matrix3::from_rows([[O, O, -i], [O, O, O], [i, O, O]]);
    [sx, sy, sz].map(Operator3::new)
}

/// The five independent quadrupole components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QuadrupoleComponent {
    #[serde(rename = "xy")]
    Xy,
    #[serde(rename = "yz")]
    Yz,
    #[serde(rename = "zx")]
    Zx,
    #[serde(rename = "zz")]
    Zz,
    #[serde(rename = "x2-y2")]
    X2MinusY2,
}

impl QuadrupoleComponent {
    pub const ALL: [QuadrupoleComponent; 5] = [
        QuadrupoleComponent::Xy,
        QuadrupoleComponent::Yz,
        QuadrupoleComponent::Zx,
        QuadrupoleComponent::Zz,
        QuadrupoleComponent::X2MinusY2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuadrupoleComponent::Xy => "xy",
            QuadrupoleComponent::Yz => "yz",
            QuadrupoleComponent::Zx => "zx",
            QuadrupoleComponent::Zz => "zz",
            QuadrupoleComponent::X2MinusY2 => "x2-y2",
        }
    }
}

impl fmt::Display for QuadrupoleComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadrupoleComponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        QuadrupoleComponent::ALL
            .into_iter()
            .find(|q| q.name() == s || (s == "x²−y²" && *q == QuadrupoleComponent::X2MinusY2))
            .ok_or_else(|| Error::Unknown { kind: "quadrupole component", name: s.to_string() })
    }
}

/// `Q_ij = (S_i S_j + S_j S_i)/2 - (2/3) delta_ij` for Cartesian indices.
pub fn quadrupole_cartesian(i: usize, j: usize) -> Operator3 {
    let s = spin_operators();
    let mut m = s[i].matrix().anticommutator(s[j].matrix()) * 0.5;
    if i == j {
        m = m - Matrix3::identity() * (2.0 / 3.0);
    }
    Operator3::new(m)
}

pub fn quadrupole(component: QuadrupoleComponent) -> Operator3 {
    match component {
        QuadrupoleComponent::Xy => quadrupole_cartesian(0, 1),
        QuadrupoleComponent::Yz => quadrupole_cartesian(1, 2),
        QuadrupoleComponent::Zx => quadrupole_cartesian(2, 0),
        QuadrupoleComponent::Zz => quadrupole_cartesian(2, 2),
        QuadrupoleComponent::X2MinusY2 => Operator3::new(
            *quadrupole_cartesian(0, 0).matrix() - *quadrupole_cartesian(1, 1).matrix(),
        ),
    }
}

pub fn quadrupole_ops() -> BTreeMap<QuadrupoleComponent, Operator3> {
    QuadrupoleComponent::ALL.into_iter().map(|q| (q, quadrupole(q))).collect()
}

/// `H = sum_q alpha_q Q_q`.
pub fn quadrupolar_hamiltonian(
    coeffs: impl IntoIterator<Item = (QuadrupoleComponent, f64)>,
) -> Result<Operator3> {
    let mut m = Matrix3::zero();
    let mut any = false;
    for (q, w) in coeffs {
        if !w.is_finite() {
            return Err(Error::OutOfRange { what: "coefficient", value: w });
        }
        any |= w != 0.0;
        m = m + *quadrupole(q).matrix() * w;
    }
    if !any {
        return Err(Error::AllZero);
    }
    Ok(Operator3::new(m))
}

/// `cos(theta) Q_{x^2-y^2} + sin(theta) Q_xy`.
pub fn planar_quadrupole_hamiltonian(theta: f64) -> Operator3 {
    Operator3::combination([
        (theta.cos(), &quadrupole(QuadrupoleComponent::X2MinusY2)),
        (theta.sin(), &quadrupole(QuadrupoleComponent::Xy)),
    ])
}

/// Unitary taking quadrupolar states to real ones,
/// `(1/sqrt2) [[i, 0, i], [0, sqrt2, 0], [1, 0, -1]]`.
pub fn global_unitary() -> Operator3 {
    let h = FRAC_1_SQRT_2;
    Operator3::new(Matrix3::from_rows([
        [c(0.0, h), O, c(0.0, h)],
        [O, c(1.0, 0.0), O],
        [c(h, 0.0), O, c(-h, 0.0)],
    ]))
}

/// Spectral decomposition of the global unitary: `(theta_k, P_k)` with
/// eigenvalues `e^{i theta_k}`, principal phases.
///
/// These are the complex conjugates of the matrices usually quoted for this
/// decomposition; only this orientation reproduces the global unitary.
pub fn global_unitary_projectors() -> [(f64, Operator3); 3] {
    let r3 = 3f64.sqrt();
    let diag_hi = (3.0 + r3) / 6.0;
    let diag_lo = (3.0 - r3) / 6.0;
    let off = 1.0 / (2.0 * r3);
    let p1 = Matrix3::from_rows([
        [c(diag_hi, 0.0), O, c(off, off)],
        [O, O, O],
        [c(off, -off), O, c(diag_lo, 0.0)],
    ]);
    let p2 = Matrix3::from_rows([
        [c(diag_lo, 0.0), O, c(-off, -off)],
        [O, O, O],
        [c(-off, off), O, c(diag_hi, 0.0)],
    ]);
    let p3 = Matrix3::from_real([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
    let pi = std::f64::consts::PI;
    [
        (5.0 * pi / 12.0, Operator3::new(p1)),
        (-11.0 * pi / 12.0, Operator3::new(p2)),
        (0.0, Operator3::new(p3)),
    ]
}

/// Member of the family `U(alpha) = sum_k e^{i theta_k alpha} P_k` joining the
/// identity (`alpha = 0`) to the global unitary (`alpha = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolatedUnitary {
    pub unitary: Operator3,
    /// False when `alpha` lies outside `[0, 1]`; the operator is still unitary.
    pub alpha_in_range: bool,
}

pub fn interpolating_unitary(alpha: f64) -> InterpolatedUnitary {
    let m = global_unitary_projectors()
        .iter()
        .fold(Matrix3::zero(), |acc, (theta, p)| {
            acc + p.matrix().scale(Complex::from_polar(1.0, theta * alpha))
        });
    InterpolatedUnitary {
        unitary: Operator3::new(m),
        alpha_in_range: (0.0..=1.0).contains(&alpha),
    }
}

/// `U A U^dagger`.
pub fn transform_operator(u: &Operator3, a: &Operator3) -> Result<Operator3> {
    if !u.is_unitary() {
        return Err(Error::NotUnitary { residual: u.matrix().unitarity_residual() });
    }
    Ok(Operator3::new(*u.matrix() * *a.matrix() * u.matrix().adjoint()))
}

/// Anti-unitary map `psi -> M psi*` with `M` unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiUnitary {
    matrix: Matrix3,
}

impl AntiUnitary {
    pub fn new(matrix: Matrix3) -> Result<Self> {
        let residual = matrix.unitarity_residual();
        if residual > TOL_HERM {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { matrix })
    }

    /// The anti-unitary leaving `V |real>` invariant for every real state,
    /// `K (V* V^dagger)` written in `psi -> M psi*` form, `M = V V^T`.
    pub fn invariant_for(v: &Operator3) -> Result<Self> {
        if !v.is_unitary() {
            return Err(Error::NotUnitary { residual: v.matrix().unitarity_residual() });
        }
        Self::new(*v.matrix() * v.matrix().transpose())
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.matrix
    }

    pub fn apply(&self, psi: &QutritState) -> QutritState {
        let v = self.matrix.apply(&crate::numerics::conj(psi.amps()));
        QutritState::new(v).expect("unitary map preserves the norm")
    }

    /// `(M1 K)(M2 K) = M1 M2*`, a unitary.
    pub fn compose(&self, other: &AntiUnitary) -> Matrix3 {
        self.matrix * other.matrix.conj()
    }

    pub fn square(&self) -> Matrix3 {
        self.compose(self)
    }
}

/// Anti-unitary symmetry of the quadrupolar subspace,
/// `psi -> [[0,0,-1],[0,1,0],[-1,0,0]] psi*`.
pub fn anti_unitary_theta() -> AntiUnitary {
    AntiUnitary::new(Matrix3::from_real([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]))
        .expect("signed permutation is unitary")
}

/// Two-spin-1/2 time reversal `K (i sigma_y (x) i sigma_y)` restricted to the
/// triplet sector spanned by `|11>, (|01>+|10>)/sqrt2, |00>` (m = +1, 0, -1).
pub fn triplet_time_reversal() -> AntiUnitary {
    // qubit basis index: |ab> -> 2a + b
    let isy = [[0.0, 1.0], [-1.0, 0.0]];
    let mut t = [[0.0f64; 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    t[2 * a + b][2 * cc + d] = isy[a][cc] * isy[b][d];
                }
            }
        }
    }
    let h = FRAC_1_SQRT_2;
    let proj = [[0.0, 0.0, 0.0, 1.0], [0.0, h, h, 0.0], [1.0, 0.0, 0.0, 0.0]];
    let mut m = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..4)
                .flat_map(|k| (0..4).map(move |l| (k, l)))
                .map(|(k, l)| proj[i][k] * t[k][l] * proj[j][l])
                .sum();
        }
    }
    AntiUnitary::new(Matrix3::from_real(m)).expect("projected time reversal is unitary")
}

/// Scale of the planar Hamiltonian's top eigenvalue, `sqrt(5 + 3 cos 2theta) / (2 sqrt2)`.
pub fn planar_top_eigenvalue(theta: f64) -> f64 {
    (5.0 + 3.0 * (2.0 * theta).cos()).sqrt() / (2.0 * SQRT_2)
}
