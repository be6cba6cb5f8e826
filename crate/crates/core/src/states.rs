//! Qutrit pure states in the `S_z` basis, ordered `(c_{+1}, c_0, c_{-1})`.
//!
//! Quadrupolar states are those with vanishing spin expectation along every
//! axis. In the gauge where `c_0` is real and non-negative they take the form
//! `(alpha, beta, -alpha*)` and form a real vector space.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, c, Complex, Vector3};

/// Normalization tolerance on `sum |c_m|^2`.
pub const TOL_NORM: f64 = 1e-12;
/// Default tolerance for `is_quadrupolar`.
pub const TOL_QUADRUPOLAR: f64 = 1e-9;
/// Below this `|c_0|` the gauge is fixed from `c_{+1}` instead.
pub const GAUGE_C0_FLOOR: f64 = 1e-13;

/// Normalized qutrit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct QutritState {
    amps: Vector3,
}

/// Wire form: `{"amps": [[re, im], [re, im], [re, im]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub amps: [[f64; 2]; 3],
}

impl TryFrom<StateJson> for QutritState {
    type Error = Error;
    fn try_from(j: StateJson) -> Result<Self> {
        QutritState::new(j.amps.map(|[re, im]| c(re, im)))
    }
}

impl From<QutritState> for StateJson {
    fn from(s: QutritState) -> Self {
        StateJson { amps: s.amps.map(|z| [z.re, z.im]) }
    }
}

impl QutritState {
    /// Validates finiteness and unit norm.
    pub fn new(amps: Vector3) -> Result<Self> {
        if !amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::DegenerateVector);
        }
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: Vector3) -> Result<Self> {
        numerics::normalize(&amps)
            .map(|amps| Self { amps })
            .ok_or(Error::DegenerateVector)
    }

    pub fn from_real(r: f64, s: f64, t: f64) -> Result<Self> {
        Self::normalized([c(r, 0.0), c(s, 0.0), c(t, 0.0)])
    }

    /// `S_z` eigenstate with quantum number `m` in {+1, 0, -1}.
    pub fn basis(m: i8) -> Self {
        let mut amps = [Complex::new(0.0, 0.0); 3];
        amps[(1 - m.clamp(-1, 1)) as usize] = c(1.0, 0.0);
        Self { amps }
    }

    pub fn amps(&self) -> &Vector3 {
        &self.amps
    }

    /// `e^{i phase} |psi>`.
    pub fn with_phase(&self, phase: f64) -> Self {
        Self { amps: numerics::scale(&self.amps, Complex::from_polar(1.0, phase)) }
    }

    pub fn negated(&self) -> Self {
        self.with_phase(PI)
    }

    /// Fubini-Study distance `arccos |<a|b>|`.
    pub fn ray_distance(&self, other: &Self) -> f64 {
        overlap(self, other).norm().min(1.0).acos()
    }

    /// `1 - |<a|b>| <= tol`.
    pub fn ray_eq(&self, other: &Self, tol: f64) -> bool {
        1.0 - overlap(self, other).norm() <= tol
    }

    /// Largest imaginary part left after removing the phase of the largest
    /// amplitude; zero for states that are real up to a global phase.
    pub fn imaginary_residue(&self) -> f64 {
        let big = self
            .amps
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .copied()
            .unwrap();
        let rot = big.conj() / big.norm();
        self.amps.iter().map(|z| (z * rot).im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        numerics::max_abs_diff(&self.amps, &other.amps)
    }
}

/// `<psi1|psi2>`.
pub fn overlap(psi1: &QutritState, psi2: &QutritState) -> Complex {
    numerics::inner(&psi1.amps, &psi2.amps)
}

/// `(<S_x>, <S_y>, <S_z>)`.
pub fn spin_expectation(psi: &QutritState) -> [f64; 3] {
    let [p, z, m] = psi.amps;
    // <S_+> = sqrt2 (c+* c0 + c0* c-)
    let s_plus = (p.conj() * z + z.conj() * m) * std::f64::consts::SQRT_2;
    [s_plus.re, s_plus.im, p.norm_sqr() - m.norm_sqr()]
}

pub fn magnetization(psi: &QutritState) -> f64 {
    let s = spin_expectation(psi);
    (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
}

pub fn is_quadrupolar(psi: &QutritState, tol: f64) -> bool {
    magnetization(psi) <= tol
}

/// Point on the quadrupolar sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrupolarAngles {
    theta: f64,
    phi: f64,
}

impl QuadrupolarAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange { what: "theta", value: theta });
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::OutOfRange { what: "phi", value: phi });
        }
        Ok(Self { theta, phi })
    }

    /// Wraps `phi` into `[0, 2pi)`; `theta` must still be in range.
    pub fn wrapped(theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta, phi.rem_euclid(2.0 * PI) % (2.0 * PI))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `(e^{i phi} sin(theta/2)/sqrt2, cos(theta/2), -e^{-i phi} sin(theta/2)/sqrt2)`.
pub fn quadrupolar_from_angles(angles: QuadrupolarAngles) -> QutritState {
    let (s, co) = (angles.theta / 2.0).sin_cos();
    let e = Complex::from_polar(1.0, angles.phi);
    QutritState {
        amps: [e * (s * FRAC_1_SQRT_2), c(co, 0.0), -e.conj() * (s * FRAC_1_SQRT_2)],
    }
}

/// Quadrupolar state as `(alpha, beta, -alpha*)` with `2|alpha|^2 + beta^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupolarForm {
    pub alpha: Complex,
    pub beta: f64,
}

impl QuadrupolarForm {
    pub fn new(alpha: Complex, beta: f64) -> Result<Self> {
        if beta < 0.0 {
            return Err(Error::OutOfRange { what: "beta", value: beta });
        }
        let norm_sq = 2.0 * alpha.norm_sqr() + beta * beta;
        if (norm_sq - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_state(psi: &QutritState) -> Result<Self> {
        let fixed = gauge_fix_quadrupolar(psi)?;
        Ok(Self { alpha: fixed.amps[0], beta: fixed.amps[1].re.max(0.0) })
    }

    pub fn to_state(self) -> QutritState {
        QutritState { amps: [self.alpha, c(self.beta, 0.0), -self.alpha.conj()] }
    }
}

/// Removes the global phase of a quadrupolar state so that `c_0` is real and
/// non-negative and `c_{-1} = -c_{+1}*`.
///
/// When `|c_0| < 1e-13` only a sign is left free by the form; it is fixed so
/// that `arg c_{+1}` lies in `[0, pi)`.
pub fn gauge_fix_quadrupolar(psi: &QutritState) -> Result<QutritState> {
    let mag = magnetization(psi);
    if mag > TOL_QUADRUPOLAR {
        return Err(Error::NotQuadrupolar { magnetization: mag });
    }
    let [p, z, m] = psi.amps;
    // Both conj(c0)^2 and -conj(c+ c-) carry the phase e^{2i mu} we need; their
    // sum never vanishes for a normalized quadrupolar state.
    let combined = z.conj() * z.conj() - (p * m).conj();
    let mu = combined.arg() / 2.0;
    let mut fixed = psi.with_phase(mu);
    let flip = if z.norm() >= GAUGE_C0_FLOOR {
        fixed.amps[1].re < 0.0
    } else {
        let arg = fixed.amps[0].arg();
        !(0.0..PI).contains(&arg)
    };
    if flip {
        fixed = fixed.negated();
    }
    Ok(fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::spin_operators;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_angles(rng: &mut impl Rng) -> QuadrupolarAngles {
        QuadrupolarAngles::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap()
    }

    fn random_form(rng: &mut impl Rng) -> QuadrupolarForm {
        let beta: f64 = rng.gen_range(0.0..1.0);
        let r = ((1.0 - beta * beta) / 2.0).sqrt();
        QuadrupolarForm::new(Complex::from_polar(r, rng.gen_range(-PI..PI)), beta).unwrap()
    }

    #[test]
    fn constructor_rejects_unnormalized() {
        let err = QutritState::new([c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
        assert!(QutritState::normalized([c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn spin_expectation_of_basis_states() {
        assert_eq!(spin_expectation(&QutritState::basis(0)), [0.0, 0.0, 0.0]);
        assert_eq!(spin_expectation(&QutritState::basis(1)), [0.0, 0.0, 1.0]);
        assert!(is_quadrupolar(&QutritState::basis(0), TOL_QUADRUPOLAR));
        assert!(!is_quadrupolar(&QutritState::basis(1), TOL_QUADRUPOLAR));
    }

    #[test]
    fn spin_expectation_matches_matrices() {
        let ops = spin_operators();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let v = [0; 3].map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let psi = QutritState::normalized(v).unwrap();
            let got = spin_expectation(&psi);
            for (k, op) in ops.iter().enumerate() {
                let e = numerics::inner(psi.amps(), &op.matrix().apply(psi.amps()));
                assert!((e.re - got[k]).abs() < 1e-14 && e.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn parametrization_is_quadrupolar() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let psi = quadrupolar_from_angles(random_angles(&mut rng));
            assert!(magnetization(&psi) < 1e-12);
            let form = random_form(&mut rng).to_state();
            assert!(is_quadrupolar(&form, TOL_QUADRUPOLAR));
        }
    }

    #[test]
    fn parametrization_examples() {
        let a = |t, p| quadrupolar_from_angles(QuadrupolarAngles::new(t, p).unwrap());
        assert!(a(0.0, 0.0).max_abs_diff(&QutritState::basis(0)) < 1e-16);
        let h = FRAC_1_SQRT_2;
        let want = QutritState::new([c(h, 0.0), c(0.0, 0.0), c(-h, 0.0)]).unwrap();
        assert!(a(PI, 0.0).max_abs_diff(&want) < 1e-15);
        let want = QutritState::new([c(0.0, 0.5), c(h, 0.0), c(0.0, 0.5)]).unwrap();
        let got = a(PI / 2.0, PI / 2.0);
        assert!(got.max_abs_diff(&want) < 1e-15);
        assert!(is_quadrupolar(&got, 1e-12));
        assert!(QuadrupolarAngles::new(-0.1, 0.0).is_err());
        assert!(QuadrupolarAngles::new(0.1, 2.0 * PI).is_err());
    }

    #[test]
    fn overlap_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = quadrupolar_from_angles(random_angles(&mut rng));
        assert!((overlap(&psi, &psi) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(overlap(&QutritState::basis(1), &QutritState::basis(0)), c(0.0, 0.0));
        for _ in 0..20 {
            let (t1, t2) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..PI));
            let a = quadrupolar_from_angles(QuadrupolarAngles::new(t1, 0.0).unwrap());
            let b = quadrupolar_from_angles(QuadrupolarAngles::new(t2, 0.0).unwrap());
            let want = (t1 / 2.0).cos() * (t2 / 2.0).cos() + (t1 / 2.0).sin() * (t2 / 2.0).sin();
            assert!((overlap(&a, &b) - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn gauge_fix_examples() {
        let fixed = gauge_fix_quadrupolar(&QutritState::basis(0).with_phase(PI / 3.0)).unwrap();
        assert!(fixed.max_abs_diff(&QutritState::basis(0)) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let form = random_form(&mut rng).to_state();
        let fixed = gauge_fix_quadrupolar(&form.with_phase(PI / 7.0)).unwrap();
        assert!(fixed.max_abs_diff(&form) < 1e-14);

        // c0 = 0: arg c+1 = pi/2 already lies in [0, pi), so only the ray check
        // and the (alpha, 0, -alpha*) form are meaningful.
        let h = FRAC_1_SQRT_2;
        let psi = QutritState::new([c(0.0, h), c(0.0, 0.0), c(0.0, h)]).unwrap();
        let fixed = gauge_fix_quadrupolar(&psi).unwrap();
        assert!(fixed.ray_eq(&psi, 1e-15));
        assert!(fixed.max_abs_diff(&psi) < 1e-15);
        let fixed = gauge_fix_quadrupolar(&psi.with_phase(2.0)).unwrap();
        assert!(fixed.max_abs_diff(&psi) < 1e-15);

        assert!(matches!(
            gauge_fix_quadrupolar(&QutritState::basis(1)),
            Err(Error::NotQuadrupolar { .. })
        ));
    }

    #[test]
    fn gauge_fixed_form_holds_for_random_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for k in 0..500 {
            let mut psi = quadrupolar_from_angles(random_angles(&mut rng));
            if k % 10 == 0 {
                psi = quadrupolar_from_angles(QuadrupolarAngles::new(PI, rng.gen_range(0.0..6.0)).unwrap());
            }
            let fixed = gauge_fix_quadrupolar(&psi.with_phase(rng.gen_range(-PI..PI))).unwrap();
            let a = fixed.amps();
            assert!((a[2] + a[0].conj()).norm() < 1e-12);
            assert!(a[1].im.abs() < 1e-12 && a[1].re >= -1e-12);
            assert!(fixed.ray_eq(&psi, 1e-12));
        }
    }

    #[test]
    fn equator_identification_flips_sign() {
        // theta = pi boundary: (pi, phi) and (pi, phi + pi) are the same ray
        let a = quadrupolar_from_angles(QuadrupolarAngles::new(PI, 0.4).unwrap());
        let b = quadrupolar_from_angles(QuadrupolarAngles::new(PI, 0.4 + PI).unwrap());
        assert!(a.max_abs_diff(&b.negated()) < 1e-15);
    }

    #[test]
    fn quadrupolar_states_closed_under_real_combinations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = gauge_fix_quadrupolar(&quadrupolar_from_angles(random_angles(&mut rng))).unwrap();
            let b = gauge_fix_quadrupolar(&quadrupolar_from_angles(random_angles(&mut rng))).unwrap();
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let v = numerics::add(
                &numerics::scale(a.amps(), c(x, 0.0)),
                &numerics::scale(b.amps(), c(y, 0.0)),
            );
            if let Ok(s) = QutritState::normalized(v) {
                assert!(is_quadrupolar(&s, 1e-12));
            }
        }
    }

    #[test]
    fn json_round_trip_validates() {
        let psi = quadrupolar_from_angles(QuadrupolarAngles::new(1.0, 2.0).unwrap());
        let text = serde_json::to_string(&psi).unwrap();
        let back: QutritState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, psi);
        assert!(serde_json::from_str::<QutritState>(r#"{"amps":[[1,0],[1,0],[0,0]]}"#).is_err());
    }
}
