//! Evolution under pure spin Hamiltonians, written in the real basis
//! (`H = -a S'x + b S'y + c S'z`) and pulled back to the quadrupolar basis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::berry::{classify_and_verify, wrap_phase, PhaseReport, StateLoop, TOL_CONSISTENCY};
use crate::error::{Error, Result};
use crate::numerics::{c, propagator, Complex};
use crate::operators::{global_unitary, spin_operators_real_basis, transform_operator, Operator3};
use crate::states::{magnetization, overlap, QutritState, TOL_NORM, TOL_QUADRUPOLAR};

/// Default samples per period for sampled evolution loops.
pub const DEFAULT_SAMPLES: usize = 1024;
/// Samples further than this from the quadrupolar subspace fail the check.
pub const TOL_PRESERVED: f64 = 1e-8;
/// Tolerance of the geodesic condition accepted by `geodesic_trajectory`.
pub const TOL_GEODESIC: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinFieldReal {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SpinFieldReal {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let field = Self { a, b, c };
        let omega = field.omega();
        if !omega.is_finite() || omega == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(field)
    }

    pub fn omega(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c).sqrt()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega()
    }

    /// `[[0, -ia, -ic], [ia, 0, -ib], [ic, ib, 0]]`.
    pub fn hamiltonian(&self) -> Operator3 {
        let [sx, sy, sz] = spin_operators_real_basis();
        Operator3::combination([(-self.a, &sx), (self.b, &sy), (self.c, &sz)])
    }

    /// The same Hamiltonian in the quadrupolar basis, `U^dagger H U`.
    pub fn quadrupolar_hamiltonian(&self) -> Operator3 {
        transform_operator(&global_unitary().adjoint(), &self.hamiltonian()).expect("global unitary is unitary")
    }

    /// Unit rotation axis in the real basis: `(b, -c, a) / omega`.
    pub fn axis(&self) -> [f64; 3] {
        let w = self.omega();
        [self.b / w, -self.c / w, self.a / w]
    }
}

/// Real unit 3-vector `(r, s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealState3 {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl RealState3 {
    pub fn new(r: f64, s: f64, t: f64) -> Result<Self> {
        let norm_sq = r * r + s * s + t * t;
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { r, s, t })
    }

    pub fn normalized(r: f64, s: f64, t: f64) -> Result<Self> {
        let n = (r * r + s * s + t * t).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::DegenerateVector);
        }
        Ok(Self { r: r / n, s: s / n, t: t / n })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.r, self.s, self.t]
    }

    pub fn to_state(&self) -> QutritState {
        QutritState::new([c(self.r, 0.0), c(self.s, 0.0), c(self.t, 0.0)]).expect("unit vector")
    }

    pub fn norm_sq(&self) -> f64 {
        self.r * self.r + self.s * self.s + self.t * self.t
    }

    pub fn distance_to(&self, other: &Self) -> f64 {
        let [x, y, z] = self.components();
        let [u, v, w] = other.components();
        ((x - u).powi(2) + (y - v).powi(2) + (z - w).powi(2)).sqrt()
    }

    pub fn negated(&self) -> Self {
        Self { r: -self.r, s: -self.s, t: -self.t }
    }
}

/// Closed-form real-basis evolution, term by term.
pub fn evolve_closed_form(field: &SpinFieldReal, psi0: &RealState3, tau: f64) -> RealState3 {
    let SpinFieldReal { a, b, c } = *field;
    let RealState3 { r: r0, s: s0, t: t0 } = *psi0;
    let w = field.omega();
    let (sn, cs) = (w * tau).sin_cos();
    let r = a * b * t0 + b * b * r0 - b * c * s0 - w * (a * s0 + c * t0) * sn
        + (a * a * r0 - a * b * t0 + b * c * s0 + c * c * r0) * cs;
    let s = -a * c * t0 - b * c * r0 + c * c * s0 + w * (a * r0 - b * t0) * sn
        + (a * a * s0 + a * c * t0 + b * b * s0 + b * c * r0) * cs;
    let t = a * a * t0 + a * b * r0 - a * c * s0 + w * (b * s0 + c * r0) * sn
        + (-a * b * r0 + a * c * s0 + b * b * t0 + c * c * t0) * cs;
    let w2 = w * w;
    RealState3 { r: r / w2, s: s / w2, t: t / w2 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericEvolution {
    pub state: RealState3,
    /// Largest imaginary part of the propagated amplitudes.
    pub imaginary_residue: f64,
}

/// `exp(-i H tau) psi0` through the eigendecomposition.
pub fn evolve_numeric(field: &SpinFieldReal, psi0: &RealState3, tau: f64) -> Result<NumericEvolution> {
    let u = propagator(field.hamiltonian().matrix(), tau)?;
    let out = u.apply(psi0.to_state().amps());
    let imaginary_residue = out.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(NumericEvolution {
        state: RealState3 { r: out[0].re, s: out[1].re, t: out[2].re },
        imaginary_residue,
    })
}

/// `a t0 + b r0 - c s0`.
pub fn geodesic_residual(field: &SpinFieldReal, psi0: &RealState3) -> f64 {
    field.a * psi0.t + field.b * psi0.r - field.c * psi0.s
}

pub fn geodesic_condition(field: &SpinFieldReal, psi0: &RealState3, tol: f64) -> bool {
    geodesic_residual(field, psi0).abs() <= tol
}

/// `cos(w tau) psi0 + sin(w tau) / (a w) v`, valid when the geodesic
/// condition holds.
pub fn geodesic_trajectory(field: &SpinFieldReal, psi0: &RealState3, tau: f64) -> Result<RealState3> {
    let residual = geodesic_residual(field, psi0);
    if residual.abs() > TOL_GEODESIC {
        return Err(Error::ConditionViolated { residual });
    }
    let SpinFieldReal { a, b, c } = *field;
    if a == 0.0 {
        return Err(Error::ZeroDenominator("geodesic trajectory needs a != 0"));
    }
    let RealState3 { r: r0, s: s0, t: t0 } = *psi0;
    let w = field.omega();
    let (sn, cs) = (w * tau).sin_cos();
    let k = sn / (a * w);
    let v = [-a * a * s0 + b * c * r0 - c * c * s0, a * a * r0 + b * b * r0 - b * c * s0, a * (b * s0 + c * r0)];
    Ok(RealState3 { r: cs * r0 + k * v[0], s: cs * s0 + k * v[1], t: cs * t0 + k * v[2] })
}

/// `||psi(tau) + psi(0)||^2`.
pub fn return_distance_sq(field: &SpinFieldReal, psi0: &RealState3, tau: f64) -> f64 {
    let p = evolve_closed_form(field, psi0, tau);
    (p.r + psi0.r).powi(2) + (p.s + psi0.s).powi(2) + (p.t + psi0.t).powi(2)
}

/// Least-squares fit of `A + B cos(w tau)` to the return distance over one
/// period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceFit {
    pub a: f64,
    pub b: f64,
    /// Largest pointwise deviation from the fitted curve.
    pub residual: f64,
}

pub fn fit_return_distance(field: &SpinFieldReal, psi0: &RealState3, samples: usize) -> DistanceFit {
    let w = field.omega();
    let period = field.period();
    let points: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let tau = period * k as f64 / samples as f64;
            ((w * tau).cos(), return_distance_sq(field, psi0, tau))
        })
        .collect();
    let n = samples as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0 * p.0, acc.1 + p.0 * p.1));
    let det = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / det;
    let a = (sy - b * sx) / n;
    let residual = points.iter().map(|(x, y)| (a + b * x - y).abs()).fold(0.0, f64::max);
    DistanceFit { a, b, residual }
}

/// Aharonov-Anandan phase of a quadrupolar state under a pure spin field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AaPhase {
    /// Geometric phase, `0` or `pi`.
    pub phase: f64,
    /// `arg <psi(0)|psi(P)>` over the ray period `P`.
    pub total_phase: f64,
    /// `int <H> dt` over the ray period.
    pub dynamical_phase: f64,
    /// Time after which the ray first returns: `T/2` or `T`.
    pub ray_period: f64,
    pub max_quadrupolar_violation: f64,
    pub samples: usize,
    pub report: PhaseReport,
}

/// `1 - |<psi0|psi(T/2)>|` below this means the ray already closed at `T/2`.
const RAY_RETURN_TOL: f64 = 1e-12;

pub fn aa_phase(field: &SpinFieldReal, psi_q0: &QutritState, samples: usize) -> Result<AaPhase> {
    let mag = magnetization(psi_q0);
    if mag > TOL_QUADRUPOLAR {
        return Err(Error::NotQuadrupolar { magnetization: mag });
    }
    let h = field.quadrupolar_hamiltonian();
    let period = field.period();
    let full = QutritState::new(propagator(h.matrix(), period)?.apply(psi_q0.amps()))?;
    if full.max_abs_diff(psi_q0) > 1e-10 {
        return Err(Error::NonCyclic);
    }
    let half = QutritState::new(propagator(h.matrix(), period / 2.0)?.apply(psi_q0.amps()))?;
    let (ray_period, end) = if 1.0 - overlap(psi_q0, &half).norm() <= RAY_RETURN_TOL {
        (period / 2.0, half)
    } else {
        (period, full)
    };
    let total_phase = wrap_phase(overlap(psi_q0, &end).arg());

    let samples = samples.max(3);
    let dt = ray_period / samples as f64;
    let step = propagator(h.matrix(), dt)?;
    let mut states = Vec::with_capacity(samples);
    let mut psi = *psi_q0;
    let mut dynamical_phase = 0.0;
    let mut max_quadrupolar_violation: f64 = 0.0;
    for _ in 0..samples {
        states.push(psi);
        max_quadrupolar_violation = max_quadrupolar_violation.max(magnetization(&psi));
        dynamical_phase += expectation(&h, &psi) * dt;
        psi = QutritState::normalized(step.apply(psi.amps()))?;
    }
    if max_quadrupolar_violation > TOL_PRESERVED {
        return Err(Error::NotQuadrupolar { magnetization: max_quadrupolar_violation });
    }
    let phase = wrap_phase(total_phase + dynamical_phase);
    let (value, distance) = crate::berry::nearest_quantized(phase);
    if distance > 1e-6 {
        return Err(Error::NotQuantized { gamma: phase });
    }
    let report = classify_and_verify(&StateLoop::new(states)?)?;
    if wrap_phase(report.gamma - value).abs() > TOL_CONSISTENCY {
        return Err(Error::InconsistentPhases {
            discrete: report.gamma,
            decomposed: value,
            suggested_samples: 2 * samples,
        });
    }
    Ok(AaPhase {
        phase: value,
        total_phase,
        dynamical_phase,
        ray_period,
        max_quadrupolar_violation,
        samples,
        report,
    })
}

/// `<psi|H|psi>` for Hermitian `H`.
pub fn expectation(h: &Operator3, psi: &QutritState) -> f64 {
    let hp = h.matrix().apply(psi.amps());
    psi.amps().iter().zip(hp.iter()).map(|(a, b)| a.conj() * b).sum::<Complex>().re
}

/// Samples `(t, psi(t))` of `exp(-i H t) psi0` for `t = horizon k / steps`,
/// `k = 0..=steps`.
pub fn sample_evolution(
    hamiltonian: &Operator3,
    psi0: &QutritState,
    horizon: f64,
    steps: usize,
) -> Result<Vec<(f64, QutritState)>> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|k| {
            let t = horizon * k as f64 / steps as f64;
            let u = propagator(hamiltonian.matrix(), t)?;
            Ok((t, QutritState::normalized(u.apply(psi0.amps()))?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub max_violation: f64,
    pub samples: usize,
    pub preserved: bool,
}

/// Largest magnetization along the evolution of `psi_q0` under `hamiltonian`.
pub fn quadrupolar_preservation_check(
    hamiltonian: &Operator3,
    psi_q0: &QutritState,
    horizon: f64,
    steps: usize,
) -> Result<PreservationReport> {
    let samples = sample_evolution(hamiltonian, psi_q0, horizon, steps)?;
    let max_violation = samples.iter().map(|(_, s)| magnetization(s)).fold(0.0, f64::max);
    Ok(PreservationReport {
        max_violation,
        samples: samples.len(),
        preserved: max_violation <= TOL_PRESERVED,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::{random_quadrupolar_state, random_unit_vector};
    use crate::majorana::{are_antipodal, stars_from_state};
    use crate::numerics::eig_hermitian3;
    use crate::operators::{quadrupole, spin_operators, QuadrupoleComponent};
    use crate::states::{gauge_fix_quadrupolar, is_quadrupolar};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(rng: &mut impl Rng) -> SpinFieldReal {
        SpinFieldReal::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap()
    }

    fn random_real(rng: &mut impl Rng) -> RealState3 {
        let u = random_unit_vector(rng);
        RealState3::new(u[0], u[1], u[2]).unwrap()
    }

    /// Unit vector satisfying the geodesic condition: orthogonal to the axis.
    fn geodesic_start(field: &SpinFieldReal, rng: &mut impl Rng) -> RealState3 {
        let n = field.axis();
        let v = random_unit_vector(rng);
        let p: f64 = (0..3).map(|k| n[k] * v[k]).sum();
        RealState3::normalized(v[0] - p * n[0], v[1] - p * n[1], v[2] - p * n[2]).unwrap()
    }

    #[test]
    fn hamiltonian_matrix_and_spectrum() {
        let f = SpinFieldReal::new(0.3, -1.2, 0.7).unwrap();
        let h = f.hamiltonian();
        let m = h.matrix().m;
        assert!((m[0][1] - c(0.0, -0.3)).norm() < 1e-15);
        assert!((m[0][2] - c(0.0, -0.7)).norm() < 1e-15);
        assert!((m[1][2] - c(0.0, 1.2)).norm() < 1e-15);
        let e = eig_hermitian3(h.matrix()).unwrap();
        let w = f.omega();
        assert!((e.values[0] + w).abs() < 1e-12 && e.values[1].abs() < 1e-12 && (e.values[2] - w).abs() < 1e-12);
        // pulled back, it is a pure spin Hamiltonian -a Sx - b Sy - c Sz
        let s = spin_operators();
        let want = Operator3::combination([(-0.3, &s[0]), (1.2, &s[1]), (-0.7, &s[2])]);
        assert!(f.quadrupolar_hamiltonian().matrix().max_abs_diff(want.matrix()) < 1e-12);
        assert!(matches!(SpinFieldReal::new(0.0, 0.0, 0.0), Err(Error::ZeroField)));
    }

    #[test]
    fn closed_form_matches_propagator() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..200 {
            let f = random_field(&mut rng);
            let psi = random_real(&mut rng);
            for tau in [0.0, 1.7, rng.gen_range(0.0..4.0 * f.period())] {
                let closed = evolve_closed_form(&f, &psi, tau);
                let numeric = evolve_numeric(&f, &psi, tau).unwrap();
                assert!(closed.distance_to(&numeric.state) < 1e-8);
                assert!(numeric.imaginary_residue < 1e-12);
                assert!((closed.norm_sq() - 1.0).abs() < 1e-12);
            }
            assert!(evolve_closed_form(&f, &psi, 0.0).distance_to(&psi) < 1e-14);
            assert!(evolve_closed_form(&f, &psi, f.period()).distance_to(&psi) < 1e-10);
        }
    }

    #[test]
    fn geodesic_condition_examples() {
        let x = SpinFieldReal::new(1.0, 0.0, 0.0).unwrap();
        assert!(geodesic_condition(&x, &RealState3::new(0.6, 0.8, 0.0).unwrap(), 1e-12));
        assert!(!geodesic_condition(&x, &RealState3::new(0.0, 0.0, 1.0).unwrap(), 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let f = random_field(&mut rng);
            let psi = geodesic_start(&f, &mut rng);
            assert!(geodesic_condition(&f, &psi, 1e-12));
            // the condition is linear, so it is a plane through the origin
            assert!(geodesic_condition(&f, &psi.negated(), 1e-12));
            let half = evolve_closed_form(&f, &psi, f.period() / 2.0);
            assert!(half.distance_to(&psi.negated()) < 1e-10);
        }
    }

    #[test]
    fn geodesic_trajectory_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let f = random_field(&mut rng);
            let psi = geodesic_start(&f, &mut rng);
            assert!(geodesic_trajectory(&f, &psi, 0.0).unwrap().distance_to(&psi) < 1e-14);
            for tau in [0.3, f.period() / 4.0, f.period() / 2.0, 2.9] {
                let g = geodesic_trajectory(&f, &psi, tau).unwrap();
                assert!(g.distance_to(&evolve_closed_form(&f, &psi, tau)) < 1e-9);
            }
            let quarter = geodesic_trajectory(&f, &psi, f.period() / 4.0).unwrap();
            assert!((quarter.norm_sq() - 1.0).abs() < 1e-9);
        }
        let f = SpinFieldReal::new(1.0, 0.5, 0.2).unwrap();
        let off = RealState3::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(geodesic_trajectory(&f, &off, 1.0), Err(Error::ConditionViolated { .. })));
        let no_a = SpinFieldReal::new(0.0, 1.0, 0.0).unwrap();
        let psi = RealState3::new(0.0, 1.0, 0.0).unwrap();
        assert!(geodesic_condition(&no_a, &psi, 1e-12));
        assert!(matches!(geodesic_trajectory(&no_a, &psi, 1.0), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn return_distance_is_a_cosine() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            let f = random_field(&mut rng);
            let psi = random_real(&mut rng);
            let fit = fit_return_distance(&f, &psi, 64);
            assert!(fit.residual < 1e-9);
            let n = f.axis();
            let p = n[0] * psi.r + n[1] * psi.s + n[2] * psi.t;
            assert!((fit.a - (2.0 + 2.0 * p * p)).abs() < 1e-9);
            assert!((fit.b - 2.0 * (1.0 - p * p)).abs() < 1e-9);
            // minimum A - B at T/2
            let min = return_distance_sq(&f, &psi, f.period() / 2.0);
            assert!((min - (fit.a - fit.b)).abs() < 1e-9);
        }
    }

    fn quadrupolar_image(psi: &RealState3) -> QutritState {
        let q = global_unitary().adjoint().apply(&psi.to_state()).unwrap();
        gauge_fix_quadrupolar(&q).unwrap()
    }

    #[test]
    fn aa_phase_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..5 {
            let f = random_field(&mut rng);
            let geo = aa_phase(&f, &quadrupolar_image(&geodesic_start(&f, &mut rng)), 1024).unwrap();
            assert_eq!(geo.phase, PI);
            assert!(geo.dynamical_phase.abs() < 1e-10);
            assert!((geo.ray_period - f.period() / 2.0).abs() < 1e-12);
            let generic = aa_phase(&f, &quadrupolar_image(&random_real(&mut rng)), 1024).unwrap();
            assert_eq!(generic.phase, 0.0);
            let n = f.axis();
            let still = RealState3::new(n[0], n[1], n[2]).unwrap();
            assert_eq!(aa_phase(&f, &quadrupolar_image(&still), 256).unwrap().phase, 0.0);
        }
        let f = SpinFieldReal::new(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(aa_phase(&f, &QutritState::basis(1), 64), Err(Error::NotQuadrupolar { .. })));
    }

    #[test]
    fn basis_transport() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let u = global_unitary();
        for _ in 0..50 {
            let f = random_field(&mut rng);
            let psi = random_real(&mut rng);
            let tau = rng.gen_range(0.0..10.0);
            let real_evolved = evolve_numeric(&f, &psi, tau).unwrap().state.to_state();
            let q0 = u.adjoint().apply(&psi.to_state()).unwrap();
            let q = propagator(f.quadrupolar_hamiltonian().matrix(), tau).unwrap().apply(q0.amps());
            let want = u.adjoint().apply(&real_evolved).unwrap();
            assert!(crate::numerics::max_abs_diff(&q, want.amps()) < 1e-10);
        }
    }

    #[test]
    fn spin_evolution_keeps_stars_antipodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..10 {
            let f = random_field(&mut rng);
            let q = random_quadrupolar_state(&mut rng);
            for (_, s) in sample_evolution(&f.quadrupolar_hamiltonian(), &q, f.period(), 50).unwrap() {
                assert!(is_quadrupolar(&s, 1e-9));
                assert!(are_antipodal(&stars_from_state(&s), 1e-9));
            }
        }
    }

    #[test]
    fn preservation_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let s = spin_operators();
        let q = random_quadrupolar_state(&mut rng);
        let report = quadrupolar_preservation_check(&s[0], &q, 10.0, 200).unwrap();
        assert!(report.preserved && report.max_violation <= 1e-8);
        let qxy = quadrupole(QuadrupoleComponent::Xy);
        let broken = quadrupolar_preservation_check(&qxy, &q, 10.0, 200).unwrap();
        assert!(!broken.preserved && broken.max_violation > 1e-3);
        let e = eig_hermitian3(qxy.matrix()).unwrap();
        let eigen = QutritState::new(e.vectors[0]).unwrap();
        assert!(is_quadrupolar(&eigen, 1e-12));
        assert!(quadrupolar_preservation_check(&qxy, &eigen, 10.0, 200).unwrap().preserved);
    }
}
