//! The acceptance checks, runnable as suites with a fixed seed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::berry::{
    bargmann_invariant, classify_and_verify, correlation_factor, discrete_geometric_phase,
    eigenfamily_topology, geodesic_loop, nearest_quantized, pi_count, solid_angle, symmetrized_norm_sq_of_d,
    track_stars, wrap_phase, ClosurePermutation, LoopClass, StateLoop, TOL_CONSISTENCY,
};
use crate::dynamics::{
    aa_phase, evolve_closed_form, evolve_numeric, fit_return_distance, RealState3, SpinFieldReal,
};
use crate::error::{Error, Result};
use crate::loops::{
    exchange_loop, individual_loop, morph_loop, piecewise_geodesic_quadrupolar_loop,
    piecewise_geodesic_real_loop, planar_family_path, random_hamiltonian_loop, random_quadrupolar_state,
    random_state, random_unit_vector,
};
use crate::majorana::{
    dot, stars_from_state, symmetrized_norm_sq, symmetrized_two_qubit, Star, StarSet,
};
use crate::numerics::{c, eig_hermitian3, Complex, Matrix3};
use crate::operators::{
    anti_unitary_theta, global_unitary, global_unitary_projectors, interpolating_unitary,
    planar_quadrupole_hamiltonian, planar_top_eigenvalue, quadrupolar_hamiltonian, triplet_time_reversal,
    QuadrupoleComponent,
};
use crate::states::{magnetization, overlap, QuadrupolarForm, QutritState};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 7;
/// Alpha values of the morph sequence that must stay in the exchange class.
pub const MORPH_EXCHANGE_ALPHAS: [f64; 7] = [0.0, 0.2, 0.5, 0.75, 0.9, 0.99, 0.999];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

impl Bound {
    fn symbol(self) -> &'static str {
        match self {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let worst = self
            .measurements
            .iter()
            .map(|m| format!("{}={:.3e} ({} {:.1e})", m.name, m.value, m.bound.symbol(), m.limit))
            .collect::<Vec<_>>()
            .join(" ");
        match &self.error {
            Some(e) => format!("{status} [{:>2}] {}: error: {e}", self.id, self.name),
            None => format!("{status} [{:>2}] {}: {worst}", self.id, self.name),
        }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary_line())
    }
}

/// Collects measurements for one criterion.
struct Checks(Vec<Measurement>);

impl Checks {
    fn new() -> Self {
        Self(Vec::new())
    }

    /// Passes when `value <= limit`.
    fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, Bound::AtMost, limit, value <= limit);
    }

    fn at_least(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, Bound::AtLeast, limit, value >= limit);
    }

    fn push(&mut self, name: &str, value: f64, bound: Bound, limit: f64, passed: bool) {
        self.0.push(Measurement { name: name.to_string(), value, bound, limit, passed });
    }

    /// Boolean condition recorded as a count of violations.
    fn count_zero(&mut self, name: &str, violations: usize) {
        self.at_most(name, violations as f64, 0.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Bargmann,
    Spectrum,
    Stars,
    Symmetry,
    Quantization,
    Decomposition,
    Geometry,
    Topology,
    Dynamics,
    Morph,
    Entanglement,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::All,
        Suite::Bargmann,
        Suite::Spectrum,
        Suite::Stars,
        Suite::Symmetry,
        Suite::Quantization,
        Suite::Decomposition,
        Suite::Geometry,
        Suite::Topology,
        Suite::Dynamics,
        Suite::Morph,
        Suite::Entanglement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Bargmann => "bargmann",
            Suite::Spectrum => "spectrum",
            Suite::Stars => "stars",
            Suite::Symmetry => "symmetry",
            Suite::Quantization => "quantization",
            Suite::Decomposition => "decomposition",
            Suite::Geometry => "geometry",
            Suite::Topology => "topology",
            Suite::Dynamics => "dynamics",
            Suite::Morph => "morph",
            Suite::Entanglement => "entanglement",
        }
    }

    pub fn criteria(self) -> Vec<u32> {
        match self {
            Suite::All => (1..=12).collect(),
            Suite::Bargmann => vec![1],
            Suite::Spectrum => vec![2],
            Suite::Stars => vec![3, 12],
            Suite::Symmetry => vec![4],
            Suite::Quantization => vec![5],
            Suite::Decomposition => vec![6, 7],
            Suite::Geometry => vec![8],
            Suite::Topology => vec![9],
            Suite::Dynamics => vec![10],
            Suite::Morph => vec![11],
            Suite::Entanglement => vec![12],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Unknown { kind: "suite", name: s.to_string() })
    }
}

pub fn criterion_name(id: u32) -> &'static str {
    match id {
        1 => "bargmann geodesic formula",
        2 => "planar eigenvalue law",
        3 => "quadrupolar antipodality",
        4 => "real mapping and anti-unitary symmetry",
        5 => "phase quantization",
        6 => "decomposition consistency",
        7 => "exchange solid angle",
        8 => "eigen-axis orthogonality",
        9 => "eigenfamily topology",
        10 => "spin dynamics",
        11 => "morph sequence",
        12 => "two-qubit entanglement",
        _ => "unknown",
    }
}

/// Independent stream per criterion, so results do not depend on which
/// other criteria run.
fn rng_for(seed: u64, id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

pub fn run_criterion(id: u32, seed: u64) -> CriterionResult {
    let mut rng = rng_for(seed, id);
    let mut checks = Checks::new();
    let outcome = match id {
        1 => bargmann_formula(&mut rng, &mut checks),
        2 => eigenvalue_law(&mut checks),
        3 => antipodality(&mut rng, &mut checks),
        4 => real_mapping(&mut rng, &mut checks),
        5 => quantization(&mut rng, &mut checks),
        6 => decomposition(&mut rng, &mut checks),
        7 => exchange_solid_angle(&mut rng, &mut checks),
        8 => axis_orthogonality(&mut rng, &mut checks),
        9 => topology(&mut rng, &mut checks),
        10 => dynamics(&mut rng, &mut checks),
        11 => morph(&mut checks),
        12 => entanglement(&mut rng, &mut checks),
        _ => Err(Error::Unknown { kind: "criterion", name: id.to_string() }),
    };
    let error = outcome.err().map(|e| e.to_string());
    let passed = error.is_none() && !checks.0.is_empty() && checks.0.iter().all(|m| m.passed);
    CriterionResult { id, name: criterion_name(id).to_string(), passed, measurements: checks.0, error }
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<CriterionResult> {
    suite.criteria().into_iter().map(|id| run_criterion(id, seed)).collect()
}

fn random_real_pair(rng: &mut impl Rng) -> (QutritState, QutritState) {
    loop {
        let a = random_unit_vector(rng);
        let b = random_unit_vector(rng);
        let o = dot(&a, &b).abs();
        if o > 0.05 && o < 0.95 {
            let to = |u: [f64; 3]| QutritState::from_real(u[0], u[1], u[2]).unwrap();
            return (to(a), to(b));
        }
    }
}

fn bargmann_formula(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut worst: f64 = 0.0;
    let mut three: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = random_real_pair(rng);
        for n in 3..=12 {
            let got = bargmann_invariant(geodesic_loop(&a, &b, n)?.states())?;
            let nf = n as f64;
            let want = (PI / nf).cos().powi(n as i32 - 1) * (PI - PI / nf).cos();
            worst = worst.max((got.re - want).abs()).max(got.im.abs());
            if n == 3 {
                three = three.max((got.re + 0.125).abs());
            }
        }
    }
    checks.at_most("max_dev_n3_to_12", worst, 1e-12);
    checks.at_most("n3_dev_from_-1/8", three, 1e-12);
    Ok(())
}

fn eigenvalue_law(checks: &mut Checks) -> Result<()> {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let theta = 2.0 * PI * k as f64 / 100.0;
        let e = eig_hermitian3(planar_quadrupole_hamiltonian(theta).matrix())?;
        worst = worst.max((e.values[2] - planar_top_eigenvalue(theta)).abs());
    }
    checks.at_most("max_top_eigenvalue_dev", worst, 1e-10);
    Ok(())
}

fn antipodality(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let u_dag = global_unitary().adjoint();
    let mut worst_dot: f64 = 0.0;
    let mut worst_angles: f64 = 0.0;
    for _ in 0..1000 {
        let q = random_quadrupolar_state(rng);
        let [u1, u2] = stars_from_state(&q).unit_vectors();
        worst_dot = worst_dot.max(dot(&u1, &u2) + 1.0);

        // closed-form star angles, written for the image of (r, s, -t)
        let v = random_unit_vector(rng);
        let (r, s, t) = (v[0], v[1], v[2]);
        let image = u_dag.apply(&QutritState::from_real(r, s, -t)?)?;
        let rad = (s * s + r * r + t * t).sqrt();
        let rt = (r * r + t * t).sqrt();
        let closed = StarSet::new(
            Star::new(2.0 * ((s + rad) / rt).atan(), c(-t, r).arg()),
            Star::new(2.0 * ((-s + rad) / rt).atan(), c(t, -r).arg()),
        );
        worst_angles = worst_angles.max(stars_from_state(&image).matching_distance(&closed));
    }
    checks.at_most("max_u1.u2+1", worst_dot, 1e-9);
    checks.at_most("max_closed_form_angle_dev", worst_angles, 1e-9);
    Ok(())
}

fn random_form_state(rng: &mut impl Rng) -> QutritState {
    let beta: f64 = rng.gen_range(0.0..1.0);
    let r = ((1.0 - beta * beta) / 2.0).sqrt();
    let alpha = Complex::from_polar(r, rng.gen_range(-PI..PI));
    QuadrupolarForm::new(alpha, beta).expect("valid form").to_state()
}

/// `min over phases ||T(e^{i eta} psi) + e^{i eta} psi||^2 = 2 - 2 |<psi|T psi>|`.
pub fn time_reversal_odd_residual(psi: &QutritState) -> f64 {
    let t = triplet_time_reversal().apply(psi);
    (2.0 - 2.0 * overlap(psi, &t).norm()).max(0.0)
}

fn real_mapping(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let u = global_unitary();
    let theta = anti_unitary_theta();
    let triplet = triplet_time_reversal();
    let mut imag: f64 = 0.0;
    let mut theta_ray: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for _ in 0..1000 {
        let q = random_form_state(rng);
        let real = u.apply(&q)?;
        imag = imag.max(real.amps().iter().map(|z| z.im.abs()).fold(0.0, f64::max));
        theta_ray = theta_ray.max(1.0 - overlap(&q, &theta.apply(&q)).norm());
        let tq = triplet.apply(&q);
        odd = odd.max(tq.max_abs_diff(&q.negated()));
    }
    let square = theta.square().max_abs_diff(&Matrix3::identity());

    // converse: a state sent to minus itself (for its best phase) is quadrupolar
    let mut false_odd = 0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..1000 {
        let psi = random_state(rng);
        let residual = time_reversal_odd_residual(&psi);
        let mag = magnetization(&psi);
        if residual <= 1e-12 && mag > 1e-6 {
            false_odd += 1;
        }
        if mag > 1e-3 {
            min_gap = min_gap.min(residual);
        }
    }
    checks.at_most("max_imag_of_U_psi", imag, 1e-12);
    checks.at_most("theta_squared_minus_identity", square, 0.0);
    checks.at_most("max_theta_ray_dev", theta_ray, 1e-12);
    checks.at_most("max_T_psi_plus_psi", odd, 1e-12);
    checks.count_zero("odd_but_not_quadrupolar", false_odd);
    checks.at_least("min_residual_of_magnetized", min_gap, 1e-9);
    Ok(())
}

fn quantization(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut worst_quad: f64 = 0.0;
    let mut worst_real: f64 = 0.0;
    let mut min_len = usize::MAX;
    for _ in 0..1000 {
        let q = piecewise_geodesic_quadrupolar_loop(rng, 5, 400)?;
        let r = piecewise_geodesic_real_loop(rng, 5, 400)?;
        min_len = min_len.min(q.len()).min(r.len());
        worst_quad = worst_quad.max(nearest_quantized(discrete_geometric_phase(&q)?).1);
        worst_real = worst_real.max(nearest_quantized(discrete_geometric_phase(&r)?).1);
    }
    let mut exchange_dev: f64 = 0.0;
    let mut individual_dev: f64 = 0.0;
    let mut wrong_class = 0;
    for _ in 0..100 {
        let q = random_quadrupolar_state(rng);
        let ex = classify_and_verify(&exchange_loop(&q, 400)?)?;
        exchange_dev = exchange_dev.max(wrap_phase(ex.gamma - PI).abs());
        wrong_class += (ex.class != LoopClass::Exchange) as usize;
        let axis = random_unit_vector(rng);
        let ind = classify_and_verify(&individual_loop(&q, &axis, 400)?)?;
        individual_dev = individual_dev.max(wrap_phase(ind.gamma).abs());
        wrong_class += (ind.class != LoopClass::IndividualLoops) as usize;
    }
    checks.at_least("min_loop_length", min_len as f64, 400.0);
    checks.at_most("quadrupolar_loops_max_dev", worst_quad, 1e-3);
    checks.at_most("real_loops_max_dev", worst_real, 1e-3);
    checks.at_most("exchange_max_dev_from_pi", exchange_dev, 1e-3);
    checks.at_most("individual_max_dev_from_0", individual_dev, 1e-3);
    checks.count_zero("misclassified", wrong_class);
    Ok(())
}

/// `beta` against `-(d / N^2) dN^2/dd`, with `N^2` evaluated on actual
/// symmetrized star states and differentiated numerically.
fn beta_finite_difference(d: f64) -> f64 {
    let h = 1e-6;
    let norm = |d: f64| {
        let gamma = (1.0 - d).clamp(-1.0, 1.0).acos();
        symmetrized_norm_sq(&StarSet::new(Star::new(0.4, 1.0), rotated_away(0.4, 1.0, gamma)))
    };
    let (lo, hi) = ((d - h).max(0.0), (d + h).min(2.0));
    -d / norm(d) * (norm(hi) - norm(lo)) / (hi - lo)
}

/// Star at great-circle distance `gamma` from `(theta, phi)`.
fn rotated_away(theta: f64, phi: f64, gamma: f64) -> Star {
    let u = Star::new(theta, phi).unit_vector();
    let perp = crate::loops::perpendicular(&u);
    let (s, co) = gamma.sin_cos();
    Star::from_unit_vector(&[0, 1, 2].map(|k| u[k] * co + perp[k] * s))
}

fn decomposition(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut consistency: f64 = 0.0;
    let mut gc_quad: f64 = 0.0;
    let mut gc_real: f64 = 0.0;
    let mut track = |lp: &StateLoop| -> Result<f64> {
        let report = classify_and_verify(lp)?;
        consistency = consistency.max(wrap_phase(report.gamma0 + report.gamma_c - report.gamma).abs());
        Ok(report.gamma_c)
    };
    for _ in 0..1000 {
        let q = piecewise_geodesic_quadrupolar_loop(rng, 5, 400)?;
        gc_quad = gc_quad.max(track(&q)?.abs());
        let r = piecewise_geodesic_real_loop(rng, 5, 400)?;
        gc_real = gc_real.max(track(&r)?.abs());
    }
    for _ in 0..50 {
        let [a, b, d] = [0; 3].map(|_| random_state(rng));
        let n = 1000;
        let states = (0..n)
            .map(|k| {
                let (s, co) = (2.0 * PI * k as f64 / n as f64).sin_cos();
                QutritState::normalized([0, 1, 2].map(|i| a.amps()[i] * 1.5 + b.amps()[i] * co + d.amps()[i] * s))
            })
            .collect::<Result<Vec<_>>>()?;
        track(&StateLoop::new(states)?)?;
    }
    for alpha in MORPH_EXCHANGE_ALPHAS.into_iter().chain([1.0]) {
        track(&morph_loop(alpha, 400)?)?;
    }
    let mut beta_dev: f64 = 0.0;
    for k in 0..100 {
        let d: f64 = if k == 0 { 2.0 } else if k == 1 { 1.0 } else { rng.gen_range(0.0..2.0) };
        let gamma = (1.0 - d).clamp(-1.0, 1.0).acos();
        let u1 = Star::new(0.4, 1.0).unit_vector();
        let u2 = rotated_away(0.4, 1.0, gamma).unit_vector();
        beta_dev = beta_dev.max((correlation_factor(&u1, &u2) - beta_finite_difference(d)).abs());
    }
    let norm_dev = (0..=20)
        .map(|k| {
            let d = k as f64 / 10.0;
            let gamma = (1.0 - d).clamp(-1.0, 1.0).acos();
            let set = StarSet::new(Star::new(0.4, 1.0), rotated_away(0.4, 1.0, gamma));
            (symmetrized_norm_sq(&set) - symmetrized_norm_sq_of_d(d)).abs()
        })
        .fold(0.0, f64::max);
    checks.at_most("max_route_disagreement", consistency, TOL_CONSISTENCY);
    checks.at_most("max_gammaC_quadrupolar", gc_quad, 1e-10);
    checks.at_most("max_gammaC_real", gc_real, 1e-6);
    checks.at_most("max_beta_vs_finite_difference", beta_dev, 1e-6);
    checks.at_most("max_norm_closed_form_dev", norm_dev, 1e-12);
    Ok(())
}

fn exchange_solid_angle(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut worst: f64 = 0.0;
    let mut not_swapped = 0;
    for _ in 0..100 {
        let q = random_quadrupolar_state(rng);
        let traj = track_stars(&exchange_loop(&q, 400)?)?;
        if traj.closure != ClosurePermutation::Swap {
            not_swapped += 1;
            continue;
        }
        let [p1, p2] = &traj.paths;
        let combined: Vec<_> = p1.iter().chain(p2.iter().skip(1)).copied().collect();
        worst = worst.max((solid_angle(&combined)?.abs() - 2.0 * PI).abs());
    }
    checks.count_zero("not_swapped", not_swapped);
    checks.at_most("max_combined_solid_angle_dev_from_2pi", worst, 1e-6);
    Ok(())
}

fn random_quadrupolar_hamiltonian(rng: &mut impl Rng) -> crate::operators::Operator3 {
    let coeffs = QuadrupoleComponent::ALL.map(|q| (q, rng.gen_range(-1.0..1.0)));
    quadrupolar_hamiltonian(coeffs).expect("random coefficients are not all zero")
}

fn axis_orthogonality(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    while accepted < 200 {
        let h = random_quadrupolar_hamiltonian(rng);
        let e = eig_hermitian3(h.matrix())?;
        if e.values[1] - e.values[0] < 1e-3 || e.values[2] - e.values[1] < 1e-3 {
            continue;
        }
        accepted += 1;
        let axes = e
            .vectors
            .iter()
            .map(|v| Ok(stars_from_state(&QutritState::new(*v)?).unit_vectors()[0]))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..3 {
            for j in (i + 1)..3 {
                worst = worst.max(dot(&axes[i], &axes[j]).abs());
            }
        }
    }
    checks.at_most("max_axis_dot", worst, 1e-8);
    Ok(())
}

fn topology(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut bad = 0;
    let mut accepted = 0;
    let mut nontrivial = 0;
    while accepted < 50 {
        let path = random_hamiltonian_loop(rng, 200);
        match eigenfamily_topology(&path) {
            Ok(phases) => {
                accepted += 1;
                let count = pi_count(&phases);
                bad += (count != 0 && count != 2) as usize;
                nontrivial += (count == 2) as usize;
            }
            Err(Error::GapClosure { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let planar = pi_count(&eigenfamily_topology(&planar_family_path(400))?);
    checks.count_zero("odd_pi_counts", bad);
    checks.at_most("planar_family_pi_count_minus_2", (planar as f64 - 2.0).abs(), 0.0);
    checks.at_least("random_paths_with_two_pi", nontrivial as f64, 1.0);
    Ok(())
}

fn random_field(rng: &mut impl Rng) -> Result<SpinFieldReal> {
    SpinFieldReal::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

fn geodesic_start(field: &SpinFieldReal, rng: &mut impl Rng) -> Result<RealState3> {
    let n = field.axis();
    let v = random_unit_vector(rng);
    let p = dot(&n, &v);
    RealState3::normalized(v[0] - p * n[0], v[1] - p * n[1], v[2] - p * n[2])
}

fn quadrupolar_image(psi: &RealState3) -> Result<QutritState> {
    crate::states::gauge_fix_quadrupolar(&global_unitary().adjoint().apply(&psi.to_state())?)
}

fn dynamics(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut routes: f64 = 0.0;
    let mut imag: f64 = 0.0;
    let mut period: f64 = 0.0;
    let mut half: f64 = 0.0;
    let mut fit: f64 = 0.0;
    for _ in 0..500 {
        let field = random_field(rng)?;
        let v = random_unit_vector(rng);
        let psi = RealState3::new(v[0], v[1], v[2])?;
        for k in 0..=16 {
            let tau = 4.0 * field.period() * k as f64 / 16.0 + rng.gen_range(0.0..0.1);
            let numeric = evolve_numeric(&field, &psi, tau)?;
            routes = routes.max(evolve_closed_form(&field, &psi, tau).distance_to(&numeric.state));
            imag = imag.max(numeric.imaginary_residue);
        }
        period = period.max(evolve_closed_form(&field, &psi, field.period()).distance_to(&psi));
        let g = geodesic_start(&field, rng)?;
        half = half.max(evolve_closed_form(&field, &g, field.period() / 2.0).distance_to(&g.negated()));
        fit = fit.max(fit_return_distance(&field, &psi, 64).residual);
    }
    let mut aa_dev: f64 = 0.0;
    let mut dynamical: f64 = 0.0;
    for k in 0..20 {
        let field = random_field(rng)?;
        let (start, expected) = if k % 2 == 0 {
            (geodesic_start(&field, rng)?, PI)
        } else {
            let v = random_unit_vector(rng);
            (RealState3::new(v[0], v[1], v[2])?, 0.0)
        };
        let aa = aa_phase(&field, &quadrupolar_image(&start)?, crate::dynamics::DEFAULT_SAMPLES)?;
        aa_dev = aa_dev.max(wrap_phase(aa.total_phase + aa.dynamical_phase - expected).abs());
        dynamical = dynamical.max(aa.dynamical_phase.abs());
    }
    checks.at_most("max_closed_form_vs_propagator", routes, 1e-8);
    checks.at_most("max_imaginary_residue", imag, 1e-12);
    checks.at_most("max_return_at_T", period, 1e-10);
    checks.at_most("max_geodesic_half_period_dev", half, 1e-10);
    checks.at_most("max_aa_phase_dev", aa_dev, 1e-6);
    checks.at_most("max_dynamical_phase", dynamical, 1e-10);
    checks.at_most("max_cosine_fit_residual", fit, 1e-9);
    Ok(())
}

fn morph(checks: &mut Checks) -> Result<()> {
    let mut wrong = 0;
    for alpha in MORPH_EXCHANGE_ALPHAS {
        wrong += (classify_and_verify(&morph_loop(alpha, 400)?)?.class != LoopClass::Exchange) as usize;
    }
    wrong += (classify_and_verify(&morph_loop(1.0, 400)?)?.class != LoopClass::IndividualLoops) as usize;
    let start = interpolating_unitary(0.0).unitary.matrix().max_abs_diff(&Matrix3::identity());
    let end = interpolating_unitary(1.0).unitary.matrix().max_abs_diff(global_unitary().matrix());
    let projectors = global_unitary_projectors();
    let mut proj: f64 = 0.0;
    let mut sum = Matrix3::zero();
    for (i, (_, p)) in projectors.iter().enumerate() {
        let p = p.matrix();
        proj = proj.max((*p * *p).max_abs_diff(p));
        for (j, (_, q)) in projectors.iter().enumerate() {
            if i != j {
                proj = proj.max((*p * *q.matrix()).max_abs());
            }
        }
        sum = sum + *p;
    }
    proj = proj.max(sum.max_abs_diff(&Matrix3::identity()));
    checks.count_zero("misclassified_alphas", wrong);
    checks.at_most("U(0)_minus_identity", start, 1e-12);
    checks.at_most("U(1)_minus_global_unitary", end, 1e-12);
    checks.at_most("projector_algebra_residual", proj, 1e-12);
    Ok(())
}

fn entanglement(rng: &mut ChaCha8Rng, checks: &mut Checks) -> Result<()> {
    let mut quad: f64 = 0.0;
    let mut coincident: f64 = 0.0;
    for _ in 0..200 {
        let q = random_quadrupolar_state(rng);
        quad = quad.max((symmetrized_two_qubit(&stars_from_state(&q)).reduced_purity - 0.5).abs());
        let u = random_unit_vector(rng);
        let s = Star::from_unit_vector(&u);
        coincident = coincident.max((symmetrized_two_qubit(&StarSet::new(s, s)).reduced_purity - 1.0).abs());
    }
    checks.at_most("max_quadrupolar_purity_dev_from_half", quad, 1e-10);
    checks.at_most("max_coincident_purity_dev_from_one", coincident, 1e-10);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse_and_cover_all_criteria() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::Unknown { .. })));
        let mut covered: Vec<u32> = Suite::ALL[1..].iter().flat_map(|s| s.criteria()).collect();
        covered.sort();
        covered.dedup();
        assert_eq!(covered, Suite::All.criteria());
    }

    #[test]
    fn odd_residual_vanishes_exactly_on_quadrupolar_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..200 {
            let psi = random_state(&mut rng);
            // |<S>|^2 + |<psi|T psi>|^2 = 1 for spin 1
            let t = triplet_time_reversal().apply(&psi);
            let m = magnetization(&psi);
            assert!((m * m + overlap(&psi, &t).norm_sqr() - 1.0).abs() < 1e-12);
            let q = random_quadrupolar_state(&mut rng).with_phase(rng.gen_range(0.0..6.0));
            assert!(time_reversal_odd_residual(&q) < 1e-12);
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = run_criterion(99, 1);
        assert!(!r.passed && r.error.is_some());
        assert!(r.summary_line().starts_with("FAIL"));
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 2, 11, 12] {
            let r = run_criterion(id, DEFAULT_SEED);
            assert!(r.passed, "{}", r.summary_line());
        }
    }
}
