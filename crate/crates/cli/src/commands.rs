use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use qberry_core::berry::{
    bargmann_invariant, classify_and_verify, geodesic_loop, track_stars_refined,
};
use qberry_core::dynamics::{aa_phase, sample_evolution, DEFAULT_SAMPLES, TOL_PRESERVED};
use qberry_core::loops::{exchange_loop, individual_loop, morph_loop, DEFAULT_LOOP_SAMPLES};
use qberry_core::majorana::{are_antipodal, mirror_pair_check, stars_from_state};
use qberry_core::numerics::eig_hermitian3;
use qberry_core::operators::{global_unitary, planar_quadrupole_hamiltonian, quadrupole};
use qberry_core::states::{magnetization, quadrupolar_from_angles, QuadrupolarAngles, TOL_QUADRUPOLAR};
use qberry_core::verify::{run_suite, Bound, CriterionResult, MORPH_EXCHANGE_ALPHAS};
use qberry_core::{
    AaPhase, LoopClass, Operator3, PhaseReport, QuadrupoleComponent, QutritState, SpinFieldReal, Star,
    StarSet, StateLoop, Suite,
};

use crate::error::{CliError, Result};
use crate::output::{parse_json, read_input, write_csv, write_json, Format, InputDigest, RunConfig};

/// Options shared by every subcommand.
pub struct Common {
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub samples: Option<usize>,
}

impl Common {
    fn config(&self, command: &'static str, inputs: Vec<InputDigest>, params: serde_json::Value) -> RunConfig {
        RunConfig { command, inputs, seed: self.seed, samples: self.samples, format: self.format, params }
    }

    fn emit<T: Serialize, R: Serialize>(&self, config: &RunConfig, body: &T, rows: &[R]) -> Result<()> {
        let metadata = config.metadata();
        match self.format {
            Format::Json => write_json(self.output.as_deref(), &metadata, body),
            Format::Csv => write_csv(self.output.as_deref(), &metadata, rows),
        }
    }
}

const FLAG_TOL: f64 = 1e-9;

#[derive(Serialize)]
struct StarsOutput {
    stars: StarSet,
    quadrupolar: bool,
    magnetization: f64,
    antipodal: bool,
    mirror_symmetric: bool,
    coincident: bool,
}

#[derive(Serialize)]
struct StarRow {
    star: usize,
    theta: f64,
    phi: f64,
}

pub fn stars(common: &Common, input: &Path) -> Result<()> {
    let mut inputs = Vec::new();
    let psi: QutritState = parse_json(input, &read_input(input, &mut inputs)?)?;
    let stars = stars_from_state(&psi);
    let body = StarsOutput {
        stars,
        quadrupolar: magnetization(&psi) <= TOL_QUADRUPOLAR,
        magnetization: magnetization(&psi),
        antipodal: are_antipodal(&stars, FLAG_TOL),
        mirror_symmetric: mirror_pair_check(&stars, FLAG_TOL),
        coincident: stars.separation() <= 1e-6,
    };
    let rows: Vec<_> = stars
        .stars
        .iter()
        .enumerate()
        .map(|(i, s)| StarRow { star: i + 1, theta: s.theta(), phi: s.phi() })
        .collect();
    common.emit(&common.config("stars", inputs, json!({})), &body, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LoopKind {
    Exchange,
    Individual,
    Geodesic,
    File,
}

pub struct LoopArgs {
    pub kind: LoopKind,
    pub input: Option<PathBuf>,
    pub theta: f64,
    pub phi: f64,
    pub axis: [f64; 3],
    pub from: [f64; 3],
    pub to: [f64; 3],
}

#[derive(Serialize)]
struct LoopOutput {
    kind: LoopKind,
    samples: usize,
    bargmann: [f64; 2],
    report_samples: usize,
    report: PhaseReport,
}

#[derive(Serialize)]
struct LoopRow {
    kind: LoopKind,
    samples: usize,
    bargmann_re: f64,
    bargmann_im: f64,
    gamma: f64,
    gamma0: f64,
    #[serde(rename = "gammaC")]
    gamma_c: f64,
    class: LoopClass,
    quantized: Option<f64>,
}

fn read_state(input: &Path, inputs: &mut Vec<InputDigest>) -> Result<QutritState> {
    parse_json(input, &read_input(input, inputs)?)
}

pub fn loop_phase(common: &Common, args: &LoopArgs) -> Result<()> {
    let n = common.samples.unwrap_or(DEFAULT_LOOP_SAMPLES);
    let mut inputs = Vec::new();
    let start = |inputs: &mut Vec<InputDigest>| -> Result<QutritState> {
        match &args.input {
            Some(path) => read_state(path, inputs),
            None => Ok(quadrupolar_from_angles(QuadrupolarAngles::new(args.theta, args.phi)?)),
        }
    };
    let (lp, report_loop) = match args.kind {
        LoopKind::Exchange => (exchange_loop(&start(&mut inputs)?, n)?, None),
        LoopKind::Individual => (individual_loop(&start(&mut inputs)?, &args.axis, n)?, None),
        LoopKind::Geodesic => {
            let [r, s, t] = args.from;
            let a = QutritState::from_real(r, s, t)?;
            let [r, s, t] = args.to;
            let b = QutritState::from_real(r, s, t)?;
            // few-point geodesic loops are too coarse for star tracking; the
            // decomposition runs on a dense sampling of the same closed geodesic
            let dense = geodesic_loop(&a, &b, n.max(DEFAULT_LOOP_SAMPLES))?;
            (geodesic_loop(&a, &b, n)?, Some(dense))
        }
        LoopKind::File => {
            let path = args
                .input
                .as_ref()
                .ok_or_else(|| CliError::Argument("--kind file needs --input".into()))?;
            let lp: StateLoop = parse_json(path, &read_input(path, &mut inputs)?)?;
            (lp, None)
        }
    };
    let bargmann = bargmann_invariant(lp.states())?;
    let report_loop = report_loop.unwrap_or_else(|| lp.clone());
    let report = classify_and_verify(&report_loop)?;
    let body = LoopOutput {
        kind: args.kind,
        samples: lp.len(),
        bargmann: [bargmann.re, bargmann.im],
        report_samples: report_loop.len(),
        report,
    };
    let row = LoopRow {
        kind: args.kind,
        samples: lp.len(),
        bargmann_re: bargmann.re,
        bargmann_im: bargmann.im,
        gamma: report.gamma,
        gamma0: report.gamma0,
        gamma_c: report.gamma_c,
        class: report.class,
        quantized: report.quantized,
    };
    let params = json!({
        "kind": args.kind, "theta": args.theta, "phi": args.phi,
        "axis": args.axis, "from": args.from, "to": args.to, "n": n,
    });
    common.emit(&common.config("loop-phase", inputs, params), &body, &[row])
}

/// Where a Hamiltonian comes from.
pub struct HamiltonianSource {
    pub input: Option<PathBuf>,
    pub quadrupole: Option<QuadrupoleComponent>,
}

impl HamiltonianSource {
    fn is_empty(&self) -> bool {
        self.input.is_none() && self.quadrupole.is_none()
    }

    fn load(&self, inputs: &mut Vec<InputDigest>) -> Result<Option<Operator3>> {
        match (&self.input, self.quadrupole) {
            (Some(_), Some(_)) => Err(CliError::Argument("give either an operator file or --quadrupole".into())),
            (Some(path), None) => Ok(Some(parse_json(path, &read_input(path, inputs)?)?)),
            (None, Some(q)) => Ok(Some(quadrupole(q))),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Serialize)]
struct Eigenstate {
    value: f64,
    state: QutritState,
    stars: StarSet,
    quadrupolar: bool,
    /// Director of a quadrupolar eigenstate, the line through its two stars.
    axis: Option<[f64; 3]>,
}

#[derive(Serialize)]
struct AxisAngle {
    pair: [usize; 2],
    angle: f64,
}

#[derive(Serialize)]
struct SpectrumOutput {
    eigenvalues: [f64; 3],
    /// `real` when the eigenvectors were chosen in the real frame of the
    /// quadrupolar subspace.
    frame: &'static str,
    eigenstates: Vec<Eigenstate>,
    axis_angles: Vec<AxisAngle>,
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    value: f64,
    theta1: f64,
    phi1: f64,
    theta2: f64,
    phi2: f64,
    axis_x: Option<f64>,
    axis_y: Option<f64>,
    axis_z: Option<f64>,
}

/// Eigenpairs, picking real-frame eigenvectors when `U H U^dagger` is real
/// so degenerate levels still get quadrupolar eigenstates.
fn eigenstates(h: &Operator3) -> Result<([f64; 3], &'static str, Vec<QutritState>)> {
    let u = global_unitary();
    let real_frame = *u.matrix() * *h.matrix() * u.matrix().adjoint();
    let is_real = real_frame.m.iter().flatten().all(|z| z.im.abs() <= 1e-12);
    if is_real {
        let e = eig_hermitian3(&real_frame.map(|z| z.re.into()))?;
        let vectors = e
            .vectors
            .iter()
            .map(|v| {
                let [r, s, t] = v.map(|z| z.re);
                if v.iter().any(|z| z.im.abs() > 1e-12) {
                    return u.adjoint().apply(&QutritState::new(*v)?);
                }
                u.adjoint().apply(&QutritState::from_real(r, s, t)?)
            })
            .collect::<qberry_core::Result<Vec<_>>>()?;
        return Ok((e.values, "real", vectors));
    }
    let e = eig_hermitian3(h.matrix())?;
    let vectors = e.vectors.iter().map(|v| QutritState::new(*v)).collect::<qberry_core::Result<Vec<_>>>()?;
    Ok((e.values, "standard", vectors))
}

pub fn spectrum(common: &Common, source: &HamiltonianSource, theta: Option<f64>) -> Result<()> {
    let mut inputs = Vec::new();
    let h = match (source.load(&mut inputs)?, theta) {
        (Some(h), None) => h,
        (None, Some(theta)) => planar_quadrupole_hamiltonian(theta),
        _ => return Err(CliError::Argument("give exactly one of an operator file, --quadrupole or --theta".into())),
    };
    if !h.is_hermitian() {
        return Err(qberry_core::Error::NotHermitian { residual: h.matrix().hermiticity_residual() }.into());
    }
    let (values, frame, vectors) = eigenstates(&h)?;
    let states: Vec<Eigenstate> = values
        .iter()
        .zip(vectors)
        .map(|(&value, state)| {
            let stars = stars_from_state(&state);
            let quadrupolar = magnetization(&state) <= TOL_QUADRUPOLAR;
            Eigenstate { value, state, stars, quadrupolar, axis: quadrupolar.then(|| stars.unit_vectors()[0]) }
        })
        .collect();
    let mut axis_angles = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            if let (Some(a), Some(b)) = (states[i].axis, states[j].axis) {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                axis_angles.push(AxisAngle { pair: [i, j], angle: d.abs().min(1.0).acos() });
            }
        }
    }
    let rows: Vec<_> = states
        .iter()
        .enumerate()
        .map(|(index, e)| {
            let [s1, s2] = e.stars.stars;
            SpectrumRow {
                index,
                value: e.value,
                theta1: s1.theta(),
                phi1: s1.phi(),
                theta2: s2.theta(),
                phi2: s2.phi(),
                axis_x: e.axis.map(|a| a[0]),
                axis_y: e.axis.map(|a| a[1]),
                axis_z: e.axis.map(|a| a[2]),
            }
        })
        .collect();
    let body = SpectrumOutput { eigenvalues: values, frame, eigenstates: states, axis_angles };
    let params = json!({ "theta": theta, "quadrupole": source.quadrupole });
    common.emit(&common.config("spectrum", inputs, params), &body, &rows)
}

pub struct EvolveArgs {
    pub field: Option<[f64; 3]>,
    pub hamiltonian: HamiltonianSource,
    pub input: Option<PathBuf>,
    pub real: Option<[f64; 3]>,
    pub periods: f64,
    pub require_quadrupolar: bool,
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    state: QutritState,
    magnetization: f64,
    stars: StarSet,
}

#[derive(Serialize)]
struct EvolveSummary {
    horizon: f64,
    steps: usize,
    max_quadrupolar_violation: f64,
    quadrupolar_preserved: bool,
    aa: Option<AaPhase>,
}

#[derive(Serialize)]
struct EvolveOutput {
    summary: EvolveSummary,
    trajectory: Vec<Sample>,
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    re_plus: f64,
    im_plus: f64,
    re_zero: f64,
    im_zero: f64,
    re_minus: f64,
    im_minus: f64,
    magnetization: f64,
    theta1: f64,
    phi1: f64,
    theta2: f64,
    phi2: f64,
}

pub fn evolve(common: &Common, args: &EvolveArgs) -> Result<()> {
    let mut inputs = Vec::new();
    let steps = common.samples.unwrap_or(DEFAULT_SAMPLES);
    if !(args.periods.is_finite() && args.periods > 0.0) {
        return Err(CliError::Argument(format!("--periods must be positive, got {}", args.periods)));
    }
    let psi0 = match (&args.input, args.real) {
        (Some(path), None) => read_state(path, &mut inputs)?,
        (None, Some([r, s, t])) => global_unitary().adjoint().apply(&QutritState::from_real(r, s, t)?)?,
        _ => return Err(CliError::Argument("give exactly one of --input or --real".into())),
    };
    let field = match args.field {
        Some([a, b, c]) => Some(SpinFieldReal::new(a, b, c)?),
        None => None,
    };
    let (h, period) = match (&field, args.hamiltonian.is_empty()) {
        (Some(f), true) => (f.quadrupolar_hamiltonian(), f.period()),
        (None, false) => {
            let h = args.hamiltonian.load(&mut inputs)?.expect("source present");
            if !h.is_hermitian() {
                return Err(qberry_core::Error::NotHermitian { residual: h.matrix().hermiticity_residual() }.into());
            }
            (h, 2.0 * PI)
        }
        _ => return Err(CliError::Argument("give exactly one of --field, --hamiltonian or --quadrupole".into())),
    };
    let horizon = args.periods * period;
    let trajectory: Vec<Sample> = sample_evolution(&h, &psi0, horizon, steps)?
        .into_iter()
        .map(|(t, state)| Sample { t, magnetization: magnetization(&state), stars: stars_from_state(&state), state })
        .collect();
    let max_violation = trajectory.iter().map(|s| s.magnetization).fold(0.0, f64::max);
    let aa = match &field {
        Some(f) if magnetization(&psi0) <= TOL_QUADRUPOLAR => Some(aa_phase(f, &psi0, steps.max(DEFAULT_SAMPLES))?),
        _ => None,
    };
    match &aa {
        Some(aa) => eprintln!("aa phase: {} (ray period {:.6})", aa.phase, aa.ray_period),
        None => eprintln!("aa phase: n/a; max |<S>| = {max_violation:.3e}"),
    }
    let rows: Vec<_> = trajectory
        .iter()
        .map(|s| {
            let [p, z, m] = *s.state.amps();
            let [s1, s2] = s.stars.stars;
            EvolveRow {
                t: s.t,
                re_plus: p.re,
                im_plus: p.im,
                re_zero: z.re,
                im_zero: z.im,
                re_minus: m.re,
                im_minus: m.im,
                magnetization: s.magnetization,
                theta1: s1.theta(),
                phi1: s1.phi(),
                theta2: s2.theta(),
                phi2: s2.phi(),
            }
        })
        .collect();
    let preserved = max_violation <= TOL_PRESERVED;
    let body = EvolveOutput {
        summary: EvolveSummary {
            horizon,
            steps,
            max_quadrupolar_violation: max_violation,
            quadrupolar_preserved: preserved,
            aa,
        },
        trajectory,
    };
    let params = json!({
        "field": args.field, "real": args.real, "periods": args.periods,
        "quadrupole": args.hamiltonian.quadrupole, "require_quadrupolar": args.require_quadrupolar,
    });
    common.emit(&common.config("evolve", inputs, params), &body, &rows)?;
    if args.require_quadrupolar && !preserved {
        return Err(CliError::QuadrupolarityLost { max_violation });
    }
    Ok(())
}

pub fn default_alphas() -> Vec<f64> {
    MORPH_EXCHANGE_ALPHAS.into_iter().chain([1.0]).collect()
}

#[derive(Serialize)]
struct MorphEntry {
    alpha: f64,
    class: LoopClass,
    report: PhaseReport,
    paths: [Vec<Star>; 2],
}

#[derive(Serialize)]
struct MorphOutput {
    samples: usize,
    results: Vec<MorphEntry>,
}

#[derive(Serialize)]
struct MorphRow {
    alpha: f64,
    class: LoopClass,
    star: usize,
    index: usize,
    theta: f64,
    phi: f64,
}

pub fn morph(common: &Common, alphas: &[f64]) -> Result<()> {
    let n = common.samples.unwrap_or(DEFAULT_LOOP_SAMPLES);
    if let Some(bad) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(CliError::Argument(format!("alpha {bad} is outside [0, 1]")));
    }
    let mut alphas = alphas.to_vec();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let mut results = Vec::new();
    for &alpha in &alphas {
        let lp = morph_loop(alpha, n)?;
        let report = classify_and_verify(&lp)?;
        let traj = track_stars_refined(&lp)?;
        let paths = traj.paths.map(|p| p.iter().map(Star::from_unit_vector).collect());
        results.push(MorphEntry { alpha, class: report.class, report, paths });
    }
    let rows: Vec<_> = results
        .iter()
        .flat_map(|r| {
            r.paths.iter().enumerate().flat_map(move |(k, path)| {
                path.iter().enumerate().map(move |(index, s)| MorphRow {
                    alpha: r.alpha,
                    class: r.class,
                    star: k + 1,
                    index,
                    theta: s.theta(),
                    phi: s.phi(),
                })
            })
        })
        .collect();
    for r in &results {
        eprintln!("alpha {:<6} {:?} gamma = {:.6}", r.alpha, r.class, r.report.gamma);
    }
    let params = json!({ "alphas": alphas, "n": n });
    common.emit(&common.config("morph", Vec::new(), params), &MorphOutput { samples: n, results }, &rows)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    suite: Suite,
    passed: bool,
    results: &'a [CriterionResult],
}

#[derive(Serialize)]
struct VerifyRow<'a> {
    id: u32,
    criterion: &'a str,
    measurement: &'a str,
    value: f64,
    bound: Bound,
    limit: f64,
    passed: bool,
}

pub fn verify(common: &Common, suite: Suite) -> Result<()> {
    let results = run_suite(suite, common.seed);
    for r in &results {
        eprintln!("{}", r.summary_line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let rows: Vec<_> = results
        .iter()
        .flat_map(|r| {
            r.measurements.iter().map(move |m| VerifyRow {
                id: r.id,
                criterion: &r.name,
                measurement: &m.name,
                value: m.value,
                bound: m.bound,
                limit: m.limit,
                passed: m.passed,
            })
        })
        .collect();
    let total = results.len();
    let body = VerifyOutput { suite, passed: failed == 0, results: &results };
    common.emit(&common.config("verify", Vec::new(), json!({ "suite": suite })), &body, &rows)?;
    if failed > 0 {
        return Err(CliError::VerificationFailed { failed, total });
    }
    Ok(())
}
