//! Geometric phases of closed discrete loops: the Bargmann route and the
//! stellar decomposition `gamma = gamma0 + gammaC`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorana::{cross3, dot, great_circle, normalize3, stars_from_state, StarSet, UnitVector};
use crate::numerics::{c, eig_hermitian3, Complex};
use crate::operators::Operator3;
use crate::states::{is_quadrupolar, overlap, QutritState};

pub const EPS_OVERLAP: f64 = 1e-6;
pub const DELTA_MAX: f64 = 0.1;
pub const TOL_QUANT: f64 = 1e-3;
pub const TOL_CONSISTENCY: f64 = 5e-3;
pub const GAP_MIN: f64 = 1e-6;
/// Largest matched star displacement allowed between neighbouring states.
pub const MAX_STAR_STEP: f64 = FRAC_PI_4;
pub const CLOSURE_TOL: f64 = 1e-6;
/// Loop-membership tolerances used when deciding whether to quantize.
const MEMBERSHIP_QUADRUPOLAR: f64 = 1e-8;
const MEMBERSHIP_REAL: f64 = 1e-9;

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Reduce an angle to `(-2pi, 2pi]`.
pub fn wrap_solid_angle(x: f64) -> f64 {
    let y = x.rem_euclid(4.0 * PI);
    if y > 2.0 * PI {
        y - 4.0 * PI
    } else {
        y
    }
}

/// Distance from `gamma` to the nearest of `{0, pi}` (mod 2pi), and that value.
pub fn nearest_quantized(gamma: f64) -> (f64, f64) {
    let to_zero = wrap_phase(gamma).abs();
    let to_pi = wrap_phase(gamma - PI).abs();
    if to_zero <= to_pi {
        (0.0, to_zero)
    } else {
        (PI, to_pi)
    }
}

/// Closed sequence of states; the last state is followed by the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopJson", into = "LoopJson")]
pub struct StateLoop {
    states: Vec<QutritState>,
}

#[derive(Serialize, Deserialize)]
pub struct LoopJson {
    pub states: Vec<QutritState>,
}

impl TryFrom<LoopJson> for StateLoop {
    type Error = Error;
    fn try_from(j: LoopJson) -> Result<Self> {
        StateLoop::new(j.states)
    }
}

impl From<StateLoop> for LoopJson {
    fn from(l: StateLoop) -> Self {
        LoopJson { states: l.states }
    }
}

impl StateLoop {
    pub fn new(states: Vec<QutritState>) -> Result<Self> {
        if states.len() < 3 {
            return Err(Error::LoopTooShort(states.len()));
        }
        let n = states.len();
        for k in 0..n {
            let next = (k + 1) % n;
            let ovl = overlap(&states[k], &states[next]).norm();
            if ovl <= EPS_OVERLAP {
                return Err(Error::OrthogonalNeighbors { index: k, next, overlap: ovl });
            }
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[QutritState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index and size of the largest ray-distance step, closing step included.
    pub fn max_step(&self) -> (usize, f64) {
        let n = self.len();
        (0..n)
            .map(|k| (k, self.states[k].ray_distance(&self.states[(k + 1) % n])))
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    pub fn ensure_fine(&self, limit: f64) -> Result<()> {
        let (index, distance) = self.max_step();
        if distance > limit {
            return Err(Error::LoopTooCoarse { index, distance, limit });
        }
        Ok(())
    }

    /// Apply `u` to every state.
    pub fn transform(&self, u: &Operator3) -> Result<Self> {
        let states = self.states.iter().map(|s| u.apply(s)).collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    pub fn is_quadrupolar(&self, tol: f64) -> bool {
        self.states.iter().all(|s| is_quadrupolar(s, tol))
    }

    /// Every state real up to its own global phase.
    pub fn is_real(&self, tol: f64) -> bool {
        self.states.iter().all(|s| s.imaginary_residue() <= tol)
    }
}

/// `prod_k <psi_k|psi_{k+1 mod N}>`.
pub fn bargmann_invariant(states: &[QutritState]) -> Result<Complex> {
    let n = states.len();
    let mut prod = c(1.0, 0.0);
    for k in 0..n {
        let next = (k + 1) % n;
        let ovl = overlap(&states[k], &states[next]);
        if ovl.norm() <= EPS_OVERLAP {
            return Err(Error::OrthogonalNeighbors { index: k, next, overlap: ovl.norm() });
        }
        prod *= ovl;
    }
    Ok(prod)
}

/// `-arg` of the Bargmann invariant, in `(-pi, pi]`.
pub fn discrete_geometric_phase(lp: &StateLoop) -> Result<f64> {
    Ok(wrap_phase(-bargmann_invariant(lp.states())?.arg()))
}

/// `N` equidistant states `cos(pi k/N) psiA + sin(pi k/N) psiPerp` on the
/// closed geodesic through the two rays.
pub fn geodesic_loop(psi_a: &QutritState, psi_b: &QutritState, n: usize) -> Result<StateLoop> {
    if n < 3 {
        return Err(Error::LoopTooShort(n));
    }
    let ovl = overlap(psi_a, psi_b);
    let mag = ovl.norm();
    if mag <= 1e-12 || mag >= 1.0 - 1e-12 {
        return Err(Error::DegeneratePair { overlap: mag });
    }
    let b = psi_b.with_phase(-ovl.arg());
    let a = psi_a.amps();
    let perp: [Complex; 3] = [0, 1, 2].map(|i| b.amps()[i] - a[i] * mag);
    let perp = QutritState::normalized(perp)?;
    let states = (0..n)
        .map(|k| {
            let (s, co) = (PI * k as f64 / n as f64).sin_cos();
            QutritState::normalized([0, 1, 2].map(|i| a[i] * co + perp.amps()[i] * s))
        })
        .collect::<Result<Vec<_>>>()?;
    StateLoop::new(states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosurePermutation {
    Identity,
    Swap,
}

/// Continuity-matched star paths of a loop. `star_sets` holds one entry per
/// loop state; each path starts at the first state and ends back at it, with
/// at least one point per state in between.
#[derive(Debug, Clone, PartialEq)]
pub struct StarTrajectory {
    pub star_sets: Vec<StarSet>,
    pub paths: [Vec<UnitVector>; 2],
    pub closure: ClosurePermutation,
}

/// Nearest-assignment continuation of a star pair; ties keep the current
/// labelling. Returns the matched pair and the larger star displacement.
fn match_pair(prev: &[UnitVector; 2], next: &[UnitVector; 2]) -> ([UnitVector; 2], f64) {
    let [a, b] = prev;
    let [x, y] = next;
    let direct = great_circle(a, x) + great_circle(b, y);
    let swapped = great_circle(a, y) + great_circle(b, x);
    let pair = if swapped < direct { [*y, *x] } else { [*x, *y] };
    let displacement = great_circle(a, &pair[0]).max(great_circle(b, &pair[1]));
    (pair, displacement)
}

/// Decide the closure permutation and pin the path ends onto the matching
/// start points (they describe the same first state, so any gap is round-off
/// from nearly coincident stars).
fn close_paths(paths: &mut [Vec<UnitVector>; 2]) -> ClosurePermutation {
    let (first, second) = (paths[0][0], paths[1][0]);
    let closure = if great_circle(&first, &second) > CLOSURE_TOL
        && great_circle(paths[0].last().unwrap(), &second) <= CLOSURE_TOL
    {
        ClosurePermutation::Swap
    } else {
        ClosurePermutation::Identity
    };
    let (end0, end1) = match closure {
        ClosurePermutation::Identity => (first, second),
        ClosurePermutation::Swap => (second, first),
    };
    *paths[0].last_mut().unwrap() = end0;
    *paths[1].last_mut().unwrap() = end1;
    closure
}

pub fn track_stars(lp: &StateLoop) -> Result<StarTrajectory> {
    let star_sets: Vec<StarSet> = lp.states().iter().map(stars_from_state).collect();
    let n = star_sets.len();
    let start = star_sets[0].unit_vectors();
    let mut paths = [vec![start[0]], vec![start[1]]];
    let mut prev = start;
    for k in 1..=n {
        let (pair, displacement) = match_pair(&prev, &star_sets[k % n].unit_vectors());
        if displacement > MAX_STAR_STEP {
            return Err(Error::StepTooCoarse { index: k - 1, displacement, limit: MAX_STAR_STEP });
        }
        paths[0].push(pair[0]);
        paths[1].push(pair[1]);
        prev = pair;
    }
    let closure = close_paths(&mut paths);
    Ok(StarTrajectory { star_sets, paths, closure })
}

/// Point at fraction `f` along the ray-space geodesic from `a` to `b`.
pub fn geodesic_interpolate(a: &QutritState, b: &QutritState, f: f64) -> QutritState {
    let ovl = overlap(a, b);
    let b = b.with_phase(-ovl.arg());
    let angle = ovl.norm().min(1.0).acos();
    let (wa, wb) = if angle < 1e-9 {
        (1.0 - f, f)
    } else {
        (((1.0 - f) * angle).sin() / angle.sin(), (f * angle).sin() / angle.sin())
    };
    QutritState::normalized([0, 1, 2].map(|i| a.amps()[i] * wa + b.amps()[i] * wb))
        .expect("geodesic between non-orthogonal states never vanishes")
}

/// Star step allowed during refinement; tighter when the stars are close,
/// where the pair can switch between branches within a single step.
fn refine_limit(pair: &[UnitVector; 2]) -> f64 {
    (0.1 * great_circle(&pair[0], &pair[1])).clamp(1e-4, 0.02)
}

const MAX_REFINE_DEPTH: u32 = 40;

fn refine_step(
    a: &QutritState,
    b: &QutritState,
    prev: [UnitVector; 2],
    depth: u32,
    paths: &mut [Vec<UnitVector>; 2],
) -> Result<[UnitVector; 2]> {
    let (pair, displacement) = match_pair(&prev, &stars_from_state(b).unit_vectors());
    if displacement > refine_limit(&prev) && depth < MAX_REFINE_DEPTH {
        let mid = geodesic_interpolate(a, b, 0.5);
        let at_mid = refine_step(a, &mid, prev, depth + 1, paths)?;
        return refine_step(&mid, b, at_mid, depth + 1, paths);
    }
    if displacement > MAX_STAR_STEP {
        return Err(Error::StepTooCoarse { index: paths[0].len() - 1, displacement, limit: MAX_STAR_STEP });
    }
    paths[0].push(pair[0]);
    paths[1].push(pair[1]);
    Ok(pair)
}

/// Like `track_stars`, but each step is subdivided along the ray-space
/// geodesic joining neighbouring states until the stars move little per
/// sub-step. Geodesic sub-steps leave the Bargmann invariant unchanged, so
/// the refined paths describe the same discrete loop.
pub fn track_stars_refined(lp: &StateLoop) -> Result<StarTrajectory> {
    let states = lp.states();
    let n = states.len();
    let star_sets: Vec<StarSet> = states.iter().map(stars_from_state).collect();
    let start = star_sets[0].unit_vectors();
    let mut paths = [vec![start[0]], vec![start[1]]];
    let mut prev = start;
    for k in 0..n {
        prev = refine_step(&states[k], &states[(k + 1) % n], prev, 0, &mut paths)?;
    }
    let closure = close_paths(&mut paths);
    Ok(StarTrajectory { star_sets, paths, closure })
}

/// Directions tried as the common apex of the triangle fan.
fn apex_candidates() -> Vec<UnitVector> {
    let mut out = Vec::with_capacity(14);
    for k in 0..3 {
        for sign in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[k] = sign;
            out.push(v);
        }
    }
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                out.push(normalize3([sx, sy, sz]));
            }
        }
    }
    out
}

/// Signed solid angle enclosed by a closed spherical path, right-handed, mod
/// 4pi in `(-2pi, 2pi]`.
///
/// Summed as a fan of spherical triangles from an apex kept away from the
/// path, so no pole of the azimuthal connection is ever crossed.
pub fn solid_angle(path: &[UnitVector]) -> Result<f64> {
    if path.len() < 2 {
        return Ok(0.0);
    }
    let gap = great_circle(&path[0], path.last().unwrap());
    if gap > 1e-9 {
        return Err(Error::NotClosed { gap });
    }
    for (index, w) in path.windows(2).enumerate() {
        let displacement = great_circle(&w[0], &w[1]);
        if displacement > MAX_STAR_STEP {
            return Err(Error::StepTooCoarse { index, displacement, limit: MAX_STAR_STEP });
        }
    }
    let apex = apex_candidates()
        .into_iter()
        .map(|n| (path.iter().map(|u| 1.0 + dot(&n, u)).fold(f64::INFINITY, f64::min), n))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
        .1;
    let total: f64 = path
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let num = dot(&apex, &cross3(a, b));
            let den = 1.0 + dot(&apex, a) + dot(a, b) + dot(b, &apex);
            2.0 * num.atan2(den)
        })
        .sum();
    Ok(wrap_solid_angle(total))
}

/// Squared norm of `|u1>|u2> + |u2>|u1>` as a function of `d = 1 - u1.u2`.
pub fn symmetrized_norm_sq_of_d(d: f64) -> f64 {
    4.0 - d
}

/// `beta = -(d / N^2) dN^2/dd` for the two-star symmetrized state.
pub fn correlation_factor(u1: &UnitVector, u2: &UnitVector) -> f64 {
    let d = 1.0 - dot(u1, u2);
    // dN^2/dd = -1
    d / symmetrized_norm_sq_of_d(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub gamma0: f64,
    pub gamma_c: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        wrap_phase(self.gamma0 + self.gamma_c)
    }
}

/// `gammaC = 1/2 sum beta Omega(du12)`, with `beta Omega` reducing to
/// `(u1 x u2).d(u2 - u1) / (4 - d)`; evaluated at step midpoints.
fn correlation_phase(traj: &StarTrajectory) -> f64 {
    let [p1, p2] = &traj.paths;
    p1.windows(2)
        .zip(p2.windows(2))
        .map(|(a, b)| {
            let m1 = normalize3([0, 1, 2].map(|k| a[0][k] + a[1][k]));
            let m2 = normalize3([0, 1, 2].map(|k| b[0][k] + b[1][k]));
            let du = [0, 1, 2].map(|k| (b[1][k] - a[1][k]) - (b[0][k] - a[0][k]));
            let d = 1.0 - dot(&m1, &m2);
            0.5 * dot(&cross3(&m1, &m2), &du) / symmetrized_norm_sq_of_d(d)
        })
        .sum()
}

pub fn gamma_decomposition(traj: &StarTrajectory) -> Result<Decomposition> {
    let [p1, p2] = &traj.paths;
    let omega = match traj.closure {
        ClosurePermutation::Identity => solid_angle(p1)? + solid_angle(p2)?,
        ClosurePermutation::Swap => {
            let combined: Vec<UnitVector> = p1.iter().chain(p2.iter().skip(1)).copied().collect();
            solid_angle(&combined)?
        }
    };
    Ok(Decomposition { gamma0: wrap_phase(-omega / 2.0), gamma_c: correlation_phase(traj) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopClass {
    IndividualLoops,
    Exchange,
}

impl From<ClosurePermutation> for LoopClass {
    fn from(p: ClosurePermutation) -> Self {
        match p {
            ClosurePermutation::Identity => LoopClass::IndividualLoops,
            ClosurePermutation::Swap => LoopClass::Exchange,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub gamma: f64,
    pub gamma0: f64,
    #[serde(rename = "gammaC")]
    pub gamma_c: f64,
    pub class: LoopClass,
    pub quantized: Option<f64>,
}

/// Both phase routes, cross-checked, plus the loop classification.
pub fn classify_and_verify(lp: &StateLoop) -> Result<PhaseReport> {
    lp.ensure_fine(DELTA_MAX)?;
    let traj = track_stars_refined(lp)?;
    let dec = gamma_decomposition(&traj)?;
    let gamma = discrete_geometric_phase(lp)?;
    if wrap_phase(dec.total() - gamma).abs() > TOL_CONSISTENCY {
        return Err(Error::InconsistentPhases {
            discrete: gamma,
            decomposed: dec.total(),
            suggested_samples: 2 * lp.len(),
        });
    }
    let quantized = if lp.is_quadrupolar(MEMBERSHIP_QUADRUPOLAR) || lp.is_real(MEMBERSHIP_REAL) {
        let (value, distance) = nearest_quantized(gamma);
        if distance > TOL_QUANT {
            return Err(Error::NotQuantized { gamma });
        }
        Some(value)
    } else {
        None
    };
    Ok(PhaseReport {
        gamma,
        gamma0: dec.gamma0,
        gamma_c: dec.gamma_c,
        class: traj.closure.into(),
        quantized,
    })
}

/// Discrete phase of each eigenray (ascending eigenvalue order) followed
/// around a closed path of Hamiltonians, snapped to `{0, pi}`.
pub fn eigenfamily_topology(path: &[Operator3]) -> Result<[f64; 3]> {
    let mut families: [Vec<QutritState>; 3] = Default::default();
    for (index, h) in path.iter().enumerate() {
        let e = eig_hermitian3(h.matrix())?;
        let gap = (e.values[1] - e.values[0]).min(e.values[2] - e.values[1]);
        if gap < GAP_MIN {
            return Err(Error::GapClosure { index, gap });
        }
        for (j, family) in families.iter_mut().enumerate() {
            let mut v = QutritState::new(e.vectors[j])?;
            if let Some(prev) = family.last() {
                v = v.with_phase(-overlap(prev, &v).arg());
            }
            family.push(v);
        }
    }
    let mut out = [0.0; 3];
    for (j, family) in families.into_iter().enumerate() {
        let gamma = if family.len() < 3 {
            0.0
        } else {
            discrete_geometric_phase(&StateLoop::new(family)?)?
        };
        let (value, distance) = nearest_quantized(gamma);
        if distance > TOL_QUANT {
            return Err(Error::NotQuantized { gamma });
        }
        out[j] = value;
    }
    Ok(out)
}

pub fn pi_count(phases: &[f64; 3]) -> usize {
    phases.iter().filter(|&&p| p > PI / 2.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorana::{symmetrized_norm_sq, Star};
    use crate::operators::{quadrupole, QuadrupoleComponent};
    use crate::states::{quadrupolar_from_angles, QuadrupolarAngles};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real_state(rng: &mut impl Rng) -> QutritState {
        QutritState::from_real(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            .unwrap()
    }

    fn random_state(rng: &mut impl Rng) -> QutritState {
        QutritState::normalized([0; 3].map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).unwrap()
    }

    #[test]
    fn bargmann_of_equidistant_geodesic_states() {
        let a = QutritState::from_real(1.0, 0.0, 0.0).unwrap();
        let b = QutritState::from_real(0.6, 0.8, 0.0).unwrap();
        for n in 3..=12 {
            let lp = geodesic_loop(&a, &b, n).unwrap();
            let nf = n as f64;
            let want = (PI / nf).cos().powi(n as i32 - 1) * (PI - PI / nf).cos();
            let got = bargmann_invariant(lp.states()).unwrap();
            assert!((got - c(want, 0.0)).norm() < 1e-12, "n = {n}");
        }
        let three = bargmann_invariant(geodesic_loop(&a, &b, 3).unwrap().states()).unwrap();
        assert!((three.re + 0.125).abs() < 1e-12);
    }

    #[test]
    fn constant_loop() {
        let psi = quadrupolar_from_angles(QuadrupolarAngles::new(0.7, 2.0).unwrap());
        let lp = StateLoop::new(vec![psi; 5]).unwrap();
        assert!((bargmann_invariant(lp.states()).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(discrete_geometric_phase(&lp).unwrap(), 0.0);
        let traj = track_stars(&lp).unwrap();
        assert_eq!(traj.closure, ClosurePermutation::Identity);
        assert!(traj.paths[0].windows(2).all(|w| great_circle(&w[0], &w[1]) == 0.0));
    }

    #[test]
    fn loop_validation() {
        let up = QutritState::basis(1);
        let zero = QutritState::basis(0);
        assert!(matches!(StateLoop::new(vec![up, up]), Err(Error::LoopTooShort(2))));
        assert!(matches!(
            StateLoop::new(vec![up, up, zero]),
            Err(Error::OrthogonalNeighbors { index: 1, next: 2, .. })
        ));
        let lp = StateLoop::new(vec![up; 3]).unwrap();
        let json = serde_json::to_string(&lp).unwrap();
        assert_eq!(serde_json::from_str::<StateLoop>(&json).unwrap(), lp);
    }

    #[test]
    fn geodesic_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = real_state(&mut rng);
        let b = QutritState::normalized([0, 1, 2].map(|i| a.amps()[i] + c(0.01 * i as f64, 0.0))).unwrap();
        let lp = geodesic_loop(&a, &b, 100).unwrap();
        assert!(lp.is_real(1e-12));
        assert!((discrete_geometric_phase(&lp).unwrap() - PI).abs() < 1e-12);

        let q = quadrupolar_from_angles(QuadrupolarAngles::new(0.9, 1.1).unwrap());
        let partner = quadrupolar_from_angles(QuadrupolarAngles::new(PI - 0.9, 1.1 + PI).unwrap());
        // these angle pairs give orthogonal rays; the same ray needs theta = pi
        assert!(matches!(geodesic_loop(&q, &partner, 10), Err(Error::DegeneratePair { .. })));
        assert!(matches!(geodesic_loop(&q, &q.with_phase(0.4), 10), Err(Error::DegeneratePair { .. })));
    }

    #[test]
    fn gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let states: Vec<_> = (0..20).map(|_| random_state(&mut rng)).collect();
        let base = bargmann_invariant(&states).unwrap();
        let rephased: Vec<_> = states.iter().map(|s| s.with_phase(rng.gen_range(-PI..PI))).collect();
        let moved = bargmann_invariant(&rephased).unwrap();
        assert!(wrap_phase(moved.arg() - base.arg()).abs() < 1e-12);
    }

    fn circle(theta0: f64, n: usize) -> Vec<UnitVector> {
        (0..=n)
            .map(|k| Star::new(theta0, 2.0 * PI * k as f64 / n as f64).unit_vector())
            .collect()
    }

    #[test]
    fn solid_angle_examples() {
        assert!((solid_angle(&circle(PI / 2.0, 64)).unwrap().abs() - 2.0 * PI).abs() < 1e-12);
        for theta0 in [0.1, 0.8, 2.0, 3.0] {
            let want = 2.0 * PI * (1.0 - f64::cos(theta0));
            let got = solid_angle(&circle(theta0, 2000)).unwrap();
            assert!((wrap_solid_angle(got - want)).abs() < 1e-5, "theta0 {theta0}: {got} vs {want}");
        }
        let mut reversed = circle(0.8, 500);
        reversed.reverse();
        let fwd = solid_angle(&circle(0.8, 500)).unwrap();
        assert!((solid_angle(&reversed).unwrap() + fwd).abs() < 1e-9);
        let open = &circle(0.8, 100)[..50];
        assert!(matches!(solid_angle(open), Err(Error::NotClosed { .. })));
        assert!(matches!(solid_angle(&circle(0.8, 4)), Err(Error::StepTooCoarse { .. })));
    }

    #[test]
    fn correlation_factor_matches_finite_differences() {
        let h = 1e-6;
        let pair = |d: f64| {
            let gamma = (1.0 - d).clamp(-1.0, 1.0).acos();
            let s1 = Star::new(0.0, 0.0);
            let s2 = Star::new(gamma, 0.7);
            StarSet::new(s1, s2)
        };
        let norm_sq = |d: f64| symmetrized_norm_sq(&pair(d));
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut ds: Vec<f64> = (0..100).map(|_| rng.gen_range(h..2.0 - h)).collect();
        ds.extend([1.0, 2.0 - h]);
        for d in ds {
            let deriv = (norm_sq(d + h) - norm_sq(d - h)) / (2.0 * h);
            let fd = -d / norm_sq(d) * deriv;
            let [u1, u2] = pair(d).unit_vectors();
            assert!((correlation_factor(&u1, &u2) - fd).abs() < 1e-6, "d = {d}");
        }
        // antipodal end point with a one-sided difference
        let d = 2.0;
        let deriv = (norm_sq(d) - norm_sq(d - h)) / h;
        let fd = -d / norm_sq(d) * deriv;
        assert!((correlation_factor(&[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]) - fd).abs() < 1e-6);
        assert_eq!(correlation_factor(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]), 0.0);
    }

    fn smooth_generic_loop(rng: &mut impl Rng, n: usize) -> StateLoop {
        let [a, b, d] = [0; 3].map(|_| random_state(rng));
        let states = (0..n)
            .map(|k| {
                let (s, co) = (2.0 * PI * k as f64 / n as f64).sin_cos();
                QutritState::normalized(
                    [0, 1, 2].map(|i| a.amps()[i] * 1.5 + b.amps()[i] * co + d.amps()[i] * s),
                )
                .unwrap()
            })
            .collect();
        StateLoop::new(states).unwrap()
    }

    #[test]
    fn routes_agree_on_generic_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut nonzero_correlation = 0;
        for _ in 0..20 {
            let lp = smooth_generic_loop(&mut rng, 2000);
            let report = classify_and_verify(&lp).unwrap();
            assert!(report.quantized.is_none());
            if report.gamma_c.abs() > 1e-3 {
                nonzero_correlation += 1;
            }
        }
        assert!(nonzero_correlation > 0);
    }

    #[test]
    fn track_rotation_examples() {
        let tilted = quadrupolar_from_angles(QuadrupolarAngles::new(PI / 2.0, 0.0).unwrap());
        let equatorial = quadrupolar_from_angles(QuadrupolarAngles::new(PI, 0.0).unwrap());
        let n = 200;
        let rot = |psi: &QutritState, angle: f64| {
            // exp(-i S_z angle) is diagonal
            let d = [c(0.0, -angle).exp(), c(1.0, 0.0), c(0.0, angle).exp()];
            QutritState::new([0, 1, 2].map(|i| d[i] * psi.amps()[i])).unwrap()
        };
        let full =
            StateLoop::new((0..n).map(|k| rot(&tilted, 2.0 * PI * k as f64 / n as f64)).collect()).unwrap();
        let traj = track_stars(&full).unwrap();
        assert_eq!(traj.closure, ClosurePermutation::Identity);
        // stars at colatitudes pi/4 and 3pi/4 circle the z axis once each
        for p in &traj.paths {
            let cap = 2.0 * PI * (1.0 - p[0][2]);
            assert!(wrap_solid_angle(solid_angle(p).unwrap() - cap).abs() < 1e-3);
        }
        let half =
            StateLoop::new((0..n).map(|k| rot(&equatorial, PI * k as f64 / n as f64)).collect()).unwrap();
        let traj = track_stars(&half).unwrap();
        assert_eq!(traj.closure, ClosurePermutation::Swap);
        let report = classify_and_verify(&half).unwrap();
        assert_eq!(report.class, LoopClass::Exchange);
        assert_eq!(report.quantized, Some(PI));
        assert!(report.gamma_c.abs() < 1e-10);
        let coarse = StateLoop::new((0..3).map(|k| rot(&equatorial, PI * k as f64 / 3.0)).collect()).unwrap();
        assert!(matches!(track_stars(&coarse), Err(Error::StepTooCoarse { .. })));
    }

    #[test]
    fn real_loops_have_vanishing_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let a = real_state(&mut rng);
            let b = real_state(&mut rng);
            let lp = geodesic_loop(&a, &b, 400).unwrap();
            let report = classify_and_verify(&lp).unwrap();
            assert!(report.gamma_c.abs() <= 1e-6);
            assert_eq!(report.quantized, Some(PI));
        }
    }

    #[test]
    fn eigenfamily_examples() {
        let q1 = quadrupole(QuadrupoleComponent::X2MinusY2);
        let q2 = quadrupole(QuadrupoleComponent::Xy);
        let n = 400;
        let path: Vec<Operator3> = (0..n)
            .map(|k| {
                let phi = PI * k as f64 / n as f64;
                Operator3::combination([((2.0 * phi).cos(), &q1), ((2.0 * phi).sin(), &q2)])
            })
            .collect();
        let phases = eigenfamily_topology(&path).unwrap();
        assert_eq!(pi_count(&phases), 2);
        let constant = vec![Operator3::combination([(1.0, &q1), (0.3, &q2)]); 10];
        assert_eq!(eigenfamily_topology(&constant).unwrap(), [0.0; 3]);
        let degenerate = vec![quadrupole(QuadrupoleComponent::Zz); 5];
        assert!(matches!(eigenfamily_topology(&degenerate), Err(Error::GapClosure { index: 0, .. })));
    }

    #[test]
    fn phase_wrapping() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(nearest_quantized(-PI + 1e-4).0, PI);
        assert_eq!(wrap_solid_angle(2.0 * PI), 2.0 * PI);
    }
}
