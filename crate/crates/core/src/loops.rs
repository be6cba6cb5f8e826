//! Loop and Hamiltonian-path constructions used by the examples, the
//! verification suite and the CLI.

use std::f64::consts::PI;

use rand::Rng;

use crate::berry::{geodesic_interpolate, StateLoop};
use crate::error::{Error, Result};
use crate::majorana::{cross3, dot, normalize3, stars_from_state, UnitVector};
use crate::numerics::{c, eig_hermitian3, propagator};
use crate::operators::{
    global_unitary, interpolating_unitary, planar_quadrupole_hamiltonian, quadrupolar_hamiltonian, quadrupole,
    spin_operators, Operator3, QuadrupoleComponent,
};
use crate::states::{
    gauge_fix_quadrupolar, magnetization, overlap, quadrupolar_from_angles, QuadrupolarAngles, QutritState,
    TOL_QUADRUPOLAR,
};

/// Default number of states for constructed loops.
pub const DEFAULT_LOOP_SAMPLES: usize = 400;

pub fn random_unit_vector(rng: &mut impl Rng) -> UnitVector {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let rho = (1.0 - z * z).sqrt();
    [rho * phi.cos(), rho * phi.sin(), z]
}

pub fn random_state(rng: &mut impl Rng) -> QutritState {
    loop {
        let amps = [0; 3].map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        if let Ok(psi) = QutritState::normalized(amps) {
            return psi;
        }
    }
}

pub fn random_real_state(rng: &mut impl Rng) -> QutritState {
    let u = random_unit_vector(rng);
    QutritState::from_real(u[0], u[1], u[2]).expect("unit vector")
}

/// Uniform over the quadrupolar rays, gauge-fixed.
pub fn random_quadrupolar_state(rng: &mut impl Rng) -> QutritState {
    let real = random_real_state(rng);
    let q = global_unitary().adjoint().apply(&real).expect("unitary image");
    gauge_fix_quadrupolar(&q).expect("image of a real state is quadrupolar")
}

/// `exp(-i angle n.S)`.
pub fn rotation(axis: &UnitVector, angle: f64) -> Operator3 {
    let s = spin_operators();
    let generator = Operator3::combination([(axis[0], &s[0]), (axis[1], &s[1]), (axis[2], &s[2])]);
    Operator3::new(propagator(generator.matrix(), angle).expect("spin generator is Hermitian"))
}

/// `n` states `R(axis, total k/n) psi`, `k = 0..n`.
pub fn rotation_loop(psi: &QutritState, axis: &UnitVector, total: f64, n: usize) -> Result<StateLoop> {
    let axis = normalize3(*axis);
    let states = (0..n)
        .map(|k| rotation(&axis, total * k as f64 / n as f64).apply(psi))
        .collect::<Result<Vec<_>>>()?;
    StateLoop::new(states)
}

/// Director of a quadrupolar state: the axis through its antipodal stars.
pub fn director(psi_q: &QutritState) -> Result<UnitVector> {
    let mag = magnetization(psi_q);
    if mag > TOL_QUADRUPOLAR {
        return Err(Error::NotQuadrupolar { magnetization: mag });
    }
    Ok(stars_from_state(psi_q).unit_vectors()[0])
}

/// Unit vector orthogonal to `u`, built from the coordinate axis least
/// aligned with it.
pub fn perpendicular(u: &UnitVector) -> UnitVector {
    let k = (0..3).min_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    normalize3(cross3(u, &e))
}

/// Half-turn about an axis orthogonal to the director: the two stars swap
/// along a great circle.
pub fn exchange_loop(psi_q: &QutritState, n: usize) -> Result<StateLoop> {
    let axis = perpendicular(&director(psi_q)?);
    rotation_loop(psi_q, &axis, PI, n)
}

/// Like `exchange_loop` with a chosen rotation axis, which must be
/// orthogonal to the director.
pub fn exchange_loop_about(psi_q: &QutritState, axis: &UnitVector, n: usize) -> Result<StateLoop> {
    let axis = normalize3(*axis);
    let residual = dot(&axis, &director(psi_q)?).abs();
    if residual > 1e-9 {
        return Err(Error::ConditionViolated { residual });
    }
    rotation_loop(psi_q, &axis, PI, n)
}

/// Full turn about `axis`: each star traces its own closed circle.
pub fn individual_loop(psi_q: &QutritState, axis: &UnitVector, n: usize) -> Result<StateLoop> {
    director(psi_q)?;
    rotation_loop(psi_q, axis, 2.0 * PI, n)
}

/// Closed loop of real states made of geodesic arcs through `vertices`
/// random points, at least `n_min` states in total. Each arc takes the short
/// way, so the loop closes on either `+v0` or `-v0`.
pub fn piecewise_geodesic_real_loop(rng: &mut impl Rng, vertices: usize, n_min: usize) -> Result<StateLoop> {
    let vertices = vertices.max(2);
    let mut points: Vec<QutritState> = Vec::with_capacity(vertices);
    while points.len() < vertices {
        let v = random_real_state(rng);
        let ok = points.last().is_none_or(|p| {
            let o = overlap(p, &v).norm();
            o > 0.05 && o < 0.999
        });
        if ok {
            points.push(v);
        }
    }
    let first_last = overlap(&points[0], &points[vertices - 1]).norm();
    if first_last <= 0.05 || first_last >= 0.999 {
        return piecewise_geodesic_real_loop(rng, vertices, n_min);
    }
    let arcs: Vec<f64> = (0..vertices)
        .map(|i| points[i].ray_distance(&points[(i + 1) % vertices]))
        .collect();
    let total: f64 = arcs.iter().sum();
    let mut states = Vec::new();
    let mut current = points[0];
    for i in 0..vertices {
        let target = points[(i + 1) % vertices];
        let steps = ((n_min as f64 * arcs[i] / total).ceil() as usize).max(1);
        for k in 0..steps {
            states.push(geodesic_interpolate(&current, &target, k as f64 / steps as f64));
        }
        current = geodesic_interpolate(&current, &target, 1.0);
    }
    StateLoop::new(states)
}

pub fn piecewise_geodesic_quadrupolar_loop(
    rng: &mut impl Rng,
    vertices: usize,
    n_min: usize,
) -> Result<StateLoop> {
    piecewise_geodesic_real_loop(rng, vertices, n_min)?.transform(&global_unitary().adjoint())
}

/// Top eigenstate of the planar quadrupolar Hamiltonian over a full turn of
/// its angle, carried by `U(alpha)`. Phases are aligned to the previous
/// sample.
pub fn morph_loop(alpha: f64, n: usize) -> Result<StateLoop> {
    let u = interpolating_unitary(alpha).unitary;
    let mut states: Vec<QutritState> = Vec::with_capacity(n);
    for k in 0..n {
        let theta = 2.0 * PI * k as f64 / n as f64;
        let e = eig_hermitian3(planar_quadrupole_hamiltonian(theta).matrix())?;
        let mut psi = u.apply(&QutritState::new(e.vectors[2])?)?;
        if let Some(prev) = states.last() {
            psi = psi.with_phase(-overlap(prev, &psi).arg());
        }
        states.push(psi);
    }
    StateLoop::new(states)
}

/// `cos 2phi Q_{x^2-y^2} + sin 2phi Q_xy` for `phi` over `[0, pi)`.
pub fn planar_family_path(n: usize) -> Vec<Operator3> {
    let q1 = quadrupole(QuadrupoleComponent::X2MinusY2);
    let q2 = quadrupole(QuadrupoleComponent::Xy);
    (0..n)
        .map(|k| {
            let phi = PI * k as f64 / n as f64;
            Operator3::combination([((2.0 * phi).cos(), &q1), ((2.0 * phi).sin(), &q2)])
        })
        .collect()
}

/// Closed path `c0 + c1 cos t + c2 sin t` in the five quadrupole
/// coefficients, `t` over `[0, 2pi)`.
pub fn random_hamiltonian_loop(rng: &mut impl Rng, n: usize) -> Vec<Operator3> {
    let coeffs = [0; 3].map(|_| QuadrupoleComponent::ALL.map(|_| rng.gen_range(-1.0..1.0)));
    (0..n)
        .map(|k| {
            let (s, co) = (2.0 * PI * k as f64 / n as f64).sin_cos();
            let terms = QuadrupoleComponent::ALL
                .iter()
                .enumerate()
                .map(|(i, &q)| (q, coeffs[0][i] + coeffs[1][i] * co + coeffs[2][i] * s));
            quadrupolar_hamiltonian(terms).expect("random coefficients are not all zero")
        })
        .collect()
}

/// Loop of `psi_q(theta0, phi)` over a full turn of `phi`.
pub fn azimuthal_quadrupolar_loop(theta0: f64, n: usize) -> Result<StateLoop> {
    let states = (0..n)
        .map(|k| Ok(quadrupolar_from_angles(QuadrupolarAngles::new(theta0, 2.0 * PI * k as f64 / n as f64)?)))
        .collect::<Result<Vec<_>>>()?;
    StateLoop::new(states)
}
