use std::f64::consts::PI;

use qberry_core::berry::{classify_and_verify, discrete_geometric_phase};
use qberry_core::dynamics::{aa_phase, DEFAULT_SAMPLES};
use qberry_core::loops::{exchange_loop, individual_loop, morph_loop};
use qberry_core::states::{quadrupolar_from_angles, QuadrupolarAngles};
use qberry_core::verify::{run_suite, Suite, DEFAULT_SEED};
use qberry_core::{LoopClass, PhaseReport, RealState3, SpinFieldReal, StateLoop};

fn psi_q(theta: f64, phi: f64) -> qberry_core::QutritState {
    quadrupolar_from_angles(QuadrupolarAngles::new(theta, phi).unwrap())
}

#[test]
fn exchange_and_individual_loops() {
    let q = psi_q(1.1, 0.4);
    let ex = classify_and_verify(&exchange_loop(&q, 400).unwrap()).unwrap();
    assert_eq!(ex.class, LoopClass::Exchange);
    assert_eq!(ex.quantized, Some(PI));
    assert!(ex.gamma_c.abs() < 1e-10);

    let ind = classify_and_verify(&individual_loop(&q, &[0.0, 0.0, 1.0], 400).unwrap()).unwrap();
    assert_eq!(ind.class, LoopClass::IndividualLoops);
    assert_eq!(ind.quantized, Some(0.0));
}

#[test]
fn loop_and_report_json_round_trip() {
    let lp = morph_loop(0.5, 400).unwrap();
    let text = serde_json::to_string(&lp).unwrap();
    assert!(text.starts_with("{\"states\":[{\"amps\":[["));
    let back: StateLoop = serde_json::from_str(&text).unwrap();
    assert!((discrete_geometric_phase(&back).unwrap() - discrete_geometric_phase(&lp).unwrap()).abs() < 1e-12);

    let report = classify_and_verify(&back).unwrap();
    let value = serde_json::to_value(report).unwrap();
    for key in ["gamma", "gamma0", "gammaC", "class", "quantized"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    let again: PhaseReport = serde_json::from_value(value).unwrap();
    assert_eq!(again, report);
}

#[test]
fn rejects_malformed_loops() {
    assert!(serde_json::from_str::<StateLoop>(r#"{"states":[]}"#).is_err());
    let not_normalized = r#"{"states":[{"amps":[[1,0],[1,0],[0,0]]},{"amps":[[1,0],[0,0],[0,0]]},{"amps":[[1,0],[0,0],[0,0]]}]}"#;
    assert!(serde_json::from_str::<StateLoop>(not_normalized).is_err());
}

#[test]
fn spin_field_phases() {
    let field = SpinFieldReal::new(0.3, 0.8, -0.5).unwrap();
    let n = field.axis();
    // start orthogonal to the rotation axis: geodesic, phase pi
    let v = [n[1], -n[0], 0.0];
    let start = RealState3::normalized(v[0], v[1], v[2]).unwrap();
    let u_dag = qberry_core::operators::global_unitary().adjoint();
    let q = u_dag.apply(&start.to_state()).unwrap();
    let aa = aa_phase(&field, &q, DEFAULT_SAMPLES).unwrap();
    assert_eq!(aa.phase, PI);
    assert!((aa.ray_period - field.period() / 2.0).abs() < 1e-12);
}

#[test]
fn suites_are_reproducible() {
    let a = run_suite(Suite::Entanglement, DEFAULT_SEED);
    let b = run_suite(Suite::Entanglement, DEFAULT_SEED);
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.passed));
}
