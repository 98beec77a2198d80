use dampwave_web::{certify_json, simulate_decay_json, solution_profile_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn decay_output_is_monotone_for_unit_coefficients() {
    let v = parse(&simulate_decay_json(0.0, 0.0, 0.0, 30.0, 512).unwrap());
    let e: Vec<f64> = v["energy"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(e.len() > 10);
    assert!(e.last().unwrap() < &e[0]);
    assert_eq!(v["mu"].as_f64().unwrap(), 1.0);
}

#[test]
fn profile_has_one_value_per_node() {
    let v = parse(&solution_profile_json(0.0, 0.0, 0.0, 5.0, 256).unwrap());
    assert_eq!(v["r"].as_array().unwrap().len(), 256);
    assert_eq!(v["u"].as_array().unwrap().len(), 256);
}

#[test]
fn certify_reports_rates() {
    let v = parse(&certify_json(0.0, 0.5, 0.0, 0.1).unwrap());
    assert!((v["mu"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert!(v["weight"]["omega"].is_number());
}

#[test]
fn bad_input_is_an_error() {
    assert!(simulate_decay_json(0.0, 0.0, 0.0, -1.0, 512).is_err());
    assert!(simulate_decay_json(0.0, 0.0, 0.0, 10.0, 10).is_err());
    assert!(certify_json(0.0, 1.5, 0.6, 0.1).is_err());
}
