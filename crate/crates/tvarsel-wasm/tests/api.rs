//! The wasm surface compiles to plain functions on native targets; these
//! tests drive it exactly as the demo page does, minus the browser.

use tvarsel_wasm::{model_labels, run_selection, simulate, window_error_curve};

#[test]
fn labels_list_every_model() {
    let labels: Vec<String> = serde_json::from_str(&model_labels()).unwrap();
    assert_eq!(labels.len(), 15);
    assert!(labels.iter().any(|l| l == "periodic1"));
}

#[test]
fn simulate_then_select_round_trip() {
    let values = simulate("periodic1", 600, 7).unwrap();
    assert_eq!(values.len(), 600);

    let report = run_selection(&values, 57, 5, 80, 130, 25, 3, 0.0).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    let rows = parsed["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row["ratio2"].as_f64().unwrap() > 0.0);
        let chosen = row["chosen"].as_str().unwrap();
        assert!(chosen == "s" || chosen == "ls");
    }
}

#[test]
fn error_curve_has_one_value_per_candidate() {
    let values = simulate("increasing2", 600, 9).unwrap();
    let curve = window_error_curve(&values, 57, 4, 80, 130, 10, 2).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&curve).unwrap();
    let orders = parsed["orders"].as_array().unwrap().len();
    let windows = parsed["windows"].as_array().unwrap().len();
    assert_eq!(orders, 5);
    assert_eq!(windows, 6);
    assert_eq!(parsed["mspe_ls"].as_array().unwrap().len(), orders * windows);
    assert_eq!(parsed["mspe_s"].as_array().unwrap().len(), orders);
}

#[test]
fn invalid_requests_surface_as_errors() {
    assert!(simulate("nosuch", 100, 1).is_err());
    let values = simulate("periodic1", 100, 1).unwrap();
    assert!(run_selection(&values, 100, 3, 20, 40, 5, 2, 0.0).is_err());
    assert!(run_selection(&values, 30, 3, 40, 20, 5, 2, 0.0).is_err());
}
