//! Drives the browser demo's exact call sequence on the native target:
//! list models, simulate, run the selection, pull one error curve. Useful
//! for checking the JSON the page will receive without building for wasm.

fn main() {
    let labels: Vec<String> = serde_json::from_str(&tvarsel_wasm::model_labels()).unwrap();
    println!("{} models: {} ... {}", labels.len(), labels[0], labels[labels.len() - 1]);

    let n = 600;
    let values = tvarsel_wasm::simulate("periodic1", n, 7).expect("simulate");
    println!("simulated {} values, first = {:.6}", values.len(), values[0]);

    let report = tvarsel_wasm::run_selection(&values, 57, 5, 80, 130, 10, 4, 0.0)
        .expect("selection");
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    for row in parsed["rows"].as_array().unwrap() {
        println!(
            "h={} p_s={} p_ls={} N={} ratio2={:.3} chosen={}",
            row["h"], row["p_s"], row["p_ls"], row["n_ls"],
            row["ratio2"].as_f64().unwrap(),
            row["chosen"].as_str().unwrap(),
        );
    }

    let curve = tvarsel_wasm::window_error_curve(&values, 57, 5, 80, 130, 10, 1)
        .expect("curve");
    let parsed: serde_json::Value = serde_json::from_str(&curve).unwrap();
    println!(
        "curve: {} orders x {} windows",
        parsed["orders"].as_array().unwrap().len(),
        parsed["windows"].as_array().unwrap().len(),
    );
}
