// Writing data to CSV, reading it back, and saving a JSON report.
//
// Run with `cargo run --example json_report`.

use std::error::Error;

use pspca::report::Metadata;
use pspca::{
    center, fit_spca, load_csv, simulate_spiked, write_csv, write_report, Report, SelectionMethod,
    SelectionPolicy, SpcaOptions, SpikedTruth, WeightProfile,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("pspca-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let truth = SpikedTruth::planted(8, vec![5.0], 3, WeightProfile::Equal, 0.5, 4)?;
    let (x, _) = simulate_spiked(50, 8, &truth)?;
    let names: Vec<String> = (0..8).map(|j| format!("gene_{j}")).collect();
    let csv_path = dir.join("data.csv");
    write_csv(&csv_path, &x, &names)?;

    let data = load_csv(&csv_path)?;
    assert_eq!(data.matrix, x);
    let cd = center(&data.matrix, true)?;
    let policy = SelectionPolicy::new(SelectionMethod::Forward, 0.9).with_max_cardinality(3);
    let fit = fit_spca(&cd, 2, &policy, &SpcaOptions::default())?;

    let config = serde_json::json!({ "input": "data.csv", "scale": true, "policy": policy });
    let report = Report::from_spca(&fit, data.names, Metadata::new("spca", config));
    let report_path = dir.join("report.json");
    write_report(&report, &report_path)?;

    let text = std::fs::read_to_string(&report_path)?;
    println!("{} bytes written to {}", text.len(), report_path.display());
    for line in text.lines().filter(|l| l.contains("projection_r2")) {
        println!("{}", line.trim());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
