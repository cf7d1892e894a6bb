// Selection methods compared at matched cardinality against a known truth.
//
// Run with `cargo run --example bench_harness`.

use std::error::Error;

use pspca::bench::{run_bench, BenchConfig};
use pspca::{center, simulate_spiked, PowerConfig, SelectionMethod, SpikedTruth, WeightProfile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let truth = SpikedTruth::planted(20, vec![8.0, 4.0], 4, WeightProfile::Decreasing, 1.0, 13)?;
    let (x, truth) = simulate_spiked(200, 20, &truth)?;
    let cd = center(&x, false)?;
    let config = BenchConfig {
        methods: vec![
            SelectionMethod::Forward,
            SelectionMethod::Backward,
            SelectionMethod::Threshold,
            SelectionMethod::Exhaustive,
        ],
        k: 2,
        alpha: 0.9,
        power: PowerConfig::default(),
    };
    let outcome = run_bench(&cd, Some(&truth), &config)?;
    println!("matched cardinalities {:?}", outcome.matched_cardinalities);
    println!("method      pc  card  r2      adj.vexp  recall  time");
    for row in &outcome.rows {
        let r = &row.record;
        match &r.error {
            Some(e) => println!("{:<10}  {}   error: {e}", r.method, r.component),
            None => println!(
                "{:<10}  {}   {:<4}  {:.4}  {:.4}    {:.2}    {:.1}ms",
                r.method,
                r.component,
                r.cardinality.unwrap_or(0),
                r.projection_r2.unwrap_or(f64::NAN),
                r.adjusted_cumulative_vexp.unwrap_or(f64::NAN),
                r.recovery.as_ref().map_or(f64::NAN, |m| m.recall),
                1000.0 * row.seconds
            ),
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
