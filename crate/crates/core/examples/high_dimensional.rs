// A sparse component of 16,000 variables from 200 observations.
//
// Run with `cargo run --release --example high_dimensional`.

use std::error::Error;
use std::time::Instant;

use pspca::{
    center, fit_spca, simulate_spiked, SelectionMethod, SelectionPolicy, SpcaOptions, SpikedTruth, WeightProfile,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (n, p) = (200, 16_000);
    let truth = SpikedTruth::planted(p, vec![10.0], 8, WeightProfile::Decreasing, 0.3, 2)?;
    let (x, truth) = simulate_spiked(n, p, &truth)?;

    let start = Instant::now();
    let cd = center(&x, false)?;
    let policy = SelectionPolicy::new(SelectionMethod::Forward, 0.9);
    let fit = fit_spca(&cd, 1, &policy, &SpcaOptions::default())?;
    let c = &fit.components[0];
    println!("fit in {:.2?}", start.elapsed());
    println!(
        "support {:?}, r2 {:.4}, planted support {:?}",
        c.support.indices(),
        c.projection_r2,
        truth.supports[0].indices()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
