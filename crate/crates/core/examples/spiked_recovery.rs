// Support recovery on data drawn from a spiked covariance model.
//
// Run with `cargo run --example spiked_recovery`.

use std::error::Error;

use pspca::{
    center, fit_spca, recovery_metrics, simulate_spiked, SelectionMethod, SelectionPolicy, SpcaOptions,
    SpikedTruth, WeightProfile,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for sigma in [0.1, 0.5, 1.0] {
        let mut exact = 0;
        let mut cards = Vec::new();
        for seed in 0..20 {
            let truth = SpikedTruth::planted(50, vec![10.0, 5.0], 4, WeightProfile::Equal, sigma, seed)?;
            let (x, truth) = simulate_spiked(500, 50, &truth)?;
            let cd = center(&x, false)?;
            let policy = SelectionPolicy::new(SelectionMethod::Forward, 0.95);
            let fit = fit_spca(&cd, 2, &policy, &SpcaOptions::default())?;
            let metrics = recovery_metrics(&fit.components, &truth);
            if metrics.exact_recovery {
                exact += 1;
            }
            cards.push(fit.components.iter().map(|c| c.cardinality).collect::<Vec<_>>());
        }
        cards.sort();
        cards.dedup();
        println!("sigma {sigma}: exact recovery {exact}/20, cardinalities seen {cards:?}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
