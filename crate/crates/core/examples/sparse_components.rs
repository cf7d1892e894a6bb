// Sparse approximations of the leading principal components.
//
// Run with `cargo run --example sparse_components`.

use std::error::Error;

use pspca::{
    center, fit_pca, fit_spca, simulate_spiked, DeflationMode, PowerConfig, SelectionMethod, SelectionPolicy,
    SpcaOptions, SpikedTruth, WeightProfile,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let truth = SpikedTruth::planted(30, vec![9.0, 4.0], 4, WeightProfile::Decreasing, 0.8, 3)?;
    let (x, _) = simulate_spiked(300, 30, &truth)?;
    let cd = center(&x, false)?;

    let pca = fit_pca(&cd, Some(3), &PowerConfig::default())?;
    let mut cumulative = 0.0;
    for (i, r) in pca.explained_variance_ratio().iter().enumerate() {
        cumulative += r;
        println!("PC{} alone: cumulative share {:.4}", i + 1, cumulative);
    }

    for deflation in [DeflationMode::Projection, DeflationMode::None] {
        let options = SpcaOptions {
            deflation,
            ..SpcaOptions::default()
        };
        let policy = SelectionPolicy::new(SelectionMethod::Forward, 0.9);
        let fit = fit_spca(&cd, 3, &policy, &options)?;
        println!("deflation {deflation}:");
        for (i, c) in fit.components.iter().enumerate() {
            let nonzero: Vec<String> = c
                .support
                .indices()
                .iter()
                .map(|&j| format!("x{j}={:+.3}", c.loadings[j]))
                .collect();
            println!(
                "  component {i}: r2 {:.4}, cumulative adjusted share {:.4}, {}",
                c.projection_r2,
                fit.adjusted_cumulative_vexp[i],
                nonzero.join(" ")
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
