// Power iteration with deflation, and the n x n route for wide data.
//
// Run with `cargo run --example power_method`.

use std::error::Error;

use pspca::eigen::{leading_component, use_covariance_path};
use pspca::{center, simulate_spiked, top_k_eigenpairs, DenseMatrix, PowerConfig, SpikedTruth, WeightProfile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let s = DenseMatrix::from_row_major(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0])?;
    let cfg = PowerConfig {
        tol: 1e-12,
        ..PowerConfig::default()
    };
    for pair in top_k_eigenpairs(&s, 3, &cfg)? {
        println!(
            "lambda = {:.10} after {} iterations, residual {:.1e}, v = {:.4?}",
            pair.value, pair.iterations, pair.residual, pair.vector
        );
    }

    // 40 observations of 3000 variables: the covariance would be 3000 x 3000,
    // so the leading pair comes from the 40 x 40 Gram matrix instead.
    let truth = SpikedTruth::planted(3000, vec![8.0], 5, WeightProfile::Decreasing, 0.2, 1)?;
    let (x, truth) = simulate_spiked(40, 3000, &truth)?;
    let cd = center(&x, false)?;
    println!("covariance route: {}", use_covariance_path(cd.n(), cd.p()));
    let (pair, score) = leading_component(&cd, &PowerConfig::default())?;
    let top = (0..cd.p())
        .max_by(|&a, &b| pair.vector[a].abs().total_cmp(&pair.vector[b].abs()))
        .unwrap_or(0);
    println!(
        "leading eigenvalue {:.3}, largest loading on x{top} (planted top variable x{}), score length {}",
        pair.value,
        truth.top_variable(0),
        score.len()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
