// Principal components of a small data set.
//
// Run with `cargo run --example pca_basics`.

use std::error::Error;

use pspca::{center, fit_pca, DenseMatrix, PowerConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Five observations of three variables; the first two move together.
    let x = DenseMatrix::from_row_major(
        5,
        3,
        &[
            2.0, 4.1, 0.3, //
            1.0, 2.2, -0.4, //
            3.0, 5.8, 0.1, //
            4.0, 8.1, 0.5, //
            0.5, 1.0, -0.2,
        ],
    )?;

    for scale in [false, true] {
        let cd = center(&x, scale)?;
        let model = fit_pca(&cd, None, &PowerConfig::default())?;
        println!("scale = {scale}: total variance {:.4}", model.total_variance());
        for (i, ratio) in model.explained_variance_ratio().iter().enumerate() {
            println!(
                "  PC{}: eigenvalue {:.4}, share {:.2}%, loading {:.3?}",
                i + 1,
                model.eigenvalues()[i],
                100.0 * ratio,
                model.loading(i)
            );
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
