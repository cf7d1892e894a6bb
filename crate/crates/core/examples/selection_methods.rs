// Forward, backward, thresholding and exhaustive selection on the same PC.
//
// Run with `cargo run --example selection_methods`.

use std::error::Error;

use pspca::selection::select;
use pspca::{
    center, exhaustive_best, fit_pca, forward_select, projection_r2, threshold_select, PowerConfig,
    SelectionMethod, SelectionPolicy, SpikedTruth, WeightProfile,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let truth = SpikedTruth::planted(12, vec![6.0, 3.0], 3, WeightProfile::Equal, 1.0, 21)?;
    let (x, _) = pspca::simulate_spiked(80, 12, &truth)?;
    let cd = center(&x, false)?;
    let pca = fit_pca(&cd, Some(1), &PowerConfig::default())?;
    let (t, v) = (pca.score(0), pca.loading(0));

    println!("card  forward  threshold  exhaustive");
    for c in 1..=6 {
        let policy = SelectionPolicy::new(SelectionMethod::Forward, 1.0).with_max_cardinality(c);
        let (fj, _) = forward_select(&cd, t, &policy)?;
        let thr = projection_r2(&cd, t, &threshold_select(v, c)?)?;
        let (_, best) = exhaustive_best(&cd, t, c)?;
        println!("{c:>4}  {:.5}  {thr:.5}    {best:.5}", projection_r2(&cd, t, &fj)?);
    }

    for method in [SelectionMethod::Forward, SelectionMethod::Backward, SelectionMethod::Exhaustive] {
        let (support, trace) = select(&cd, t, v, &SelectionPolicy::new(method, 0.9))?;
        let path: Vec<String> = trace
            .steps
            .iter()
            .map(|s| format!("{:?} x{} -> {:.4}", s.action, s.variable, s.r2_after))
            .collect();
        println!("{method}: {:?} ({:?})", support.indices(), trace.terminated_by);
        println!("  {}", path.join(", "));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
