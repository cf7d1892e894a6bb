//! Results checked against independent computations: nalgebra's dense
//! symmetric eigensolver and SVD least squares, and brute-force formulas.

mod common;

use common::*;
use pspca::eigen::{leading_component, top_k_eigenpairs_gram};
use pspca::{
    adjusted_vexp, center, covariance, fit_pca, fit_spca, gram, leading_eigenpair, project_loadings,
    projection_r2, simulate_spiked, top_k_eigenpairs, DeflationMode, DenseMatrix, IndexSet, PowerConfig,
    SelectionMethod, SelectionPolicy, SpcaOptions, SpikedTruth, WeightProfile,
};

fn cfg() -> PowerConfig {
    PowerConfig::default()
}

#[test]
fn top_pairs_match_dense_solver() {
    for seed in 0..40 {
        let mut r = rng(seed);
        let s = random_psd(&mut r, 2 + seed as usize % 11);
        let ours = top_k_eigenpairs(&s, 3.min(s.rows()), &cfg()).unwrap();
        let oracle = oracle_eigen(&s);
        for (pair, (value, vector)) in ours.iter().zip(&oracle) {
            assert!((pair.value - value).abs() <= 1e-9 * oracle[0].0, "seed {seed}");
            assert!(abs_cosine(&pair.vector, vector) >= 1.0 - 1e-9, "seed {seed}");
            assert!(pair.residual <= 1e-8 * oracle[0].0);
        }
    }
}

#[test]
fn gram_route_matches_covariance_route() {
    for seed in 0..10 {
        let mut r = rng(100 + seed);
        let cd = centered(&mut r, 8, 30);
        let via_cov = top_k_eigenpairs(&covariance(&cd), 3, &cfg()).unwrap();
        let via_gram = top_k_eigenpairs_gram(&cd, 3, &cfg()).unwrap();
        for (a, (b, score)) in via_cov.iter().zip(&via_gram) {
            assert!((a.value - b.value).abs() <= 1e-9 * via_cov[0].value);
            assert!(abs_cosine(&a.vector, &b.vector) >= 1.0 - 1e-9);
            let expected = cd.matrix().matvec(&b.vector);
            assert_eq!(score, &expected);
        }
        // nonzero spectra of XᵀX/(n-1) and XXᵀ/(n-1) agree
        let cov = oracle_eigen(&covariance(&cd));
        let gr = oracle_eigen(&gram(&cd));
        for i in 0..7 {
            assert!((cov[i].0 - gr[i].0).abs() <= 1e-10 * cov[0].0);
        }
    }
}

#[test]
fn leading_component_picks_route_by_shape() {
    let mut r = rng(7);
    let wide = centered(&mut r, 10, 2100);
    assert!(!pspca::eigen::use_covariance_path(10, 2100));
    let (pair, score) = leading_component(&wide, &cfg()).unwrap();
    let oracle = oracle_eigen(&gram(&wide));
    assert!((pair.value - oracle[0].0).abs() <= 1e-9 * oracle[0].0);
    let var = dot(&score, &score) / 9.0;
    assert!((var - pair.value).abs() <= 1e-6 * pair.value);
}

#[test]
fn pca_matches_dense_solver_and_bookkeeping() {
    for seed in 0..15 {
        let mut r = rng(200 + seed);
        let (n, p) = (12 + seed as usize, 3 + seed as usize % 6);
        let cd = centered(&mut r, n, p);
        let model = fit_pca(&cd, None, &cfg()).unwrap();
        let oracle = oracle_eigen(&covariance(&cd));
        let total: f64 = oracle.iter().map(|(v, _)| v).sum();
        assert!((model.total_variance() - total).abs() <= 1e-10 * total);
        let ratios = model.explained_variance_ratio();
        for i in 0..model.k() {
            assert!((ratios[i] - oracle[i].0 / total).abs() <= 1e-9);
            let t = model.score(i);
            let var = dot(t, t) / (n - 1) as f64;
            assert!((var - model.eigenvalues()[i]).abs() <= 1e-6 * model.eigenvalues()[i]);
            for j in 0..i {
                let cross = dot(t, model.score(j)).abs();
                assert!(cross <= 1e-6 * dot(model.score(0), model.score(0)));
            }
        }
    }
}

#[test]
fn projection_r2_matches_least_squares_on_every_subset() {
    let mut r = rng(300);
    let cd = centered(&mut r, 6, 4);
    let t = fit_pca(&cd, Some(1), &cfg()).unwrap().score(0).to_vec();
    for mask in 1u32..16 {
        let support: Vec<usize> = (0..4).filter(|j| mask >> j & 1 == 1).collect();
        let ours = projection_r2(&cd, &t, &IndexSet::new(support.clone()).unwrap()).unwrap();
        let oracle = oracle_r2(&cd, &t, &support);
        assert!((ours - oracle).abs() <= 1e-10, "{support:?}: {ours} vs {oracle}");
        let comp = project_loadings(&cd, &t, &IndexSet::new(support).unwrap()).unwrap();
        let fitted = cd
            .matrix()
            .select_columns(comp.support.indices())
            .unwrap()
            .matvec(&comp.raw_coefficients);
        let direct = dot(&fitted, &fitted) / dot(&t, &t);
        assert!((direct - comp.projection_r2).abs() <= 1e-10);
    }
}

#[test]
fn adjusted_vexp_matches_residual_oracle() {
    for seed in 0..10 {
        let mut r = rng(400 + seed);
        let cd = centered(&mut r, 20, 6);
        // correlated scores: random combinations of the columns
        let scores: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let w: Vec<f64> = (0..6).map(|_| normal(&mut r)).collect();
                cd.matrix().matvec(&w)
            })
            .collect();
        let ours = adjusted_vexp(&cd, &DenseMatrix::from_columns(&scores).unwrap());

        let x = to_na(cd.matrix());
        let total = x.norm_squared();
        for i in 0..3 {
            let cols: Vec<f64> = scores[..=i].iter().flatten().copied().collect();
            let s = nalgebra::DMatrix::from_column_slice(20, i + 1, &cols);
            let q = s.qr().q();
            let resid = &x - &q * (q.transpose() * &x);
            let oracle = 1.0 - resid.norm_squared() / total;
            assert!((ours[i] - oracle).abs() <= 1e-9, "seed {seed} i {i}");
        }
    }
}

#[test]
fn adjusted_vexp_of_pc_scores_is_eigenvalue_share() {
    let mut r = rng(500);
    let cd = centered(&mut r, 25, 7);
    let model = fit_pca(&cd, Some(4), &cfg()).unwrap();
    let ours = adjusted_vexp(&cd, model.scores());
    let mut acc = 0.0;
    for (i, ratio) in model.explained_variance_ratio().iter().enumerate() {
        acc += ratio;
        assert!((ours[i] - acc).abs() <= 1e-8);
    }
}

#[test]
fn full_selector_reproduces_principal_components() {
    for mode in [DeflationMode::Projection, DeflationMode::None] {
        let mut r = rng(600);
        let cd = centered(&mut r, 30, 6);
        let options = SpcaOptions {
            deflation: mode,
            ..SpcaOptions::default()
        };
        let fit = fit_spca(&cd, 3, &SelectionPolicy::new(SelectionMethod::Full, 0.5), &options).unwrap();
        let model = fit_pca(&cd, Some(3), &cfg()).unwrap();
        for (i, c) in fit.components.iter().enumerate() {
            assert!((c.projection_r2 - 1.0).abs() <= 1e-10);
            // after sparse deflation the data lose a rank, so later loadings
            // are only determined up to the removed direction
            if i == 0 || mode == DeflationMode::None {
                let cos = abs_cosine(&c.loadings, model.loading(i));
                assert!(cos >= 1.0 - 1e-7, "{mode} component {i}: {cos}");
            } else {
                assert_eq!(c.cardinality, 6 - i);
                let cos = abs_cosine(&c.score, model.score(i));
                assert!(cos >= 1.0 - 1e-7, "{mode} score {i}: {cos}");
            }
        }
    }
}

#[test]
fn sparse_components_are_best_rank_one_fits_on_their_support() {
    // For a fixed support, no other loading vector on it gives a score
    // closer to t than the least-squares one.
    let mut r = rng(700);
    let cd = centered(&mut r, 15, 5);
    let t = fit_pca(&cd, Some(1), &cfg()).unwrap().score(0).to_vec();
    let support = IndexSet::new(vec![0, 2, 3]).unwrap();
    let comp = project_loadings(&cd, &t, &support).unwrap();
    let xj = cd.matrix().select_columns(support.indices()).unwrap();
    let best = xj.matvec(&comp.raw_coefficients);
    let err = |fit: &[f64]| fit.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    for _ in 0..200 {
        let mut a = comp.raw_coefficients.clone();
        a.iter_mut().for_each(|v| *v += 0.05 * normal(&mut r));
        assert!(err(&xj.matvec(&a)) >= err(&best) - 1e-12);
    }
}

#[test]
fn leading_eigenpair_of_population_covariance_is_the_spike() {
    let truth = SpikedTruth::planted(30, vec![6.0, 2.0], 3, WeightProfile::Decreasing, 0.5, 4).unwrap();
    let pair = leading_eigenpair(&truth.population_covariance(), &cfg()).unwrap();
    assert!((pair.value - (6.0 + 0.25)).abs() < 1e-9);
    assert!(abs_cosine(&pair.vector, &truth.loadings[0]) > 1.0 - 1e-12);
}

#[test]
fn noiseless_rank_one_recovers_the_loading() {
    let truth = SpikedTruth::planted(20, vec![5.0], 4, WeightProfile::Decreasing, 0.0, 9).unwrap();
    let (x, truth) = simulate_spiked(60, 20, &truth).unwrap();
    let cd = center(&x, false).unwrap();
    let model = fit_pca(&cd, Some(1), &cfg()).unwrap();
    assert!(abs_cosine(model.loading(0), &truth.loadings[0]) >= 1.0 - 1e-6);
    assert!(fit_pca(&cd, None, &cfg()).unwrap().k() == 1);
}

#[test]
fn sample_covariance_concentrates() {
    let truth = SpikedTruth::planted(20, vec![4.0, 2.0], 3, WeightProfile::Equal, 1.0, 11).unwrap();
    let (x, truth) = simulate_spiked(10_000, 20, &truth).unwrap();
    let s = covariance(&center(&x, false).unwrap());
    let pop = truth.population_covariance();
    let worst = s
        .as_slice()
        .iter()
        .zip(pop.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let bound = 5.0 * ((20f64).ln() / 10_000.0).sqrt() * (4.0 + 1.0);
    assert!(worst <= bound, "{worst} > {bound}");
}

#[test]
fn pc1_top_loadings_find_the_first_support() {
    let mut hits = 0;
    for seed in 0..100 {
        let truth = SpikedTruth::planted(50, vec![10.0, 5.0], 4, WeightProfile::Equal, 0.1, seed).unwrap();
        let (x, truth) = simulate_spiked(500, 50, &truth).unwrap();
        let model = fit_pca(&center(&x, false).unwrap(), Some(1), &cfg()).unwrap();
        let v = model.loading(0);
        let mut order: Vec<usize> = (0..50).collect();
        order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
        if IndexSet::new(order[..4].to_vec()).unwrap() == truth.supports[0] {
            hits += 1;
        }
    }
    assert!(hits >= 95, "{hits}/100");
}
