//! Spiked-covariance data with planted sparse loadings.
//!
//! Data are drawn as `X = Σᵢ √spikeᵢ · zᵢ wᵢᵀ + σ E` with independent
//! standard normal `zᵢ` (n-vectors) and `E` (n x p). The population
//! covariance is `Σᵢ spikeᵢ wᵢ wᵢᵀ + σ² I`.
//!
//! Randomness comes from ChaCha8 seeded with `seed`; normal variates use
//! the ziggurat sampler from `rand_distr`. Stream 0 draws the data (all `z`
//! vectors in spike order, then `E` column by column), stream 1 places
//! supports in [`SpikedTruth::planted`].

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, DenseMatrix};
use crate::spca::{IndexSet, SparseComponent};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightProfile {
    /// Equal magnitude on every support variable.
    #[default]
    Equal,
    /// Weights proportional to `s, s-1, ..., 1` in draw order.
    Decreasing,
}

impl std::str::FromStr for WeightProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(Self::Equal),
            "decreasing" => Ok(Self::Decreasing),
            other => Err(Error::InvalidArgument(format!("unknown weight profile {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikedTruth {
    pub p: usize,
    pub supports: Vec<IndexSet>,
    /// One unit-norm p-vector per spike, zero off its support.
    pub loadings: Vec<Vec<f64>>,
    /// Strictly decreasing, positive.
    pub spike_variances: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SpikedTruth {
    /// `weights[i]` gives the loadings on `supports[i]` (in index order) and is
    /// normalized to unit length.
    pub fn new(
        p: usize,
        supports: Vec<IndexSet>,
        weights: Vec<Vec<f64>>,
        spike_variances: Vec<f64>,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self> {
        if supports.is_empty() || supports.len() != weights.len() || supports.len() != spike_variances.len() {
            return Err(Error::InvalidArgument(
                "supports, weights, and spike variances must be nonempty and equally long".into(),
            ));
        }
        if spike_variances.iter().any(|s| !(*s > 0.0) || !s.is_finite())
            || spike_variances.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidArgument(
                "spike variances must be positive and strictly decreasing".into(),
            ));
        }
        if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sd must be nonnegative, got {noise_sd}")));
        }
        let mut owner = vec![None; p];
        let mut loadings = Vec::with_capacity(supports.len());
        for (i, (support, w)) in supports.iter().zip(&weights).enumerate() {
            if support.is_empty() {
                return Err(Error::BadSupport(format!("support {i} is empty")));
            }
            if w.len() != support.len() {
                return Err(Error::InvalidArgument(format!(
                    "support {i} has {} indices but {} weights",
                    support.len(),
                    w.len()
                )));
            }
            let mut v = vec![0.0; p];
            for (&j, wj) in support.indices().iter().zip(w) {
                match owner.get_mut(j) {
                    None => {
                        return Err(Error::BadSupport(format!("index {j} out of range for p = {p}")));
                    }
                    Some(Some(other)) => {
                        return Err(Error::BadSupport(format!(
                            "index {j} appears in supports {other} and {i}"
                        )));
                    }
                    Some(slot) => *slot = Some(i),
                }
                v[j] = *wj;
            }
            let nv = norm(&v);
            if !(nv > 0.0) || !nv.is_finite() {
                return Err(Error::InvalidArgument(format!("weights for support {i} are zero")));
            }
            v.iter_mut().for_each(|x| *x /= nv);
            loadings.push(v);
        }
        Ok(Self {
            p,
            supports,
            loadings,
            spike_variances,
            noise_sd,
            seed,
        })
    }

    /// Disjoint supports of `support_size` variables each, placed at random
    /// (from `seed`) among the `p` variables.
    pub fn planted(
        p: usize,
        spike_variances: Vec<f64>,
        support_size: usize,
        profile: WeightProfile,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self> {
        let m = spike_variances.len();
        if support_size == 0 || m * support_size > p {
            return Err(Error::BadSupport(format!(
                "{m} supports of size {support_size} do not fit in p = {p}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut order: Vec<usize> = (0..p).collect();
        order.shuffle(&mut rng);
        let mut supports = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for block in order.chunks_exact(support_size).take(m) {
            let support = IndexSet::new(block.to_vec())?;
            let w: Vec<f64> = support
                .indices()
                .iter()
                .map(|j| match profile {
                    WeightProfile::Equal => 1.0,
                    WeightProfile::Decreasing => {
                        let rank = block.iter().position(|b| b == j).expect("member");
                        (support_size - rank) as f64
                    }
                })
                .collect();
            supports.push(support);
            weights.push(w);
        }
        Self::new(p, supports, weights, spike_variances, noise_sd, seed)
    }

    pub fn m(&self) -> usize {
        self.loadings.len()
    }

    /// p x m matrix of true loadings.
    pub fn loadings_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_columns(&self.loadings).expect("validated at construction")
    }

    /// Index of the largest-magnitude loading of spike `i` (lowest on ties).
    pub fn top_variable(&self, i: usize) -> usize {
        let v = &self.loadings[i];
        let mut best = 0;
        for (j, x) in v.iter().enumerate() {
            if x.abs() > v[best].abs() {
                best = j;
            }
        }
        best
    }

    /// `Σᵢ spikeᵢ wᵢwᵢᵀ + σ² I`.
    pub fn population_covariance(&self) -> DenseMatrix {
        let p = self.p;
        let mut data = vec![0.0; p * p];
        for (w, s) in self.loadings.iter().zip(&self.spike_variances) {
            for a in 0..p {
                for b in 0..p {
                    data[a * p + b] += s * w[a] * w[b];
                }
            }
        }
        for i in 0..p {
            data[i * p + i] += self.noise_sd * self.noise_sd;
        }
        DenseMatrix::from_col_major(p, p, data).expect("finite")
    }
}

/// Draws an n x p data matrix from the spiked model described by `truth`.
pub fn simulate_spiked(n: usize, p: usize, truth: &SpikedTruth) -> Result<(DenseMatrix, SpikedTruth)> {
    if truth.p != p {
        return Err(Error::BadSupport(format!(
            "truth describes {} variables, requested {p}",
            truth.p
        )));
    }
    if let Some(bad) = truth
        .supports
        .iter()
        .flat_map(|s| s.indices())
        .find(|&&j| j >= p)
    {
        return Err(Error::BadSupport(format!("index {bad} out of range for p = {p}")));
    }
    if n == 0 || 2 * truth.m() > n {
        return Err(Error::InvalidArgument(format!(
            "{} spikes need at least {} observations, got {n}",
            truth.m(),
            2 * truth.m()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(truth.seed);
    let factors: Vec<Vec<f64>> = truth
        .spike_variances
        .iter()
        .map(|s| {
            let scale = s.sqrt();
            (0..n)
                .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .collect()
        })
        .collect();

    let mut data = vec![0.0; n * p];
    for (j, col) in data.chunks_exact_mut(n).enumerate() {
        for x in col.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *x = truth.noise_sd * e;
        }
        for (z, w) in factors.iter().zip(&truth.loadings) {
            if w[j] != 0.0 {
                col.iter_mut().zip(z).for_each(|(x, zi)| *x += w[j] * zi);
            }
        }
    }
    Ok((DenseMatrix::from_col_major(n, p, data)?, truth.clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub estimated: usize,
    pub truth: usize,
    pub precision: f64,
    pub recall: f64,
    /// `|cos|` between estimated and true loadings.
    pub cosine: f64,
    pub exact_support: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    pub pairs: Vec<MatchedPair>,
    /// Every true component was matched to an estimate with identical support.
    pub exact_recovery: bool,
}

/// Support recovery of estimated components against the planted truth.
pub fn recovery_metrics(estimated: &[SparseComponent], truth: &SpikedTruth) -> RecoveryMetrics {
    let parts: Vec<(&IndexSet, &[f64])> = estimated
        .iter()
        .map(|c| (&c.support, c.loadings.as_slice()))
        .collect();
    match_supports(&parts, truth)
}

/// Greedy matching by `|cos|` between loadings, ties going to the lower
/// estimated then the lower true index.
pub fn match_supports(estimated: &[(&IndexSet, &[f64])], truth: &SpikedTruth) -> RecoveryMetrics {
    let mut candidates = Vec::new();
    for (e, (_, loadings)) in estimated.iter().enumerate() {
        let en = norm(loadings);
        for (t, w) in truth.loadings.iter().enumerate() {
            let cosine = if en > 0.0 && loadings.len() == w.len() {
                (dot(loadings, w) / en).abs().min(1.0)
            } else {
                0.0
            };
            candidates.push((cosine, e, t));
        }
    }
    // stable sort: equal cosines keep (estimated, truth) order
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut used_e = vec![false; estimated.len()];
    let mut used_t = vec![false; truth.m()];
    let mut pairs = Vec::new();
    for (cosine, e, t) in candidates {
        if used_e[e] || used_t[t] {
            continue;
        }
        used_e[e] = true;
        used_t[t] = true;
        let (support, _) = estimated[e];
        let true_support = &truth.supports[t];
        let hits = support.intersection_len(true_support) as f64;
        pairs.push(MatchedPair {
            estimated: e,
            truth: t,
            precision: if support.is_empty() { 0.0 } else { hits / support.len() as f64 },
            recall: hits / true_support.len() as f64,
            cosine,
            exact_support: support == true_support,
        });
    }
    pairs.sort_by_key(|p| p.truth);
    let exact_recovery = pairs.len() == truth.m() && pairs.iter().all(|p| p.exact_support);
    RecoveryMetrics {
        pairs,
        exact_recovery,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    fn truth() -> SpikedTruth {
        SpikedTruth::new(
            6,
            vec![set(&[0, 1]), set(&[3, 4, 5])],
            vec![vec![1.0, 1.0], vec![3.0, 2.0, 1.0]],
            vec![4.0, 2.0],
            0.1,
            3,
        )
        .unwrap()
    }

    #[test]
    fn truth_validation() {
        let t = truth();
        assert!((norm(&t.loadings[1]) - 1.0).abs() < 1e-15);
        assert_eq!(t.top_variable(1), 3);
        let overlap = SpikedTruth::new(4, vec![set(&[0, 1]), set(&[1, 2])], vec![vec![1.0; 2]; 2], vec![2.0, 1.0], 0.0, 0);
        assert!(matches!(overlap, Err(Error::BadSupport(_))));
        let range = SpikedTruth::new(2, vec![set(&[2])], vec![vec![1.0]], vec![1.0], 0.0, 0);
        assert!(matches!(range, Err(Error::BadSupport(_))));
        let order = SpikedTruth::new(4, vec![set(&[0]), set(&[1])], vec![vec![1.0]; 2], vec![1.0, 2.0], 0.0, 0);
        assert!(order.is_err());
    }

    #[test]
    fn planted_supports_are_disjoint_and_seeded() {
        let a = SpikedTruth::planted(50, vec![10.0, 5.0], 4, WeightProfile::Decreasing, 0.1, 7).unwrap();
        let b = SpikedTruth::planted(50, vec![10.0, 5.0], 4, WeightProfile::Decreasing, 0.1, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.supports[0].intersection_len(&a.supports[1]), 0);
        assert!(SpikedTruth::planted(5, vec![1.0, 0.5], 3, WeightProfile::Equal, 0.0, 0).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        let t = truth();
        let (x1, _) = simulate_spiked(20, 6, &t).unwrap();
        let (x2, _) = simulate_spiked(20, 6, &t).unwrap();
        assert_eq!(x1.as_slice(), x2.as_slice());
        assert!(simulate_spiked(3, 6, &t).is_err());
        assert!(matches!(simulate_spiked(20, 5, &t), Err(Error::BadSupport(_))));
    }

    #[test]
    fn noiseless_single_spike_is_rank_one() {
        let t = SpikedTruth::new(4, vec![set(&[1, 2])], vec![vec![1.0, -2.0]], vec![3.0], 0.0, 11).unwrap();
        let (x, _) = simulate_spiked(10, 4, &t).unwrap();
        assert!(x.column(0).iter().all(|v| *v == 0.0));
        for i in 0..10 {
            assert!((x.get(i, 2) + 2.0 * x.get(i, 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn recovery_of_truth_itself() {
        let t = truth();
        let parts: Vec<(&IndexSet, &[f64])> = t.supports.iter().zip(&t.loadings).map(|(s, l)| (s, l.as_slice())).collect();
        let m = match_supports(&parts, &t);
        assert!(m.exact_recovery);
        for p in &m.pairs {
            assert_eq!((p.precision, p.recall), (1.0, 1.0));
            assert!((p.cosine - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn recovery_of_disjoint_support() {
        let t = truth();
        let s = set(&[2]);
        let mut l = vec![0.0; 6];
        l[2] = 1.0;
        let m = match_supports(&[(&s, &l)], &t);
        assert_eq!(m.pairs.len(), 1);
        assert_eq!((m.pairs[0].precision, m.pairs[0].recall), (0.0, 0.0));
        assert!(!m.exact_recovery);
    }

    #[test]
    fn recovery_with_perturbed_coefficients() {
        let t = truth();
        let s = set(&[3, 4, 5]);
        let l = vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5];
        let m = match_supports(&[(&s, &l)], &t);
        let pair = &m.pairs[0];
        assert_eq!(pair.truth, 1);
        assert_eq!((pair.precision, pair.recall), (1.0, 1.0));
        assert!(pair.cosine < 1.0);
        assert!(pair.exact_support);
    }
}
