//! Choosing the support of a sparse component.
//!
//! Every selector scores subsets by the same statistic, [`projection_r2`], so
//! the `alpha` check a selector makes is bitwise the value later stored on
//! the component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, CenteredData, Cholesky, DenseMatrix, OrthoBasis};
use crate::spca::{projection_r2, IndexSet};

/// Largest `p` [`exhaustive_best`] will enumerate.
pub const EXHAUSTIVE_MAX_P: usize = 25;

/// Smallest R² gain a forward step must make.
pub const MIN_GAIN: f64 = 1e-12;

/// Candidate scores within this distance of the best are ties.
pub const TIE_TOL: f64 = 1e-12;

/// A candidate whose residual against the selected columns is at most this
/// fraction of its own norm is collinear with them and skipped. Its square
/// matches the solver's relative pivot floor.
pub const COLLINEARITY_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    #[default]
    Forward,
    Backward,
    Threshold,
    Exhaustive,
    Full,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 5] = [
        Self::Forward,
        Self::Backward,
        Self::Threshold,
        Self::Exhaustive,
        Self::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Forward => "forward",
            Self::Backward => "backward",
            Self::Threshold => "threshold",
            Self::Exhaustive => "exhaustive",
            Self::Full => "full",
        }
    }
}

impl std::fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown selection method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub method: SelectionMethod,
    /// Target projection R².
    pub alpha: f64,
    pub max_cardinality: Option<usize>,
    pub min_cardinality: usize,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self {
            method: SelectionMethod::Forward,
            alpha: 0.95,
            max_cardinality: None,
            min_cardinality: 1,
        }
    }
}

impl SelectionPolicy {
    pub fn new(method: SelectionMethod, alpha: f64) -> Self {
        Self {
            method,
            alpha,
            ..Self::default()
        }
    }

    pub fn with_max_cardinality(mut self, max: usize) -> Self {
        self.max_cardinality = Some(max);
        self
    }

    pub fn with_min_cardinality(mut self, min: usize) -> Self {
        self.min_cardinality = min;
        self
    }

    /// `alpha = 0` is accepted and means "no variance target".
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.min_cardinality == 0 {
            return Err(Error::InvalidArgument("min_cardinality must be at least 1".into()));
        }
        if let Some(max) = self.max_cardinality {
            if max < self.min_cardinality {
                return Err(Error::InvalidArgument(format!(
                    "max_cardinality {max} is below min_cardinality {}",
                    self.min_cardinality
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepAction {
    Add,
    Remove,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub action: StepAction,
    pub variable: usize,
    pub r2_after: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    AlphaReached,
    CardinalityCap,
    RankExhausted,
    ExhaustedAll,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub steps: Vec<SelectionStep>,
    pub terminated_by: TerminatedBy,
}

impl SelectionTrace {
    /// R² of the final support, if any step was taken.
    pub fn final_r2(&self) -> Option<f64> {
        self.steps.last().map(|s| s.r2_after)
    }
}

fn check_target(cd: &CenteredData, t: &[f64]) -> Result<()> {
    if t.len() != cd.n() {
        return Err(Error::Shape(format!(
            "score has {} entries, data has {} rows",
            t.len(),
            cd.n()
        )));
    }
    if t.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroScore);
    }
    Ok(())
}

/// Greedy forward selection.
///
/// Keeps residuals of `t` and of every candidate column against the
/// orthonormal basis of the selected columns, so scoring a candidate is one
/// dot product: its R² gain is `(r_tᵀ r_j)² / (‖r_j‖² ‖t‖²)`. Each step adds
/// the best candidate (lowest index on ties) and stops once
/// `R² >= alpha` (and `|J| >= min_cardinality`), at the cardinality cap, or
/// when no candidate gains more than [`MIN_GAIN`].
pub fn forward_select(
    cd: &CenteredData,
    t: &[f64],
    policy: &SelectionPolicy,
) -> Result<(IndexSet, SelectionTrace)> {
    policy.validate()?;
    check_target(cd, t)?;
    let x = cd.matrix();
    let (n, p) = (x.rows(), x.cols());
    let t_norm2 = dot(t, t);
    let max_card = policy.max_cardinality.unwrap_or(p).min(p);

    let mut residual_t = t.to_vec();
    let mut residuals = x.as_slice().to_vec();
    let original: Vec<f64> = x.columns().map(|c| dot(c, c)).collect();
    let mut active: Vec<bool> = original.iter().map(|v| *v > 0.0).collect();
    let mut basis = OrthoBasis::new(n);

    let mut selected: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    let guard2 = COLLINEARITY_GUARD * COLLINEARITY_GUARD;

    let terminated_by = loop {
        let mut gains: Vec<(usize, f64)> = Vec::new();
        for j in 0..p {
            if !active[j] {
                continue;
            }
            let col = &residuals[j * n..(j + 1) * n];
            let rn2 = dot(col, col);
            if rn2 <= guard2 * original[j] {
                active[j] = false;
                continue;
            }
            gains.push((j, dot(col, &residual_t).powi(2) / (rn2 * t_norm2)));
        }
        let top = gains.iter().fold(f64::NEG_INFINITY, |m, (_, g)| m.max(*g));
        let best = gains.iter().find(|(_, g)| *g >= top - TIE_TOL).map(|&(j, g)| (g, j));
        let j = match best {
            Some((gain, j)) if gain > MIN_GAIN => j,
            _ => break TerminatedBy::RankExhausted,
        };

        active[j] = false;
        basis.push(&residuals[j * n..(j + 1) * n]);
        let q = basis.column(basis.rank() - 1).to_vec();
        let c = dot(&q, &residual_t);
        residual_t.iter_mut().zip(&q).for_each(|(r, qi)| *r -= c * qi);
        for l in (0..p).filter(|&l| active[l]) {
            let col = &mut residuals[l * n..(l + 1) * n];
            let c = dot(&q, col);
            col.iter_mut().zip(&q).for_each(|(r, qi)| *r -= c * qi);
        }

        selected.push(j);
        let support = IndexSet::new(selected.clone())?;
        let r2 = projection_r2(cd, t, &support)?;
        steps.push(SelectionStep {
            action: StepAction::Add,
            variable: j,
            r2_after: r2,
        });
        if r2 >= policy.alpha && selected.len() >= policy.min_cardinality {
            break TerminatedBy::AlphaReached;
        }
        if selected.len() == p {
            break TerminatedBy::ExhaustedAll;
        }
        if selected.len() >= max_card {
            break TerminatedBy::CardinalityCap;
        }
    };

    if selected.is_empty() {
        return Err(Error::ZeroProjection);
    }
    Ok((IndexSet::new(selected)?, SelectionTrace { steps, terminated_by }))
}

/// R² after dropping each member of `support`, in support order. Uses the
/// least-squares downdate `ΔRSS_j = a_j² / [(X_JᵀX_J)⁻¹]_jj` when `X_J` has
/// full rank, and recomputes every subset otherwise.
fn removal_r2(cd: &CenteredData, t: &[f64], support: &[usize], r2: f64) -> Result<Vec<f64>> {
    let x = cd.matrix();
    let k = support.len();
    let xj = x.select_columns(support)?;
    let mut normal = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let v = dot(xj.column(a), xj.column(b));
            normal[a * k + b] = v;
            normal[b * k + a] = v;
        }
    }
    if let Ok(chol) = Cholesky::factor(&DenseMatrix::from_parts(k, k, normal)) {
        let mut coef = xj.tr_matvec(t);
        chol.solve_vec(&mut coef);
        let t_norm2 = dot(t, t);
        return Ok((0..k)
            .map(|j| {
                let mut e = vec![0.0; k];
                e[j] = 1.0;
                chol.solve_vec(&mut e);
                r2 - coef[j] * coef[j] / (e[j] * t_norm2)
            })
            .collect());
    }
    (0..k)
        .map(|j| {
            let rest: Vec<usize> = support.iter().copied().filter(|&i| i != support[j]).collect();
            projection_r2(cd, t, &IndexSet::new(rest)?)
        })
        .collect()
}

/// Backward elimination from the full variable set.
///
/// Repeatedly drops the variable whose removal keeps R² largest (highest
/// index on ties) while the result stays at or above `alpha` and the support
/// is larger than `min_cardinality`. A `max_cardinality` forces removals to
/// continue past `alpha`.
pub fn backward_eliminate(
    cd: &CenteredData,
    t: &[f64],
    policy: &SelectionPolicy,
) -> Result<(IndexSet, SelectionTrace)> {
    policy.validate()?;
    check_target(cd, t)?;
    let p = cd.p();
    let mut support: Vec<usize> = (0..p).collect();
    let mut r2 = projection_r2(cd, t, &IndexSet::full(p))?;
    if r2 < policy.alpha {
        return Err(Error::AlphaInfeasible {
            r2,
            alpha: policy.alpha,
        });
    }
    let max_card = policy.max_cardinality.unwrap_or(p);
    let mut steps = Vec::new();

    let terminated_by = loop {
        if support.len() <= policy.min_cardinality {
            break TerminatedBy::CardinalityCap;
        }
        let estimates = removal_r2(cd, t, &support, r2)?;
        let top = estimates.iter().fold(f64::NEG_INFINITY, |m, e| m.max(*e));
        let pick = estimates
            .iter()
            .rposition(|e| *e >= top - TIE_TOL)
            .expect("nonempty support");
        let candidate: Vec<usize> = support
            .iter()
            .copied()
            .filter(|&i| i != support[pick])
            .collect();
        let candidate_r2 = projection_r2(cd, t, &IndexSet::new(candidate.clone())?)?;
        if candidate_r2 < policy.alpha && support.len() <= max_card {
            break if r2 >= policy.alpha {
                TerminatedBy::AlphaReached
            } else {
                TerminatedBy::CardinalityCap
            };
        }
        steps.push(SelectionStep {
            action: StepAction::Remove,
            variable: support[pick],
            r2_after: candidate_r2,
        });
        support = candidate;
        r2 = candidate_r2;
    };
    Ok((IndexSet::new(support)?, SelectionTrace { steps, terminated_by }))
}

/// Indices of the `k` largest-magnitude loadings (lowest index on ties).
pub fn threshold_select(v: &[f64], k: usize) -> Result<IndexSet> {
    if k == 0 || k > v.len() {
        return Err(Error::InvalidArgument(format!(
            "cardinality {k} outside 1..={}",
            v.len()
        )));
    }
    IndexSet::new(magnitude_order(v).into_iter().take(k).collect())
}

fn magnitude_order(v: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    // stable sort keeps lower indices first among equal magnitudes
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    order
}

/// Best subset of size `card` by R², over all `C(p, card)` subsets. Ties go
/// to the lexicographically first subset.
pub fn exhaustive_best(cd: &CenteredData, t: &[f64], card: usize) -> Result<(IndexSet, f64)> {
    let p = cd.p();
    if p > EXHAUSTIVE_MAX_P {
        return Err(Error::TooLarge(p));
    }
    if card == 0 || card > p {
        return Err(Error::InvalidArgument(format!("cardinality {card} outside 1..={p}")));
    }
    check_target(cd, t)?;

    struct Search<'a> {
        x: &'a DenseMatrix,
        t: &'a [f64],
        t_norm2: f64,
        card: usize,
        best: Option<(f64, Vec<usize>)>,
    }

    impl Search<'_> {
        // Depth-first in lexicographic order. Columns enter each basis in
        // ascending index order, the same order `projection_r2` uses.
        fn visit(&mut self, start: usize, chosen: &mut Vec<usize>, basis: &OrthoBasis) {
            if chosen.len() == self.card {
                let r2 = basis.projected_sq_norm(self.t) / self.t_norm2;
                if self.best.as_ref().is_none_or(|(b, _)| r2 > *b) {
                    self.best = Some((r2, chosen.clone()));
                }
                return;
            }
            let remaining = self.card - chosen.len();
            for j in start..=(self.x.cols() - remaining) {
                let mut next = basis.clone();
                next.push(self.x.column(j));
                chosen.push(j);
                self.visit(j + 1, chosen, &next);
                chosen.pop();
            }
        }
    }

    let mut search = Search {
        x: cd.matrix(),
        t,
        t_norm2: dot(t, t),
        card,
        best: None,
    };
    search.visit(0, &mut Vec::with_capacity(card), &OrthoBasis::new(cd.n()));
    let (r2, indices) = search.best.expect("at least one subset");
    Ok((IndexSet::new(indices)?, r2))
}

/// Norm of what is left of `v` after projecting out the span of `basis`.
fn residual_norm(basis: &OrthoBasis, v: &[f64]) -> f64 {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for q in basis.columns() {
            let c = dot(q, &w);
            w.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
        }
    }
    norm(&w)
}

fn additive_trace(order: &[usize], r2: &[f64], terminated_by: TerminatedBy) -> SelectionTrace {
    SelectionTrace {
        steps: order
            .iter()
            .zip(r2)
            .map(|(&variable, &r2_after)| SelectionStep {
                action: StepAction::Add,
                variable,
                r2_after,
            })
            .collect(),
        terminated_by,
    }
}

/// Runs the selector named by `policy.method`. `loading` is the parent PC's
/// loading vector, used by the thresholding baseline.
///
/// Without a `max_cardinality`, threshold and exhaustive selection grow the
/// cardinality until the variance target is met.
pub fn select(
    cd: &CenteredData,
    t: &[f64],
    loading: &[f64],
    policy: &SelectionPolicy,
) -> Result<(IndexSet, SelectionTrace)> {
    policy.validate()?;
    check_target(cd, t)?;
    let p = cd.p();
    let verdict = |r2: f64, len: usize| {
        if r2 >= policy.alpha {
            TerminatedBy::AlphaReached
        } else if len == p {
            TerminatedBy::ExhaustedAll
        } else {
            TerminatedBy::CardinalityCap
        }
    };
    match policy.method {
        SelectionMethod::Forward => forward_select(cd, t, policy),
        SelectionMethod::Backward => backward_eliminate(cd, t, policy),
        SelectionMethod::Full => {
            // Every variable, except that columns collinear with lower-indexed
            // ones are left out so the support has full column rank.
            let x = cd.matrix();
            let mut basis = OrthoBasis::new(cd.n());
            let mut kept = Vec::with_capacity(p);
            for j in 0..p {
                let col = x.column(j);
                if residual_norm(&basis, col) > COLLINEARITY_GUARD * norm(col) {
                    basis.push(col);
                    kept.push(j);
                }
            }
            if kept.is_empty() {
                return Err(Error::ZeroProjection);
            }
            let support = IndexSet::new(kept)?;
            let r2 = projection_r2(cd, t, &support)?;
            let trace = additive_trace(support.indices(), &vec![r2; support.len()], TerminatedBy::ExhaustedAll);
            Ok((support, trace))
        }
        SelectionMethod::Threshold => {
            if loading.len() != p {
                return Err(Error::Shape("loading length differs from p".into()));
            }
            // Walk the magnitude order, passing over variables that are
            // collinear with those already taken so the support stays full
            // rank (after sparse deflation, earlier supports lose a rank).
            let x = cd.matrix();
            let lo = policy.min_cardinality.min(p);
            let hi = policy.max_cardinality.unwrap_or(p).min(p);
            let fixed = policy.max_cardinality.is_some();
            let mut basis = OrthoBasis::new(cd.n());
            let mut taken = Vec::new();
            let mut r2s = Vec::new();
            for j in magnitude_order(loading) {
                let col = x.column(j);
                if residual_norm(&basis, col) <= COLLINEARITY_GUARD * norm(col) {
                    continue;
                }
                basis.push(col);
                taken.push(j);
                let support = IndexSet::new(taken.clone())?;
                let r2 = projection_r2(cd, t, &support)?;
                r2s.push(r2);
                let c = taken.len();
                if c == hi || (!fixed && c >= lo && r2 >= policy.alpha) {
                    let trace = additive_trace(&taken, &r2s, verdict(r2, c));
                    return Ok((support, trace));
                }
            }
            let Some(&r2) = r2s.last() else {
                return Err(Error::ZeroProjection);
            };
            let terminated_by = if r2 >= policy.alpha {
                TerminatedBy::AlphaReached
            } else {
                TerminatedBy::RankExhausted
            };
            let trace = additive_trace(&taken, &r2s, terminated_by);
            Ok((IndexSet::new(taken)?, trace))
        }
        SelectionMethod::Exhaustive => {
            if p > EXHAUSTIVE_MAX_P {
                return Err(Error::TooLarge(p));
            }
            let hi = policy.max_cardinality.unwrap_or(p).min(p);
            let lo = if policy.max_cardinality.is_some() {
                hi
            } else {
                policy.min_cardinality.min(p)
            };
            let mut found = None;
            for c in lo..=hi {
                let (support, r2) = exhaustive_best(cd, t, c)?;
                let done = r2 >= policy.alpha || c == hi;
                found = Some((support, r2));
                if done {
                    break;
                }
            }
            let (support, r2) = found.expect("nonempty cardinality range");
            let trace = additive_trace(
                support.indices(),
                &vec![r2; support.len()],
                verdict(r2, support.len()),
            );
            Ok((support, trace))
        }
    }
}
