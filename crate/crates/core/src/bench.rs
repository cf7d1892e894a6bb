//! Side-by-side comparison of support selectors on the same parent PCs.
//!
//! The first `k` principal components of the data are the targets. Forward
//! selection to `alpha` fixes a reference cardinality per component; the
//! other methods are run at that cardinality (backward elimination uses it as
//! a cap). Each (method, component) pair becomes one row. A failing row
//! records its error and the run continues.

use std::path::Path;
use std::time::Instant;

use crate::datagen::{match_supports, SpikedTruth};
use crate::eigen::PowerConfig;
use crate::error::{Error, Result};
use crate::matrix::{CenteredData, DenseMatrix};
use crate::pca::fit_pca;
use crate::report::{BenchRecord, BenchReport, DatasetInfo, Metadata};
use crate::selection::{
    backward_eliminate, exhaustive_best, forward_select, threshold_select, SelectionMethod, SelectionPolicy,
};
use crate::spca::{adjusted_vexp, project_loadings, IndexSet, SparseComponent};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<SelectionMethod>,
    pub k: usize,
    pub alpha: f64,
    pub power: PowerConfig,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("method list is empty".into()));
        }
        if let Some(m) = self.methods.iter().find(|m| **m == SelectionMethod::Full) {
            return Err(Error::InvalidArgument(format!("method {m} cannot be benchmarked")));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        SelectionPolicy::new(SelectionMethod::Forward, self.alpha).validate()?;
        self.power.validate()
    }
}

/// A bench row plus its timing, which is kept out of the JSON report.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub record: BenchRecord,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOutcome {
    pub matched_cardinalities: Vec<Option<usize>>,
    pub rows: Vec<BenchRow>,
}

impl BenchOutcome {
    pub fn into_report(self, metadata: Metadata, dataset: DatasetInfo, config: &BenchConfig) -> BenchReport {
        BenchReport {
            metadata,
            dataset,
            alpha: config.alpha,
            k: config.k,
            matched_cardinalities: self.matched_cardinalities,
            rows: self.rows.into_iter().map(|r| r.record).collect(),
        }
    }
}

struct Reference {
    support: IndexSet,
    seconds: f64,
}

pub fn run_bench(cd: &CenteredData, truth: Option<&SpikedTruth>, config: &BenchConfig) -> Result<BenchOutcome> {
    config.validate()?;
    let k = config.k.min(cd.n() - 1).min(cd.p());
    let model = fit_pca(cd, Some(k), &config.power)?;
    let policy = SelectionPolicy::new(SelectionMethod::Forward, config.alpha);

    let references: Vec<Result<Reference>> = (0..model.k())
        .map(|i| {
            let start = Instant::now();
            let (support, _) = forward_select(cd, model.score(i), &policy)?;
            Ok(Reference {
                support,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect();
    let matched: Vec<Option<usize>> = references
        .iter()
        .map(|r| r.as_ref().ok().map(|r| r.support.len()))
        .collect();

    let mut rows = Vec::new();
    for &method in &config.methods {
        let mut fitted: Vec<(usize, SparseComponent)> = Vec::new();
        let mut method_rows = Vec::new();
        for i in 0..model.k() {
            let t = model.score(i);
            let start = Instant::now();
            let chosen: Result<(IndexSet, f64)> = match &references[i] {
                Err(e) => Err(Error::InvalidArgument(format!("no reference cardinality: {e}"))),
                Ok(reference) => {
                    let card = reference.support.len();
                    let picked = match method {
                        SelectionMethod::Forward => Ok(reference.support.clone()),
                        SelectionMethod::Backward => {
                            backward_eliminate(cd, t, &policy.with_max_cardinality(card)).map(|(j, _)| j)
                        }
                        SelectionMethod::Threshold => threshold_select(model.loading(i), card),
                        SelectionMethod::Exhaustive => exhaustive_best(cd, t, card).map(|(j, _)| j),
                        SelectionMethod::Full => unreachable!("rejected by validate"),
                    };
                    let extra = if method == SelectionMethod::Forward {
                        reference.seconds
                    } else {
                        0.0
                    };
                    picked.map(|j| (j, extra))
                }
            };
            let outcome = chosen.and_then(|(support, extra)| {
                project_loadings(cd, t, &support).map(|mut c| {
                    c.parent_index = i;
                    (c, extra)
                })
            });
            let elapsed = start.elapsed().as_secs_f64();
            let row = match outcome {
                Ok((component, extra)) => {
                    let record = BenchRecord {
                        method: method.to_string(),
                        component: i,
                        cardinality: Some(component.cardinality),
                        projection_r2: Some(component.projection_r2),
                        adjusted_cumulative_vexp: None,
                        support: component.support.indices().to_vec(),
                        recovery: None,
                        error: None,
                    };
                    fitted.push((method_rows.len(), component));
                    BenchRow {
                        record,
                        seconds: elapsed + extra,
                    }
                }
                Err(e) => BenchRow {
                    record: BenchRecord {
                        method: method.to_string(),
                        component: i,
                        cardinality: None,
                        projection_r2: None,
                        adjusted_cumulative_vexp: None,
                        support: Vec::new(),
                        recovery: None,
                        error: Some(e.root().to_string()),
                    },
                    seconds: elapsed,
                },
            };
            method_rows.push(row);
        }

        if !fitted.is_empty() {
            let scores: Vec<Vec<f64>> = fitted.iter().map(|(_, c)| c.score.clone()).collect();
            let cumulative = adjusted_vexp(cd, &DenseMatrix::from_columns(&scores)?);
            for ((row, _), v) in fitted.iter().zip(cumulative) {
                method_rows[*row].record.adjusted_cumulative_vexp = Some(v);
            }
            if let Some(truth) = truth {
                let parts: Vec<(&IndexSet, &[f64])> = fitted
                    .iter()
                    .map(|(_, c)| (&c.support, c.loadings.as_slice()))
                    .collect();
                for pair in match_supports(&parts, truth).pairs {
                    let row = fitted[pair.estimated].0;
                    method_rows[row].record.recovery = Some(pair);
                }
            }
        }
        rows.extend(method_rows);
    }
    Ok(BenchOutcome {
        matched_cardinalities: matched,
        rows,
    })
}

/// Flat per-row summary for spreadsheets, including wall-clock time.
pub fn write_bench_table(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let opt = |v: Option<f64>| v.map(crate::io::format_number).unwrap_or_default();
    let result = (|| -> std::result::Result<(), csv::Error> {
        w.write_record([
            "method",
            "component",
            "cardinality",
            "projection_r2",
            "adjusted_cumulative_vexp",
            "wall_clock_seconds",
            "precision",
            "recall",
            "cosine",
            "exact_support",
            "error",
        ])?;
        for row in rows {
            let r = &row.record;
            let rec = r.recovery.as_ref();
            w.write_record([
                r.method.clone(),
                r.component.to_string(),
                r.cardinality.map(|c| c.to_string()).unwrap_or_default(),
                opt(r.projection_r2),
                opt(r.adjusted_cumulative_vexp),
                format!("{:.6}", row.seconds),
                opt(rec.map(|m| m.precision)),
                opt(rec.map(|m| m.recall)),
                opt(rec.map(|m| m.cosine)),
                rec.map(|m| m.exact_support.to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidArgument(format!("{other:?}")),
    })
}
