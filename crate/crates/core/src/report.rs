//! JSON reports.
//!
//! Layout is described by `schema/report.schema.json` (shipped with the
//! crate, version [`SCHEMA_VERSION`]). Keys appear in a fixed order, floats
//! are written with 17 significant digits, and nothing time- or
//! host-dependent is recorded, so identical runs produce identical bytes.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::datagen::MatchedPair;
use crate::error::{Error, Result};
use crate::io::format_number;
use crate::pca::PcaModel;
use crate::selection::SelectionTrace;
use crate::spca::{DeflationMode, SpcaFit};

pub const SCHEMA_VERSION: u32 = 1;

/// The published schema.
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub command: String,
    /// Effective settings of the run; keys are sorted.
    pub config: serde_json::Value,
}

impl Metadata {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaComponentRecord {
    pub index: usize,
    pub eigenvalue: f64,
    pub explained_variance_ratio: f64,
    pub cumulative_explained_variance: f64,
    pub loadings: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaReport {
    pub metadata: Metadata,
    pub n: usize,
    pub p: usize,
    pub scaled: bool,
    pub total_variance: f64,
    pub variables: Vec<String>,
    pub components: Vec<PcaComponentRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpcaComponentRecord {
    pub index: usize,
    pub parent_index: usize,
    pub parent_variance: f64,
    pub cardinality: usize,
    pub support: Vec<usize>,
    /// Nonzero loadings only.
    pub loadings: Vec<Loading>,
    pub projection_r2: f64,
    pub component_variance: f64,
    pub adjusted_cumulative_vexp: f64,
    pub trace: SelectionTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpcaReport {
    pub metadata: Metadata,
    pub n: usize,
    pub p: usize,
    pub total_variance: f64,
    pub deflation_mode: DeflationMode,
    pub variables: Vec<String>,
    pub components: Vec<SpcaComponentRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub n: usize,
    pub p: usize,
    pub has_truth: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: String,
    pub component: usize,
    pub cardinality: Option<usize>,
    pub projection_r2: Option<f64>,
    pub adjusted_cumulative_vexp: Option<f64>,
    pub support: Vec<usize>,
    pub recovery: Option<MatchedPair>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub metadata: Metadata,
    pub dataset: DatasetInfo,
    pub alpha: f64,
    pub k: usize,
    /// Per-component cardinality forward selection needed; other methods are
    /// run at these cardinalities.
    pub matched_cardinalities: Vec<Option<usize>>,
    pub rows: Vec<BenchRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Report {
    Pca(PcaReport),
    Spca(SpcaReport),
    Bench(BenchReport),
}

impl Report {
    pub fn from_pca(model: &PcaModel, variables: Vec<String>, metadata: Metadata) -> Report {
        let ratios = model.explained_variance_ratio();
        let mut cumulative = 0.0;
        let components = ratios
            .iter()
            .enumerate()
            .map(|(i, r)| {
                cumulative += r;
                PcaComponentRecord {
                    index: i,
                    eigenvalue: model.eigenvalues()[i],
                    explained_variance_ratio: *r,
                    cumulative_explained_variance: cumulative,
                    loadings: model.loading(i).to_vec(),
                }
            })
            .collect();
        Report::Pca(PcaReport {
            metadata,
            n: model.n(),
            p: model.p(),
            scaled: model.preprocessing().scaled,
            total_variance: model.total_variance(),
            variables,
            components,
        })
    }

    pub fn from_spca(fit: &SpcaFit, variables: Vec<String>, metadata: Metadata) -> Report {
        let components = fit
            .components
            .iter()
            .zip(&fit.traces)
            .enumerate()
            .map(|(i, (c, trace))| SpcaComponentRecord {
                index: i,
                parent_index: c.parent_index,
                parent_variance: c.parent_variance,
                cardinality: c.cardinality,
                support: c.support.indices().to_vec(),
                loadings: c
                    .support
                    .indices()
                    .iter()
                    .map(|&j| Loading {
                        index: j,
                        value: c.loadings[j],
                    })
                    .collect(),
                projection_r2: c.projection_r2,
                component_variance: c.component_variance,
                adjusted_cumulative_vexp: fit.adjusted_cumulative_vexp[i],
                trace: trace.clone(),
            })
            .collect();
        Report::Spca(SpcaReport {
            metadata,
            n: fit.n,
            p: fit.p,
            total_variance: fit.total_variance,
            deflation_mode: fit.deflation_mode,
            variables,
            components,
        })
    }

    pub fn to_writer<W: Write>(&self, mut w: W) -> Result<()> {
        let mut ser = serde_json::Serializer::with_formatter(&mut w, SignificantDigits::new());
        self.serialize(&mut ser)?;
        w.write_all(b"\n").map_err(|e| Error::io("<report>", e))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_writer(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }
}

pub fn write_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report.to_json()?).map_err(|e| Error::io(path, e))
}

/// Pretty printer that writes every float as `format_number` does.
struct SignificantDigits<'a>(PrettyFormatter<'a>);

impl SignificantDigits<'_> {
    fn new() -> Self {
        Self(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_number(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let v = serde_json::json!({"b": 0.1, "a": [1.0, -2.5e-7]});
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits::new());
        v.serialize(&mut ser).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn schema_is_valid_json() {
        let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(schema["properties"]["kind"]["enum"].as_array().unwrap().len(), 3);
    }
}
