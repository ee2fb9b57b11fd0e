//! JSON model documents.
//!
//! Floats are written with 17 significant digits, so parsing recovers every
//! value exactly and serialising again reproduces the same bytes.

use super::{DVineRegression, QuantRegModel};
use crate::bicop::{BiCop, Family, FitCriterion, Rotation};
use crate::error::{Error, Result};
use crate::margins::KernelMargin;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};
use std::io::{self, Write};
use std::path::Path;

pub const FORMAT_NAME: &str = "dvine-qr-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format: String,
    version: u32,
    response: String,
    covariates: Vec<String>,
    criterion: FitCriterion,
    margins: Vec<MarginDoc>,
    vine: VineDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginDoc {
    column: String,
    bandwidth: f64,
    n: usize,
    sha256: String,
    sample: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VineDoc {
    order: Vec<String>,
    pairs: Vec<Vec<PairDoc>>,
    cll_path: Vec<f64>,
    loglik_path: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    family: Family,
    rotation: Rotation,
    params: Vec<f64>,
}

/// Hex SHA-256 of the little-endian bytes of `sample`.
pub fn sample_digest(sample: &[f64]) -> String {
    let mut h = Sha256::new();
    for x in sample {
        h.update(x.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Pretty JSON with floats in `{:.16e}` form.
struct ExactFloats(PrettyFormatter<'static>);

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
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

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialises `value` as pretty JSON with exact floats.
pub(crate) fn to_exact_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(io::Error::other(e)))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn margin_doc(column: &str, m: &KernelMargin) -> MarginDoc {
    MarginDoc {
        column: column.to_owned(),
        bandwidth: m.bandwidth(),
        n: m.sample().len(),
        sha256: sample_digest(m.sample()),
        sample: m.sample().to_vec(),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Input(format!("invalid model document: {}", msg.into()))
}

fn margin_from_doc(doc: MarginDoc) -> Result<KernelMargin> {
    if doc.sample.len() != doc.n {
        return Err(invalid(format!(
            "margin '{}' declares n = {} but stores {} values",
            doc.column,
            doc.n,
            doc.sample.len()
        )));
    }
    if sample_digest(&doc.sample) != doc.sha256 {
        return Err(invalid(format!("sample digest mismatch for margin '{}'", doc.column)));
    }
    KernelMargin::with_bandwidth(doc.sample, doc.bandwidth)
        .map_err(|e| invalid(format!("margin '{}': {e}", doc.column)))
}

impl QuantRegModel {
    /// The model document as JSON text.
    pub fn to_json(&self) -> Result<String> {
        let mut margins = vec![margin_doc(self.response_name(), self.response_margin())];
        for (name, m) in self.covariate_names().iter().zip(self.covariate_margins()) {
            margins.push(margin_doc(name, m));
        }
        let vine = self.vine();
        let doc = ModelDoc {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            response: self.response_name().to_owned(),
            covariates: self.covariate_names().to_vec(),
            criterion: vine.criterion(),
            margins,
            vine: VineDoc {
                order: self.selected().into_iter().map(str::to_owned).collect(),
                pairs: vine
                    .pairs()
                    .iter()
                    .map(|tree| {
                        tree.iter()
                            .map(|c| PairDoc {
                                family: c.family(),
                                rotation: c.rotation(),
                                params: c.params().to_vec(),
                            })
                            .collect()
                    })
                    .collect(),
                cll_path: vine.cll_path().to_vec(),
                loglik_path: vine.loglik_path().to_vec(),
            },
        };
        to_exact_json(&doc)
    }

    /// Parses a model document. Syntax errors carry their line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.format != FORMAT_NAME {
            return Err(invalid(format!("format '{}' is not '{FORMAT_NAME}'", doc.format)));
        }
        if doc.version != FORMAT_VERSION {
            return Err(invalid(format!("unsupported version {}", doc.version)));
        }
        if doc.margins.len() != doc.covariates.len() + 1 {
            return Err(invalid(format!(
                "{} margins for {} columns",
                doc.margins.len(),
                doc.covariates.len() + 1
            )));
        }
        let expected = std::iter::once(&doc.response).chain(&doc.covariates);
        for (m, name) in doc.margins.iter().zip(expected) {
            if &m.column != name {
                return Err(invalid(format!("margin '{}' where '{name}' was expected", m.column)));
            }
        }
        let mut margins = doc.margins.into_iter().map(margin_from_doc);
        let response_margin = margins.next().expect("length checked")?;
        let covariate_margins = margins.collect::<Result<Vec<_>>>()?;

        let order = doc
            .vine
            .order
            .iter()
            .map(|name| {
                doc.covariates
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| invalid(format!("order names unknown covariate '{name}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut pairs = Vec::with_capacity(doc.vine.pairs.len());
        for (t, tree) in doc.vine.pairs.into_iter().enumerate() {
            let mut row = Vec::with_capacity(tree.len());
            for (e, p) in tree.into_iter().enumerate() {
                let c = BiCop::new(p.family, p.rotation, &p.params)
                    .map_err(|err| invalid(format!("tree {} edge {}: {err}", t + 1, e + 1)))?;
                row.push(c);
            }
            pairs.push(row);
        }
        let vine = DVineRegression::new(order, pairs, doc.criterion)
            .and_then(|v| v.with_paths(doc.vine.cll_path, doc.vine.loglik_path))
            .map_err(|e| invalid(e.to_string()))?;
        QuantRegModel::new(doc.response, doc.covariates, response_margin, covariate_margins, vine)
            .map_err(|e| invalid(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
