//! JSON interchange format for code sets, plus a CSV export of the complex
//! entries.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use zccs_core::seqgen::{CodeMatrix, CodeSet, PhaseSequence, Provenance, SeqError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {found}, expected {FORMAT_VERSION}")]
    Version { found: u32 },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("code {code}, row {row}, column {col}: exponent {value} is not below sigma = {sigma}")]
    Exponent {
        code: usize,
        row: usize,
        col: usize,
        value: u32,
        sigma: u32,
    },
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Construction {
    pub m: usize,
    pub n: usize,
    pub primes: Vec<u32>,
    pub widths: Vec<u32>,
    pub g: String,
    pub h_table: Vec<u32>,
    pub delete: Vec<usize>,
    pub gamma: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claimed {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Z")]
    pub z: usize,
}

/// Field order here is the on-disk order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSetDocument {
    pub format_version: u32,
    pub sigma: u32,
    pub q: u32,
    pub construction: Option<Construction>,
    pub claimed: Claimed,
    pub codes: Vec<Vec<Vec<u32>>>,
}

impl CodeSetDocument {
    pub fn from_set(set: &CodeSet) -> Self {
        let p = set.params();
        let prov = set.provenance();
        Self {
            format_version: FORMAT_VERSION,
            sigma: p.sigma,
            // hand-built sets carry no modulus; sigma is the only honest choice
            q: prov.map_or(p.sigma, |pr| pr.q),
            construction: prov.map(|pr| Construction {
                m: pr.m,
                n: pr.n,
                primes: pr.primes.clone(),
                widths: pr.widths.clone(),
                g: pr.g.clone(),
                h_table: pr.h_table.clone(),
                delete: pr.delete.clone(),
                gamma: pr.gamma,
            }),
            claimed: Claimed {
                m: p.num_codes,
                k: p.rows,
                n: p.len,
                z: p.zcz_claimed,
            },
            codes: set
                .codes()
                .iter()
                .map(|c| c.rows().iter().map(|r| r.exponents().to_vec()).collect())
                .collect(),
        }
    }

    pub fn to_set(&self) -> Result<CodeSet, DocError> {
        if self.format_version != FORMAT_VERSION {
            return Err(DocError::Version {
                found: self.format_version,
            });
        }
        let Claimed { m, k, n, z } = self.claimed;
        if self.sigma == 0 {
            return Err(DocError::Shape("sigma must be positive".into()));
        }
        if m == 0 || k == 0 || n == 0 {
            return Err(DocError::Shape("M, K and N must be positive".into()));
        }
        if z > n {
            return Err(DocError::Shape(format!("Z = {z} exceeds N = {n}")));
        }
        if self.codes.len() != m {
            return Err(DocError::Shape(format!(
                "claimed M = {m} codes, found {}",
                self.codes.len()
            )));
        }
        let mut codes = Vec::with_capacity(m);
        for (ci, code) in self.codes.iter().enumerate() {
            if code.len() != k {
                return Err(DocError::Shape(format!(
                    "code {ci} has {} rows, claimed K = {k}",
                    code.len()
                )));
            }
            let mut rows = Vec::with_capacity(k);
            for (ri, row) in code.iter().enumerate() {
                if row.len() != n {
                    return Err(DocError::Shape(format!(
                        "code {ci}, row {ri} has length {}, claimed N = {n}",
                        row.len()
                    )));
                }
                if let Some(col) = row.iter().position(|&e| e >= self.sigma) {
                    return Err(DocError::Exponent {
                        code: ci,
                        row: ri,
                        col,
                        value: row[col],
                        sigma: self.sigma,
                    });
                }
                rows.push(PhaseSequence::new(self.sigma, row.clone())?);
            }
            codes.push(CodeMatrix::new(rows, None)?);
        }
        let provenance = self.construction.as_ref().map(|c| Provenance {
            q: self.q,
            m: c.m,
            n: c.n,
            primes: c.primes.clone(),
            widths: c.widths.clone(),
            g: c.g.clone(),
            h_table: c.h_table.clone(),
            delete: c.delete.clone(),
            gamma: c.gamma,
        });
        Ok(CodeSet::new(codes, z, provenance)?)
    }

    /// Compact JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DocError + '_ {
    move |source| DocError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_codeset(set: &CodeSet, path: &Path) -> Result<(), DocError> {
    fs::write(path, CodeSetDocument::from_set(set).to_json()).map_err(io_err(path))
}

pub fn read_codeset(path: &Path) -> Result<CodeSet, DocError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    CodeSetDocument::from_json(&text)?.to_set()
}

/// Rounds to 15 significant digits and prints the shortest decimal that
/// reads back to the rounded value. Values within `1e-12` of zero print as
/// `0.0`.
pub fn format_component(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0.0".into();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("valid float text");
    format!("{rounded:?}")
}

/// One record per sequence: `code,row,re_0,im_0,...,re_{N-1},im_{N-1}`.
pub fn export_csv<W: Write>(set: &CodeSet, out: W) -> Result<(), DocError> {
    let mut w = csv::Writer::from_writer(out);
    let len = set.params().len;
    let mut header = vec!["code".to_string(), "row".to_string()];
    for i in 0..len {
        header.push(format!("re{i}"));
        header.push(format!("im{i}"));
    }
    w.write_record(&header)?;
    for (ci, code) in set.codes().iter().enumerate() {
        for (ri, row) in code.rows().iter().enumerate() {
            let mut rec = vec![ci.to_string(), ri.to_string()];
            for z in row.to_complex() {
                rec.push(format_component(z.re));
                rec.push(format_component(z.im));
            }
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| DocError::Io {
        path: "<csv>".into(),
        source: e,
    })?;
    Ok(())
}
