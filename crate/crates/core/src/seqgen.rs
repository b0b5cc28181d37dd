//! Sequence generation: PBF → unit-modulus sequence, truncation to length
//! `2^m·Π p_i`, and assembly of complete complementary codes and ZCCSs.
//!
//! Bit order is least-significant-first everywhere: sequence index `r'`
//! evaluates the function at `(r'_0, r'_1, ...)`, the offset `r` spells
//! `(r_0, ..., r_{n-1})`, and row `Σ v_t 2^t + v_n 2^n` of a code belongs to
//! `v' = (v, v_n)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbf::Gbf;
use crate::pbf::{
    default_width, phase_exponent, prime_factors, ConstructionParams, HCondition, HFunction,
    ParamSpec, Pbf, PbfError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error(transparent)]
    Params(#[from] PbfError),
    #[error("exponent {exponent} at index {index} out of range for sigma = {sigma}")]
    ExponentOutOfRange {
        index: usize,
        exponent: u32,
        sigma: u32,
    },
    #[error("sigma must be >= 1")]
    ZeroSigma,
    #[error("empty sequence")]
    Empty,
    #[error("sequence length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("code {code} has inconsistent shape or sigma")]
    Shape { code: usize },
    #[error("a code set needs at least one code")]
    NoCodes,
    #[error("target length {length} is not an even multiple of 2^{m}")]
    BadTargetLength { length: u64, m: usize },
    #[error("no deletion vertex set of size {n} reduces g to a path")]
    NoDeletionSet { n: usize },
}

/// Sequence of `σ`-th roots of unity; entry `k` is `e^{2πj·exponents[k]/σ}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhaseSequence {
    sigma: u32,
    exponents: Vec<u32>,
}

impl PhaseSequence {
    pub fn new(sigma: u32, exponents: Vec<u32>) -> Result<Self, SeqError> {
        if sigma == 0 {
            return Err(SeqError::ZeroSigma);
        }
        if exponents.is_empty() {
            return Err(SeqError::Empty);
        }
        if let Some((index, &exponent)) = exponents.iter().enumerate().find(|(_, &e)| e >= sigma) {
            return Err(SeqError::ExponentOutOfRange {
                index,
                exponent,
                sigma,
            });
        }
        Ok(Self { sigma, exponents })
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Same roots re-expressed over a multiple of `σ`.
    pub fn lift(&self, sigma: u32) -> Option<Self> {
        if !sigma.is_multiple_of(self.sigma) {
            return None;
        }
        let k = sigma / self.sigma;
        Some(Self {
            sigma,
            exponents: self.exponents.iter().map(|&e| e * k).collect(),
        })
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        let s = f64::from(self.sigma);
        self.exponents
            .iter()
            .map(|&e| Complex64::from_polar(1.0, std::f64::consts::TAU * f64::from(e) / s))
            .collect()
    }

    pub(crate) fn exponents_mut(&mut self) -> &mut Vec<u32> {
        &mut self.exponents
    }
}

/// `Ψ(p)`: entry `r'` is the phase of `p` at the binary expansion of `r'`.
pub fn psi(p: &Pbf, q: u32, sigma: u32) -> Result<PhaseSequence, SeqError> {
    let len = 1u64 << p.num_vars();
    let exponents = (0..len)
        .map(|idx| phase_exponent(p.eval_index(idx), q, sigma))
        .collect::<Result<Vec<_>, _>>()?;
    PhaseSequence::new(sigma, exponents)
}

/// Keeps index `j + 2^m·(i_1 + 2^{s_1}(i_2 + ...))` iff every `i_k < p_k`,
/// in ascending order. The surviving entries form `Π p_k` blocks of `2^m`,
/// block `i_1 + p_1 i_2 + p_1 p_2 i_3 + ...`.
pub fn truncate(
    s: &PhaseSequence,
    m: usize,
    widths: &[u32],
    primes: &[u32],
) -> Result<PhaseSequence, SeqError> {
    assert_eq!(widths.len(), primes.len(), "one width per prime");
    let total = m + widths.iter().map(|&w| w as usize).sum::<usize>();
    let expected = 1usize << total;
    if s.len() != expected {
        return Err(SeqError::LengthMismatch {
            expected,
            got: s.len(),
        });
    }
    let keep = |idx: usize| {
        let mut rest = idx >> m;
        widths.iter().zip(primes).all(|(&w, &p)| {
            let digit = rest & ((1usize << w) - 1);
            rest >>= w;
            digit < p as usize
        })
    };
    let exponents = s
        .exponents
        .iter()
        .enumerate()
        .filter(|(idx, _)| keep(*idx))
        .map(|(_, &e)| e)
        .collect();
    PhaseSequence::new(s.sigma, exponents)
}

/// Entry-wise complex conjugate.
pub fn conjugate_seq(s: &PhaseSequence) -> PhaseSequence {
    PhaseSequence {
        sigma: s.sigma,
        exponents: s
            .exponents
            .iter()
            .map(|&e| (s.sigma - e) % s.sigma)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `Ψ_Trun(Ω_r^λ)`
    Omega,
    /// `Ψ*_Trun(Λ_r^λ)`
    LambdaConj,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeLabel {
    pub family: Family,
    pub r: usize,
    pub lambda: Vec<u32>,
}

/// `K × N` matrix of phase sequences sharing one `σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    rows: Vec<PhaseSequence>,
    label: Option<CodeLabel>,
}

impl CodeMatrix {
    pub fn new(rows: Vec<PhaseSequence>, label: Option<CodeLabel>) -> Result<Self, SeqError> {
        let first = rows.first().ok_or(SeqError::Empty)?;
        if rows
            .iter()
            .any(|r| r.len() != first.len() || r.sigma() != first.sigma())
        {
            return Err(SeqError::Shape { code: 0 });
        }
        Ok(Self { rows, label })
    }

    pub fn rows(&self) -> &[PhaseSequence] {
        &self.rows
    }

    pub fn label(&self) -> Option<&CodeLabel> {
        self.label.as_ref()
    }

    /// `K`
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `N`
    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sigma(&self) -> u32 {
        self.rows[0].sigma()
    }
}

/// Declared `(M, K, N, Z)` plus the shared `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetParams {
    pub num_codes: usize,
    pub rows: usize,
    pub len: usize,
    pub zcz_claimed: usize,
    pub sigma: u32,
}

/// How a code set was constructed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub primes: Vec<u32>,
    pub widths: Vec<u32>,
    pub g: String,
    pub h_table: Vec<u32>,
    pub delete: Vec<usize>,
    pub gamma: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSet {
    codes: Vec<CodeMatrix>,
    params: SetParams,
    provenance: Option<Provenance>,
    h_condition: Option<HCondition>,
}

impl CodeSet {
    pub fn new(
        codes: Vec<CodeMatrix>,
        zcz_claimed: usize,
        provenance: Option<Provenance>,
    ) -> Result<Self, SeqError> {
        let first = codes.first().ok_or(SeqError::NoCodes)?;
        let (rows, len, sigma) = (first.num_rows(), first.len(), first.sigma());
        if let Some(code) = codes
            .iter()
            .position(|c| c.num_rows() != rows || c.len() != len || c.sigma() != sigma)
        {
            return Err(SeqError::Shape { code });
        }
        Ok(Self {
            params: SetParams {
                num_codes: codes.len(),
                rows,
                len,
                zcz_claimed,
                sigma,
            },
            codes,
            provenance,
            h_condition: None,
        })
    }

    pub fn codes(&self) -> &[CodeMatrix] {
        &self.codes
    }

    pub fn params(&self) -> SetParams {
        self.params
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Result of the `h ∈ {c, c + q/2}` check for generated sets.
    pub fn h_condition(&self) -> Option<HCondition> {
        self.h_condition
    }

    /// Sets one entry. Used to build perturbed copies.
    pub fn set_exponent(
        &mut self,
        code: usize,
        row: usize,
        col: usize,
        exponent: u32,
    ) -> Result<(), SeqError> {
        let sigma = self.params.sigma;
        if exponent >= sigma {
            return Err(SeqError::ExponentOutOfRange {
                index: col,
                exponent,
                sigma,
            });
        }
        self.codes[code].rows[row].exponents_mut()[col] = exponent;
        Ok(())
    }
}

fn row_bits(row: usize, n: usize) -> (Vec<u8>, u8) {
    let v = (0..n).map(|t| ((row >> t) & 1) as u8).collect();
    (v, ((row >> n) & 1) as u8)
}

/// Mixed-radix enumeration of `λ` with `λ_1` varying fastest.
fn lambdas(primes: &[u32]) -> Vec<Vec<u32>> {
    let total: usize = primes.iter().map(|&p| p as usize).product();
    (0..total)
        .map(|mut idx| {
            primes
                .iter()
                .map(|&p| {
                    let digit = (idx % p as usize) as u32;
                    idx /= p as usize;
                    digit
                })
                .collect()
        })
        .collect()
}

fn build_code(params: &ConstructionParams, label: CodeLabel) -> Result<CodeMatrix, SeqError> {
    let (q, sigma) = (params.q(), params.sigma());
    let rows = (0..params.rows())
        .map(|row| {
            let (v, v_n) = row_bits(row, params.n());
            let member = match label.family {
                Family::Omega => params.build_omega_member(label.r, &label.lambda, &v, v_n)?,
                Family::LambdaConj => {
                    params.build_lambda_member(label.r, &label.lambda, &v, v_n)?
                }
            };
            let full = psi(&member, q, sigma)?;
            let kept = truncate(&full, params.m(), params.widths(), params.primes())?;
            Ok(match label.family {
                Family::Omega => kept,
                Family::LambdaConj => conjugate_seq(&kept),
            })
        })
        .collect::<Result<Vec<_>, SeqError>>()?;
    CodeMatrix::new(rows, Some(label))
}

/// Builds `{Ψ_Trun(Ω_r^λ)} ∪ {Ψ*_Trun(Λ_r^λ)}`: first every Ω code in
/// ascending `(r, λ)` order, then the Λ* codes in the same order. Violating
/// the `h` value condition is recorded on the set, not rejected.
pub fn generate_zccs(params: &ConstructionParams) -> Result<CodeSet, SeqError> {
    let lambdas = lambdas(params.primes());
    let labels: Vec<CodeLabel> = [Family::Omega, Family::LambdaConj]
        .into_iter()
        .flat_map(|family| {
            let lambdas = &lambdas;
            (0..1usize << params.n()).flat_map(move |r| {
                lambdas.iter().map(move |lambda| CodeLabel {
                    family,
                    r,
                    lambda: lambda.clone(),
                })
            })
        })
        .collect();
    let codes = labels
        .into_par_iter()
        .map(|label| build_code(params, label))
        .collect::<Result<Vec<_>, _>>()?;
    let provenance = Provenance {
        q: params.q(),
        m: params.m(),
        n: params.n(),
        primes: params.primes().to_vec(),
        widths: params.widths().to_vec(),
        g: params.g().to_string(),
        h_table: params.h().table().to_vec(),
        delete: params.delete().to_vec(),
        gamma: params.gamma(),
    };
    let mut set = CodeSet::new(codes, params.zcz(), Some(provenance))?;
    set.h_condition = Some(params.h_condition());
    Ok(set)
}

/// The `(2^{n+1}, 2^{n+1}, 2^m)` complete complementary code
/// `{Ψ(G_r), Ψ*(Ḡ_r)}` built from `g` alone.
pub fn generate_ccc(
    g: &Gbf,
    n: usize,
    delete: &[usize],
    gamma: usize,
) -> Result<CodeSet, SeqError> {
    let params = ConstructionParams::new(ParamSpec {
        g: g.clone(),
        n,
        delete: delete.to_vec(),
        gamma,
        primes: Vec::new(),
        widths: None,
        h: HFunction::zero(g.q(), n + 1)?,
        strict_widths: false,
        literal_bar: false,
    })?;
    generate_zccs(&params)
}

/// Prime factorization of a target length `n'·2^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub m: usize,
    pub multiplier: u64,
    pub primes: Vec<u32>,
    pub widths: Vec<u32>,
}

/// Splits `target_length = n'·2^m` and factors `n'` into ascending primes
/// with default widths `⌈log2 p⌉`.
pub fn plan_parameters(target_length: u64, m: usize) -> Result<Plan, SeqError> {
    let bad = SeqError::BadTargetLength {
        length: target_length,
        m,
    };
    if target_length < 2 || !target_length.is_multiple_of(2) || m == 0 || m >= 63 {
        return Err(bad);
    }
    let block = 1u64 << m;
    if !target_length.is_multiple_of(block) {
        return Err(bad);
    }
    let multiplier = target_length / block;
    let multiplier_u32 = u32::try_from(multiplier).map_err(|_| bad)?;
    let primes = prime_factors(multiplier_u32);
    let widths = primes.iter().map(|&p| default_width(p)).collect();
    Ok(Plan {
        m,
        multiplier,
        primes,
        widths,
    })
}
