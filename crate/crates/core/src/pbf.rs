//! Pseudo-Boolean functions and the construction parameters built on them.
//!
//! The g-part of every generated function is a [`Gbf`] over `y_0..y_{m-1}`.
//! Each prime factor `p_i` owns `s_i` further variables that spell an integer
//! `i_i` in binary; the prime tail `Σ (λ_i q / p_i)·i_i` turns into the phase
//! `ω_{p_i}^{λ_i i_i}`. Coefficients are exact rationals throughout.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbf::{Gbf, GbfError, PathFailure};

pub type Coeff = Ratio<i64>;

/// Largest supported `m + Σ s_i`; sequences of length `2^MAX_TOTAL_VARS`
/// are already far beyond anything verifiable exactly.
pub const MAX_TOTAL_VARS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PbfError {
    #[error(transparent)]
    Gbf(#[from] GbfError),
    #[error("{p} is not prime; factor it as {factors:?} and pass the prime factors")]
    NotPrime { p: u32, factors: Vec<u32> },
    #[error("{count} widths given for {primes} primes")]
    WidthCount { count: usize, primes: usize },
    #[error("width s = {s} cannot index p = {p} values (need p <= 2^s{strict})", strict = if *.strict { " - 1" } else { "" })]
    WidthTooSmall { p: u32, s: u32, strict: bool },
    #[error("deletion set has {got} vertices, expected n = {n}")]
    DeleteCount { n: usize, got: usize },
    #[error("deletion set {delete:?} with gamma {gamma} does not reduce g to a q/2-weighted path ({reason:?})")]
    PathReduction {
        delete: Vec<usize>,
        gamma: usize,
        reason: Option<PathFailure>,
    },
    #[error("h takes {got} inputs, expected n + 1 = {expected}")]
    HArity { expected: usize, got: usize },
    #[error("h table has {got} entries, expected {expected}")]
    HTableLength { expected: usize, got: usize },
    #[error("h is defined over Z_{got} but the construction uses Z_{expected}")]
    HModulus { expected: u32, got: u32 },
    #[error("h path permutation {0:?} is not a permutation of 0..=n")]
    HPermutation(Vec<usize>),
    #[error("lambda {lambda:?} out of range for primes {primes:?}")]
    LambdaOutOfRange { lambda: Vec<u32>, primes: Vec<u32> },
    #[error("{what} = {value} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("{0} total variables exceeds the supported maximum of {MAX_TOTAL_VARS}")]
    TooManyVariables(usize),
    #[error("phase value {value} times sigma/q is not an integer (sigma = {sigma}, q = {q})")]
    NonIntegralPhase { value: String, sigma: u32, q: u32 },
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Multilinear polynomial in Boolean variables with exact rational
/// coefficients. Monomials are sorted index sets; the empty set is the
/// constant term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pbf {
    vars: usize,
    terms: BTreeMap<Vec<usize>, Coeff>,
}

impl Pbf {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    /// Embeds a GBF's integer coefficients into `vars >= g.num_vars()`
    /// variables.
    pub fn from_gbf(g: &Gbf, vars: usize) -> Self {
        assert!(vars >= g.num_vars());
        let mut p = Self::zero(vars);
        p.add_const(Coeff::from_integer(i64::from(g.constant())));
        for (&i, &c) in g.lin_terms() {
            p.add_term(&[i], Coeff::from_integer(i64::from(c)));
        }
        for (&(i, j), &c) in g.quad_terms() {
            p.add_term(&[i, j], Coeff::from_integer(i64::from(c)));
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.vars
    }

    /// Adds `coeff·Π y_i`; repeated indices collapse since `y·y = y`.
    pub fn add_term(&mut self, monomial: &[usize], coeff: Coeff) {
        let mut key = monomial.to_vec();
        key.sort_unstable();
        key.dedup();
        assert!(
            key.last().is_none_or(|&i| i < self.vars),
            "monomial {key:?} outside {} variables",
            self.vars
        );
        let entry = self.terms.entry(key.clone()).or_insert_with(Coeff::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_const(&mut self, coeff: Coeff) {
        self.add_term(&[], coeff);
    }

    pub fn coeff(&self, monomial: &[usize]) -> Coeff {
        let mut key = monomial.to_vec();
        key.sort_unstable();
        self.terms.get(&key).copied().unwrap_or_else(Coeff::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Coeff)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[u8]) -> Result<Coeff, PbfError> {
        if point.len() != self.vars {
            return Err(PbfError::DimensionMismatch {
                expected: self.vars,
                got: point.len(),
            });
        }
        Ok(self.eval_with(|i| point[i] & 1 == 1))
    }

    /// Evaluates at the point whose bit `i` is bit `i` of `index`.
    pub fn eval_index(&self, index: u64) -> Coeff {
        self.eval_with(|i| (index >> i) & 1 == 1)
    }

    fn eval_with(&self, bit: impl Fn(usize) -> bool) -> Coeff {
        self.terms
            .iter()
            .filter(|(mono, _)| mono.iter().all(|&i| bit(i)))
            .map(|(_, c)| *c)
            .sum()
    }

    /// Reduces every coefficient into `[0, q)`. The phase `ω_q^{value}` at
    /// every point is unchanged.
    pub fn reduced_mod(&self, q: u32) -> Pbf {
        let q = Coeff::from_integer(i64::from(q));
        let mut out = Self::zero(self.vars);
        for (mono, &c) in &self.terms {
            let r = c - q * (c / q).floor();
            if !r.is_zero() {
                out.terms.insert(mono.clone(), r);
            }
        }
        out
    }
}

impl fmt::Display for Pbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest degree first, matching the usual way the functions are written
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));
        let rendered: Vec<String> = terms
            .into_iter()
            .map(|(mono, c)| {
                let vars: Vec<String> = mono.iter().map(|i| format!("y{i}")).collect();
                match (mono.is_empty(), c.is_one()) {
                    (true, _) => c.to_string(),
                    (false, true) => vars.join("*"),
                    (false, false) => format!("{c}*{}", vars.join("*")),
                }
            })
            .collect();
        f.write_str(&rendered.join("+"))
    }
}

/// Exponent `e` in `Z_σ` with `ζ_σ^e = ω_q^{value}`.
pub fn phase_exponent(value: Coeff, q: u32, sigma: u32) -> Result<u32, PbfError> {
    let scaled = value * Coeff::new(i64::from(sigma), i64::from(q));
    if !scaled.is_integer() {
        return Err(PbfError::NonIntegralPhase {
            value: value.to_string(),
            sigma,
            q,
        });
    }
    Ok(scaled.to_integer().rem_euclid(i64::from(sigma)) as u32)
}

/// Phase exponent of `p` at `point` (see [`phase_exponent`]).
pub fn eval_pbf_phase(p: &Pbf, point: &[u8], q: u32, sigma: u32) -> Result<u32, PbfError> {
    phase_exponent(p.eval(point)?, q, sigma)
}

/// `h: {0,1}^{n+1} -> Z_q`, stored as a table indexed by
/// `v' = Σ v_t 2^t` (v_0 least significant).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HFunction {
    q: u32,
    inputs: usize,
    table: Vec<u32>,
}

impl HFunction {
    pub fn from_table(q: u32, inputs: usize, table: Vec<u32>) -> Result<Self, PbfError> {
        if q < 2 || !q.is_multiple_of(2) {
            return Err(GbfError::InvalidModulus(q).into());
        }
        let expected = 1usize << inputs;
        if table.len() != expected {
            return Err(PbfError::HTableLength {
                expected,
                got: table.len(),
            });
        }
        Ok(Self {
            q,
            inputs,
            table: table.into_iter().map(|v| v % q).collect(),
        })
    }

    pub fn zero(q: u32, inputs: usize) -> Result<Self, PbfError> {
        Self::from_table(q, inputs, vec![0; 1 << inputs])
    }

    /// `h(v) = (q/2)·Σ_α v_{π(α)} v_{π(α+1)} + Σ_α u_α v_α + u`.
    pub fn from_path(q: u32, perm: &[usize], lin: &[u32], cst: u32) -> Result<Self, PbfError> {
        let inputs = perm.len();
        let mut seen = vec![false; inputs];
        for &k in perm {
            if k >= inputs || std::mem::replace(&mut seen[k], true) {
                return Err(PbfError::HPermutation(perm.to_vec()));
            }
        }
        if lin.len() != inputs {
            return Err(PbfError::HArity {
                expected: inputs,
                got: lin.len(),
            });
        }
        let mut g = Gbf::zero(q, inputs)?;
        for w in perm.windows(2) {
            g.add_quad(w[0], w[1], u64::from(q / 2))?;
        }
        for (k, &u) in lin.iter().enumerate() {
            g.add_lin(k, u64::from(u))?;
        }
        g.add_const(u64::from(cst));
        let table = (0..1u64 << inputs).map(|idx| g.eval_index(idx)).collect();
        Self::from_table(q, inputs, table)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn eval_index(&self, v_prime: usize) -> u32 {
        self.table[v_prime]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HCondition {
    pub ok: bool,
    /// Smallest `c` with every value of `h` in `{c, c + q/2}`.
    pub c: Option<u32>,
}

/// Checks whether every value of `h` lies in `{c, c + q/2 mod q}` for a
/// common `c`.
pub fn check_h_condition(h: &HFunction, q: u32) -> HCondition {
    let half = q / 2;
    let c = (0..q).find(|&c| {
        h.table()
            .iter()
            .all(|&v| v % q == c || v % q == (c + half) % q)
    });
    HCondition {
        ok: c.is_some(),
        c,
    }
}

/// Raw inputs to [`ConstructionParams::new`].
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub g: Gbf,
    pub n: usize,
    pub delete: Vec<usize>,
    pub gamma: usize,
    pub primes: Vec<u32>,
    /// Defaults to `⌈log2 p_i⌉` per prime.
    pub widths: Option<Vec<u32>>,
    pub h: HFunction,
    /// Enforce `p_i < 2^{s_i}` instead of `p_i <= 2^{s_i}`.
    pub strict_widths: bool,
    /// Leave the last entry of the complemented deletion vector
    /// uncomplemented, as the construction is literally printed.
    pub literal_bar: bool,
}

/// Validated parameters of the ZCCS construction.
#[derive(Debug, Clone)]
pub struct ConstructionParams {
    g: Gbf,
    g_rev: Gbf,
    n: usize,
    delete: Vec<usize>,
    gamma: usize,
    primes: Vec<u32>,
    widths: Vec<u32>,
    h: HFunction,
    literal_bar: bool,
    sigma: u32,
}

impl ConstructionParams {
    pub fn new(spec: ParamSpec) -> Result<Self, PbfError> {
        let ParamSpec {
            g,
            n,
            delete,
            gamma,
            primes,
            widths,
            h,
            strict_widths,
            literal_bar,
        } = spec;
        let q = g.q();
        for &p in &primes {
            if !is_prime(p) {
                return Err(PbfError::NotPrime {
                    p,
                    factors: prime_factors(p),
                });
            }
        }
        let widths = widths.unwrap_or_else(|| primes.iter().map(|&p| default_width(p)).collect());
        if widths.len() != primes.len() {
            return Err(PbfError::WidthCount {
                count: widths.len(),
                primes: primes.len(),
            });
        }
        for (&p, &s) in primes.iter().zip(&widths) {
            let cap = 1u64.checked_shl(s).unwrap_or(u64::MAX);
            let fits = if strict_widths {
                u64::from(p) < cap
            } else {
                u64::from(p) <= cap
            };
            if !fits || s > 31 {
                return Err(PbfError::WidthTooSmall {
                    p,
                    s,
                    strict: strict_widths,
                });
            }
        }
        let total = g.num_vars() + widths.iter().map(|&s| s as usize).sum::<usize>();
        if total > MAX_TOTAL_VARS {
            return Err(PbfError::TooManyVariables(total));
        }
        if delete.len() != n {
            return Err(PbfError::DeleteCount {
                n,
                got: delete.len(),
            });
        }
        let report = g.check_path_reduction(&delete, Some(gamma))?;
        if !report.ok {
            return Err(PbfError::PathReduction {
                delete,
                gamma,
                reason: report.failure_reason,
            });
        }
        if h.inputs() != n + 1 {
            return Err(PbfError::HArity {
                expected: n + 1,
                got: h.inputs(),
            });
        }
        if h.q() != q {
            return Err(PbfError::HModulus {
                expected: q,
                got: h.q(),
            });
        }
        let sigma = primes.iter().fold(q, |acc, &p| lcm(acc, p));
        Ok(Self {
            g_rev: g.reverse(),
            g,
            n,
            delete,
            gamma,
            primes,
            widths,
            h,
            literal_bar,
            sigma,
        })
    }

    pub fn q(&self) -> u32 {
        self.g.q()
    }

    pub fn g(&self) -> &Gbf {
        &self.g
    }

    /// `m`, the number of g-variables.
    pub fn m(&self) -> usize {
        self.g.num_vars()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delete(&self) -> &[usize] {
        &self.delete
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn widths(&self) -> &[u32] {
        &self.widths
    }

    pub fn h(&self) -> &HFunction {
        &self.h
    }

    pub fn literal_bar(&self) -> bool {
        self.literal_bar
    }

    /// `lcm(q, p_1, ..., p_l)`
    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    /// `m + Σ s_i`
    pub fn total_vars(&self) -> usize {
        self.m() + self.widths.iter().map(|&s| s as usize).sum::<usize>()
    }

    pub fn prime_product(&self) -> usize {
        self.primes.iter().map(|&p| p as usize).product()
    }

    /// Rows per code, `2^{n+1}`.
    pub fn rows(&self) -> usize {
        1 << (self.n + 1)
    }

    /// Code length `2^m·Π p_i`.
    pub fn code_len(&self) -> usize {
        (1 << self.m()) * self.prime_product()
    }

    /// Guaranteed zero-correlation zone width `2^m`.
    pub fn zcz(&self) -> usize {
        1 << self.m()
    }

    /// Number of codes, `2^{n+1}·Π p_i`.
    pub fn set_size(&self) -> usize {
        self.rows() * self.prime_product()
    }

    pub fn h_condition(&self) -> HCondition {
        check_h_condition(&self.h, self.q())
    }

    fn check_lambda(&self, lambda: &[u32]) -> Result<(), PbfError> {
        if lambda.len() != self.primes.len() || lambda.iter().zip(&self.primes).any(|(l, p)| l >= p) {
            return Err(PbfError::LambdaOutOfRange {
                lambda: lambda.to_vec(),
                primes: self.primes.clone(),
            });
        }
        Ok(())
    }

    fn add_prime_tail(&self, p: &mut Pbf, lambda: &[u32]) {
        let q = i64::from(self.q());
        let mut offset = self.m();
        for ((&l, &prime), &s) in lambda.iter().zip(&self.primes).zip(&self.widths) {
            let scale = Coeff::new(i64::from(l) * q, i64::from(prime));
            for k in 0..s as usize {
                p.add_term(&[offset + k], scale * Coeff::from_integer(1 << k));
            }
            offset += s as usize;
        }
    }

    /// `M^λ = g(y_0..y_{m-1}) + Σ_i (λ_i q / p_i)·Σ_k 2^k y_{m + s_1 + ... + s_{i-1} + k}`
    pub fn build_m_lambda(&self, lambda: &[u32]) -> Result<Pbf, PbfError> {
        self.check_lambda(lambda)?;
        let mut p = Pbf::from_gbf(&self.g, self.total_vars());
        self.add_prime_tail(&mut p, lambda);
        Ok(p)
    }

    /// `N^λ`: as `M^λ` with g replaced by its reversal.
    pub fn build_n_lambda(&self, lambda: &[u32]) -> Result<Pbf, PbfError> {
        self.check_lambda(lambda)?;
        let mut p = Pbf::from_gbf(&self.g_rev, self.total_vars());
        self.add_prime_tail(&mut p, lambda);
        Ok(p)
    }

    fn check_offsets(&self, r: usize, v: &[u8], v_n: u8) -> Result<(), PbfError> {
        if r >= 1 << self.n {
            return Err(PbfError::OutOfRange {
                what: "r",
                value: r as u64,
                limit: 1 << self.n,
            });
        }
        if v.len() != self.n {
            return Err(PbfError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        if let Some(&bad) = v.iter().chain(std::iter::once(&v_n)).find(|&&b| b > 1) {
            return Err(PbfError::OutOfRange {
                what: "bit",
                value: u64::from(bad),
                limit: 2,
            });
        }
        Ok(())
    }

    fn h_value(&self, v: &[u8], v_n: u8) -> Coeff {
        let idx = v
            .iter()
            .enumerate()
            .fold(usize::from(v_n) << self.n, |acc, (t, &b)| acc | (usize::from(b) << t));
        Coeff::from_integer(i64::from(self.h.eval_index(idx)))
    }

    /// `M^λ + h(v') + (q/2)·((v + r)·y_β + v_n·y_γ)`, reduced mod q.
    pub fn build_omega_member(
        &self,
        r: usize,
        lambda: &[u32],
        v: &[u8],
        v_n: u8,
    ) -> Result<Pbf, PbfError> {
        self.check_offsets(r, v, v_n)?;
        let mut p = self.build_m_lambda(lambda)?;
        p.add_const(self.h_value(v, v_n));
        let half = Coeff::from_integer(i64::from(self.q() / 2));
        for (t, (&beta, &vt)) in self.delete.iter().zip(v).enumerate() {
            let weight = i64::from(vt) + ((r >> t) & 1) as i64;
            p.add_term(&[beta], half * weight);
        }
        p.add_term(&[self.gamma], half * i64::from(v_n));
        Ok(p.reduced_mod(self.q()))
    }

    /// `N^λ + h(v') + (q/2)·((v + r)·ȳ_β + (1 - v_n)·y_γ)` with
    /// `ȳ_t = 1 - y_{β_t}`, reduced mod q.
    pub fn build_lambda_member(
        &self,
        r: usize,
        lambda: &[u32],
        v: &[u8],
        v_n: u8,
    ) -> Result<Pbf, PbfError> {
        self.check_offsets(r, v, v_n)?;
        let mut p = self.build_n_lambda(lambda)?;
        p.add_const(self.h_value(v, v_n));
        let half = Coeff::from_integer(i64::from(self.q() / 2));
        for (t, (&beta, &vt)) in self.delete.iter().zip(v).enumerate() {
            let weight = half * (i64::from(vt) + ((r >> t) & 1) as i64);
            if self.literal_bar && t + 1 == self.n {
                p.add_term(&[beta], weight);
            } else {
                p.add_const(weight);
                p.add_term(&[beta], -weight);
            }
        }
        p.add_term(&[self.gamma], half * i64::from(1 - v_n));
        Ok(p.reduced_mod(self.q()))
    }
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Prime factors with multiplicity, ascending.
pub fn prime_factors(mut x: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= x {
        while x.is_multiple_of(d) {
            out.push(d);
            x /= d;
        }
        d += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

/// `⌈log2 p⌉`, the fewest bits able to index `p` values.
pub fn default_width(p: u32) -> u32 {
    if p <= 1 {
        0
    } else {
        32 - (p - 1).leading_zeros()
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}
