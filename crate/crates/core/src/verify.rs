//! Aperiodic correlation and the ZCCS / CCC definitions as executable checks.
//!
//! `Θ(x, y)(τ) = Σ_i x_{i+τ}·y_i*` for `0 <= τ < N`, `Σ_i x_i·y_{i-τ}*` for
//! `-N < τ < 0`, and zero otherwise. Code-level correlation sums the row-wise
//! values. The exact engine accumulates correlations as [`CycloSum`]s and
//! decides zero by cyclotomic reduction; the float engine sums complex
//! doubles against a scale-aware threshold.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::CycloSum;
use crate::seqgen::{CodeMatrix, CodeSet, PhaseSequence};

/// Float-engine zero threshold, relative to `K·N`.
pub const FLOAT_REL_TOL: f64 = 1e-9;

/// Largest `K·N` for which `i64` correlation counters are used.
pub const MAX_EXACT_MASS: usize = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("sigma mismatch: {0} vs {1}")]
    SigmaMismatch(u32, u32),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("code shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("all arguments must be positive")]
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Exact,
    Float,
}

fn check_pair(x: &PhaseSequence, y: &PhaseSequence) -> Result<(), VerifyError> {
    if x.sigma() != y.sigma() {
        return Err(VerifyError::SigmaMismatch(x.sigma(), y.sigma()));
    }
    if x.len() != y.len() {
        return Err(VerifyError::LengthMismatch(x.len(), y.len()));
    }
    Ok(())
}

/// Overlapping index pairs `(i_x, i_y)` of `Θ(x, y)(τ)`.
fn overlap(len: usize, tau: i64) -> impl Iterator<Item = (usize, usize)> {
    let n = len as i64;
    let (start_x, start_y, count) = if tau >= n || tau <= -n {
        (0, 0, 0)
    } else if tau >= 0 {
        (tau as usize, 0, (n - tau) as usize)
    } else {
        (0, (-tau) as usize, (n + tau) as usize)
    };
    (0..count).map(move |i| (start_x + i, start_y + i))
}

fn accumulate(acc: &mut CycloSum, x: &[u32], y: &[u32], sigma: u32, tau: i64) {
    for (ix, iy) in overlap(x.len(), tau) {
        let e = x[ix] + sigma - y[iy];
        acc.bump(if e >= sigma { e - sigma } else { e });
    }
}

/// Exact `Θ(x, y)(τ)`.
pub fn accf(x: &PhaseSequence, y: &PhaseSequence, tau: i64) -> Result<CycloSum, VerifyError> {
    check_pair(x, y)?;
    let mut acc = CycloSum::zero(x.sigma());
    accumulate(&mut acc, x.exponents(), y.exponents(), x.sigma(), tau);
    Ok(acc)
}

/// `Θ(x, y)(τ)` in double precision, summed directly over complex values.
pub fn accf_float(x: &PhaseSequence, y: &PhaseSequence, tau: i64) -> Result<Complex64, VerifyError> {
    check_pair(x, y)?;
    let (xc, yc) = (x.to_complex(), y.to_complex());
    Ok(overlap(x.len(), tau)
        .map(|(ix, iy)| xc[ix] * yc[iy].conj())
        .sum())
}

fn check_codes(a: &CodeMatrix, b: &CodeMatrix) -> Result<(), VerifyError> {
    if a.num_rows() != b.num_rows() || a.len() != b.len() {
        return Err(VerifyError::ShapeMismatch(
            a.num_rows(),
            a.len(),
            b.num_rows(),
            b.len(),
        ));
    }
    if a.sigma() != b.sigma() {
        return Err(VerifyError::SigmaMismatch(a.sigma(), b.sigma()));
    }
    Ok(())
}

/// `Θ(A, B)(τ) = Σ_k Θ(a_k, b_k)(τ)`.
pub fn set_accf(a: &CodeMatrix, b: &CodeMatrix, tau: i64) -> Result<CycloSum, VerifyError> {
    check_codes(a, b)?;
    let sigma = a.sigma();
    let mut acc = CycloSum::zero(sigma);
    for (ra, rb) in a.rows().iter().zip(b.rows()) {
        accumulate(&mut acc, ra.exponents(), rb.exponents(), sigma, tau);
    }
    Ok(acc)
}

/// Full `Θ(x, y)(τ)` for `τ ∈ (-N, N)` through zero-padded FFTs; entry
/// `τ + N - 1` holds shift `τ`.
pub fn correlate_fft(x: &[Complex64], y: &[Complex64]) -> Result<Vec<Complex64>, VerifyError> {
    if x.len() != y.len() {
        return Err(VerifyError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let size = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut fx = x.to_vec();
    fx.resize(size, Complex64::new(0.0, 0.0));
    let mut fy = y.to_vec();
    fy.resize(size, Complex64::new(0.0, 0.0));
    forward.process(&mut fx);
    forward.process(&mut fy);
    // circular cross-correlation: r[τ] = Σ_i x[i + τ]·conj(y[i])
    let mut spectrum: Vec<Complex64> = fx.iter().zip(&fy).map(|(a, b)| a * b.conj()).collect();
    inverse.process(&mut spectrum);
    let scale = 1.0 / size as f64;
    let mut out = Vec::with_capacity(2 * n - 1);
    for tau in -(n as i64 - 1)..n as i64 {
        let idx = tau.rem_euclid(size as i64) as usize;
        out.push(spectrum[idx] * scale);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// In-phase autocorrelation differs from `K·N`.
    Peak,
    /// Nonzero autocorrelation sidelobe inside the zone.
    Auto,
    /// Nonzero cross-correlation inside the zone.
    Cross,
    /// `M ≠ K` where a complete complementary code is required.
    SetSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code_a: usize,
    pub code_b: usize,
    pub shift: i64,
    pub kind: ViolationKind,
    /// `|Θ|`, or `|Θ - K·N|` for peak violations.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub passed: bool,
    pub zcz: usize,
    pub engine: Engine,
    /// `Θ(B^0, B^0)(0)`, expected to equal `K·N`.
    pub peak_value: Option<i64>,
    pub expected_peak: i64,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub engine: Engine,
    /// Check `(δ_1, δ_2)` and `(δ_2, δ_1)` separately.
    pub ordered_pairs: bool,
    /// Return as soon as one violation is found.
    pub stop_at_first: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Exact,
            ordered_pairs: true,
            stop_at_first: false,
        }
    }
}

impl CheckOptions {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn float() -> Self {
        Self {
            engine: Engine::Float,
            ..Self::default()
        }
    }
}

/// Precomputed view of a code set shared by the pair checks.
struct Checker<'a> {
    set: &'a CodeSet,
    engine: Engine,
    complex: Option<Vec<Vec<Vec<Complex64>>>>,
    mass: i64,
}

impl<'a> Checker<'a> {
    fn new(set: &'a CodeSet, engine: Engine) -> Self {
        let p = set.params();
        let mass = p.rows * p.len;
        assert!(
            engine == Engine::Float || mass <= MAX_EXACT_MASS,
            "K·N = {mass} too large for exact counters"
        );
        let complex = (engine == Engine::Float).then(|| {
            set.codes()
                .iter()
                .map(|c| c.rows().iter().map(PhaseSequence::to_complex).collect())
                .collect()
        });
        Self {
            set,
            engine,
            complex,
            mass: mass as i64,
        }
    }

    fn eval(&self, a: usize, b: usize, shift: i64) -> Option<Violation> {
        let in_phase_auto = a == b && shift == 0;
        let kind = match (a == b, shift == 0) {
            (true, true) => ViolationKind::Peak,
            (true, false) => ViolationKind::Auto,
            _ => ViolationKind::Cross,
        };
        let magnitude = match self.engine {
            Engine::Exact => {
                let (ca, cb) = (&self.set.codes()[a], &self.set.codes()[b]);
                let mut sum = set_accf(ca, cb, shift).expect("codes share one shape");
                if in_phase_auto {
                    sum.add_root(0, -self.mass).expect("exponent 0 always valid");
                }
                if sum.is_zero_exact() {
                    return None;
                }
                sum.to_complex().norm()
            }
            Engine::Float => {
                let rows = self.complex.as_ref().expect("float rows");
                let mut sum: Complex64 = rows[a]
                    .iter()
                    .zip(&rows[b])
                    .map(|(x, y)| {
                        overlap(x.len(), shift)
                            .map(|(ix, iy)| x[ix] * y[iy].conj())
                            .sum::<Complex64>()
                    })
                    .sum();
                if in_phase_auto {
                    sum -= self.mass as f64;
                }
                let magnitude = sum.norm();
                if magnitude <= FLOAT_REL_TOL * self.mass as f64 {
                    return None;
                }
                magnitude
            }
        };
        Some(Violation {
            code_a: a,
            code_b: b,
            shift,
            kind,
            magnitude,
        })
    }

    /// All `(a, b, shift)` triples of the layer `|shift| = tau`.
    fn layer(&self, tau: usize, ordered: bool) -> Vec<(usize, usize, i64)> {
        let m = self.set.codes().len();
        let shifts: &[i64] = if tau == 0 { &[0] } else { &[1, -1] };
        let mut out = Vec::new();
        for a in 0..m {
            let b_start = if ordered { 0 } else { a };
            for b in b_start..m {
                for &s in shifts {
                    out.push((a, b, s * tau as i64));
                }
            }
        }
        out
    }

    fn scan_layer(&self, tau: usize, opts: &CheckOptions) -> Vec<Violation> {
        let triples = self.layer(tau, opts.ordered_pairs);
        if opts.stop_at_first {
            triples
                .into_iter()
                .find_map(|(a, b, s)| self.eval(a, b, s))
                .into_iter()
                .collect()
        } else {
            triples
                .into_par_iter()
                .filter_map(|(a, b, s)| self.eval(a, b, s))
                .collect()
        }
    }

    fn peak_value(&self) -> Option<i64> {
        let c = &self.set.codes()[0];
        match self.engine {
            Engine::Exact => set_accf(c, c, 0).ok()?.as_integer(),
            Engine::Float => {
                let rows = self.complex.as_ref()?;
                let v: f64 = rows[0]
                    .iter()
                    .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>())
                    .sum();
                Some(v.round() as i64)
            }
        }
    }
}

/// Scan order: by `|τ|`, then code pair, positive shift first.
fn sort_violations(v: &mut [Violation]) {
    v.sort_by_key(|x| (x.shift.unsigned_abs(), x.code_a, x.code_b, x.shift < 0));
}

/// Checks the ZCCS conditions for zone width `z`: in-phase autocorrelation
/// `K·N`, zero autocorrelation for `0 < |τ| < z`, and zero cross-correlation
/// for `|τ| < z` between distinct codes.
pub fn check_zccs(set: &CodeSet, z: usize, opts: CheckOptions) -> CorrelationReport {
    let checker = Checker::new(set, opts.engine);
    let z = z.clamp(1, set.params().len);
    let mut violations = Vec::new();
    for tau in 0..z {
        violations.extend(checker.scan_layer(tau, &opts));
        if opts.stop_at_first && !violations.is_empty() {
            break;
        }
    }
    sort_violations(&mut violations);
    CorrelationReport {
        passed: violations.is_empty(),
        zcz: z,
        engine: opts.engine,
        peak_value: checker.peak_value(),
        expected_peak: checker.mass,
        violations,
    }
}

/// A complete complementary code: `M = K` and the ZCCS conditions with
/// `Z = N`.
pub fn check_ccc(set: &CodeSet, opts: CheckOptions) -> CorrelationReport {
    let p = set.params();
    let mut report = check_zccs(set, p.len, opts);
    if p.num_codes != p.rows {
        report.violations.insert(
            0,
            Violation {
                code_a: 0,
                code_b: 0,
                shift: 0,
                kind: ViolationKind::SetSize,
                magnitude: p.num_codes as f64,
            },
        );
        report.passed = false;
    }
    report
}

/// Largest `Z` for which the ZCCS conditions hold, found by scanning shifts
/// outward from zero; `0` if even the in-phase conditions fail.
pub fn measure_zcz(set: &CodeSet, engine: Engine) -> usize {
    let checker = Checker::new(set, engine);
    let opts = CheckOptions {
        engine,
        ordered_pairs: false,
        stop_at_first: false,
    };
    let n = set.params().len;
    for tau in 0..n {
        let triples = checker.layer(tau, opts.ordered_pairs);
        if triples
            .into_par_iter()
            .any(|(a, b, s)| checker.eval(a, b, s).is_some())
        {
            return tau;
        }
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimality {
    Optimal,
    Suboptimal,
    /// `M > K⌊N/Z⌋`: the set-size bound is violated, so the claimed
    /// parameters cannot describe a real ZCCS.
    Invalid,
}

/// Compares `M` with the bound `K⌊N/Z⌋`.
pub fn check_optimality(m: usize, k: usize, n: usize, z: usize) -> Result<Optimality, VerifyError> {
    if m == 0 || k == 0 || n == 0 || z == 0 {
        return Err(VerifyError::NonPositive);
    }
    let bound = k * (n / z);
    Ok(match m.cmp(&bound) {
        std::cmp::Ordering::Equal => Optimality::Optimal,
        std::cmp::Ordering::Less => Optimality::Suboptimal,
        std::cmp::Ordering::Greater => Optimality::Invalid,
    })
}
