//! Exact arithmetic on integer combinations of `σ`-th roots of unity.
//!
//! A [`CycloSum`] stores `Σ c_e·ζ^e` with `ζ = e^{2πj/σ}` as the coefficient
//! vector `c`. Equality with zero is decided by reducing `Σ c_e·x^e` modulo the
//! cyclotomic polynomial `Φ_σ`, which is the minimal polynomial of `ζ`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("cyclotomic index must be >= 1")]
    ZeroIndex,
    #[error("exponent {exponent} out of range for sigma = {sigma}")]
    ExponentOutOfRange { exponent: u32, sigma: u32 },
    #[error("sigma mismatch: {0} vs {1}")]
    SigmaMismatch(u32, u32),
}

/// Integer polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// `x^n - 1`
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[0] = -1;
        coeffs[n] += 1;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut out = vec![0i64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Exact division by a monic divisor. Returns `None` if the divisor is
    /// not monic or leaves a nonzero remainder.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let d = divisor.degree()?;
        if divisor.coeffs[d] != 1 {
            return None;
        }
        let Some(n) = self.degree() else {
            return Some(self.clone());
        };
        if n < d {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0i64; n - d + 1];
        for k in (0..=n - d).rev() {
            let lead = rem[k + d];
            quot[k] = lead;
            if lead != 0 {
                for (t, &c) in divisor.coeffs.iter().enumerate() {
                    rem[k + t] -= lead * c;
                }
            }
        }
        rem.iter().all(|&c| c == 0).then(|| Self::new(quot))
    }
}

/// The `d`-th cyclotomic polynomial, `(x^d - 1) / Π_{e | d, e < d} Φ_e`.
pub fn cyclotomic_poly(d: usize) -> Result<IntPolynomial, ExactError> {
    if d == 0 {
        return Err(ExactError::ZeroIndex);
    }
    let mut result = IntPolynomial::x_pow_minus_one(d);
    for e in (1..d).filter(|e| d.is_multiple_of(*e)) {
        let phi_e = cyclotomic_poly(e)?;
        result = result
            .exact_div(&phi_e)
            .expect("cyclotomic factors divide x^d - 1");
    }
    Ok(result)
}

fn cached_cyclotomic(sigma: u32) -> Arc<IntPolynomial> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<IntPolynomial>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("cache poisoned").get(&sigma) {
        return Arc::clone(p);
    }
    let p = Arc::new(cyclotomic_poly(sigma as usize).expect("sigma >= 1"));
    cache
        .lock()
        .expect("cache poisoned")
        .entry(sigma)
        .or_insert(p)
        .clone()
}

/// `Σ coeffs[e]·ζ_σ^e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycloSum {
    sigma: u32,
    coeffs: Vec<i64>,
}

impl CycloSum {
    pub fn zero(sigma: u32) -> Self {
        assert!(sigma >= 1, "sigma must be positive");
        Self {
            sigma,
            coeffs: vec![0; sigma as usize],
        }
    }

    pub fn from_coeffs(sigma: u32, coeffs: Vec<i64>) -> Self {
        assert_eq!(coeffs.len(), sigma as usize, "coefficient vector must have length sigma");
        Self { sigma, coeffs }
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn add_root(&mut self, exponent: u32, weight: i64) -> Result<(), ExactError> {
        if exponent >= self.sigma {
            return Err(ExactError::ExponentOutOfRange {
                exponent,
                sigma: self.sigma,
            });
        }
        self.coeffs[exponent as usize] += weight;
        Ok(())
    }

    /// Hot-path variant of [`add_root`](Self::add_root) for callers that
    /// already reduced the exponent.
    #[inline]
    pub(crate) fn bump(&mut self, exponent: u32) {
        self.coeffs[exponent as usize] += 1;
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<(), ExactError> {
        if self.sigma != other.sigma {
            return Err(ExactError::SigmaMismatch(self.sigma, other.sigma));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }

    /// Complex conjugate: `ζ^e ↦ ζ^{σ-e}`.
    pub fn conjugate(&self) -> Self {
        let s = self.sigma as usize;
        let mut coeffs = vec![0; s];
        for (e, &c) in self.coeffs.iter().enumerate() {
            coeffs[(s - e) % s] += c;
        }
        Self {
            sigma: self.sigma,
            coeffs,
        }
    }

    /// Sum of absolute coefficient values; bounds `|value|`.
    pub fn l1_norm(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Remainder of `Σ c_e x^e` modulo `Φ_σ`, of length `φ(σ)`. Two sums are
    /// equal as complex numbers iff their remainders coincide.
    pub fn reduced(&self) -> Vec<BigInt> {
        match reduce_i128(&self.coeffs, &cached_cyclotomic(self.sigma)) {
            Some(r) => r.into_iter().map(BigInt::from).collect(),
            None => reduce_big(&self.coeffs, &cached_cyclotomic(self.sigma)),
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        if self.coeffs.iter().all(|&c| c == 0) {
            return true;
        }
        let phi = cached_cyclotomic(self.sigma);
        match reduce_i128(&self.coeffs, &phi) {
            Some(r) => r.iter().all(|&c| c == 0),
            None => reduce_big(&self.coeffs, &phi).iter().all(Zero::is_zero),
        }
    }

    /// The exact value when it is a rational integer.
    pub fn as_integer(&self) -> Option<i64> {
        let r = self.reduced();
        if r.iter().skip(1).all(Zero::is_zero) {
            let c = r.first().cloned().unwrap_or_default();
            i64::try_from(c).ok()
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let s = f64::from(self.sigma);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(e, &c)| Complex64::from_polar(c as f64, std::f64::consts::TAU * e as f64 / s))
            .sum()
    }
}

fn reduce_i128(coeffs: &[i64], phi: &IntPolynomial) -> Option<Vec<i128>> {
    let d = phi.degree().expect("cyclotomic polynomials are nonzero");
    let mut rem: Vec<i128> = coeffs.iter().map(|&c| i128::from(c)).collect();
    if rem.len() <= d {
        rem.resize(d, 0);
        return Some(rem);
    }
    for k in (d..rem.len()).rev() {
        let lead = rem[k];
        if lead == 0 {
            continue;
        }
        // Φ is monic: subtract lead·x^{k-d}·Φ
        for (t, &c) in phi.coeffs().iter().enumerate() {
            let idx = k - d + t;
            rem[idx] = rem[idx].checked_sub(lead.checked_mul(i128::from(c))?)?;
        }
    }
    rem.truncate(d);
    Some(rem)
}

fn reduce_big(coeffs: &[i64], phi: &IntPolynomial) -> Vec<BigInt> {
    let d = phi.degree().expect("cyclotomic polynomials are nonzero");
    let mut rem: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
    if rem.len() <= d {
        rem.resize(d, BigInt::zero());
        return rem;
    }
    for k in (d..rem.len()).rev() {
        let lead = rem[k].clone();
        if lead.is_zero() {
            continue;
        }
        for (t, &c) in phi.coeffs().iter().enumerate() {
            let idx = k - d + t;
            rem[idx] -= &lead * c;
        }
    }
    rem.truncate(d);
    rem
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler_phi(n: usize) -> usize {
        (1..=n).filter(|&k| gcd(k, n) == 1).count()
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_poly(1).unwrap().coeffs(), &[-1, 1]);
        assert_eq!(cyclotomic_poly(2).unwrap().coeffs(), &[1, 1]);
        // x^6 - 1 = (x - 1)(x + 1)(x^2 + x + 1)(x^2 - x + 1)
        assert_eq!(cyclotomic_poly(6).unwrap().coeffs(), &[1, -1, 1]);
        assert_eq!(cyclotomic_poly(0), Err(ExactError::ZeroIndex));
    }

    #[test]
    fn cyclotomic_degree_is_totient() {
        for n in 1..=60 {
            assert_eq!(cyclotomic_poly(n).unwrap().degree(), Some(euler_phi(n)), "n={n}");
        }
    }

    #[test]
    fn product_over_divisors_is_x_n_minus_1() {
        for n in 1..=60 {
            let product = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| cyclotomic_poly(d).unwrap())
                .fold(IntPolynomial::new(vec![1]), |acc, p| acc.mul(&p));
            assert_eq!(product, IntPolynomial::x_pow_minus_one(n), "n={n}");
        }
    }

    #[test]
    fn add_root_basics() {
        let mut s = CycloSum::zero(6);
        s.add_root(0, 1).unwrap();
        assert_eq!(s.coeffs(), &[1, 0, 0, 0, 0, 0]);
        s.add_root(0, -1).unwrap();
        assert!(s.coeffs().iter().all(|&c| c == 0));
        assert!(s.is_zero_exact());
        assert_eq!(
            s.add_root(6, 1),
            Err(ExactError::ExponentOutOfRange { exponent: 6, sigma: 6 })
        );
        // ζ^a · conj(ζ^b) lands on (a - b) mod σ
        let (a, b) = (1u32, 4u32);
        let mut t = CycloSum::zero(6);
        t.add_root((a + 6 - b) % 6, 1).unwrap();
        assert_eq!(t.coeffs()[3], 1);
    }

    #[test]
    fn zero_tests() {
        let third_roots = CycloSum::from_coeffs(6, vec![1, 0, 1, 0, 1, 0]);
        assert!(third_roots.is_zero_exact());
        assert!(third_roots.to_complex().norm() < 1e-12);
        assert!(CycloSum::from_coeffs(6, vec![1, 0, 0, 1, 0, 0]).is_zero_exact());
        assert!(!CycloSum::from_coeffs(6, vec![1, 1, 0, 0, 0, 0]).is_zero_exact());
    }

    #[test]
    fn complex_values() {
        assert_eq!(CycloSum::zero(5).to_complex(), Complex64::new(0.0, 0.0));
        let i = CycloSum::from_coeffs(4, vec![0, 1, 0, 0]).to_complex();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn integer_values() {
        assert_eq!(CycloSum::from_coeffs(6, vec![7, 0, 0, 0, 0, 0]).as_integer(), Some(7));
        // 1 + ζ^2 + ζ^4 + 3 = 3
        assert_eq!(CycloSum::from_coeffs(6, vec![4, 0, 1, 0, 1, 0]).as_integer(), Some(3));
        assert_eq!(CycloSum::from_coeffs(6, vec![0, 1, 0, 0, 0, 0]).as_integer(), None);
        // ζ^3 = -1
        assert_eq!(CycloSum::from_coeffs(6, vec![0, 0, 0, 2, 0, 0]).as_integer(), Some(-2));
    }

    #[test]
    fn conjugate_is_involution() {
        let s = CycloSum::from_coeffs(7, vec![1, 2, 0, -1, 5, 0, 3]);
        assert_eq!(s.conjugate().conjugate(), s);
        let z = s.to_complex().conj();
        assert!((s.conjugate().to_complex() - z).norm() < 1e-12);
    }

    #[test]
    fn prime_root_sums() {
        // Σ_j ζ_p^{(t - t')j} is 0 for t ≠ t' and p for t = t'
        for p in [2u32, 3, 5, 7, 11, 13] {
            for t in 0..p {
                for tp in 0..p {
                    let mut s = CycloSum::zero(p);
                    for j in 0..p {
                        let e = ((t + p - tp) * j) % p;
                        s.add_root(e, 1).unwrap();
                    }
                    if t == tp {
                        assert_eq!(s.as_integer(), Some(i64::from(p)));
                    } else {
                        assert!(s.is_zero_exact(), "p={p} t={t} t'={tp}");
                    }
                }
            }
        }
    }

    #[test]
    fn big_fallback_agrees() {
        let phi = cyclotomic_poly(30).unwrap();
        let coeffs: Vec<i64> = (0..30).map(|k| (k * 7919 % 13) - 6).collect();
        let small: Vec<BigInt> = reduce_i128(&coeffs, &phi)
            .unwrap()
            .into_iter()
            .map(BigInt::from)
            .collect();
        assert_eq!(small, reduce_big(&coeffs, &phi));
    }

    #[test]
    fn exact_zero_implies_small_float() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut found = 0;
        for _ in 0..2000 {
            let sigma = [6u32, 10, 12, 15, 30][rng.gen_range(0..5)];
            let coeffs: Vec<i64> = (0..sigma).map(|_| rng.gen_range(-2..=2)).collect();
            let mut s = CycloSum::from_coeffs(sigma, coeffs);
            // force some exact zeros: add a full coset sum minus itself
            if rng.gen_bool(0.5) {
                s = CycloSum::zero(sigma);
                let d = [2u32, 3, 5].into_iter().find(|d| sigma.is_multiple_of(*d)).unwrap();
                let step = sigma / d;
                let offset = rng.gen_range(0..sigma);
                for j in 0..d {
                    s.add_root((offset + j * step) % sigma, 3).unwrap();
                }
            }
            if s.is_zero_exact() {
                found += 1;
                assert!(s.to_complex().norm() < 1e-9 * (s.l1_norm() as f64).max(1.0));
            } else {
                assert!(s.to_complex().norm() > 1e-12);
            }
        }
        assert!(found > 0);
    }
}
