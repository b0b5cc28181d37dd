//! Second-order generalized Boolean functions over `Z_q`.
//!
//! A [`Gbf`] is a polynomial `Σ a_ij·y_i·y_j + Σ b_i·y_i + c` in Boolean
//! variables `y_0..y_{m-1}` with coefficients in `Z_q`. Besides evaluation,
//! reversal and restriction, this module carries the graph analysis used to
//! decide whether deleting a set of vertices reduces the quadratic graph to a
//! path whose edges all carry weight `q/2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GbfError {
    #[error("modulus q = {0} must be an even integer >= 2")]
    InvalidModulus(u32),
    #[error("variable index {index} out of range for m = {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("quadratic term y{0}*y{0} is not allowed (Boolean variables are idempotent)")]
    SelfPair(usize),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("deletion set of size {size} leaves no vertex out of m = {m}")]
    DeleteSetTooLarge { size: usize, m: usize },
    #[error("gamma = {0} lies inside the deletion set")]
    GammaDeleted(usize),
    #[error("cannot restrict a function with no variables")]
    NoVariables,
}

/// Second-order generalized Boolean function `Z_2^m -> Z_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gbf {
    q: u32,
    m: usize,
    quad: BTreeMap<(usize, usize), u32>,
    lin: BTreeMap<usize, u32>,
    cst: u32,
}

impl Gbf {
    /// The zero function on `m` variables.
    pub fn zero(q: u32, m: usize) -> Result<Self, GbfError> {
        if q < 2 || !q.is_multiple_of(2) {
            return Err(GbfError::InvalidModulus(q));
        }
        Ok(Self {
            q,
            m,
            quad: BTreeMap::new(),
            lin: BTreeMap::new(),
            cst: 0,
        })
    }

    /// Builds a function from raw coefficient lists. Repeated entries are
    /// summed, everything is reduced mod `q`, and pairs are stored with the
    /// smaller index first.
    pub fn new(
        q: u32,
        m: usize,
        quad: impl IntoIterator<Item = ((usize, usize), u64)>,
        lin: impl IntoIterator<Item = (usize, u64)>,
        cst: u64,
    ) -> Result<Self, GbfError> {
        let mut g = Self::zero(q, m)?;
        for ((i, j), c) in quad {
            g.add_quad(i, j, c)?;
        }
        for (i, c) in lin {
            g.add_lin(i, c)?;
        }
        g.add_const(cst);
        Ok(g)
    }

    pub fn add_quad(&mut self, i: usize, j: usize, coeff: u64) -> Result<(), GbfError> {
        if i == j {
            return Err(GbfError::SelfPair(i));
        }
        self.check_index(i)?;
        self.check_index(j)?;
        let key = (i.min(j), i.max(j));
        let q = u64::from(self.q);
        let entry = self.quad.entry(key).or_insert(0);
        *entry = ((u64::from(*entry) + coeff % q) % q) as u32;
        if *entry == 0 {
            self.quad.remove(&key);
        }
        Ok(())
    }

    pub fn add_lin(&mut self, i: usize, coeff: u64) -> Result<(), GbfError> {
        self.check_index(i)?;
        let q = u64::from(self.q);
        let entry = self.lin.entry(i).or_insert(0);
        *entry = ((u64::from(*entry) + coeff % q) % q) as u32;
        if *entry == 0 {
            self.lin.remove(&i);
        }
        Ok(())
    }

    pub fn add_const(&mut self, coeff: u64) {
        let q = u64::from(self.q);
        self.cst = ((u64::from(self.cst) + coeff % q) % q) as u32;
    }

    fn check_index(&self, index: usize) -> Result<(), GbfError> {
        if index >= self.m {
            Err(GbfError::IndexOutOfRange { index, m: self.m })
        } else {
            Ok(())
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn num_vars(&self) -> usize {
        self.m
    }

    /// Nonzero quadratic coefficients keyed by `(i, j)` with `i < j`.
    pub fn quad_terms(&self) -> &BTreeMap<(usize, usize), u32> {
        &self.quad
    }

    pub fn lin_terms(&self) -> &BTreeMap<usize, u32> {
        &self.lin
    }

    pub fn constant(&self) -> u32 {
        self.cst
    }

    pub fn quad_coeff(&self, i: usize, j: usize) -> u32 {
        self.quad.get(&(i.min(j), i.max(j))).copied().unwrap_or(0)
    }

    pub fn lin_coeff(&self, i: usize) -> u32 {
        self.lin.get(&i).copied().unwrap_or(0)
    }

    pub fn eval(&self, point: &[u8]) -> Result<u32, GbfError> {
        if point.len() != self.m {
            return Err(GbfError::DimensionMismatch {
                expected: self.m,
                got: point.len(),
            });
        }
        Ok(self.eval_with(|i| point[i] & 1 == 1))
    }

    /// Evaluates at the point whose bit `i` is bit `i` of `index` (LSB first).
    pub fn eval_index(&self, index: u64) -> u32 {
        self.eval_with(|i| (index >> i) & 1 == 1)
    }

    fn eval_with(&self, bit: impl Fn(usize) -> bool) -> u32 {
        let q = u64::from(self.q);
        let mut acc = u64::from(self.cst);
        for (&i, &c) in &self.lin {
            if bit(i) {
                acc += u64::from(c);
            }
        }
        for (&(i, j), &c) in &self.quad {
            if bit(i) && bit(j) {
                acc += u64::from(c);
            }
        }
        (acc % q) as u32
    }

    /// The reversal `g̃(y) = g(1 - y)`, expanded back into monomial form.
    pub fn reverse(&self) -> Gbf {
        let q = u64::from(self.q);
        let neg = |c: u32| (q - u64::from(c)) % q;
        let mut out = Self::zero(self.q, self.m).expect("modulus already validated");
        out.add_const(u64::from(self.cst));
        // b·(1 - y_i) = b - b·y_i
        for (&i, &c) in &self.lin {
            out.add_const(u64::from(c));
            out.add_lin(i, neg(c)).expect("index in range");
        }
        // a·(1 - y_i)(1 - y_j) = a - a·y_i - a·y_j + a·y_i·y_j
        for (&(i, j), &c) in &self.quad {
            out.add_const(u64::from(c));
            out.add_lin(i, neg(c)).expect("index in range");
            out.add_lin(j, neg(c)).expect("index in range");
            out.add_quad(i, j, u64::from(c)).expect("index in range");
        }
        out
    }

    /// Substitutes `y_var = value` and drops the variable. Returns the
    /// restricted function together with `mapping`, where `mapping[k]` is the
    /// original index of the restricted function's variable `k`.
    pub fn restrict(&self, var: usize, value: u8) -> Result<(Gbf, Vec<usize>), GbfError> {
        self.check_index(var)?;
        let value = u64::from(value & 1);
        let mapping: Vec<usize> = (0..self.m).filter(|&i| i != var).collect();
        let renumber = |i: usize| if i > var { i - 1 } else { i };
        let mut out = Self::zero(self.q, self.m - 1)?;
        out.add_const(u64::from(self.cst));
        for (&i, &c) in &self.lin {
            if i == var {
                out.add_const(value * u64::from(c));
            } else {
                out.add_lin(renumber(i), u64::from(c))?;
            }
        }
        for (&(i, j), &c) in &self.quad {
            if i == var {
                out.add_lin(renumber(j), value * u64::from(c))?;
            } else if j == var {
                out.add_lin(renumber(i), value * u64::from(c))?;
            } else {
                out.add_quad(renumber(i), renumber(j), u64::from(c))?;
            }
        }
        Ok((out, mapping))
    }

    /// Weighted graph of the quadratic part.
    pub fn quadratic_graph(&self) -> GbfGraph {
        GbfGraph {
            vertices: self.m,
            edges: self.quad.clone(),
        }
    }

    /// Checks whether deleting `delete` leaves a simple path over the
    /// remaining vertices with every edge weighted `q/2`. Edges touching a
    /// deleted vertex are unconstrained.
    pub fn check_path_reduction(
        &self,
        delete: &[usize],
        gamma: Option<usize>,
    ) -> Result<PathReport, GbfError> {
        for &d in delete {
            self.check_index(d)?;
        }
        let deleted: BTreeSet<usize> = delete.iter().copied().collect();
        if !deleted.is_empty() && deleted.len() >= self.m {
            return Err(GbfError::DeleteSetTooLarge {
                size: deleted.len(),
                m: self.m,
            });
        }
        if let Some(g) = gamma {
            self.check_index(g)?;
            if deleted.contains(&g) {
                return Err(GbfError::GammaDeleted(g));
            }
        }
        let remaining: Vec<usize> = (0..self.m).filter(|i| !deleted.contains(i)).collect();
        if remaining.is_empty() {
            return Ok(PathReport::failed(PathFailure::Empty));
        }

        let half = self.q / 2;
        let mut adjacency: BTreeMap<usize, Vec<usize>> =
            remaining.iter().map(|&v| (v, Vec::new())).collect();
        let mut edge_count = 0usize;
        for (&(i, j), &w) in &self.quad {
            if deleted.contains(&i) || deleted.contains(&j) {
                continue;
            }
            if w != half {
                return Ok(PathReport::failed(PathFailure::WrongEdgeWeight));
            }
            adjacency.get_mut(&i).expect("remaining vertex").push(j);
            adjacency.get_mut(&j).expect("remaining vertex").push(i);
            edge_count += 1;
        }
        if adjacency.values().any(|n| n.len() > 2) {
            return Ok(PathReport::failed(PathFailure::NotAPath));
        }
        if edge_count + 1 != remaining.len() {
            // a cycle needs as many edges as vertices; fewer means several components
            let reason = if edge_count >= remaining.len() {
                PathFailure::NotAPath
            } else {
                PathFailure::Disconnected
            };
            return Ok(PathReport::failed(reason));
        }

        // With |E| = |V| - 1 and max degree 2 the graph is a path iff connected.
        let start = *adjacency
            .iter()
            .find(|(_, n)| n.len() <= 1)
            .map(|(v, _)| v)
            .ok_or(GbfError::NoVariables)?;
        let mut path = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&next) = adjacency[&cur].iter().find(|&&n| n != prev) {
            path.push(next);
            prev = cur;
            cur = next;
        }
        if path.len() != remaining.len() {
            return Ok(PathReport::failed(PathFailure::Disconnected));
        }
        let mut end_vertices = BTreeSet::new();
        end_vertices.insert(path[0]);
        end_vertices.insert(*path.last().expect("nonempty path"));
        if let Some(g) = gamma {
            if !end_vertices.contains(&g) {
                return Ok(PathReport {
                    ok: false,
                    remaining_path: path,
                    end_vertices,
                    failure_reason: Some(PathFailure::GammaNotEndVertex),
                });
            }
        }
        Ok(PathReport {
            ok: true,
            remaining_path: path,
            end_vertices,
            failure_reason: None,
        })
    }

    /// Lexicographically smallest `n`-subset whose deletion leaves a `q/2`
    /// weighted path.
    pub fn find_deletion_set(&self, n: usize) -> Option<Vec<usize>> {
        if self.m == 0 || n >= self.m {
            return None;
        }
        let mut combo: Vec<usize> = (0..n).collect();
        loop {
            if matches!(self.check_path_reduction(&combo, None), Ok(r) if r.ok) {
                return Some(combo);
            }
            // advance to the next combination in lexicographic order
            let k = (0..n).rev().find(|&k| combo[k] < self.m - n + k)?;
            combo[k] += 1;
            for t in k + 1..n {
                combo[t] = combo[t - 1] + 1;
            }
        }
    }
}

/// Canonical textual form: quadratic terms, then linear terms, then the
/// constant, joined with `+`; a coefficient of 1 is omitted.
impl fmt::Display for Gbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (&(i, j), &c) in &self.quad {
            terms.push(match c {
                1 => format!("y{i}*y{j}"),
                _ => format!("{c}*y{i}*y{j}"),
            });
        }
        for (&i, &c) in &self.lin {
            terms.push(match c {
                1 => format!("y{i}"),
                _ => format!("{c}*y{i}"),
            });
        }
        if self.cst != 0 || terms.is_empty() {
            terms.push(self.cst.to_string());
        }
        f.write_str(&terms.join("+"))
    }
}

/// Vertices `0..m` joined by the nonzero quadratic coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GbfGraph {
    pub vertices: usize,
    pub edges: BTreeMap<(usize, usize), u32>,
}

impl GbfGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.keys().filter(|&&(i, j)| i == v || j == v).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathFailure {
    NotAPath,
    WrongEdgeWeight,
    Disconnected,
    Empty,
    GammaNotEndVertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathReport {
    pub ok: bool,
    /// Remaining vertices in path order, starting from the smaller end.
    pub remaining_path: Vec<usize>,
    pub end_vertices: BTreeSet<usize>,
    pub failure_reason: Option<PathFailure>,
}

impl PathReport {
    fn failed(reason: PathFailure) -> Self {
        Self {
            ok: false,
            remaining_path: Vec::new(),
            end_vertices: BTreeSet::new(),
            failure_reason: Some(reason),
        }
    }
}
