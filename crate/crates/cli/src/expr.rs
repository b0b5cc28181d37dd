//! Text syntax for quadratic GBFs: sums of products of `y<idx>` variables
//! and nonnegative integer literals, e.g. `y1*y2+y0` or `2*y0*y3+1`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;
use zccs_core::gbf::{Gbf, GbfError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable y{index} at position {pos} (m = {m})")]
    UnknownVariable { index: usize, pos: usize, m: usize },
    #[error("term {term} has degree {degree}; only quadratic functions are supported")]
    Degree { term: String, degree: usize },
    #[error(transparent)]
    Gbf(#[from] GbfError),
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    q: u64,
    m: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.text.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn number(&mut self) -> Result<u64, ExprError> {
        let start = self.pos;
        while self.text.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii digits");
        digits.parse().map_err(|_| ExprError::Syntax {
            pos: start,
            msg: format!("integer literal {digits} is too large"),
        })
    }

    /// One product term: coefficient mod `q` and its (idempotent) variable set.
    fn term(&mut self) -> Result<(u64, BTreeSet<usize>), ExprError> {
        let mut coeff = 1 % self.q;
        let mut vars = BTreeSet::new();
        loop {
            self.skip_ws();
            match self.text.get(self.pos) {
                Some(b'y') => {
                    let at = self.pos;
                    self.pos += 1;
                    if !self.text.get(self.pos).is_some_and(u8::is_ascii_digit) {
                        return self.syntax("expected a variable index after 'y'");
                    }
                    let index = self.number()? as usize;
                    if index >= self.m {
                        return Err(ExprError::UnknownVariable {
                            index,
                            pos: at,
                            m: self.m,
                        });
                    }
                    vars.insert(index);
                }
                Some(c) if c.is_ascii_digit() => {
                    let lit = self.number()? % self.q;
                    coeff = coeff * lit % self.q;
                }
                Some(&c) => return self.syntax(format!("unexpected character '{}'", c as char)),
                None => return self.syntax("unexpected end of expression"),
            }
            self.skip_ws();
            if self.text.get(self.pos) == Some(&b'*') {
                self.pos += 1;
            } else {
                return Ok((coeff, vars));
            }
        }
    }
}

/// Parses `text` into a GBF over `Z_q` on `m` variables.
pub fn parse_gbf_expr(text: &str, q: u32, m: usize) -> Result<Gbf, ExprError> {
    // validates q before parsing so the modulus is usable below
    let mut g = Gbf::zero(q, m)?;
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        q: u64::from(q),
        m,
    };
    let mut acc: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    loop {
        let (coeff, vars) = p.term()?;
        let entry = acc.entry(vars.into_iter().collect()).or_insert(0);
        *entry = (*entry + coeff) % p.q;
        p.skip_ws();
        match p.text.get(p.pos) {
            Some(b'+') => p.pos += 1,
            None => break,
            Some(&c) => return p.syntax(format!("expected '+' or '*', found '{}'", c as char)),
        }
    }
    for (vars, coeff) in acc.into_iter().filter(|&(_, c)| c != 0) {
        match vars.as_slice() {
            [] => g.add_const(coeff),
            &[i] => g.add_lin(i, coeff)?,
            &[i, j] => g.add_quad(i, j, coeff)?,
            more => {
                return Err(ExprError::Degree {
                    term: more.iter().map(|i| format!("y{i}")).collect::<Vec<_>>().join("*"),
                    degree: more.len(),
                })
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_function() {
        let g = parse_gbf_expr("y1*y2+y0", 2, 3).unwrap();
        assert_eq!(g.quad_coeff(1, 2), 1);
        assert_eq!(g.lin_coeff(0), 1);
        assert_eq!(g.quad_terms().len(), 1);
        assert_eq!(g.lin_terms().len(), 1);
        assert_eq!(g.constant(), 0);
    }

    #[test]
    fn reductions() {
        let g = parse_gbf_expr("y0*y0", 2, 1).unwrap();
        assert_eq!(g, Gbf::new(2, 1, [], [(0, 1)], 0).unwrap());
        // y0*y1 + y1*y0 vanishes mod 2
        let g = parse_gbf_expr(" y0 * y1 + y1*y0 + 3 ", 2, 2).unwrap();
        assert_eq!(g, Gbf::new(2, 2, [], [], 1).unwrap());
        let g = parse_gbf_expr("3*y0*2*y1+5", 4, 2).unwrap();
        assert_eq!(g, Gbf::new(4, 2, [((0, 1), 2)], [], 1).unwrap());
        // a cubic term with a vanishing coefficient is fine
        assert!(parse_gbf_expr("2*y0*y1*y2+y0", 2, 3).is_ok());
        assert_eq!(parse_gbf_expr("0", 2, 2).unwrap(), Gbf::zero(2, 2).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_gbf_expr("y0*y1*y2", 2, 3),
            Err(ExprError::Degree { degree: 3, .. })
        ));
        assert!(matches!(
            parse_gbf_expr("y0+y3", 2, 3),
            Err(ExprError::UnknownVariable { index: 3, pos: 3, .. })
        ));
        assert!(matches!(parse_gbf_expr("y0+", 2, 3), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_gbf_expr("y0 y1", 2, 3), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_gbf_expr("x1", 2, 3), Err(ExprError::Syntax { pos: 0, .. })));
        assert!(matches!(parse_gbf_expr("y", 2, 3), Err(ExprError::Syntax { pos: 1, .. })));
        assert!(matches!(parse_gbf_expr("", 2, 3), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_gbf_expr("y0", 3, 3), Err(ExprError::Gbf(_))));
    }
}
