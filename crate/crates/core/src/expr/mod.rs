//! Multivariate polynomials over exact rationals.
//!
//! Expressions are stored fully expanded as a map from monomials to
//! nonzero coefficients. Variables are `x1..xn` followed by `y1..ym`;
//! a variable index in `0..n` refers to an x, in `n..n+m` to a y.
//! Monomials are ordered graded-lexicographically, which fixes printing
//! and makes equality a plain term-map comparison.

mod matrix;
mod parse;

pub use matrix::RationalMatrix;
pub use parse::parse_expr;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rat::{fmt_rat, rat_to_f64, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown variable `{name}` at position {position} (arity n={n}, m={m})")]
    UnknownVariable {
        name: String,
        position: usize,
        n: usize,
        m: usize,
    },
    #[error("exponent at position {position} must be a nonnegative integer")]
    BadExponent { position: usize },
    #[error("arity mismatch: expected {expected} variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
}

/// Exponent vector of length n+m. Ordered graded-lexicographically:
/// lower total degree first, ties broken by the exponent vector itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn variable(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Indices of variables with positive exponent.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
            .collect()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in the variables `x1..xn, y1..ym` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyExpr {
    arity: (usize, usize),
    terms: BTreeMap<Monomial, Rat>,
}

impl PolyExpr {
    pub fn zero(arity: (usize, usize)) -> Self {
        PolyExpr {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: (usize, usize), value: Rat) -> Self {
        let mut p = PolyExpr::zero(arity);
        if !value.is_zero() {
            p.terms.insert(Monomial::constant(p.num_vars()), value);
        }
        p
    }

    pub fn variable(arity: (usize, usize), index: usize) -> Result<Self, ExprError> {
        let nvars = arity.0 + arity.1;
        if index >= nvars {
            return Err(ExprError::VariableOutOfRange { index, nvars });
        }
        let mut p = PolyExpr::zero(arity);
        p.terms.insert(Monomial::variable(nvars, index), Rat::one());
        Ok(p)
    }

    pub fn from_terms(
        arity: (usize, usize),
        terms: impl IntoIterator<Item = (Monomial, Rat)>,
    ) -> Self {
        let mut p = PolyExpr::zero(arity);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn arity(&self) -> (usize, usize) {
        self.arity
    }

    pub fn num_vars(&self) -> usize {
        self.arity.0 + self.arity.1
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coefficient(&Monomial::constant(self.num_vars()))
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.degree() <= 1
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn pow(&self, exp: u32) -> PolyExpr {
        let mut acc = PolyExpr::constant(self.arity, Rat::one());
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Exact partial derivative with respect to variable `var`.
    pub fn differentiate(&self, var: usize) -> Result<PolyExpr, ExprError> {
        let nvars = self.num_vars();
        if var >= nvars {
            return Err(ExprError::VariableOutOfRange { index: var, nvars });
        }
        let mut out = PolyExpr::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] = e - 1;
            out.add_term(Monomial(exps), c * Rat::from_integer(e.into()));
        }
        Ok(out)
    }

    /// All partial derivatives in variable order.
    pub fn gradient(&self) -> Vec<PolyExpr> {
        (0..self.num_vars())
            .map(|v| self.differentiate(v).expect("in-range variable"))
            .collect()
    }

    pub fn evaluate(&self, z: &[Rat]) -> Result<Rat, ExprError> {
        if z.len() != self.num_vars() {
            return Err(ExprError::ArityMismatch {
                expected: self.num_vars(),
                got: z.len(),
            });
        }
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term *= z[i].pow(e as i32);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Gradient evaluated at a point.
    pub fn gradient_at(&self, z: &[Rat]) -> Result<Vec<Rat>, ExprError> {
        (0..self.num_vars())
            .map(|v| self.differentiate(v)?.evaluate(z))
            .collect()
    }

    /// Floating evaluation, used only by sampling oracles.
    pub fn eval_f64(&self, z: &[f64]) -> f64 {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut term = rat_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    term *= z[i];
                }
            }
            total += term;
        }
        total
    }

    /// Substitutes z -> center + z, i.e. re-expands the polynomial around
    /// `center` so that the new origin sits at the old `center`.
    pub fn translate(&self, center: &[Rat]) -> Result<PolyExpr, ExprError> {
        if center.len() != self.num_vars() {
            return Err(ExprError::ArityMismatch {
                expected: self.num_vars(),
                got: center.len(),
            });
        }
        let nvars = self.num_vars();
        let mut out = PolyExpr::zero(self.arity);
        for (m, c) in &self.terms {
            let mut term = PolyExpr::constant(self.arity, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut shifted = PolyExpr::zero(self.arity);
                shifted.add_term(Monomial::variable(nvars, i), Rat::one());
                shifted.add_term(Monomial::constant(nvars), center[i].clone());
                term = &term * &shifted.pow(e);
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Replaces variable `var` by `replacement` and re-expands.
    pub fn substitute(&self, var: usize, replacement: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.arity, replacement.arity());
        let mut out = PolyExpr::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.0[var];
            let mut exps = m.0.clone();
            exps[var] = 0;
            let base = PolyExpr::from_terms(self.arity, [(Monomial(exps), c.clone())]);
            let term = if e == 0 {
                base
            } else {
                &base * &replacement.pow(e)
            };
            out = &out + &term;
        }
        out
    }

    /// Widens the arity to `(n2, m2)`, keeping variable indices. Requires
    /// n2 >= n and n2+m2 >= n+m; x-variables keep their slots, y-variables
    /// shift to stay in the y-block.
    pub fn widen(&self, n2: usize, m2: usize) -> PolyExpr {
        let (n, m) = self.arity;
        assert!(n2 >= n && m2 >= m, "widen cannot shrink arity");
        let mut out = PolyExpr::zero((n2, m2));
        for (mono, c) in &self.terms {
            let mut exps = vec![0u32; n2 + m2];
            for (i, &e) in mono.0.iter().enumerate() {
                let target = if i < n { i } else { i - n + n2 };
                exps[target] = e;
            }
            out.add_term(Monomial(exps), c.clone());
        }
        out
    }

    /// Name of variable `index` under this polynomial's arity.
    pub fn var_name(arity: (usize, usize), index: usize) -> String {
        if index < arity.0 {
            format!("x{}", index + 1)
        } else {
            format!("y{}", index - arity.0 + 1)
        }
    }
}

impl Add for &PolyExpr {
    type Output = PolyExpr;
    fn add(self, rhs: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.arity, rhs.arity);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &PolyExpr {
    type Output = PolyExpr;
    fn sub(self, rhs: &PolyExpr) -> PolyExpr {
        self + &(-rhs)
    }
}

impl Neg for &PolyExpr {
    type Output = PolyExpr;
    fn neg(self) -> PolyExpr {
        PolyExpr {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c))
                .collect(),
        }
    }
}

impl Mul for &PolyExpr {
    type Output = PolyExpr;
    fn mul(self, rhs: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.arity, rhs.arity);
        let mut out = PolyExpr::zero(self.arity);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul<&Rat> for &PolyExpr {
    type Output = PolyExpr;
    fn mul(self, rhs: &Rat) -> PolyExpr {
        if rhs.is_zero() {
            return PolyExpr::zero(self.arity);
        }
        PolyExpr {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * rhs))
                .collect(),
        }
    }
}

impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest graded-lex monomial first.
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_constant() {
                factors.push(fmt_rat(&mag));
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = PolyExpr::var_name(self.arity, i);
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{}^{}", name, e));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Jacobian of `ps` restricted to the variable indices in `vars`,
/// evaluated at `z`. Row i is the restricted gradient of `ps[i]`.
pub fn jacobian(
    ps: &[PolyExpr],
    vars: std::ops::Range<usize>,
    z: &[Rat],
) -> Result<RationalMatrix, ExprError> {
    let cols = vars.len();
    let mut rows = Vec::with_capacity(ps.len());
    for p in ps {
        let mut row = Vec::with_capacity(cols);
        for v in vars.clone() {
            row.push(p.differentiate(v)?.evaluate(z)?);
        }
        rows.push(row);
    }
    Ok(RationalMatrix::from_rows_with_width(rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn p(text: &str, arity: (usize, usize)) -> PolyExpr {
        parse_expr(text, arity).unwrap()
    }

    #[test]
    fn parse_builds_expected_terms() {
        // From the complementarity example F1 = x^2 + x + y1.
        let e = p("x1^2 + x1 + y1", (1, 2));
        assert_eq!(e.num_terms(), 3);
        assert_eq!(e.coefficient(&Monomial(vec![2, 0, 0])), rat(1));
        assert_eq!(e.coefficient(&Monomial(vec![1, 0, 0])), rat(1));
        assert_eq!(e.coefficient(&Monomial(vec![0, 1, 0])), rat(1));
    }

    #[test]
    fn parse_zero_gives_empty_term_map() {
        let e = p("0", (1, 1));
        assert!(e.is_zero());
        assert_eq!(e.num_terms(), 0);
    }

    #[test]
    fn negative_exponent_rejected() {
        let err = parse_expr("x1^(-1)", (1, 1)).unwrap_err();
        assert!(matches!(err, ExprError::BadExponent { .. }));
    }

    #[test]
    fn differentiate_matches_hand_derivative() {
        let e = p("x1^2+x1+y1", (1, 2));
        let d = e.differentiate(0).unwrap();
        assert_eq!(d, p("2*x1+1", (1, 2)));
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let e = p("5", (1, 1));
        assert!(e.differentiate(1).unwrap().is_zero());
    }

    #[test]
    fn cubic_derivative_vanishes_at_origin() {
        let e = p("x1^3+y2", (1, 2));
        let d = e.differentiate(0).unwrap();
        let v = d
            .evaluate(&[rat(0), rat(0), rat(0)])
            .unwrap();
        assert_eq!(v, rat(0));
    }

    #[test]
    fn evaluate_examples() {
        let e = p("x1^2+x1+y1", (1, 2));
        assert_eq!(e.evaluate(&[rat(0), rat(0), rat(0)]).unwrap(), rat(0));

        let lin = p("2*x1+1", (1, 0));
        assert_eq!(lin.evaluate(&[rat(2)]).unwrap(), rat(5));

        // g1 of the projection problem, active at ((2,0),(1,0)).
        let g1 = p("y1^2+y2^2-1", (2, 2));
        let z = [rat(2), rat(0), rat(1), rat(0)];
        assert_eq!(g1.evaluate(&z).unwrap(), rat(0));
    }

    #[test]
    fn evaluate_length_mismatch_is_error() {
        let e = p("x1", (1, 1));
        assert!(matches!(
            e.evaluate(&[rat(1)]),
            Err(ExprError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn jacobian_of_negated_identity() {
        let g = vec![p("-y1", (2, 2)), p("-y2", (2, 2))];
        let z = vec![rat(3), rat(1), rat(0), rat(0)];
        let j = jacobian(&g, 2..4, &z).unwrap();
        assert_eq!(j.rows(), 2);
        assert_eq!(j.cols(), 2);
        assert_eq!(*j.at(0, 0), rat(-1));
        assert_eq!(*j.at(0, 1), rat(0));
        assert_eq!(*j.at(1, 0), rat(0));
        assert_eq!(*j.at(1, 1), rat(-1));
    }

    #[test]
    fn jacobian_of_empty_list() {
        let j = jacobian(&[], 0..3, &[rat(0), rat(0), rat(0)]).unwrap();
        assert_eq!(j.rows(), 0);
        assert_eq!(j.cols(), 3);
    }

    #[test]
    fn jacobian_of_identity_shift() {
        // d/dy of (y1-x1, y2-x2) is the identity at any point.
        let g = vec![p("y1-x1", (2, 2)), p("y2-x2", (2, 2))];
        let z = vec![rat(7), ratio(1, 3), rat(-2), rat(5)];
        let j = jacobian(&g, 2..4, &z).unwrap();
        assert_eq!(*j.at(0, 0), rat(1));
        assert_eq!(*j.at(1, 1), rat(1));
        assert_eq!(*j.at(0, 1), rat(0));
    }

    #[test]
    fn display_round_trips() {
        let e = p("x1^2 - 1/2*x1*y1 + 3 - y2^3", (1, 2));
        let printed = e.to_string();
        let reparsed = parse_expr(&printed, (1, 2)).unwrap();
        assert_eq!(e, reparsed);
    }

    #[test]
    fn translate_recentres_polynomial() {
        // (x+1)^2 expanded: translate x^2 by center 1.
        let e = p("x1^2", (1, 0));
        let t = e.translate(&[rat(1)]).unwrap();
        assert_eq!(t, p("x1^2 + 2*x1 + 1", (1, 0)));
        // Value at 0 after translation equals value at the center before.
        assert_eq!(t.evaluate(&[rat(0)]).unwrap(), e.evaluate(&[rat(1)]).unwrap());
    }

    #[test]
    fn widen_keeps_blocks_aligned() {
        let e = p("x1*y1", (1, 1));
        let w = e.widen(1, 2);
        assert_eq!(w, p("x1*y1", (1, 2)));
    }
}
