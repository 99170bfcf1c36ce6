//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

pub type Exponents = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, Q>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn monomial(exps: Exponents, c: Q) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The linear form `sum_i coeffs[i] x_i`.
    pub fn linear(coeffs: &[Q]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    /// The quadratic form `1/2 x^T m x` for a symmetric matrix `m`.
    pub fn half_quadratic_form(m: &[Vec<Q>]) -> Self {
        let n = m.len();
        let half = rational::qf(1, 2);
        let mut p = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                if m[i][j].is_zero() {
                    continue;
                }
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                p.add_term(e, &half * &m[i][j]);
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| total_degree(e)).max()
    }

    pub fn coefficient(&self, exps: &[u16]) -> Q {
        self.terms.get(exps).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, exps: Exponents, c: Q) {
        assert_eq!(exps.len(), self.nvars, "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * Q::from_integer(e[i].into()));
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .filter(|(k, _)| **k > 0)
                    .fold(rational::to_f64(c), |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    pub fn eval_q(&self, x: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&k, xi) in e.iter().zip(x) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes `x_i = sum_j subs[i][j] y_j`, producing a polynomial in `subs[0].len()` variables.
    pub fn linear_substitution(&self, subs: &[Vec<Q>]) -> Self {
        assert_eq!(subs.len(), self.nvars, "substitution size mismatch");
        let m = subs.first().map_or(0, Vec::len);
        let forms: Vec<Polynomial> = subs.iter().map(|row| Polynomial::linear(row)).collect();
        let mut out = Polynomial::zero(m);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = &t * &forms[i];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Drops or appends variables: variable `i` of the result is variable `map[i]` of `self`.
    /// Fails if a dropped variable occurs.
    pub fn restrict_variables(&self, map: &[usize]) -> Option<Self> {
        let mut out = Polynomial::zero(map.len());
        for (e, c) in &self.terms {
            let kept: u32 = map.iter().map(|&i| e[i] as u32).sum();
            if kept as usize != total_degree(e) {
                return None;
            }
            out.add_term(map.iter().map(|&i| e[i]).collect(), c.clone());
        }
        Some(out)
    }

    /// Parses expressions such as `"1/2*p3^2 + p1*p5 - p2*p4"` with variables `{prefix}1..{prefix}n`.
    pub fn parse(nvars: usize, text: &str, prefix: &str) -> Result<Self> {
        let mut parser = Parser { src: text.as_bytes(), pos: 0, nvars, prefix: prefix.as_bytes() };
        let p = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(p)
    }

    pub fn display_with<'a>(&'a self, prefix: &'a str) -> impl fmt::Display + 'a {
        DisplayPoly { poly: self, prefix }
    }

    /// Primitive integer multiple with positive leading coefficient.
    pub fn normalized(&self) -> Self {
        let coeffs: Vec<Q> = self.sorted_terms().iter().map(|(_, c)| (*c).clone()).collect();
        let prim = rational::primitive(&coeffs);
        let factor = match (coeffs.first(), prim.first()) {
            (Some(c), Some(p)) if !c.is_zero() => p / c,
            _ => return self.clone(),
        };
        self.scale(&factor)
    }

    /// Terms ordered by total degree descending, then lexicographically descending.
    pub fn sorted_terms(&self) -> Vec<(&Exponents, &Q)> {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| monomial_order(b.0, a.0));
        terms
    }
}

pub fn total_degree(e: &[u16]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

/// Graded lexicographic comparison.
pub fn monomial_order(a: &[u16], b: &[u16]) -> Ordering {
    total_degree(a).cmp(&total_degree(b)).then_with(|| a.cmp(b))
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Q::one())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

struct DisplayPoly<'a> {
    poly: &'a Polynomial,
    prefix: &'a str,
}

impl fmt::Display for DisplayPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.poly.sorted_terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (idx, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("{}{}", self.prefix, i + 1)
                    } else {
                        format!("{}{}^{}", self.prefix, i + 1, k)
                    }
                })
                .collect();
            if factors.is_empty() {
                f.write_str(&rational::format_rational(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", rational::format_rational(&abs))?;
                }
                f.write_str(&factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display_with("p").fmt(f)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    prefix: &'a [u8],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "{msg} at offset {} in {:?}",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.factor()?;
                    if !d.is_constant() || d.is_zero() {
                        return Err(self.error("division by a non-constant or zero"));
                    }
                    let c = d.coefficient(&vec![0; self.nvars]);
                    acc = acc.scale(&(Q::one() / c));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.error("expected exponent"))?;
            let mut out = Polynomial::constant(self.nvars, Q::one());
            for _ in 0..k {
                out = &out * &base;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Ok(Polynomial::constant(self.nvars, rational::parse_rational(text)?))
            }
            Some(_) if self.src[self.pos..].starts_with(self.prefix) => {
                self.pos += self.prefix.len();
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let idx: usize = std::str::from_utf8(&self.src[start..self.pos])
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| self.error("expected variable index"))?;
                if idx == 0 || idx > self.nvars {
                    return Err(self.error("variable index out of range"));
                }
                Ok(Polynomial::var(self.nvars, idx - 1))
            }
            _ => Err(self.error("unexpected token")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn parse_and_display_roundtrip() {
        let p = Polynomial::parse(5, "1/2*p3^2 + p1*p5 - p2*p4", "p").unwrap();
        assert_eq!(p.to_string(), "p1*p5 - p2*p4 + 1/2*p3^2");
        let again = Polynomial::parse(5, &p.to_string(), "p").unwrap();
        assert_eq!(p, again);
        assert!(Polynomial::parse(2, "p3", "p").is_err());
        assert!(Polynomial::parse(2, "p1 +", "p").is_err());
    }

    #[test]
    fn arithmetic_and_derivative() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x * &x) + &(&x * &y);
        assert_eq!(p.derivative(0), &(&x + &x) + &y);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(&[2.0, 3.0]), 10.0);
        assert_eq!(p.eval_q(&[qf(1, 2), q(1)]), qf(3, 4));
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn substitution_matches_evaluation() {
        let p = Polynomial::parse(2, "p1^2 - 3*p1*p2", "p").unwrap();
        let subs = vec![vec![q(1), q(1)], vec![q(2), q(-1)]];
        let s = p.linear_substitution(&subs);
        let (a, b) = (q(3), q(-2));
        let x = vec![&a + &b, q(2) * &a - &b];
        assert_eq!(s.eval_q(&[a, b]), p.eval_q(&x));
    }

    #[test]
    fn normalized_has_primitive_coefficients() {
        let p = Polynomial::parse(2, "-1/2*p1^2 - 1/3*p2", "p").unwrap();
        assert_eq!(p.normalized().to_string(), "3*p1^2 + 2*p2");
    }
}
