//! Sparse multivariate polynomials with integer coefficients.
//!
//! Coefficients are arbitrary-size integers, reduced into Z/p^m or F_q only
//! at evaluation time, so one polynomial serves every prime.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ring::{ExtField, Fq};
use crate::support::SupportScheme;

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    /// The variable x_{i+1} (0-based index i).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        let key = Monomial(exps);
        let entry = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&Monomial(vec![0; self.nvars]))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// Variables (0-based) that occur with positive exponent.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    /// Same polynomial viewed in `n ≥ nvars` variables.
    pub fn extend_vars(&self, n: usize) -> Self {
        self.shift_vars(n, 0)
    }

    /// Re-index x_i ↦ x_{i+offset} inside `n` variables.
    pub fn shift_vars(&self, n: usize, offset: usize) -> Self {
        assert!(n >= self.nvars + offset);
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0; n];
            e[offset..offset + self.nvars].copy_from_slice(&m.0);
            (e, c.clone())
        });
        MPoly::from_terms(n, terms)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.0.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut r = MPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let e: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                r.add_term(e, ca * cb);
            }
        }
        r
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        MPoly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.0.clone(), c * k)))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = MPoly::constant(self.nvars, 1);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Content: gcd of all coefficients (0 for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn derivative(&self, i: usize) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.0[i] > 0).map(|(m, c)| {
            let mut e = m.0.clone();
            let k = e[i];
            e[i] -= 1;
            (e, c * BigInt::from(k))
        });
        MPoly::from_terms(self.nvars, terms)
    }

    pub fn gradient(&self) -> Vec<MPoly> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// f(g_1, …, g_n) for polynomials g_i in a common number of variables.
    pub fn compose(&self, subs: &[MPoly]) -> MPoly {
        assert_eq!(subs.len(), self.nvars);
        let m = subs.first().map(|g| g.nvars).unwrap_or(0);
        let mut r = MPoly::zero(m);
        let mut cache: Vec<Vec<MPoly>> = subs.iter().map(|g| vec![MPoly::constant(m, 1), g.clone()]).collect();
        for (mono, c) in &self.terms {
            let mut t = MPoly::constant(m, c.clone());
            for (i, &k) in mono.0.iter().enumerate() {
                while cache[i].len() <= k as usize {
                    let next = cache[i].last().unwrap().mul(&subs[i]);
                    cache[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&cache[i][k as usize]);
                }
            }
            r = r.add(&t);
        }
        r
    }

    /// Exact evaluation over the integers.
    pub fn eval_int(&self, x: &[BigInt]) -> Result<BigInt> {
        self.check_dim(x.len())?;
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(&m.0) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluation in Z/n.
    pub fn eval_mod(&self, x: &[u64], n: u64) -> Result<u64> {
        self.check_dim(x.len())?;
        Ok(CompiledMod::new(self, n).eval(x))
    }

    /// Evaluation in F_q; integer coefficients map through the prime field.
    pub fn eval_field(&self, k: &ExtField, x: &[Fq]) -> Result<Fq> {
        self.check_dim(x.len())?;
        Ok(CompiledField::new(self, k).eval(k, x))
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.nvars {
            return Err(Error::Invalid(format!(
                "point has {} coordinates, polynomial has {} variables",
                len, self.nvars
            )));
        }
        Ok(())
    }

    /// Parse with the number of variables inferred from the largest index.
    pub fn parse(s: &str) -> Result<Self> {
        let terms = parse_terms(s)?;
        let n = terms.iter().flat_map(|(_, v)| v.iter().map(|(i, _)| i + 1)).max().unwrap_or(1);
        Ok(Self::assemble(n, terms))
    }

    /// Parse into exactly `n` variables.
    pub fn parse_in(s: &str, n: usize) -> Result<Self> {
        let terms = parse_terms(s)?;
        if let Some(i) = terms.iter().flat_map(|(_, v)| v.iter().map(|(i, _)| *i)).max() {
            if i >= n {
                return Err(Error::Parse(format!("variable x{} outside {} variables", i + 1, n)));
            }
        }
        Ok(Self::assemble(n, terms))
    }

    fn assemble(n: usize, terms: Vec<(BigInt, Vec<(usize, u32)>)>) -> Self {
        let mut p = MPoly::zero(n);
        for (c, vars) in terms {
            let mut e = vec![0u32; n];
            for (i, k) in vars {
                e[i] += k;
            }
            p.add_term(e, c);
        }
        p
    }
}

type ParsedTerm = (BigInt, Vec<(usize, u32)>);

fn parse_terms(s: &str) -> Result<Vec<ParsedTerm>> {
    let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    let mut first = true;
    while pos < bytes.len() {
        let mut sign = BigInt::one();
        if bytes[pos] == b'+' || bytes[pos] == b'-' {
            if bytes[pos] == b'-' {
                sign = -sign;
            }
            pos += 1;
        } else if !first {
            return Err(Error::Parse(format!("expected '+' or '-' at position {} in '{}'", pos, text)));
        }
        first = false;
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'+' || b == b'-')
            .map(|k| pos + k)
            .unwrap_or(bytes.len());
        let term = &text[pos..end];
        if term.is_empty() {
            return Err(Error::Parse(format!("empty term in '{}'", text)));
        }
        let mut coef = sign;
        let mut vars = Vec::new();
        for factor in term.split('*') {
            parse_factor(factor, &mut coef, &mut vars)?;
        }
        out.push((coef, vars));
        pos = end;
    }
    Ok(out)
}

fn parse_factor(f: &str, coef: &mut BigInt, vars: &mut Vec<(usize, u32)>) -> Result<()> {
    let err = || Error::Parse(format!("bad factor '{}'", f));
    if f.is_empty() {
        return Err(err());
    }
    if f.chars().all(|c| c.is_ascii_digit()) {
        *coef *= BigInt::from_str(f).map_err(|_| err())?;
        return Ok(());
    }
    let (base, exp) = match f.split_once('^') {
        Some((b, e)) => (b, e.parse::<u32>().map_err(|_| err())?),
        None => (f, 1),
    };
    let idx = match base {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        _ => {
            let digits = base.strip_prefix('x').ok_or_else(err)?;
            let i: usize = digits.parse().map_err(|_| err())?;
            if i == 0 {
                return Err(err());
            }
            i - 1
        }
    };
    vars.push((idx, exp));
    Ok(())
}

impl FromStr for MPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MPoly::parse(s)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            let neg = c.is_negative();
            let a = c.abs();
            if k > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            if mono.is_empty() {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", a, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly[{}]({})", self.nvars, self)
    }
}

/// Points of Z(F_q) where every partial derivative vanishes, with the
/// critical values f(x) at those points.
pub fn critical_residues(f: &MPoly, k: &ExtField, z: &SupportScheme) -> Result<Vec<(Vec<Fq>, Fq)>> {
    let n = f.nvars();
    let grad: Vec<CompiledField> = f.gradient().iter().map(|g| CompiledField::new(g, k)).collect();
    let fc = CompiledField::new(f, k);
    let mut out = Vec::new();
    for x in z.points(k, n)? {
        if grad.iter().all(|g| g.eval(k, &x) == 0) {
            let v = fc.eval(k, &x);
            out.push((x, v));
        }
    }
    Ok(out)
}

/// A polynomial compiled for fast evaluation in Z/n.
#[derive(Clone, Debug)]
pub struct CompiledMod {
    n: u64,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

fn reduce_big(c: &BigInt, n: u64) -> u64 {
    let m = BigInt::from(n);
    c.mod_floor(&m).to_u64().unwrap()
}

impl CompiledMod {
    pub fn new(f: &MPoly, n: u64) -> Self {
        let terms = f
            .terms
            .iter()
            .map(|(m, c)| {
                let vars = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect();
                (reduce_big(c, n), vars)
            })
            .filter(|(c, _)| *c != 0)
            .collect();
        CompiledMod { n, terms }
    }

    #[inline]
    pub fn eval(&self, x: &[u64]) -> u64 {
        let n = self.n as u128;
        let mut acc: u128 = 0;
        for (c, vars) in &self.terms {
            let mut t = *c as u128;
            for &(i, e) in vars {
                let xi = x[i] as u128 % n;
                for _ in 0..e {
                    t = t * xi % n;
                }
            }
            acc += t;
        }
        (acc % n) as u64
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A polynomial compiled for fast evaluation in F_q.
#[derive(Clone, Debug)]
pub struct CompiledField {
    terms: Vec<(Fq, Vec<(usize, u32)>)>,
}

impl CompiledField {
    pub fn new(f: &MPoly, k: &ExtField) -> Self {
        let terms = f
            .terms
            .iter()
            .map(|(m, c)| {
                let vars = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect();
                (reduce_big(c, k.p()) as Fq, vars)
            })
            .filter(|(c, _)| *c != 0)
            .collect();
        CompiledField { terms }
    }

    /// Compile with every coefficient multiplied by a field scalar.
    pub fn scaled(f: &MPoly, k: &ExtField, s: Fq) -> Self {
        let mut c = Self::new(f, k);
        for t in c.terms.iter_mut() {
            t.0 = k.mul(t.0, s);
        }
        c.terms.retain(|t| t.0 != 0);
        c
    }

    /// Sum of compiled polynomials (term lists concatenated).
    pub fn concat(parts: Vec<CompiledField>) -> Self {
        CompiledField { terms: parts.into_iter().flat_map(|p| p.terms).collect() }
    }

    #[inline]
    pub fn eval(&self, k: &ExtField, x: &[Fq]) -> Fq {
        let mut acc: Fq = 0;
        'terms: for (c, vars) in &self.terms {
            let mut t = *c;
            for &(i, e) in vars {
                let xi = x[i];
                if xi == 0 {
                    continue 'terms;
                }
                t = k.mul(t, if e == 1 { xi } else { k.pow(xi, e as u64) });
            }
            acc = k.add(acc, t);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest variable index used, plus one.
    pub fn var_bound(&self) -> usize {
        self.terms.iter().flat_map(|(_, v)| v.iter().map(|(i, _)| i + 1)).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MPoly {
        MPoly::parse(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("x1*x2").eval_mod(&[2, 3], 25).unwrap(), 6);
        assert_eq!(p("x1^2+x2^3").eval_mod(&[0, 0], 49).unwrap(), 0);
        assert_eq!(p("x1^2+x2^3").eval_mod(&[1, 2], 49).unwrap(), 9);
    }

    #[test]
    fn gradients() {
        assert_eq!(p("x1^2").gradient(), vec![p("2*x1")]);
        assert_eq!(p("x1*x2").gradient(), vec![p("x2"), p("x1").extend_vars(2)]);
        assert_eq!(p("x1^2+x2^3").gradient(), vec![p("2*x1").extend_vars(2), p("3*x2^2")]);
        assert!(MPoly::constant(3, 7).gradient().iter().all(|g| g.is_zero()));
    }

    #[test]
    fn roundtrip() {
        for s in ["x1^2 + x2^3", "-3*x1*x2 + 2", "x1^3 - 3*x1", "7", "x1^3+x1*x2^3", "-x2 - x1 + x1^2*x3^4"] {
            let f = p(s);
            let g = p(&f.to_string());
            assert_eq!(f, g, "{} -> {}", s, f);
        }
        assert_eq!(p("x1^2+x2^3").to_string(), "x2^3 + x1^2");
    }

    #[test]
    fn whitespace_and_aliases() {
        assert_eq!(p(" x ^ 2 + y ^ 3 "), p("x1^2+x2^3"));
        assert!(MPoly::parse("x1^").is_err());
        assert!(MPoly::parse("x0").is_err());
        assert!(MPoly::parse("x1 x2").is_err());
    }

    #[test]
    fn compose_matches_eval() {
        let f = p("x1^2*x2 + 3*x2");
        let g = vec![p("x1+x2"), p("x1*x2 - 1")];
        let h = f.compose(&g);
        for a in 0..5u64 {
            for b in 0..5u64 {
                let inner = [g[0].eval_mod(&[a, b], 101).unwrap(), g[1].eval_mod(&[a, b], 101).unwrap()];
                assert_eq!(h.eval_mod(&[a, b], 101).unwrap(), f.eval_mod(&inner, 101).unwrap());
            }
        }
    }

    #[test]
    fn field_eval() {
        let k = ExtField::new(7, 1).unwrap();
        assert_eq!(p("x1^3 - 3*x1").eval_field(&k, &[2]).unwrap(), 2);
    }

    #[test]
    fn critical_points() {
        let k5 = ExtField::new(5, 1).unwrap();
        assert!(critical_residues(&p("x1"), &k5, &SupportScheme::Full).unwrap().is_empty());
        let cusp = critical_residues(&p("x1^2+x2^3"), &k5, &SupportScheme::Full).unwrap();
        assert_eq!(cusp, vec![(vec![0, 0], 0)]);
        let k7 = ExtField::new(7, 1).unwrap();
        let cubic = critical_residues(&p("x1^3-3*x1"), &k7, &SupportScheme::Full).unwrap();
        assert_eq!(cubic, vec![(vec![1], 5), (vec![6], 2)]);
        // brute-force oracle over all 7 points
        let f = p("x1^3-3*x1");
        let df = f.derivative(0);
        let brute: Vec<u64> = (0..7).filter(|&x| df.eval_mod(&[x], 7).unwrap() == 0).collect();
        assert_eq!(brute, vec![1, 6]);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(p("x1*x2").eval_mod(&[1], 5).is_err());
    }
}
