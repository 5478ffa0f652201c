//! Denef's formula for the zeta function from numerical data of an embedded
//! resolution with good reduction, closed-form data for monomials, and exact
//! cross-checks against the lifting-tree series.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{divisors, gcd, pow_u64};
use crate::charsum::MultChar;
use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::ring::{CycloValue, ExtField};
use crate::support::{odometer, SupportScheme};
use crate::zeta::{factor_denominator, zeta_series, DenFactor, RationalZeta};

/// Numerical data (N_i, ν_i) and point counts c_{I,Φ,χ} keyed by (I, χ id).
#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionData {
    pub q: u64,
    pub n: usize,
    pub divisors: Vec<(u32, u32)>,
    pub counts: BTreeMap<(Vec<usize>, String), CycloValue>,
}

impl ResolutionData {
    pub fn new(q: u64, n: usize, divisors: Vec<(u32, u32)>) -> Result<Self> {
        if divisors.iter().any(|&(nn, nu)| nn == 0 || nu == 0) {
            return Err(Error::Invalid("numerical data must be positive".into()));
        }
        Ok(ResolutionData { q, n, divisors, counts: BTreeMap::new() })
    }

    pub fn set_count(&mut self, subset: &[usize], chi: &str, value: CycloValue) {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        self.counts.insert((s, chi.to_string()), value);
    }

    pub fn count(&self, subset: &[usize], chi: &str) -> Option<&CycloValue> {
        self.counts.get(&(subset.to_vec(), chi.to_string()))
    }

    /// Subsets I with d | N_i for all i ∈ I, in increasing bitmask order.
    pub fn admissible_subsets(&self, d: u64) -> Vec<Vec<usize>> {
        let t = self.divisors.len();
        let ok: Vec<usize> = (0..t).filter(|&i| (self.divisors[i].0 as u64).is_multiple_of(d)).collect();
        (0u64..(1u64 << ok.len()))
            .map(|mask| ok.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i).collect())
            .collect()
    }

    /// Parse the text format:
    ///
    /// ```text
    /// q=7
    /// n=2
    /// [divisor 0]
    /// N=6
    /// nu=5
    /// [count I=0,3 chi=trivial]
    /// value=1
    /// ```
    ///
    /// Values are rationals or `zeta<d>:c0,c1,...` for Σ c_j ζ_d^j.
    pub fn parse(text: &str) -> Result<Self> {
        let mut q = None;
        let mut n = None;
        let mut divs: BTreeMap<usize, (Option<u32>, Option<u32>)> = BTreeMap::new();
        let mut counts = Vec::new();
        enum Block {
            Top,
            Divisor(usize),
            Count(Vec<usize>, String),
        }
        let mut block = Block::Top;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse(format!("line {}: {}", ln + 1, m));
            if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let mut words = inner.split_whitespace();
                match words.next() {
                    Some("divisor") => {
                        let i = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| err("bad divisor index"))?;
                        divs.entry(i).or_insert((None, None));
                        block = Block::Divisor(i);
                    }
                    Some("count") => {
                        let mut subset = None;
                        let mut chi = None;
                        for w in words {
                            if let Some(s) = w.strip_prefix("I=") {
                                let v: std::result::Result<Vec<usize>, _> =
                                    s.split(',').filter(|x| !x.is_empty()).map(|x| x.parse()).collect();
                                subset = Some(v.map_err(|_| err("bad subset"))?);
                            } else if let Some(c) = w.strip_prefix("chi=") {
                                chi = Some(c.to_string());
                            } else {
                                return Err(err("unknown count attribute"));
                            }
                        }
                        block = Block::Count(subset.unwrap_or_default(), chi.unwrap_or_else(|| "trivial".into()));
                    }
                    _ => return Err(err("unknown block")),
                }
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| err("expected key=value"))?;
            let (key, val) = (key.trim(), val.trim());
            match (&block, key) {
                (Block::Top, "q") => q = Some(val.parse::<u64>().map_err(|_| err("bad q"))?),
                (Block::Top, "n") => n = Some(val.parse::<usize>().map_err(|_| err("bad n"))?),
                (Block::Divisor(i), "N") => divs.get_mut(i).unwrap().0 = Some(val.parse().map_err(|_| err("bad N"))?),
                (Block::Divisor(i), "nu") => divs.get_mut(i).unwrap().1 = Some(val.parse().map_err(|_| err("bad nu"))?),
                (Block::Count(s, c), "value") => counts.push((s.clone(), c.clone(), parse_value(val).map_err(|e| err(&e))?)),
                _ => return Err(err(&format!("unexpected key {}", key))),
            }
        }
        let q = q.ok_or_else(|| Error::Parse("missing q".into()))?;
        let n = n.ok_or_else(|| Error::Parse("missing n".into()))?;
        let mut divisors = Vec::new();
        for (expect, (i, (nn, nu))) in divs.into_iter().enumerate() {
            if i != expect {
                return Err(Error::Parse(format!("divisor indices must be 0..T-1, found {}", i)));
            }
            let nn = nn.ok_or_else(|| Error::Parse(format!("divisor {} missing N", i)))?;
            let nu = nu.ok_or_else(|| Error::Parse(format!("divisor {} missing nu", i)))?;
            divisors.push((nn, nu));
        }
        let t = divisors.len();
        let mut rd = ResolutionData::new(q, n, divisors)?;
        for (s, c, v) in counts {
            if s.iter().any(|&i| i >= t) {
                return Err(Error::Parse(format!("count subset {:?} names an unknown divisor", s)));
            }
            rd.set_count(&s, &c, v);
        }
        Ok(rd)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "q={}\nn={}", self.q, self.n);
        for (i, (nn, nu)) in self.divisors.iter().enumerate() {
            let _ = writeln!(s, "[divisor {}]\nN={}\nnu={}", i, nn, nu);
        }
        for ((sub, chi), v) in &self.counts {
            let ids: Vec<String> = sub.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "[count I={} chi={}]\nvalue={}", ids.join(","), chi, format_value(v));
        }
        s
    }
}

fn parse_value(s: &str) -> std::result::Result<CycloValue, String> {
    if let Some(rest) = s.strip_prefix("zeta") {
        let (d, cs) = rest.split_once(':').ok_or("expected zeta<d>:c0,c1,...")?;
        let d: u64 = d.parse().map_err(|_| "bad root order")?;
        let terms: std::result::Result<Vec<BigRational>, String> = cs.split(',').map(|c| parse_rational(c.trim())).collect();
        let terms = terms?;
        return Ok(CycloValue::from_rational_terms(d, terms.iter().enumerate().map(|(j, r)| (j as u64, r))));
    }
    Ok(CycloValue::from_rational(1, &parse_rational(s)?))
}

fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a: BigInt = a.trim().parse().map_err(|_| format!("bad number {}", s))?;
    let b: BigInt = b.trim().parse().map_err(|_| format!("bad number {}", s))?;
    if b.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(a, b))
}

fn format_value(v: &CycloValue) -> String {
    if let Some(r) = v.as_rational() {
        return r.to_string();
    }
    let cs: Vec<String> = v.numerators().iter().map(|c| BigRational::new(c.clone(), v.denominator().clone()).to_string()).collect();
    format!("zeta{}:{}", v.order(), cs.join(","))
}

fn binomial(q: u64, nn: u32, nu: u32) -> Vec<BigRational> {
    let mut b = vec![BigRational::zero(); nn as usize + 1];
    b[0] = BigRational::one();
    b[nn as usize] = -BigRational::new(BigInt::one(), BigInt::from(q).pow(nu));
    b
}

fn cpoly_mul_q(a: &[CycloValue], b: &[BigRational], n: u64) -> Vec<CycloValue> {
    let mut out = vec![CycloValue::zero(n); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.scale(y));
            }
        }
    }
    out
}

/// Irreducible pieces of 1 − q^{−ν} t^N.
pub fn binomial_pieces(nn: u32, nu: u32) -> Vec<(u32, u32, u32)> {
    let g = gcd(nn as u64, nu as u64) as u32;
    divisors(g as u64).into_iter().map(|e| (nn / g, nu / g, e as u32)).collect()
}

/// Z = q^{−n} Σ_{I admissible} c_I Π_{i∈I} (q−1) q^{−ν_i} t^{N_i} / (1 − q^{−ν_i} t^{N_i})
/// over a common denominator, for the character with id `chi` of order d.
pub fn denef_eval(rd: &ResolutionData, chi: &str, d: u64) -> Result<RationalZeta> {
    let q = rd.q;
    let subsets = rd.admissible_subsets(d);
    let used: Vec<usize> = (0..rd.divisors.len()).filter(|&i| (rd.divisors[i].0 as u64).is_multiple_of(d)).collect();
    let qn = BigRational::new(BigInt::one(), BigInt::from(q).pow(rd.n as u32));
    let mut numerator = vec![CycloValue::zero(d.max(1))];
    for sub in &subsets {
        let c = rd
            .count(sub, chi)
            .ok_or_else(|| Error::Invalid(format!("missing count for I = {:?}, chi = {}", sub, chi)))?;
        if c.is_zero() {
            continue;
        }
        let mut term = vec![c.scale(&qn)];
        for &i in &used {
            let (nn, nu) = rd.divisors[i];
            if sub.contains(&i) {
                let mut mono = vec![BigRational::zero(); nn as usize + 1];
                mono[nn as usize] = BigRational::new(BigInt::from(q - 1), BigInt::from(q).pow(nu));
                term = cpoly_mul_q(&term, &mono, d);
            } else {
                term = cpoly_mul_q(&term, &binomial(q, nn, nu), d);
            }
        }
        if numerator.len() < term.len() {
            numerator.resize(term.len(), CycloValue::zero(d));
        }
        for (a, b) in numerator.iter_mut().zip(term) {
            *a = a.add(&b);
        }
    }
    while numerator.len() > 1 && numerator.last().unwrap().is_zero() {
        numerator.pop();
    }
    let mut denominator = vec![BigRational::one()];
    let mut pieces: BTreeMap<(u32, u32, u32), u32> = BTreeMap::new();
    for &i in &used {
        let (nn, nu) = rd.divisors[i];
        let b = binomial(q, nn, nu);
        let mut out = vec![BigRational::zero(); denominator.len() + b.len() - 1];
        for (x, u) in denominator.iter().enumerate() {
            for (y, v) in b.iter().enumerate() {
                out[x + y] += u * v;
            }
        }
        denominator = out;
        for pc in binomial_pieces(nn, nu) {
            *pieces.entry(pc).or_insert(0) += 1;
        }
    }
    let factors: Vec<DenFactor> =
        pieces.into_iter().map(|((a, b, e), m)| DenFactor { a, b, e, multiplicity: m }).collect();
    debug_assert!(factor_denominator(&denominator, q).1.len() == 1);
    Ok(RationalZeta { q, numerator, denominator, factors, remainder: vec![BigRational::one()] })
}

/// Monomial x^a: the identity is an embedded resolution with divisors
/// {x_j = 0}, N_j = a_j, ν_j = 1, for j with a_j > 0.
pub fn monomial_resolution(exps: &[u32], q: u64, z: &SupportScheme, chi: &MultChar) -> Result<ResolutionData> {
    if exps.iter().all(|&a| a == 0) {
        return Err(Error::Invalid("at least one exponent must be positive".into()));
    }
    if chi.conductor() > 1 {
        return Err(Error::Invalid("good-reduction data needs a conductor-1 character".into()));
    }
    if chi.p() != q {
        return Err(Error::Invalid("character must live on F_q with q = p".into()));
    }
    let n = exps.len();
    let t: Vec<usize> = (0..n).filter(|&j| exps[j] > 0).collect();
    let divisors: Vec<(u32, u32)> = t.iter().map(|&j| (exps[j], 1)).collect();
    let mut rd = ResolutionData::new(q, n, divisors)?;
    let d = chi.order();
    let id = chi.id();
    let tsize = t.len();
    for mask in 0u64..(1 << tsize) {
        let sub: Vec<usize> = (0..tsize).filter(|b| mask >> b & 1 == 1).collect();
        if !sub.iter().all(|&i| (exps[t[i]] as u64).is_multiple_of(d)) {
            continue;
        }
        let value = if z.is_full() {
            let mut v = CycloValue::one(d);
            for (i, &j) in t.iter().enumerate() {
                if sub.contains(&i) {
                    continue;
                }
                let mut s = CycloValue::zero(d);
                for x in 1..q {
                    s = s.add(&chi.value(pow_u64(x, exps[j]) % q));
                }
                v = v.mul(&s);
            }
            v.scale_int(&BigInt::from(q).pow((n - tsize) as u32))
        } else {
            let k = ExtField::shared(q, 1)?;
            let mut v = CycloValue::zero(d);
            let mut x = vec![0u32; n];
            loop {
                let on_stratum =
                    t.iter().enumerate().all(|(i, &j)| (x[j] == 0) == sub.contains(&i));
                if on_stratum && z.contains(&k, &x) {
                    let mut u = 1u64;
                    for (i, &j) in t.iter().enumerate() {
                        if !sub.contains(&i) {
                            u = u * pow_u64(x[j] as u64, exps[j]) % q;
                        }
                    }
                    v = v.add(&chi.value(u));
                }
                if !odometer(&mut x, q as u32) {
                    break;
                }
            }
            v
        };
        rd.set_count(&sub, &id, value);
    }
    Ok(rd)
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub equal: bool,
    pub order: usize,
    pub first_mismatch: Option<usize>,
}

/// Expand the Denef form to order M and compare with the lifting-tree series.
pub fn denef_series_crosscheck(
    rd: &ResolutionData,
    chi: &MultChar,
    f: &MPoly,
    z: &SupportScheme,
    order: usize,
) -> Result<CrossCheck> {
    let rz = denef_eval(rd, &chi.id(), chi.order())?;
    let lhs = rz.expand(order);
    let rhs = zeta_series(f, rd.q, z, chi, order)?;
    let first = lhs.iter().zip(&rhs.coeffs).position(|(a, b)| !a.eq_value(b));
    Ok(CrossCheck { equal: first.is_none(), order, first_mismatch: first })
}

/// Classical resolution data of the cusp x1^2 + x2^3 at q = 7 with full
/// support: strict transform (1,1) and exceptional curves (2,2), (3,3), (6,5).
pub const CUSP_P7: &str = include_str!("../data/cusp_p7.res");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::{poles, series_to_rational, zeta_series};

    fn rq(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn monomial_one_variable_closed_form() {
        let chi = MultChar::trivial(5).unwrap();
        for nn in 1..=4 {
            let rd = monomial_resolution(&[nn], 5, &SupportScheme::Full, &chi).unwrap();
            assert_eq!(rd.count(&[], "trivial").unwrap().as_rational().unwrap(), rq(4, 1));
            assert_eq!(rd.count(&[0], "trivial").unwrap().as_rational().unwrap(), rq(1, 1));
            let rz = denef_eval(&rd, "trivial", 1).unwrap();
            let ex = rz.expand(12);
            for (m, c) in ex.iter().enumerate() {
                let expect = if (m as u32).is_multiple_of(nn) { rq(4, 5) * rq(1, 5i64.pow(m as u32 / nn)) } else { rq(0, 1) };
                assert_eq!(c.as_rational().unwrap(), expect);
            }
        }
    }

    #[test]
    fn normal_crossing_counts() {
        let chi = MultChar::trivial(7).unwrap();
        let rd = monomial_resolution(&[1, 1], 7, &SupportScheme::Full, &chi).unwrap();
        let c = |s: &[usize]| rd.count(s, "trivial").unwrap().as_rational().unwrap();
        assert_eq!(c(&[]), rq(36, 1));
        assert_eq!(c(&[0]), rq(6, 1));
        assert_eq!(c(&[1]), rq(6, 1));
        assert_eq!(c(&[0, 1]), rq(1, 1));
        let rz = denef_eval(&rd, "trivial", 1).unwrap();
        let one = MultChar::trivial(7).unwrap();
        let s = zeta_series(&MPoly::parse("x1").unwrap(), 7, &SupportScheme::Full, &one, 10).unwrap();
        let single: Vec<BigRational> = s.rational_coeffs().unwrap();
        let ex = rz.expand(10);
        for m in 0..=10 {
            let conv: BigRational = (0..=m).map(|i| &single[i] * &single[m - i]).sum();
            assert_eq!(ex[m].as_rational().unwrap(), conv);
        }
    }

    #[test]
    fn square_with_cubic_character_vanishes() {
        let chi = MultChar::new(7, 1, 2).unwrap();
        assert_eq!(chi.order(), 3);
        let rd = monomial_resolution(&[2], 7, &SupportScheme::Full, &chi).unwrap();
        let rz = denef_eval(&rd, &chi.id(), chi.order()).unwrap();
        assert!(rz.expand(8).iter().all(|c| c.is_zero()));
    }

    #[test]
    fn monomials_match_series() {
        for p in [5u64, 7] {
            for exps in [vec![3u32], vec![2, 1], vec![2, 2], vec![1, 3]] {
                let f = MPoly::from_terms(exps.len(), [(exps.clone(), BigInt::one())]);
                for chi in [MultChar::trivial(p).unwrap(), MultChar::quadratic(p).unwrap()] {
                    for z in [SupportScheme::Full, SupportScheme::origin(exps.len())] {
                        let rd = monomial_resolution(&exps, p, &z, &chi).unwrap();
                        let v = denef_series_crosscheck(&rd, &chi, &f, &z, 8).unwrap();
                        assert!(v.equal, "{:?} p={} chi={} z={} at {:?}", exps, p, chi.id(), z, v.first_mismatch);
                    }
                }
            }
        }
    }

    #[test]
    fn cusp_file_matches_series_and_poles() {
        let rd = ResolutionData::parse(CUSP_P7).unwrap();
        assert_eq!(rd.divisors, vec![(1, 1), (2, 2), (3, 3), (6, 5)]);
        let chi = MultChar::trivial(7).unwrap();
        let f = MPoly::parse("x1^2+x2^3").unwrap();
        let v = denef_series_crosscheck(&rd, &chi, &f, &SupportScheme::Full, 12).unwrap();
        assert!(v.equal, "{:?}", v.first_mismatch);
        let rz = denef_eval(&rd, "trivial", 1).unwrap();
        assert_eq!(poles(&rz, true).sigma.as_deref(), Some("5/6"));
        let again = ResolutionData::parse(&rd.to_text()).unwrap();
        assert_eq!(again, rd);
    }

    #[test]
    fn corrupted_count_is_detected() {
        let mut rd = ResolutionData::parse(CUSP_P7).unwrap();
        rd.set_count(&[3], "trivial", CycloValue::from_int(1, 6));
        let chi = MultChar::trivial(7).unwrap();
        let f = MPoly::parse("x1^2+x2^3").unwrap();
        let v = denef_series_crosscheck(&rd, &chi, &f, &SupportScheme::Full, 12).unwrap();
        assert!(!v.equal);
        assert!(v.first_mismatch.is_some());
    }

    #[test]
    fn denef_form_agrees_with_fit() {
        let rd = ResolutionData::parse(CUSP_P7).unwrap();
        let rz = denef_eval(&rd, "trivial", 1).unwrap();
        let chi = MultChar::trivial(7).unwrap();
        let s = zeta_series(&MPoly::parse("x1^2+x2^3").unwrap(), 7, &SupportScheme::Full, &chi, 16).unwrap();
        let fit = series_to_rational(&s, 10, 10).unwrap();
        let a = rz.expand(30);
        let b = fit.expand(30);
        assert!(a.iter().zip(&b).all(|(x, y)| x.eq_value(y)));
    }

    #[test]
    fn missing_count_is_an_error() {
        let rd = ResolutionData::new(5, 1, vec![(2, 1)]).unwrap();
        assert!(denef_eval(&rd, "trivial", 1).is_err());
    }
}
