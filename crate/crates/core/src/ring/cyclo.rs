//! Exact arithmetic in cyclotomic fields Q(ζ_N).
//!
//! Values are stored on the power basis 1, ζ, …, ζ^{φ(N)−1} with a single
//! positive denominator; reduction modulo Φ_N makes equality structural.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{divisors, euler_phi, gcd, lcm, radical};

type SparsePoly = Arc<Vec<(usize, i64)>>;

fn cyclo_cache() -> &'static Mutex<HashMap<u64, SparsePoly>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, SparsePoly>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Dense coefficients (ascending) of Φ_n for squarefree n.
fn cyclotomic_dense_squarefree(n: u64) -> Vec<i64> {
    // x^n - 1 = prod_{d | n} Φ_d
    let mut poly: Vec<i64> = vec![0; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let div = cyclotomic_dense_squarefree(d);
        poly = exact_div(&poly, &div);
    }
    poly
}

fn exact_div(a: &[i64], b: &[i64]) -> Vec<i64> {
    let db = b.len() - 1;
    let lead = b[db];
    debug_assert!(lead == 1 || lead == -1);
    let mut rem = a.to_vec();
    let mut q = vec![0i64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = rem[i + db] * lead;
        q[i] = c;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                rem[i + j] -= c * bj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

/// Sparse Φ_n as (degree, coefficient) pairs, leading term included.
pub fn cyclotomic_poly(n: u64) -> SparsePoly {
    assert!(n >= 1);
    let mut cache = cyclo_cache().lock().unwrap();
    if let Some(p) = cache.get(&n) {
        return p.clone();
    }
    let r = radical(n);
    let stretch = (n / r) as usize;
    let dense = cyclotomic_dense_squarefree(r);
    let sparse: Vec<(usize, i64)> = dense
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i * stretch, c))
        .collect();
    let arc = Arc::new(sparse);
    cache.insert(n, arc.clone());
    arc
}

/// Element of Q(ζ_N) in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloValue {
    n: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

/// Reduce a vector of exponent-indexed integers (any length) modulo Φ_n.
fn reduce_vec(n: u64, mut v: Vec<BigInt>) -> Vec<BigInt> {
    let nu = n as usize;
    if v.len() > nu {
        let tail = v.split_off(nu);
        for (i, c) in tail.into_iter().enumerate() {
            v[i % nu] += c;
        }
    }
    let phi = euler_phi(n) as usize;
    let poly = cyclotomic_poly(n);
    let lower: Vec<(usize, i64)> = poly.iter().copied().filter(|&(d, _)| d < phi).collect();
    for i in (phi..v.len()).rev() {
        if v[i].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut v[i]);
        let base = i - phi;
        for &(j, a) in &lower {
            match a {
                1 => v[base + j] -= &c,
                -1 => v[base + j] += &c,
                _ => v[base + j] -= &c * a,
            }
        }
    }
    v.truncate(phi);
    v.resize(phi, BigInt::zero());
    v
}

impl CycloValue {
    fn normalize(n: u64, num: Vec<BigInt>, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut num = reduce_vec(n, num);
        let mut den = den;
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = den.clone();
        for c in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if num.iter().all(|c| c.is_zero()) {
            return CycloValue { n, num, den: BigInt::one() };
        }
        if !g.is_one() {
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
            den /= &g;
        }
        CycloValue { n, num, den }
    }

    pub fn zero(n: u64) -> Self {
        CycloValue { n, num: vec![BigInt::zero(); euler_phi(n) as usize], den: BigInt::one() }
    }

    pub fn one(n: u64) -> Self {
        Self::from_int(n, 1)
    }

    pub fn from_int(n: u64, k: i64) -> Self {
        Self::from_rational(n, &BigRational::from_integer(BigInt::from(k)))
    }

    pub fn from_rational(n: u64, r: &BigRational) -> Self {
        let mut num = vec![BigInt::zero(); euler_phi(n) as usize];
        num[0] = r.numer().clone();
        Self::normalize(n, num, r.denom().clone())
    }

    /// ζ_n^j.
    pub fn root(n: u64, j: i64) -> Self {
        let e = j.rem_euclid(n as i64) as usize;
        let mut v = vec![BigInt::zero(); n as usize];
        v[e] = BigInt::one();
        Self::normalize(n, v, BigInt::one())
    }

    /// Σ_j counts[j] ζ_n^j / den, where `counts` is indexed by exponent (length ≤ n or wrapped).
    pub fn from_exponent_counts(n: u64, counts: Vec<BigInt>, den: BigInt) -> Self {
        Self::normalize(n, counts, den)
    }

    /// Σ_j counts[j] ζ_n^j for small integer counts.
    pub fn from_counts_i128(n: u64, counts: &[i128]) -> Self {
        let v = counts.iter().map(|&c| BigInt::from(c)).collect();
        Self::normalize(n, v, BigInt::one())
    }

    /// Σ_j r_j ζ_n^j with rational weights.
    pub fn from_rational_terms<'a, I>(n: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = (u64, &'a BigRational)>,
    {
        let terms: Vec<(u64, &BigRational)> = terms.into_iter().collect();
        let mut den = BigInt::one();
        for (_, r) in &terms {
            den = den.lcm(r.denom());
        }
        let mut v = vec![BigInt::zero(); n as usize];
        for (e, r) in terms {
            v[(e % n) as usize] += r.numer() * (&den / r.denom());
        }
        Self::normalize(n, v, den)
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    /// The value as a rational number, if it lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num.iter().skip(1).all(|c| c.is_zero()) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Image under Q(ζ_n) → Q(ζ_m), ζ_n ↦ ζ_m^{m/n}.
    pub fn embed(&self, m: u64) -> Self {
        assert!(m.is_multiple_of(self.n), "embedding needs n | m");
        if m == self.n {
            return self.clone();
        }
        let s = (m / self.n) as usize;
        let mut v = vec![BigInt::zero(); m as usize];
        for (j, c) in self.num.iter().enumerate() {
            v[(j * s) % m as usize] = c.clone();
        }
        Self::normalize(m, v, self.den.clone())
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        let m = lcm(self.n, other.n);
        (self.embed(m), other.embed(m))
    }

    /// Equality as complex numbers, across different N.
    pub fn eq_value(&self, other: &Self) -> bool {
        if self.n == other.n {
            return self == other;
        }
        let (a, b) = self.common(other);
        a == b
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = if self.n == other.n { (self.clone(), other.clone()) } else { self.common(other) };
        let den = a.den.lcm(&b.den);
        let fa = &den / &a.den;
        let fb = &den / &b.den;
        let v = a.num.iter().zip(&b.num).map(|(x, y)| x * &fa + y * &fb).collect();
        Self::normalize(a.n, v, den)
    }

    pub fn neg(&self) -> Self {
        CycloValue { n: self.n, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = if self.n == other.n { (self.clone(), other.clone()) } else { self.common(other) };
        let len = a.num.len() + b.num.len();
        let mut v = vec![BigInt::zero(); len.max(1)];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                if !y.is_zero() {
                    v[i + j] += x * y;
                }
            }
        }
        Self::normalize(a.n, v, &a.den * &b.den)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let v = self.num.iter().map(|c| c * r.numer()).collect();
        Self::normalize(self.n, v, &self.den * r.denom())
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        let v = self.num.iter().map(|c| c * k).collect();
        Self::normalize(self.n, v, self.den.clone())
    }

    /// Galois automorphism ζ ↦ ζ^k for k coprime to N.
    pub fn galois(&self, k: u64) -> Self {
        assert_eq!(gcd(k, self.n), 1);
        let nu = self.n as usize;
        let mut v = vec![BigInt::zero(); nu];
        for (j, c) in self.num.iter().enumerate() {
            v[(j * k as usize) % nu] += c;
        }
        Self::normalize(self.n, v, self.den.clone())
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        self.galois(self.n - 1 + if self.n == 1 { 1 } else { 0 })
    }

    /// Field norm down to Q.
    pub fn norm(&self) -> BigRational {
        let mut acc = CycloValue::one(self.n);
        for k in 1..=self.n {
            if gcd(k, self.n) == 1 {
                acc = acc.mul(&self.galois(k % self.n.max(1)));
            }
        }
        acc.as_rational().expect("norm is rational")
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut others = CycloValue::one(self.n);
        for k in 2..self.n {
            if gcd(k, self.n) == 1 {
                others = others.mul(&self.galois(k));
            }
        }
        let nrm = self.mul(&others).as_rational().expect("norm is rational");
        Some(others.scale(&(BigRational::one() / nrm)))
    }

    /// Image under the fixed embedding ζ_N ↦ exp(2πi/N).
    pub fn to_complex(&self) -> Complex64 {
        let den = big_to_f64(&self.den);
        let mut z = Complex64::new(0.0, 0.0);
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ang = 2.0 * std::f64::consts::PI * j as f64 / self.n as f64;
            z += Complex64::from_polar(big_to_f64(c) / den, ang);
        }
        z
    }

    pub fn abs(&self) -> f64 {
        self.to_complex().norm()
    }
}

pub(crate) fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

impl fmt::Debug for CycloValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CycloValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if j == 0 {
                write!(f, "{}", c)?;
            } else {
                write!(f, "{}*z{}^{}", c, self.n, j)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if !self.den.is_one() {
            write!(f, " (/ {})", self.den)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_root_sum_vanishes() {
        let v = CycloValue::from_counts_i128(3, &[1, 1, 1]);
        assert!(v.is_zero());
    }

    #[test]
    fn order_two() {
        let v = CycloValue::from_counts_i128(2, &[5, 3]);
        assert_eq!(v.as_rational().unwrap(), BigRational::from_integer(2.into()));
    }

    #[test]
    fn zeta9_cubed_is_zeta3() {
        let a = CycloValue::root(9, 3);
        let b = CycloValue::root(3, 1).embed(9);
        assert_eq!(a, b);
        let d = a.to_complex() - Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn cyclotomic_polys() {
        let c = cyclotomic_poly(12);
        assert_eq!(c.as_slice(), &[(0, 1), (2, -1), (4, 1)]);
        assert_eq!(cyclotomic_poly(2058).len(), 9);
    }

    #[test]
    fn prime_power_fibres_vanish() {
        for &(p, m) in &[(3u64, 2u32), (5, 2), (3, 3), (7, 2)] {
            let n = p.pow(m);
            for j in 0..n {
                let mut acc = CycloValue::zero(n);
                for k in 0..p {
                    acc = acc.add(&CycloValue::root(n, (j + k * p.pow(m - 1)) as i64));
                }
                assert!(acc.is_zero());
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let v = CycloValue::from_counts_i128(5, &[2, 0, 1, 0, 3]);
        let w = v.inv().unwrap();
        assert_eq!(v.mul(&w), CycloValue::one(5));
    }

    #[test]
    fn reduction_idempotent() {
        let v = CycloValue::from_counts_i128(12, &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]);
        let again = CycloValue::from_exponent_counts(12, v.numerators().to_vec(), v.denominator().clone());
        assert_eq!(v, again);
    }
}
