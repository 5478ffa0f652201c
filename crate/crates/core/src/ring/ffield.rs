//! Finite fields F_{p^e} with table-driven arithmetic.
//!
//! An element is the index Σ c_i p^i of its coefficient vector (c_0 lowest)
//! in F_p[x]/(F). Prime-field elements keep their natural index.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{factorize, is_prime, pow_u64};
use crate::error::{Error, Result};

pub type Fq = u32;

/// Largest field size for which full lookup tables are built.
pub const MAX_FIELD_SIZE: u64 = 1 << 22;
const ADD_TABLE_LIMIT: u64 = 2500;

#[derive(Clone, Debug)]
pub struct ExtField {
    p: u64,
    e: u32,
    q: u64,
    modulus: Vec<u64>,
    exp: Vec<Fq>,
    log: Vec<u32>,
    trace: Vec<u32>,
    neg: Vec<Fq>,
    add_table: Option<Vec<u16>>,
}

// ---- polynomial helpers over F_p (ascending coefficients) ----

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    poly_rem(&mut r, f, p);
    r
}

/// In-place remainder modulo a monic polynomial f.
fn poly_rem(r: &mut Vec<u64>, f: &[u64], p: u64) {
    let df = f.len() - 1;
    trim(r);
    while r.len() > df {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - df;
        for (j, &c) in f.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p * p - lead * c % p) % p;
        }
        trim(r);
    }
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut r: Vec<u64> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut r);
    r
}

fn inv_p(a: u64, p: u64) -> u64 {
    crate::arith::inv_mod(a, p).expect("nonzero mod p")
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = inv_p(*b.last().unwrap(), p);
        let monic: Vec<u64> = b.iter().map(|&c| c * inv % p).collect();
        poly_rem(&mut a, &monic, p);
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// x^(p^k) mod f by repeated p-th powering.
fn frobenius_power(f: &[u64], p: u64, k: u32) -> Vec<u64> {
    let mut x = vec![0, 1];
    poly_rem(&mut x, f, p);
    for _ in 0..k {
        x = poly_pow(&x, p, f, p);
    }
    x
}

fn poly_pow(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    result
}

/// Irreducibility of a monic f of degree e over F_p.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let e = (f.len() - 1) as u32;
    if e == 1 {
        return true;
    }
    for k in 1..e {
        let xp = frobenius_power(f, p, k);
        let g = poly_gcd(f, &poly_sub(&xp, &[0, 1], p), p);
        if g.len() > 1 {
            return false;
        }
    }
    let xq = frobenius_power(f, p, e);
    poly_sub(&xq, &[0, 1], p).is_empty()
}

fn digits(mut idx: u64, p: u64, e: u32) -> Vec<u64> {
    let mut d = Vec::with_capacity(e as usize);
    for _ in 0..e {
        d.push(idx % p);
        idx /= p;
    }
    d
}

fn undigits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn field_cache() -> &'static Mutex<HashMap<(u64, u32), Arc<ExtField>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<ExtField>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl ExtField {
    /// Shared, memoized instance of `ExtField::new(p, e)`.
    pub fn shared(p: u64, e: u32) -> Result<Arc<ExtField>> {
        if let Some(f) = field_cache().lock().unwrap().get(&(p, e)) {
            return Ok(f.clone());
        }
        let f = Arc::new(ExtField::new(p, e)?);
        field_cache().lock().unwrap().insert((p, e), f.clone());
        Ok(f)
    }

    /// F_{p^e} with the lexicographically least monic irreducible modulus.
    pub fn new(p: u64, e: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 {
            return Err(Error::Invalid("extension degree must be at least 1".into()));
        }
        let q = p
            .checked_pow(e)
            .filter(|&q| q <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::Budget(format!("field size {}^{} exceeds table limit {}", p, e, MAX_FIELD_SIZE)))?;
        let modulus = (0..q)
            .map(|k| {
                let mut f = digits(k, p, e);
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p))
            .expect("irreducible polynomials exist in every degree");
        Ok(Self::with_modulus(p, e, modulus))
    }

    fn with_modulus(p: u64, e: u32, modulus: Vec<u64>) -> Self {
        let q = pow_u64(p, e);
        let mul_raw = |a: u64, b: u64| -> u64 {
            let r = poly_mulmod(&digits(a, p, e), &digits(b, p, e), &modulus, p);
            let mut d = r;
            d.resize(e as usize, 0);
            undigits(&d, p)
        };
        let order = q - 1;
        let factors: Vec<u64> = factorize(order).into_iter().map(|(r, _)| r).collect();
        let pow_raw = |a: u64, mut k: u64| -> u64 {
            let mut result = 1u64;
            let mut base = a;
            while k > 0 {
                if k & 1 == 1 {
                    result = mul_raw(result, base);
                }
                base = mul_raw(base, base);
                k >>= 1;
            }
            result
        };
        let gen = if q == 2 {
            1
        } else {
            (2..q)
                .find(|&g| factors.iter().all(|&r| pow_raw(g, order / r) != 1))
                .expect("multiplicative group is cyclic")
        };
        let mut exp = vec![0 as Fq; order as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u64;
        for i in 0..order {
            exp[i as usize] = cur as Fq;
            log[cur as usize] = i as u32;
            cur = mul_raw(cur, gen);
        }
        let neg: Vec<Fq> = (0..q)
            .map(|a| undigits(&digits(a, p, e).iter().map(|&c| (p - c) % p).collect::<Vec<_>>(), p) as Fq)
            .collect();
        let add_digits = |mut a: u64, mut b: u64| -> u64 {
            let mut r = 0u64;
            let mut place = 1u64;
            for _ in 0..e {
                r += ((a % p + b % p) % p) * place;
                a /= p;
                b /= p;
                place *= p;
            }
            r
        };
        let add_table = if e > 1 && q <= ADD_TABLE_LIMIT {
            let mut t = vec![0u16; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = add_digits(a, b) as u16;
                }
            }
            Some(t)
        } else {
            None
        };
        let mut field = ExtField { p, e, q, modulus, exp, log, trace: vec![], neg, add_table };
        let trace: Vec<u32> = (0..q)
            .map(|a| {
                let mut acc: Fq = 0;
                let mut x = a as Fq;
                for _ in 0..e {
                    acc = field.add(acc, x);
                    x = field.pow(x, p);
                }
                assert!((acc as u64) < p, "trace lies in the prime field");
                acc
            })
            .collect();
        field.trace = trace;
        field
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.e
    }
    pub fn size(&self) -> u64 {
        self.q
    }
    /// Modulus coefficients c_0..c_{e−1} (the monic leading 1 omitted).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus[..self.e as usize]
    }

    pub fn modulus_string(&self) -> String {
        let mut parts = Vec::new();
        for (i, &c) in self.modulus.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{}", i),
            };
            parts.push(match (c, i) {
                (c, 0) => c.to_string(),
                (1, _) => mono,
                (c, _) => format!("{}*{}", c, mono),
            });
        }
        parts.join("+")
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.e == 1 {
            let s = a as u64 + b as u64;
            return (if s >= self.p { s - self.p } else { s }) as Fq;
        }
        if let Some(t) = &self.add_table {
            return t[(a as u64 * self.q + b as u64) as usize] as Fq;
        }
        let (mut a, mut b) = (a as u64, b as u64);
        let mut r = 0u64;
        let mut place = 1u64;
        for _ in 0..self.e {
            r += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        r as Fq
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        let o = self.q - 1;
        self.exp[(if s >= o { s - o } else { s }) as usize]
    }

    pub fn pow(&self, a: Fq, k: u64) -> Fq {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let o = self.q - 1;
        let l = (self.log[a as usize] as u128 * k as u128 % o as u128) as usize;
        self.exp[l]
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a == 0 {
            return None;
        }
        let o = self.q - 1;
        let l = self.log[a as usize] as u64;
        Some(self.exp[((o - l) % o) as usize])
    }

    pub fn div(&self, a: Fq, b: Fq) -> Option<Fq> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// Absolute trace to F_p, returned as an integer in [0, p).
    #[inline]
    pub fn trace(&self, a: Fq) -> u32 {
        self.trace[a as usize]
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, k: i64) -> Fq {
        k.rem_euclid(self.p as i64) as Fq
    }

    pub fn from_coeffs(&self, c: &[u64]) -> Fq {
        let mut d: Vec<u64> = c.iter().map(|&x| x % self.p).collect();
        d.resize(self.e as usize, 0);
        undigits(&d, self.p) as Fq
    }

    pub fn coeffs(&self, a: Fq) -> Vec<u64> {
        digits(a as u64, self.p, self.e)
    }

    /// Log-table generator of the multiplicative group.
    pub fn generator(&self) -> Fq {
        if self.q == 2 {
            1
        } else {
            self.exp[1]
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        0..self.q as Fq
    }

    /// Embedding of a subfield F_{p^d} (d | e): the small modulus is sent to its
    /// smallest root here. Returns the image table indexed by small elements.
    pub fn embedding_from(&self, small: &ExtField) -> Result<Vec<Fq>> {
        if small.p != self.p || !self.e.is_multiple_of(small.e) {
            return Err(Error::Invalid(format!(
                "F_{}^{} does not embed in F_{}^{}",
                small.p, small.e, self.p, self.e
            )));
        }
        let eval = |x: Fq| -> Fq {
            let mut acc: Fq = 1;
            for &c in small.modulus.iter().rev().skip(1) {
                acc = self.add(self.mul(acc, x), c as Fq);
            }
            acc
        };
        let alpha = if small.e == 1 {
            0
        } else {
            self.elements().find(|&x| eval(x) == 0).expect("subfield modulus splits")
        };
        let table = small
            .elements()
            .map(|a| {
                let mut acc: Fq = 0;
                for &c in small.coeffs(a).iter().rev() {
                    acc = self.add(self.mul(acc, alpha), c as Fq);
                }
                acc
            })
            .collect();
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_moduli() {
        assert_eq!(ExtField::new(2, 2).unwrap().modulus_string(), "x^2+x+1");
        assert_eq!(ExtField::new(3, 2).unwrap().modulus_string(), "x^2+1");
        assert_eq!(ExtField::new(5, 1).unwrap().modulus_string(), "x");
        assert!(ExtField::new(4, 1).is_err());
    }

    #[test]
    fn x2_plus_1_is_least_over_f3() {
        // x^2 is reducible; x^2+1 has no root in F_3
        assert!(!is_irreducible(&[0, 0, 1], 3));
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!((0..3).all(|x| (x * x + 1) % 3 != 0));
    }

    #[test]
    fn trace_is_frobenius_sum() {
        let f = ExtField::new(3, 3).unwrap();
        for a in f.elements() {
            let brute = f.add(f.add(a, f.pow(a, 3)), f.pow(a, 9));
            assert_eq!(f.trace(a), brute);
        }
    }

    #[test]
    fn prime_subfield_trace_doubles() {
        let f = ExtField::new(7, 2).unwrap();
        for a in 0..7u32 {
            assert_eq!(f.trace(a) as u64, 2 * a as u64 % 7);
        }
    }

    #[test]
    fn trace_linear_and_surjective() {
        for p in [2u64, 3, 5, 7] {
            for e in 1..=4u32 {
                if p.pow(e) > 2401 {
                    continue;
                }
                let f = ExtField::new(p, e).unwrap();
                let mut hit = vec![false; p as usize];
                for a in f.elements() {
                    hit[f.trace(a) as usize] = true;
                    let b = (a as u64 * 7 + 3) % f.size();
                    let s = (f.trace(a) + f.trace(b as Fq)) as u64 % p;
                    assert_eq!(f.trace(f.add(a, b as Fq)) as u64, s);
                    let lam = 2 % p;
                    assert_eq!(f.trace(f.mul(lam as Fq, a)) as u64, lam * f.trace(a) as u64 % p);
                }
                assert!(hit.iter().all(|&h| h));
            }
        }
    }

    #[test]
    fn group_order() {
        let f = ExtField::new(5, 2).unwrap();
        let g = f.generator();
        assert_eq!(f.pow(g, 24), 1);
        assert!((1..24).all(|k| f.pow(g, k) != 1));
    }

    #[test]
    fn tower_embedding_is_homomorphism() {
        let small = ExtField::new(3, 2).unwrap();
        let big = ExtField::new(3, 4).unwrap();
        let emb = big.embedding_from(&small).unwrap();
        for a in small.elements() {
            for b in small.elements() {
                assert_eq!(emb[small.mul(a, b) as usize], big.mul(emb[a as usize], emb[b as usize]));
                assert_eq!(emb[small.add(a, b) as usize], big.add(emb[a as usize], emb[b as usize]));
            }
        }
    }
}
