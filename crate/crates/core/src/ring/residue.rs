//! The residue rings Z/p^m.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::arith::{is_prime, mul_mod};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueRing {
    p: u64,
    m: u32,
    modulus: u64,
}

impl ResidueRing {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::Invalid("residue ring exponent must be at least 1".into()));
        }
        let modulus = p
            .checked_pow(m)
            .filter(|&n| n < (1 << 62))
            .ok_or_else(|| Error::Budget(format!("{}^{} does not fit a machine word", p, m)))?;
        Ok(ResidueRing { p, m, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn exponent(&self) -> u32 {
        self.m
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn reduce(&self, a: i128) -> u64 {
        a.rem_euclid(self.modulus as i128) as u64
    }

    pub fn reduce_big(&self, a: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        let r = ((a % &m) + &m) % &m;
        r.to_u64().expect("reduced value fits")
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.modulus)
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// The reduction homomorphism Z/p^m → Z/p^k.
    pub fn reduce_to(&self, a: u64, k: u32) -> u64 {
        assert!(k <= self.m);
        a % self.p.pow(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_ring_axioms_mod_9() {
        let r = ResidueRing::new(3, 2).unwrap();
        for a in 0..9 {
            for b in 0..9 {
                for c in 0..9 {
                    assert_eq!(r.add(r.add(a, b), c), r.add(a, r.add(b, c)));
                    assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
                }
                assert_eq!(r.reduce_to(r.mul(a, b), 1), r.reduce_to(a, 1) * r.reduce_to(b, 1) % 3);
            }
        }
    }

    #[test]
    fn rejects_composites() {
        assert!(ResidueRing::new(9, 1).is_err());
    }
}
