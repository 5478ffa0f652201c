//! Galois rings GR(p^m, e) = (Z/p^m)[x]/(F), the residue rings O_L/p^m of the
//! unramified extension L of Q_p of degree e. F is the modulus of the
//! matching `ExtField`, lifted with the same integer coefficients.

use crate::error::Result;
use crate::ring::ffield::{ExtField, Fq};
use crate::ring::residue::ResidueRing;

#[derive(Clone, Debug)]
pub struct GaloisRing {
    base: ResidueRing,
    e: usize,
    modulus: Vec<u64>,
    basis_trace: Vec<u64>,
}

pub type GrElem = Vec<u64>;

impl GaloisRing {
    pub fn new(p: u64, m: u32, e: u32) -> Result<Self> {
        let base = ResidueRing::new(p, m)?;
        let field = ExtField::shared(p, e)?;
        let modulus = field.modulus().to_vec();
        let mut gr = GaloisRing { base, e: e as usize, modulus, basis_trace: vec![] };
        let traces = (0..gr.e)
            .map(|j| {
                let mut xj = vec![0u64; gr.e];
                xj[j] = 1;
                gr.matrix_trace(&xj)
            })
            .collect();
        gr.basis_trace = traces;
        Ok(gr)
    }

    pub fn residue_ring(&self) -> &ResidueRing {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.e
    }

    /// Number of elements, p^{me}.
    pub fn size(&self) -> u64 {
        self.base.modulus().pow(self.e as u32)
    }

    pub fn from_index(&self, mut idx: u64) -> GrElem {
        let n = self.base.modulus();
        (0..self.e)
            .map(|_| {
                let c = idx % n;
                idx /= n;
                c
            })
            .collect()
    }

    pub fn from_int(&self, k: i128) -> GrElem {
        let mut v = vec![0u64; self.e];
        v[0] = self.base.reduce(k);
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> GrElem {
        a.iter().zip(b).map(|(&x, &y)| self.base.add(x, y)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> GrElem {
        let e = self.e;
        let mut r = vec![0u64; 2 * e - 1];
        for i in 0..e {
            if a[i] == 0 {
                continue;
            }
            for j in 0..e {
                r[i + j] = self.base.add(r[i + j], self.base.mul(a[i], b[j]));
            }
        }
        for k in (e..2 * e - 1).rev() {
            let c = r[k];
            if c == 0 {
                continue;
            }
            r[k] = 0;
            for (j, &fj) in self.modulus.iter().enumerate() {
                let t = self.base.mul(c, fj);
                r[k - e + j] = self.base.sub(r[k - e + j], t);
            }
        }
        r.truncate(e);
        r
    }

    fn matrix_trace(&self, a: &[u64]) -> u64 {
        let mut t = 0u64;
        for i in 0..self.e {
            let mut xi = vec![0u64; self.e];
            xi[i] = 1;
            t = self.base.add(t, self.mul(a, &xi)[i]);
        }
        t
    }

    /// Trace to Z/p^m.
    pub fn trace(&self, a: &[u64]) -> u64 {
        a.iter()
            .zip(&self.basis_trace)
            .fold(0, |acc, (&c, &t)| self.base.add(acc, self.base.mul(c, t)))
    }

    /// Reduction to the residue field F_{p^e}.
    pub fn residue(&self, a: &[u64], field: &ExtField) -> Fq {
        let d: Vec<u64> = a.iter().map(|&c| c % self.base.p()).collect();
        field.from_coeffs(&d)
    }

    pub fn is_unit(&self, a: &[u64]) -> bool {
        a.iter().any(|&c| c % self.base.p() != 0)
    }
}
