//! Jet polynomials f_0, …, f_r, the jet supports Z^{(r)} and strata Z_{r,i},
//! the reparameterization solver, and point-count dimension estimates.
//!
//! Jet variable x_{ij} (t-power i, original variable j) has flat index i·n + j.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mpoly::{CompiledField, MPoly};
use crate::ring::{ExtField, Fq};
use crate::support::{odometer, SupportScheme};

#[derive(Clone, Debug)]
pub struct JetExpansion {
    base: MPoly,
    r: usize,
    polys: Vec<MPoly>,
}

/// f(Σ_i x_{i1} t^i, …, Σ_i x_{in} t^i) mod t^{r+1}, coefficientwise.
pub fn jet_polynomials(f: &MPoly, r: usize) -> JetExpansion {
    let n = f.nvars();
    let nv = n * (r + 1);
    // series[j][i] = x_{ij}
    let series: Vec<Vec<MPoly>> = (0..n)
        .map(|j| (0..=r).map(|i| MPoly::var(nv, i * n + j)).collect())
        .collect();
    let mut total: Vec<MPoly> = vec![MPoly::zero(nv); r + 1];
    let mut powers: Vec<Vec<Vec<MPoly>>> = series
        .iter()
        .map(|s| {
            let mut one = vec![MPoly::zero(nv); r + 1];
            one[0] = MPoly::constant(nv, 1);
            vec![one, s.clone()]
        })
        .collect();
    for (mono, c) in f.terms() {
        let mut term = vec![MPoly::zero(nv); r + 1];
        term[0] = MPoly::constant(nv, c.clone());
        for (j, &k) in mono.iter().enumerate() {
            if k == 0 {
                continue;
            }
            while powers[j].len() <= k as usize {
                let next = series_mul(powers[j].last().unwrap(), &series[j], r);
                powers[j].push(next);
            }
            term = series_mul(&term, &powers[j][k as usize], r);
        }
        for (t, s) in total.iter_mut().zip(term) {
            *t = t.add(&s);
        }
    }
    let polys = total
        .into_iter()
        .enumerate()
        .map(|(l, p)| shrink(&p, n * (l + 1)))
        .collect();
    JetExpansion { base: f.clone(), r, polys }
}

fn series_mul(a: &[MPoly], b: &[MPoly], r: usize) -> Vec<MPoly> {
    let nv = a[0].nvars();
    let mut out = vec![MPoly::zero(nv); r + 1];
    for i in 0..=r {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..=(r - i) {
            if !b[j].is_zero() {
                out[i + j] = out[i + j].add(&a[i].mul(&b[j]));
            }
        }
    }
    out
}

fn shrink(p: &MPoly, n: usize) -> MPoly {
    MPoly::from_terms(
        n,
        p.terms().map(|(e, c)| {
            debug_assert!(e[n..].iter().all(|&k| k == 0));
            (e[..n].to_vec(), c.clone())
        }),
    )
}

impl JetExpansion {
    pub fn base(&self) -> &MPoly {
        &self.base
    }
    pub fn order(&self) -> usize {
        self.r
    }
    pub fn nvars(&self) -> usize {
        self.base.nvars()
    }
    /// f_ℓ as a polynomial in the n(ℓ+1) variables x^{(ℓ)}.
    pub fn poly(&self, l: usize) -> &MPoly {
        &self.polys[l]
    }
    pub fn polys(&self) -> &[MPoly] {
        &self.polys
    }
}

// ---------------------------------------------------------------------------
// Truncated power series over F_q

/// Product of two truncated power series (ascending coefficients), length `len`.
pub fn ps_mul(k: &ExtField, a: &[Fq], b: &[Fq], len: usize) -> Vec<Fq> {
    let mut out = vec![0 as Fq; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] = k.add(out[i + j], k.mul(x, y));
        }
    }
    out
}

/// Coefficient of t^{-1} in z·g, where z = Σ_{i=1}^m a_{−i} t^{−i} is given as
/// `z[0] = a_{−m}, …, z[m−1] = a_{−1}` and g is a power series in t.
pub fn residue_against(k: &ExtField, z: &[Fq], g: &[Fq]) -> Fq {
    let m = z.len();
    let mut acc: Fq = 0;
    for i in 1..=m {
        // a_{−i} t^{−i} times g_{i−1} t^{i−1}
        let a = z[m - i];
        if let Some(&gc) = g.get(i - 1) {
            acc = k.add(acc, k.mul(a, gc));
        }
    }
    acc
}

/// Powers t_1^ℓ (ℓ = 0..=maxl) as power series of length `len`, where
/// t_1 = t + α_2 t^2 + … and `alpha[j]` is the coefficient of t^{j}.
fn t1_powers(k: &ExtField, t1: &[Fq], maxl: usize, len: usize) -> Vec<Vec<Fq>> {
    let mut one = vec![0 as Fq; len];
    one[0] = 1;
    let mut out = vec![one];
    for _ in 0..maxl {
        let next = ps_mul(k, out.last().unwrap(), t1, len);
        out.push(next);
    }
    out
}

/// Solve for t_1 = t + α_2 t^2 + … + α_{m−1} t^{m−1} with coeff_{t^{−1}}(z·t_1^ℓ) = 0
/// for 1 ≤ ℓ ≤ m−2. Returns (α_2, …, α_{m−1}). The equations are solved in the
/// order ℓ = m−2, …, 1, each fixing α_{m−ℓ}.
pub fn reparam_solve(k: &ExtField, z: &[Fq]) -> Result<Vec<Fq>> {
    let m = z.len();
    if m < 3 {
        return Err(Error::Invalid("reparameterization needs m > 2".into()));
    }
    if z[0] == 0 {
        return Err(Error::Invalid("leading coefficient a_{-m} must be nonzero".into()));
    }
    if k.p() <= m as u64 {
        return Err(Error::Invalid(format!("need p > m, got p = {}, m = {}", k.p(), m)));
    }
    let len = m + 1;
    let mut t1 = vec![0 as Fq; len];
    t1[1] = 1;
    for l in (1..=m - 2).rev() {
        let idx = m - l; // α_{m−ℓ}, coefficient of t^{m−ℓ}
        t1[idx] = 0;
        let pw = t1_powers(k, &t1, l, len);
        let residual = residue_against(k, z, &pw[l]);
        let denom = k.mul(k.from_int(l as i64), z[0]);
        let alpha = k.neg(k.div(residual, denom).expect("nonzero denominator"));
        t1[idx] = alpha;
    }
    Ok(t1[2..m].to_vec())
}

/// Coefficients a'_{−1−i} = coeff_{t^{−1}}(z·t_1^i), i = 0..m−1, of z written in t_1.
pub fn reparam_coefficients(k: &ExtField, z: &[Fq], alphas: &[Fq]) -> Vec<Fq> {
    let m = z.len();
    let len = m + 1;
    let mut t1 = vec![0 as Fq; len];
    t1[1] = 1;
    for (j, &a) in alphas.iter().enumerate() {
        t1[j + 2] = a;
    }
    let pw = t1_powers(k, &t1, m - 1, len);
    (0..m).map(|i| residue_against(k, z, &pw[i])).collect()
}

/// The pair (b_0, b_{m−1}) of the two-term sum attached to z, derived through
/// the reparameterization: b_0 = a'_{−1}, b_{m−1} = a'_{−m}.
pub fn simplified_pair(k: &ExtField, z: &[Fq]) -> Result<(Fq, Fq)> {
    let m = z.len();
    if m < 2 || z[0] == 0 {
        return Err(Error::Invalid("need ord(z) = -m with m >= 2".into()));
    }
    if m == 2 {
        return Ok((z[1], z[0]));
    }
    let alphas = reparam_solve(k, z)?;
    let a = reparam_coefficients(k, z, &alphas);
    debug_assert!(a[1..m - 1].iter().all(|&c| c == 0));
    Ok((a[0], a[m - 1]))
}

// ---------------------------------------------------------------------------
// Enumeration of Z^{(m−1)}(k) and its strata

/// Compiled jets over a field, ready for enumeration.
pub struct FieldJets<'a> {
    pub k: &'a ExtField,
    pub n: usize,
    pub m: usize,
    pub jets: Vec<CompiledField>,
    pub grad: Vec<CompiledField>,
    pub base_points: Vec<Vec<Fq>>,
}

impl<'a> FieldJets<'a> {
    pub fn new(exp: &JetExpansion, k: &'a ExtField, z: &SupportScheme, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::Invalid("m must be at least 1".into()));
        }
        if exp.order() + 1 < m {
            return Err(Error::Invalid("jet expansion too short".into()));
        }
        let n = exp.nvars();
        let jets = (0..m).map(|l| CompiledField::new(exp.poly(l), k)).collect();
        let grad = exp.base().gradient().iter().map(|g| CompiledField::new(g, k)).collect();
        let base_points = z.points(k, n)?;
        Ok(FieldJets { k, n, m, jets, grad, base_points })
    }
}

/// What to accumulate while walking Z^{(m−1)}(k).
#[derive(Clone, Debug)]
pub struct WalkSpec {
    /// Phase weights w_i: the phase is Σ w_i f_i.
    pub weights: Vec<Fq>,
    /// Require f_1 = … = f_{zero_upto} = 0.
    pub zero_upto: usize,
    /// Additionally require f_{zero_upto+1} ≠ 0.
    pub exclude_next: bool,
    /// Sum over the top jet level in closed form when it is unconstrained.
    pub top_shortcut: bool,
}

/// Histogram of Tr(phase) ∈ F_p over the selected points (counts with multiplicity).
pub fn walk_histogram(fj: &FieldJets, spec: &WalkSpec) -> Vec<u128> {
    let p = fj.k.p() as usize;
    fj.base_points
        .par_iter()
        .map(|x0| {
            let mut hist = vec![0u128; p];
            walk_from(fj, spec, x0, &mut hist);
            hist
        })
        .reduce(
            || vec![0u128; p],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

fn level_ok(spec: &WalkSpec, level: usize, v: Fq) -> bool {
    if level >= 1 && level <= spec.zero_upto {
        v == 0
    } else if spec.exclude_next && level == spec.zero_upto + 1 {
        v != 0
    } else {
        true
    }
}

fn walk_from(fj: &FieldJets, spec: &WalkSpec, x0: &[Fq], hist: &mut [u128]) {
    let k = fj.k;
    let n = fj.n;
    let m = fj.m;
    let mut x = vec![0 as Fq; n * m];
    x[..n].copy_from_slice(x0);
    let f0 = fj.jets[0].eval(k, &x);
    let phase0 = k.mul(spec.weights[0], f0);
    if m == 1 {
        hist[k.trace(phase0) as usize] += 1;
        return;
    }
    let top = m - 1;
    let constrained_top = top <= spec.zero_upto || (spec.exclude_next && top == spec.zero_upto + 1);
    let shortcut = spec.top_shortcut && !constrained_top;
    let mut top_mult = 1u128;
    if shortcut {
        // Σ over x_{m−1} of ψ(w·∇f(x_0)·x_{m−1}) is q^n or 0.
        let w = spec.weights[top];
        if w != 0 && fj.grad.iter().any(|g| g.eval(k, x0) != 0) {
            return;
        }
        top_mult = (k.size() as u128).pow(n as u32);
    }
    recurse(fj, spec, &mut x, 1, phase0, shortcut, top_mult, hist);
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    fj: &FieldJets,
    spec: &WalkSpec,
    x: &mut [Fq],
    level: usize,
    phase: Fq,
    shortcut: bool,
    top_mult: u128,
    hist: &mut [u128],
) {
    let k = fj.k;
    let n = fj.n;
    let q = k.size() as Fq;
    let last = level == fj.m - 1;
    if last && shortcut {
        // x_{m−1} = 0 gives the part of f_{m−1} not involving the top level.
        for v in x[level * n..(level + 1) * n].iter_mut() {
            *v = 0;
        }
        let f = fj.jets[level].eval(k, x);
        let ph = k.add(phase, k.mul(spec.weights[level], f));
        hist[k.trace(ph) as usize] += top_mult;
        return;
    }
    for v in x[level * n..(level + 1) * n].iter_mut() {
        *v = 0;
    }
    loop {
        let f = fj.jets[level].eval(k, x);
        if level_ok(spec, level, f) {
            let ph = k.add(phase, k.mul(spec.weights[level], f));
            if last {
                hist[k.trace(ph) as usize] += 1;
            } else {
                recurse(fj, spec, x, level + 1, ph, shortcut, top_mult, hist);
            }
        }
        if !odometer(&mut x[level * n..(level + 1) * n], q) {
            break;
        }
    }
}

/// Number of k-points of Z_{m−1,i} (f_1 = … = f_i = 0 on Z^{(m−1)}).
pub fn stratum_count(exp: &JetExpansion, z: &SupportScheme, k: &ExtField, m: usize, i: usize) -> Result<u128> {
    if i > m.saturating_sub(1) {
        return Err(Error::Invalid("stratum index must satisfy i <= m-1".into()));
    }
    let fj = FieldJets::new(exp, k, z, m)?;
    let spec = WalkSpec { weights: vec![0; m], zero_upto: i, exclude_next: false, top_shortcut: true };
    Ok(walk_histogram(&fj, &spec).iter().sum())
}

/// Streaming iterator over the k-points of Z_{m−1,i}, as flat jet vectors.
pub struct StratumIter<'a> {
    fj: FieldJets<'a>,
    i: usize,
    base_idx: usize,
    x: Vec<Fq>,
    started: bool,
    done: bool,
}

pub fn stratum_enumerate<'a>(
    exp: &JetExpansion,
    z: &SupportScheme,
    k: &'a ExtField,
    m: usize,
    i: usize,
) -> Result<StratumIter<'a>> {
    if i > m.saturating_sub(1) {
        return Err(Error::Invalid("stratum index must satisfy i <= m-1".into()));
    }
    let fj = FieldJets::new(exp, k, z, m)?;
    let n = fj.n;
    let done = fj.base_points.is_empty();
    Ok(StratumIter { x: vec![0; n * m], fj, i, base_idx: 0, started: false, done })
}

impl<'a> StratumIter<'a> {
    fn level_value_ok(&self, level: usize) -> bool {
        level == 0 || level > self.i || self.fj.jets[level].eval(self.fj.k, &self.x) == 0
    }

    /// Advance the odometer at `level` (resetting deeper levels); false when exhausted.
    fn bump(&mut self, level: usize) -> bool {
        let n = self.fj.n;
        let q = self.fj.k.size() as Fq;
        let m = self.fj.m;
        for l in (level + 1)..m {
            for v in self.x[l * n..(l + 1) * n].iter_mut() {
                *v = 0;
            }
        }
        if level == 0 {
            self.base_idx += 1;
            if self.base_idx >= self.fj.base_points.len() {
                return false;
            }
            let pt = self.fj.base_points[self.base_idx].clone();
            self.x[..n].copy_from_slice(&pt);
            return true;
        }
        if odometer(&mut self.x[level * n..(level + 1) * n], q) {
            true
        } else {
            self.bump(level - 1)
        }
    }

    /// Find the first valid point at or after the current position.
    fn settle(&mut self) -> bool {
        let m = self.fj.m;
        let mut level = 0;
        while level < m {
            if self.level_value_ok(level) {
                level += 1;
            } else {
                // skip the whole subtree below this level
                let before = self.x[..level * self.fj.n].to_vec();
                if !self.bump(level) {
                    return false;
                }
                // recheck from the first level whose coordinates changed
                let n = self.fj.n;
                level = (0..level).find(|&l| self.x[l * n..(l + 1) * n] != before[l * n..(l + 1) * n]).unwrap_or(level);
            }
        }
        true
    }
}

impl<'a> Iterator for StratumIter<'a> {
    type Item = Vec<Fq>;
    fn next(&mut self) -> Option<Vec<Fq>> {
        if self.done {
            return None;
        }
        let n = self.fj.n;
        if !self.started {
            self.started = true;
            let pt = self.fj.base_points[0].clone();
            self.x[..n].copy_from_slice(&pt);
        } else if !self.bump(self.fj.m - 1) {
            self.done = true;
            return None;
        }
        if !self.settle() {
            self.done = true;
            return None;
        }
        Some(self.x.clone())
    }
}

/// For ℓ = 0..=M, the histogram over F_q of f_ℓ on the points of Z^{(ℓ)}(k)
/// where f_0 = … = f_{ℓ−1} = 0. Dividing entry α by q^{(ℓ+1)n} gives the volume
/// of {ord_t f = ℓ, ac f = α} in the Laurent-series setting.
pub fn valuation_counts(exp: &JetExpansion, z: &SupportScheme, k: &ExtField, big_m: usize) -> Result<Vec<Vec<u128>>> {
    if exp.order() < big_m {
        return Err(Error::Invalid("jet expansion too short".into()));
    }
    let fj = FieldJets::new(exp, k, z, big_m + 1)?;
    let q = k.size() as usize;
    let merged = fj
        .base_points
        .par_iter()
        .map(|x0| {
            let mut hist = vec![vec![0u128; q]; big_m + 1];
            let mut x = vec![0 as Fq; fj.n * (big_m + 1)];
            x[..fj.n].copy_from_slice(x0);
            let v = fj.jets[0].eval(k, &x);
            hist[0][v as usize] += 1;
            if v == 0 && big_m > 0 {
                valuation_rec(&fj, &mut x, 1, big_m, &mut hist);
            }
            hist
        })
        .reduce(
            || vec![vec![0u128; q]; big_m + 1],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            },
        );
    Ok(merged)
}

fn valuation_rec(fj: &FieldJets, x: &mut [Fq], level: usize, big_m: usize, hist: &mut [Vec<u128>]) {
    let n = fj.n;
    let q = fj.k.size() as Fq;
    for v in x[level * n..(level + 1) * n].iter_mut() {
        *v = 0;
    }
    loop {
        let v = fj.jets[level].eval(fj.k, x);
        hist[level][v as usize] += 1;
        if v == 0 && level < big_m {
            valuation_rec(fj, x, level + 1, big_m, hist);
        }
        if !odometer(&mut x[level * n..(level + 1) * n], q) {
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// Dimension estimates

#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    pub q: u64,
    /// (r, #Z_{m−1,m−2}(F_{q^r})) as decimal strings.
    pub counts: Vec<(u32, String)>,
    pub slope: Option<f64>,
    /// Rounded slope; None means the stratum is empty at every level (−∞).
    pub dimension: Option<i64>,
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
}

/// Slope of log_q #Z_{m−1,m−2}(F_{q^r}) against r = 1..R, with q = p^e.
pub fn jet_dimension_estimate(
    f: &MPoly,
    z: &SupportScheme,
    m: usize,
    p: u64,
    e: u32,
    rmax: u32,
    lct: Option<f64>,
) -> Result<DimensionEstimate> {
    if m < 2 {
        return Err(Error::Invalid("m must be at least 2".into()));
    }
    if rmax < 3 {
        return Err(Error::Invalid("need at least three fields in the tower".into()));
    }
    let exp = jet_polynomials(f, m - 1);
    let q = p.pow(e);
    let mut pts = Vec::new();
    let mut counts = Vec::new();
    for r in 1..=rmax {
        let k = ExtField::shared(p, e * r)?;
        let c = stratum_count(&exp, z, &k, m, m - 2)?;
        counts.push((r, BigInt::from(c).to_string()));
        if c > 0 {
            pts.push((r as f64, (c as f64).ln() / (q as f64).ln()));
        }
    }
    let slope = if pts.len() >= 2 {
        Some(crate::charsum::least_squares(&pts).0)
    } else if pts.len() == 1 {
        Some(pts[0].1 / pts[0].0)
    } else {
        None
    };
    let dimension = slope.map(|s| s.round() as i64);
    let n = f.nvars() as f64;
    let bound = lct.map(|l| m as f64 * n - (m as f64 - 1.0) * l);
    let within_bound = match (bound, dimension) {
        (Some(b), Some(d)) => Some(d as f64 <= b + 1e-9),
        (Some(_), None) => Some(true),
        _ => None,
    };
    Ok(DimensionEstimate { q, counts, slope, dimension, bound, within_bound })
}
