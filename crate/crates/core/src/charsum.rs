//! Characters, Gauss sums and the exponential-sum engines: the p-adic sum
//! modulo p^m (over Z_p, or over an unramified extension via Galois rings),
//! the Laurent-series sum over jets, its two-term simplification, stratum
//! sums, and weight series along field towers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, gcd, is_prime, lcm, pow_u64, primitive_root_prime_power};
use crate::error::{Error, Result};
use crate::jet::{jet_polynomials, walk_histogram, FieldJets, WalkSpec};
use crate::mpoly::{CompiledMod, MPoly};
use crate::ring::{CycloValue, ExtField, Fq, GaloisRing};
use crate::support::{odometer, SupportScheme};

/// Default cap on the number of polynomial evaluations per sum.
pub const DEFAULT_BUDGET: u64 = 2_000_000_000;

// ---------------------------------------------------------------------------
// Multiplicative characters of (Z/p^c)^*

fn dlog_table(p: u64, c: u32) -> Arc<Vec<u32>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<Vec<u32>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(p, c)) {
        return t.clone();
    }
    let m = pow_u64(p, c);
    let g = primitive_root_prime_power(p, c);
    let mut table = vec![u32::MAX; m as usize];
    let mut x = 1u64;
    for j in 0..euler_phi(m) {
        table[x as usize] = j as u32;
        x = x * g % m;
    }
    let t = Arc::new(table);
    cache.lock().unwrap().insert((p, c), t.clone());
    t
}

/// A character χ of (Z/p^c)^* with c its exact conductor, given by
/// χ(g) = ζ_{φ(p^c)}^k for the least primitive root g mod p^c.
/// The trivial character is stored with c = 1, k = 0.
#[derive(Clone)]
pub struct MultChar {
    p: u64,
    c: u32,
    k: u64,
    phi: u64,
    dlog: Arc<Vec<u32>>,
}

impl std::fmt::Debug for MultChar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MultChar(p={}, c={}, {})", self.p, self.c, self.id())
    }
}

impl PartialEq for MultChar {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.c == o.c && self.k == o.k
    }
}
impl Eq for MultChar {}

fn check_odd_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Err(Error::Invalid("multiplicative characters need an odd prime".into()));
    }
    Ok(())
}

impl MultChar {
    pub fn trivial(p: u64) -> Result<Self> {
        Self::new(p, 1, 0)
    }

    /// χ of exact conductor c with χ(g) = ζ_{φ(p^c)}^k.
    pub fn new(p: u64, c: u32, k: u64) -> Result<Self> {
        check_odd_prime(p)?;
        if c == 0 {
            return Err(Error::Invalid("conductor must be at least 1".into()));
        }
        let phi = euler_phi(pow_u64(p, c));
        let k = k % phi;
        if c >= 2 && k.is_multiple_of(p) {
            return Err(Error::Invalid(format!("exponent {} does not give conductor {}", k, c)));
        }
        Ok(MultChar { p, c, k, phi, dlog: dlog_table(p, c) })
    }

    /// Character from an id: "trivial", "e/d" for the conductor-1 χ(g) = ζ_d^e,
    /// or "c:k" for conductor c with χ(g) = ζ_{φ(p^c)}^k.
    pub fn from_id(p: u64, id: &str) -> Result<Self> {
        let id = id.trim();
        if id == "trivial" || id == "0/1" {
            return Self::trivial(p);
        }
        if let Some((c, k)) = id.split_once(':') {
            let c: u32 = c.trim().parse().map_err(|_| Error::Parse(format!("character id `{}`", id)))?;
            let k: u64 = k.trim().parse().map_err(|_| Error::Parse(format!("character id `{}`", id)))?;
            return Self::new(p, c, k);
        }
        let (e, d) = id
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("character id `{}` (expected e/d or trivial)", id)))?;
        let e: u64 = e.trim().parse().map_err(|_| Error::Parse(format!("character id `{}`", id)))?;
        let d: u64 = d.trim().parse().map_err(|_| Error::Parse(format!("character id `{}`", id)))?;
        check_odd_prime(p)?;
        if d == 0 || !(p - 1).is_multiple_of(d) {
            return Err(Error::Invalid(format!("order {} does not divide p-1 = {}", d, p - 1)));
        }
        Self::new(p, 1, (e % d) * ((p - 1) / d))
    }

    /// Quadratic character mod p.
    pub fn quadratic(p: u64) -> Result<Self> {
        Self::from_id(p, "1/2")
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn conductor(&self) -> u32 {
        self.c
    }
    pub fn exponent(&self) -> u64 {
        self.k
    }
    pub fn is_trivial(&self) -> bool {
        self.k == 0
    }
    /// Order d of χ.
    pub fn order(&self) -> u64 {
        self.phi / gcd(self.k, self.phi)
    }

    /// "trivial", "e/d" for conductor 1, "c:k" otherwise.
    pub fn id(&self) -> String {
        if self.k == 0 {
            "trivial".into()
        } else if self.c == 1 {
            let d = self.order();
            format!("{}/{}", self.k / (self.phi / d), d)
        } else {
            format!("{}:{}", self.c, self.k)
        }
    }

    pub fn inverse(&self) -> Self {
        MultChar { k: (self.phi - self.k) % self.phi, ..self.clone() }
    }

    /// χ(α) = ζ_d^j with d = order; returns j, or None when p | α.
    pub fn eval_exp(&self, alpha: u64) -> Option<u64> {
        let m = pow_u64(self.p, self.c);
        let l = self.dlog[(alpha % m) as usize];
        if l == u32::MAX {
            return None;
        }
        let d = self.order();
        Some((l as u64 * self.k / (self.phi / d)) % d)
    }

    /// χ(α) in Q(ζ_d), zero for non-units.
    pub fn value(&self, alpha: u64) -> CycloValue {
        let d = self.order();
        match self.eval_exp(alpha) {
            Some(j) => CycloValue::root(d, j as i64),
            None => CycloValue::zero(d),
        }
    }

    /// All characters of exact conductor c (the trivial one belongs to c = 1).
    pub fn of_conductor(p: u64, c: u32) -> Result<Vec<Self>> {
        check_odd_prime(p)?;
        let phi = euler_phi(pow_u64(p, c));
        (0..phi)
            .filter(|&k| if c == 1 { true } else { k % p != 0 })
            .map(|k| Self::new(p, c, k))
            .collect()
    }

    /// All characters of (Z/p^m)^*, ordered by conductor then exponent.
    pub fn up_to_conductor(p: u64, m: u32) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for c in 1..=m {
            out.extend(Self::of_conductor(p, c)?);
        }
        Ok(out)
    }
}

/// g_χ = p^{1−c}/(p−1) · Σ_{v ∈ (Z/p^c)^*} χ(v) ζ_{p^c}^v.
pub fn gauss_sum(chi: &MultChar) -> CycloValue {
    let p = chi.p;
    let c = chi.c;
    let pc = pow_u64(p, c);
    let d = chi.order();
    let n = lcm(pc, d);
    let mut counts = vec![BigInt::zero(); n as usize];
    for v in 1..pc {
        if let Some(j) = chi.eval_exp(v) {
            let e = (j * (n / d) + v * (n / pc)) % n;
            counts[e as usize] += 1;
        }
    }
    let den = BigInt::from(p - 1) * BigInt::from(p).pow(c - 1);
    CycloValue::from_exponent_counts(n, counts, den)
}

// ---------------------------------------------------------------------------
// Sum values

/// raw · base^{−exponent}, with the normalization kept symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumValue {
    pub raw: CycloValue,
    pub base: u64,
    pub exponent: u32,
}

impl SumValue {
    pub fn new(raw: CycloValue, base: u64, exponent: u32) -> Self {
        SumValue { raw, base, exponent }
    }

    /// Σ hist[j] ζ_N^j · base^{−exponent}.
    pub fn from_histogram(n: u64, hist: &[u128], base: u64, exponent: u32) -> Self {
        let counts = hist.iter().map(|&h| BigInt::from(h)).collect();
        SumValue { raw: CycloValue::from_exponent_counts(n, counts, BigInt::one()), base, exponent }
    }

    /// The normalized value as an element of Q(ζ_N).
    pub fn value(&self) -> CycloValue {
        let den = BigInt::from(self.base).pow(self.exponent);
        self.raw.scale(&num_rational::BigRational::new(BigInt::one(), den))
    }

    pub fn abs(&self) -> f64 {
        self.raw.abs() / (self.base as f64).powi(self.exponent as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.raw.is_zero()
    }

    /// Exact equality of normalized values, across cyclotomic fields.
    pub fn eq_exact(&self, other: &SumValue) -> bool {
        self.value().eq_value(&other.value())
    }

    pub fn report(&self) -> SumReport {
        let v = self.value();
        SumReport {
            n: v.order(),
            value_basis_coeffs: v.numerators().iter().map(|c| c.to_string()).collect(),
            denominator: v.denominator().to_string(),
            raw_basis_coeffs: self.raw.numerators().iter().map(|c| c.to_string()).collect(),
            raw_denominator: self.raw.denominator().to_string(),
            prefactor_base: self.base,
            prefactor_exponent: self.exponent,
            abs_value: self.abs(),
        }
    }
}

/// JSON form of a sum: the normalized value on the power basis of Q(ζ_N)
/// and the raw value with its symbolic prefactor base^{−exponent}.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SumReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub value_basis_coeffs: Vec<String>,
    pub denominator: String,
    pub raw_basis_coeffs: Vec<String>,
    pub raw_denominator: String,
    pub prefactor_base: u64,
    pub prefactor_exponent: u32,
    pub abs_value: f64,
}

// ---------------------------------------------------------------------------
// p-adic engine

#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// p-adic: enumerate only residues where the gradient vanishes mod p
    /// (exact for m ≥ 2) and sum the top digit in closed form.
    pub singular_only: bool,
    /// t-adic: sum the top jet level in closed form.
    pub top_shortcut: bool,
    pub budget: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { singular_only: false, top_shortcut: true, budget: DEFAULT_BUDGET }
    }
}

impl EngineOptions {
    pub fn fast() -> Self {
        EngineOptions { singular_only: true, ..Default::default() }
    }
    pub fn exhaustive() -> Self {
        EngineOptions { singular_only: false, top_shortcut: false, budget: DEFAULT_BUDGET }
    }
}

fn budget_check(work: f64, budget: u64, what: &str) -> Result<()> {
    if work > budget as f64 {
        Err(Error::Budget(format!("{} needs about {:.3e} evaluations (budget {})", what, work, budget)))
    } else {
        Ok(())
    }
}

/// p^{−mn} Σ_{x mod p^m, x̄ ∈ Z(F_p)} ζ_{p^m}^{u f(x)}, by full enumeration.
pub fn expsum_padic(f: &MPoly, p: u64, m: u32, z: &SupportScheme, u: u64) -> Result<SumValue> {
    expsum_padic_with(f, p, m, z, u, &EngineOptions::default())
}

pub fn expsum_padic_with(
    f: &MPoly,
    p: u64,
    m: u32,
    z: &SupportScheme,
    u: u64,
    opts: &EngineOptions,
) -> Result<SumValue> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let n = f.nvars();
    let pm = pow_u64(p, m);
    let k = ExtField::shared(p, 1)?;
    let base: Vec<Vec<u64>> = z.points(&k, n)?.into_iter().map(|x| x.into_iter().map(u64::from).collect()).collect();
    let fm = CompiledMod::new(&f.scale(&BigInt::from(u)), pm);
    let optimize = opts.singular_only && m >= 2;
    let (base, free_digits, mult) = if optimize {
        let grad: Vec<CompiledMod> = f.gradient().iter().map(|g| CompiledMod::new(g, p)).collect();
        let sing: Vec<Vec<u64>> = base.into_iter().filter(|x| grad.iter().all(|g| g.eval(x) == 0)).collect();
        (sing, m - 2, pow_u64(p, n as u32) as u128)
    } else {
        (base, m - 1, 1u128)
    };
    let lifts = (p as f64).powi((free_digits as usize * n) as i32);
    budget_check(lifts * base.len() as f64, opts.budget, "p-adic sum")?;
    let lift_mod = pow_u64(p, free_digits) as Fq;
    let hist = base
        .par_iter()
        .map(|xb| {
            let mut hist = vec![0u128; pm as usize];
            let mut y = vec![0 as Fq; n];
            let mut x = vec![0u64; n];
            loop {
                for j in 0..n {
                    x[j] = xb[j] + p * y[j] as u64;
                }
                hist[fm.eval(&x) as usize] += mult;
                if !odometer(&mut y, lift_mod) {
                    break;
                }
            }
            hist
        })
        .reduce(|| vec![0u128; pm as usize], merge_hist);
    Ok(SumValue::from_histogram(pm, &hist, p, m * n as u32))
}

fn merge_hist(mut a: Vec<u128>, b: Vec<u128>) -> Vec<u128> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// The same sum over the unramified extension of degree e: q^{−mn} Σ over
/// x ∈ GR(p^m, e)^n with x̄ ∈ Z(F_q) of ζ_{p^m}^{Tr(u f(x))}.
pub fn expsum_padic_ext(
    f: &MPoly,
    p: u64,
    e: u32,
    m: u32,
    z: &SupportScheme,
    u: &[u64],
    budget: u64,
) -> Result<SumValue> {
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let gr = GaloisRing::new(p, m, e)?;
    let k = ExtField::shared(p, e)?;
    let n = f.nvars();
    let ed = e as usize;
    if u.len() != ed {
        return Err(Error::Invalid(format!("u must have {} coordinates", ed)));
    }
    if !gr.is_unit(u) {
        return Err(Error::Invalid("u must be a unit".into()));
    }
    let base = z.points(&k, n)?;
    let lifts_per = (pow_u64(p, m - 1) as f64).powi((ed * n) as i32);
    budget_check(lifts_per * base.len() as f64, budget, "Galois-ring sum")?;
    let pm = pow_u64(p, m);
    let terms: Vec<(GrElemOwned, Vec<(usize, u32)>)> = f
        .terms()
        .map(|(mono, c)| {
            let ci = gr.residue_ring().reduce_big(c);
            let coeff = gr.mul(u, &gr.from_int(ci as i128));
            let vars = mono.iter().enumerate().filter(|(_, &a)| a > 0).map(|(i, &a)| (i, a)).collect();
            (coeff, vars)
        })
        .collect();
    let lift_mod = pow_u64(p, m - 1) as Fq;
    let hist = base
        .par_iter()
        .map(|xb| {
            let mut hist = vec![0u128; pm as usize];
            let lifted: Vec<Vec<u64>> = xb.iter().map(|&a| k.coeffs(a)).collect();
            let mut y = vec![0 as Fq; n * ed];
            let mut x: Vec<Vec<u64>> = vec![vec![0; ed]; n];
            loop {
                for j in 0..n {
                    for t in 0..ed {
                        x[j][t] = (lifted[j][t] + p * y[j * ed + t] as u64) % pm;
                    }
                }
                let mut val = vec![0u64; ed];
                for (c, vars) in &terms {
                    let mut t = c.clone();
                    for &(i, a) in vars {
                        for _ in 0..a {
                            t = gr.mul(&t, &x[i]);
                        }
                    }
                    val = gr.add(&val, &t);
                }
                hist[gr.trace(&val) as usize] += 1;
                if !odometer(&mut y, lift_mod) {
                    break;
                }
            }
            hist
        })
        .reduce(|| vec![0u128; pm as usize], merge_hist);
    Ok(SumValue::from_histogram(pm, &hist, pow_u64(p, e), m * n as u32))
}

type GrElemOwned = Vec<u64>;

// ---------------------------------------------------------------------------
// Laurent-series engines

fn tadic_sum(
    f: &MPoly,
    k: &ExtField,
    m: usize,
    z: &SupportScheme,
    spec: &WalkSpec,
    opts: &EngineOptions,
) -> Result<SumValue> {
    if m < 1 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let n = f.nvars();
    let exp = jet_polynomials(f, m - 1);
    let fj = FieldJets::new(&exp, k, z, m)?;
    let q = k.size() as f64;
    let levels = if spec.top_shortcut { m.saturating_sub(2) } else { m - 1 };
    budget_check(fj.base_points.len() as f64 * q.powi((n * levels) as i32), opts.budget, "jet sum")?;
    let hist = walk_histogram(&fj, spec);
    Ok(SumValue::from_histogram(k.p(), &hist, k.size(), (m * n) as u32))
}

/// Definition-level sum over Z^{(m−1)}(k) with phase Σ_i a_{−i−1} f_i, where
/// `zc` lists a_{−m}, …, a_{−1}.
pub fn expsum_tadic_full(f: &MPoly, k: &ExtField, m: usize, zc: &[Fq], z: &SupportScheme) -> Result<SumValue> {
    expsum_tadic_full_with(f, k, m, zc, z, &EngineOptions::default())
}

pub fn expsum_tadic_full_with(
    f: &MPoly,
    k: &ExtField,
    m: usize,
    zc: &[Fq],
    z: &SupportScheme,
    opts: &EngineOptions,
) -> Result<SumValue> {
    if m < 2 {
        return Err(Error::Invalid("the Laurent-series sum needs m >= 2".into()));
    }
    if zc.len() != m {
        return Err(Error::Invalid(format!("expected {} coefficients a_-m..a_-1", m)));
    }
    if zc[0] == 0 {
        return Err(Error::Invalid("a_{-m} must be nonzero".into()));
    }
    let weights: Vec<Fq> = (0..m).map(|i| zc[m - 1 - i]).collect();
    let spec = WalkSpec { weights, zero_upto: 0, exclude_next: false, top_shortcut: opts.top_shortcut };
    tadic_sum(f, k, m, z, &spec, opts)
}

/// q^{−mn} Σ_{Z^{(m−1)}(k)} ψ(b_0 f_0 + b_{m−1} f_{m−1}).
pub fn expsum_tadic_simplified(
    f: &MPoly,
    k: &ExtField,
    m: usize,
    b0: Fq,
    bm: Fq,
    z: &SupportScheme,
) -> Result<SumValue> {
    expsum_tadic_simplified_with(f, k, m, b0, bm, z, &EngineOptions::default())
}

pub fn expsum_tadic_simplified_with(
    f: &MPoly,
    k: &ExtField,
    m: usize,
    b0: Fq,
    bm: Fq,
    z: &SupportScheme,
    opts: &EngineOptions,
) -> Result<SumValue> {
    if m < 2 {
        return Err(Error::Invalid("the Laurent-series sum needs m >= 2".into()));
    }
    if bm == 0 {
        return Err(Error::Invalid("b_{m-1} must be nonzero".into()));
    }
    if m > 2 && k.p() <= m as u64 {
        return Err(Error::Invalid("need char(k) > m for m > 2".into()));
    }
    let spec = WalkSpec { weights: two_term(m, b0, bm), zero_upto: 0, exclude_next: false, top_shortcut: opts.top_shortcut };
    tadic_sum(f, k, m, z, &spec, opts)
}

fn two_term(m: usize, b0: Fq, bm: Fq) -> Vec<Fq> {
    let mut w = vec![0 as Fq; m];
    w[0] = b0;
    w[m - 1] = bm;
    w
}

/// The two-term sum restricted to Z_{m−1,i0} \ Z_{m−1,i0+1}, with the same
/// q^{−mn} normalization. `i0 = m−1` gives the sum over Z_{m−1,m−1}.
#[allow(clippy::too_many_arguments)]
pub fn stratum_sum(
    f: &MPoly,
    k: &ExtField,
    m: usize,
    i0: usize,
    b0: Fq,
    bm: Fq,
    z: &SupportScheme,
    opts: &EngineOptions,
) -> Result<SumValue> {
    if m < 2 {
        return Err(Error::Invalid("m must be at least 2".into()));
    }
    if i0 > m - 1 {
        return Err(Error::Invalid("i0 must be at most m-1".into()));
    }
    let spec = WalkSpec {
        weights: two_term(m, b0, bm),
        zero_upto: i0,
        exclude_next: i0 < m - 1,
        top_shortcut: opts.top_shortcut,
    };
    tadic_sum(f, k, m, z, &spec, opts)
}

// ---------------------------------------------------------------------------
// Weight series

/// Unnormalized S_r = Σ_{Z^{(m−1)}(F_{q^r})} ψ(b_0 f_0 + b_{m−1} f_{m−1}) for r = 1..R,
/// with q = p^e and (b_0, b_{m−1}) ∈ F_q embedded up the tower.
#[allow(clippy::too_many_arguments)]
pub fn weight_series(
    f: &MPoly,
    z: &SupportScheme,
    m: usize,
    b0: Fq,
    bm: Fq,
    p: u64,
    e: u32,
    rmax: u32,
    opts: &EngineOptions,
) -> Result<Vec<(u32, CycloValue)>> {
    let small = ExtField::shared(p, e)?;
    let mut out = Vec::new();
    for r in 1..=rmax {
        let big = ExtField::shared(p, e * r)?;
        let emb = big.embedding_from(&small)?;
        let v = expsum_tadic_simplified_with(f, &big, m, emb[b0 as usize], emb[bm as usize], z, opts)?;
        out.push((r, v.raw));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightFit {
    /// Rounded weight; None encodes −∞ (all S_r vanish).
    pub weight: Option<i64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Root-mean-square deviation of log_q|S_r| from the fitted line.
    pub residual: f64,
    pub points_used: usize,
}

/// Least-squares line through points; returns (slope, intercept, rms residual).
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let den = n * sxx - sx * sx;
    let slope = if den.abs() < 1e-300 { 0.0 } else { (n * sxy - sx * sy) / den };
    let icpt = (sy - slope * sx) / n;
    let rss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - icpt).powi(2)).sum();
    (slope, icpt, (rss / n).sqrt())
}

/// Fit log_q|S_r| ≈ (w/2)·r + const over the nonzero terms.
pub fn fit_weight(series: &[(u32, CycloValue)], q: u64) -> WeightFit {
    let lq = (q as f64).ln();
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, s)| !s.is_zero())
        .map(|(r, s)| (*r as f64, s.abs().ln() / lq))
        .collect();
    match pts.len() {
        0 => WeightFit { weight: None, slope: None, intercept: None, residual: 0.0, points_used: 0 },
        1 => {
            let s = pts[0].1 / pts[0].0;
            WeightFit { weight: Some((2.0 * s).round() as i64), slope: Some(s), intercept: Some(0.0), residual: 0.0, points_used: 1 }
        }
        _ => {
            let (s, c, res) = least_squares(&pts);
            WeightFit { weight: Some((2.0 * s).round() as i64), slope: Some(s), intercept: Some(c), residual: res, points_used: pts.len() }
        }
    }
}
