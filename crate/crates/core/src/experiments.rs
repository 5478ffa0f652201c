//! Corpus, manifest and the experiment drivers: transfer between p-adic and
//! Laurent-series sums, the two-term reduction, stratum vanishing, decay
//! bounds, weight bounds, Thom–Sebastiani factorization and similarity.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::pow_u64;
use crate::charsum::{
    expsum_padic_ext, expsum_padic_with, expsum_tadic_full_with, expsum_tadic_simplified_with, fit_weight, stratum_sum,
    weight_series, EngineOptions, MultChar, SumReport, SumValue,
};
use crate::error::{Error, Result};
use crate::jet::simplified_pair;
use crate::mpoly::MPoly;
use crate::ring::{ExtField, Fq, GaloisRing};
use crate::support::SupportScheme;
use crate::zeta::{poles, series_to_rational, zeta_series};

// ---------------------------------------------------------------------------
// Corpus

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    pub f: String,
    pub z: String,
    pub lct: String,
    pub provenance: String,
    pub nonrational: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct CorpusPair {
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Corpus {
    #[serde(rename = "entry")]
    pub entries: Vec<CorpusEntry>,
    #[serde(rename = "pair", default)]
    pub pairs: Vec<CorpusPair>,
}

pub const BUILTIN_CORPUS: &str = include_str!("../data/corpus.toml");
pub const DEFAULT_MANIFEST: &str = include_str!("../data/manifest.toml");

impl Corpus {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_CORPUS).expect("built-in corpus parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: Corpus = toml::from_str(text).map_err(|e| Error::Parse(format!("corpus: {}", e)))?;
        for e in &c.entries {
            e.poly()?;
            e.support()?;
            e.lct_value()?;
        }
        for p in &c.pairs {
            for name in [&p.left, &p.right] {
                if c.get(name).is_none() {
                    return Err(Error::Parse(format!("pair names unknown entry {}", name)));
                }
            }
        }
        Ok(c)
    }

    pub fn get(&self, name: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// f1(x) + f2(y) on disjoint variables with support Z1 × Z2.
    pub fn composite(&self, pair: &CorpusPair) -> Result<(MPoly, SupportScheme)> {
        let a = self.get(&pair.left).ok_or_else(|| Error::Invalid("unknown entry".into()))?;
        let b = self.get(&pair.right).ok_or_else(|| Error::Invalid("unknown entry".into()))?;
        let (f1, f2) = (a.poly()?, b.poly()?);
        let (n1, n2) = (f1.nvars(), f2.nvars());
        let f = f1.extend_vars(n1 + n2).add(&f2.shift_vars(n1 + n2, n1));
        let z = a.support()?.product(n1, &b.support()?, n2)?;
        Ok((f, z))
    }
}

impl CorpusEntry {
    pub fn poly(&self) -> Result<MPoly> {
        MPoly::parse(&self.f)
    }
    pub fn support(&self) -> Result<SupportScheme> {
        SupportScheme::parse(&self.z, self.poly()?.nvars())
    }
    pub fn lct_value(&self) -> Result<BigRational> {
        parse_ratio(&self.lct)
    }
    /// Transfer is expected for p above this bound (the degree of f).
    pub fn transfer_threshold(&self) -> Result<u64> {
        Ok(self.poly()?.degree().unwrap_or(0) as u64)
    }
}

pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a: BigInt = a.trim().parse().map_err(|_| Error::Parse(format!("bad rational {}", s)))?;
    let b: BigInt = b.trim().parse().map_err(|_| Error::Parse(format!("bad rational {}", s)))?;
    if b.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(a, b))
}

fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ExperimentManifest {
    pub name: String,
    pub seed: u64,
    pub primes: Vec<u64>,
    pub m_min: u32,
    pub m_max: u32,
    #[serde(default = "one_vec")]
    pub extension_degrees: Vec<u32>,
    pub z_samples: usize,
    pub b_samples: usize,
    pub weight_primes: Vec<u64>,
    pub weight_m: usize,
    pub weight_rmax: u32,
    pub conj11_m_max: u32,
    pub zeta_order: usize,
    pub budget: u64,
    pub experiments: Vec<String>,
    /// Restrict to these corpus entries (all when absent).
    #[serde(default)]
    pub entries: Option<Vec<String>>,
}

fn one_vec() -> Vec<u32> {
    vec![1]
}

impl ExperimentManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: ExperimentManifest = toml::from_str(text).map_err(|e| Error::Parse(format!("manifest: {}", e)))?;
        if m.m_min < 1 || m.m_min > m.m_max {
            return Err(Error::Parse("need 1 <= m_min <= m_max".into()));
        }
        for e in &m.experiments {
            if !KNOWN_EXPERIMENTS.contains(&e.as_str()) {
                return Err(Error::Parse(format!("unknown experiment {}", e)));
            }
        }
        Ok(m)
    }

    pub fn default_manifest() -> Self {
        Self::parse(DEFAULT_MANIFEST).expect("default manifest parses")
    }
}

pub const KNOWN_EXPERIMENTS: [&str; 8] = ["transfer", "reparam", "strata", "conj11", "weights", "thom-seb", "similar", "poles"];

/// Sub-seed for one grid cell, so cells are independent of execution order.
pub fn cell_rng(seed: u64, tag: &str, a: u64, b: u64) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in tag.bytes() {
        h = (h ^ byte as u64).wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h ^ a.wrapping_mul(0x9e3779b97f4a7c15) ^ b.rotate_left(32))
}

fn random_unit(rng: &mut ChaCha8Rng, q: u64) -> Fq {
    rng.gen_range(1..q) as Fq
}

// ---------------------------------------------------------------------------
// Transfer

#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    pub p: u64,
    pub e: u32,
    pub m: u32,
    pub u: Vec<u64>,
    pub z_coeffs: Vec<Fq>,
    pub padic: SumReport,
    pub tadic: SumReport,
    pub equal: bool,
}

/// Compare E over O_L (L unramified of degree e, z = u·p^{−m}) with E over
/// F_q((t)) with z′ = Σ a_{−i} t^{−i}, where a_{−m} must equal ac̄(u).
pub fn transfer_check(
    f: &MPoly,
    z: &SupportScheme,
    p: u64,
    e: u32,
    m: u32,
    u: &[u64],
    zc: &[Fq],
    budget: u64,
) -> Result<TransferReport> {
    if m < 2 {
        return Err(Error::Invalid("transfer needs m >= 2".into()));
    }
    let k = ExtField::shared(p, e)?;
    let gr = GaloisRing::new(p, m, e)?;
    if u.len() != e as usize || !gr.is_unit(u) {
        return Err(Error::Invalid("u must be a unit with e coordinates".into()));
    }
    if zc.len() != m as usize || zc[0] != gr.residue(u, &k) {
        return Err(Error::Invalid("a_{-m} must be the residue of u".into()));
    }
    let opts = EngineOptions { budget, ..EngineOptions::fast() };
    let padic = if e == 1 { expsum_padic_with(f, p, m, z, u[0], &opts)? } else { expsum_padic_ext(f, p, e, m, z, u, budget)? };
    let tadic = expsum_tadic_full_with(f, &k, m as usize, zc, z, &opts)?;
    let equal = padic.eq_exact(&tadic);
    Ok(TransferReport { p, e, m, u: u.to_vec(), z_coeffs: zc.to_vec(), padic: padic.report(), tadic: tadic.report(), equal })
}

/// Random matched (u, z′) for a transfer comparison.
pub fn random_transfer_input(rng: &mut ChaCha8Rng, p: u64, e: u32, m: u32) -> Result<(Vec<u64>, Vec<Fq>)> {
    let k = ExtField::shared(p, e)?;
    let gr = GaloisRing::new(p, m, e)?;
    let pm = pow_u64(p, m);
    let u = loop {
        let u: Vec<u64> = (0..e).map(|_| rng.gen_range(0..pm)).collect();
        if gr.is_unit(&u) {
            break u;
        }
    };
    let mut zc = vec![gr.residue(&u, &k)];
    zc.extend((1..m).map(|_| rng.gen_range(0..k.size()) as Fq));
    Ok((u, zc))
}

// ---------------------------------------------------------------------------
// Two-term reduction and strata

#[derive(Clone, Debug, Serialize)]
pub struct ReparamReport {
    pub q: u64,
    pub m: usize,
    pub z_coeffs: Vec<Fq>,
    pub pair: (Fq, Fq),
    pub full: SumReport,
    pub simplified: SumReport,
    pub equal: bool,
}

/// Full sum with phase from z against the two-term sum with the derived (b_0, b_{m−1}).
pub fn reparam_check(f: &MPoly, z: &SupportScheme, k: &ExtField, m: usize, zc: &[Fq], budget: u64) -> Result<ReparamReport> {
    let opts = EngineOptions { budget, ..Default::default() };
    let (b0, bm) = simplified_pair(k, zc)?;
    let full = expsum_tadic_full_with(f, k, m, zc, z, &opts)?;
    let simp = expsum_tadic_simplified_with(f, k, m, b0, bm, z, &opts)?;
    Ok(ReparamReport {
        q: k.size(),
        m,
        z_coeffs: zc.to_vec(),
        pair: (b0, bm),
        equal: full.eq_exact(&simp),
        full: full.report(),
        simplified: simp.report(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumReport {
    pub q: u64,
    pub m: usize,
    pub i0: usize,
    pub b: (Fq, Fq),
    pub value: SumReport,
    pub vanishes: bool,
}

/// Stratum sums for every i0 with m > i0 + 2.
pub fn strata_check(f: &MPoly, z: &SupportScheme, k: &ExtField, m: usize, b0: Fq, bm: Fq, budget: u64) -> Result<Vec<StratumReport>> {
    let opts = EngineOptions { budget, ..Default::default() };
    let mut out = Vec::new();
    for i0 in 0..m.saturating_sub(2) {
        let s = stratum_sum(f, k, m, i0, b0, bm, z, &opts)?;
        out.push(StratumReport { q: k.size(), m, i0, b: (b0, bm), vanishes: s.is_zero(), value: s.report() });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Uniform decay bound

#[derive(Clone, Debug, Serialize)]
pub struct Conj11Row {
    pub p: u64,
    pub m: u32,
    pub abs_value: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Conj11Report {
    pub sigma: String,
    pub rows: Vec<Conj11Row>,
    /// Empirical constant: the largest |E|/q^{−mσ}.
    pub max_ratio: f64,
    /// The per-prime maximum ratio grows with m at the largest prime.
    pub grows_in_m: bool,
    /// The per-m maximum ratio grows with p at the largest m.
    pub grows_in_p: bool,
    pub label: String,
}

/// |E_{f,p^m}| against p^{−mσ} for z = p^{−m} (u = 1).
pub fn conjecture11_harness(f: &MPoly, z: &SupportScheme, sigma: &BigRational, primes: &[u64], ms: &[u32], budget: u64) -> Result<Conj11Report> {
    let s = sigma.to_f64().unwrap();
    let cells: Vec<(u64, u32)> = primes.iter().flat_map(|&p| ms.iter().map(move |&m| (p, m))).collect();
    let opts = EngineOptions { budget, ..EngineOptions::fast() };
    let rows: Vec<Conj11Row> = cells
        .par_iter()
        .map(|&(p, m)| {
            let v = expsum_padic_with(f, p, m, z, 1, &opts)?;
            let bound = (p as f64).powf(-(m as f64) * s);
            let a = v.abs();
            Ok(Conj11Row { p, m, abs_value: a, bound, ratio: a / bound })
        })
        .collect::<Result<_>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let tol = 1e-9;
    let grows_in_m = primes.last().is_some_and(|&p| {
        let seq: Vec<f64> = rows.iter().filter(|r| r.p == p).map(|r| r.ratio).collect();
        seq.len() > 1 && seq.windows(2).all(|w| w[1] > w[0] * (1.0 + tol)) && seq.last() > seq.first()
    });
    let grows_in_p = ms.last().is_some_and(|&m| {
        let seq: Vec<f64> = rows.iter().filter(|r| r.m == m).map(|r| r.ratio).collect();
        seq.len() > 1 && seq.windows(2).all(|w| w[1] > w[0] * (1.0 + tol)) && seq.last() > seq.first()
    });
    Ok(Conj11Report {
        sigma: ratio_string(sigma),
        rows,
        max_ratio,
        grows_in_m,
        grows_in_p,
        label: "EVIDENCE: finitely many primes and m".into(),
    })
}

// ---------------------------------------------------------------------------
// Weight bound

#[derive(Clone, Debug, Serialize)]
pub struct WeightRow {
    pub q: u64,
    pub b: (Fq, Fq),
    pub weight: Option<i64>,
    pub residual: f64,
    pub bound: String,
    /// "holds", "violated" or "inconclusive".
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightReport {
    pub m: usize,
    pub moi_ref: String,
    pub rows: Vec<WeightRow>,
    /// For each q and b_{m−1}, the fitted weight does not depend on b_0.
    pub b0_invariant: bool,
    pub all_hold: bool,
    pub any_violated: bool,
}

pub const WEIGHT_RESIDUAL_MAX: f64 = 0.05;

/// Fitted weights of S_r for sampled b against 2(mn − m·moi).
#[allow(clippy::too_many_arguments)]
pub fn weight_conjecture_check(
    f: &MPoly,
    z: &SupportScheme,
    m: usize,
    primes: &[u64],
    bs: &[(Fq, Fq)],
    moi_ref: &BigRational,
    rmax: u32,
    budget: u64,
) -> Result<WeightReport> {
    if primes.iter().any(|&p| p <= m as u64) {
        return Err(Error::Invalid("need p > m".into()));
    }
    let n = f.nvars() as i64;
    let bound = BigRational::from_integer(BigInt::from(2 * (m as i64) * n)) - BigRational::from_integer(BigInt::from(2 * m as i64)) * moi_ref;
    let opts = EngineOptions { budget, ..Default::default() };
    let cells: Vec<(u64, (Fq, Fq))> = primes.iter().flat_map(|&p| bs.iter().map(move |&b| (p, b))).collect();
    let rows: Vec<WeightRow> = cells
        .par_iter()
        .map(|&(p, (b0, bm))| {
            let b0 = b0 % p as Fq;
            let bm = (bm % p as Fq).max(1);
            let series = weight_series(f, z, m, b0, bm, p, 1, rmax, &opts)?;
            let fit = fit_weight(&series, p);
            let verdict = if fit.residual >= WEIGHT_RESIDUAL_MAX {
                "inconclusive"
            } else {
                match fit.weight {
                    None => "holds",
                    Some(w) if BigRational::from_integer(w.into()) <= bound => "holds",
                    Some(_) => "violated",
                }
            };
            Ok(WeightRow { q: p, b: (b0, bm), weight: fit.weight, residual: fit.residual, bound: ratio_string(&bound), verdict: verdict.into() })
        })
        .collect::<Result<_>>()?;
    let mut by_key: BTreeMap<(u64, Fq), Vec<Option<i64>>> = BTreeMap::new();
    for r in &rows {
        by_key.entry((r.q, r.b.1)).or_default().push(r.weight);
    }
    let b0_invariant = by_key.values().all(|v| v.windows(2).all(|w| w[0] == w[1]));
    Ok(WeightReport {
        m,
        moi_ref: ratio_string(moi_ref),
        all_hold: rows.iter().all(|r| r.verdict == "holds"),
        any_violated: rows.iter().any(|r| r.verdict == "violated"),
        rows,
        b0_invariant,
    })
}

// ---------------------------------------------------------------------------
// Thom–Sebastiani

#[derive(Clone, Debug, Serialize)]
pub struct ThomSebastianiReport {
    pub q: u64,
    pub m: usize,
    pub b: (Fq, Fq),
    pub rmax: u32,
    pub factorizes: bool,
    pub first_failure: Option<u32>,
    pub weights: (Option<i64>, Option<i64>, Option<i64>),
    pub additive: bool,
}

/// S_r(f1 ⊕ f2, Z1 × Z2) = S_r(f1, Z1)·S_r(f2, Z2) for r ≤ R.
#[allow(clippy::too_many_arguments)]
pub fn thom_sebastiani_check(
    f1: &MPoly,
    z1: &SupportScheme,
    f2: &MPoly,
    z2: &SupportScheme,
    m: usize,
    p: u64,
    b: (Fq, Fq),
    rmax: u32,
    budget: u64,
) -> Result<ThomSebastianiReport> {
    let (n1, n2) = (f1.nvars(), f2.nvars());
    let f = f1.extend_vars(n1 + n2).add(&f2.shift_vars(n1 + n2, n1));
    let z = z1.product(n1, z2, n2)?;
    let opts = EngineOptions { budget, ..Default::default() };
    let s1 = weight_series(f1, z1, m, b.0, b.1, p, 1, rmax, &opts)?;
    let s2 = weight_series(f2, z2, m, b.0, b.1, p, 1, rmax, &opts)?;
    let s = weight_series(&f, &z, m, b.0, b.1, p, 1, rmax, &opts)?;
    let first = (0..rmax as usize).find(|&i| !s[i].1.eq_value(&s1[i].1.mul(&s2[i].1))).map(|i| i as u32 + 1);
    let (w1, w2, w) = (fit_weight(&s1, p).weight, fit_weight(&s2, p).weight, fit_weight(&s, p).weight);
    let additive = match (w1, w2, w) {
        (Some(a), Some(b), Some(c)) => a + b == c,
        (None, _, None) | (_, None, None) => true,
        _ => false,
    };
    Ok(ThomSebastianiReport { q: p, m, b, rmax, factorizes: first.is_none(), first_failure: first, weights: (w1, w2, w), additive })
}

// ---------------------------------------------------------------------------
// Similarity

#[derive(Clone, Debug, Serialize)]
pub struct SimilarityPrime {
    pub p: u64,
    pub zeta_equal: bool,
    pub sums_equal: bool,
    pub mismatches: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimilarityReport {
    pub per_prime: Vec<SimilarityPrime>,
    /// Primes where every comparison passed.
    pub passing: Vec<u64>,
    pub note: String,
}

/// Compare zeta series (conductor-1 characters) and exponential sums of f
/// and g near the origin. The similarity itself is not verified.
pub fn similarity_compare(f: &MPoly, g: &MPoly, primes: &[u64], order: usize, ms: &[u32], budget: u64) -> Result<SimilarityReport> {
    if f.nvars() != g.nvars() {
        return Err(Error::Invalid("f and g need the same number of variables".into()));
    }
    let n = f.nvars();
    let z = SupportScheme::origin(n);
    let opts = EngineOptions { budget, ..EngineOptions::fast() };
    let per: Vec<SimilarityPrime> = primes
        .iter()
        .map(|&p| {
            let mut mism = Vec::new();
            for chi in MultChar::of_conductor(p, 1)? {
                let a = zeta_series(f, p, &z, &chi, order)?;
                let b = zeta_series(g, p, &z, &chi, order)?;
                if !a.eq_exact(&b) {
                    mism.push(format!("zeta chi={}", chi.id()));
                }
            }
            let zeta_equal = mism.is_empty();
            for &m in ms {
                for u in [1, 2] {
                    if u % p == 0 {
                        continue;
                    }
                    let a = expsum_padic_with(f, p, m, &z, u, &opts)?;
                    let b = expsum_padic_with(g, p, m, &z, u, &opts)?;
                    if !a.eq_exact(&b) {
                        mism.push(format!("sum m={} u={}", m, u));
                    }
                }
            }
            let sums_equal = !mism.iter().any(|s| s.starts_with("sum"));
            Ok(SimilarityPrime { p, zeta_equal, sums_equal, mismatches: mism })
        })
        .collect::<Result<_>>()?;
    let passing = per.iter().filter(|s| s.mismatches.is_empty()).map(|s| s.p).collect();
    Ok(SimilarityReport { per_prime: per, passing, note: "similarity of the pair is assumed, not checked".into() })
}

// ---------------------------------------------------------------------------
// Poles over the corpus

#[derive(Clone, Debug, Serialize)]
pub struct PoleRow {
    pub p: u64,
    pub sigma: Option<String>,
    pub real_parts: Vec<String>,
    pub max_modulus_error: f64,
    pub error: Option<String>,
}

pub fn pole_rows(f: &MPoly, z: &SupportScheme, primes: &[u64], order: usize) -> Vec<PoleRow> {
    primes
        .iter()
        .map(|&p| {
            let res = MultChar::trivial(p)
                .and_then(|chi| zeta_series(f, p, z, &chi, order))
                .and_then(|s| series_to_rational(&s, order, order));
            match res {
                Ok(rz) => {
                    let rep = poles(&rz, true);
                    PoleRow {
                        p,
                        sigma: rep.sigma.clone(),
                        real_parts: rep.poles.iter().map(|x| x.real_part.clone()).collect(),
                        max_modulus_error: rep.poles.iter().map(|x| x.modulus_error).fold(0.0, f64::max),
                        error: None,
                    }
                }
                Err(e) => PoleRow { p, sigma: None, real_parts: vec![], max_modulus_error: 0.0, error: Some(e.to_string()) },
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Manifest runner

#[derive(Clone, Debug, Serialize)]
pub struct EntryResult<T> {
    pub entry: String,
    pub result: T,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ManifestReport {
    pub manifest: String,
    pub seed: u64,
    pub transfer: Vec<EntryResult<Vec<TransferCell>>>,
    pub reparam: Vec<EntryResult<Vec<ReparamReport>>>,
    pub strata: Vec<EntryResult<Vec<StratumReport>>>,
    pub conj11: Vec<EntryResult<Conj11Report>>,
    pub weights: Vec<EntryResult<WeightReport>>,
    pub thom_sebastiani: Vec<EntryResult<ThomSebastianiReport>>,
    pub similar: Vec<EntryResult<SimilarityReport>>,
    pub poles: Vec<EntryResult<Vec<PoleRow>>>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferCell {
    pub above_threshold: bool,
    pub report: TransferReport,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub transfer_pass: usize,
    pub transfer_fail_above_threshold: usize,
    pub transfer_fail_below_threshold: usize,
    pub reparam_fail: usize,
    pub strata_fail: usize,
    pub weight_violations: usize,
    pub thom_sebastiani_fail: usize,
    /// Property failures (the CLI exits nonzero in assert mode when positive).
    pub failures: usize,
}

fn selected<'a>(corpus: &'a Corpus, man: &ExperimentManifest) -> Vec<&'a CorpusEntry> {
    corpus
        .entries
        .iter()
        .filter(|e| man.entries.as_ref().is_none_or(|list| list.iter().any(|n| n == &e.name)))
        .collect()
}

/// The (p, m) grid with p > m.
pub fn grid(man: &ExperimentManifest) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for &p in &man.primes {
        for m in man.m_min.max(2)..=man.m_max {
            if p > m as u64 {
                out.push((p, m));
            }
        }
    }
    out
}

pub fn run_transfer_entry(e: &CorpusEntry, man: &ExperimentManifest) -> Result<Vec<TransferCell>> {
    run_transfer(e, &e.support()?, man)
}

/// Transfer grid for an entry with an explicit support.
pub fn run_transfer(e: &CorpusEntry, z: &SupportScheme, man: &ExperimentManifest) -> Result<Vec<TransferCell>> {
    let f = e.poly()?;
    let threshold = e.transfer_threshold()?;
    let mut cells = Vec::new();
    for &(p, m) in &grid(man) {
        for &deg in &man.extension_degrees {
            let mut rng = cell_rng(man.seed, &format!("transfer/{}", e.name), p, (m as u64) << 8 | deg as u64);
            let (u, zc) = random_transfer_input(&mut rng, p, deg, m)?;
            let report = transfer_check(&f, z, p, deg, m, &u, &zc, man.budget)?;
            cells.push(TransferCell { above_threshold: p > threshold, report });
        }
    }
    Ok(cells)
}

pub fn run_reparam_entry(e: &CorpusEntry, man: &ExperimentManifest) -> Result<Vec<ReparamReport>> {
    let f = e.poly()?;
    let z = e.support()?;
    let mut out = Vec::new();
    for &(p, m) in &grid(man) {
        let k = ExtField::shared(p, 1)?;
        let mut rng = cell_rng(man.seed, &format!("reparam/{}", e.name), p, m as u64);
        for _ in 0..man.z_samples {
            let mut zc = vec![random_unit(&mut rng, p)];
            zc.extend((1..m).map(|_| rng.gen_range(0..p) as Fq));
            out.push(reparam_check(&f, &z, &k, m as usize, &zc, man.budget)?);
        }
    }
    Ok(out)
}

pub fn run_strata_entry(e: &CorpusEntry, man: &ExperimentManifest) -> Result<Vec<StratumReport>> {
    let f = e.poly()?;
    let z = e.support()?;
    let mut out = Vec::new();
    for &(p, m) in &grid(man) {
        if m < 3 {
            continue;
        }
        let k = ExtField::shared(p, 1)?;
        let mut rng = cell_rng(man.seed, &format!("strata/{}", e.name), p, m as u64);
        for _ in 0..man.b_samples {
            let b0 = rng.gen_range(0..p) as Fq;
            let bm = random_unit(&mut rng, p);
            out.extend(strata_check(&f, &z, &k, m as usize, b0, bm, man.budget)?);
        }
    }
    Ok(out)
}

pub fn weight_bs(man: &ExperimentManifest, tag: &str) -> Vec<(Fq, Fq)> {
    let mut rng = cell_rng(man.seed, tag, 0, 0);
    (0..man.b_samples).map(|_| (rng.gen_range(0..1000) as Fq, rng.gen_range(1..1000) as Fq)).collect()
}

/// Run every experiment listed in the manifest over the selected corpus.
pub fn run_manifest(corpus: &Corpus, man: &ExperimentManifest) -> Result<ManifestReport> {
    let mut rep = ManifestReport { manifest: man.name.clone(), seed: man.seed, ..Default::default() };
    let entries = selected(corpus, man);
    let wants = |x: &str| man.experiments.iter().any(|e| e == x);
    let ms: Vec<u32> = (man.m_min.max(1)..=man.conj11_m_max).collect();
    for e in &entries {
        if wants("transfer") {
            rep.transfer.push(EntryResult { entry: e.name.clone(), result: run_transfer_entry(e, man)? });
        }
        if wants("reparam") {
            rep.reparam.push(EntryResult { entry: e.name.clone(), result: run_reparam_entry(e, man)? });
        }
        if wants("strata") {
            rep.strata.push(EntryResult { entry: e.name.clone(), result: run_strata_entry(e, man)? });
        }
        if wants("conj11") {
            let r = conjecture11_harness(&e.poly()?, &e.support()?, &e.lct_value()?, &man.primes, &ms, man.budget)?;
            rep.conj11.push(EntryResult { entry: e.name.clone(), result: r });
        }
        if wants("weights") && e.nonrational {
            let bs = weight_bs(man, &format!("weights/{}", e.name));
            let r = weight_conjecture_check(
                &e.poly()?,
                &e.support()?,
                man.weight_m,
                &man.weight_primes,
                &bs,
                &e.lct_value()?,
                man.weight_rmax,
                man.budget,
            )?;
            rep.weights.push(EntryResult { entry: e.name.clone(), result: r });
        }
        if wants("poles") {
            let f = e.poly()?;
            // the lifting tree grows quickly with n; three or more variables get a short series
            let order = if f.nvars() <= 2 { man.zeta_order } else { man.zeta_order.min(6) };
            let rows = pole_rows(&f, &e.support()?, &man.primes, order);
            rep.poles.push(EntryResult { entry: e.name.clone(), result: rows });
        }
    }
    if wants("thom-seb") {
        for pair in &corpus.pairs {
            let (a, b) = (corpus.get(&pair.left).unwrap(), corpus.get(&pair.right).unwrap());
            for &p in &man.weight_primes {
                let r = thom_sebastiani_check(
                    &a.poly()?,
                    &a.support()?,
                    &b.poly()?,
                    &b.support()?,
                    man.weight_m,
                    p,
                    (1, 1),
                    man.weight_rmax,
                    man.budget,
                )?;
                rep.thom_sebastiani.push(EntryResult { entry: format!("{} + {}", pair.left, pair.right), result: r });
            }
        }
    }
    if wants("similar") {
        let f = MPoly::parse("x1^2+x2^2+x2^3")?;
        let g = MPoly::parse("x1^2+x2^2")?;
        let ms: Vec<u32> = (1..=man.m_max.min(3)).collect();
        let r = similarity_compare(&f, &g, &man.primes, man.zeta_order.min(8), &ms, man.budget)?;
        rep.similar.push(EntryResult { entry: "A1 perturbed vs A1".into(), result: r });
    }
    let s = &mut rep.summary;
    for er in &rep.transfer {
        for c in &er.result {
            match (c.report.equal, c.above_threshold) {
                (true, _) => s.transfer_pass += 1,
                (false, true) => s.transfer_fail_above_threshold += 1,
                (false, false) => s.transfer_fail_below_threshold += 1,
            }
        }
    }
    s.reparam_fail = rep.reparam.iter().flat_map(|r| &r.result).filter(|r| !r.equal).count();
    s.strata_fail = rep.strata.iter().flat_map(|r| &r.result).filter(|r| !r.vanishes).count();
    s.weight_violations = rep.weights.iter().flat_map(|r| &r.result.rows).filter(|r| r.verdict == "violated").count();
    s.thom_sebastiani_fail = rep.thom_sebastiani.iter().filter(|r| !r.result.factorizes).count();
    s.failures = s.transfer_fail_above_threshold + s.reparam_fail + s.strata_fail + s.weight_violations + s.thom_sebastiani_fail;
    Ok(rep)
}

/// Convert a sum to its normalized JSON form (re-exported for reports).
pub fn sum_report(v: &SumValue) -> SumReport {
    v.report()
}
