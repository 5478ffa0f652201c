use std::fmt::Write as _;
use std::path::Path;

use igusa::blowup::{check_prop72, cusp_sequence, sweep, Prop72};
use igusa::charsum::{
    expsum_padic_ext, expsum_padic_with, expsum_tadic_full_with, expsum_tadic_simplified_with, fit_weight, gauss_sum,
    weight_series, EngineOptions, MultChar, DEFAULT_BUDGET,
};
use igusa::denef::{denef_eval, denef_series_crosscheck, monomial_resolution, ResolutionData};
use igusa::experiments::{
    cell_rng, conjecture11_harness, parse_ratio, run_manifest, run_transfer_entry, similarity_compare,
    thom_sebastiani_check, transfer_check, random_transfer_input, weight_conjecture_check, Corpus, ExperimentManifest,
};
use igusa::jet::{jet_dimension_estimate, jet_polynomials, reparam_coefficients, reparam_solve, simplified_pair, stratum_count};
use igusa::zeta::{coeff_extraction_check, poles, series_to_rational, sigma_moi_estimate, zeta_series_with_budget, DEFAULT_TREE_BUDGET};
use igusa::{Error, ExtField, Fq, MPoly, Result, SupportScheme};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::{json, Value};

use crate::json;
use crate::{Cli, Cmd, DenefArgs, PolyArgs, ZetaArgs};

pub struct Outcome {
    pub text: String,
    pub violated: bool,
    pub note: String,
    /// Exit 1 on a violation even without --assert.
    pub strict: bool,
}

impl Outcome {
    fn text(text: String) -> Self {
        Outcome { text, violated: false, note: String::new(), strict: false }
    }
    fn json(v: Value) -> Self {
        Self::text(pretty(&v))
    }
    fn check(mut self, violated: bool, note: &str) -> Self {
        self.violated = violated;
        self.note = note.into();
        self
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

pub fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

/// "5,7,11", "1..4" (exclusive), "1..=4", or a mix.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let bad = || Error::Parse(format!("list item `{}`", part));
        if let Some((a, b)) = part.split_once("..=") {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            out.extend(a..=b);
        } else if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            out.extend(a..b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn parse_u32s(s: &str) -> Result<Vec<u32>> {
    parse_list(s)?
        .into_iter()
        .map(|x| u32::try_from(x).map_err(|_| Error::Parse(format!("{} is too large", x))))
        .collect()
}

fn poly_and_support(a: &PolyArgs) -> Result<(MPoly, SupportScheme)> {
    let f = MPoly::parse(&a.f)?;
    let z = SupportScheme::parse(&a.z, f.nvars())?;
    Ok((f, z))
}

fn field_elements(s: &str, k: &ExtField) -> Result<Vec<Fq>> {
    let v = parse_u32s(s)?;
    if let Some(&x) = v.iter().find(|&&x| x as u64 >= k.size()) {
        return Err(Error::Invalid(format!("{} is not an element index of F_{}", x, k.size())));
    }
    Ok(v)
}

fn default_order(f: &MPoly) -> usize {
    if f.nvars() <= 2 {
        20
    } else {
        6
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let budget = cli.budget.unwrap_or(DEFAULT_BUDGET);
    let tree_budget = cli.budget.unwrap_or(DEFAULT_TREE_BUDGET);
    match &cli.cmd {
        Cmd::Expsum { poly, side, p, e, m, u, zc, b0, bm, fast } => {
            let (f, z) = poly_and_support(poly)?;
            let base = if *fast { EngineOptions::fast() } else { EngineOptions::default() };
            let opts = EngineOptions { budget, ..base };
            let value = match side.as_str() {
                "padic" => {
                    let u = parse_list(u)?;
                    if *e == 1 {
                        if u.len() != 1 {
                            return Err(Error::Invalid("u needs one coordinate for e = 1".into()));
                        }
                        expsum_padic_with(&f, *p, *m, &z, u[0], &opts)?
                    } else {
                        expsum_padic_ext(&f, *p, *e, *m, &z, &u, budget)?
                    }
                }
                "tadic" => {
                    let k = ExtField::shared(*p, *e)?;
                    let zc = zc.as_deref().ok_or_else(|| Error::Invalid("--z is required for the tadic side".into()))?;
                    let zc = field_elements(zc, &k)?;
                    if zc.len() != *m as usize {
                        return Err(Error::Invalid(format!("--z needs {} coefficients", m)));
                    }
                    expsum_tadic_full_with(&f, &k, *m as usize, &zc, &z, &opts)?
                }
                "simplified" => {
                    let k = ExtField::shared(*p, *e)?;
                    let (b0, bm) = match (b0, bm) {
                        (Some(a), Some(b)) => (*a, *b),
                        _ => return Err(Error::Invalid("--b0 and --bm are required for the simplified side".into())),
                    };
                    field_elements(&format!("{},{}", b0, bm), &k)?;
                    expsum_tadic_simplified_with(&f, &k, *m as usize, b0, bm, &z, &opts)?
                }
                other => return Err(Error::Invalid(format!("unknown side `{}` (padic, tadic, simplified)", other))),
            };
            Ok(Outcome::json(json!({
                "f": f.to_string(),
                "Z": poly.z,
                "side": side,
                "p": p,
                "e": e,
                "m": m,
                "value": value.report(),
            })))
        }
        Cmd::Jets { f, r } => {
            let f = MPoly::parse(f)?;
            let n = f.nvars();
            let exp = jet_polynomials(&f, *r);
            let legend: Vec<Value> = (0..=*r)
                .flat_map(|i| (0..n).map(move |j| json!({"var": format!("x{}", i * n + j + 1), "of": format!("x{}", j + 1), "level": i})))
                .collect();
            let polys: Vec<Value> =
                exp.polys().iter().enumerate().map(|(l, g)| json!({"l": l, "f_l": g.to_string()})).collect();
            Ok(Outcome::json(json!({"f": f.to_string(), "r": r, "legend": legend, "jets": polys})))
        }
        Cmd::Strata { poly, p, e, m, i, dimension, rmax, lct } => {
            let (f, z) = poly_and_support(poly)?;
            if *m < 1 {
                return Err(Error::Invalid("m must be at least 1".into()));
            }
            if *dimension {
                let lct = match lct {
                    Some(s) => Some(parse_ratio(s)?.to_f64().unwrap_or(f64::NAN)),
                    None => None,
                };
                let est = jet_dimension_estimate(&f, &z, *m, *p, *e, *rmax, lct)?;
                let bad = est.within_bound == Some(false);
                return Ok(Outcome::json(json!({"f": f.to_string(), "m": m, "estimate": est})).check(bad, "dimension above bound"));
            }
            let k = ExtField::shared(*p, *e)?;
            let exp = jet_polynomials(&f, m - 1);
            let is: Vec<usize> = match i {
                Some(i) => vec![*i],
                None => (0..*m).collect(),
            };
            let mut counts = Vec::new();
            for i in is {
                let c = stratum_count(&exp, &z, &k, *m, i)?;
                counts.push(json!({"i": i, "count": c.to_string()}));
            }
            Ok(Outcome::json(json!({"f": f.to_string(), "q": k.size(), "m": m, "strata": counts})))
        }
        Cmd::Reparam { p, e, zc } => {
            let k = ExtField::shared(*p, *e)?;
            let zc = field_elements(zc, &k)?;
            let alphas = reparam_solve(&k, &zc)?;
            let coeffs = reparam_coefficients(&k, &zc, &alphas);
            let (b0, bm) = simplified_pair(&k, &zc)?;
            Ok(Outcome::json(json!({
                "q": k.size(),
                "z": zc,
                "alphas": alphas,
                "coefficients": coeffs,
                "b0": b0,
                "b_m_minus_1": bm,
            })))
        }
        Cmd::Gauss { p, c, chi } => {
            let chars = match chi {
                Some(id) => vec![MultChar::from_id(*p, id)?],
                None => MultChar::of_conductor(*p, *c)?,
            };
            let mut rows = Vec::new();
            let mut bad = false;
            for ch in chars {
                let g = gauss_sum(&ch);
                let c = ch.conductor() as i32;
                let scaled = g.abs() * (*p as f64 - 1.0) * (*p as f64).powi(c - 1);
                let expected = if ch.is_trivial() { 1.0 } else { (*p as f64).powf(c as f64 / 2.0) };
                let holds = (scaled - expected).abs() < 1e-9 * expected.max(1.0);
                bad |= !holds;
                rows.push(json!({
                    "chi": ch.id(),
                    "conductor": ch.conductor(),
                    "g": json::cyclo(&g),
                    "abs": g.abs(),
                    "abs_times_normalization": scaled,
                    "expected": expected,
                    "holds": holds,
                }));
            }
            Ok(Outcome::json(json!({"p": p, "gauss_sums": rows})).check(bad, "Gauss sum modulus"))
        }
        Cmd::ZetaSeries { zeta } => {
            let (f, z, chi, order) = zeta_inputs(zeta)?;
            let s = zeta_series_with_budget(&f, zeta.p, &z, &chi, order, tree_budget)?;
            Ok(Outcome::json(json!({"f": f.to_string(), "Z": zeta.poly.z, "series": json::series(&s)})))
        }
        Cmd::ZetaFit { zeta, max_num, max_den } | Cmd::Poles { zeta, max_num, max_den } => {
            let (f, z, chi, order) = zeta_inputs(zeta)?;
            let s = zeta_series_with_budget(&f, zeta.p, &z, &chi, order, tree_budget)?;
            let rz = series_to_rational(&s, max_num.unwrap_or(order), max_den.unwrap_or(order))?;
            let mut v = json!({"f": f.to_string(), "Z": zeta.poly.z, "p": zeta.p, "chi": chi.id(), "order": order});
            if matches!(cli.cmd, Cmd::ZetaFit { .. }) {
                v["fit"] = json::rational_zeta(&rz);
            } else {
                v["poles"] = serde_json::to_value(poles(&rz, chi.is_trivial())).expect("json");
            }
            Ok(Outcome::json(v))
        }
        Cmd::MoiEst { poly, primes, order, critical_values } => {
            let (f, z) = poly_and_support(poly)?;
            let primes = parse_list(primes)?;
            let order = order.unwrap_or_else(|| default_order(&f));
            let cvs: Option<Vec<BigInt>> = match critical_values {
                Some(s) => Some(
                    s.split(',')
                        .map(|x| x.trim().parse::<BigInt>().map_err(|_| Error::Parse(format!("critical value `{}`", x))))
                        .collect::<Result<_>>()?,
                ),
                None => None,
            };
            let rep = sigma_moi_estimate(&f, &z, &primes, order, cvs.as_deref())?;
            Ok(Outcome::json(json!({"f": f.to_string(), "Z": poly.z, "order": order, "report": rep})))
        }
        Cmd::CoeffCheck { poly, p, m, u } => {
            let (f, z) = poly_and_support(poly)?;
            let c = coeff_extraction_check(&f, *p, *m, &z, *u)?;
            Ok(Outcome::json(json!({
                "f": f.to_string(),
                "Z": poly.z,
                "p": p,
                "m": m,
                "u": u,
                "sum": c.lhs.report(),
                "from_zeta": json::cyclo(&c.rhs),
                "characters": c.characters,
                "equal": c.equal,
            }))
            .check(!c.equal, "sum differs from the zeta-coefficient expression"))
        }
        Cmd::DenefEval { data, order } => {
            let (rd, chi_id, _) = resolution_inputs(data)?;
            let d = character_order(&rd, &chi_id)?;
            let rz = denef_eval(&rd, &chi_id, d)?;
            let expansion: Vec<Value> = rz.expand(*order).iter().map(json::cyclo).collect();
            let pl = poles(&rz, chi_id == "trivial");
            Ok(Outcome::json(json!({
                "q": rd.q,
                "chi": chi_id,
                "divisors": rd.divisors,
                "zeta": json::rational_zeta(&rz),
                "expansion": expansion,
                "poles": pl,
            })))
        }
        Cmd::DenefCheck { data, f, order } => {
            let (rd, chi_id, mono) = resolution_inputs(data)?;
            let f = match (f, mono) {
                (Some(s), _) => MPoly::parse_in(s, rd.n)?,
                (None, Some(g)) => g,
                (None, None) => return Err(Error::Invalid("--f is required with --data".into())),
            };
            let z = SupportScheme::parse(&data.z, rd.n)?;
            let chi = MultChar::from_id(rd.q, &chi_id)?;
            let cc = denef_series_crosscheck(&rd, &chi, &f, &z, *order)?;
            Ok(Outcome::json(json!({"f": f.to_string(), "Z": data.z, "q": rd.q, "chi": chi_id, "check": cc}))
                .check(!cc.equal, "Denef expansion differs from the zeta series"))
        }
        Cmd::Weights { poly, m, p, e, b0, bm, rmax } => {
            let (f, z) = poly_and_support(poly)?;
            let opts = EngineOptions { budget, ..Default::default() };
            let series = weight_series(&f, &z, *m, *b0, *bm, *p, *e, *rmax, &opts)?;
            let fit = fit_weight(&series, p.pow(*e));
            let s: Vec<Value> = series.iter().map(|(r, v)| json!({"r": r, "S_r": json::cyclo(v)})).collect();
            Ok(Outcome::json(json!({"f": f.to_string(), "Z": poly.z, "q": p.pow(*e), "m": m, "b": [b0, bm], "series": s, "fit": fit})))
        }
        Cmd::Transfer { f, z, p, e, m, u, zc, seed, corpus, manifest, format } => {
            if *corpus {
                return transfer_corpus(manifest.as_deref(), format);
            }
            let f = MPoly::parse(f.as_deref().ok_or_else(|| Error::Invalid("--f is required without --corpus".into()))?)?;
            let zs = SupportScheme::parse(z, f.nvars())?;
            let (p, m) = match (p, m) {
                (Some(p), Some(m)) => (*p, *m),
                _ => return Err(Error::Invalid("--p and --m are required without --corpus".into())),
            };
            let (uv, zv) = match (u, zc) {
                (Some(u), Some(zc)) => (parse_list(u)?, field_elements(zc, &*ExtField::shared(p, *e)?)?),
                (None, None) => random_transfer_input(&mut cell_rng(*seed, "transfer", p, m as u64), p, *e, m)?,
                _ => return Err(Error::Invalid("give both --u and --z, or neither".into())),
            };
            let rep = transfer_check(&f, &zs, p, *e, m, &uv, &zv, budget)?;
            let eq = rep.equal;
            Ok(Outcome::json(json!({"f": f.to_string(), "Z": z, "report": rep})).check(!eq, "transfer sums differ"))
        }
        Cmd::Conj11 { poly, sigma, primes, ms, format } => {
            let (f, z) = poly_and_support(poly)?;
            let s = parse_ratio(sigma)?;
            let rep = conjecture11_harness(&f, &z, &s, &parse_list(primes)?, &parse_u32s(ms)?, budget)?;
            if format == "csv" {
                let mut out = String::from("p,m,abs_value,bound,ratio\n");
                for r in &rep.rows {
                    writeln!(out, "{},{},{:e},{:e},{:.12}", r.p, r.m, r.abs_value, r.bound, r.ratio).unwrap();
                }
                return Ok(Outcome::text(out));
            }
            Ok(Outcome::json(json!({"f": f.to_string(), "Z": poly.z, "report": rep})))
        }
        Cmd::ConjWeight { poly, m, primes, moi, b_samples, rmax, seed } => {
            let (f, z) = poly_and_support(poly)?;
            let moi = parse_ratio(moi)?;
            let mut rng = cell_rng(*seed, "conj-weight", *m as u64, 0);
            let bs: Vec<(Fq, Fq)> = (0..*b_samples).map(|_| (rng.gen_range(0..1 << 20), rng.gen_range(1..1 << 20))).collect();
            let rep = weight_conjecture_check(&f, &z, *m, &parse_list(primes)?, &bs, &moi, *rmax, budget)?;
            let bad = rep.any_violated;
            Ok(Outcome::json(json!({"f": f.to_string(), "Z": poly.z, "report": rep})).check(bad, "weight above bound"))
        }
        Cmd::ThomSeb { f1, z1, f2, z2, m, p, b0, bm, rmax, corpus } => {
            let primes = parse_list(p)?;
            let mut cases: Vec<(String, MPoly, SupportScheme, MPoly, SupportScheme)> = Vec::new();
            if *corpus {
                let c = Corpus::builtin();
                for pair in &c.pairs {
                    let get = |name: &str| -> Result<(MPoly, SupportScheme)> {
                        let e = c.get(name).ok_or_else(|| Error::Invalid(format!("no corpus entry {}", name)))?;
                        Ok((e.poly()?, e.support()?))
                    };
                    let (a, za) = get(&pair.left)?;
                    let (b, zb) = get(&pair.right)?;
                    cases.push((format!("{} + {}", pair.left, pair.right), a, za, b, zb));
                }
            } else {
                let (a, b) = match (f1, f2) {
                    (Some(a), Some(b)) => (MPoly::parse(a)?, MPoly::parse(b)?),
                    _ => return Err(Error::Invalid("--f1 and --f2 are required without --corpus".into())),
                };
                let (za, zb) = (SupportScheme::parse(z1, a.nvars())?, SupportScheme::parse(z2, b.nvars())?);
                cases.push((format!("{} + {}", a, b), a, za, b, zb));
            }
            let mut rows = Vec::new();
            let mut bad = false;
            for (name, a, za, b, zb) in &cases {
                for &q in &primes {
                    let bb = (*b0 % q as Fq, (*bm % q as Fq).max(1));
                    let rep = thom_sebastiani_check(a, za, b, zb, *m, q, bb, *rmax, budget)?;
                    bad |= !rep.factorizes;
                    rows.push(json!({"pair": name, "report": rep}));
                }
            }
            Ok(Outcome::json(json!({"checks": rows})).check(bad, "S_r does not factor"))
        }
        Cmd::Similar { f, g, primes, order, ms } => {
            let (a, b) = (MPoly::parse(f)?, MPoly::parse(g)?);
            let n = a.nvars().max(b.nvars());
            let (a, b) = (a.extend_vars(n), b.extend_vars(n));
            let rep = similarity_compare(&a, &b, &parse_list(primes)?, *order, &parse_u32s(ms)?, budget)?;
            Ok(Outcome::json(json!({"f": a.to_string(), "g": b.to_string(), "report": rep})))
        }
        Cmd::BlowupCheck { seeds, n, d, length, cusp, format } => {
            if *cusp {
                return Ok(cusp_report(*d));
            }
            let (from, to) = seed_range(seeds)?;
            let s = sweep(from, to, *length, *n, *d)?;
            let bad = s.counterexamples > 0;
            if format == "csv" {
                let mut out = String::from("seed,ratio,k\n");
                for (seed, ratio, k) in &s.rows {
                    writeln!(out, "{},{},{}", seed, ratio, k).unwrap();
                }
                eprintln!(
                    "{} sequences, {} subsets checked, {} applicable, {} counterexamples",
                    s.sequences, s.subsets_checked, s.applicable, s.counterexamples
                );
                return Ok(Outcome::text(out).check(bad, "counterexample found"));
            }
            Ok(Outcome::json(serde_json::to_value(&s).expect("json")).check(bad, "counterexample found"))
        }
        Cmd::Corpus { run, manifest, corpus_file, csv } => {
            let corpus = match corpus_file {
                Some(path) => Corpus::parse(&read(path)?)?,
                None => Corpus::builtin(),
            };
            if !*run {
                let mut rows = Vec::new();
                for e in &corpus.entries {
                    rows.push(json!({
                        "name": e.name,
                        "f": e.f,
                        "Z": e.z,
                        "lct": e.lct,
                        "nonrational": e.nonrational,
                        "transfer_threshold": e.transfer_threshold()?,
                        "provenance": e.provenance,
                    }));
                }
                return Ok(Outcome::json(json!({"entries": rows, "pairs": corpus.pairs})));
            }
            let man = load_manifest(manifest.as_deref())?;
            let man = ExperimentManifest { budget: cli.budget.unwrap_or(man.budget), ..man };
            let rep = run_manifest(&corpus, &man)?;
            if let Some(dir) = csv {
                write_csv(dir, &rep)?;
            }
            let bad = rep.summary.failures > 0;
            let mut out = Outcome::json(serde_json::to_value(&rep).expect("json")).check(bad, "manifest reported failures");
            out.strict = true;
            Ok(out)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {}", path.display(), e)))
}

fn load_manifest(path: Option<&Path>) -> Result<ExperimentManifest> {
    match path {
        Some(p) => ExperimentManifest::parse(&read(p)?),
        None => Ok(ExperimentManifest::default_manifest()),
    }
}

fn seed_range(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::Parse(format!("seed range `{}` (use a..b or a..=b)", s));
    if let Some((a, b)) = s.split_once("..=") {
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        Ok((a, b + 1))
    } else if let Some((a, b)) = s.split_once("..") {
        Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
    } else {
        let a: u64 = s.parse().map_err(|_| bad())?;
        Ok((a, a + 1))
    }
}

fn zeta_inputs(a: &ZetaArgs) -> Result<(MPoly, SupportScheme, MultChar, usize)> {
    let (f, z) = poly_and_support(&a.poly)?;
    let chi = MultChar::from_id(a.p, &a.chi)?;
    let order = a.order.unwrap_or_else(|| default_order(&f));
    Ok((f, z, chi, order))
}

/// Resolution data from a file or a monomial, the character id, and the monomial itself.
fn resolution_inputs(a: &DenefArgs) -> Result<(ResolutionData, String, Option<MPoly>)> {
    match (&a.data, &a.monomial) {
        (Some(path), None) => Ok((ResolutionData::parse(&read(path)?)?, a.chi.clone(), None)),
        (None, Some(exps)) => {
            let p = a.p.ok_or_else(|| Error::Invalid("--p is required with --monomial".into()))?;
            let exps = parse_u32s(exps)?;
            let n = exps.len();
            let z = SupportScheme::parse(&a.z, n)?;
            let chi = MultChar::from_id(p, &a.chi)?;
            let rd = monomial_resolution(&exps, p, &z, &chi)?;
            let g = MPoly::from_terms(n, [(exps, BigInt::from(1))]);
            Ok((rd, chi.id(), Some(g)))
        }
        _ => Err(Error::Invalid("give exactly one of --data and --monomial".into())),
    }
}

fn character_order(rd: &ResolutionData, id: &str) -> Result<u64> {
    if id == "trivial" {
        return Ok(1);
    }
    Ok(MultChar::from_id(rd.q, id)?.order())
}

fn transfer_corpus(manifest: Option<&Path>, format: &str) -> Result<Outcome> {
    let man = load_manifest(manifest)?;
    let corpus = Corpus::builtin();
    let mut rows = Vec::new();
    let mut csv = String::from("entry,p,e,m,above_threshold,equal\n");
    let mut bad = false;
    for e in &corpus.entries {
        if let Some(names) = &man.entries {
            if !names.contains(&e.name) {
                continue;
            }
        }
        let cells = run_transfer_entry(e, &man)?;
        for c in &cells {
            bad |= c.above_threshold && !c.report.equal;
            writeln!(csv, "{},{},{},{},{},{}", e.name, c.report.p, c.report.e, c.report.m, c.above_threshold, c.report.equal).unwrap();
        }
        rows.push(json!({"entry": e.name, "cells": cells}));
    }
    let text = if format == "csv" { csv } else { pretty(&json!({"manifest": man.name, "transfer": rows})) };
    Ok(Outcome::text(text).check(bad, "transfer failed above the threshold"))
}

fn cusp_report(d: u64) -> Outcome {
    let (state, steps) = cusp_sequence();
    let mut checks = Vec::new();
    for sub in state.intersecting_subsets() {
        let r = check_prop72(&state, &sub, d);
        let bad = matches!(r, Prop72::Counterexample { .. });
        checks.push((json!({"divisors": sub, "result": r}), bad));
    }
    let bad = checks.iter().any(|c| c.1);
    let checks: Vec<Value> = checks.into_iter().map(|c| c.0).collect();
    Outcome::json(json!({
        "numerical_data": state.numerical_data(),
        "steps": steps,
        "state": state,
        "checks": checks,
    }))
    .check(bad, "counterexample in the cusp sequence")
}

fn write_csv(dir: &Path, rep: &igusa::experiments::ManifestReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut t = String::from("entry,p,e,m,above_threshold,equal\n");
    for er in &rep.transfer {
        for c in &er.result {
            writeln!(t, "{},{},{},{},{},{}", er.entry, c.report.p, c.report.e, c.report.m, c.above_threshold, c.report.equal).unwrap();
        }
    }
    let mut c11 = String::from("entry,p,m,abs_value,bound,ratio\n");
    for er in &rep.conj11 {
        for r in &er.result.rows {
            writeln!(c11, "{},{},{},{:e},{:e},{:.12}", er.entry, r.p, r.m, r.abs_value, r.bound, r.ratio).unwrap();
        }
    }
    let mut w = String::from("entry,q,b0,bm,weight,residual,bound,verdict\n");
    for er in &rep.weights {
        for r in &er.result.rows {
            let wt = r.weight.map(|x| x.to_string()).unwrap_or_else(|| "-inf".into());
            writeln!(w, "{},{},{},{},{},{:.6},{},{}", er.entry, r.q, r.b.0, r.b.1, wt, r.residual, r.bound, r.verdict).unwrap();
        }
    }
    let mut pl = String::from("entry,p,sigma,real_parts\n");
    for er in &rep.poles {
        for r in &er.result {
            writeln!(pl, "{},{},{},{}", er.entry, r.p, r.sigma.clone().unwrap_or_default(), r.real_parts.join(" ")).unwrap();
        }
    }
    for (name, body) in [("transfer.csv", t), ("conj11.csv", c11), ("weights.csv", w), ("poles.csv", pl)] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}
