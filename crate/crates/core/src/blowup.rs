//! Numerical data (N, ν) under a sequence of admissible blow-ups, with
//! intersection bookkeeping kept abstract, and the divisibility check for
//! n intersecting divisors with equal ratio ν/N.

use std::collections::BTreeSet;

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Origin {
    Strict,
    Exceptional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DivisorDatum {
    pub n: u64,
    pub nu: u64,
    pub origin: Origin,
}

/// One blow-up with smooth center C of codimension c.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlowupStep {
    pub c: u32,
    /// Exceptional divisors containing C whose strict transforms meet the new
    /// divisor together (at most c − 1).
    pub through: Vec<usize>,
    /// A further exceptional divisor containing C.
    pub extra: Option<usize>,
    /// Multiplicity of the strict transform of D at the generic point of C.
    pub mu: u64,
    /// Divisors through the chosen point not containing C.
    pub transverse: Vec<usize>,
    /// Strict-transform components containing C; each meets the new divisor.
    pub strict: Vec<usize>,
}

/// Divisors and the cells (sets of divisors with a common point).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlowupState {
    pub dim: usize,
    pub divisors: Vec<DivisorDatum>,
    pub cells: Vec<BTreeSet<usize>>,
}

impl BlowupState {
    /// Components D_j of multiplicity N_j (ν = 1), all through one point.
    pub fn new(dim: usize, multiplicities: &[u64]) -> Result<Self> {
        if dim == 0 || multiplicities.len() > dim {
            return Err(Error::Invalid("need at most n components meeting at a point".into()));
        }
        if multiplicities.contains(&0) {
            return Err(Error::Invalid("multiplicities must be positive".into()));
        }
        let divisors = multiplicities.iter().map(|&n| DivisorDatum { n, nu: 1, origin: Origin::Strict }).collect();
        let cells = vec![(0..multiplicities.len()).collect()];
        Ok(BlowupState { dim, divisors, cells })
    }

    fn in_some_cell(&self, set: &BTreeSet<usize>) -> bool {
        set.is_empty() || self.cells.iter().any(|c| set.is_subset(c))
    }

    /// Sets of exactly n divisors with a common point.
    pub fn intersecting_subsets(&self) -> Vec<Vec<usize>> {
        let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in &self.cells {
            if c.len() == self.dim {
                out.insert(c.iter().copied().collect());
            }
        }
        out.into_iter().collect()
    }

    pub fn numerical_data(&self) -> Vec<(u64, u64)> {
        self.divisors.iter().map(|d| (d.n, d.nu)).collect()
    }
}

/// N = Σ_{through} N_i + μ [+ N_extra], ν = Σ_{through} (ν_i − 1) + c [+ ν_extra − 1].
/// Appends the new exceptional divisor and its cells; returns its datum.
pub fn blowup_update(state: &mut BlowupState, step: &BlowupStep) -> Result<DivisorDatum> {
    let n = state.dim as u32;
    let t = state.divisors.len();
    if step.c < 2 || step.c > n {
        return Err(Error::Invalid(format!("center codimension {} outside 2..={}", step.c, n)));
    }
    if step.through.len() > step.c as usize - 1 {
        return Err(Error::Invalid("at most c - 1 divisors may be listed as through".into()));
    }
    if step.transverse.len() > (n - step.c) as usize {
        return Err(Error::Invalid("too many transverse divisors for normal crossings".into()));
    }
    let mut all: BTreeSet<usize> = BTreeSet::new();
    let listed = step.through.iter().chain(step.extra.iter()).chain(&step.transverse).chain(&step.strict);
    let mut count = 0;
    for &i in listed {
        if i >= t {
            return Err(Error::Invalid(format!("unknown divisor {}", i)));
        }
        all.insert(i);
        count += 1;
    }
    if all.len() != count {
        return Err(Error::Invalid("a divisor is listed twice".into()));
    }
    for &i in step.through.iter().chain(step.extra.iter()) {
        if state.divisors[i].origin != Origin::Exceptional {
            return Err(Error::Invalid(format!("divisor {} is not exceptional", i)));
        }
    }
    for &i in &step.strict {
        if state.divisors[i].origin != Origin::Strict {
            return Err(Error::Invalid(format!("divisor {} is not a strict transform", i)));
        }
    }
    // the strict transform of D need not have normal crossings yet
    let nc: BTreeSet<usize> = all.difference(&step.strict.iter().copied().collect()).copied().collect();
    if !state.in_some_cell(&nc) {
        return Err(Error::Invalid("the listed divisors have no common point".into()));
    }
    let mut nn = step.mu;
    let mut nu = step.c as u64;
    for &i in step.through.iter().chain(step.extra.iter()) {
        nn += state.divisors[i].n;
        nu += state.divisors[i].nu - 1;
    }
    if nn == 0 {
        return Err(Error::Invalid("the new divisor would have N = 0".into()));
    }
    let datum = DivisorDatum { n: nn, nu, origin: Origin::Exceptional };
    state.divisors.push(datum);
    let new = t;
    let containing: Vec<usize> = step.through.iter().chain(step.extra.iter()).copied().collect();
    let base: BTreeSet<usize> = step.transverse.iter().copied().chain([new]).collect();
    if containing.len() < step.c as usize {
        let mut cell = base.clone();
        cell.extend(&containing);
        state.cells.push(cell);
    } else {
        // c divisors contain C: every c − 1 of them meet on the new divisor
        for skip in 0..containing.len() {
            let mut cell = base.clone();
            cell.extend(containing.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &i)| i));
            state.cells.push(cell);
        }
    }
    for &j in &step.strict {
        state.cells.push([new, j].into_iter().collect());
    }
    Ok(datum)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Prop72 {
    /// Common ratio 1/(d·k).
    Holds { ratio: (u64, u64), k: u64 },
    Inapplicable(String),
    Counterexample { ratio: (u64, u64) },
}

/// For n divisors with a common point, equal ν/N and d | N_i, the ratio must be 1/(dk).
pub fn check_prop72(state: &BlowupState, subset: &[usize], d: u64) -> Prop72 {
    if subset.len() != state.dim {
        return Prop72::Inapplicable(format!("need {} divisors", state.dim));
    }
    let set: BTreeSet<usize> = subset.iter().copied().collect();
    if set.len() != subset.len() || subset.iter().any(|&i| i >= state.divisors.len()) {
        return Prop72::Inapplicable("invalid divisor list".into());
    }
    if !state.in_some_cell(&set) {
        return Prop72::Inapplicable("divisors do not meet".into());
    }
    let data: Vec<DivisorDatum> = subset.iter().map(|&i| state.divisors[i]).collect();
    if data.iter().any(|x| x.n % d != 0) {
        return Prop72::Inapplicable("d does not divide every N".into());
    }
    let reduce = |x: &DivisorDatum| {
        let g = x.n.gcd(&x.nu);
        (x.nu / g, x.n / g)
    };
    let r = reduce(&data[0]);
    if data.iter().any(|x| reduce(x) != r) {
        return Prop72::Inapplicable("ratios differ".into());
    }
    if r.0 == 1 && r.1 % d == 0 {
        Prop72::Holds { ratio: r, k: r.1 / d }
    } else {
        Prop72::Counterexample { ratio: r }
    }
}

/// Deterministic random admissible sequence from a seed.
pub fn random_admissible_sequence(seed: u64, length: usize, dim: usize, d: u64) -> Result<(BlowupState, Vec<BlowupStep>)> {
    if length == 0 || dim < 2 {
        return Err(Error::Invalid("need length >= 1 and n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=dim);
    let mults: Vec<u64> =
        (0..k).map(|_| if rng.gen_bool(0.5) { d * rng.gen_range(1..=3) } else { rng.gen_range(1..=6) }).collect();
    let mut state = BlowupState::new(dim, &mults)?;
    let mut steps = Vec::with_capacity(length);
    while steps.len() < length {
        let cell: Vec<usize> = if rng.gen_bool(0.1) {
            Vec::new()
        } else {
            let i = rng.gen_range(0..state.cells.len());
            state.cells[i].iter().copied().collect()
        };
        let c = rng.gen_range(2..=dim as u32);
        let mut exc: Vec<usize> =
            cell.iter().copied().filter(|&i| state.divisors[i].origin == Origin::Exceptional).collect();
        exc.shuffle(&mut rng);
        let nt = rng.gen_range(0..=exc.len().min(c as usize - 1));
        let through: Vec<usize> = exc.drain(..nt).collect();
        let extra = if !exc.is_empty() && rng.gen_bool(0.5) { Some(exc.remove(0)) } else { None };
        let mut transverse = exc;
        let mut strict = Vec::new();
        for &i in &cell {
            if state.divisors[i].origin == Origin::Strict {
                if rng.gen_bool(0.5) {
                    strict.push(i);
                } else {
                    transverse.push(i);
                }
            }
        }
        transverse.shuffle(&mut rng);
        transverse.truncate((dim as u32 - c) as usize);
        transverse.sort_unstable();
        let floor: u64 = strict.iter().map(|&i| state.divisors[i].n).sum();
        let mu = floor.max(rng.gen_range(0..=6));
        let step = BlowupStep { c, through, extra, mu, transverse, strict };
        if blowup_update(&mut state, &step).is_ok() {
            steps.push(step);
        }
    }
    Ok((state, steps))
}

/// The three point blow-ups resolving x1^2 + x2^3.
pub fn cusp_sequence() -> (BlowupState, Vec<BlowupStep>) {
    let mut state = BlowupState::new(2, &[1]).unwrap();
    let steps = vec![
        BlowupStep { c: 2, through: vec![], extra: None, mu: 2, transverse: vec![], strict: vec![0] },
        BlowupStep { c: 2, through: vec![1], extra: None, mu: 1, transverse: vec![], strict: vec![0] },
        BlowupStep { c: 2, through: vec![1], extra: Some(2), mu: 1, transverse: vec![], strict: vec![0] },
    ];
    for s in &steps {
        blowup_update(&mut state, s).unwrap();
    }
    (state, steps)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepSummary {
    pub sequences: u64,
    pub subsets_checked: u64,
    pub applicable: u64,
    pub counterexamples: u64,
    /// (seed, ratio "1/m", k) for every applicable subset.
    pub rows: Vec<(u64, String, u64)>,
}

/// Run seeds in [from, to) and check every intersecting n-subset.
pub fn sweep(from: u64, to: u64, length: usize, dim: usize, d: u64) -> Result<SweepSummary> {
    use rayon::prelude::*;
    let per: Vec<SweepSummary> = (from..to)
        .into_par_iter()
        .map(|seed| {
            let (state, _) = random_admissible_sequence(seed, length, dim, d)?;
            let mut s = SweepSummary { sequences: 1, ..Default::default() };
            for sub in state.intersecting_subsets() {
                s.subsets_checked += 1;
                match check_prop72(&state, &sub, d) {
                    Prop72::Holds { ratio, k } => {
                        s.applicable += 1;
                        s.rows.push((seed, format!("{}/{}", ratio.0, ratio.1), k));
                    }
                    Prop72::Counterexample { ratio } => {
                        s.applicable += 1;
                        s.counterexamples += 1;
                        s.rows.push((seed, format!("{}/{}", ratio.0, ratio.1), 0));
                    }
                    Prop72::Inapplicable(_) => {}
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut total = SweepSummary::default();
    for s in per {
        total.sequences += s.sequences;
        total.subsets_checked += s.subsets_checked;
        total.applicable += s.applicable;
        total.counterexamples += s.counterexamples;
        total.rows.extend(s.rows);
    }
    Ok(total)
}
