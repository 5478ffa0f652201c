use igusa::blowup::{check_prop72, random_admissible_sequence, Prop72};
use igusa::charsum::{
    expsum_padic_with, expsum_tadic_full_with, expsum_tadic_simplified_with, stratum_sum, weight_series, EngineOptions,
    MultChar, SumReport,
};
use igusa::denef::{denef_eval, monomial_resolution, ResolutionData};
use igusa::experiments::{random_transfer_input, reparam_check, thom_sebastiani_check, transfer_check};
use igusa::jet::{jet_polynomials, reparam_coefficients, reparam_solve, residue_against};
use igusa::zeta::{series_to_rational, zeta_series, zeta_series_tadic};
use igusa::{CycloValue, ExtField, Fq, MPoly, ResidueRing, SupportScheme};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Nonconstant polynomials in n variables with small coefficients and total degree <= 4.
fn poly(n: usize) -> impl Strategy<Value = MPoly> {
    prop::collection::vec((prop::collection::vec(0u32..=3, n), -3i64..=3), 1..=4)
        .prop_map(move |terms| {
            let terms: Vec<(Vec<u32>, BigInt)> =
                terms.into_iter().filter(|(e, _)| e.iter().sum::<u32>() <= 4).map(|(e, c)| (e, BigInt::from(c))).collect();
            MPoly::from_terms(n, terms)
        })
        .prop_filter("nonconstant", |f| f.degree().unwrap_or(0) >= 1)
}

/// Diagonal forms a x1^d1 + b x2^d2 and monomials a x1^i x2^j with units a, b;
/// both keep good reduction at every p above the degree.
fn good_reduction() -> impl Strategy<Value = MPoly> {
    let unit = prop::sample::select(vec![1i64, 2, 3, -1, -2, -3]);
    let diagonal = (unit.clone(), unit.clone(), 1u32..=4, 1u32..=4).prop_map(|(a, b, d1, d2)| {
        MPoly::from_terms(2, vec![(vec![d1, 0], BigInt::from(a)), (vec![0, d2], BigInt::from(b))])
    });
    let monomial = (unit, 0u32..=2, 0u32..=2)
        .prop_filter("nonconstant", |(_, i, j)| i + j > 0)
        .prop_map(|(a, i, j)| MPoly::from_terms(2, vec![(vec![i, j], BigInt::from(a))]));
    prop_oneof![diagonal, monomial]
}

fn support(n: usize, origin: bool) -> SupportScheme {
    if origin {
        SupportScheme::origin(n)
    } else {
        SupportScheme::Full
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn cyclotomic_field_axioms(
        n in prop::sample::select(vec![3u64, 4, 5, 9, 12, 25]),
        raw in prop::collection::vec(prop::collection::vec(-5i128..=5, 25), 3),
    ) {
        let [a, b, c] = [0, 1, 2].map(|i| CycloValue::from_counts_i128(n, &raw[i][..n as usize]));
        prop_assert!(a.add(&b).mul(&c).eq_value(&a.mul(&c).add(&b.mul(&c))));
        prop_assert!(a.mul(&b).mul(&c).eq_value(&a.mul(&b.mul(&c))));
        let z = a.mul(&b).to_complex() - a.to_complex() * b.to_complex();
        prop_assert!(z.norm() < 1e-8);
        if let Some(inv) = a.inv() {
            prop_assert!(a.mul(&inv).eq_value(&CycloValue::one(n)));
        }
        prop_assert!(a.embed(2 * n).eq_value(&a));
        prop_assert!(a.conj().conj().eq_value(&a));
    }

    #[test]
    fn residue_ring_axioms(p in prop::sample::select(vec![3u64, 5, 7, 11, 13]), m in 1u32..=4, x in any::<[u64; 3]>()) {
        let r = ResidueRing::new(p, m).unwrap();
        let [a, b, c] = x.map(|v| v % r.modulus());
        prop_assert_eq!(r.add(r.add(a, b), c), r.add(a, r.add(b, c)));
        prop_assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
        prop_assert_eq!(r.sub(r.add(a, b), b), a);
    }

    #[test]
    fn polynomial_text_round_trip(f in poly(3)) {
        let g = MPoly::parse_in(&f.to_string(), 3).unwrap();
        prop_assert_eq!(g, f);
    }

    #[test]
    fn evaluation_is_a_ring_map(f in poly(2), g in poly(2), x in any::<[u32; 2]>(), p in prop::sample::select(vec![5u64, 7, 13])) {
        let k = ExtField::shared(p, 2).unwrap();
        let x: Vec<Fq> = x.iter().map(|v| v % k.size() as u32).collect();
        let (fx, gx) = (f.eval_field(&k, &x).unwrap(), g.eval_field(&k, &x).unwrap());
        prop_assert_eq!(f.add(&g).eval_field(&k, &x).unwrap(), k.add(fx, gx));
        prop_assert_eq!(f.mul(&g).eval_field(&k, &x).unwrap(), k.mul(fx, gx));
    }

    #[test]
    fn gradient_is_linear(f in poly(2), g in poly(2), c in -5i64..=5) {
        let lhs = f.scale(&BigInt::from(c)).add(&g).gradient();
        let rhs: Vec<MPoly> = f.gradient().iter().zip(g.gradient()).map(|(a, b)| a.scale(&BigInt::from(c)).add(&b)).collect();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn jet_substitution_identity(f in poly(2), r in 1usize..=3, pts in prop::collection::vec(0u32..7, 8)) {
        // evaluate f on truncated series over F_7 and compare with the jet polynomials
        let k = ExtField::shared(7, 1).unwrap();
        let exp = jet_polynomials(&f, r);
        let n = 2;
        let x: Vec<Fq> = (0..n * (r + 1)).map(|i| pts[i % pts.len()].wrapping_add(i as u32) % 7).collect();
        // series[j] = Σ_i x_{i n + j} t^i
        let mut acc: Vec<Fq> = vec![0; r + 1];
        for (e, c) in f.terms() {
            let mut term: Vec<Fq> = vec![0; r + 1];
            term[0] = k.from_int((c % BigInt::from(7)).try_into().unwrap());
            for (j, &ej) in e.iter().enumerate() {
                let s: Vec<Fq> = (0..=r).map(|i| x[i * n + j]).collect();
                for _ in 0..ej {
                    let mut next = vec![0; r + 1];
                    for a in 0..=r {
                        for b in 0..=r - a {
                            next[a + b] = k.add(next[a + b], k.mul(term[a], s[b]));
                        }
                    }
                    term = next;
                }
            }
            for l in 0..=r {
                acc[l] = k.add(acc[l], term[l]);
            }
        }
        for l in 0..=r {
            let vars = exp.poly(l).nvars();
            prop_assert_eq!(exp.poly(l).eval_field(&k, &x[..vars]).unwrap(), acc[l]);
        }
    }

    #[test]
    fn reparameterization_kills_lower_residues(zs in prop::collection::vec(0u32..49, 5), lead in 1u32..49) {
        let k = ExtField::shared(7, 2).unwrap();
        let mut z = vec![lead];
        z.extend(&zs[..4]);
        let m = z.len();
        let alphas = reparam_solve(&k, &z).unwrap();
        let mut t1 = vec![0, 1];
        t1.extend(&alphas);
        t1.resize(m + 1, 0);
        // the residue of z t_1^l vanishes for l = 1..m-2
        let mut pow = t1.clone();
        for _l in 1..=m - 2 {
            prop_assert_eq!(residue_against(&k, &z, &pow), 0);
            pow = igusa::jet::ps_mul(&k, &pow, &t1, m + 1);
        }
        let coeffs = reparam_coefficients(&k, &z, &alphas);
        prop_assert!(coeffs[1..m - 1].iter().all(|&c| c == 0));
        prop_assert_eq!(coeffs[m - 1], z[0]);
    }

    #[test]
    fn fast_paths_match_full_enumeration(f in poly(2), p in prop::sample::select(vec![3u64, 5, 7]), m in 2u32..=3, origin in any::<bool>(), u in 1u64..50) {
        prop_assume!(u % p != 0);
        let z = support(2, origin);
        let full = expsum_padic_with(&f, p, m, &z, u, &EngineOptions::exhaustive()).unwrap();
        let fast = expsum_padic_with(&f, p, m, &z, u, &EngineOptions::fast()).unwrap();
        prop_assert!(full.eq_exact(&fast));
        let k = ExtField::shared(p, 1).unwrap();
        let zc: Vec<Fq> = (0..m).map(|i| ((u + i as u64) % p) as Fq).collect();
        let a = expsum_tadic_full_with(&f, &k, m as usize, &zc, &z, &EngineOptions::exhaustive()).unwrap();
        let b = expsum_tadic_full_with(&f, &k, m as usize, &zc, &z, &EngineOptions::default()).unwrap();
        prop_assert!(a.eq_exact(&b));
    }

    #[test]
    fn transfer_above_degree(f in good_reduction(), seed in any::<u64>(), origin in any::<bool>(), m in 2u32..=3) {
        let z = support(2, origin);
        let deg = f.degree().unwrap() as u64;
        let p = [5u64, 7, 11].into_iter().find(|&p| p > deg && p > m as u64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, zc) = random_transfer_input(&mut rng, p, 1, m).unwrap();
        let r = transfer_check(&f, &z, p, 1, m, &u, &zc, 1 << 30).unwrap();
        prop_assert!(r.equal, "{} p={} m={}", f, p, m);
    }

    #[test]
    fn full_sum_reduces_to_two_terms(f in poly(2), zs in prop::collection::vec(0u32..7, 4), lead in 1u32..7, m in 2usize..=4, origin in any::<bool>()) {
        let k = ExtField::shared(7, 1).unwrap();
        let mut zc = vec![lead];
        zc.extend(&zs[..m - 1]);
        let r = reparam_check(&f, &support(2, origin), &k, m, &zc, 1 << 30).unwrap();
        prop_assert!(r.equal);
    }

    #[test]
    fn strata_add_up(f in poly(2), b0 in 0u32..7, bm in 1u32..7, m in 2usize..=4, origin in any::<bool>()) {
        let k = ExtField::shared(7, 1).unwrap();
        let z = support(2, origin);
        let opts = EngineOptions::default();
        let total = expsum_tadic_simplified_with(&f, &k, m, b0, bm, &z, &opts).unwrap().value();
        let parts: Vec<CycloValue> = (0..m).map(|i0| stratum_sum(&f, &k, m, i0, b0, bm, &z, &opts).unwrap().value()).collect();
        let mut sum = CycloValue::zero(7);
        for v in &parts {
            sum = sum.add(v);
        }
        prop_assert!(sum.eq_value(&total));
        // the whole sum lives on Z_{m-1,m-2}
        let top = parts[m - 2].add(&parts[m - 1]);
        prop_assert!(top.eq_value(&total));
    }

    #[test]
    fn thom_sebastiani_factorization(f1 in poly(1), f2 in poly(1), o1 in any::<bool>(), o2 in any::<bool>(), b0 in 0u32..5, bm in 1u32..5) {
        let r = thom_sebastiani_check(&f1, &support(1, o1), &f2, &support(1, o2), 2, 5, (b0, bm), 3, 1 << 30).unwrap();
        prop_assert!(r.factorizes);
    }

    #[test]
    fn series_transfer_above_degree(f in good_reduction(), origin in any::<bool>()) {
        let deg = f.degree().unwrap() as u64;
        let p = [5u64, 7].into_iter().find(|&p| p > deg).unwrap();
        let z = support(2, origin);
        let chi = MultChar::trivial(p).unwrap();
        let k = ExtField::shared(p, 1).unwrap();
        let a = zeta_series(&f, p, &z, &chi, 3).unwrap();
        let b = zeta_series_tadic(&f, &k, &z, &chi, 3).unwrap();
        prop_assert!(a.eq_exact(&b));
    }

    #[test]
    fn blowup_sequences_are_deterministic_and_sound(seed in any::<u64>(), d in 2u64..=3, n in 2usize..=3, len in 1usize..=8) {
        let (a, sa) = random_admissible_sequence(seed, len, n, d).unwrap();
        let (b, sb) = random_admissible_sequence(seed, len, n, d).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(sa, sb);
        for sub in a.intersecting_subsets() {
            let counterexample = matches!(check_prop72(&a, &sub, d), Prop72::Counterexample { .. });
            prop_assert!(!counterexample, "seed {} subset {:?}", seed, sub);
        }
    }

    #[test]
    fn resolution_text_round_trip(exps in prop::collection::vec(1u32..=4, 1..=2), p in prop::sample::select(vec![5u64, 7]), quad in any::<bool>(), origin in any::<bool>()) {
        let chi = if quad { MultChar::quadratic(p).unwrap() } else { MultChar::trivial(p).unwrap() };
        let rd = monomial_resolution(&exps, p, &support(exps.len(), origin), &chi).unwrap();
        let back = ResolutionData::parse(&rd.to_text()).unwrap();
        prop_assert_eq!((back.q, back.n, &back.divisors), (rd.q, rd.n, &rd.divisors));
        prop_assert!(back.counts.keys().eq(rd.counts.keys()));
        prop_assert!(back.counts.values().zip(rd.counts.values()).all(|(a, b)| a.eq_value(b)));
    }

    #[test]
    fn sum_reports_round_trip(f in poly(2), p in prop::sample::select(vec![3u64, 5]), m in 1u32..=2) {
        let v = expsum_padic_with(&f, p, m, &SupportScheme::Full, 1, &EngineOptions::default()).unwrap();
        let text = serde_json::to_string(&v.report()).unwrap();
        let back: SumReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, v.report());
    }
}

/// Fitted forms predict coefficients they were not fitted on.
#[test]
fn rational_fits_predict_held_out_coefficients() {
    for s in ["x1^2", "x1^3", "x1*x2", "x1^2+x2^2", "x1^2*x2"] {
        let f = MPoly::parse(s).unwrap();
        for p in [5u64, 7] {
            for z in [SupportScheme::Full, SupportScheme::origin(f.nvars())] {
                let chi = MultChar::trivial(p).unwrap();
                let short = zeta_series(&f, p, &z, &chi, 16).unwrap();
                let long = zeta_series(&f, p, &z, &chi, 20).unwrap();
                let rz = series_to_rational(&short, 16, 16).unwrap();
                let pred = rz.expand(20);
                assert!(pred.iter().zip(&long.coeffs).all(|(a, b)| a.eq_value(b)), "{} p={}", s, p);
            }
        }
    }
}

/// Shrinking the support can only remove poles, so σ does not decrease.
#[test]
fn sigma_is_monotone_under_support_shrink() {
    use igusa::zeta::poles;
    for s in ["x1^2", "x1^3", "x1*x2", "x1^2+x2^3", "x1^2+x2^2", "x1^3+x2^3"] {
        let f = MPoly::parse(s).unwrap();
        for p in [5u64, 7, 11] {
            let chi = MultChar::trivial(p).unwrap();
            let sigma = |z: &SupportScheme| {
                let series = zeta_series(&f, p, z, &chi, 20).unwrap();
                poles(&series_to_rational(&series, 20, 20).unwrap(), true).sigma_rational()
            };
            let (big, small) = (sigma(&SupportScheme::Full), sigma(&SupportScheme::origin(f.nvars())));
            match (big, small) {
                (Some(b), Some(s)) => assert!(s >= b, "{} p={}", s, p),
                (None, Some(_)) => panic!("{} p={}: smaller support gained a pole", s, p),
                _ => {}
            }
        }
    }
}

/// Monomial data factor as products of one-variable zeta functions.
#[test]
fn monomial_zeta_factors_over_variables() {
    for (a, b) in [(1u32, 1u32), (2, 1), (2, 3), (3, 3)] {
        for p in [5u64, 7] {
            for chi in [MultChar::trivial(p).unwrap(), MultChar::quadratic(p).unwrap()] {
                let z2 = monomial_resolution(&[a, b], p, &SupportScheme::Full, &chi).unwrap();
                let za = monomial_resolution(&[a], p, &SupportScheme::Full, &chi).unwrap();
                let zb = monomial_resolution(&[b], p, &SupportScheme::Full, &chi).unwrap();
                let d = chi.order();
                let (e2, ea, eb) = (
                    denef_eval(&z2, &chi.id(), d).unwrap().expand(12),
                    denef_eval(&za, &chi.id(), d).unwrap().expand(12),
                    denef_eval(&zb, &chi.id(), d).unwrap().expand(12),
                );
                for j in 0..=12 {
                    let mut c = CycloValue::zero(1);
                    for i in 0..=j {
                        c = c.add(&ea[i].mul(&eb[j - i]));
                    }
                    assert!(c.eq_value(&e2[j]), "x^{} y^{} p={} chi={} t^{}", a, b, p, chi.id(), j);
                }
                // denominator degree is at most Σ N_i
                let rz = denef_eval(&z2, &chi.id(), d).unwrap();
                assert!(rz.den_degree() <= (a + b) as usize);
            }
        }
    }
}

/// Weight series of the smooth linear form vanish identically.
#[test]
fn weight_of_linear_form_is_minus_infinity() {
    let f = MPoly::parse("x1").unwrap();
    let s = weight_series(&f, &SupportScheme::Full, 2, 0, 1, 5, 1, 3, &EngineOptions::default()).unwrap();
    assert!(s.iter().all(|(_, v)| v.is_zero()));
    assert_eq!(igusa::charsum::fit_weight(&s, 5).weight, None);
}
