//! Independent brute-force computations checked against the exact engines.

use igusa::charsum::{expsum_padic, expsum_tadic_full, gauss_sum, MultChar};
use igusa::jet::{jet_dimension_estimate, reparam_solve};
use igusa::mpoly::critical_residues;
use igusa::zeta::{sigma_moi_estimate, zeta_series};
use igusa::{ExtField, MPoly, SupportScheme};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::f64::consts::TAU;

fn root(k: u64, n: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * k as f64 / n as f64)
}

fn chi_c(chi: &MultChar, a: u64) -> Complex64 {
    match chi.eval_exp(a) {
        Some(j) => root(j, chi.order()),
        None => Complex64::new(0.0, 0.0),
    }
}

/// All points of (Z/N)^n whose reduction mod p lies in Z.
fn grid(n: usize, modulus: u64, p: u64, origin: bool) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut x = vec![0u64; n];
    loop {
        if !origin || x.iter().all(|v| v % p == 0) {
            out.push(x.clone());
        }
        let mut i = 0;
        while i < n {
            x[i] += 1;
            if x[i] < modulus {
                break;
            }
            x[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

fn support(n: usize, origin: bool) -> SupportScheme {
    if origin {
        SupportScheme::origin(n)
    } else {
        SupportScheme::Full
    }
}

const POLYS: [&str; 6] = ["x1^2", "x1^3 - 3*x1", "x1*x2", "x1^2 + x2^3", "x1^2*x2 + 2*x2^2", "x1^2 - x2^2 + 1"];

#[test]
fn padic_sums_match_direct_summation() {
    for s in POLYS {
        let f = MPoly::parse(s).unwrap();
        let n = f.nvars();
        for (p, m) in [(3u64, 2u32), (5, 2), (7, 1), (3, 3)] {
            let pm = p.pow(m);
            for origin in [false, true] {
                for u in [1u64, 2] {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in grid(n, pm, p, origin) {
                        acc += root(u * f.eval_mod(&x, pm).unwrap() % pm, pm);
                    }
                    acc /= (pm as f64).powi(n as i32);
                    let v = expsum_padic(&f, p, m, &support(n, origin), u).unwrap().value().to_complex();
                    assert!((v - acc).norm() < 1e-9, "{} p={} m={} origin={} u={}", s, p, m, origin, u);
                }
            }
        }
    }
}

/// f evaluated on truncated series over F_p, coefficients of t^0..t^{m-1}.
fn series_eval(f: &MPoly, p: u64, m: usize, xs: &[Vec<u64>]) -> Vec<u64> {
    let mul = |a: &[u64], b: &[u64]| {
        let mut out = vec![0u64; m];
        for i in 0..m {
            for j in 0..m - i {
                out[i + j] = (out[i + j] + a[i] * b[j]) % p;
            }
        }
        out
    };
    let mut acc = vec![0u64; m];
    for (e, c) in f.terms() {
        let mut term = vec![0u64; m];
        term[0] = (c % num_bigint::BigInt::from(p)).to_i64().unwrap().rem_euclid(p as i64) as u64;
        for (j, &ej) in e.iter().enumerate() {
            for _ in 0..ej {
                term = mul(&term, &xs[j]);
            }
        }
        for l in 0..m {
            acc[l] = (acc[l] + term[l]) % p;
        }
    }
    acc
}

#[test]
fn laurent_sums_match_direct_jet_enumeration() {
    for s in POLYS {
        let f = MPoly::parse(s).unwrap();
        let n = f.nvars();
        for (p, m) in [(5u64, 2usize), (7, 2), (5, 3)] {
            let k = ExtField::shared(p, 1).unwrap();
            for origin in [false, true] {
                for zc in [vec![1u32, 3, 2], vec![2, 0, 4], vec![4, 1, 1]] {
                    let zc = &zc[..m];
                    let mut acc = Complex64::new(0.0, 0.0);
                    // coordinates: variable j has series Σ_i x[i n + j] t^i
                    for flat in grid(n * m, p, p, false) {
                        if origin && flat[..n].iter().any(|&v| v != 0) {
                            continue;
                        }
                        let xs: Vec<Vec<u64>> = (0..n).map(|j| (0..m).map(|i| flat[i * n + j]).collect()).collect();
                        let fx = series_eval(&f, p, m, &xs);
                        // residue of z f(x) with z = Σ a_{-i} t^{-i}, zc = a_{-m}..a_{-1}
                        let phase: u64 = (0..m).map(|i| zc[m - 1 - i] as u64 * fx[i]).sum::<u64>() % p;
                        acc += root(phase, p);
                    }
                    acc /= (p as f64).powi((n * m) as i32);
                    let v = expsum_tadic_full(&f, &k, m, zc, &support(n, origin)).unwrap().value().to_complex();
                    assert!((v - acc).norm() < 1e-9, "{} p={} m={} origin={} z={:?}", s, p, m, origin, zc);
                }
            }
        }
    }
}

#[test]
fn zeta_coefficients_match_valuation_counts() {
    for s in POLYS {
        let f = MPoly::parse(s).unwrap();
        let n = f.nvars();
        for p in [5u64, 7] {
            let order = if n == 1 { 3 } else { 2 };
            for origin in [false, true] {
                for chi in [MultChar::trivial(p).unwrap(), MultChar::quadratic(p).unwrap()] {
                    let series = zeta_series(&f, p, &support(n, origin), &chi, order).unwrap();
                    for m in 0..=order {
                        let pm1 = p.pow(m as u32 + 1);
                        let pm = p.pow(m as u32);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for x in grid(n, pm1, p, origin) {
                            let v = f.eval_mod(&x, pm1).unwrap();
                            if v != 0 && v.is_multiple_of(pm) && !(v / pm).is_multiple_of(p) {
                                acc += chi_c(&chi, v / pm);
                            }
                        }
                        acc /= (pm1 as f64).powi(n as i32);
                        let c = series.coeffs[m].to_complex();
                        assert!((c - acc).norm() < 1e-9, "{} p={} origin={} chi={} t^{}", s, p, origin, chi.id(), m);
                    }
                }
            }
        }
    }
}

#[test]
fn gauss_sums_match_floating_point() {
    for p in [3u64, 5, 7] {
        for chi in MultChar::up_to_conductor(p, 2).unwrap() {
            let pc = p.pow(chi.conductor());
            let mut acc = Complex64::new(0.0, 0.0);
            for v in 1..pc {
                acc += chi_c(&chi, v) * root(v, pc);
            }
            acc *= (p as f64).powi(1 - chi.conductor() as i32) / (p - 1) as f64;
            let g = gauss_sum(&chi).to_complex();
            assert!((g - acc).norm() < 1e-9, "p={} chi={}", p, chi.id());
        }
    }
}

#[test]
fn critical_points_of_a_cubic() {
    let f = MPoly::parse("x^3 - 3*x").unwrap();
    let k = ExtField::shared(7, 1).unwrap();
    let crit = critical_residues(&f, &k, &SupportScheme::Full).unwrap();
    let pts: Vec<(u32, u32)> = crit.iter().map(|(x, v)| (x[0], *v)).collect();
    assert_eq!(pts, vec![(1, 5), (6, 2)]);
    let cusp = MPoly::parse("x^2 + y^3").unwrap();
    let k5 = ExtField::shared(5, 1).unwrap();
    let crit = critical_residues(&cusp, &k5, &SupportScheme::Full).unwrap();
    assert_eq!(crit, vec![(vec![0, 0], 0)]);
    assert!(critical_residues(&MPoly::parse("x").unwrap(), &k, &SupportScheme::Full).unwrap().is_empty());
}

#[test]
fn reparameterization_small_cases() {
    let k = ExtField::shared(5, 1).unwrap();
    assert_eq!(reparam_solve(&k, &[1, 0, 0]).unwrap(), vec![0]);
    assert_eq!(reparam_solve(&k, &[1, 1, 0]).unwrap(), vec![4]);
}

#[test]
fn oscillation_index_anchors() {
    for nn in [2u32, 3] {
        let f = MPoly::parse(&format!("x^{}", nn)).unwrap();
        let rep = sigma_moi_estimate(&f, &SupportScheme::origin(1), &[5, 7], 20, None).unwrap();
        assert_eq!(rep.estimate.as_deref(), Some(format!("1/{}", nn).as_str()));
    }
    let rep = sigma_moi_estimate(&MPoly::parse("x").unwrap(), &SupportScheme::origin(1), &[5, 7], 20, None).unwrap();
    assert_eq!(rep.estimate, None);
    let cusp = MPoly::parse("x1^2 + x2^3").unwrap();
    let rep = sigma_moi_estimate(&cusp, &SupportScheme::origin(2), &[5, 7, 11, 13], 20, None).unwrap();
    assert_eq!(rep.estimate.as_deref(), Some("5/6"));
    for s in &rep.per_prime {
        assert_eq!(s.sigma.as_deref(), Some("5/6"));
    }
}

#[test]
fn jet_dimension_of_a_node() {
    let f = MPoly::parse("x1*x2").unwrap();
    let est = jet_dimension_estimate(&f, &SupportScheme::origin(2), 2, 5, 1, 3, Some(1.0)).unwrap();
    assert_eq!(est.dimension, Some(2));
    assert_eq!(est.within_bound, Some(true));
    let cusp = MPoly::parse("x^2 + y^3").unwrap();
    let est = jet_dimension_estimate(&cusp, &SupportScheme::origin(2), 2, 5, 1, 3, Some(5.0 / 6.0)).unwrap();
    assert_eq!(est.within_bound, Some(true));
}
