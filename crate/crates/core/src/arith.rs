//! Small-integer number theory used throughout: primality, modular powers,
//! factorization, Euler phi, primitive roots.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn pow_u64(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).expect("integer power overflows u64")
}

pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Prime factorization as (prime, exponent) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn radical(n: u64) -> u64 {
    factorize(n).into_iter().map(|(p, _)| p).product()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::Integer::gcd(&a, &b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    num_integer::Integer::lcm(&a, &b)
}

/// Multiplicative order of `a` modulo `m` (a must be a unit).
pub fn mult_order(a: u64, m: u64) -> u64 {
    let phi = euler_phi(m);
    let mut ord = phi;
    for (q, _) in factorize(phi) {
        while ord.is_multiple_of(q) && pow_mod(a, ord / q, m) == 1 {
            ord /= q;
        }
    }
    ord
}

/// Least primitive root modulo p^c for an odd prime p.
pub fn primitive_root_prime_power(p: u64, c: u32) -> u64 {
    assert!(p > 2 && is_prime(p), "primitive roots need an odd prime");
    let m = pow_u64(p, c);
    let phi = euler_phi(m);
    (2..m)
        .find(|&g| g % p != 0 && mult_order(g, m) == phi)
        .expect("odd prime powers are cyclic")
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: i128, p: u64) -> u32 {
    assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_small() {
        let ps: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn phi_and_divisors() {
        assert_eq!(euler_phi(2058), 588);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(radical(72), 6);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root_prime_power(5, 1), 2);
        assert_eq!(primitive_root_prime_power(7, 1), 3);
        let g = primitive_root_prime_power(7, 3);
        assert_eq!(mult_order(g, 343), 294);
    }

    #[test]
    fn inverse() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(5, 25), None);
    }
}
