//! Exact values as JSON: integer coefficient vectors with a denominator,
//! floats only in display fields.

use igusa::zeta::{RationalZeta, ZetaSeries};
use igusa::CycloValue;
use num_bigint::BigInt;
use num_traits::One;
use serde_json::{json, Value};

/// Σ coeffs[j] ζ_N^j / denominator on the power basis of Q(ζ_N).
pub fn cyclo(v: &CycloValue) -> Value {
    let c = v.to_complex();
    let mut obj = json!({
        "N": v.order(),
        "coeffs": v.numerators().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "denominator": v.denominator().to_string(),
        "display": [c.re, c.im],
    });
    if let Some(r) = v.as_rational() {
        obj["rational"] = json!(rational(&r));
    }
    obj
}

pub fn rational(r: &num_rational::BigRational) -> String {
    if r.denom() == &BigInt::one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn series(s: &ZetaSeries) -> Value {
    json!({
        "p": s.p,
        "degree": s.degree,
        "chi": s.chi,
        "order": s.order(),
        "coeffs": s.coeffs.iter().map(cyclo).collect::<Vec<_>>(),
    })
}

pub fn rational_zeta(rz: &RationalZeta) -> Value {
    json!({
        "q": rz.q,
        "numerator": rz.numerator.iter().map(cyclo).collect::<Vec<_>>(),
        "denominator": rz.denominator.iter().map(rational).collect::<Vec<_>>(),
        "factors": rz.factors,
        "denominator_factored": rz.denominator_string(),
        "unfactored_degree": rz.remainder.len() - 1,
        "value_at_one": rz.value_at_one().map(|v| cyclo(&v)),
    })
}
