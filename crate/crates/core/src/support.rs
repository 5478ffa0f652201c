//! Supports Z ⊂ A^n: the residual indicator functions Φ_Z.

use std::fmt;

use crate::error::{Error, Result};
use crate::mpoly::{CompiledField, MPoly};
use crate::ring::{ExtField, Fq};

/// Largest number of points enumerated when listing Z(F_q).
pub const MAX_SUPPORT_POINTS: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportScheme {
    /// All of A^n.
    Full,
    /// Finitely many points with integer coordinates, read in F_p ⊂ F_q.
    Points(Vec<Vec<i64>>),
    /// Common zeros of integer polynomials.
    Equations(Vec<MPoly>),
}

impl SupportScheme {
    pub fn origin(n: usize) -> Self {
        SupportScheme::Points(vec![vec![0; n]])
    }

    pub fn is_full(&self) -> bool {
        matches!(self, SupportScheme::Full)
    }

    /// Parse `full`, `origin`, `points:0,0;1,2` or `eq:x1;x2-x1^2`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        match s {
            "full" | "A" | "A^n" => return Ok(SupportScheme::Full),
            "origin" | "0" | "{0}" => return Ok(SupportScheme::origin(n)),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("points:") {
            let mut pts = Vec::new();
            for chunk in rest.split(';').filter(|c| !c.trim().is_empty()) {
                let pt: std::result::Result<Vec<i64>, _> = chunk.split(',').map(|c| c.trim().parse::<i64>()).collect();
                let pt = pt.map_err(|_| Error::Parse(format!("bad point '{}'", chunk)))?;
                if pt.len() != n {
                    return Err(Error::Parse(format!("point '{}' needs {} coordinates", chunk, n)));
                }
                pts.push(pt);
            }
            return Ok(SupportScheme::Points(pts));
        }
        if let Some(rest) = s.strip_prefix("eq:") {
            let eqs: Result<Vec<MPoly>> = rest
                .split(';')
                .filter(|c| !c.trim().is_empty())
                .map(|c| MPoly::parse_in(c, n))
                .collect();
            return Ok(SupportScheme::Equations(eqs?));
        }
        Err(Error::Parse(format!("unknown support '{}': use full, origin, points:..., eq:...", s)))
    }

    /// Membership test for a point over F_q.
    pub fn contains(&self, k: &ExtField, x: &[Fq]) -> bool {
        match self {
            SupportScheme::Full => true,
            SupportScheme::Points(pts) => pts
                .iter()
                .any(|pt| pt.iter().zip(x).all(|(&a, &b)| k.from_int(a) == b)),
            SupportScheme::Equations(eqs) => eqs.iter().all(|g| CompiledField::new(g, k).eval(k, x) == 0),
        }
    }

    /// All points of Z(F_q) in lexicographic index order.
    pub fn points(&self, k: &ExtField, n: usize) -> Result<Vec<Vec<Fq>>> {
        match self {
            SupportScheme::Points(pts) => {
                let mut v: Vec<Vec<Fq>> = pts.iter().map(|pt| pt.iter().map(|&a| k.from_int(a)).collect()).collect();
                v.sort();
                v.dedup();
                Ok(v)
            }
            _ => {
                let q = k.size();
                let total = (q as f64).powi(n as i32);
                if total > MAX_SUPPORT_POINTS as f64 {
                    return Err(Error::Budget(format!("enumerating {} points of A^{} over F_{}", total, n, q)));
                }
                let eqs: Vec<CompiledField> = match self {
                    SupportScheme::Equations(e) => e.iter().map(|g| CompiledField::new(g, k)).collect(),
                    _ => vec![],
                };
                let mut out = Vec::new();
                let mut x = vec![0 as Fq; n];
                loop {
                    if eqs.iter().all(|g| g.eval(k, &x) == 0) {
                        out.push(x.clone());
                    }
                    if !odometer(&mut x, q as Fq) {
                        break;
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn count(&self, k: &ExtField, n: usize) -> Result<u64> {
        match self {
            SupportScheme::Full => k
                .size()
                .checked_pow(n as u32)
                .ok_or_else(|| Error::Budget("point count overflows".into())),
            _ => Ok(self.points(k, n)?.len() as u64),
        }
    }

    /// Z1 × Z2 inside A^{n1+n2}.
    pub fn product(&self, n1: usize, other: &SupportScheme, n2: usize) -> Result<SupportScheme> {
        use SupportScheme::*;
        Ok(match (self, other) {
            (Full, Full) => Full,
            (Points(a), Points(b)) => Points(
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| x.iter().chain(y).copied().collect()))
                    .collect(),
            ),
            _ => {
                let left = self.as_equations(n1)?;
                let right = other.as_equations(n2)?;
                let mut eqs: Vec<MPoly> = left.iter().map(|g| g.extend_vars(n1 + n2)).collect();
                eqs.extend(right.iter().map(|g| g.shift_vars(n1 + n2, n1)));
                Equations(eqs)
            }
        })
    }

    fn as_equations(&self, n: usize) -> Result<Vec<MPoly>> {
        match self {
            SupportScheme::Full => Ok(vec![]),
            SupportScheme::Equations(e) => Ok(e.clone()),
            SupportScheme::Points(pts) if pts.len() == 1 => Ok(pts[0]
                .iter()
                .enumerate()
                .map(|(i, &a)| MPoly::var(n, i).sub(&MPoly::constant(n, a)))
                .collect()),
            SupportScheme::Points(_) => Err(Error::Invalid(
                "products of multi-point supports with equation supports are not supported".into(),
            )),
        }
    }
}

/// Advance a base-q counter (least significant first); false on wraparound.
#[inline]
pub fn odometer(x: &mut [Fq], q: Fq) -> bool {
    for xi in x.iter_mut() {
        *xi += 1;
        if *xi < q {
            return true;
        }
        *xi = 0;
    }
    false
}

impl fmt::Display for SupportScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportScheme::Full => write!(f, "full"),
            SupportScheme::Points(pts) => {
                let s: Vec<String> = pts
                    .iter()
                    .map(|p| p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "points:{}", s.join(";"))
            }
            SupportScheme::Equations(eqs) => {
                let s: Vec<String> = eqs.iter().map(|g| g.to_string()).collect();
                write!(f, "eq:{}", s.join(";"))
            }
        }
    }
}
