//! Small-denominator fractions for reporting values such as `3/8`.

use std::fmt;

use serde::{Serialize, Serializer};

pub const MAX_DENOMINATOR: u32 = 64;
pub const MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fraction {
    pub num: i64,
    pub den: u32,
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The fraction with the smallest denominator `≤ max_den` within `tol` of `v`.
pub fn approximate(v: f64, max_den: u32, tol: f64) -> Option<Fraction> {
    if !v.is_finite() {
        return None;
    }
    (1..=max_den).find_map(|den| {
        let num = (v * den as f64).round();
        ((v - num / den as f64).abs() < tol).then_some(Fraction {
            num: num as i64,
            den,
        })
    })
}

/// [`approximate`] with the default denominator cap and tolerance.
pub fn fraction(v: f64) -> Option<Fraction> {
    approximate(v, MAX_DENOMINATOR, MATCH_TOL)
}
