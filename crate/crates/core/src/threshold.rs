//! Exact similarity thresholds.
//!
//! A threshold is kept as a reduced rational `num / den` so that the test
//! `|A ∩ B| / sqrt(|A| |B|) >= tau` can be decided with integer arithmetic:
//! `|A ∩ B|^2 * den^2 >= num^2 * |A| * |B|`. Pairs sitting exactly on the
//! boundary are therefore always accepted.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Threshold {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Threshold {
    /// `num / den`, required to lie in `(0, 1]`.
    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::domain(format!("threshold {num}/{den} must lie in (0, 1]")));
        }
        let g = gcd(num, den);
        Ok(Threshold { num: num / g, den: den / g })
    }

    /// Parses a plain decimal such as `0.1`, `.25` or `1`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::domain(format!("threshold {s:?} is not a decimal in (0, 1]"));
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > 18
        {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int_part: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_part: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int_part.checked_mul(den).and_then(|x| x.checked_add(frac_part)).ok_or_else(bad)?;
        Self::from_ratio(num, den).map_err(|_| bad())
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Whether an intersection of size `inter` between sets of sizes `da`
    /// and `db` reaches the threshold.
    #[inline]
    pub fn accepts(&self, inter: u64, da: u64, db: u64) -> bool {
        let lhs = (inter as u128 * inter as u128) * (self.den as u128 * self.den as u128);
        let rhs = (self.num as u128 * self.num as u128) * (da as u128 * db as u128);
        lhs >= rhs
    }

    /// `ceil(tau * d)` in exact arithmetic.
    pub fn ceil_mul(&self, d: u64) -> u64 {
        let p = self.num as u128 * d as u128;
        p.div_ceil(self.den as u128) as u64
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Terminating decimal iff den = 2^a 5^b; it then needs max(a, b) digits.
        let (mut rest, mut twos, mut fives) = (self.den, 0u32, 0u32);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        let digits = twos.max(fives);
        if rest != 1 || digits > 18 {
            return write!(f, "{}/{}", self.num, self.den);
        }
        let scale = 10u128.pow(digits);
        let scaled = self.num as u128 * scale / self.den as u128;
        let (int, frac) = (scaled / scale, scaled % scale);
        if digits == 0 {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac:0width$}", width = digits as usize)
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| Error::domain(format!("bad threshold {s:?}")))?;
            let d = d.trim().parse().map_err(|_| Error::domain(format!("bad threshold {s:?}")))?;
            return Threshold::from_ratio(n, d);
        }
        Threshold::parse(s)
    }
}

impl TryFrom<String> for Threshold {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Threshold> for String {
    fn from(t: Threshold) -> String {
        t.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals() {
        let t = Threshold::parse("0.1").unwrap();
        assert_eq!((t.numer(), t.denom()), (1, 10));
        assert_eq!(Threshold::parse(".25").unwrap(), Threshold::from_ratio(1, 4).unwrap());
        assert_eq!(Threshold::parse("1").unwrap(), Threshold::from_ratio(1, 1).unwrap());
        assert_eq!(Threshold::parse("1.0").unwrap(), Threshold::from_ratio(1, 1).unwrap());
        for bad in ["0", "1.5", "abc", "", ".", "-0.1", "0.1.2"] {
            assert!(Threshold::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["0.1", "0.25", "1", "0.333"] {
            assert_eq!(Threshold::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(Threshold::from_ratio(1, 3).unwrap().to_string(), "1/3");
        let t: Threshold = "1/3".parse().unwrap();
        assert_eq!(t, Threshold::from_ratio(2, 6).unwrap());
    }

    #[test]
    fn boundary_pairs_are_accepted() {
        // |A∩B| = 2, |A| = |B| = 20: cosine exactly 0.1.
        let t = Threshold::parse("0.1").unwrap();
        assert!(t.accepts(2, 20, 20));
        assert!(!t.accepts(1, 20, 20));
        // 5 of 10: cosine exactly 0.5.
        let half = Threshold::parse("0.5").unwrap();
        assert!(half.accepts(5, 10, 10));
        assert!(!half.accepts(4, 10, 10));
        // 2/3 against 0.666 and 0.667.
        assert!(Threshold::parse("0.666").unwrap().accepts(2, 3, 3));
        assert!(!Threshold::parse("0.667").unwrap().accepts(2, 3, 3));
    }

    #[test]
    fn ceil_mul_exact() {
        let t = Threshold::parse("0.3").unwrap();
        assert_eq!(t.ceil_mul(10), 3);
        assert_eq!(t.ceil_mul(11), 4);
        assert_eq!(Threshold::parse("1").unwrap().ceil_mul(7), 7);
    }
}
