use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// An integrability exponent in `(1, inf]`, kept as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Ratio<i64>),
    Infinite,
}

impl Exponent {
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidExponent(format!("{num}/{den}")));
        }
        Self::validated(Ratio::new(num, den))
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::ratio(n, 1)
    }

    fn validated(r: Ratio<i64>) -> Result<Self> {
        if r <= Ratio::one() {
            return Err(Error::InvalidExponent(r.to_string()));
        }
        Ok(Exponent::Finite(r))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// Floating-point value (`f64::INFINITY` for `inf`).
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// Exact `1/p`, with `1/inf = 0`.
    pub fn reciprocal(&self) -> Ratio<i128> {
        match self {
            Exponent::Finite(r) => Ratio::new(*r.denom() as i128, *r.numer() as i128),
            Exponent::Infinite => Ratio::zero(),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => write!(f, "{r}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts integers (`4`), fractions (`7/2`), decimals (`3.5`) and
    /// `inf`/`infinity`/`∞`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::InvalidExponent(t.to_string());
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinite),
            _ => {}
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return Self::ratio(n, d).map_err(|_| bad());
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 12 {
                return Err(bad());
            }
            let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            if int < 0 {
                return Err(bad());
            }
            let den = 10i64.pow(frac.len() as u32);
            let f: i64 = frac.parse().map_err(|_| bad())?;
            let num = int.checked_mul(den).and_then(|v| v.checked_add(f)).ok_or_else(bad)?;
            return Self::ratio(num, den).map_err(|_| bad());
        }
        let n: i64 = t.parse().map_err(|_| bad())?;
        Self::integer(n).map_err(|_| bad())
    }
}

/// Per-axis space exponents `p_1..p_d` plus the time exponent `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedExponent {
    space: Vec<Exponent>,
    time: Exponent,
}

/// Outcome of [`MixedExponent::check_subcritical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subcriticality {
    pub pass: bool,
    /// `threshold - (2/q + sum 1/p_i)`, exact.
    pub margin: Ratio<i128>,
    pub threshold: u32,
}

impl Subcriticality {
    pub fn margin_f64(&self) -> f64 {
        *self.margin.numer() as f64 / *self.margin.denom() as f64
    }
}

impl MixedExponent {
    pub fn new(space: Vec<Exponent>, time: Exponent) -> Result<Self> {
        if space.is_empty() {
            return Err(Error::InvalidParameter("at least one space exponent is required"));
        }
        Ok(Self { space, time })
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn space(&self) -> &[Exponent] {
        &self.space
    }

    pub fn time(&self) -> Exponent {
        self.time
    }

    /// Exact `2/q + sum_i 1/p_i`.
    pub fn scaling_sum(&self) -> Ratio<i128> {
        let two = Ratio::from_integer(2);
        self.space.iter().fold(two * self.time.reciprocal(), |acc, p| acc + p.reciprocal())
    }

    /// Strict check `2/q + sum 1/p_i < threshold` for threshold 1 (drift
    /// scale) or 2 (occupation/Krylov scale).
    pub fn check_subcritical(&self, threshold: u32) -> Result<Subcriticality> {
        if threshold != 1 && threshold != 2 {
            return Err(Error::InvalidThreshold(threshold));
        }
        let margin = Ratio::from_integer(threshold as i128) - self.scaling_sum();
        Ok(Subcriticality { pass: margin > Ratio::zero(), margin, threshold })
    }
}

impl fmt::Display for MixedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("p=(")?;
        for (i, p) in self.space.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ") q={}", self.time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    fn mixed(p: &[&str], q: &str) -> MixedExponent {
        MixedExponent::new(p.iter().map(|s| e(s)).collect(), e(q)).unwrap()
    }

    #[test]
    fn parsing() {
        assert_eq!(e("7/2"), Exponent::ratio(7, 2).unwrap());
        assert_eq!(e("3.5"), Exponent::ratio(7, 2).unwrap());
        assert_eq!(e("inf"), Exponent::Infinite);
        assert_eq!(e("∞"), Exponent::Infinite);
        assert!("1".parse::<Exponent>().is_err());
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("x".parse::<Exponent>().is_err());
        assert!("3/0".parse::<Exponent>().is_err());
        assert_eq!(e("14/4").to_string(), "7/2");
    }

    #[test]
    fn subcriticality_examples() {
        let r = mixed(&["4", "4"], "4").check_subcritical(1).unwrap();
        assert!(!r.pass);
        assert_eq!(r.margin, Ratio::zero());

        let r = mixed(&["8", "inf"], "8").check_subcritical(1).unwrap();
        assert!(r.pass);
        assert_eq!(r.margin, Ratio::new(5, 8));

        let r = mixed(&["4"], "inf").check_subcritical(1).unwrap();
        assert!(r.pass);
        assert_eq!(r.margin, Ratio::new(3, 4));

        let r = mixed(&["7/2"], "inf").check_subcritical(1).unwrap();
        assert_eq!(r.margin, Ratio::new(5, 7));

        assert!(mixed(&["2"], "2").check_subcritical(3).is_err());
    }

    #[test]
    fn boundary_never_flips() {
        // 2/6 + 1/3 + 1/3 == 1 exactly, although 1/3 is not representable.
        let r = mixed(&["3", "3"], "6").check_subcritical(1).unwrap();
        assert!(!r.pass);
        assert_eq!(r.margin, Ratio::zero());
    }
}
