//! Fixed-point decimal numbers with an integer mantissa.
//!
//! A value is `mantissa / 10^scale`. Operations on operands with different
//! scales promote to the larger scale; division and multiplication round
//! half away from zero. Intermediate products are carried in `i128` so a
//! single operation never overflows before the final narrowing check.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_traits::{PrimInt, Signed, Zero};
use thiserror::Error;

/// Largest supported number of decimals.
pub const MAX_SCALE: u8 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixedError {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid decimal literal `{0}`")]
    Parse(String),
    #[error("scale {0} exceeds the maximum of {MAX_SCALE} decimals")]
    Scale(u8),
}

/// Mantissa types usable by [`Fixed`].
pub trait Mantissa: PrimInt + Signed + fmt::Debug + Hash + Send + Sync + 'static {}

impl<T> Mantissa for T where T: PrimInt + Signed + fmt::Debug + Hash + Send + Sync + 'static {}

#[derive(Clone, Copy)]
pub struct Fixed<M: Mantissa> {
    mantissa: M,
    scale: u8,
}

fn pow10(n: u8) -> i128 {
    10i128.pow(n as u32)
}

/// `num / den` rounded half away from zero.
fn div_round(num: i128, den: i128) -> i128 {
    let q = num / den;
    let r = num % den;
    if r.abs() * 2 >= den.abs() {
        if (num < 0) != (den < 0) {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

impl<M: Mantissa> Fixed<M> {
    pub fn new(mantissa: M, scale: u8) -> Self {
        assert!(scale <= MAX_SCALE, "scale out of range");
        Fixed { mantissa, scale }
    }

    pub fn from_int(v: i64) -> Result<Self, FixedError> {
        Self::from_i128(v as i128, 0)
    }

    fn from_i128(m: i128, scale: u8) -> Result<Self, FixedError> {
        let mantissa = M::from(m).ok_or(FixedError::Overflow)?;
        Ok(Fixed { mantissa, scale })
    }

    pub fn mantissa(&self) -> M {
        self.mantissa
    }

    pub fn scale(&self) -> u8 {
        self.scale
    }

    fn wide(&self) -> i128 {
        self.mantissa.to_i128().expect("mantissa fits in i128")
    }

    fn wide_at(&self, scale: u8) -> i128 {
        debug_assert!(scale >= self.scale);
        self.wide() * pow10(scale - self.scale)
    }

    /// Re-express at `scale`, rounding half away from zero when decimals
    /// are dropped.
    pub fn rescale(&self, scale: u8) -> Result<Self, FixedError> {
        if scale > MAX_SCALE {
            return Err(FixedError::Scale(scale));
        }
        let m = if scale >= self.scale {
            self.wide()
                .checked_mul(pow10(scale - self.scale))
                .ok_or(FixedError::Overflow)?
        } else {
            div_round(self.wide(), pow10(self.scale - scale))
        };
        Self::from_i128(m, scale)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, FixedError> {
        let s = self.scale.max(rhs.scale);
        Self::from_i128(self.wide_at(s) + rhs.wide_at(s), s)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, FixedError> {
        let s = self.scale.max(rhs.scale);
        Self::from_i128(self.wide_at(s) - rhs.wide_at(s), s)
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, FixedError> {
        let s = self.scale.max(rhs.scale);
        let raw = self
            .wide()
            .checked_mul(rhs.wide())
            .ok_or(FixedError::Overflow)?;
        // raw has scale self.scale + rhs.scale
        let extra = self.scale + rhs.scale - s;
        Self::from_i128(div_round(raw, pow10(extra)), s)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, FixedError> {
        if rhs.mantissa.is_zero() {
            return Err(FixedError::DivisionByZero);
        }
        let s = self.scale.max(rhs.scale);
        // (a / 10^sa) / (b / 10^sb) * 10^s = a * 10^(s + sb - sa) / b
        let shift = s as i32 + rhs.scale as i32 - self.scale as i32;
        let num = if shift >= 0 {
            self.wide()
                .checked_mul(pow10(shift as u8))
                .ok_or(FixedError::Overflow)?
        } else {
            div_round(self.wide(), pow10((-shift) as u8))
        };
        Self::from_i128(div_round(num, rhs.wide()), s)
    }

    pub fn checked_neg(&self) -> Result<Self, FixedError> {
        Self::from_i128(-self.wide(), self.scale)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa < M::zero()
    }

    /// Multiply by an integer factor and round to an integer, e.g. to turn a
    /// duration in domain units into internal time steps.
    pub fn scaled_to_int(&self, factor: i64) -> Result<i64, FixedError> {
        let prod = self
            .wide()
            .checked_mul(factor as i128)
            .ok_or(FixedError::Overflow)?;
        let v = div_round(prod, pow10(self.scale));
        i64::try_from(v).map_err(|_| FixedError::Overflow)
    }

    /// Integer value when the number has no fractional part.
    pub fn to_integer(&self) -> Option<i64> {
        let p = pow10(self.scale);
        let w = self.wide();
        if w % p == 0 {
            i64::try_from(w / p).ok()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.wide() as f64 / pow10(self.scale) as f64
    }

    /// Smallest scale that represents the value exactly.
    pub fn normalized(&self) -> Self {
        let mut m = self.wide();
        let mut s = self.scale;
        while s > 0 && m % 10 == 0 {
            m /= 10;
            s -= 1;
        }
        Self::from_i128(m, s).expect("normalizing never grows the mantissa")
    }
}

impl<M: Mantissa> PartialEq for Fixed<M> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<M: Mantissa> Eq for Fixed<M> {}

impl<M: Mantissa> PartialOrd for Fixed<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<M: Mantissa> Ord for Fixed<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = self.scale.max(other.scale);
        self.wide_at(s).cmp(&other.wide_at(s))
    }
}

impl<M: Mantissa> Hash for Fixed<M> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let n = self.normalized();
        n.mantissa.hash(state);
        n.scale.hash(state);
    }
}

impl<M: Mantissa> fmt::Debug for Fixed<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<M: Mantissa> fmt::Display for Fixed<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.wide();
        if self.scale == 0 {
            return write!(f, "{w}");
        }
        let p = pow10(self.scale);
        let sign = if w < 0 { "-" } else { "" };
        let a = w.abs();
        write!(
            f,
            "{sign}{}.{:0width$}",
            a / p,
            a % p,
            width = self.scale as usize
        )
    }
}

impl<M: Mantissa> FromStr for Fixed<M> {
    type Err = FixedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FixedError::Parse(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) || (body.contains('.') && frac.is_empty()) {
            return Err(bad());
        }
        if frac.len() > MAX_SCALE as usize {
            return Err(FixedError::Scale(frac.len() as u8));
        }
        let digits = format!("{int}{frac}");
        let mut m: i128 = digits.parse().map_err(|_| FixedError::Overflow)?;
        if neg {
            m = -m;
        }
        Self::from_i128(m, frac.len() as u8)
    }
}

impl<M: Mantissa> Default for Fixed<M> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<M: Mantissa> Zero for Fixed<M> {
    fn zero() -> Self {
        Fixed {
            mantissa: M::zero(),
            scale: 0,
        }
    }

    fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }
}

/// Panicking addition; used by generic graph code where costs are bounded
/// by the caller. Prefer [`Fixed::checked_add`] elsewhere.
impl<M: Mantissa> Add for Fixed<M> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("fixed-point overflow")
    }
}

impl<M: Mantissa> Sub for Fixed<M> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(&rhs).expect("fixed-point overflow")
    }
}

impl<M: Mantissa> Neg for Fixed<M> {
    type Output = Self;

    fn neg(self) -> Self {
        self.checked_neg().expect("fixed-point overflow")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Fixed<i64>;

    fn d(s: &str) -> D {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(d("82.860").to_string(), "82.860");
        assert_eq!(d("-0.5").to_string(), "-0.5");
        assert_eq!(d("17").to_string(), "17");
        assert!("1.".parse::<D>().is_err());
        assert!("abc".parse::<D>().is_err());
    }

    #[test]
    fn mixed_scale_promotes() {
        let s = d("1.5").checked_add(&d("0.25")).unwrap();
        assert_eq!(s.scale(), 2);
        assert_eq!(s, d("1.75"));
        assert_eq!(d("1.0"), d("1"));
    }

    #[test]
    fn division_rounds_half_away_from_zero() {
        assert_eq!(d("10000.000").checked_div(&d("198.000")).unwrap(), d("50.505"));
        assert_eq!(d("5").checked_div(&d("2")).unwrap(), d("3"));
        assert_eq!(d("-5").checked_div(&d("2")).unwrap(), d("-3"));
        assert_eq!(d("1.000").checked_div(&d("3")).unwrap(), d("0.333"));
        assert_eq!(d("2.000").checked_div(&d("3")).unwrap(), d("0.667"));
        assert_eq!(d("1").checked_div(&d("0")), Err(FixedError::DivisionByZero));
    }

    #[test]
    fn multiplication_keeps_larger_scale() {
        let p = d("1.25").checked_mul(&d("0.5")).unwrap();
        assert_eq!(p.scale(), 2);
        assert_eq!(p, d("0.63"));
    }

    #[test]
    fn overflow_is_reported() {
        let big = Fixed::<i32>::new(i32::MAX, 0);
        assert_eq!(big.checked_add(&Fixed::new(1, 0)), Err(FixedError::Overflow));
    }

    #[test]
    fn scaled_to_int_for_time() {
        assert_eq!(d("3.424").scaled_to_int(1000).unwrap(), 3424);
        assert_eq!(d("180").scaled_to_int(1).unwrap(), 180);
    }

    #[test]
    fn hash_agrees_with_eq() {
        use std::collections::HashSet;
        let mut set = HashSet::new();
        set.insert(d("2.50"));
        assert!(set.contains(&d("2.5")));
    }
}
