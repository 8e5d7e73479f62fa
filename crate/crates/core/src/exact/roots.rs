use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{ExactError, Rational};

/// The real number `a / sqrt(b)` with `b > 0`, kept unnormalized.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SqrtRatio {
    pub a: Rational,
    pub b: Rational,
}

impl SqrtRatio {
    pub fn new(a: Rational, b: Rational) -> Result<Self, ExactError> {
        if !b.is_positive() {
            return Err(ExactError::NonPositiveRadicand(b));
        }
        Ok(SqrtRatio { a, b })
    }

    /// `sqrt(x)` for `x >= 0`, as `x / sqrt(x)` (or `0 / sqrt(1)`).
    pub fn sqrt_of(x: Rational) -> Result<Self, ExactError> {
        if x.is_negative() {
            return Err(ExactError::NonPositiveRadicand(x));
        }
        if x.is_zero() {
            return Ok(SqrtRatio::zero());
        }
        Ok(SqrtRatio { a: x.clone(), b: x })
    }

    pub fn zero() -> Self {
        SqrtRatio {
            a: Rational::zero(),
            b: Rational::one(),
        }
    }

    pub fn from_rational(x: Rational) -> Self {
        SqrtRatio {
            a: x,
            b: Rational::one(),
        }
    }

    /// `sign(a) * a^2 / b`, the signed square of the value.
    pub fn signed_square(&self) -> Rational {
        let sq = &self.a * &self.a / &self.b;
        if self.a.is_negative() {
            -sq
        } else {
            sq
        }
    }

    pub fn signum(&self) -> i32 {
        self.a.signum()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() / self.b.to_f64().sqrt()
    }
}

/// Orders `x.a / sqrt(x.b)` against `y.a / sqrt(y.b)` exactly: signs first,
/// then the squares `a^2 / b`.
pub fn compare_sqrt_ratio(x: &SqrtRatio, y: &SqrtRatio) -> Ordering {
    let (sx, sy) = (x.a.signum(), y.a.signum());
    if sx != sy {
        return sx.cmp(&sy);
    }
    if sx == 0 {
        return Ordering::Equal;
    }
    let lhs = &x.a * &x.a * &y.b;
    let rhs = &y.a * &y.a * &x.b;
    let mag = lhs.cmp(&rhs);
    if sx > 0 {
        mag
    } else {
        mag.reverse()
    }
}

impl PartialEq for SqrtRatio {
    fn eq(&self, other: &Self) -> bool {
        compare_sqrt_ratio(self, other) == Ordering::Equal
    }
}

impl Eq for SqrtRatio {}

impl PartialOrd for SqrtRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SqrtRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_sqrt_ratio(self, other)
    }
}

impl fmt::Display for SqrtRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/sqrt({}) ~ {:.12}",
            grouped(&self.a),
            self.b,
            self.to_f64()
        )
    }
}

/// The real number `a / b^(1/p)` with `b > 0` and `p >= 1`.
///
/// Generalizes [`SqrtRatio`] to the p-th root normalizations used by
/// L^q-type bounds; comparisons raise both sides to a common power.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootRatio {
    pub a: Rational,
    pub b: Rational,
    pub p: u32,
}

impl RootRatio {
    pub fn new(a: Rational, b: Rational, p: u32) -> Result<Self, ExactError> {
        if !b.is_positive() {
            return Err(ExactError::NonPositiveRadicand(b));
        }
        if p == 0 {
            return Err(ExactError::ZeroRootIndex);
        }
        Ok(RootRatio { a, b, p })
    }

    pub fn signum(&self) -> i32 {
        self.a.signum()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() / self.b.to_f64().powf(1.0 / self.p as f64)
    }

    /// `|a|^L / b^(L/p)`, the value's magnitude raised to the power `L`
    /// (which must be a multiple of `p`).
    fn magnitude_pow(&self, l: u32) -> Rational {
        let a_pow = self.a.abs().pow(l as i32).expect("non-negative exponent");
        let b_pow = self
            .b
            .pow((l / self.p) as i32)
            .expect("non-negative exponent");
        a_pow / b_pow
    }
}

impl From<SqrtRatio> for RootRatio {
    fn from(value: SqrtRatio) -> Self {
        RootRatio {
            a: value.a,
            b: value.b,
            p: 2,
        }
    }
}

pub fn compare_root_ratio(x: &RootRatio, y: &RootRatio) -> Ordering {
    let (sx, sy) = (x.signum(), y.signum());
    if sx != sy {
        return sx.cmp(&sy);
    }
    if sx == 0 {
        return Ordering::Equal;
    }
    let l = x.p.lcm(&y.p);
    let mag = x.magnitude_pow(l).cmp(&y.magnitude_pow(l));
    if sx > 0 {
        mag
    } else {
        mag.reverse()
    }
}

impl PartialEq for RootRatio {
    fn eq(&self, other: &Self) -> bool {
        compare_root_ratio(self, other) == Ordering::Equal
    }
}

impl Eq for RootRatio {}

impl PartialOrd for RootRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_root_ratio(self, other)
    }
}

impl fmt::Display for RootRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/({})^(1/{}) ~ {:.12}",
            grouped(&self.a),
            self.b,
            self.p,
            self.to_f64()
        )
    }
}

fn grouped(x: &Rational) -> String {
    let s = x.to_string();
    if s.contains('/') {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sr(a: i64, b: i64) -> SqrtRatio {
        SqrtRatio::new(Rational::from(a), Rational::from(b)).unwrap()
    }

    #[test]
    fn documented_comparisons() {
        assert_eq!(compare_sqrt_ratio(&sr(1, 2), &sr(1, 3)), Ordering::Greater);
        assert_eq!(compare_sqrt_ratio(&sr(-1, 2), &sr(1, 9)), Ordering::Less);
        assert_eq!(compare_sqrt_ratio(&sr(2, 4), &sr(1, 1)), Ordering::Equal);
    }

    #[test]
    fn negative_magnitudes_reverse() {
        assert_eq!(compare_sqrt_ratio(&sr(-2, 1), &sr(-1, 1)), Ordering::Less);
        assert_eq!(compare_sqrt_ratio(&sr(0, 5), &sr(0, 1)), Ordering::Equal);
    }

    #[test]
    fn radicand_must_be_positive() {
        assert!(SqrtRatio::new(Rational::one(), Rational::zero()).is_err());
        assert!(RootRatio::new(Rational::one(), Rational::one(), 0).is_err());
    }

    #[test]
    fn root_ratio_mixed_indices() {
        // 2 / 16^(1/4) = 1 = 3 / 9^(1/2)
        let x = RootRatio::new(Rational::from(2), Rational::from(16), 4).unwrap();
        let y = RootRatio::new(Rational::from(3), Rational::from(9), 2).unwrap();
        assert_eq!(x, y);
        let z = RootRatio::new(Rational::from(2), Rational::from(15), 4).unwrap();
        assert!(z > y);
    }
}
