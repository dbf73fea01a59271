//! Exact scalars: Gaussian rationals ℚ + iℚ.
//!
//! All Gröbner-layer computations run over this field; floating point only
//! appears at evaluation and matrix boundaries. `num_rational::BigRational`
//! keeps denominators positive and fractions reduced, which gives canonical
//! representatives and exact equality for free.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// An element of ℚ + iℚ in canonical (reduced, positive denominator) form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        assert!(re_den != 0 && im_den != 0, "zero denominator");
        Self::new(
            BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        )
    }

    /// Exact conversion of a finite double (every f64 is a dyadic rational).
    pub fn from_f64_exact(re: f64, im: f64) -> Option<Self> {
        Some(Self::new(BigRational::from_float(re)?, BigRational::from_float(im)?))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// |z|² = re² + im², an exact nonnegative rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    // field division through the multiplicative inverse
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        self * &rhs.inv().expect("division by zero Gaussian rational")
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    /// Canonical text form: `a/b`, `c/d*i`, or `a/b+c/d*i` (with `-` folded in).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let im_part = if self.im.is_one() {
            "i".to_string()
        } else if (-&self.im).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", fmt_rational(&self.im))
        };
        if self.re.is_zero() {
            write!(f, "{im_part}")
        } else if self.im.is_negative() {
            write!(f, "{}{}", fmt_rational(&self.re), im_part)
        } else {
            write!(f, "{}+{}", fmt_rational(&self.re), im_part)
        }
    }
}

/// Best rational approximation of `x` with |x - p/q| <= tol, via continued
/// fractions. Used to snap float eigenvalues onto candidate exact points;
/// every snap is verified exactly afterwards.
pub fn snap_rational(x: f64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x.abs() <= tol {
        return Some(BigRational::zero());
    }
    // Continued fraction expansion of x with convergents p/q.
    let (mut p0, mut q0) = (BigInt::from(1), BigInt::from(0));
    let (mut p1, mut q1) = (BigInt::from(x.floor() as i64), BigInt::from(1));
    let mut frac = x - x.floor();
    for _ in 0..64 {
        let approx = p1.to_f64().unwrap_or(f64::NAN) / q1.to_f64().unwrap_or(f64::NAN);
        if (approx - x).abs() <= tol {
            return Some(BigRational::new(p1, q1));
        }
        if frac.abs() < 1e-18 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        frac = inv - a;
        let a = BigInt::from(a as i64);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    let approx = p1.to_f64().unwrap_or(f64::NAN) / q1.to_f64().unwrap_or(f64::NAN);
    if (approx - x).abs() <= tol {
        Some(BigRational::new(p1, q1))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_arithmetic_is_exact() {
        let a = GaussianRational::from_parts(1, 2, 3, 4);
        let b = GaussianRational::from_parts(-2, 3, 1, 5);
        let prod = &a * &b;
        let back = &prod / &b;
        assert_eq!(back, a);
        let sum = &a + &b;
        assert_eq!(&(&sum - &b), &a);
    }

    #[test]
    fn conjugation_and_norm() {
        let a = GaussianRational::from_parts(3, 1, -4, 1);
        assert_eq!(
            (&a * &a.conj()).re,
            BigRational::from_integer(BigInt::from(25))
        );
        assert!((&a * &a.conj()).im.is_zero());
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussianRational::from_ratio(1, 2).to_string(), "1/2");
        assert_eq!(GaussianRational::i().to_string(), "i");
        assert_eq!(GaussianRational::from_parts(1, 2, 3, 4).to_string(), "1/2+3/4*i");
        assert_eq!(GaussianRational::from_parts(0, 1, -1, 1).to_string(), "-i");
    }

    #[test]
    fn snap_recovers_simple_rationals() {
        let r = snap_rational(0.3333333333333333, 1e-6).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(3)));
        let r = snap_rational(-2.0000000001, 1e-6).unwrap();
        assert_eq!(r, BigRational::from_integer(BigInt::from(-2)));
        assert_eq!(snap_rational(0.0, 1e-6).unwrap(), BigRational::zero());
    }

    #[test]
    fn from_f64_is_exact() {
        let g = GaussianRational::from_f64_exact(0.1, 0.0).unwrap();
        // 0.1 is not 1/10 in binary; the conversion must preserve the bits.
        assert_eq!(g.re.to_f64().unwrap(), 0.1);
    }
}
