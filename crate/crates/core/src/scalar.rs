//! Exact Gaussian rationals and the small ring abstraction the polynomial
//! layer is generic over.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Commutative ring with an explicit construction context.
///
/// The context carries whatever a value needs to build its own zero and
/// one: nothing for scalars, the variable count for polynomials.
pub trait Ring: Clone + Eq + Ord + fmt::Debug + Send + Sync {
    type Ctx: Clone + Eq + fmt::Debug + Send + Sync;

    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn ctx(&self) -> Self::Ctx;
    fn from_scalar(c: &GaussianRational, ctx: &Self::Ctx) -> Self;

    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;

    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// The value as a bare scalar, if it is one.
    fn as_scalar(&self) -> Option<GaussianRational>;

    /// Whether the printed form needs parentheses when used as a factor.
    fn needs_parens(&self) -> bool;

    fn render(&self, param_names: &[String]) -> String;
}

/// Exact complex number `re + im*i` with arbitrary-precision rational parts.
///
/// `BigRational` keeps both parts in lowest terms with a positive
/// denominator, so structural equality is exact equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for GaussianRational {
    fn from(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussianRational::new(&self.re * &rhs.re, BigRational::zero());
        }
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> Self {
        -&self
    }
}

impl fmt::Display for GaussianRational {
    /// `a/b`, `c/d*i`, or `a/b+c/d*i`; integers drop the `/1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        let im_abs = self.im.abs();
        let im_part = if im_abs.is_one() {
            "i".to_string()
        } else {
            format!("{im_abs}*i")
        };
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{im_part}")
            } else {
                write!(f, "{im_part}")
            }
        } else {
            let sign = if self.im.is_negative() { '-' } else { '+' };
            write!(f, "{}{}{}", self.re, sign, im_part)
        }
    }
}

impl Ring for GaussianRational {
    type Ctx = ();

    fn zero(_: &()) -> Self {
        GaussianRational::zero()
    }
    fn one(_: &()) -> Self {
        GaussianRational::one()
    }
    fn ctx(&self) {}
    fn from_scalar(c: &GaussianRational, _: &()) -> Self {
        c.clone()
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
    fn is_one(&self) -> bool {
        GaussianRational::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn as_scalar(&self) -> Option<GaussianRational> {
        Some(self.clone())
    }
    fn needs_parens(&self) -> bool {
        !self.re.is_zero() && !self.im.is_zero()
    }
    fn render(&self, _: &[String]) -> String {
        self.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_sign() {
        let a = GaussianRational::from_ratio(2, -4);
        assert_eq!(a, GaussianRational::from_ratio(-1, 2));
        assert_eq!(a.to_string(), "-1/2");
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussianRational::i();
        assert_eq!(&i * &i, GaussianRational::from_int(-1));
    }

    #[test]
    fn inverse_round_trip() {
        let z = GaussianRational::new(
            BigRational::new(3.into(), 4.into()),
            BigRational::new((-2).into(), 5.into()),
        );
        let w = z.inv().unwrap();
        assert!((&z * &w).is_one());
        assert!(GaussianRational::zero().inv().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussianRational::i().to_string(), "i");
        assert_eq!((-GaussianRational::i()).to_string(), "-i");
        let z = GaussianRational::new(
            BigRational::new(1.into(), 2.into()),
            BigRational::new((-3).into(), 4.into()),
        );
        assert_eq!(z.to_string(), "1/2-3/4*i");
    }
}
