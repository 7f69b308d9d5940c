//! Coefficient field: exact Gaussian rationals or fixed-precision big complex floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use crate::error::{Error, Result};

/// Binary big float used for both parts of [`BigComplex`].
pub type Real = FBig<HalfEven, 2>;

/// Minimum decimal precision accepted for the bigfloat backend.
pub const MIN_DIGITS: u32 = 30;
/// Default decimal precision.
pub const DEFAULT_DIGITS: u32 = 60;
const GUARD_BITS: usize = 32;

/// Which coefficient field a computation runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Float { digits: u32 },
}

impl Backend {
    pub fn float(digits: u32) -> Result<Backend> {
        if digits < MIN_DIGITS {
            return Err(Error::Config(format!(
                "bigfloat precision {digits} below the minimum of {MIN_DIGITS} digits"
            )));
        }
        Ok(Backend::Float { digits })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Backend::Exact)
    }

    /// Working precision in bits, including guard bits.
    pub fn bits(&self) -> Option<usize> {
        match self {
            Backend::Exact => None,
            Backend::Float { digits } => {
                Some((*digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS)
            }
        }
    }

    /// Bring a scalar into this backend. Exact values are promoted, floats
    /// must already carry the matching precision.
    pub fn lift(&self, x: &Scalar) -> Scalar {
        match (self, x) {
            (Backend::Exact, _) => x.clone(),
            (Backend::Float { .. }, Scalar::Exact(q)) => {
                Scalar::Float(BigComplex::from_gauss(q, self.bits().unwrap()))
            }
            (Backend::Float { .. }, Scalar::Float(c)) => {
                assert_eq!(c.prec, self.bits().unwrap(), "bigfloat precision mismatch");
                x.clone()
            }
        }
    }

    pub fn int(&self, n: i64) -> Scalar {
        self.lift(&Scalar::int(n))
    }

    pub fn rat(&self, p: i64, q: i64) -> Scalar {
        self.lift(&Scalar::rat(p, q))
    }

    pub fn zero(&self) -> Scalar {
        self.int(0)
    }

    pub fn one(&self) -> Scalar {
        self.int(1)
    }

    pub fn i(&self) -> Scalar {
        self.lift(&Scalar::i())
    }

    /// Float approximation of a complex f64, for the bigfloat backend only.
    pub fn from_c64(&self, re: f64, im: f64) -> Result<Scalar> {
        match self.bits() {
            None => Err(Error::NotRepresentable("f64 literal on the exact backend".into())),
            Some(b) => Ok(Scalar::Float(BigComplex::from_f64(re, im, b))),
        }
    }

    /// sqrt 2, which the exact backend cannot represent.
    pub fn sqrt2(&self) -> Result<Scalar> {
        self.int(2).sqrt()
    }

    pub fn name(&self) -> String {
        match self {
            Backend::Exact => "exact".into(),
            Backend::Float { digits } => format!("bigfloat:{digits}"),
        }
    }

    /// Default comparison tolerance for "equal up to rounding".
    pub fn tolerance(&self) -> f64 {
        match self {
            Backend::Exact => 0.0,
            Backend::Float { digits } => 10f64.powi(-(*digits as i32 - 15)),
        }
    }
}

// ---------------------------------------------------------------------------

/// a + b i with a, b rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: RBig,
    pub im: RBig,
}

fn rbig(p: i64, q: i64) -> RBig {
    assert!(q != 0, "zero denominator");
    let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
    RBig::from_parts(IBig::from(p), UBig::from(q as u64))
}

fn rat_sqrt(x: &RBig) -> Option<RBig> {
    if x.numerator() < &IBig::ZERO {
        return None;
    }
    let n = x.numerator().clone().into_parts().1;
    let d = x.denominator().clone();
    let sn = isqrt(&n);
    let sd = isqrt(&d);
    if &sn * &sn == n && &sd * &sd == d {
        Some(RBig::from_parts(IBig::from(sn), sd))
    } else {
        None
    }
}

fn isqrt(n: &UBig) -> UBig {
    use dashu_base::SquareRoot;
    n.sqrt()
}

impl GaussRat {
    pub fn new(re: RBig, im: RBig) -> Self {
        GaussRat { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn norm(&self) -> RBig {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<GaussRat> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(GaussRat::new(&self.re / &n, -(&self.im / &n)))
    }

    /// Principal square root if it lies in Q(i).
    pub fn sqrt(&self) -> Option<GaussRat> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let r = rat_sqrt(&self.norm())?;
        let half = rbig(1, 2);
        let x2 = (&r + &self.re) * &half;
        let y2 = (&r - &self.re) * &half;
        let x = rat_sqrt(&x2)?;
        let mut y = rat_sqrt(&y2)?;
        if self.im < RBig::ZERO {
            y = -y;
        }
        // Result has arg in (-pi/2, pi/2]: x >= 0, and y >= 0 when x = 0.
        Some(GaussRat::new(x, y))
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64().value(), self.im.to_f64().value())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            _ => {
                if self.im < RBig::ZERO {
                    write!(f, "{}-{}i", self.re, -self.im.clone())
                } else {
                    write!(f, "{}+{}i", self.re, self.im)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------

/// Complex number with fixed binary precision `prec` (bits) in both parts.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: Real,
    pub im: Real,
    pub prec: usize,
}

fn real_int(n: IBig, prec: usize) -> Real {
    Real::from(n).with_precision(prec).value()
}

fn real_rat(q: &RBig, prec: usize) -> Real {
    let n = real_int(q.numerator().clone(), prec);
    let d = real_int(IBig::from(q.denominator().clone()), prec);
    n / d
}

fn real_f64(x: f64, prec: usize) -> Real {
    if x == 0.0 {
        return real_int(IBig::ZERO, prec);
    }
    Real::try_from(x).expect("finite f64").with_precision(prec).value()
}

fn real_is_zero(x: &Real) -> bool {
    x.repr().is_pos_zero() || x.repr().is_neg_zero()
}

fn real_neg(x: &Real) -> bool {
    x.sign() == dashu_base::Sign::Negative && !real_is_zero(x)
}

fn real_sqrt(x: &Real, prec: usize) -> Real {
    if real_is_zero(x) {
        return real_int(IBig::ZERO, prec);
    }
    x.sqrt()
}

impl BigComplex {
    pub fn zero(prec: usize) -> Self {
        BigComplex { re: real_int(IBig::ZERO, prec), im: real_int(IBig::ZERO, prec), prec }
    }

    pub fn from_gauss(q: &GaussRat, prec: usize) -> Self {
        BigComplex { re: real_rat(&q.re, prec), im: real_rat(&q.im, prec), prec }
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> Self {
        BigComplex { re: real_f64(re, prec), im: real_f64(im, prec), prec }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.prec, other.prec, "bigfloat precision mismatch");
    }

    pub fn is_zero(&self) -> bool {
        real_is_zero(&self.re) && real_is_zero(&self.im)
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64().value(), self.im.to_f64().value())
    }

    pub fn abs_f64(&self) -> f64 {
        let (a, b) = self.to_c64();
        a.hypot(b)
    }

    fn add(&self, o: &Self) -> Self {
        self.check(o);
        BigComplex { re: &self.re + &o.re, im: &self.im + &o.im, prec: self.prec }
    }

    fn sub(&self, o: &Self) -> Self {
        self.check(o);
        BigComplex { re: &self.re - &o.re, im: &self.im - &o.im, prec: self.prec }
    }

    fn mul(&self, o: &Self) -> Self {
        self.check(o);
        BigComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
            prec: self.prec,
        }
    }

    fn neg(&self) -> Self {
        BigComplex { re: -self.re.clone(), im: -self.im.clone(), prec: self.prec }
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(BigComplex { re: &self.re / &n, im: -(&self.im / &n), prec: self.prec })
    }

    /// Principal square root (argument in (-pi/2, pi/2]).
    pub fn sqrt(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.prec;
        let r = real_sqrt(&(&self.re * &self.re + &self.im * &self.im), p);
        let two = real_int(IBig::from(2), p);
        if !real_neg(&self.re) {
            let x = real_sqrt(&((&r + &self.re) / &two), p);
            let y = &self.im / (&two * &x);
            BigComplex { re: x, im: y, prec: p }
        } else {
            let mut y = real_sqrt(&((&r - &self.re) / &two), p);
            if real_neg(&self.im) {
                y = -y;
            }
            let x = &self.im / (&two * &y);
            BigComplex { re: x, im: y, prec: p }
        }
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = BigComplex::from_f64(1.0, 0.0, self.prec);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Principal n-th root by Newton iteration from an f64 seed.
    pub fn nth_root(&self, n: u32) -> Self {
        assert!(n >= 1);
        if n == 1 || self.is_zero() {
            return self.clone();
        }
        let (a, b) = self.to_c64();
        let r = a.hypot(b).powf(1.0 / n as f64);
        let th = b.atan2(a) / n as f64;
        let mut w = BigComplex::from_f64(r * th.cos(), r * th.sin(), self.prec);
        let nn = BigComplex::from_f64(n as f64, 0.0, self.prec);
        let scale = r.max(1e-300);
        for _ in 0..64 {
            let wn1 = w.powi(n - 1);
            let step = wn1.mul(&w).sub(self).mul(&nn.mul(&wn1).inv().expect("nonzero iterate"));
            w = w.sub(&step);
            let s = step.abs_f64();
            if s == 0.0 || s / scale < 2f64.powi(-(self.prec as i32) + 8) {
                break;
            }
        }
        w
    }

    pub fn decimal_string(&self, digits: usize) -> String {
        fn one(x: &Real, digits: usize) -> String {
            if real_is_zero(x) {
                return "0".into();
            }
            let d = x.clone().with_base_and_precision::<10>(digits).value();
            d.to_string()
        }
        let re = one(&self.re, digits);
        if real_is_zero(&self.im) {
            return re;
        }
        let im = one(&self.im, digits);
        if im.starts_with('-') {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }
}

// ---------------------------------------------------------------------------

/// A coefficient in one of the two backends.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(GaussRat),
    Float(BigComplex),
}

impl Scalar {
    pub fn int(n: i64) -> Scalar {
        Scalar::Exact(GaussRat::new(rbig(n, 1), RBig::ZERO))
    }

    pub fn rat(p: i64, q: i64) -> Scalar {
        Scalar::Exact(GaussRat::new(rbig(p, q), RBig::ZERO))
    }

    /// (a/b) + (c/d) i
    pub fn gauss(a: i64, b: i64, c: i64, d: i64) -> Scalar {
        Scalar::Exact(GaussRat::new(rbig(a, b), rbig(c, d)))
    }

    pub fn from_rbig(re: RBig, im: RBig) -> Scalar {
        Scalar::Exact(GaussRat::new(re, im))
    }

    pub fn zero() -> Scalar {
        Scalar::int(0)
    }

    pub fn one() -> Scalar {
        Scalar::int(1)
    }

    pub fn i() -> Scalar {
        Scalar::gauss(0, 1, 1, 1)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussRat> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }

    /// Structural zero test (exact for both backends: a float is zero only if
    /// both parts are the float zero).
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(c) => c.is_zero(),
        }
    }

    pub fn to_c64(&self) -> (f64, f64) {
        match self {
            Scalar::Exact(q) => q.to_c64(),
            Scalar::Float(c) => c.to_c64(),
        }
    }

    pub fn abs_f64(&self) -> f64 {
        let (a, b) = self.to_c64();
        a.hypot(b)
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(c) => Backend::Float {
                digits: ((c.prec - GUARD_BITS) as f64 / std::f64::consts::LOG2_10).floor() as u32,
            },
        }
    }

    fn promote(a: &Scalar, b: &Scalar) -> (BigComplex, BigComplex) {
        match (a, b) {
            (Scalar::Float(x), Scalar::Float(y)) => (x.clone(), y.clone()),
            (Scalar::Float(x), Scalar::Exact(q)) => (x.clone(), BigComplex::from_gauss(q, x.prec)),
            (Scalar::Exact(q), Scalar::Float(y)) => (BigComplex::from_gauss(q, y.prec), y.clone()),
            _ => unreachable!(),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Exact(q) => q.inv().map(Scalar::Exact),
            Scalar::Float(c) => c.inv().map(Scalar::Float),
        }
        .ok_or_else(|| Error::NonInvertible("division by zero scalar".into()))
    }

    /// Principal square root (the series module's branch rule).
    pub fn sqrt(&self) -> Result<Scalar> {
        match self {
            Scalar::Exact(q) => q
                .sqrt()
                .map(Scalar::Exact)
                .ok_or_else(|| Error::NotRepresentable(format!("sqrt({q}) is not in Q(i)"))),
            Scalar::Float(c) => Ok(Scalar::Float(c.sqrt())),
        }
    }

    /// Principal n-th root. Exact only when the root is in Q(i) and found by
    /// repeated square roots (n a power of two) or by checking a rounded
    /// candidate.
    pub fn nth_root(&self, n: u32) -> Result<Scalar> {
        match self {
            Scalar::Float(c) => Ok(Scalar::Float(c.nth_root(n))),
            Scalar::Exact(_) => {
                if n.is_power_of_two() {
                    let mut x = self.clone();
                    let mut k = n;
                    while k > 1 {
                        x = x.sqrt()?;
                        k /= 2;
                    }
                    Ok(x)
                } else if self.is_zero() || self.is_one() {
                    Ok(self.clone())
                } else if let Some(w) = self.exact_root_guess(n) {
                    Ok(w)
                } else {
                    Err(Error::NotRepresentable(format!("{n}-th root of {self} on the exact backend")))
                }
            }
        }
    }

    /// Principal n-th root when it is a small Gaussian rational.
    fn exact_root_guess(&self, n: u32) -> Option<Scalar> {
        let (a, b) = self.to_c64();
        let r = a.hypot(b).powf(1.0 / n as f64);
        let th = b.atan2(a) / n as f64;
        let (x, y) = (crate::roots::rationalize(r * th.cos(), 1_000_000)?, crate::roots::rationalize(r * th.sin(), 1_000_000)?);
        let w = Scalar::gauss(x.0, x.1, y.0, y.1);
        if w.powi(n as i64).ok()?.exact_eq(self) {
            Some(w)
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.re.is_one() && q.im.is_zero(),
            Scalar::Float(_) => false,
        }
    }

    pub fn powi(&self, n: i64) -> Result<Scalar> {
        if n < 0 {
            return self.inv()?.powi(-n);
        }
        let mut acc = match self {
            Scalar::Exact(_) => Scalar::one(),
            Scalar::Float(c) => Scalar::Float(BigComplex::from_f64(1.0, 0.0, c.prec)),
        };
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        Ok(acc)
    }

    /// x^(p/q) on the principal branch of the q-th root.
    pub fn pow_rat(&self, p: i64, q: i64) -> Result<Scalar> {
        assert!(q > 0);
        self.nth_root(q as u32)?.powi(p)
    }

    /// Complex exponential at the precision of `be` (bigfloat only, except exp(0)).
    pub fn exp(&self, be: &Backend) -> Result<Scalar> {
        if self.is_zero() {
            return Ok(Scalar::one());
        }
        let bits = be.bits().ok_or_else(|| Error::NotRepresentable(format!("exp({self}) on the exact backend")))?;
        let z = be.lift(self);
        // exp(z) = exp(z / 2^k)^(2^k) with |z / 2^k| < 1/256
        let k = (z.abs_f64().log2() + 8.0).ceil().max(0.0) as i64;
        let w = &z / &Scalar::int(2).powi(k)?;
        let mut term = be.one();
        let mut acc = be.one();
        for n in 1..=(bits / 8 + 4) as i64 {
            term = &(&term * &w) / &Scalar::int(n);
            acc = &acc + &term;
        }
        for _ in 0..k {
            acc = &acc * &acc;
        }
        Ok(acc)
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(GaussRat::new(q.re.clone(), -q.im.clone())),
            Scalar::Float(c) => Scalar::Float(BigComplex { re: c.re.clone(), im: -c.im.clone(), prec: c.prec }),
        }
    }

    /// Human and JSON friendly rendering: exact "p/q+r/si", floats with the
    /// requested number of significant digits.
    pub fn render(&self, digits: usize) -> String {
        match self {
            Scalar::Exact(q) => q.to_string(),
            Scalar::Float(c) => c.decimal_string(digits),
        }
    }

    /// Exact equality on the exact backend; for floats, equality of values.
    pub fn exact_eq(&self, other: &Scalar) -> bool {
        (self - other).is_zero()
    }

    pub fn sign_of_re(&self) -> Ordering {
        match self {
            Scalar::Exact(q) => q.re.cmp(&RBig::ZERO),
            Scalar::Float(c) => {
                if real_is_zero(&c.re) {
                    Ordering::Equal
                } else if real_neg(&c.re) {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Float(c) => write!(f, "{}", c.decimal_string(20)),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.exact_eq(other)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $exact:expr, $float:ident) => {
        impl<'a, 'b> $tr<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'b Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact($exact(a, b)),
                    _ => {
                        let (a, b) = Scalar::promote(self, rhs);
                        Scalar::Float(a.$float(&b))
                    }
                }
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a: &GaussRat, b: &GaussRat| GaussRat::new(&a.re + &b.re, &a.im + &b.im), add);
binop!(Sub, sub, |a: &GaussRat, b: &GaussRat| GaussRat::new(&a.re - &b.re, &a.im - &b.im), sub);
binop!(
    Mul,
    mul,
    |a: &GaussRat, b: &GaussRat| GaussRat::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re),
    mul
);

impl<'b> Div<&'b Scalar> for &Scalar {
    type Output = Scalar;
    /// Panics on division by zero; use [`Scalar::inv`] where zero is possible.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &'b Scalar) -> Scalar {
        self * &rhs.inv().expect("division by zero scalar")
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl<'a> Div<&'a Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        &self / rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(GaussRat::new(-q.re.clone(), -q.im.clone())),
            Scalar::Float(c) => Scalar::Float(c.neg()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

/// (2j-1)!! extended to all integers by (2j-1)!! = (2j+1)!!/(2j+1).
pub fn double_factorial_odd(j: i64) -> Scalar {
    let mut acc = Scalar::one();
    if j >= 0 {
        for k in 1..=j {
            acc = &acc * &Scalar::int(2 * k - 1);
        }
    } else {
        for k in (j + 1..=0).rev() {
            acc = &acc / &Scalar::int(2 * k - 1);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_arith() {
        let a = Scalar::gauss(1, 2, 1, 3);
        let b = Scalar::gauss(-2, 1, 5, 7);
        let c = &(&a * &b) / &b;
        assert_eq!(c, a);
        assert_eq!(&Scalar::i() * &Scalar::i(), Scalar::int(-1));
    }

    #[test]
    fn exact_sqrt() {
        assert_eq!(Scalar::int(-1).sqrt().unwrap(), Scalar::i());
        assert_eq!(Scalar::rat(9, 4).sqrt().unwrap(), Scalar::rat(3, 2));
        // (1+2i)^2 = -3+4i
        assert_eq!(Scalar::gauss(-3, 1, 4, 1).sqrt().unwrap(), Scalar::gauss(1, 1, 2, 1));
        assert_eq!(Scalar::gauss(-3, 1, -4, 1).sqrt().unwrap(), Scalar::gauss(1, 1, -2, 1));
        assert!(Scalar::int(2).sqrt().is_err());
    }

    #[test]
    fn float_roots() {
        let be = Backend::float(60).unwrap();
        let two = be.int(2);
        let r = two.sqrt().unwrap();
        assert!((&(&r * &r) - &two).abs_f64() < 1e-60);
        let z = be.lift(&Scalar::gauss(-3, 1, 4, 1));
        let w = z.nth_root(3).unwrap();
        assert!((&w.powi(3).unwrap() - &z).abs_f64() < 1e-58);
        let neg = be.int(-4).sqrt().unwrap();
        let (re, im) = neg.to_c64();
        assert!(re.abs() < 1e-60 && (im - 2.0).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "precision mismatch")]
    fn mixed_precision_panics() {
        let a = Backend::float(40).unwrap().one();
        let b = Backend::float(60).unwrap().one();
        let _ = &a + &b;
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial_odd(0), Scalar::one());
        assert_eq!(double_factorial_odd(3), Scalar::int(15));
        assert_eq!(double_factorial_odd(-1), Scalar::int(-1));
        assert_eq!(double_factorial_odd(-2), Scalar::rat(1, 3));
    }
}
