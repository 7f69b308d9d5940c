//! Truncated Laurent / Puiseux series in one formal variable.
//!
//! Exponents are stored as integer indices in units of `1/e`. Every series
//! carries its truncation order: coefficients at indices `>= prec` are
//! unknown, never assumed zero.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{double_factorial_odd, Backend, Scalar};

/// Truncation order used for exactly known (polynomial) data.
pub const EXACT: i64 = i64::MAX / 8;

#[derive(Clone, Debug)]
pub struct Series {
    pub var: &'static str,
    /// Ramification index: exponents live in (1/e)Z.
    pub e: u32,
    /// Index of `coeffs[0]`.
    pub start: i64,
    pub coeffs: Vec<Scalar>,
    /// Truncation order (index units).
    pub prec: i64,
}

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        (a + b).min(EXACT)
    }
}

impl Series {
    pub fn new(var: &'static str, e: u32, start: i64, coeffs: Vec<Scalar>, prec: i64) -> Self {
        assert!(e == 1 || e == 2, "only e = 1 or e = 2 are needed");
        let mut s = Series { var, e, start, coeffs, prec };
        s.clip();
        s
    }

    /// Power series c_0 + c_1 x + ... known below `prec`.
    pub fn from_coeffs(var: &'static str, coeffs: Vec<Scalar>, prec: i64) -> Self {
        Series::new(var, 1, 0, coeffs, prec)
    }

    /// Exactly known polynomial.
    pub fn poly(var: &'static str, coeffs: Vec<Scalar>) -> Self {
        Series::new(var, 1, 0, coeffs, EXACT)
    }

    pub fn zero(var: &'static str, prec: i64) -> Self {
        Series::new(var, 1, 0, vec![], prec)
    }

    pub fn constant(var: &'static str, c: Scalar) -> Self {
        Series::poly(var, vec![c])
    }

    /// c x^(k/e), exactly.
    pub fn monomial(var: &'static str, e: u32, k: i64, c: Scalar) -> Self {
        Series::new(var, e, k, vec![c], EXACT)
    }

    pub fn var(var: &'static str) -> Self {
        Series::monomial(var, 1, 1, Scalar::one())
    }

    fn clip(&mut self) {
        if self.prec < EXACT {
            let keep = (self.prec - self.start).max(0) as usize;
            if self.coeffs.len() > keep {
                self.coeffs.truncate(keep);
            }
        }
        // Strip structural zeros at both ends.
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(0..lead);
            self.start += lead as i64;
        }
        while matches!(self.coeffs.last(), Some(c) if c.is_zero() && c.is_exact()) {
            self.coeffs.pop();
        }
    }

    pub fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64
    }

    /// Coefficient at index `k` (exponent k/e).
    pub fn coeff(&self, k: i64) -> Result<Scalar> {
        if k >= self.prec {
            return Err(Error::Depth(format!(
                "coefficient {k}/{} requested, series known below {}/{}",
                self.e, self.prec, self.e
            )));
        }
        Ok(self.coeff_or_zero(k))
    }

    /// Coefficient at index `k`, zero outside the stored range. Caller is
    /// responsible for `k < prec`.
    pub fn coeff_or_zero(&self, k: i64) -> Scalar {
        if k < self.start || k >= self.end() {
            Scalar::zero()
        } else {
            self.coeffs[(k - self.start) as usize].clone()
        }
    }

    /// Index of the first structurally nonzero coefficient (or `prec`).
    pub fn order(&self) -> i64 {
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                return self.start + i as i64;
            }
        }
        self.prec
    }

    pub fn leading(&self) -> Option<Scalar> {
        let v = self.order();
        if v >= self.prec || v >= self.end() {
            None
        } else {
            Some(self.coeff_or_zero(v))
        }
    }

    /// Drop coefficients at indices below `k` that are known to vanish
    /// mathematically but carry rounding noise.
    pub fn drop_below(&self, k: i64) -> Series {
        let mut s = self.clone();
        if k > s.start {
            let n = ((k - s.start) as usize).min(s.coeffs.len());
            s.coeffs.drain(0..n);
            s.start = k;
        }
        s
    }

    pub fn truncate(&self, prec: i64) -> Series {
        let mut s = self.clone();
        s.prec = s.prec.min(prec);
        s.clip();
        s
    }

    /// Re-index to ramification `e2` (a multiple of `e`).
    pub fn with_e(&self, e2: u32) -> Result<Series> {
        if e2 == self.e {
            return Ok(self.clone());
        }
        if !e2.is_multiple_of(self.e) {
            return Err(Error::Internal(format!("cannot refine e={} to e={e2}", self.e)));
        }
        let f = (e2 / self.e) as i64;
        let mut coeffs = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                for _ in 1..f {
                    coeffs.push(Scalar::zero());
                }
            }
            coeffs.push(c.clone());
        }
        let prec = if self.prec >= EXACT { EXACT } else { self.prec * f };
        Ok(Series::new(self.var, e2, self.start * f, coeffs, prec))
    }

    fn align(a: &Series, b: &Series) -> Result<(Series, Series)> {
        if a.var != b.var {
            return Err(Error::Internal(format!("variable mismatch {} vs {}", a.var, b.var)));
        }
        let e = a.e.max(b.e);
        Ok((a.with_e(e)?, b.with_e(e)?))
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        let (a, b) = Series::align(self, other)?;
        let prec = a.prec.min(b.prec);
        let lo = a.start.min(b.start);
        let hi = a.end().max(b.end()).min(prec);
        let coeffs = (lo..hi.max(lo)).map(|k| &a.coeff_or_zero(k) + &b.coeff_or_zero(k)).collect();
        Ok(Series::new(a.var, a.e, lo, coeffs, prec))
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        self.scale(&Scalar::int(-1))
    }

    pub fn scale(&self, c: &Scalar) -> Series {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Series::new(self.var, self.e, self.start, coeffs, self.prec)
    }

    /// Multiply by x^(k/e).
    pub fn shift(&self, k: i64) -> Series {
        let prec = if self.prec >= EXACT { EXACT } else { self.prec + k };
        Series::new(self.var, self.e, self.start + k, self.coeffs.clone(), prec)
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        let (a, b) = Series::align(self, other)?;
        let va = a.order();
        let vb = b.order();
        let prec = sat_add(a.prec, vb).min(sat_add(b.prec, va));
        let start = a.start + b.start;
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            return Ok(Series::new(a.var, a.e, start, vec![], prec));
        }
        let len = (a.coeffs.len() + b.coeffs.len() - 1) as i64;
        let len = if prec >= EXACT { len } else { len.min(prec - start).max(0) };
        let mut out = vec![Scalar::zero(); len as usize];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                let k = i + j;
                if k as i64 >= len {
                    break;
                }
                out[k] = &out[k] + &(x * y);
            }
        }
        Ok(Series::new(a.var, a.e, start, out, prec))
    }

    /// Multiplicative inverse; the leading coefficient must be nonzero.
    pub fn inv(&self) -> Result<Series> {
        let v = self.order();
        if v >= self.prec || v >= self.end() {
            return Err(Error::NonInvertible(format!("series in {} has no nonzero leading term", self.var)));
        }
        let lead = self.coeff_or_zero(v);
        let li = lead.inv()?;
        // Relative precision of the normalised series.
        let rel = if self.prec >= EXACT { None } else { Some(self.prec - v) };
        let n = match rel {
            Some(r) => r,
            None => {
                // Exact input: only a monomial has an exact inverse.
                if self.end() - v == 1 {
                    return Ok(Series::new(self.var, self.e, -v, vec![li], EXACT));
                }
                return Err(Error::Depth(format!(
                    "inverse of exact non-monomial series in {} needs a truncation order",
                    self.var
                )));
            }
        };
        let a: Vec<Scalar> = (0..n).map(|k| self.coeff_or_zero(v + k)).collect();
        let mut b: Vec<Scalar> = Vec::with_capacity(n as usize);
        for k in 0..n as usize {
            if k == 0 {
                b.push(li.clone());
                continue;
            }
            let mut acc = Scalar::zero();
            for j in 1..=k {
                if !a[j].is_zero() {
                    acc = &acc + &(&a[j] * &b[k - j]);
                }
            }
            b.push(-(&acc * &li));
        }
        Ok(Series::new(self.var, self.e, -v, b, -v + n))
    }

    pub fn div(&self, other: &Series) -> Result<Series> {
        self.mul(&other.inv().map_err(|e| match e {
            Error::NonInvertible(m) => Error::NonInvertible(m),
            other => other,
        })?)
    }

    /// Inverse with an explicit truncation order for exact polynomial input.
    pub fn inv_to(&self, prec: i64) -> Result<Series> {
        self.truncate(prec).inv()
    }

    /// f(g) with f a power series and g of positive order.
    pub fn compose(&self, g: &Series) -> Result<Series> {
        if self.e != 1 || self.start < 0 {
            return Err(Error::CompositionUndefined("outer series must be a power series".into()));
        }
        let vg = g.order();
        if vg <= 0 || vg >= g.prec {
            return Err(Error::CompositionUndefined(format!(
                "inner series must have positive order (order {vg}/{})",
                g.e
            )));
        }
        let prec = if self.prec >= EXACT { g.prec } else { (vg.saturating_mul(self.prec)).min(g.prec) };
        let g = g.truncate(prec);
        let top = if self.prec >= EXACT { self.end() } else { self.prec.min(self.end()) };
        // Horner from the top coefficient.
        let mut acc = Series::new(g.var, g.e, 0, vec![], prec);
        for k in (0..top).rev() {
            acc = acc.mul(&g)?.truncate(prec);
            let c = Series::new(g.var, g.e, 0, vec![self.coeff_or_zero(k)], prec);
            acc = acc.add(&c)?;
        }
        Ok(acc.truncate(prec))
    }

    /// f(g) for a Laurent series f (finite principal part) and g of order 1.
    pub fn compose_laurent(&self, g: &Series) -> Result<Series> {
        let v = self.start.min(0);
        if v == 0 {
            return self.compose(g);
        }
        if g.order() != 1 {
            return Err(Error::CompositionUndefined("Laurent composition needs an order-1 inner series".into()));
        }
        let h = self.shift(-v);
        let gi = g.inv()?;
        let mut out = h.compose(g)?;
        for _ in 0..(-v) {
            out = out.mul(&gi)?;
        }
        Ok(out)
    }

    /// f^alpha for rational alpha, f with nonzero constant term equal to 1
    /// after normalisation; the leading factor uses `Scalar::pow_rat`.
    pub fn pow_rat(&self, p: i64, q: i64) -> Result<Series> {
        let v = self.order();
        if v >= self.prec || v >= self.end() {
            return Err(Error::NonInvertible("power of a series with no leading term".into()));
        }
        if (v * p) % q != 0 {
            return Err(Error::RamifiedSqrt(format!("order {v} times {p}/{q} is not integral")));
        }
        let lead = self.coeff_or_zero(v);
        let rel = if self.prec >= EXACT {
            return Err(Error::Depth("rational power of an exact series needs a truncation order".into()));
        } else {
            self.prec - v
        };
        let li = lead.inv()?;
        let f: Vec<Scalar> = (0..rel).map(|k| &self.coeff_or_zero(v + k) * &li).collect();
        let alpha = Scalar::rat(p, q);
        let mut y = vec![Scalar::one()];
        for n in 1..rel as usize {
            let mut acc = Scalar::zero();
            for k in 1..=n {
                if f[k].is_zero() {
                    continue;
                }
                let w = &(&(&alpha + &Scalar::one()) * &Scalar::int(k as i64)) - &Scalar::int(n as i64);
                acc = &acc + &(&(&w * &f[k]) * &y[n - k]);
            }
            y.push(&acc / &Scalar::int(n as i64));
        }
        let c = lead.pow_rat(p, q)?;
        let y: Vec<Scalar> = y.iter().map(|t| t * &c).collect();
        let start = v * p / q;
        Ok(Series::new(self.var, self.e, start, y, start + rel))
    }

    /// Compositional inverse of an order-1 power series.
    pub fn reversion(&self) -> Result<Series> {
        if self.e != 1 || self.order() != 1 {
            return Err(Error::NotReversible(format!("order {} series in {}", self.order(), self.var)));
        }
        for k in self.start..1 {
            if !self.coeff_or_zero(k).is_zero() {
                return Err(Error::NotReversible("nonzero terms below order 1".into()));
            }
        }
        let n = if self.prec >= EXACT {
            return Err(Error::Depth("reversion of an exact polynomial needs a truncation order".into()));
        } else {
            self.prec
        };
        let a1 = self.coeff_or_zero(1);
        let x = Series::var(self.var).truncate(n);
        let fp = self.derivative()?;
        let mut g = Series::new(self.var, 1, 1, vec![a1.inv()?], n.min(2));
        let mut known = 2;
        while known < n {
            known = (2 * known).min(n);
            let g2 = g.truncate(known);
            let g2 = Series::new(g2.var, 1, g2.start, g2.coeffs.clone(), known);
            let resid = self.truncate(known).compose(&g2)?.sub(&x)?;
            let d = fp.truncate(known).compose(&g2)?;
            g = g2.sub(&resid.div(&d)?)?.truncate(known);
        }
        Ok(g.truncate(n))
    }

    /// Square root with the principal branch rule on the leading coefficient.
    /// Odd order requires the caller to have refined to `e = 2`.
    pub fn sqrt(&self) -> Result<Series> {
        let v = self.order();
        if v >= self.prec || v >= self.end() {
            return Err(Error::NonInvertible("square root of a series with no leading term".into()));
        }
        if v % 2 != 0 {
            if self.e == 1 {
                return Err(Error::RamifiedSqrt(format!(
                    "order {v} in {}: request e = 2 via with_e(2)",
                    self.var
                )));
            }
            return Err(Error::RamifiedSqrt("would need e = 4".into()));
        }
        let rel = if self.prec >= EXACT {
            if self.end() - v == 1 {
                let r = self.coeff_or_zero(v).sqrt()?;
                return Ok(Series::new(self.var, self.e, v / 2, vec![r], EXACT));
            }
            return Err(Error::Depth("sqrt of exact non-monomial needs a truncation order".into()));
        } else {
            self.prec - v
        };
        let a: Vec<Scalar> = (0..rel).map(|k| self.coeff_or_zero(v + k)).collect();
        let s0 = a[0].sqrt()?;
        let two_s0_inv = (&Scalar::int(2) * &s0).inv()?;
        let mut s = vec![s0];
        for n in 1..rel as usize {
            let mut acc = a[n].clone();
            for k in 1..n {
                acc = &acc - &(&s[k] * &s[n - k]);
            }
            s.push(&acc * &two_s0_inv);
        }
        Ok(Series::new(self.var, self.e, v / 2, s, v / 2 + rel))
    }

    /// Coefficient of x^{-1}.
    pub fn residue(&self) -> Result<Scalar> {
        let k = -(self.e as i64);
        if self.prec <= k {
            return Err(Error::Depth(format!("truncation order {}/{} <= -1", self.prec, self.e)));
        }
        Ok(self.coeff_or_zero(k))
    }

    pub fn derivative(&self) -> Result<Series> {
        let e = self.e as i64;
        let coeffs: Vec<Scalar> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.start + i as i64;
                &(c * &Scalar::int(k)) / &Scalar::int(e)
            })
            .collect();
        let prec = if self.prec >= EXACT { EXACT } else { self.prec - e };
        Ok(Series::new(self.var, self.e, self.start - e, coeffs, prec))
    }

    /// Antiderivative with zero constant term.
    pub fn integrate(&self) -> Result<Series> {
        let e = self.e as i64;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.start + i as i64;
            if k == -e {
                if !c.is_zero() {
                    return Err(Error::Logarithmic(format!("x^-1 term in {}", self.var)));
                }
                coeffs.push(Scalar::zero());
                continue;
            }
            coeffs.push(&(c * &Scalar::int(e)) / &Scalar::int(k + e));
        }
        let prec = if self.prec >= EXACT { EXACT } else { self.prec + e };
        Ok(Series::new(self.var, self.e, self.start + e, coeffs, prec))
    }

    /// x -> -x for an integer-exponent series.
    pub fn reflect(&self) -> Series {
        assert_eq!(self.e, 1, "reflection of a ramified series is branch dependent");
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if (self.start + i as i64) % 2 != 0 { -c } else { c.clone() })
            .collect();
        Series::new(self.var, 1, self.start, coeffs, self.prec)
    }

    /// Keep only indices of the given parity.
    pub fn parity_part(&self, odd: bool) -> Series {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.start + i as i64;
                if (k.rem_euclid(2) == 1) == odd {
                    c.clone()
                } else {
                    Scalar::zero()
                }
            })
            .collect();
        Series::new(self.var, self.e, self.start, coeffs, self.prec)
    }

    pub fn rename(&self, var: &'static str) -> Series {
        let mut s = self.clone();
        s.var = var;
        s
    }

    pub fn lift(&self, be: &Backend) -> Series {
        let coeffs = self.coeffs.iter().map(|c| be.lift(c)).collect();
        Series::new(self.var, self.e, self.start, coeffs, self.prec)
    }

    /// Largest coefficient magnitude of `self - other` over indices below
    /// `upto` (both must be known there).
    pub fn max_diff(&self, other: &Series, upto: i64) -> Result<f64> {
        let d = self.sub(other)?;
        if d.prec < upto {
            return Err(Error::Depth(format!("comparison window {upto} exceeds known order {}", d.prec)));
        }
        Ok((d.start.min(0)..upto).map(|k| d.coeff_or_zero(k).abs_f64()).fold(0.0, f64::max))
    }

    /// Formal Laplace transform of a vanishing-cycle expansion in
    /// x = (lambda - u), e = 2, support on exponents k - 1/2.
    ///
    /// Coefficients are read in the period-normalised basis
    /// sqrt(2 pi) x^{k-1/2} / Gamma(k+1/2), which maps to (-z)^k for
    /// `LaplaceSign::Minus` and to z^k for `LaplaceSign::Plus`.
    pub fn watson_laplace(&self, sign: LaplaceSign) -> Result<Series> {
        if self.e != 2 {
            return Err(Error::NotVanishingCycle("input must be a (lambda-u)^{1/2} series".into()));
        }
        let mut out = Vec::new();
        let mut lo = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            let idx = self.start + i as i64;
            if idx.rem_euclid(2) == 0 {
                if !c.is_zero() {
                    return Err(Error::NotVanishingCycle(format!("integer exponent {}", idx / 2)));
                }
                continue;
            }
            let k = (idx + 1) / 2;
            if k < 0 && !c.is_zero() {
                return Err(Error::NotVanishingCycle(format!("exponent {k}-1/2 below -1/2")));
            }
            if k < 0 {
                continue;
            }
            lo.get_or_insert(k);
            let sgn = match sign {
                LaplaceSign::Minus if k % 2 == 1 => -c,
                _ => c.clone(),
            };
            let base = lo.unwrap();
            while out.len() < (k - base) as usize {
                out.push(Scalar::zero());
            }
            out.push(sgn);
        }
        let prec = if self.prec >= EXACT { EXACT } else { (self.prec + 1).div_euclid(2) };
        Ok(Series::new("z", 1, lo.unwrap_or(0), out, prec))
    }

    /// Same transform for coefficients in the raw basis x^{k-1/2}; needs
    /// sqrt(2 pi)/Gamma(k+1/2) = sqrt 2 * 2^k / (2k-1)!!, so bigfloat only.
    pub fn watson_laplace_raw(&self, sign: LaplaceSign, be: &Backend) -> Result<Series> {
        let r2 = be.sqrt2()?;
        let mut norm = self.clone();
        for (i, c) in norm.coeffs.iter_mut().enumerate() {
            let idx = self.start + i as i64;
            if idx.rem_euclid(2) == 1 {
                let k = (idx + 1) / 2;
                // x^{k-1/2} = [Gamma(k+1/2)/sqrt(2 pi)] * normalised basis element
                let w = &double_factorial_odd(k) / &(&r2 * &Scalar::int(2).powi(k)?);
                *c = &*c * &w;
            }
        }
        norm.watson_laplace(sign)
    }
}

/// Which sign of z the Laplace transform produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplaceSign {
    Minus,
    Plus,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.start + i as i64;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if self.e == 1 {
                write!(f, "({c}){}^{k}", self.var)?;
            } else {
                write!(f, "({c}){}^({k}/{})", self.var, self.e)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.prec < EXACT {
            write!(f, " + O({}^({}/{}))", self.var, self.prec, self.e)?;
        }
        Ok(())
    }
}
