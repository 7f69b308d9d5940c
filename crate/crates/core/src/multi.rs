//! Sparse truncated Laurent polynomials in several variables.
//!
//! Each variable carries its own truncation order: terms whose exponent in
//! variable `a` is `>= prec[a]` are unknown. Products propagate the bound
//! variable by variable, the same rule as for one-variable series.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Series, EXACT};

#[derive(Clone, Debug)]
pub struct Multi {
    pub terms: BTreeMap<Vec<i64>, Scalar>,
    pub prec: Vec<i64>,
}

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        (a + b).min(EXACT)
    }
}

impl Multi {
    pub fn zero(nvars: usize) -> Multi {
        Multi { terms: BTreeMap::new(), prec: vec![EXACT; nvars] }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Multi {
        let mut m = Multi::zero(nvars);
        m.add_term(vec![0; nvars], c);
        m
    }

    pub fn nvars(&self) -> usize {
        self.prec.len()
    }

    pub fn monomial(exps: Vec<i64>, c: Scalar) -> Multi {
        let mut m = Multi::zero(exps.len());
        m.add_term(exps, c);
        m
    }

    /// A one-variable series placed in variable `a` of an `nvars` space.
    pub fn from_series(s: &Series, a: usize, nvars: usize) -> Multi {
        assert_eq!(s.e, 1, "multivariate data uses integer exponents");
        let mut m = Multi::zero(nvars);
        m.prec[a] = s.prec;
        for k in s.start..s.end() {
            let c = s.coeff_or_zero(k);
            if !c.is_zero() {
                let mut e = vec![0; nvars];
                e[a] = k;
                m.add_term(e, c);
            }
        }
        m
    }

    pub fn add_term(&mut self, exps: Vec<i64>, c: Scalar) {
        if c.is_zero() && c.is_exact() {
            return;
        }
        if exps.iter().zip(&self.prec).any(|(e, p)| e >= p) {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(x) => *x = &*x + &c,
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent of variable `a` among stored terms, `prec[a]` if none.
    pub fn min_exp(&self, a: usize) -> i64 {
        self.terms.keys().map(|e| e[a]).min().unwrap_or(self.prec[a])
    }

    pub fn max_exp(&self, a: usize) -> Option<i64> {
        self.terms.keys().map(|e| e[a]).max()
    }

    fn retruncate(&mut self) {
        let prec = self.prec.clone();
        self.terms.retain(|e, _| e.iter().zip(&prec).all(|(x, p)| x < p));
    }

    /// Lower the truncation order of variable `a` to at most `p`.
    pub fn truncate(&self, a: usize, p: i64) -> Multi {
        let mut m = self.clone();
        m.prec[a] = m.prec[a].min(p);
        m.retruncate();
        m
    }

    pub fn add(&self, o: &Multi) -> Result<Multi> {
        if self.nvars() != o.nvars() {
            return Err(Error::Dimension(format!("adding {} and {} variables", self.nvars(), o.nvars())));
        }
        let mut m = self.clone();
        for (a, p) in o.prec.iter().enumerate() {
            m.prec[a] = m.prec[a].min(*p);
        }
        m.retruncate();
        for (e, c) in &o.terms {
            m.add_term(e.clone(), c.clone());
        }
        Ok(m)
    }

    pub fn add_assign(&mut self, o: &Multi) -> Result<()> {
        *self = self.add(o)?;
        Ok(())
    }

    pub fn scale(&self, c: &Scalar) -> Multi {
        let mut m = Multi { terms: BTreeMap::new(), prec: self.prec.clone() };
        for (e, x) in &self.terms {
            m.add_term(e.clone(), x * c);
        }
        m
    }

    pub fn neg(&self) -> Multi {
        self.scale(&Scalar::int(-1))
    }

    pub fn mul(&self, o: &Multi) -> Result<Multi> {
        let n = self.nvars();
        if n != o.nvars() {
            return Err(Error::Dimension(format!("multiplying {} and {} variables", n, o.nvars())));
        }
        let prec: Vec<i64> = (0..n)
            .map(|a| sat_add(self.prec[a], o.min_exp(a)).min(sat_add(o.prec[a], self.min_exp(a))))
            .collect();
        let mut m = Multi { terms: BTreeMap::new(), prec };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                m.add_term(e, c1 * c2);
            }
        }
        Ok(m)
    }

    /// Rename variables: variable `a` of self becomes variable `map[a]` of an
    /// `nvars` space. Unmapped target variables are exact and constant.
    pub fn embed(&self, map: &[usize], nvars: usize) -> Multi {
        let mut m = Multi::zero(nvars);
        for (a, &b) in map.iter().enumerate() {
            m.prec[b] = self.prec[a];
        }
        for (e, c) in &self.terms {
            let mut f = vec![0; nvars];
            for (a, &b) in map.iter().enumerate() {
                f[b] = e[a];
            }
            m.add_term(f, c.clone());
        }
        m
    }

    /// x_a -> -x_a.
    pub fn reflect(&self, a: usize) -> Multi {
        let mut m = Multi { terms: BTreeMap::new(), prec: self.prec.clone() };
        for (e, c) in &self.terms {
            let c = if e[a].rem_euclid(2) == 1 { -c } else { c.clone() };
            m.add_term(e.clone(), c);
        }
        m
    }

    /// Set x_b = x_a and drop variable b.
    pub fn merge(&self, a: usize, b: usize) -> Result<Multi> {
        if a == b || a >= self.nvars() || b >= self.nvars() {
            return Err(Error::Index(format!("cannot merge variables {a} and {b}")));
        }
        let pa = sat_add(self.prec[a], self.min_exp(b)).min(sat_add(self.prec[b], self.min_exp(a)));
        let mut prec = self.prec.clone();
        prec[a] = pa;
        prec.remove(b);
        let mut m = Multi { terms: BTreeMap::new(), prec };
        for (e, c) in &self.terms {
            let mut f = e.clone();
            f[a] += e[b];
            f.remove(b);
            m.add_term(f, c.clone());
        }
        Ok(m)
    }

    /// Coefficient of x_a^k as a polynomial in the remaining variables.
    pub fn coeff(&self, a: usize, k: i64) -> Result<Multi> {
        if k >= self.prec[a] {
            return Err(Error::Depth(format!(
                "coefficient x_{a}^{k} requested, variable known below {}",
                self.prec[a]
            )));
        }
        let mut prec = self.prec.clone();
        prec.remove(a);
        let mut m = Multi { terms: BTreeMap::new(), prec };
        for (e, c) in &self.terms {
            if e[a] == k {
                let mut f = e.clone();
                f.remove(a);
                m.add_term(f, c.clone());
            }
        }
        Ok(m)
    }

    pub fn get(&self, exps: &[i64]) -> Scalar {
        self.terms.get(exps).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Largest |self - other| over the exponent window lo[a] <= e[a] < hi[a].
    /// Both operands must be known throughout the window.
    pub fn max_diff_window(&self, other: &Multi, lo: &[i64], hi: &[i64]) -> Result<f64> {
        for a in 0..self.nvars() {
            if hi[a] > self.prec[a] || hi[a] > other.prec[a] {
                return Err(Error::Depth(format!(
                    "comparison window in variable {a} reaches {}, known below {} and {}",
                    hi[a], self.prec[a], other.prec[a]
                )));
            }
        }
        let inside = |e: &Vec<i64>| e.iter().enumerate().all(|(a, x)| *x >= lo[a] && *x < hi[a]);
        let mut worst: f64 = 0.0;
        for (e, c) in &self.terms {
            if inside(e) {
                worst = worst.max((c - &other.get(e)).abs_f64());
            }
        }
        for (e, c) in &other.terms {
            if inside(e) && !self.terms.contains_key(e) {
                worst = worst.max(c.abs_f64());
            }
        }
        Ok(worst)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Scalar::abs_f64).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_merge_and_coefficients() {
        // (x^-1 + y)(1 + x y) known below x^3, y^2
        let mut a = Multi::zero(2);
        a.add_term(vec![-1, 0], Scalar::one());
        a.add_term(vec![0, 1], Scalar::one());
        a.prec = vec![3, 2];
        let mut b = Multi::zero(2);
        b.add_term(vec![0, 0], Scalar::one());
        b.add_term(vec![1, 1], Scalar::one());
        let p = a.mul(&b).unwrap();
        assert_eq!(p.prec, vec![3, 2]);
        assert_eq!(p.get(&[0, 1]), Scalar::int(2));
        assert_eq!(p.get(&[-1, 0]), Scalar::one());
        // y -> x: the unknown y^2 tail times x^-1 leaves only x^-1 known.
        let m = p.merge(0, 1).unwrap();
        assert_eq!(m.prec, vec![1]);
        assert_eq!(m.get(&[-1]), Scalar::one());
        assert!(m.get(&[1]).is_zero());
        assert_eq!(p.coeff(1, 1).unwrap().get(&[0]), Scalar::int(2));
        assert!(p.coeff(1, 2).is_err());
        let r = p.reflect(0);
        assert_eq!(r.get(&[-1, 0]), Scalar::int(-1));
    }
}
