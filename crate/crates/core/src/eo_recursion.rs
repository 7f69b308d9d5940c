//! Global Eynard-Orantin recursion on a genus-0 branched cover, plus the
//! generalized recursion whose two-point form carries a V-correction.
//!
//! Correlators are finite sums of products of atoms, one atom per slot:
//! `Pole { j, k }` is dq/(q - p_j)^k and `Class { a, m }` is the chart-local
//! form d_x^{-m} omega_a (zero-constant gauge in every Morse chart). The
//! residue at p_i is computed in the Morse coordinate s, q = p_i + tau(s).

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::givental_r::{compose_r, r_sigma_stationary_phase, v_matrices_omega, RData};
use crate::matrix::{Mat, MatrixSeries};
use crate::multi::Multi;
use crate::scalar::Scalar;
use crate::series::{Series, EXACT};
use crate::spectral_curve::{c_vector, good_basis_local, vanishing_cycle_integral_s, BranchedCover, RationalFn};
use crate::local_recursion::{p_data_from_r, period_coeff, FrobEoComparison, LocalForm, LocalRecursion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// dq / (q - p_j)^k, k >= 2.
    Pole { j: usize, k: u32 },
    /// d_x^{-m} omega_a.
    Class { a: usize, m: u32 },
}

/// omega_{g,n} as coefficient times one atom per slot.
#[derive(Clone, Debug)]
pub struct CorrelatorForm {
    pub g: usize,
    pub n: usize,
    pub terms: BTreeMap<Vec<Atom>, Scalar>,
}

impl CorrelatorForm {
    pub fn coeff(&self, atoms: &[Atom]) -> Scalar {
        self.terms.get(atoms).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    /// Largest |c(sigma key) - c(key)| over all slot permutations.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (key, c) in &self.terms {
            for a in 0..self.n {
                for b in a + 1..self.n {
                    let mut k2 = key.clone();
                    k2.swap(a, b);
                    worst = worst.max((c - &self.coeff(&k2)).abs_f64());
                }
            }
        }
        worst
    }

    /// The rational n-form it represents, for forms built from pole atoms:
    /// coefficient of dq_1 ... dq_n evaluated at the given points.
    pub fn eval(&self, cover: &BranchedCover, q: &[Scalar]) -> Result<Scalar> {
        let pts = cover.points();
        let mut acc = Scalar::zero();
        for (key, c) in &self.terms {
            let mut t = c.clone();
            for (atom, x) in key.iter().zip(q) {
                match atom {
                    Atom::Pole { j, k } => t = &t * &(x - &pts[*j]).powi(-(*k as i64))?,
                    Atom::Class { .. } => {
                        return Err(Error::Config("class atoms are chart-local; use cycle_pullback".into()))
                    }
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }
}

/// d_x^{-1} in a Morse chart: s^m ds -> s^{m+2}/(m+1) ds.
pub fn dx_inverse(f: &Series) -> Result<Series> {
    let mut coeffs = Vec::new();
    for k in f.start..f.end() {
        let c = f.coeff_or_zero(k);
        if k == -1 && !c.is_zero() {
            return Err(Error::Logarithmic("d_x^{-1} of s^-1 ds".into()));
        }
        coeffs.push(if c.is_zero() { c } else { &c / &Scalar::int(k + 1) });
    }
    let prec = if f.prec >= EXACT { EXACT } else { f.prec + 2 };
    Ok(Series::new("s", 1, f.start + 2, coeffs, prec))
}

/// V^{ab}_{mn} with explicit finite support.
#[derive(Clone, Debug)]
pub struct VData {
    pub entries: Vec<(usize, usize, u32, u32, Scalar)>,
}

impl VData {
    pub fn zero() -> VData {
        VData { entries: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// V from (R(z1) R(z2)^T - 1)/(z1 + z2) for a polynomial R_omega of degree
/// `degree`; the support m + n <= 2 degree - 1 is checked, not assumed.
pub fn v_from_r_omega(r: &MatrixSeries, degree: usize, tol: f64) -> Result<VData> {
    let order = 2 * degree + 2;
    let mut padded = r.coeffs.clone();
    let n = r.dim();
    for (k, m) in padded.iter().enumerate() {
        if k > degree && m.max_abs() > tol {
            return Err(Error::NonPolynomial(format!("R_omega has a nonzero z^{k} coefficient")));
        }
    }
    while padded.len() < order + 1 {
        padded.push(Mat::zeros(n, n));
    }
    let v = v_matrices_omega(&MatrixSeries::new(padded), order)?;
    if v.symmetry_defect() > tol {
        return Err(Error::Internal(format!("V is not symmetric: {:e}", v.symmetry_defect())));
    }
    let mut entries = Vec::new();
    for m in 0..order {
        for l in 0..order - m {
            let mat = v.get(m, l)?;
            for a in 0..n {
                for b in 0..n {
                    let c = mat.get(a, b);
                    if m + l + 1 > 2 * degree {
                        if c.abs_f64() > tol {
                            return Err(Error::Internal(format!("V_{{{m},{l}}} outside the expected support")));
                        }
                    } else if !(c.is_zero() || (!c.is_exact() && c.abs_f64() <= tol)) {
                        entries.push((a, b, m as u32, l as u32, c.clone()));
                    }
                }
            }
        }
    }
    Ok(VData { entries })
}

/// Every kernel piece has order >= -1, so brackets are needed below s^1.
const BRACKET_KEEP: i64 = 1;

/// A "pre-bracket": remaining-slot atoms -> coefficient series in s.
type Partial = BTreeMap<Vec<(usize, Atom)>, Series>;

fn partial_add(out: &mut Partial, key: Vec<(usize, Atom)>, s: Series) -> Result<()> {
    match out.get_mut(&key) {
        Some(x) => *x = x.add(&s)?,
        None => {
            out.insert(key, s);
        }
    }
    Ok(())
}

fn min_order(p: &Partial) -> i64 {
    p.values().map(Series::order).min().unwrap_or(0)
}

/// Product of two partials, keeping only indices below `keep`.
fn partial_mul(a: &Partial, b: &Partial, keep: i64) -> Result<Partial> {
    let (oa, ob) = (min_order(a), min_order(b));
    let mut out = Partial::new();
    for (ka, sa) in a {
        let sa = sa.truncate(keep - ob);
        for (kb, sb) in b {
            let mut key = ka.clone();
            key.extend(kb.iter().cloned());
            key.sort();
            partial_add(&mut out, key, sa.mul(&sb.truncate(keep - oa))?.truncate(keep))?;
        }
    }
    Ok(out)
}

/// [s^-1] of a b, reading only the coefficients that contribute.
fn residue_of_product(a: &Series, b: &Series) -> Result<Scalar> {
    let (va, vb) = (a.order(), b.order());
    if a.prec <= -1 - vb || b.prec <= -1 - va {
        return Err(Error::Depth(format!(
            "residue of a product needs orders {} and {}, known below {} and {}",
            -1 - vb,
            -1 - va,
            a.prec,
            b.prec
        )));
    }
    let mut acc = Scalar::zero();
    for k in va..a.end() {
        let j = -1 - k;
        if j < vb {
            break;
        }
        let x = a.coeff_or_zero(k);
        let y = b.coeff_or_zero(j);
        if !x.is_zero() && !y.is_zero() {
            acc = &acc + &(&x * &y);
        }
    }
    Ok(acc)
}

/// Recursion engine for one cover, one 1-form (given by its chart
/// expansions) and one V. Results are cached per (g, n).
pub struct EoEngine {
    pub cover: BranchedCover,
    pub phi_local: Vec<Series>,
    pub v: VData,
    work: i64,
    cache: HashMap<(usize, usize), CorrelatorForm>,
    expansions: RefCell<HashMap<(Atom, usize), Series>>,
    denominators: Vec<Series>,
}

impl EoEngine {
    /// Plain recursion for (cover, phi).
    pub fn new(cover: &BranchedCover, phi: &RationalFn) -> Result<EoEngine> {
        let work = Self::default_work(cover);
        let phi_local = (0..cover.n()).map(|i| cover.chart_expansion(phi, i, work)).collect::<Result<Vec<_>>>()?;
        Self::generalized(cover, phi_local, VData::zero())
    }

    fn default_work(cover: &BranchedCover) -> i64 {
        cover.charts.iter().map(|c| c.order()).min().unwrap_or(24).min(40)
    }

    /// Generalized recursion: phi-tilde given by chart expansions, V-corrected
    /// two-point form.
    pub fn generalized(cover: &BranchedCover, phi_local: Vec<Series>, v: VData) -> Result<EoEngine> {
        if phi_local.len() != cover.n() {
            return Err(Error::Dimension(format!("{} expansions for {} charts", phi_local.len(), cover.n())));
        }
        let work = Self::default_work(cover);
        let mut denominators = Vec::new();
        for (i, f) in phi_local.iter().enumerate() {
            if f.order() < 0 {
                return Err(Error::NotHolomorphic(format!("1-form has a pole at ramification point {}", i + 1)));
            }
            // s * int_s^{-s} phi
            let d = vanishing_cycle_integral_s(f)?.neg().shift(1);
            if d.leading().is_none() {
                return Err(Error::DegenerateKernel(format!("1-form vanishes at ramification point {}", i + 1)));
            }
            denominators.push(d.inv_to(work)?);
        }
        Ok(EoEngine {
            cover: cover.clone(),
            phi_local,
            v,
            work,
            cache: HashMap::new(),
            expansions: RefCell::new(HashMap::new()),
            denominators,
        })
    }

    fn tau(&self, i: usize) -> Series {
        self.cover.charts[i].tau.truncate(self.work + 2)
    }

    /// Chart expansion of an atom at chart i (coefficient of ds).
    pub fn expansion(&self, atom: Atom, i: usize) -> Result<Series> {
        if let Some(s) = self.expansions.borrow().get(&(atom, i)) {
            return Ok(s.clone());
        }
        let s = match atom {
            Atom::Pole { j, k } => {
                let tau = self.tau(i);
                let dtau = tau.derivative()?;
                let base = if j == i {
                    tau.clone()
                } else {
                    let d = &self.cover.charts[i].p - &self.cover.charts[j].p;
                    tau.add(&Series::constant("s", d))?
                };
                let inv = if j == i { base.inv()? } else { base.inv_to(self.work)? };
                let mut p = Series::constant("s", Scalar::one());
                for _ in 0..k {
                    p = p.mul(&inv)?;
                }
                p.mul(&dtau)?.truncate(self.work)
            }
            Atom::Class { a, m } => {
                let mut f = good_basis_local(&self.cover, a, i, self.work)?;
                for _ in 0..m {
                    f = dx_inverse(&f)?;
                }
                f.truncate(self.work)
            }
        };
        self.expansions.borrow_mut().insert((atom, i), s.clone());
        Ok(s)
    }

    /// Value of a slot at the conjugate point sigma(p): -f(-s).
    fn conj(s: &Series) -> Series {
        s.reflect().neg()
    }

    /// omega_{0,2}(p, p') with p' the conjugate of p, both in chart i.
    fn w02_diagonal(&self, i: usize) -> Result<Series> {
        let tau = self.tau(i);
        let dtau = tau.derivative()?;
        let diff = tau.sub(&tau.reflect())?;
        let num = dtau.mul(&dtau.reflect())?.neg();
        let den = diff.mul(&diff)?;
        let mut out = num.div(&den)?.truncate(self.work);
        for (a, b, m, n, c) in &self.v.entries {
            let ea = self.expansion(Atom::Class { a: *a, m: *m }, i)?;
            let eb = Self::conj(&self.expansion(Atom::Class { a: *b, m: *n }, i)?);
            out = out.add(&ea.mul(&eb)?.scale(c))?;
        }
        Ok(out)
    }

    /// omega_{0,2}(p, q_slot) with p in chart i.
    fn w02_passive(&self, i: usize, slot: usize, mmax: u32, flip: bool) -> Result<Partial> {
        let tau = self.tau(i);
        let dtau = tau.derivative()?;
        let mut out = Partial::new();
        let mut tpow = Series::constant("s", Scalar::one());
        for m in 0..=mmax {
            let s = tpow.mul(&dtau)?.scale(&Scalar::int(m as i64 + 1)).truncate(self.work);
            let s = if flip { Self::conj(&s) } else { s };
            partial_add(&mut out, vec![(slot, Atom::Pole { j: i, k: m + 2 })], s)?;
            tpow = tpow.mul(&tau)?.truncate(self.work);
        }
        for (a, b, m, n, c) in &self.v.entries {
            let e = self.expansion(Atom::Class { a: *a, m: *m }, i)?.scale(c);
            let e = if flip { Self::conj(&e) } else { e };
            partial_add(&mut out, vec![(slot, Atom::Class { a: *b, m: *n })], e)?;
        }
        Ok(out)
    }

    /// A stored correlator with its first slot at p (or sigma p) in chart i,
    /// remaining slots relabelled to `slots`.
    fn first_slot(&self, form: &CorrelatorForm, i: usize, slots: &[usize], flip: bool) -> Result<Partial> {
        let mut out = Partial::new();
        for (key, c) in &form.terms {
            let e = self.expansion(key[0], i)?.scale(c);
            let e = if flip { Self::conj(&e) } else { e };
            let mut rest: Vec<(usize, Atom)> = slots.iter().cloned().zip(key[1..].iter().cloned()).collect();
            rest.sort();
            partial_add(&mut out, rest, e)?;
        }
        Ok(out)
    }

    /// First two slots at p and sigma p.
    fn first_two(&self, form: &CorrelatorForm, i: usize, slots: &[usize]) -> Result<Partial> {
        let mut out = Partial::new();
        for (key, c) in &form.terms {
            let e0 = self.expansion(key[0], i)?;
            let e1 = Self::conj(&self.expansion(key[1], i)?);
            let e0t = e0.truncate(BRACKET_KEEP - e1.order());
            let e1t = e1.truncate(BRACKET_KEEP - e0.order());
            let e = e0t.mul(&e1t)?.truncate(BRACKET_KEEP).scale(c);
            let mut rest: Vec<(usize, Atom)> = slots.iter().cloned().zip(key[2..].iter().cloned()).collect();
            rest.sort();
            partial_add(&mut out, rest, e)?;
        }
        Ok(out)
    }

    /// Pole-order bound of omega_{g,n} in q at a ramification point.
    fn pole_bound(g: usize, n: usize) -> u32 {
        (6 * g + 2 * n).saturating_sub(4) as u32
    }

    pub fn correlator(&mut self, g: usize, n: usize) -> Result<&CorrelatorForm> {
        if 2 * g + n < 3 || n == 0 {
            return Err(Error::Index(format!("omega_{{{g},{n}}} is not produced by the recursion")));
        }
        if !self.cache.contains_key(&(g, n)) {
            if g >= 1 && (g - 1, n + 1) != (0, 2) {
                self.correlator(g - 1, n + 1)?;
            }
            for g1 in 0..=g {
                for m in 1..n {
                    if 2 * g1 + m >= 3 && (g1, m) != (g, n) {
                        self.correlator(g1, m)?;
                    }
                }
            }
            let f = self.step(g, n)?;
            self.cache.insert((g, n), f);
        }
        Ok(&self.cache[&(g, n)])
    }

    fn bracket(&self, g: usize, n: usize, i: usize) -> Result<Partial> {
        // Output slots 1..n-1 of omega_{g,n}.
        let rest: Vec<usize> = (1..n).collect();
        let mmax = Self::pole_bound(g, n) + 2;
        let mut br = Partial::new();
        if g >= 1 {
            let t = if (g - 1, n + 1) == (0, 2) {
                let mut p = Partial::new();
                p.insert(vec![], self.w02_diagonal(i)?);
                p
            } else {
                self.first_two(&self.cache[&(g - 1, n + 1)], i, &rest)?
            };
            for (k, s) in t {
                partial_add(&mut br, k, s)?;
            }
        }
        let m = rest.len();
        for g1 in 0..=g {
            for mask in 0u32..(1 << m) {
                let j: Vec<usize> = (0..m).filter(|b| mask & (1 << b) != 0).map(|b| rest[b]).collect();
                let jc: Vec<usize> = (0..m).filter(|b| mask & (1 << b) == 0).map(|b| rest[b]).collect();
                let g2 = g - g1;
                if (g1 == 0 && j.is_empty()) || (g2 == 0 && jc.is_empty()) {
                    continue;
                }
                let f1 = if g1 == 0 && j.len() == 1 {
                    self.w02_passive(i, j[0], mmax, false)?
                } else {
                    self.first_slot(&self.cache[&(g1, j.len() + 1)], i, &j, false)?
                };
                let f2 = if g2 == 0 && jc.len() == 1 {
                    self.w02_passive(i, jc[0], mmax, true)?
                } else {
                    self.first_slot(&self.cache[&(g2, jc.len() + 1)], i, &jc, true)?
                };
                for (k, s) in partial_mul(&f1, &f2, BRACKET_KEEP)? {
                    partial_add(&mut br, k, s)?;
                }
            }
        }
        Ok(br)
    }

    /// Kernel pieces at chart i: (output atom for q_0, series in s) with
    /// the 1/2 and the denominator already applied.
    fn kernel(&self, i: usize, nmax: u32) -> Result<Vec<(Atom, Series)>> {
        let tau = self.tau(i);
        let tr = tau.reflect();
        let den = &self.denominators[i];
        let half = Scalar::rat(1, 2);
        let mut out = Vec::new();
        let mut p = Series::constant("s", Scalar::one());
        let mut pr = Series::constant("s", Scalar::one());
        for n in 1..=nmax {
            p = p.mul(&tau)?.truncate(self.work + 2);
            pr = pr.mul(&tr)?.truncate(self.work + 2);
            let num = pr.sub(&p)?;
            out.push((Atom::Pole { j: i, k: n + 1 }, num.mul(den)?.scale(&half)));
        }
        let mut by_class: BTreeMap<Atom, Series> = BTreeMap::new();
        for (a, b, m, n, c) in &self.v.entries {
            let f = self.expansion(Atom::Class { a: *b, m: *n }, i)?;
            let anti = f.integrate()?;
            let num = anti.reflect().sub(&anti)?.scale(c);
            let key = Atom::Class { a: *a, m: *m };
            let s = num.mul(den)?.scale(&half);
            match by_class.get_mut(&key) {
                Some(x) => *x = x.add(&s)?,
                None => {
                    by_class.insert(key, s);
                }
            }
        }
        out.extend(by_class);
        Ok(out)
    }

    fn step(&self, g: usize, n: usize) -> Result<CorrelatorForm> {
        let mut terms: BTreeMap<Vec<Atom>, Scalar> = BTreeMap::new();
        let nmax = Self::pole_bound(g, n) + 2;
        for i in 0..self.cover.n() {
            let br = self.bracket(g, n, i)?;
            let ker = self.kernel(i, nmax)?;
            for (rest, s) in &br {
                for (a0, k) in &ker {
                    let c = residue_of_product(k, s)?;
                    if c.is_zero() && c.is_exact() {
                        continue;
                    }
                    let mut key = vec![*a0];
                    key.extend(rest.iter().map(|(_, a)| *a));
                    let e = terms.entry(key).or_insert_with(Scalar::zero);
                    *e = &*e + &c;
                }
            }
        }
        let scale = terms.values().map(Scalar::abs_f64).fold(0.0, f64::max);
        let cut = match self.cover.backend.tolerance() {
            t if t > 0.0 => t * 1e-10 * scale,
            _ => 0.0,
        };
        terms.retain(|_, c| !(c.is_zero() && c.is_exact()) && (c.is_exact() || c.abs_f64() > cut));
        Ok(CorrelatorForm { g, n, terms })
    }
}

/// Cycle pullback d_lambda int_beta in every slot: a slot expansion f(s) ds
/// at chart i becomes (f(s) + f(-s))/s d lambda. Each slot keeps its first
/// `count` odd exponents above the pole bound.
pub fn cycle_pullback(engine: &EoEngine, form: &CorrelatorForm, count: usize) -> Result<LocalForm> {
    let keep = -(6 * form.g as i64 + 2 * form.n as i64 - 3) + 2 * count as i64;
    let n = engine.cover.n();
    let mut charts = BTreeMap::new();
    let mut memo: HashMap<(Atom, usize), Multi> = HashMap::new();
    let tuples = {
        let mut out = vec![vec![]];
        for _ in 0..form.n {
            out = out.into_iter().flat_map(|t: Vec<usize>| (0..n).map(move |i| [t.clone(), vec![i]].concat())).collect();
        }
        out
    };
    for tuple in tuples {
        let mut acc = Multi::zero(form.n);
        for (key, c) in &form.terms {
            let mut t = Multi::constant(form.n, c.clone());
            for (slot, (atom, &i)) in key.iter().zip(&tuple).enumerate() {
                let f = match memo.get(&(*atom, i)) {
                    Some(f) => f.clone(),
                    None => {
                        let e = engine.expansion(*atom, i)?;
                        let p = e.add(&e.reflect())?.shift(-1);
                        if p.prec < keep {
                            return Err(Error::Depth(format!("slot expansion known below {}, need {keep}", p.prec)));
                        }
                        let p = p.truncate(keep);
                        let m = Multi::from_series(&p, 0, 1);
                        memo.insert((*atom, i), m.clone());
                        m
                    }
                };
                t = t.mul(&f.embed(&[slot], form.n))?;
            }
            acc.add_assign(&t)?;
        }
        charts.insert(tuple, acc);
    }
    Ok(LocalForm { g: form.g, n: form.n, charts })
}

/// Formal Laplace transform (-2 pi z)^{-1/2} int e^{lambda/z} (.) d lambda of
/// a cycle-pullback slot, with the factor e^{u_i/z} dropped:
/// s^{2m-1} d lambda -> (-z)^m / period_coeff(m). Even exponents must vanish.
pub fn laplace_oscillatory(f: &Series) -> Result<Series> {
    let m = Multi::from_series(f, 0, 1);
    let out = laplace_multi(&m)?;
    let lo = out.min_exp(0).min(0);
    let prec = out.prec[0];
    let top = if prec >= EXACT { out.max_exp(0).map_or(lo, |x| x + 1) } else { prec };
    let coeffs = (lo..top).map(|k| out.get(&[k])).collect();
    Ok(Series::new("z", 1, lo, coeffs, prec))
}

/// Slotwise Laplace transform of a multi-slot expansion in s-variables.
pub fn laplace_multi(m: &Multi) -> Result<Multi> {
    let nv = m.nvars();
    let prec: Vec<i64> = m.prec.iter().map(|&p| if p >= EXACT { EXACT } else { (p + 1).div_euclid(2) }).collect();
    let mut out = Multi { terms: BTreeMap::new(), prec };
    for (e, c) in &m.terms {
        let mut w = c.clone();
        let mut z = Vec::with_capacity(nv);
        for &x in e {
            if x.rem_euclid(2) == 0 {
                if c.is_zero() {
                    continue;
                }
                return Err(Error::NotVanishingCycle(format!("even exponent s^{x} in a cycle pullback")));
            }
            let k = (x + 1) / 2;
            w = &w / &period_coeff(k);
            if k.rem_euclid(2) == 1 {
                w = -&w;
            }
            z.push(k);
        }
        if z.len() == nv {
            out.add_term(z, w);
        }
    }
    Ok(out)
}

/// Chart expansions of phi-tilde = sum_n d_x^{-n} omega^{(n)} for
/// omega^{(n)} = (-1)^n sum_i (R_n c0)_i omega_i.
pub fn phi_tilde_local(cover: &BranchedCover, r_omega: &MatrixSeries, c0: &[Scalar], degree: usize) -> Result<Vec<Series>> {
    let work = EoEngine::default_work(cover);
    let mut out = Vec::new();
    for chart in 0..cover.n() {
        let mut acc = Series::zero("s", work);
        for k in 0..=degree {
            let w = r_omega.coeff(k)?.mul_vec(c0);
            for (a, wa) in w.iter().enumerate() {
                let mut f = good_basis_local(cover, a, chart, work)?;
                for _ in 0..k {
                    f = dx_inverse(&f)?;
                }
                let sign = if k % 2 == 0 { Scalar::one() } else { Scalar::int(-1) };
                acc = acc.add(&f.scale(&(wa * &sign)).truncate(work))?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Plain recursion for (cover, phi) against the local recursion driven by
/// Frobenius-side P-data: R_Sigma by stationary phase and c = c(phi).
pub fn compare_eo_frobenius(
    cover: &BranchedCover,
    phi: &RationalFn,
    cases: &[(usize, usize)],
    count: usize,
    depth: usize,
) -> Result<Vec<FrobEoComparison>> {
    let order = 2 * depth + 2;
    let need = (4 * depth + 3).max(2 * order + 2);
    let cover = if cover.charts.iter().any(|c| (c.order() as usize) < need) {
        cover.with_chart_order(need)?
    } else {
        cover.clone()
    };
    let sigma = r_sigma_stationary_phase(&cover, order)?;
    let c = c_vector(&cover, phi)?;
    let mut local = LocalRecursion::new(p_data_from_r(&sigma.r, &c, depth)?)?;
    let mut eo = EoEngine::new(&cover, phi)?;
    let mut out = Vec::new();
    for &(g, n) in cases {
        let w = eo.correlator(g, n)?.clone();
        let pb = cycle_pullback(&eo, &w, count)?;
        let lf = local.form(g, n)?;
        out.push(FrobEoComparison { g, n, deviation: pb.max_diff(lf, count)?, scale: lf.max_abs() });
    }
    Ok(out)
}

/// Generalized recursion against the local recursion built from
/// R = R_omega^T R_Sigma and the vector c0. R_omega must be polynomial of
/// degree `degree`. Both sides are compared slot by slot on cycle pullbacks.
pub fn compare_generalized(
    cover: &BranchedCover,
    r_omega: &RData,
    c0: &[Scalar],
    degree: usize,
    cases: &[(usize, usize)],
    count: usize,
    depth: usize,
) -> Result<Vec<FrobEoComparison>> {
    let order = 2 * depth + 2;
    let need = (4 * depth + 3).max(2 * order + 2);
    let cover = if cover.charts.iter().any(|c| (c.order() as usize) < need) {
        cover.with_chart_order(need)?
    } else {
        cover.clone()
    };
    let sigma = r_sigma_stationary_phase(&cover, order)?;
    let r = compose_r(r_omega, &sigma)?;
    let mut local = LocalRecursion::new(p_data_from_r(&r.r, c0, depth)?)?;
    let tol = cover.backend.tolerance().max(0.0);
    let v = v_from_r_omega(&r_omega.r, degree, tol)?;
    let phi = phi_tilde_local(&cover, &r_omega.r, c0, degree)?;
    let mut eo = EoEngine::generalized(&cover, phi, v)?;
    let mut out = Vec::new();
    for &(g, n) in cases {
        let w = eo.correlator(g, n)?.clone();
        let pb = cycle_pullback(&eo, &w, count)?;
        let lf = local.form(g, n)?;
        out.push(FrobEoComparison { g, n, deviation: pb.max_diff(lf, count)?, scale: lf.max_abs() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Backend;
    use crate::spectral_curve::CoverOptions;

    fn airy() -> EoEngine {
        let x = RationalFn::poly(vec![Scalar::zero(), Scalar::zero(), Scalar::rat(1, 2)]);
        let cover = BranchedCover::new(x, &Backend::Exact, &CoverOptions { chart_order: 30, labels: None }).unwrap();
        let phi = RationalFn::poly(vec![Scalar::int(-1)]);
        EoEngine::new(&cover, &phi).unwrap()
    }

    #[test]
    fn airy_low_correlators_exact() {
        let mut e = airy();
        let w03 = e.correlator(0, 3).unwrap().clone();
        let p2 = Atom::Pole { j: 0, k: 2 };
        assert_eq!(w03.terms.len(), 1);
        assert_eq!(w03.coeff(&[p2, p2, p2]), Scalar::one());
        let w11 = e.correlator(1, 1).unwrap().clone();
        assert_eq!(w11.terms.len(), 1);
        assert_eq!(w11.coeff(&[Atom::Pole { j: 0, k: 4 }]), Scalar::rat(1, 8));
        let w04 = e.correlator(0, 4).unwrap().clone();
        assert_eq!(w04.symmetry_defect(), 0.0);
        let w12 = e.correlator(1, 2).unwrap().clone();
        assert_eq!(w12.symmetry_defect(), 0.0);
    }

    #[test]
    fn laplace_of_period_basis() {
        // s^{2m-1} -> (-z)^m / period_coeff(m), period_coeff(m) = 2/(2m-1)!!
        let f = Series::new("s", 1, -3, vec![Scalar::one(), Scalar::zero(), Scalar::one(), Scalar::zero(), Scalar::one()], 4);
        let l = laplace_oscillatory(&f).unwrap();
        // m = -1: (2m-1)!! = (-3)!! = -1
        assert_eq!(l.coeff(-1).unwrap(), Scalar::rat(1, 2));
        assert_eq!(l.coeff(0).unwrap(), Scalar::rat(1, 2));
        assert_eq!(l.coeff(1).unwrap(), Scalar::rat(-1, 2));
        assert_eq!(l.prec, 2);
        let bad = Series::monomial("s", 1, 2, Scalar::one());
        assert!(laplace_oscillatory(&bad).is_err());
    }

    #[test]
    fn dx_inverse_gauge() {
        let f = Series::poly("s", vec![Scalar::int(-1), Scalar::zero(), Scalar::int(3)]);
        let g = dx_inverse(&f).unwrap();
        assert_eq!(g.coeff(2).unwrap(), Scalar::int(-1));
        assert_eq!(g.coeff(4).unwrap(), Scalar::one());
        assert!(g.coeff(0).unwrap().is_zero());
        let bad = Series::monomial("s", 1, -1, Scalar::one());
        assert!(matches!(dx_inverse(&bad), Err(Error::Logarithmic(_))));
    }

    #[test]
    fn pullback_matches_local_recursion_on_rank2() {
        use crate::frobenius_rank2::{build_family, Rank2Params};
        use crate::local_recursion::{p_data_from_curve, LocalRecursion};
        use crate::spectral_curve::{primary_differential, PrimaryKind};
        let be = Backend::float(60).unwrap();
        for (case, kind) in [(1u8, PrimaryKind::TypeI { pole: 0, a: 1 }), (2, PrimaryKind::TypeIII { pole: 1 })] {
            let s1 = be.from_c64(0.7, 0.3).unwrap();
            let s2 = be.from_c64(0.25, -0.5).unwrap();
            let fam = build_family(case, &Rank2Params::S { s1, s2 }, &be, 30).unwrap();
            let phi = primary_differential(&fam.cover, kind).unwrap();
            let mut eo = EoEngine::new(&fam.cover, &phi).unwrap();
            let mut loc = LocalRecursion::new(p_data_from_curve(&fam.cover, &phi, 4).unwrap()).unwrap();
            for (g, n) in [(0, 3), (1, 1), (0, 4), (1, 2)] {
                let w = eo.correlator(g, n).unwrap().clone();
                let pb = cycle_pullback(&eo, &w, 4).unwrap();
                let lf = loc.form(g, n).unwrap();
                let d = pb.max_diff(lf, 4).unwrap();
                assert!(d < 1e-20, "case {case} ({g},{n}): {d:e}");
                assert!(w.symmetry_defect() < 1e-40);
            }
        }
    }

    #[test]
    fn generalized_recursion_d_five_thirds() {
        use crate::frobenius_rank2::{build_family, c_scaling_at, Rank2Params};
        use crate::givental_r::{r_of_dimension, rank2_a, rank2_b, reconstruct_r_omega_rank2, Provenance};
        let r = r_of_dimension((5, 3));
        assert_eq!(r, (-1, 3));
        let a = rank2_a(r, 1);
        let a1 = &a - &rank2_b(1).unwrap();
        assert_eq!(a1, Scalar::gauss(0, 1, 2, 3));
        let sym = reconstruct_r_omega_rank2(1, r, 1, 10).unwrap();
        assert!(!sym.is_zero_at(1));
        assert!((2..=10).all(|k| sym.is_zero_at(k)));

        let be = Backend::float(60).unwrap();
        let s1 = be.from_c64(0.7, 0.3).unwrap();
        let s2 = be.from_c64(0.25, -0.5).unwrap();
        let fam = build_family(1, &Rank2Params::S { s1, s2 }, &be, 30).unwrap();
        let ro = RData::new(sym.eval(&fam.u).unwrap(), Provenance::Omega, fam.u.to_vec()).unwrap();
        let c0 = c_scaling_at(&fam.u, r, 1).unwrap();
        let res = compare_generalized(&fam.cover, &ro, &c0, 1, &[(0, 3), (1, 1)], 4, 4).unwrap();
        for c in &res {
            assert!(c.deviation < 1e-18, "({},{}): {:e}", c.g, c.n, c.deviation);
        }
        // Dropping the V-correction must break the (1,1) agreement.
        let cover = fam.cover.with_chart_order(38).unwrap();
        let sigma = r_sigma_stationary_phase(&cover, 10).unwrap();
        let rr = compose_r(&ro, &sigma).unwrap();
        let mut local = LocalRecursion::new(p_data_from_r(&rr.r, &c0, 4).unwrap()).unwrap();
        let phi = phi_tilde_local(&cover, &ro.r, &c0, 1).unwrap();
        let mut eo = EoEngine::generalized(&cover, phi, VData::zero()).unwrap();
        let w = eo.correlator(1, 1).unwrap().clone();
        let d = cycle_pullback(&eo, &w, 4).unwrap().max_diff(local.form(1, 1).unwrap(), 4).unwrap();
        assert!(d > 1e-5, "{d:e}");
    }

    #[test]
    fn generalized_with_zero_v_is_plain_recursion() {
        let x = RationalFn::poly(vec![Scalar::zero(), Scalar::rat(-1, 2), Scalar::zero(), Scalar::rat(1, 6)]);
        let cover = BranchedCover::new(x, &Backend::Exact, &CoverOptions { chart_order: 24, labels: None }).unwrap();
        let phi = RationalFn::poly(vec![Scalar::int(-1)]);
        let mut plain = EoEngine::new(&cover, &phi).unwrap();
        // R_omega = 1: phi-tilde is phi rebuilt from the good basis, V = 0.
        let one = crate::local_recursion::trivial_r(2, 0);
        let v = v_from_r_omega(&one, 0, 0.0).unwrap();
        assert!(v.is_zero());
        let c = crate::spectral_curve::c_vector(&cover, &phi).unwrap();
        let local = phi_tilde_local(&cover, &one, &c, 0).unwrap();
        for (x, y) in local.iter().zip(&plain.phi_local) {
            assert_eq!(x.max_diff(y, 20).unwrap(), 0.0);
        }
        let mut gen = EoEngine::generalized(&cover, local, v).unwrap();
        for (g, n) in [(0, 3), (1, 1), (0, 4)] {
            let a = plain.correlator(g, n).unwrap().clone();
            let b = gen.correlator(g, n).unwrap();
            assert_eq!(a.terms, b.terms, "({g},{n})");
        }
    }
}
