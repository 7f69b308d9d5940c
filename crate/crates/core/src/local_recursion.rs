//! Local topological recursion on the disjoint union of N Morse discs.
//!
//! Everything is written in the Morse coordinate s of each disc, with
//! lambda - u_i = s^2/2. A correlator is stored as the coefficient F of
//! d lambda_1 ... d lambda_n, one multivariate Laurent polynomial per chart
//! assignment. Since d lambda = s ds and the disc double covers the lambda
//! plane, res_{lambda = u_i} f d lambda = 1/2 [s^-2] f.
//!
//! The input ("P-data") is the one-point function P^i and the regular part
//! of the two-point function P^{ij}:
//!   P^{ij}(s1, s2) = delta_ij 4 (s1^2 + s2^2) / (s1 s2 (s1^2 - s2^2)^2)
//!                    + sum_{k,l} Phat^{ij}_{kl} s1^{2k-1} s2^{2l-1}.
//! It comes either from an R-matrix (`p_data_from_r`) or from a branched
//! cover with a 1-form (`p_data_from_curve`).

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::givental_r::{compose_r, r_sigma_stationary_phase, v_matrices_frob, RData};
use crate::matrix::{Mat, MatrixSeries};
use crate::multi::Multi;
use crate::scalar::{double_factorial_odd, Scalar};
use crate::series::Series;
use crate::spectral_curve::{bergman_coeffs, c_vector, vanishing_cycle_integral_s, BranchedCover, RationalFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PSource {
    Frobenius,
    Curve,
}

#[derive(Clone, Debug)]
pub struct PData {
    pub n: usize,
    /// Regular part is kept for k, l <= depth.
    pub depth: usize,
    /// P^i(s), odd in s.
    pub p1: Vec<Series>,
    /// reg[i][j][k][l] = Phat^{ij}_{kl}.
    pub reg: Vec<Vec<Vec<Vec<Scalar>>>>,
    pub source: PSource,
}

/// Coefficient of s^{2m-1} in sqrt(2 pi) (lambda-u)^{m-1/2} / Gamma(m+1/2).
pub fn period_coeff(m: i64) -> Scalar {
    &Scalar::int(2) / &double_factorial_odd(m)
}

/// P-data of a Frobenius manifold at a semisimple point: R-matrix in the
/// normalised canonical frame and the unit vector components
/// one_i = (Psi e_i, 1) = -c_i.
pub fn p_data_from_r(r: &MatrixSeries, c0: &[Scalar], depth: usize) -> Result<PData> {
    let n = r.dim();
    if c0.len() != n {
        return Err(Error::Dimension(format!("c has {} entries for rank {n}", c0.len())));
    }
    let kp = depth + 1;
    if r.order() < 2 * depth + 2 || r.order() < kp + 1 {
        return Err(Error::Depth(format!("P-data of depth {depth} needs R through z^{}", (2 * depth + 1).max(kp))));
    }
    let mut p1 = Vec::new();
    for j in 0..n {
        let mut coeffs = vec![Scalar::zero(); 2 * kp + 2];
        for k in 0..=kp {
            let rk = r.coeff(k)?;
            let mut acc = Scalar::zero();
            for (a, c) in c0.iter().enumerate() {
                acc = &acc - &(c * rk.get(a, j));
            }
            let sign = if k % 2 == 0 { 4 } else { -4 };
            coeffs[2 * k + 1] = &(&acc * &Scalar::int(sign)) * &period_coeff(k as i64 + 1);
        }
        p1.push(Series::new("s", 1, 0, coeffs, 2 * kp as i64 + 3));
    }
    let v = v_matrices_frob(r, 2 * depth + 1)?;
    let mut reg = vec![vec![vec![vec![Scalar::zero(); depth + 1]; depth + 1]; n]; n];
    for k in 0..=depth {
        for l in 0..=depth {
            let w = &Scalar::int(4) / &(&double_factorial_odd(k as i64) * &double_factorial_odd(l as i64));
            let m = v.get(k, l)?;
            for i in 0..n {
                for j in 0..n {
                    reg[i][j][k][l] = m.get(i, j) * &w;
                }
            }
        }
    }
    Ok(PData { n, depth, p1, reg, source: PSource::Frobenius })
}

/// P-data of a branched cover with the 1-form phi: P^i = 4 int_beta phi and
/// Phat^{ij}_{kl} = 4 B^{ij}_{2k,2l}.
pub fn p_data_from_curve(cover: &BranchedCover, phi: &RationalFn, depth: usize) -> Result<PData> {
    let n = cover.n();
    let kp = depth + 1;
    let mut p1 = Vec::new();
    for i in 0..n {
        let f = cover.chart_expansion(phi, i, 2 * kp as i64 + 1)?;
        if f.order() < 0 {
            return Err(Error::NotHolomorphic(format!("1-form has a pole at ramification point {}", i + 1)));
        }
        p1.push(vanishing_cycle_integral_s(&f)?.scale(&Scalar::int(4)));
    }
    let b = bergman_coeffs(cover, 2 * depth)?;
    let mut reg = vec![vec![vec![vec![Scalar::zero(); depth + 1]; depth + 1]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..=depth {
                for l in 0..=depth {
                    reg[i][j][k][l] = b.get(i, j, 2 * k, 2 * l)? * &Scalar::int(4);
                }
            }
        }
    }
    Ok(PData { n, depth, p1, reg, source: PSource::Curve })
}

impl PData {
    fn out_prec(&self) -> i64 {
        2 * self.depth as i64 + 1
    }

    /// Recursion kernel numerator: zero-constant lambda-antiderivative of
    /// P^{i0 i}(s0, s) in the s slot. Variables [s0, s].
    fn kernel(&self, i0: usize, i: usize, need: i64) -> Multi {
        let l_max = self.depth as i64;
        let mut m = Multi::zero(2);
        m.prec = vec![self.out_prec(), need.min(2 * l_max + 3)];
        if i0 == i {
            let mut e = 0;
            while 2 * e + 1 < need {
                m.add_term(vec![-2 * e - 3, 2 * e + 1], Scalar::int(4));
                e += 1;
            }
        }
        for k in 0..=self.depth {
            for l in 0..=self.depth {
                let c = &self.reg[i0][i][k][l] / &Scalar::int(2 * l as i64 + 1);
                m.add_term(vec![2 * k as i64 - 1, 2 * l as i64 + 1], c);
            }
        }
        m
    }

    /// Two-point function at distinct points, s in chart i and s_a in chart
    /// j, expanded for |s| < |s_a|. Variables [s, s_a].
    fn passive(&self, i: usize, j: usize, need: i64) -> Multi {
        let mut m = Multi::zero(2);
        m.prec = vec![need.min(self.out_prec()), self.out_prec()];
        if i == j {
            let mut e = 0;
            while 2 * e - 1 < need {
                m.add_term(vec![2 * e - 1, -2 * e - 3], Scalar::int(4 * (2 * e + 1)));
                e += 1;
            }
        }
        for k in 0..=self.depth {
            for l in 0..=self.depth {
                m.add_term(vec![2 * k as i64 - 1, 2 * l as i64 - 1], self.reg[i][j][k][l].clone());
            }
        }
        m
    }

    /// omega_{0,2} on the two sheets over one lambda: -P^{ii}_0(lambda).
    fn diagonal(&self, i: usize) -> Multi {
        let mut m = Multi::zero(1);
        m.prec = vec![2 * self.depth as i64];
        m.add_term(vec![-4], Scalar::int(-1));
        for k in 0..=self.depth {
            for l in 0..=self.depth {
                m.add_term(vec![2 * (k + l) as i64 - 2], -&self.reg[i][i][k][l]);
            }
        }
        m
    }
}

/// omega_{g,n} in Morse coordinates: chart assignment -> coefficient of
/// d lambda_1 ... d lambda_n.
#[derive(Clone, Debug)]
pub struct LocalForm {
    pub g: usize,
    pub n: usize,
    pub charts: BTreeMap<Vec<usize>, Multi>,
}

impl LocalForm {
    /// Most negative exponent any slot can carry.
    pub fn pole_bound(&self) -> i64 {
        -(6 * self.g as i64 + 2 * self.n as i64 - 3)
    }

    /// Largest deviation over the first `count` odd exponents of every slot.
    pub fn max_diff(&self, o: &LocalForm, count: usize) -> Result<f64> {
        if (self.g, self.n) != (o.g, o.n) {
            return Err(Error::Dimension(format!("({},{}) vs ({},{})", self.g, self.n, o.g, o.n)));
        }
        let lo = vec![self.pole_bound(); self.n];
        let hi = vec![self.pole_bound() + 2 * count as i64; self.n];
        let mut worst: f64 = 0.0;
        for (k, m) in &self.charts {
            let other = o.charts.get(k).ok_or_else(|| Error::Internal(format!("missing chart tuple {k:?}")))?;
            worst = worst.max(m.max_diff_window(other, &lo, &hi)?);
        }
        Ok(worst)
    }

    pub fn max_abs(&self) -> f64 {
        self.charts.values().map(Multi::max_abs).fold(0.0, f64::max)
    }
}

fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|t| (0..n).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

pub struct LocalRecursion {
    pub pd: PData,
    forms: HashMap<(usize, usize), LocalForm>,
    inv_p: Vec<Multi>,
}

impl LocalRecursion {
    pub fn new(pd: PData) -> Result<LocalRecursion> {
        let mut inv_p = Vec::new();
        for p in &pd.p1 {
            inv_p.push(Multi::from_series(&p.inv()?, 0, 1));
        }
        Ok(LocalRecursion { pd, forms: HashMap::new(), inv_p })
    }

    /// omega_{g,n} for 2g - 2 + n > 0.
    pub fn form(&mut self, g: usize, n: usize) -> Result<&LocalForm> {
        if 2 * g + n < 3 || n == 0 {
            return Err(Error::Index(format!("omega_{{{g},{n}}} is not a stable correlator")));
        }
        if !self.forms.contains_key(&(g, n)) {
            if g >= 1
                && (g - 1, n + 1) != (0, 2) {
                    self.form(g - 1, n + 1)?;
                }
            for g1 in 0..=g {
                for n1 in 0..n {
                    if 2 * g1 + n1 + 1 >= 3 && (g1, n1 + 1) != (g, n) {
                        self.form(g1, n1 + 1)?;
                    }
                }
            }
            let f = self.compute(g, n)?;
            self.forms.insert((g, n), f);
        }
        Ok(&self.forms[&(g, n)])
    }

    /// A factor omega_{g', m}(+-s, s_J) embedded in the bracket variables
    /// [s, s_1..s_n]. `slots` lists the positions (1-based) of s_J.
    fn factor(&self, g: usize, i: usize, charts: &[usize], slots: &[usize], flip: bool, nv: usize) -> Result<Multi> {
        let m = if g == 0 && charts.len() == 1 {
            self.pd.passive(i, charts[0], self.pd.out_prec())
        } else {
            let key: Vec<usize> = [vec![i], charts.to_vec()].concat();
            self.forms[&(g, charts.len() + 1)].charts[&key].clone()
        };
        let m = if flip { m.reflect(0) } else { m };
        let map: Vec<usize> = [vec![0], slots.to_vec()].concat();
        Ok(m.embed(&map, nv))
    }

    fn bracket(&self, g: usize, i: usize, rest: &[usize]) -> Result<Multi> {
        let n = rest.len();
        let nv = n + 1;
        let mut br = Multi::zero(nv);
        if g >= 1 {
            let t = if n == 0 && g == 1 {
                self.pd.diagonal(i)
            } else {
                let key: Vec<usize> = [vec![i, i], rest.to_vec()].concat();
                self.forms[&(g - 1, n + 2)].charts[&key].reflect(1).merge(0, 1)?
            };
            br.add_assign(&t)?;
        }
        for g1 in 0..=g {
            for mask in 0u32..(1 << n) {
                let j: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).collect();
                let jc: Vec<usize> = (0..n).filter(|b| mask & (1 << b) == 0).collect();
                let g2 = g - g1;
                if (g1 == 0 && j.is_empty()) || (g2 == 0 && jc.is_empty()) {
                    continue;
                }
                let cj: Vec<usize> = j.iter().map(|&b| rest[b]).collect();
                let cjc: Vec<usize> = jc.iter().map(|&b| rest[b]).collect();
                let sj: Vec<usize> = j.iter().map(|b| b + 1).collect();
                let sjc: Vec<usize> = jc.iter().map(|b| b + 1).collect();
                let f1 = self.factor(g1, i, &cj, &sj, false, nv)?;
                let f2 = self.factor(g2, i, &cjc, &sjc, true, nv)?;
                br.add_assign(&f1.mul(&f2)?)?;
            }
        }
        Ok(br)
    }

    fn compute(&self, g: usize, n: usize) -> Result<LocalForm> {
        let big_n = self.pd.n;
        let mut charts = BTreeMap::new();
        for tuple in tuples(big_n, n) {
            let (i0, rest) = (tuple[0], &tuple[1..]);
            let nv = n;
            let mut out: Option<Multi> = None;
            for i in 0..big_n {
                let br = self.bracket(g, i, rest)?;
                // Only s-exponents <= -3 of Br / P can meet the kernel's s^1.
                let bp = br.mul(&self.inv_p[i].embed(&[0], n))?.truncate(0, -2);
                let need = -1 - bp.min_exp(0);
                let a = self.pd.kernel(i0, i, need);
                let a_full = a.embed(&[0, 1], nv + 1);
                let map: Vec<usize> = (1..=nv).collect();
                let t = a_full.mul(&bp.embed(&map, nv + 1))?;
                let c = t.coeff(1, -2)?.scale(&Scalar::rat(1, 2));
                out = Some(match out {
                    None => c,
                    Some(o) => o.add(&c)?,
                });
            }
            let mut m = out.expect("at least one chart");
            for a in 0..n {
                m = m.truncate(a, self.pd.out_prec());
            }
            charts.insert(tuple, m);
        }
        Ok(LocalForm { g, n, charts })
    }
}

/// Linear map taking ancestor correlator components (b, k) of one slot to
/// the coefficients of s^{-2 kappa - 3} in chart i, kappa <= kmax.
fn slot_map(psi: &Mat, r: &MatrixSeries, kmax: usize) -> Result<Mat> {
    let n = psi.rows;
    let dim = n * (kmax + 1);
    let mut m = Mat::zeros(dim, dim);
    for i in 0..n {
        for kappa in 0..=kmax {
            let row = i * (kmax + 1) + kappa;
            for b in 0..n {
                for k in kappa..=kmax {
                    let l = k - kappa;
                    let pr = psi.mul(r.coeff(l)?);
                    let sign = if k % 2 == l % 2 { 1 } else { -1 };
                    let c = &(pr.get(b, i) * &period_coeff(-(kappa as i64) - 1)) * &Scalar::int(sign);
                    m.set(row, b * (kmax + 1) + k, c);
                }
            }
        }
    }
    Ok(m)
}

/// Ancestor correlators <phi_{b_1} psibar^{k_1} ... phi_{b_n} psibar^{k_n}>_{g,n}
/// read off the local form: a slot in chart i equals
/// sum_{b,k} (-1)^k (I^{(k+1)}_{gamma(i)}, phi^b) <... phi_b psibar^k ...>.
/// Keys are lists of (b, k).
pub fn ancestor_correlators(
    form: &LocalForm,
    psi: &Mat,
    r: &MatrixSeries,
) -> Result<BTreeMap<Vec<(usize, usize)>, Scalar>> {
    let n = psi.rows;
    let kmax = (3 * form.g + form.n).saturating_sub(3);
    let minv = slot_map(psi, r, kmax)?.inverse()?;
    let dim = n * (kmax + 1);
    let slots = form.n;
    // Dense coefficient tensor indexed by (i, kappa) per slot.
    let idx = |v: &[usize]| v.iter().fold(0usize, |acc, x| acc * dim + x);
    let mut t = vec![Scalar::zero(); dim.pow(slots as u32)];
    for (charts, m) in &form.charts {
        for multi in tuples(kmax + 1, slots) {
            let exps: Vec<i64> = multi.iter().map(|&k| -2 * k as i64 - 3).collect();
            for (a, e) in exps.iter().enumerate() {
                if *e >= m.prec[a] {
                    return Err(Error::Depth(format!("slot {a} known below {}", m.prec[a])));
                }
            }
            let pos: Vec<usize> = charts.iter().zip(&multi).map(|(i, k)| i * (kmax + 1) + k).collect();
            t[idx(&pos)] = m.get(&exps);
        }
    }
    // Apply the inverse slot map in every slot.
    for a in 0..slots {
        let mut nt = vec![Scalar::zero(); t.len()];
        for (flat, c) in t.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut v = vec![0usize; slots];
            let mut f = flat;
            for b in (0..slots).rev() {
                v[b] = f % dim;
                f /= dim;
            }
            let from = v[a];
            for to in 0..dim {
                let w = minv.get(to, from);
                if w.is_zero() {
                    continue;
                }
                v[a] = to;
                let k = idx(&v);
                nt[k] = &nt[k] + &(c * w);
            }
        }
        t = nt;
    }
    let mut out = BTreeMap::new();
    for multi in tuples(dim, slots) {
        let c = &t[idx(&multi)];
        let key: Vec<(usize, usize)> = multi.iter().map(|&x| (x / (kmax + 1), x % (kmax + 1))).collect();
        out.insert(key, c.clone());
    }
    Ok(out)
}

/// Identity R-matrix of rank n to the given order.
pub fn trivial_r(n: usize, order: usize) -> MatrixSeries {
    let mut c = vec![Mat::identity(n)];
    c.extend((1..order).map(|_| Mat::zeros(n, n)));
    MatrixSeries::new(c)
}

/// Outcome of running the local recursion from both kinds of P-data.
#[derive(Clone, Debug)]
pub struct FrobEoComparison {
    pub g: usize,
    pub n: usize,
    pub deviation: f64,
    pub scale: f64,
}

/// Runs the local recursion from Frobenius P-data and from curve P-data and
/// compares the first `count` Puiseux coefficients per slot.
pub fn compare_local(a: &PData, b: &PData, cases: &[(usize, usize)], count: usize) -> Result<Vec<FrobEoComparison>> {
    let mut ra = LocalRecursion::new(a.clone())?;
    let mut rb = LocalRecursion::new(b.clone())?;
    let mut out = Vec::new();
    for &(g, n) in cases {
        let fa = ra.form(g, n)?.clone();
        let fb = rb.form(g, n)?;
        out.push(FrobEoComparison { g, n, deviation: fa.max_diff(fb, count)?, scale: fa.max_abs() });
    }
    Ok(out)
}

/// Frobenius side from R = R_omega^T R_Sigma (R_Sigma by stationary phase,
/// R_omega = 1 when absent) and c = c(phi); curve side from (cover, phi).
pub fn compare_frob_eo(
    cover: &BranchedCover,
    phi: &RationalFn,
    r_omega: Option<&RData>,
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
    let r = match r_omega {
        Some(ro) => compose_r(ro, &sigma)?,
        None => sigma,
    };
    let c = c_vector(&cover, phi)?;
    let a = p_data_from_r(&r.r, &c, depth)?;
    let b = p_data_from_curve(&cover, phi, depth)?;
    compare_local(&a, &b, cases, count)
}

/// phi (1 + eps f): still holomorphic at the ramification points, but in
/// general no longer a primitive form of the cover. Negative control.
pub fn perturbed_form(phi: &RationalFn, f: &RationalFn, eps: &Scalar) -> RationalFn {
    phi.add(&phi.mul(f).scale(eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kdv() -> LocalRecursion {
        let r = trivial_r(1, 12);
        let pd = p_data_from_r(&r, &[Scalar::int(-1)], 5).unwrap();
        LocalRecursion::new(pd).unwrap()
    }

    #[test]
    fn kdv_point_low_correlators() {
        let mut rec = kdv();
        let psi = Mat::identity(1);
        let r = trivial_r(1, 12);
        let f03 = rec.form(0, 3).unwrap().clone();
        assert_eq!(f03.charts[&vec![0, 0, 0]].get(&[-3, -3, -3]), Scalar::int(-8));
        let c = ancestor_correlators(&f03, &psi, &r).unwrap();
        assert_eq!(c[&vec![(0, 0); 3]], Scalar::one());
        let f11 = rec.form(1, 1).unwrap().clone();
        let c = ancestor_correlators(&f11, &psi, &r).unwrap();
        assert_eq!(c[&vec![(0, 1)]], Scalar::rat(1, 24));
        assert!(c[&vec![(0, 0)]].is_zero());
        let f12 = rec.form(1, 2).unwrap().clone();
        let c = ancestor_correlators(&f12, &psi, &r).unwrap();
        assert_eq!(c[&vec![(0, 0), (0, 2)]], Scalar::rat(1, 24));
        assert_eq!(c[&vec![(0, 1), (0, 1)]], Scalar::rat(1, 24));
        let f21 = rec.form(2, 1).unwrap().clone();
        let c = ancestor_correlators(&f21, &psi, &r).unwrap();
        assert_eq!(c[&vec![(0, 4)]], Scalar::rat(1, 1152));
    }

    #[test]
    fn frobenius_and_curve_p_data_agree_on_rank2() {
        use crate::frobenius_rank2::{build_family, Rank2Params};
        use crate::scalar::Backend;
        use crate::spectral_curve::{primary_differential, PrimaryKind};
        let be = Backend::float(60).unwrap();
        for (case, kind) in [(1u8, PrimaryKind::TypeI { pole: 0, a: 1 }), (2, PrimaryKind::TypeIII { pole: 1 })] {
            let s1 = be.from_c64(0.7, 0.3).unwrap();
            let s2 = be.from_c64(0.25, -0.5).unwrap();
            let fam = build_family(case, &Rank2Params::S { s1, s2 }, &be, 24).unwrap();
            let phi = primary_differential(&fam.cover, kind).unwrap();
            let rep = compare_frob_eo(&fam.cover, &phi, None, &[(0, 3), (1, 1)], 4, 3).unwrap();
            for x in &rep {
                assert!(x.deviation < 1e-40, "case {case} ({},{}): {:e}", x.g, x.n, x.deviation);
                assert!(x.scale > 1e-3);
            }
            // A multiplier with a fresh pole; polynomial multipliers in t or x
            // can stay inside the span the comparison probes.
            let q = RationalFn::pole(&be.rat(7, 3), 1, Scalar::one());
            let bad = perturbed_form(&phi, &q, &be.rat(1, 10));
            let rep = compare_frob_eo(&fam.cover, &bad, None, &[(1, 1)], 4, 3).unwrap();
            assert!(rep[0].deviation > 1e-5, "case {case} negative control: {:e}", rep[0].deviation);
        }
    }
}
