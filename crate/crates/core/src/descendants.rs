//! Calibrations (weak Levelt solution plus symplectic gauge), descendant
//! correlators including the unstable cases, and the Laplace-side check that
//! links cycle pullbacks of the EO forms to J-series-dressed ancestors.
//!
//! All matrices act on H in a fixed basis phi_1..phi_N; transposition is
//! taken with respect to the Frobenius pairing eta, X^T = eta^-1 X^t eta.

use std::collections::BTreeMap;

use crate::eo_recursion::{cycle_pullback, laplace_multi, EoEngine};
use crate::error::{Error, Result};
use crate::frobenius_rank2::Rank2Family;
use crate::givental_r::{divide_by_sum, r_sigma_stationary_phase};
use crate::local_recursion::{ancestor_correlators, p_data_from_r, LocalRecursion};
use crate::matrix::{Mat, MatrixSeries};
use crate::multi::Multi;
use crate::scalar::Scalar;
use crate::spectral_curve::{c_vector, BranchedCover, RationalFn};

/// Ancestor correlators keyed by (b, k) per slot.
pub type Ancestors = BTreeMap<Vec<(usize, usize)>, Scalar>;

/// The data the calibration recursion needs at one point t of a Frobenius
/// manifold, in a flat basis.
#[derive(Clone, Debug)]
pub struct FrobeniusPoint {
    pub eta: Mat,
    pub theta: Mat,
    /// Operator of multiplication by the Euler field at t.
    pub e_dot: Mat,
    /// Index of the unit phi_unit = 1.
    pub unit: usize,
}

/// A_2 in flat coordinates (t1, t2) of f = p^3/3 + t2 p + t1:
/// phi_2 . phi_2 = -t2 phi_1, E = t1 d_1 + (2/3) t2 d_2, theta = diag(1/6, -1/6).
pub fn a2_point(t1: &Scalar, t2: &Scalar) -> FrobeniusPoint {
    let two_thirds = Scalar::rat(2, 3);
    FrobeniusPoint {
        eta: antidiag(),
        theta: Mat::diag(&[Scalar::rat(1, 6), Scalar::rat(-1, 6)]),
        e_dot: Mat::from_rows(vec![
            vec![t1.clone(), -&(&two_thirds * &(t2 * t2))],
            vec![&two_thirds * t2, t1.clone()],
        ]),
        unit: 0,
    }
}

/// Quantum cohomology of P^1 at (t1, t2) with q = e^{t2}: phi_2 . phi_2 = q,
/// E = t1 d_1 + 2 d_2, theta = diag(1/2, -1/2). Resonant at k = 1.
pub fn p1_point(t1: &Scalar, q: &Scalar) -> FrobeniusPoint {
    FrobeniusPoint {
        eta: antidiag(),
        theta: Mat::diag(&[Scalar::rat(1, 2), Scalar::rat(-1, 2)]),
        e_dot: Mat::from_rows(vec![
            vec![t1.clone(), &Scalar::int(2) * q],
            vec![Scalar::int(2), t1.clone()],
        ]),
        unit: 0,
    }
}

fn antidiag() -> Mat {
    Mat::from_rows(vec![vec![Scalar::zero(), Scalar::one()], vec![Scalar::one(), Scalar::zero()]])
}

#[derive(Clone, Debug)]
pub struct Calibration {
    /// S_0 = 1, S_1, ..., S_K.
    pub s: Vec<Mat>,
    /// Diagonal of delta as exact rationals (p, q).
    pub delta: Vec<(i64, i64)>,
    /// nu[l] = nu_{[-l]}; nu[0] is the nilpotent part of theta.
    pub nu: Vec<Mat>,
    pub theta: Mat,
    pub eta: Mat,
    pub unit: usize,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn reduce(p: i64, q: i64) -> (i64, i64) {
    let g = gcd(p, q).max(1);
    let s = if q < 0 { -1 } else { 1 };
    (s * p / g, s * q / g)
}

fn tol_of(m: &Mat) -> f64 {
    m.data.iter().find(|x| !x.is_exact()).map_or(0.0, |x| x.backend().tolerance())
}

/// Recognise a rational number with denominator at most 720.
fn rational_of(x: &Scalar) -> Result<(i64, i64)> {
    let tol = if x.is_exact() { 0.0 } else { x.backend().tolerance() };
    let (re, im) = x.to_c64();
    if im.abs() > 1e-12 && x.is_exact() || im.abs() > 1e-9 {
        return Err(Error::UnsupportedSpectrum(format!("non-real eigenvalue {x}")));
    }
    for q in 1..=720i64 {
        let p = (re * q as f64).round() as i64;
        let d = (x - &Scalar::rat(p, q)).abs_f64();
        if d <= tol {
            return Ok(reduce(p, q));
        }
    }
    Err(Error::UnsupportedSpectrum(format!("eigenvalue {x} is not a small-denominator rational")))
}

impl Calibration {
    pub fn order(&self) -> usize {
        self.s.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.eta.rows
    }

    /// eta-adjoint.
    pub fn transpose(&self, x: &Mat) -> Result<Mat> {
        Ok(self.eta.inverse()?.mul(&x.transpose()).mul(&self.eta))
    }

    /// delta_i - delta_j.
    pub fn grade(&self, i: usize, j: usize) -> (i64, i64) {
        let (a, b) = self.delta[i];
        let (c, d) = self.delta[j];
        reduce(a * d - c * b, b * d)
    }

    /// X_{[a]}: the entries of X whose ad_delta grade is a.
    pub fn project(&self, x: &Mat, a: (i64, i64)) -> Mat {
        let mut m = Mat::zeros(x.rows, x.cols);
        for i in 0..x.rows {
            for j in 0..x.cols {
                if self.grade(i, j) == a {
                    m.set(i, j, x.get(i, j).clone());
                }
            }
        }
        m
    }

    /// Coefficients of S(-z)^T S(z), index l for z^{-l}.
    fn gram(&self) -> Result<Vec<Mat>> {
        let n = self.dim();
        let st: Vec<Mat> = self.s.iter().map(|m| self.transpose(m)).collect::<Result<_>>()?;
        Ok((0..=self.order())
            .map(|l| {
                let mut acc = Mat::zeros(n, n);
                for a in 0..=l {
                    let t = st[a].mul(&self.s[l - a]);
                    acc = if a % 2 == 1 { acc.sub(&t) } else { acc.add(&t) };
                }
                acc
            })
            .collect())
    }

    /// Largest entry of S(-z)^T S(z) - 1 through z^{-K}.
    pub fn symplectic_defect(&self) -> Result<f64> {
        let g = self.gram()?;
        let id = Mat::identity(self.dim());
        Ok(g.iter()
            .enumerate()
            .map(|(l, m)| if l == 0 { m.sub(&id).max_abs() } else { m.max_abs() })
            .fold(0.0, f64::max))
    }

    /// Largest entry of theta + theta^T.
    pub fn theta_skew_defect(&self) -> Result<f64> {
        Ok(self.theta.add(&self.transpose(&self.theta)?).max_abs())
    }
}

/// Weak Levelt solution to order K: (S_k)_{[-k]} = 0 and
/// k S_k + [theta, S_k] = E. S_{k-1} + sum_{l=1}^k S_{k-l} nu_{[-l]}.
pub fn levelt_solution(point: &FrobeniusPoint, order: usize) -> Result<Calibration> {
    let n = point.eta.rows;
    if !point.theta.is_square() || point.theta.rows != n || point.e_dot.rows != n || !point.e_dot.is_square() {
        return Err(Error::Dimension("eta, theta and E. must be square of one size".into()));
    }
    if point.unit >= n {
        return Err(Error::Index(format!("unit index {} out of range", point.unit)));
    }
    let tol = tol_of(&point.theta).max(tol_of(&point.e_dot)).max(tol_of(&point.eta));
    let delta = (0..n).map(|i| rational_of(point.theta.get(i, i))).collect::<Result<Vec<_>>>()?;
    let mut cal = Calibration {
        s: vec![Mat::identity(n)],
        delta,
        nu: vec![],
        theta: point.theta.clone(),
        eta: point.eta.clone(),
        unit: point.unit,
    };
    let dmat = Mat::diag(&cal.delta.iter().map(|&(p, q)| Scalar::rat(p, q)).collect::<Vec<_>>());
    let nu0 = point.theta.sub(&dmat);
    for i in 0..n {
        for j in 0..n {
            if cal.grade(i, j) != (0, 1) && nu0.get(i, j).abs_f64() > tol {
                return Err(Error::UnsupportedSpectrum(format!(
                    "theta has an entry ({i},{j}) mixing distinct diagonal values; pass a basis adapted to delta"
                )));
            }
        }
    }
    let mut pw = nu0.clone();
    for _ in 1..n {
        pw = pw.mul(&nu0);
    }
    if pw.max_abs() > tol {
        return Err(Error::UnsupportedSpectrum("off-diagonal part of theta is not nilpotent".into()));
    }
    if cal.theta_skew_defect()? > tol {
        return Err(Error::Config("theta is not skew with respect to eta".into()));
    }
    cal.nu.push(nu0.clone());
    let ad = |x: &Mat| nu0.mul(x).sub(&x.mul(&nu0));
    for k in 1..=order {
        let mut rhs = point.e_dot.mul(&cal.s[k - 1]);
        for l in 1..k {
            rhs = rhs.add(&cal.s[k - l].mul(&cal.nu[l]));
        }
        let resonant = (-(k as i64), 1);
        let nu_k = cal.project(&rhs, resonant).neg();
        // (k + grade) X + [nu0, X] = rhs off the resonant grade.
        let scale = |x: &Mat| {
            let mut m = x.clone();
            for i in 0..n {
                for j in 0..n {
                    let (p, q) = cal.grade(i, j);
                    if (p, q) == resonant {
                        m.set(i, j, Scalar::zero());
                    } else {
                        let w = Scalar::rat(q, k as i64 * q + p);
                        m.set(i, j, x.get(i, j) * &w);
                    }
                }
            }
            m
        };
        let mut term = scale(&rhs);
        let mut x = term.clone();
        for _ in 0..2 * n {
            term = scale(&ad(&term)).neg();
            if term.max_abs() <= tol {
                break;
            }
            x = x.add(&term);
        }
        let check = x.scale(&Scalar::int(k as i64)).add(&point.theta.mul(&x)).sub(&x.mul(&point.theta));
        let resid = check.sub(&rhs).sub(&nu_k).max_abs();
        if resid > tol.max(0.0) * (1.0 + rhs.max_abs()) * 1e3 {
            return Err(Error::Internal(format!("Levelt step {k} leaves residual {resid:.3e}")));
        }
        cal.s.push(x);
        cal.nu.push(nu_k);
    }
    Ok(cal)
}

/// Gauge by the unique C in G_delta with C_{[-l]}^T = (-1)^l C_{[-l]} that
/// makes S(-z)^T S(z) = 1. B_{[-l]} is read as the z^{-l} coefficient of
/// S(-z)^T S(z).
pub fn symplectic_gauge(cal: &Calibration) -> Result<(Calibration, Vec<Mat>)> {
    let n = cal.dim();
    let k = cal.order();
    let tol = cal.s.iter().map(tol_of).fold(0.0, f64::max);
    let b = cal.gram()?;
    for (l, m) in b.iter().enumerate() {
        let g = (-(l as i64), 1);
        let stray = m.sub(&cal.project(m, g)).max_abs();
        let expect = if l == 0 { cal.project(m, g).sub(&Mat::identity(n)).max_abs() } else { 0.0 };
        if stray.max(expect) > tol.max(1e-300) * 1e6 && stray.max(expect) > 0.0 {
            return Err(Error::Internal(format!(
                "S(-z)^T S(z) at z^-{l} is not of grade -{l} (residual {:.3e}); input is not a Levelt solution",
                stray.max(expect)
            )));
        }
    }
    let mut c = vec![Mat::identity(n)];
    let ct = |m: &Mat| cal.transpose(m);
    for l in 1..=k {
        let mut sum = Mat::zeros(n, n);
        for i in 0..l {
            let cti = ct(&c[i])?;
            for kk in 0..l {
                if i + kk > l {
                    continue;
                }
                let j = l - i - kk;
                if j >= l {
                    continue;
                }
                let t = cti.mul(&b[kk]).mul(&c[j]);
                sum = if i % 2 == 1 { sum.sub(&t) } else { sum.add(&t) };
            }
        }
        let cl = b[l].add(&sum).scale(&Scalar::rat(-1, 2));
        let sign = if l % 2 == 0 { Scalar::one() } else { Scalar::int(-1) };
        if ct(&cl)?.sub(&cl.scale(&sign)).max_abs() > tol * 1e6 {
            return Err(Error::Internal(format!("gauge coefficient C_[-{l}] violates its transpose constraint")));
        }
        c.push(cl);
    }
    let s_new: Vec<Mat> = (0..=k)
        .map(|m| {
            let mut acc = Mat::zeros(n, n);
            for l in 0..=m {
                acc = acc.add(&cal.s[m - l].mul(&c[l]));
            }
            acc
        })
        .collect();
    let mut csum = Mat::zeros(n, n);
    for m in &c {
        csum = csum.add(m);
    }
    let mut nsum = Mat::zeros(n, n);
    for m in &cal.nu {
        nsum = nsum.add(m);
    }
    let nu_t = csum.inverse()?.mul(&nsum).mul(&csum);
    let nu_new = (0..cal.nu.len()).map(|l| cal.project(&nu_t, (-(l as i64), 1))).collect();
    let out = Calibration { s: s_new, nu: nu_new, ..cal.clone() };
    Ok((out, c))
}

/// W_{kl} with sum W_{kl} z^-k w^-l = (S(z)^T S(w) - 1)/(z^-1 + w^-1),
/// indexed [k][l] for k + l < order.
pub fn w_matrices(cal: &Calibration, order: usize) -> Result<Vec<Vec<Mat>>> {
    if order > cal.order() {
        return Err(Error::Depth(format!("W through order {order} needs S_{order}")));
    }
    let n = cal.dim();
    let st: Vec<Mat> = cal.s.iter().map(|m| cal.transpose(m)).collect::<Result<_>>()?;
    let mut nab = vec![vec![Mat::zeros(n, n); order + 1]; order + 1];
    for (a, row) in nab.iter_mut().enumerate() {
        for (b, m) in row.iter_mut().enumerate() {
            *m = st[a].mul(&cal.s[b]);
            if a == 0 && b == 0 {
                *m = m.sub(&Mat::identity(n));
            }
        }
    }
    let (q, rem) = divide_by_sum(&nab, order);
    let tol = cal.s.iter().map(tol_of).fold(0.0, f64::max);
    if rem > tol * 1e6 && rem > 0.0 {
        return Err(Error::NotDivisible(format!("S is not symplectic, remainder {rem:.3e}")));
    }
    Ok(q)
}

/// (x, y) = x^t eta y for basis vectors: (X phi_b, phi_a) = (eta X)_{ab}.
fn pair(cal: &Calibration, x: &Mat, a: usize, b: usize) -> Scalar {
    cal.eta.mul(x).get(a, b).clone()
}

/// <phi_a psi^k, phi_b psi^l>_{0,2} = (W_{kl} phi_b, phi_a).
pub fn descendant_02(cal: &Calibration, w: &[Vec<Mat>], (a, k): (usize, usize), (b, l): (usize, usize)) -> Result<Scalar> {
    let m = w
        .get(k)
        .and_then(|r| r.get(l))
        .ok_or_else(|| Error::Depth(format!("W_{{{k},{l}}} not computed")))?;
    Ok(pair(cal, m, a, b))
}

/// <phi_a psi^k>_{0,1} = (S_{k+2} phi_a, 1).
pub fn descendant_01(cal: &Calibration, (a, k): (usize, usize)) -> Result<Scalar> {
    let s = cal.s.get(k + 2).ok_or_else(|| Error::Depth(format!("S_{} not computed", k + 2)))?;
    Ok(pair(cal, s, cal.unit, a))
}

/// < >_{0,0} = (1/2) ((S_2 S_1 - S_3) 1, 1).
pub fn descendant_00(cal: &Calibration) -> Result<Scalar> {
    if cal.order() < 3 {
        return Err(Error::Depth("the genus-0 primary potential needs S_3".into()));
    }
    let m = cal.s[2].mul(&cal.s[1]).sub(&cal.s[3]);
    Ok(&pair(cal, &m, cal.unit, cal.unit) * &Scalar::rat(1, 2))
}

/// Stable descendant <phi_{a_1} psi^{k_1} ...>_{g,n} from the ancestors at
/// the same point, inserting [S(psibar) phi_a psibar^k]_+ in every slot.
pub fn descendant_stable(cal: &Calibration, g: usize, ancestors: &Ancestors, request: &[(usize, usize)]) -> Result<Scalar> {
    let n = request.len();
    if 2 * g + n <= 2 {
        return Err(Error::Config(format!("({g},{n}) is not in the stable range")));
    }
    let kmax = 3 * g + n - 3;
    let dim = cal.dim();
    // Per slot: list of (b, kappa, weight).
    let mut options: Vec<Vec<(usize, usize, Scalar)>> = Vec::new();
    for &(a, k) in request {
        if a >= dim {
            return Err(Error::Index(format!("insertion index {a} out of range")));
        }
        let mut v = Vec::new();
        for l in 0..=k {
            let kappa = k - l;
            if kappa > kmax {
                continue;
            }
            let s = cal.s.get(l).ok_or_else(|| Error::Depth(format!("S_{l} not computed")))?;
            for b in 0..dim {
                let w = s.get(b, a);
                if !w.is_zero() {
                    v.push((b, kappa, w.clone()));
                }
            }
        }
        options.push(v);
    }
    let mut total = Scalar::zero();
    let mut stack: Vec<(usize, Vec<(usize, usize)>, Scalar)> = vec![(0, vec![], Scalar::one())];
    while let Some((slot, key, w)) = stack.pop() {
        if slot == n {
            let x = ancestors.get(&key).ok_or_else(|| {
                Error::Budget(format!("ancestor {key:?} at genus {g} is not in the store"))
            })?;
            total = &total + &(&w * x);
            continue;
        }
        for (b, kappa, c) in &options[slot] {
            let mut k2 = key.clone();
            k2.push((*b, *kappa));
            stack.push((slot + 1, k2, &w * c));
        }
    }
    Ok(total)
}

/// Requested descendants keyed by (g, insertions).
#[derive(Clone, Debug, Default)]
pub struct DescendantStore {
    pub values: BTreeMap<(usize, Vec<(usize, usize)>), Scalar>,
}

/// Evaluates each request: (0,0), (0,1), (0,2) by their closed forms, stable
/// ones from `ancestors[(g, n)]`. Genus one without insertions is separate
/// (see `genus_one_rank2`).
pub fn descendant_correlators(
    cal: &Calibration,
    ancestors: &BTreeMap<(usize, usize), Ancestors>,
    requests: &[(usize, Vec<(usize, usize)>)],
) -> Result<DescendantStore> {
    let need = requests
        .iter()
        .filter(|(g, r)| *g == 0 && r.len() == 2)
        .map(|(_, r)| r[0].1 + r[1].1 + 1)
        .max()
        .unwrap_or(0);
    let w = if need > 0 { w_matrices(cal, need)? } else { vec![] };
    let mut out = DescendantStore::default();
    for (g, req) in requests {
        let v = match (*g, req.len()) {
            (0, 0) => descendant_00(cal)?,
            (0, 1) => descendant_01(cal, req[0])?,
            (0, 2) => descendant_02(cal, &w, req[0], req[1])?,
            (1, 0) => return Err(Error::Config("use genus_one_rank2 for the genus-one potential".into())),
            (g, n) => {
                let anc = ancestors
                    .get(&(g, n))
                    .ok_or_else(|| Error::Budget(format!("no ancestors computed for ({g},{n})")))?;
                descendant_stable(cal, g, anc, req)?
            }
        };
        out.values.insert((*g, req.clone()), v);
    }
    Ok(out)
}

/// Genus-one potential of a rank-2 structure as L log(u1 - u2) + sum_i
/// (-1/24) log c_i°, from (1/2) int sum R_1^{ii} du_i - (1/24) sum log c_i(u,0)
/// with c_i = c_i° (u1-u2)^{r-1/2}. R_1^{ii} = alpha_i/(u1-u2) by homogeneity.
#[derive(Clone, Debug)]
pub struct GenusOne {
    pub log_delta: Scalar,
    pub log_constants: Vec<(Scalar, Scalar)>,
}

pub fn genus_one_rank2(r1: &Mat, u: &[Scalar; 2], r: (i64, i64), c_circ: &[Scalar; 2]) -> Result<GenusOne> {
    let d = &u[0] - &u[1];
    let a1 = r1.get(0, 0) * &d;
    let a2 = r1.get(1, 1) * &d;
    let tol = tol_of(r1).max(1e-300) * 1e6;
    if (&a1 + &a2).abs_f64() > tol && !(a1.is_exact() && (&a1 + &a2).is_zero()) {
        return Err(Error::Internal(format!("R_1 diagonal does not integrate on the straight path ({a1} vs {a2})")));
    }
    let rm = &Scalar::rat(r.0, r.1) - &Scalar::rat(1, 2);
    let l = &(&a1 * &Scalar::rat(1, 2)) - &(&rm * &Scalar::rat(1, 12));
    Ok(GenusOne {
        log_delta: l,
        log_constants: c_circ.iter().map(|c| (Scalar::rat(-1, 24), c.clone())).collect(),
    })
}

/// Psi_{ai} = -c_i eta^{ab} d u_i/d t_b for the case-1 family in flat
/// coordinates (t1, t2) = (s2, s1), with eta_{ab} = sum_i c_i^2 du_i/dt_a du_i/dt_b.
/// Returns (Psi, eta).
pub fn flat_frame_case1(fam: &Rank2Family, c: &[Scalar]) -> Result<(Mat, Mat)> {
    if fam.case != 1 {
        return Err(Error::Config("flat coordinates are installed for case 1 only".into()));
    }
    let q2 = fam.quarter.powi(2)?;
    let du = Mat::from_rows(vec![vec![Scalar::one(), Scalar::one()], vec![&Scalar::i() * &q2, -&(&Scalar::i() * &q2)]]);
    let mut eta = Mat::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = Scalar::zero();
            for (i, ci) in c.iter().enumerate() {
                acc = &acc + &(&(ci * ci) * &(du.get(a, i) * du.get(b, i)));
            }
            eta.set(a, b, acc);
        }
    }
    let m = eta.inverse()?.mul(&du);
    let mut psi = Mat::zeros(2, 2);
    for a in 0..2 {
        for (i, ci) in c.iter().enumerate() {
            psi.set(a, i, -&(ci * m.get(a, i)));
        }
    }
    Ok((psi, eta))
}

#[derive(Clone, Debug)]
pub struct EoDescReport {
    pub g: usize,
    pub n: usize,
    /// Through z^order in every slot.
    pub order: usize,
    pub deviation: f64,
    pub scale: f64,
}

/// Laplace transform of the cycle pullback of omega_{g,n} against the
/// ancestor expansion with insertions -J_{Gamma_i}(z) sum_k psibar^k z^{-k-1},
/// J_{Gamma_i} = Psi R(z) e_i (the e^{u_i/z} factor dropped on both sides).
/// Ancestors come from the local recursion driven by the Frobenius-side
/// P-data (R from stationary phase, c from phi).
pub fn check_eo_desc(
    cover: &BranchedCover,
    phi: &RationalFn,
    psi: &Mat,
    (g, n): (usize, usize),
    order: usize,
    depth: usize,
) -> Result<EoDescReport> {
    if 2 * g + n <= 2 {
        return Err(Error::Config(format!("({g},{n}) is not in the stable range")));
    }
    let kmax = 3 * g + n - 3;
    let rorder = (2 * depth + 2).max(order + kmax + 2);
    let need = (4 * depth + 3).max(2 * rorder + 2).max(2 * order + 16);
    let cover = if cover.charts.iter().any(|c| (c.order() as usize) < need) {
        cover.with_chart_order(need)?
    } else {
        cover.clone()
    };
    let sigma = r_sigma_stationary_phase(&cover, rorder)?;
    let c = c_vector(&cover, phi)?;
    let mut local = LocalRecursion::new(p_data_from_r(&sigma.r, &c, depth)?)?;
    let anc = ancestor_correlators(local.form(g, n)?, psi, &sigma.r)?;

    let mut eo = EoEngine::new(&cover, phi)?;
    let w = eo.correlator(g, n)?.clone();
    let pole = 6 * g as i64 + 2 * n as i64 - 3;
    let count = ((2 * order as i64 - 1 + pole) / 2 + 1) as usize;
    let pb = cycle_pullback(&eo, &w, count)?;

    // J-slot series: -(Psi R(z))_{b i} z^{-k-1}, known below z^{order+1}.
    let top = order as i64 + 1;
    let pr: Vec<Mat> = (0..rorder).map(|l| Ok(psi.mul(sigma.r.coeff(l)?))).collect::<Result<_>>()?;
    let slot = |b: usize, k: usize, i: usize| -> Multi {
        let mut m = Multi::zero(1);
        m.prec[0] = top;
        for (l, p) in pr.iter().enumerate() {
            let e = l as i64 - k as i64 - 1;
            if e < top {
                m.add_term(vec![e], -p.get(b, i));
            }
        }
        m
    };
    let lo = vec![-(kmax as i64) - 1; n];
    let hi = vec![top; n];
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (charts, f) in &pb.charts {
        let lhs = laplace_multi(f)?;
        let mut rhs = Multi::zero(n);
        for (key, x) in &anc {
            if x.is_zero() {
                continue;
            }
            let mut t = Multi::constant(n, x.clone());
            for (a, (&(b, k), &i)) in key.iter().zip(charts).enumerate() {
                t = t.mul(&slot(b, k, i).embed(&[a], n))?;
            }
            rhs.add_assign(&t)?;
        }
        worst = worst.max(lhs.max_diff_window(&rhs, &lo, &hi)?);
        scale = scale.max(rhs.max_abs());
    }
    Ok(EoDescReport { g, n, order, deviation: worst, scale })
}

/// S(z) as a matrix series in z^{-1}.
pub fn s_series(cal: &Calibration) -> MatrixSeries {
    MatrixSeries::new(cal.s.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Backend;
    use crate::spectral_curve::CoverOptions;

    #[test]
    fn scalar_recursion_gives_exponential() {
        let pt = FrobeniusPoint {
            eta: Mat::identity(1),
            theta: Mat::zeros(1, 1),
            e_dot: Mat::diag(&[Scalar::rat(3, 2)]),
            unit: 0,
        };
        let cal = levelt_solution(&pt, 5).unwrap();
        let mut fact: i64 = 1;
        for k in 0..=5usize {
            if k > 0 {
                fact *= k as i64;
            }
            let want = &Scalar::rat(3, 2).powi(k as i64).unwrap() / &Scalar::int(fact);
            assert_eq!(cal.s[k].get(0, 0), &want);
        }
    }

    #[test]
    fn a2_calibration_is_symplectic_without_gauge() {
        let pt = a2_point(&Scalar::rat(1, 3), &Scalar::rat(-2, 5));
        let cal = levelt_solution(&pt, 8).unwrap();
        assert!(cal.nu.iter().all(Mat::is_zero));
        assert_eq!(cal.theta_skew_defect().unwrap(), 0.0);
        assert_eq!(cal.symplectic_defect().unwrap(), 0.0);
        // t_a = (S_1 1, phi^a): with eta antidiagonal this is column 1 of S_1.
        assert_eq!(cal.s[1].get(0, 0), &Scalar::rat(1, 3));
        assert_eq!(cal.s[1].get(1, 0), &Scalar::rat(-2, 5));
        let (g, c) = symplectic_gauge(&cal).unwrap();
        assert!(c.iter().skip(1).all(Mat::is_zero));
        assert_eq!(g.s, cal.s);
    }

    #[test]
    fn p1_resonance_keeps_symplectic_levelt() {
        // At rank 2 the only grade -1 block is eta-symmetric, so the order-one
        // gauge equation forces C_[-1] = 0.
        let pt = p1_point(&Scalar::rat(1, 2), &Scalar::one());
        let cal = levelt_solution(&pt, 7).unwrap();
        assert!(!cal.nu[1].is_zero());
        assert!(cal.s[1].get(1, 0).is_zero());
        assert_eq!(cal.symplectic_defect().unwrap(), 0.0);
        let (g, c) = symplectic_gauge(&cal).unwrap();
        assert!(c.iter().skip(1).all(Mat::is_zero));
        assert_eq!(g.s, cal.s);
    }

    fn p2_point(t0: &Scalar, q: &Scalar) -> FrobeniusPoint {
        // basis 1, H, H^2; H^3 = q, E = t0 d_0 + 3 d_1
        let z = Scalar::zero();
        let three = Scalar::int(3);
        FrobeniusPoint {
            eta: Mat::from_rows(vec![
                vec![z.clone(), z.clone(), Scalar::one()],
                vec![z.clone(), Scalar::one(), z.clone()],
                vec![Scalar::one(), z.clone(), z.clone()],
            ]),
            theta: Mat::diag(&[Scalar::one(), Scalar::zero(), Scalar::int(-1)]),
            e_dot: Mat::from_rows(vec![
                vec![t0.clone(), z.clone(), &three * q],
                vec![three.clone(), t0.clone(), z.clone()],
                vec![z.clone(), three, t0.clone()],
            ]),
            unit: 0,
        }
    }

    #[test]
    fn gauge_repairs_a_rank3_levelt_solution() {
        let cal = levelt_solution(&p2_point(&Scalar::rat(1, 4), &Scalar::one()), 8).unwrap();
        // Move to another weak Levelt solution by C' = 1 + y A in G_delta,
        // A = E21 - E32 (eta-antisymmetric, grade -1).
        let mut a = Mat::zeros(3, 3);
        a.set(1, 0, Scalar::rat(2, 7));
        a.set(2, 1, Scalar::rat(-2, 7));
        let mut bent = cal.clone();
        for k in (1..=cal.order()).rev() {
            bent.s[k] = cal.s[k].add(&cal.s[k - 1].mul(&a));
        }
        let b1 = bent.gram().unwrap()[1].clone();
        assert!(!b1.is_zero());
        let (fixed, c) = symplectic_gauge(&bent).unwrap();
        assert_eq!(c[1], b1.scale(&Scalar::rat(-1, 2)));
        assert_eq!(bent.transpose(&c[1]).unwrap(), c[1].neg());
        assert_eq!(fixed.symplectic_defect().unwrap(), 0.0);
        let w = w_matrices(&fixed, 6).unwrap();
        assert!(w_matrices(&bent, 6).is_err());
        assert_eq!(w[0][0], fixed.s[1]);
    }

    #[test]
    fn unsupported_spectrum_is_rejected() {
        let mut pt = a2_point(&Scalar::zero(), &Scalar::zero());
        let be = Backend::float(30).unwrap();
        let x = be.from_c64(std::f64::consts::SQRT_2 / 10.0, 0.0).unwrap();
        pt.theta = Mat::diag(&[x.clone(), -&x]);
        assert!(matches!(levelt_solution(&pt, 3), Err(Error::UnsupportedSpectrum(_))));
    }

    #[test]
    fn unstable_cross_identities_exact() {
        for pt in [a2_point(&Scalar::rat(1, 3), &Scalar::rat(-2, 5)), p1_point(&Scalar::rat(1, 2), &Scalar::rat(3, 2))] {
            let cal = symplectic_gauge(&levelt_solution(&pt, 9).unwrap()).unwrap().0;
            let w = w_matrices(&cal, 7).unwrap();
            // W_{k0} = S_{k+1}^T
            for k in 0..6 {
                assert_eq!(w[k][0], cal.transpose(&cal.s[k + 1]).unwrap());
            }
            // W^T symmetry: (W_kl phi_b, phi_a) = (W_lk phi_a, phi_b)
            for k in 0..4 {
                for l in 0..3 {
                    for a in 0..2 {
                        for b in 0..2 {
                            assert_eq!(descendant_02(&cal, &w, (a, k), (b, l)).unwrap(), descendant_02(&cal, &w, (b, l), (a, k)).unwrap());
                        }
                    }
                }
            }
            // <phi_a psi^k>_{0,1} = <phi_a psi^{k+1}, 1>_{0,2}
            for k in 0..5 {
                for a in 0..2 {
                    let one = descendant_01(&cal, (a, k)).unwrap();
                    let two = descendant_02(&cal, &w, (a, k + 1), (cal.unit, 0)).unwrap();
                    assert_eq!(one, two);
                }
            }
            // < >_{0,0} = -(1/2) <psi - t>_{0,1}, t = S_1 1
            let mut via01 = descendant_01(&cal, (cal.unit, 1)).unwrap();
            for a in 0..2 {
                via01 = &via01 - &(cal.s[1].get(a, cal.unit) * &descendant_01(&cal, (a, 0)).unwrap());
            }
            assert_eq!(descendant_00(&cal).unwrap(), &via01 * &Scalar::rat(-1, 2));
        }
    }

    #[test]
    fn a2_primary_potential() {
        // F = t1^2 t2 / 2 - t2^4 / 24 for eta antidiagonal and phi_2^2 = -t2.
        let (t1, t2) = (Scalar::rat(1, 3), Scalar::rat(-2, 5));
        let cal = levelt_solution(&a2_point(&t1, &t2), 4).unwrap();
        let f = &(&(&t1 * &t1) * &t2) * &Scalar::rat(1, 2);
        let f = &f - &(&t2.powi(4).unwrap() * &Scalar::rat(1, 24));
        assert_eq!(descendant_00(&cal).unwrap(), f);
    }

    #[test]
    fn trivial_calibration_keeps_ancestors() {
        let cal = levelt_solution(
            &FrobeniusPoint { eta: Mat::identity(1), theta: Mat::zeros(1, 1), e_dot: Mat::zeros(1, 1), unit: 0 },
            6,
        )
        .unwrap();
        let mut anc = Ancestors::new();
        anc.insert(vec![(0, 1)], Scalar::rat(1, 24));
        anc.insert(vec![(0, 0)], Scalar::zero());
        let mut all = BTreeMap::new();
        all.insert((1, 1), anc);
        let st = descendant_correlators(&cal, &all, &[(1, vec![(0, 1)]), (1, vec![(0, 3)])]).unwrap();
        assert_eq!(st.values[&(1, vec![(0, 1)])], Scalar::rat(1, 24));
        assert!(st.values[&(1, vec![(0, 3)])].is_zero());
        assert!(matches!(descendant_correlators(&cal, &all, &[(2, vec![(0, 4)])]), Err(Error::Budget(_))));
    }

    #[test]
    fn airy_point_laplace_matches_kdv_dressing() {
        let x = RationalFn::poly(vec![Scalar::zero(), Scalar::zero(), Scalar::rat(1, 2)]);
        let cover = BranchedCover::new(x, &Backend::Exact, &CoverOptions { chart_order: 24, labels: None }).unwrap();
        let phi = RationalFn::poly(vec![Scalar::int(-1)]);
        let c = c_vector(&cover, &phi).unwrap();
        let psi = Mat::diag(&[-&c[0]]);
        for gn in [(0, 3), (1, 1)] {
            let rep = check_eo_desc(&cover, &phi, &psi, gn, 5, 3).unwrap();
            assert_eq!(rep.deviation, 0.0, "{gn:?}");
        }
    }

    fn a2_family() -> (Rank2Family, RationalFn) {
        use crate::frobenius_rank2::{build_family, Rank2Params};
        use crate::spectral_curve::{primary_differential, PrimaryKind};
        let be = Backend::float(60).unwrap();
        let s1 = be.from_c64(0.7, 0.3).unwrap();
        let s2 = be.from_c64(0.25, -0.5).unwrap();
        let fam = build_family(1, &Rank2Params::S { s1, s2 }, &be, 40).unwrap();
        let phi = primary_differential(&fam.cover, PrimaryKind::TypeI { pole: 0, a: 1 }).unwrap();
        (fam, phi)
    }

    #[test]
    fn a2_curve_laplace_matches_j_dressed_ancestors() {
        let (fam, phi) = a2_family();
        let c = c_vector(&fam.cover, &phi).unwrap();
        let (psi, eta) = flat_frame_case1(&fam, &c).unwrap();
        let gram = psi.transpose().mul(&eta).mul(&psi);
        assert!(gram.sub(&Mat::identity(2)).max_abs() < 1e-50);
        for gn in [(1, 1), (0, 3)] {
            let rep = check_eo_desc(&fam.cover, &phi, &psi, gn, 5, 4).unwrap();
            assert!(rep.deviation < 1e-20, "{gn:?}: {:e}", rep.deviation);
            assert!(rep.scale > 1e-3);
        }
        // phi (1 + eps/(t - 7/3)) is not a primitive form: the check must fail.
        let be = fam.cover.backend;
        let q = RationalFn::pole(&be.rat(7, 3), 1, Scalar::one());
        let bad = crate::local_recursion::perturbed_form(&phi, &q, &be.rat(1, 10));
        let cb = c_vector(&fam.cover, &bad).unwrap();
        let (pb, _) = flat_frame_case1(&fam, &cb).unwrap();
        let rep = check_eo_desc(&fam.cover, &bad, &pb, (1, 1), 5, 4).unwrap();
        assert!(rep.deviation > 1e-5, "{:e}", rep.deviation);
    }

    #[test]
    fn a2_calibration_on_float_data() {
        let (fam, _) = a2_family();
        let cal = levelt_solution(&a2_point(&fam.s2, &fam.s1), 8).unwrap();
        let (g, _) = symplectic_gauge(&cal).unwrap();
        assert!(g.symplectic_defect().unwrap() < 1e-25);
    }

    #[test]
    fn a2_genus_one_potential_vanishes() {
        let (fam, phi) = a2_family();
        let sigma = r_sigma_stationary_phase(&fam.cover, 2).unwrap();
        let c = c_vector(&fam.cover, &phi).unwrap();
        let circ = crate::frobenius_rank2::c_scaling_at(&fam.u, (1, 3), 1).unwrap();
        let g1 = genus_one_rank2(sigma.r.coeff(1).unwrap(), &fam.u, (1, 3), &circ).unwrap();
        // G = 0 for A_2: the R_1 term cancels the -(1/24) log c_i scaling.
        assert!(g1.log_delta.abs_f64() < 1e-40, "{}", g1.log_delta);
        assert_eq!(g1.log_constants.len(), 2);
        // c(phi) is proportional to the scaling solution with exponent r - 1/2 = -1/6.
        let ratio = &c[0] / &c[1];
        assert!((&ratio - &(&circ[0] / &circ[1])).abs_f64() < 1e-40);
    }
}
