//! Genus-0 branched covers x: P^1 -> P^1, Morse charts at the simple
//! ramification points, Bergman-kernel expansions and the distinguished
//! differentials (good basis, primary differentials of types I-III).
//!
//! A 1-form r(t) dt on the cover is stored as the rational function r.
//! Chart-local data is always written in the Morse coordinate s = t_i, so a
//! local form is a Series in s giving the coefficient of ds.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::roots;
use crate::scalar::{Backend, Scalar};
use crate::series::{Series, EXACT};

#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    pub num: Vec<Scalar>,
    pub den: Vec<Scalar>,
}

fn trim(mut v: Vec<Scalar>) -> Vec<Scalar> {
    while matches!(v.last(), Some(c) if c.is_zero()) {
        v.pop();
    }
    v
}

fn small(x: &Scalar, scale: f64, be: &Backend) -> bool {
    x.is_zero() || (!x.is_exact() && x.abs_f64() <= scale.max(1.0) * be.tolerance().sqrt())
}

fn max_abs(v: &[Scalar]) -> f64 {
    v.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
}

impl RationalFn {
    pub fn new(num: Vec<Scalar>, den: Vec<Scalar>) -> RationalFn {
        let den = trim(den);
        assert!(!den.is_empty(), "zero denominator");
        RationalFn { num: trim(num), den }
    }

    pub fn poly(num: Vec<Scalar>) -> RationalFn {
        RationalFn::new(num, vec![Scalar::one()])
    }

    pub fn zero() -> RationalFn {
        RationalFn::poly(vec![])
    }

    /// c/(t-b)^k.
    pub fn pole(b: &Scalar, k: u32, c: Scalar) -> RationalFn {
        let lin = vec![-b, Scalar::one()];
        let mut den = vec![Scalar::one()];
        for _ in 0..k {
            den = roots::mul(&den, &lin);
        }
        RationalFn::new(vec![c], den)
    }

    pub fn lift(&self, be: &Backend) -> RationalFn {
        RationalFn {
            num: self.num.iter().map(|c| be.lift(c)).collect(),
            den: self.den.iter().map(|c| be.lift(c)).collect(),
        }
    }

    pub fn eval(&self, t: &Scalar) -> Result<Scalar> {
        let d = roots::eval(&self.den, t);
        Ok(&roots::eval(&self.num, t) * &d.inv()?)
    }

    pub fn derivative(&self) -> RationalFn {
        let a = roots::mul(&roots::derivative(&self.num), &self.den);
        let b = roots::mul(&self.num, &roots::derivative(&self.den));
        RationalFn::new(roots::sub(&a, &b), roots::mul(&self.den, &self.den))
    }

    pub fn add(&self, o: &RationalFn) -> RationalFn {
        if self.den == o.den {
            let n = roots::sub(&self.num, &o.num.iter().map(|c| -c).collect::<Vec<_>>());
            return RationalFn::new(n, self.den.clone());
        }
        let a = roots::mul(&self.num, &o.den);
        let b = roots::mul(&o.num, &self.den);
        let neg_b: Vec<Scalar> = b.iter().map(|c| -c).collect();
        RationalFn::new(roots::sub(&a, &neg_b), roots::mul(&self.den, &o.den))
    }

    pub fn scale(&self, c: &Scalar) -> RationalFn {
        RationalFn::new(self.num.iter().map(|x| x * c).collect(), self.den.clone())
    }

    pub fn mul(&self, o: &RationalFn) -> RationalFn {
        RationalFn::new(roots::mul(&self.num, &o.num), roots::mul(&self.den, &o.den))
    }

    fn deg(v: &[Scalar]) -> i64 {
        roots::degree(v).map_or(-1, |d| d as i64)
    }

    /// Laurent expansion of r(p + w) in w, known below w^prec. Leading
    /// coefficients that vanish to working precision are dropped.
    pub fn laurent_at(&self, p: &Scalar, prec: i64, be: &Backend) -> Result<Series> {
        let n = roots::taylor_shift(&self.num, p);
        let d = roots::taylor_shift(&self.den, p);
        let nscale = max_abs(&self.num);
        let dscale = max_abs(&self.den);
        let vn = n.iter().position(|c| !small(c, nscale, be)).unwrap_or(n.len()) as i64;
        let vd = d.iter().position(|c| !small(c, dscale, be)).ok_or_else(|| Error::Internal("zero denominator".into()))? as i64;
        let len = (prec - (vn - vd)).max(1) + 1;
        let ns = Series::new("w", 1, vn, n.into_iter().skip(vn as usize).collect(), EXACT).truncate(vn + len);
        let ds = Series::new("w", 1, vd, d.into_iter().skip(vd as usize).collect(), EXACT).truncate(vd + len);
        Ok(ns.div(&ds)?.truncate(prec))
    }

    /// Expansion of r(1/eta) in eta, known below eta^prec.
    pub fn laurent_at_infinity(&self, prec: i64) -> Result<Series> {
        let dn = RationalFn::deg(&self.num);
        let dd = RationalFn::deg(&self.den);
        if dn < 0 {
            return Ok(Series::zero("eta", prec));
        }
        let rn: Vec<Scalar> = self.num[..=dn as usize].iter().rev().cloned().collect();
        let rd: Vec<Scalar> = self.den[..=dd as usize].iter().rev().cloned().collect();
        let shift = dd - dn;
        let len = prec - shift + 1;
        let ns = Series::new("eta", 1, 0, rn, EXACT).truncate(len.max(1));
        let ds = Series::new("eta", 1, 0, rd, EXACT).truncate(len.max(1));
        Ok(ns.div(&ds)?.shift(shift).truncate(prec))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolePlace {
    Infinity,
    Finite(Scalar),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pole {
    pub place: PolePlace,
    pub order: u32,
}

/// Local Morse coordinate at a ramification point: x(p + tau(s)) = u + s^2/2.
#[derive(Clone, Debug)]
pub struct MorseChart {
    pub index: usize,
    pub p: Scalar,
    pub u: Scalar,
    /// Leading coefficient of s as a function of w = t - p.
    pub kappa: Scalar,
    /// w = t - p as a series in s.
    pub tau: Series,
    /// s as a series in w.
    pub s_of_w: Series,
    /// Whether the sign of s came from an explicit override.
    pub sign_override: bool,
}

impl MorseChart {
    pub fn order(&self) -> i64 {
        self.tau.prec
    }

    /// tau(-s).
    pub fn tau_reflected(&self) -> Series {
        self.tau.reflect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoverOptions {
    /// Number of terms kept in each Morse chart.
    pub chart_order: usize,
    /// Prescribed (p_i, kappa_i) labelling; replaces the (Re u, Im u) sort
    /// and fixes the sign of each t_i.
    pub labels: Option<Vec<(Scalar, Scalar)>>,
}

#[derive(Clone, Debug)]
pub struct BranchedCover {
    pub x: RationalFn,
    pub backend: Backend,
    pub poles: Vec<Pole>,
    pub charts: Vec<MorseChart>,
}

#[derive(Clone, Debug)]
pub struct RamificationData {
    pub points: Vec<Scalar>,
    pub values: Vec<Scalar>,
    pub poles: Vec<Pole>,
}

fn pole_list(x: &RationalFn, be: &Backend) -> Result<Vec<Pole>> {
    let dn = RationalFn::deg(&x.num);
    let dd = RationalFn::deg(&x.den);
    let mut poles = Vec::new();
    if dn > dd {
        poles.push(Pole { place: PolePlace::Infinity, order: (dn - dd) as u32 });
    }
    let rs = roots::roots(&x.den, be)?;
    let mut seen: Vec<(Scalar, u32)> = Vec::new();
    for r in rs {
        if let Some(e) = seen.iter_mut().find(|(q, _)| (&r - q).abs_f64() <= be.tolerance()) {
            e.1 += 1;
        } else {
            seen.push((r, 1));
        }
    }
    for (r, m) in seen {
        if small(&roots::eval(&x.num, &r), max_abs(&x.num), be) {
            return Err(Error::NonGeneric(format!("numerator and denominator share the root {r}")));
        }
        poles.push(Pole { place: PolePlace::Finite(r), order: m });
    }
    Ok(poles)
}

impl BranchedCover {
    pub fn new(x: RationalFn, be: &Backend, opts: &CoverOptions) -> Result<BranchedCover> {
        let x = if be.is_exact() { x } else { x.lift(be) };
        if x.num.iter().chain(&x.den).any(|c| !c.is_exact()) && be.is_exact() {
            return Err(Error::NotRepresentable("inexact cover coefficients on the exact backend".into()));
        }
        let poles = pole_list(&x, be)?;
        let d = poles.len() as i64;
        let msum: i64 = poles.iter().map(|p| p.order as i64).sum();
        let n_expected = -2 + d + msum;
        let dx = x.derivative();
        let w = &dx.num;
        let wscale = max_abs(w);
        let pts: Vec<(Scalar, Option<Scalar>)> = match &opts.labels {
            Some(l) => {
                for (p, _) in l {
                    if !small(&roots::eval(w, p), wscale, be) {
                        return Err(Error::Config(format!("labelled point {p} is not a zero of dx")));
                    }
                }
                l.iter().map(|(p, k)| (p.clone(), Some(k.clone()))).collect()
            }
            None => roots::roots(w, be)?
                .into_iter()
                .filter(|r| !small(&roots::eval(&x.den, r), max_abs(&x.den), be))
                .map(|r| (r, None))
                .collect(),
        };
        if pts.len() as i64 != n_expected {
            return Err(Error::NonGeneric(format!(
                "found {} simple ramification points, Riemann-Hurwitz requires {n_expected}",
                pts.len()
            )));
        }
        let ddx = roots::derivative(w);
        let mut with_u = Vec::new();
        for (p, k) in pts {
            if small(&roots::eval(&ddx, &p), max_abs(&ddx), be) {
                return Err(Error::NonGeneric(format!("higher ramification at t = {p}")));
            }
            let u = x.eval(&p)?;
            with_u.push((p, u, k));
        }
        for i in 0..with_u.len() {
            for j in 0..i {
                if small(&(&with_u[i].1 - &with_u[j].1), 1.0, be) {
                    return Err(Error::NonGeneric(format!(
                        "coincident critical values u = {} at t = {} and t = {}",
                        with_u[i].1, with_u[i].0, with_u[j].0
                    )));
                }
            }
        }
        if opts.labels.is_none() {
            with_u.sort_by(|a, b| {
                let (ar, ai) = a.1.to_c64();
                let (br, bi) = b.1.to_c64();
                ar.total_cmp(&br).then(ai.total_cmp(&bi))
            });
        }
        let order = if opts.chart_order == 0 { 24 } else { opts.chart_order };
        let mut charts = Vec::new();
        for (i, (p, u, k)) in with_u.into_iter().enumerate() {
            charts.push(morse_chart(&x, i, &p, &u, k.as_ref(), order, be)?);
        }
        Ok(BranchedCover { x, backend: *be, poles, charts })
    }

    pub fn n(&self) -> usize {
        self.charts.len()
    }

    pub fn chart(&self, i: usize) -> Result<&MorseChart> {
        self.charts.get(i).ok_or_else(|| Error::Index(format!("chart {i} of {}", self.n())))
    }

    pub fn points(&self) -> Vec<Scalar> {
        self.charts.iter().map(|c| c.p.clone()).collect()
    }

    pub fn values(&self) -> Vec<Scalar> {
        self.charts.iter().map(|c| c.u.clone()).collect()
    }

    /// Same cover with every chart recomputed to `order` terms.
    pub fn with_chart_order(&self, order: usize) -> Result<BranchedCover> {
        let mut c = self.clone();
        for ch in c.charts.iter_mut() {
            let k = if ch.sign_override { Some(ch.kappa.clone()) } else { None };
            let mut fresh = morse_chart(&self.x, ch.index, &ch.p, &ch.u, k.as_ref(), order, &self.backend)?;
            if !ch.sign_override && (&fresh.kappa - &ch.kappa).abs_f64() > ch.kappa.abs_f64() * 1e-6 {
                fresh = flip_chart(fresh);
            }
            *ch = fresh;
        }
        Ok(c)
    }

    /// Expansion of the 1-form r(t) dt at chart i: coefficient of ds.
    pub fn chart_expansion(&self, form: &RationalFn, i: usize, prec: i64) -> Result<Series> {
        let ch = self.chart(i)?;
        if prec > ch.order() {
            return Err(Error::Depth(format!("chart {i} has {} terms, {} requested", ch.order(), prec)));
        }
        let f = form.laurent_at(&ch.p, prec + 2, &self.backend)?;
        let pole = (-f.order()).max(0);
        let tau = ch.tau.truncate(prec + 2 * pole + 1);
        let fs = f.rename("s").compose_laurent(&tau)?;
        Ok(fs.mul(&tau.derivative()?)?.truncate(prec))
    }

    /// Largest coefficient of x(p + tau(s)) - u - s^2/2 over the chart.
    pub fn morse_defect(&self, i: usize) -> Result<f64> {
        let ch = self.chart(i)?;
        let k = ch.order();
        let xs = self.x.laurent_at(&ch.p, k + 1, &self.backend)?.rename("s").compose(&ch.tau)?;
        let target = Series::poly("s", vec![ch.u.clone(), Scalar::zero(), Scalar::rat(1, 2)]);
        xs.max_diff(&target, xs.prec)
    }
}

fn flip_chart(mut c: MorseChart) -> MorseChart {
    c.kappa = -&c.kappa;
    c.s_of_w = c.s_of_w.neg();
    c.tau = c.tau.reflect();
    c
}

fn morse_chart(
    x: &RationalFn,
    index: usize,
    p: &Scalar,
    u: &Scalar,
    kappa: Option<&Scalar>,
    order: usize,
    be: &Backend,
) -> Result<MorseChart> {
    let k = order as i64;
    let xs = x.laurent_at(p, k + 2, be)?;
    let two = Scalar::int(2);
    let q = xs.drop_below(2).scale(&two);
    if q.order() != 2 {
        return Err(Error::ChartUndefined(format!("ramification at t = {p} is not simple")));
    }
    let mut s_of_w = q.sqrt()?;
    let lead = s_of_w.coeff(1)?;
    let mut sign_override = false;
    if let Some(kp) = kappa {
        sign_override = true;
        let tol = lead.abs_f64() * 1e-8;
        if (&lead - kp).abs_f64() <= tol {
        } else if (&lead + kp).abs_f64() <= tol {
            s_of_w = s_of_w.neg();
        } else {
            return Err(Error::Config(format!("prescribed t_{} leading coefficient {kp} does not square to {}", index + 1, &lead * &lead)));
        }
    }
    let kappa = s_of_w.coeff(1)?;
    let tau = s_of_w.reversion()?.rename("s");
    Ok(MorseChart { index, p: p.clone(), u: u.clone(), kappa, tau, s_of_w, sign_override })
}

pub fn ramification_data(cover: &BranchedCover) -> RamificationData {
    RamificationData { points: cover.points(), values: cover.values(), poles: cover.poles.clone() }
}

/// Morse chart i recomputed to `order` terms (same sign convention).
pub fn morse_coordinate(cover: &BranchedCover, i: usize, order: usize) -> Result<MorseChart> {
    Ok(cover.with_chart_order(order)?.charts[i].clone())
}

/// Truncated bivariate power series, total degree below `deg`.
#[derive(Clone, Debug)]
struct Bi {
    deg: usize,
    c: Vec<Vec<Scalar>>,
}

impl Bi {
    fn zero(deg: usize) -> Bi {
        Bi { deg, c: (0..deg).map(|a| vec![Scalar::zero(); deg - a]).collect() }
    }

    fn mul(&self, o: &Bi) -> Bi {
        let mut r = Bi::zero(self.deg);
        for a in 0..self.deg {
            for b in 0..self.deg - a {
                let x = &self.c[a][b];
                if x.is_zero() {
                    continue;
                }
                for c in 0..self.deg - a - b {
                    for d in 0..self.deg - a - b - c {
                        let y = &o.c[c][d];
                        if !y.is_zero() {
                            r.c[a + c][b + d] = &r.c[a + c][b + d] + &(x * y);
                        }
                    }
                }
            }
        }
        r
    }

    /// log(1 + X) for X without constant term.
    fn log1p(&self) -> Bi {
        let mut out = Bi::zero(self.deg);
        let mut pw = self.clone();
        for k in 1..self.deg {
            let w = Scalar::rat(if k % 2 == 1 { 1 } else { -1 }, k as i64);
            for a in 0..self.deg {
                for b in 0..self.deg - a {
                    out.c[a][b] = &out.c[a][b] + &(&pw.c[a][b] * &w);
                }
            }
            if k + 1 < self.deg {
                pw = pw.mul(self);
            }
        }
        out
    }
}

/// Regular-part coefficients of the Bergman kernel in Morse coordinates,
/// B(p,q) = [delta_ij/(s-s')^2 + sum B^{ij}_{mn} s^m s'^n] ds ds'.
#[derive(Clone, Debug)]
pub struct BergmanExpansion {
    pub n: usize,
    /// Degree bound: coefficients with m + n <= 2 cutoff are stored.
    pub cutoff: usize,
    coeffs: Vec<Vec<Vec<Vec<Scalar>>>>,
}

impl BergmanExpansion {
    pub fn get(&self, i: usize, j: usize, m: usize, n: usize) -> Result<&Scalar> {
        if m + n > 2 * self.cutoff {
            return Err(Error::Depth(format!("B_{{{m},{n}}} beyond cutoff {}", self.cutoff)));
        }
        Ok(&self.coeffs[i][j][m][n])
    }

    /// Matrix (B_{mn})^{ij}.
    pub fn matrix(&self, m: usize, n: usize) -> Result<Mat> {
        let mut out = Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(i, j, m, n)?.clone());
            }
        }
        Ok(out)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let d = 2 * self.cutoff;
        for i in 0..self.n {
            for j in 0..self.n {
                for m in 0..=d {
                    for n in 0..=d - m {
                        worst = worst.max((&self.coeffs[i][j][m][n] - &self.coeffs[j][i][n][m]).abs_f64());
                    }
                }
            }
        }
        worst
    }
}

pub fn bergman_coeffs(cover: &BranchedCover, cutoff: usize) -> Result<BergmanExpansion> {
    let deg = 2 * cutoff + 3;
    let n = cover.n();
    for ch in &cover.charts {
        if ch.order() < deg as i64 {
            return Err(Error::Depth(format!(
                "Bergman cutoff {cutoff} needs charts of order {deg}, have {}",
                ch.order()
            )));
        }
    }
    let tau: Vec<Vec<Scalar>> = cover
        .charts
        .iter()
        .map(|c| (0..deg as i64 + 1).map(|k| c.tau.coeff_or_zero(k)).collect())
        .collect();
    let mut coeffs = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut q = Bi::zero(deg);
            if i == j {
                // (tau(s) - tau(s'))/(s - s') = sum_k tau_k sum_{a+b=k-1} s^a s'^b
                for k in 1..=deg {
                    for a in 0..k {
                        let b = k - 1 - a;
                        if a + b < deg {
                            q.c[a][b] = &q.c[a][b] + &tau[i][k];
                        }
                    }
                }
            } else {
                q.c[0][0] = &cover.charts[i].p - &cover.charts[j].p;
                for k in 1..deg {
                    q.c[k][0] = &q.c[k][0] + &tau[i][k];
                    q.c[0][k] = &q.c[0][k] - &tau[j][k];
                }
            }
            let q0 = q.c[0][0].inv()?;
            let mut x = Bi::zero(deg);
            for a in 0..deg {
                for b in 0..deg - a {
                    if a + b > 0 {
                        x.c[a][b] = &q.c[a][b] * &q0;
                    }
                }
            }
            let l = x.log1p();
            let top = 2 * cutoff;
            let mut b = vec![vec![Scalar::zero(); top + 1]; top + 1];
            for m in 0..=top {
                for nn in 0..=top - m {
                    b[m][nn] = &l.c[m + 1][nn + 1] * &Scalar::int(((m + 1) * (nn + 1)) as i64);
                }
            }
            coeffs[i][j] = b;
        }
    }
    Ok(BergmanExpansion { n, cutoff, coeffs })
}

/// beta_{ai} = B^{ai}_{00} off the diagonal.
pub fn beta_matrix(b: &BergmanExpansion) -> Mat {
    let mut m = Mat::zeros(b.n, b.n);
    for a in 0..b.n {
        for i in 0..b.n {
            if a != i {
                m.set(a, i, b.coeffs[a][i][0][0].clone());
            }
        }
    }
    m
}

/// The good-basis form omega_i = res_{q=p_i} t_i(q)^{-1} omega_p(q) dx(p),
/// with omega_p(q) the third-kind form with poles at p and the first pole.
pub fn good_basis_form(cover: &BranchedCover, i: usize) -> Result<RationalFn> {
    let ch = cover.chart(i)?;
    let dx = cover.x.derivative();
    let kinv = ch.kappa.inv()?;
    // dx(p)/(kappa (p_i - p)) with the removable zero of dx at p_i divided out.
    let num: Vec<Scalar> = roots::deflate(&dx.num, &ch.p).iter().map(|c| -(c * &kinv)).collect();
    let mut form = RationalFn::new(num, dx.den.clone());
    if let PolePlace::Finite(b1) = &cover.poles[0].place {
        let c = (&(&ch.p - b1) * &ch.kappa).inv()?;
        form = form.add(&dx.scale(&-c));
    }
    Ok(form)
}

/// Good-basis form expanded at chart j.
pub fn good_basis_local(cover: &BranchedCover, i: usize, j: usize, prec: i64) -> Result<Series> {
    cover.chart_expansion(&good_basis_form(cover, i)?, j, prec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimaryKind {
    /// phi_{t_{i,a}}, 1 <= a <= m_i - 1 (pole index 0-based).
    TypeI { pole: usize, a: u32 },
    /// phi_{v_i}, i >= 2 (0-based pole >= 1).
    TypeII { pole: usize },
    /// phi_{w_i}, i >= 2 (0-based pole >= 1).
    TypeIII { pole: usize },
}

/// Local expansion of x at a pole in eta (t = 1/eta or t = b + eta).
fn x_at_pole(cover: &BranchedCover, pole: &Pole, prec: i64) -> Result<Series> {
    match &pole.place {
        PolePlace::Infinity => Ok(cover.x.laurent_at_infinity(prec)?.rename("eta")),
        PolePlace::Finite(b) => Ok(cover.x.laurent_at(b, prec, &cover.backend)?.rename("eta")),
    }
}

/// sum_k (k+1) g_k [dp/(p-b)^{k+2}] or, at infinity, -sum_k (k+1) g_k p^k dp,
/// with g_k = [eta^{-k-1}] G.
fn residue_against_bergman(place: &PolePlace, g: &Series, kmax: u32) -> Result<RationalFn> {
    let mut out = RationalFn::zero();
    for k in 0..kmax {
        let gk = g.coeff(-(k as i64) - 1)?;
        if gk.is_zero() {
            continue;
        }
        let w = &gk * &Scalar::int(k as i64 + 1);
        let term = match place {
            PolePlace::Infinity => {
                let mut num = vec![Scalar::zero(); k as usize + 1];
                num[k as usize] = -w;
                RationalFn::poly(num)
            }
            PolePlace::Finite(b) => RationalFn::pole(b, k + 2, w),
        };
        out = out.add(&term);
    }
    Ok(out)
}

pub fn primary_differential(cover: &BranchedCover, kind: PrimaryKind) -> Result<RationalFn> {
    let d = cover.poles.len();
    let pole_of = |i: usize| -> Result<&Pole> {
        cover.poles.get(i).ok_or_else(|| Error::Index(format!("pole index {} out of range 1..={d}", i + 1)))
    };
    match kind {
        PrimaryKind::TypeI { pole, a } => {
            let pl = pole_of(pole)?;
            let m = pl.order;
            if a < 1 || a >= m {
                return Err(Error::Index(format!("type I needs 1 <= a <= m_i - 1 = {}, got a = {a}", m as i64 - 1)));
            }
            let fx = x_at_pole(cover, pl, 2)?;
            let g = fx.pow_rat(a as i64, m as i64)?;
            let r = residue_against_bergman(&pl.place, &g, a)?;
            Ok(r.scale(&Scalar::rat(1, a as i64)))
        }
        PrimaryKind::TypeII { pole } => {
            if d == 1 || pole == 0 {
                return Err(Error::Index("type II needs a pole index 2 <= i <= d".into()));
            }
            let pl = pole_of(pole)?;
            let fx = x_at_pole(cover, pl, 1)?;
            residue_against_bergman(&pl.place, &fx, pl.order)
        }
        PrimaryKind::TypeIII { pole } => {
            if d == 1 || pole == 0 {
                return Err(Error::Index("type III needs a pole index 2 <= i <= d".into()));
            }
            let pl = pole_of(pole)?;
            let mut out = RationalFn::zero();
            if let PolePlace::Finite(b) = &pl.place {
                out = out.add(&RationalFn::pole(b, 1, Scalar::one()));
            }
            if let PolePlace::Finite(b1) = &cover.poles[0].place {
                out = out.add(&RationalFn::pole(b1, 1, Scalar::int(-1)));
            }
            Ok(out)
        }
    }
}

/// c_a = -res_{p_a} phi / t_a.
pub fn c_vector(cover: &BranchedCover, phi: &RationalFn) -> Result<Vec<Scalar>> {
    (0..cover.n())
        .map(|a| {
            let e = cover.chart_expansion(phi, a, 2)?;
            if e.order() < 0 {
                return Err(Error::NotHolomorphic(format!("form has a pole at ramification point {}", a + 1)));
            }
            Ok(-e.coeff(0)?)
        })
        .collect()
}

/// int_{-s}^{s} f(s') ds' for the local form f ds, as a series in s.
pub fn vanishing_cycle_integral_s(f: &Series) -> Result<Series> {
    let mut out = Vec::new();
    let lo = f.start;
    for k in lo..f.end() {
        let c = f.coeff_or_zero(k);
        if k == -1 && !c.is_zero() {
            return Err(Error::Logarithmic("s^-1 ds is not integrable over a vanishing cycle".into()));
        }
        if k.rem_euclid(2) == 0 && !c.is_zero() {
            out.push((k + 1, &(&c * &Scalar::int(2)) / &Scalar::int(k + 1)));
        }
    }
    let start = out.first().map_or(0, |x| x.0);
    let mut coeffs = Vec::new();
    for (idx, c) in out {
        while (start + coeffs.len() as i64) < idx {
            coeffs.push(Scalar::zero());
        }
        coeffs.push(c);
    }
    Ok(Series::new("s", 1, start, coeffs, f.prec.saturating_add(1)))
}

/// Same integral written in (lambda - u)^{1/2}: t^m dt -> 2 (2(lambda-u))^{(m+1)/2}/(m+1)
/// for m even. Needs sqrt 2, so bigfloat only.
pub fn vanishing_cycle_integral(f: &Series, be: &Backend) -> Result<Series> {
    let r2 = be.sqrt2()?;
    let s = vanishing_cycle_integral_s(f)?;
    let mut coeffs = Vec::new();
    for k in s.start..s.end() {
        // s^k with k odd: s^k = 2^{k/2} (lambda-u)^{k/2}
        let c = s.coeff_or_zero(k);
        let w = &r2.powi(k)? * &c;
        coeffs.push(w);
    }
    Ok(Series::new("lambda-u", 2, s.start, coeffs, s.prec))
}
