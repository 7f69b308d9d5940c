//! R-matrices: R_Sigma from Bergman data, R_omega from primitive-form data,
//! their product, symplectic and Eynard-identity checks, polynomiality.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{Mat, MatrixSeries};
use crate::scalar::{double_factorial_odd, Backend, Scalar};
use crate::spectral_curve::{good_basis_local, BergmanExpansion, BranchedCover};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Sigma,
    Omega,
    Product,
}

#[derive(Clone, Debug)]
pub struct RData {
    pub r: MatrixSeries,
    pub provenance: Provenance,
    pub u: Vec<Scalar>,
}

impl RData {
    pub fn new(r: MatrixSeries, provenance: Provenance, u: Vec<Scalar>) -> Result<RData> {
        if !r.identity_constant() {
            return Err(Error::Internal("R-matrix series must start with the identity".into()));
        }
        Ok(RData { r, provenance, u })
    }
}

/// (R_Sigma)_k = (-1)^{k-1} (2k-3)!! (B_{2k-2,0})^T for k = 1..=order.
pub fn r_sigma_from_bergman(b: &BergmanExpansion, order: usize, u: Vec<Scalar>) -> Result<RData> {
    if order >= 1 && 2 * (order - 1) > 2 * b.cutoff {
        return Err(Error::Depth(format!("R_Sigma to z^{order} needs Bergman cutoff {}", order - 1)));
    }
    let mut coeffs = vec![Mat::identity(b.n)];
    for k in 1..=order {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        let w = &double_factorial_odd(k as i64 - 1) * &Scalar::int(sign);
        coeffs.push(b.matrix(2 * k - 2, 0)?.transpose().scale(&w));
    }
    RData::new(MatrixSeries::new(coeffs), Provenance::Sigma, u)
}

/// Independent route: stationary phase of the good basis,
/// [R_Sigma(z)]^a_i = -sum_k w^{(a,i)}_{2k} (2k-1)!! (-z)^k with w^{(a,i)}
/// the expansion of omega_a in the ds_i frame.
pub fn r_sigma_stationary_phase(cover: &BranchedCover, order: usize) -> Result<RData> {
    let n = cover.n();
    let mut coeffs = vec![Mat::zeros(n, n); order + 1];
    for a in 0..n {
        for i in 0..n {
            let w = good_basis_local(cover, a, i, 2 * order as i64 + 1)?;
            for (k, m) in coeffs.iter_mut().enumerate() {
                let sign = if k % 2 == 0 { -1 } else { 1 };
                let c = &(&w.coeff(2 * k as i64)? * &double_factorial_odd(k as i64)) * &Scalar::int(sign);
                m.set(a, i, c);
            }
        }
    }
    // The leading term is the identity up to rounding; install it exactly.
    let id = Mat::identity(n);
    if coeffs[0].sub(&id).max_abs() > cover.backend.tolerance().sqrt() {
        return Err(Error::Internal("good basis is not normalised at its own chart".into()));
    }
    coeffs[0] = id;
    RData::new(MatrixSeries::new(coeffs), Provenance::Sigma, cover.values())
}

/// K([omega_a],[omega_b]) / z = sum_i [R(z)]^a_i [R(-z)]^b_i, with R the
/// stationary-phase series of the good basis.
pub fn higher_residue_pairing(cover: &BranchedCover, order: usize) -> Result<MatrixSeries> {
    let r = r_sigma_stationary_phase(cover, order)?.r;
    Ok(r.mul(&r.reflect().transpose()))
}

/// Largest coefficient of R(z) R(-z)^T - 1 through z^order.
pub fn check_symplectic(r: &MatrixSeries, order: usize) -> f64 {
    let r = r.truncate(order + 1);
    let p = r.mul(&r.reflect().transpose());
    let id = Mat::identity(r.dim());
    p.coeffs
        .iter()
        .enumerate()
        .map(|(k, m)| if k == 0 { m.sub(&id).max_abs() } else { m.max_abs() })
        .fold(0.0, f64::max)
}

/// Q with N(z1,z2) = (z1 + z2) Q(z1,z2) for N = sum N_ab z1^a z2^b, a,b <= k.
/// Returns Q_ab for a + b <= k - 1 and the largest remainder entry.
pub(crate) fn divide_by_sum(nab: &[Vec<Mat>], k: usize) -> (Vec<Vec<Mat>>, f64) {
    let dim = nab[0][0].rows;
    let mut q = vec![vec![Mat::zeros(dim, dim); k]; k];
    for a in 0..k {
        for b in 0..k - a {
            let mut m = nab[a][b + 1].clone();
            if a > 0 {
                m = m.sub(&q[a - 1][b + 1]);
            }
            q[a][b] = m;
        }
    }
    let mut rem = nab[0][0].max_abs();
    // N_{a,0} must equal Q_{a-1,0}; N_{a,b} = Q_{a-1,b} + Q_{a,b-1} for the rest of the window.
    for a in 1..=k {
        rem = rem.max(nab[a][0].sub(&q[a - 1][0]).max_abs());
    }
    (q, rem)
}

/// V_{kl} matrices, indexed [k][l] with k + l <= order - 1.
#[derive(Clone, Debug)]
pub struct VMatrices {
    pub v: Vec<Vec<Mat>>,
    pub order: usize,
}

impl VMatrices {
    pub fn get(&self, k: usize, l: usize) -> Result<&Mat> {
        if k + l >= self.order {
            return Err(Error::Depth(format!("V_{{{k},{l}}} beyond order {}", self.order)));
        }
        Ok(&self.v[k][l])
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.order {
            for l in 0..self.order - k {
                worst = worst.max(self.v[k][l].sub(&self.v[l][k].transpose()).max_abs());
            }
        }
        worst
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().flatten().all(Mat::is_zero)
    }
}

fn v_from_product(left: &MatrixSeries, right: &MatrixSeries, order: usize, tol: f64) -> Result<VMatrices> {
    if left.order() < order + 1 || right.order() < order + 1 {
        return Err(Error::Depth(format!("V to order {order} needs R through z^{order}")));
    }
    let dim = left.dim();
    let id = Mat::identity(dim);
    let mut nab = vec![vec![Mat::zeros(dim, dim); order + 1]; order + 1];
    for (a, row) in nab.iter_mut().enumerate() {
        for (b, m) in row.iter_mut().enumerate() {
            let mut p = left.coeffs[a].mul(&right.coeffs[b]);
            if a == 0 && b == 0 {
                p = p.sub(&id);
            }
            *m = p;
        }
    }
    let (q, rem) = divide_by_sum(&nab, order);
    if rem > tol {
        return Err(Error::NotDivisible(format!("remainder {rem:.3e} after dividing by z1+z2")));
    }
    let v = q
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            row.into_iter()
                .enumerate()
                .map(|(l, m)| if (k + l) % 2 == 1 { m.neg() } else { m })
                .collect()
        })
        .collect();
    Ok(VMatrices { v, order })
}

fn tol_for(r: &MatrixSeries) -> f64 {
    let be = r.coeffs.iter().flat_map(|m| m.data.iter()).find(|x| !x.is_exact()).map(Scalar::backend);
    be.map_or(0.0, |b| b.tolerance())
}

/// (R(z1)^T R(z2) - 1)/(z1 + z2) = sum V_kl (-z1)^k (-z2)^l.
pub fn v_matrices_frob(r: &MatrixSeries, order: usize) -> Result<VMatrices> {
    v_from_product(&r.transpose(), r, order, tol_for(r))
}

/// (R(z1) R(z2)^T - 1)/(z1 + z2) = sum V_mn (-z1)^m (-z2)^n.
pub fn v_matrices_omega(r: &MatrixSeries, order: usize) -> Result<VMatrices> {
    v_from_product(r, &r.transpose(), order, tol_for(r))
}

/// Deviation of (R_Sigma(z1)^T R_Sigma(z2) - 1)/(z1+z2) from
/// sum B_{2m,2n} (2m-1)!! (2n-1)!! (-z1)^m (-z2)^n over m + n <= order.
pub fn check_eynard_identity(r: &RData, b: &BergmanExpansion, order: usize) -> Result<f64> {
    let v = v_matrices_frob(&r.r, order + 1)?;
    let mut worst: f64 = 0.0;
    for m in 0..=order {
        for n in 0..=order - m {
            let w = &double_factorial_odd(m as i64) * &double_factorial_odd(n as i64);
            let rhs = b.matrix(2 * m, 2 * n)?.scale(&w);
            worst = worst.max(v.get(m, n)?.sub(&rhs).max_abs());
        }
    }
    Ok(worst)
}

/// R = R_omega^T R_Sigma.
pub fn compose_r(r_omega: &RData, r_sigma: &RData) -> Result<RData> {
    if r_omega.r.dim() != r_sigma.r.dim() {
        return Err(Error::Dimension(format!("{} vs {}", r_omega.r.dim(), r_sigma.r.dim())));
    }
    let p = r_omega.r.transpose().mul(&r_sigma.r);
    RData::new(p, Provenance::Product, r_sigma.u.clone())
}

/// Finite sum of c * prod_{i<j} (u_i - u_j)^{e_ij}.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousRatCoeff {
    pub n: usize,
    /// Exponent vector over pairs (i<j) in lexicographic order -> coefficient.
    pub terms: BTreeMap<Vec<i32>, Scalar>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl HomogeneousRatCoeff {
    fn npairs(n: usize) -> usize {
        n * (n - 1) / 2
    }

    pub fn zero(n: usize) -> Self {
        HomogeneousRatCoeff { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        let mut h = Self::zero(n);
        h.insert(vec![0; Self::npairs(n)], c);
        h
    }

    /// c (u_i - u_j)^e for i != j, rewritten to the i<j orientation.
    pub fn difference_power(n: usize, i: usize, j: usize, e: i32, c: Scalar) -> Self {
        assert!(i != j);
        let (a, b, s) = if i < j { (i, j, 1) } else { (j, i, if e % 2 == 0 { 1 } else { -1 }) };
        let mut ex = vec![0; Self::npairs(n)];
        ex[pair_index(n, a, b)] = e;
        let mut h = Self::zero(n);
        h.insert(ex, &c * &Scalar::int(s));
        h
    }

    fn insert(&mut self, ex: Vec<i32>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(ex.clone()).or_insert_with(Scalar::zero);
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&ex);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree of each term; None for the zero element.
    pub fn degrees(&self) -> Vec<i32> {
        self.terms.keys().map(|k| k.iter().sum()).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut h = self.clone();
        for (k, c) in &o.terms {
            h.insert(k.clone(), c.clone());
        }
        h
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::int(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut h = Self::zero(self.n);
        for (k, x) in &self.terms {
            h.insert(k.clone(), x * c);
        }
        h
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut h = Self::zero(self.n);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let k: Vec<i32> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                h.insert(k, c1 * c2);
            }
        }
        h
    }

    /// Partial derivative in u_l.
    pub fn deriv(&self, l: usize) -> Self {
        let mut h = Self::zero(self.n);
        for (k, c) in &self.terms {
            for i in 0..self.n {
                for j in i + 1..self.n {
                    let s = if l == i { 1 } else if l == j { -1 } else { 0 };
                    let p = pair_index(self.n, i, j);
                    if s == 0 || k[p] == 0 {
                        continue;
                    }
                    let mut k2 = k.clone();
                    k2[p] -= 1;
                    h.insert(k2, c * &Scalar::int(s * k[p] as i64));
                }
            }
        }
        h
    }

    pub fn eval(&self, u: &[Scalar]) -> Result<Scalar> {
        let mut acc = Scalar::zero();
        for (k, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..self.n {
                for j in i + 1..self.n {
                    let e = k[pair_index(self.n, i, j)];
                    if e != 0 {
                        t = &t * &(&u[i] - &u[j]).powi(e as i64)?;
                    }
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }
}

impl fmt::Display for HomogeneousRatCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for i in 0..self.n {
                for j in i + 1..self.n {
                    let e = k[pair_index(self.n, i, j)];
                    if e != 0 {
                        write!(f, "(u{}-u{})^{e}", i + 1, j + 1)?;
                    }
                }
            }
        }
        Ok(())
    }
}

type HMat = Vec<Vec<HomogeneousRatCoeff>>;

/// Symbolic matrix series 1 + sum R_k z^k over the homogeneous ring.
#[derive(Clone, Debug)]
pub struct SymbolicR {
    pub n: usize,
    pub coeffs: Vec<HMat>,
}

impl SymbolicR {
    pub fn eval(&self, u: &[Scalar]) -> Result<MatrixSeries> {
        let mut out = Vec::new();
        for m in &self.coeffs {
            let mut x = Mat::zeros(self.n, self.n);
            for i in 0..self.n {
                for j in 0..self.n {
                    x.set(i, j, m[i][j].eval(u)?);
                }
            }
            out.push(x);
        }
        Ok(MatrixSeries::new(out))
    }

    pub fn is_zero_at(&self, k: usize) -> bool {
        self.coeffs[k].iter().flatten().all(HomogeneousRatCoeff::is_zero)
    }

    pub fn same_as(&self, o: &SymbolicR) -> bool {
        self.coeffs.len() == o.coeffs.len()
            && self.coeffs.iter().zip(&o.coeffs).all(|(a, b)| {
                a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| x.sub(y).is_zero())
            })
    }
}

fn hmat_identity(n: usize) -> HMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { HomogeneousRatCoeff::constant(n, Scalar::one()) } else { HomogeneousRatCoeff::zero(n) })
                .collect()
        })
        .collect()
}

/// R_omega from gamma_ij (symmetric) and beta_ij (symmetric) off the
/// diagonal, via the off-diagonal recursion d_{u_b} R_k = [R_{k+1}, E_bb]
/// + R_k Gamma_b - B_b R_k and the Euler equation on the diagonal.
pub fn reconstruct_r_omega_general(gamma: &HMat, beta: &HMat, order: usize) -> Result<SymbolicR> {
    let n = gamma.len();
    for i in 0..n {
        for j in 0..n {
            if i != j && !gamma[i][j].sub(&gamma[j][i]).is_zero() {
                return Err(Error::NonSymmetricGamma(format!("gamma_{}{} != gamma_{}{}", i + 1, j + 1, j + 1, i + 1)));
            }
        }
    }
    let diff = |a: usize, b: usize| HomogeneousRatCoeff::difference_power(n, a, b, 1, Scalar::one());
    let mut coeffs = vec![hmat_identity(n)];
    for k in 0..order {
        let r = &coeffs[k];
        let mut next: HMat = vec![vec![HomogeneousRatCoeff::zero(n); n]; n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                // (R_k Gamma_b)_{ab} = sum_m R_am (Gamma_b)_{mb}; (Gamma_b)_{mb} = -gamma_{bm} for m != b
                let mut acc = r[a][b].deriv(b);
                for m in 0..n {
                    if m != b {
                        acc = acc.add(&r[a][m].mul(&gamma[b][m]));
                    }
                }
                // (B_b R_k)_{ab} = (B_b)_{ab} R_bb = -beta_ba R_bb for a != b
                acc = acc.sub(&beta[b][a].mul(&r[b][b]));
                next[a][b] = acc;
            }
        }
        for a in 0..n {
            let mut acc = HomogeneousRatCoeff::zero(n);
            for j in 0..n {
                if j == a {
                    continue;
                }
                let t = gamma[a][j].mul(&next[a][j]).add(&beta[a][j].mul(&next[j][a]));
                acc = acc.add(&diff(a, j).mul(&t));
            }
            next[a][a] = acc.scale(&Scalar::rat(1, k as i64 + 1));
        }
        coeffs.push(next);
    }
    Ok(SymbolicR { n, coeffs })
}

/// Rank-2 data: gamma_12 = sigma a/(u1-u2), beta_12 = b/(u1-u2).
pub fn rank2_gamma_beta(a: &Scalar, b: &Scalar) -> (HMat, HMat) {
    let g = HomogeneousRatCoeff::difference_power(2, 0, 1, -1, a.clone());
    let bb = HomogeneousRatCoeff::difference_power(2, 0, 1, -1, b.clone());
    let z = HomogeneousRatCoeff::zero(2);
    (vec![vec![z.clone(), g.clone()], vec![g, z.clone()]], vec![vec![z.clone(), bb.clone()], vec![bb, z]])
}

/// Constants of the rank-2 families.
pub fn rank2_b(case: u8) -> Result<Scalar> {
    match case {
        1 => Ok(Scalar::gauss(0, 1, 1, 6)),
        2 => Ok(Scalar::gauss(0, 1, 1, 2)),
        _ => Err(Error::Config(format!("rank-2 case must be 1 or 2, got {case}"))),
    }
}

/// a = -i (r - 1/2), times the relative sign sigma of c1/c2 = sigma i.
pub fn rank2_a(r: (i64, i64), sigma: i64) -> Scalar {
    let rm = &Scalar::rat(r.0, r.1) - &Scalar::rat(1, 2);
    &(&Scalar::i() * &rm) * &Scalar::int(-sigma)
}

/// Closed form R_k = a_k M_k (u1-u2)^{-k} with a_1 = a - b,
/// a_{k+1} = (a^2 + b^2 + k^2 + 2ab(-1)^{k-1}) a_k/(k+1) and
/// M_k = [[a + b(-1)^{k-1}, k], [(-1)^{k-1} k, -(b + a(-1)^{k-1})]].
pub fn reconstruct_r_omega_rank2(case: u8, r: (i64, i64), sigma: i64, order: usize) -> Result<SymbolicR> {
    let b = rank2_b(case)?;
    let a = rank2_a(r, sigma);
    let mut coeffs = vec![hmat_identity(2)];
    let mut ak = &a - &b;
    for k in 1..=order as i64 {
        let sg = Scalar::int(if k % 2 == 1 { 1 } else { -1 });
        let kk = Scalar::int(k);
        let m = [
            [&a + &(&b * &sg), kk.clone()],
            [&sg * &kk, -(&b + &(&a * &sg))],
        ];
        let mut h: HMat = vec![vec![HomogeneousRatCoeff::zero(2); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let c = &ak * &m[i][j];
                h[i][j] = HomogeneousRatCoeff::difference_power(2, 0, 1, -(k as i32), c);
            }
        }
        coeffs.push(h);
        let f = &(&(&(&a * &a) + &(&b * &b)) + &Scalar::int(k * k)) + &(&(&(&a * &b) * &Scalar::int(2)) * &sg);
        ak = &(&f * &ak) / &Scalar::int(k + 1);
    }
    Ok(SymbolicR { n: 2, coeffs })
}

/// Smallest m with R_k = 0 for k >= m, if it occurs within the probe.
/// Exact data only: once R_m = 0 the recursion forces all later terms to
/// vanish, so the first zero decides.
pub fn polynomiality_degree(r: &SymbolicR) -> Result<Option<usize>> {
    for (k, m) in r.coeffs.iter().enumerate() {
        if m.iter().flatten().any(|h| h.terms.values().any(|c| !c.is_exact())) {
            return Err(Error::NotRepresentable("polynomiality is decided on exact data only".into()));
        }
        if k >= 1 && r.is_zero_at(k) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Admissible {
    pub n: i64,
    /// D as (numerator, denominator).
    pub d: (i64, i64),
    pub r: (i64, i64),
    pub degree: Option<usize>,
}

fn reduce(p: i64, q: i64) -> (i64, i64) {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(p, q).max(1);
    let s = if q < 0 { -1 } else { 1 };
    (s * p / g, s * q / g)
}

/// r = (1 - D)/2.
pub fn r_of_dimension(d: (i64, i64)) -> (i64, i64) {
    reduce(d.1 - d.0, 2 * d.1)
}

/// Degree of polynomiality for conformal dimension D, minimised over the
/// relative sign of c1/c2.
pub fn degree_for_dimension(case: u8, d: (i64, i64), probe: usize) -> Result<Option<usize>> {
    let r = r_of_dimension(d);
    let mut best: Option<usize> = None;
    for sigma in [1, -1] {
        if let Some(m) = polynomiality_degree(&reconstruct_r_omega_rank2(case, r, sigma, probe)?)? {
            best = Some(best.map_or(m, |b| b.min(m)));
        }
    }
    Ok(best)
}

/// Candidate dimensions +-D_n with D_n = (-1)^n/3 + 2n (case 1) or
/// (-1)^n + 2n (case 2); the sign comes from the relative sign of c1/c2.
/// Each candidate is checked against polynomiality of the reconstructed R_omega.
pub fn classify_dimensions(case: u8, ns: std::ops::RangeInclusive<i64>, probe: usize) -> Result<Vec<Admissible>> {
    let mut out: Vec<Admissible> = Vec::new();
    for n in ns {
        let sg = if n % 2 == 0 { 1 } else { -1 };
        let base = match case {
            1 => reduce(sg + 6 * n, 3),
            2 => (sg + 2 * n, 1),
            _ => return Err(Error::Config(format!("rank-2 case must be 1 or 2, got {case}"))),
        };
        for d in [base, (-base.0, base.1)] {
            if out.iter().any(|x| x.d == d) {
                continue;
            }
            let degree = degree_for_dimension(case, d, probe)?;
            out.push(Admissible { n, d, r: r_of_dimension(d), degree });
        }
    }
    Ok(out)
}

/// Membership test against the vanishing factors of the a_k recursion:
/// a = sigma-adjusted value equals b or (-1)^k b +- k i for some k >= 1.
pub fn admissible_by_criterion(case: u8, d: (i64, i64), kmax: i64) -> Result<bool> {
    let b = rank2_b(case)?;
    let r = r_of_dimension(d);
    for sigma in [1, -1] {
        let a = rank2_a(r, sigma);
        if a.exact_eq(&b) {
            return Ok(true);
        }
        for k in 1..=kmax {
            let sg = Scalar::int(if k % 2 == 0 { 1 } else { -1 });
            for pm in [1, -1] {
                let cand = &(&sg * &b) + &(&Scalar::i() * &Scalar::int(pm * k));
                if a.exact_eq(&cand) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

pub fn backend_of(r: &MatrixSeries) -> Backend {
    r.coeffs
        .iter()
        .flat_map(|m| m.data.iter())
        .find(|x| !x.is_exact())
        .map_or(Backend::Exact, Scalar::backend)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(r: &[&[i64]]) -> Mat {
        Mat::from_rows(r.iter().map(|x| x.iter().map(|&v| Scalar::int(v)).collect()).collect())
    }

    #[test]
    fn symplectic_examples() {
        let id = Mat::identity(2);
        assert_eq!(check_symplectic(&MatrixSeries::new(vec![id.clone()]), 4), 0.0);
        let anti = m(&[&[0, 1], &[-1, 0]]);
        let sym = m(&[&[0, 1], &[1, 0]]);
        assert!(check_symplectic(&MatrixSeries::new(vec![id.clone(), anti]), 1) > 0.5);
        assert_eq!(check_symplectic(&MatrixSeries::new(vec![id, sym]), 1), 0.0);
    }

    #[test]
    fn v_examples() {
        let id = Mat::identity(2);
        let v = v_matrices_frob(&MatrixSeries::new(vec![id.clone(), Mat::zeros(2, 2), Mat::zeros(2, 2)]), 2).unwrap();
        assert!(v.is_zero());
        // R = 1 + R1 z - R1^2 z^2/2 + ... symplectic to order 2 for symmetric R1
        let r1 = m(&[&[1, 2], &[2, 3]]);
        let r2 = r1.mul(&r1).scale(&Scalar::rat(1, 2));
        let r = MatrixSeries::new(vec![id.clone(), r1.clone(), r2]);
        assert_eq!(check_symplectic(&r, 2), 0.0);
        let v = v_matrices_frob(&r, 2).unwrap();
        assert_eq!(v.get(0, 0).unwrap(), &r1);
        assert_eq!(v.symmetry_defect(), 0.0);
        let bad = MatrixSeries::new(vec![id, m(&[&[0, 1], &[-1, 0]]), Mat::zeros(2, 2)]);
        assert!(matches!(v_matrices_frob(&bad, 2), Err(Error::NotDivisible(_))));
    }

    #[test]
    fn homogeneous_ring() {
        let h = HomogeneousRatCoeff::difference_power(2, 0, 1, -1, Scalar::int(3));
        let d1 = h.deriv(0);
        let d2 = h.deriv(1);
        assert!(d1.add(&d2).is_zero());
        let u = [Scalar::int(5), Scalar::int(2)];
        assert_eq!(d1.eval(&u).unwrap(), Scalar::rat(-3, 9));
        let flipped = HomogeneousRatCoeff::difference_power(2, 1, 0, -1, Scalar::int(3));
        assert_eq!(flipped, h.neg());
    }

    #[test]
    fn rank2_examples() {
        // case 1, r = 1/3: R_omega = 1
        let r = reconstruct_r_omega_rank2(1, (1, 3), 1, 6).unwrap();
        assert_eq!(polynomiality_degree(&r).unwrap(), Some(1));
        // case 2, r = 0
        let r = reconstruct_r_omega_rank2(2, (0, 1), 1, 6).unwrap();
        assert_eq!(polynomiality_degree(&r).unwrap(), Some(1));
        // case 1, r = -1/3: degree 1 polynomial
        let r = reconstruct_r_omega_rank2(1, (-1, 3), 1, 6).unwrap();
        assert_eq!(polynomiality_degree(&r).unwrap(), Some(2));
        // case 1, r = 1/4: never terminates
        assert_eq!(degree_for_dimension(1, (1, 2), 30).unwrap(), None);
    }

    #[test]
    fn general_matches_closed_form() {
        for (case, r, sigma) in [(1u8, (-1i64, 3i64), 1i64), (1, (1, 4), -1), (2, (3, 7), 1), (2, (-2, 1), -1)] {
            let a = rank2_a(r, sigma);
            let b = rank2_b(case).unwrap();
            let (g, be) = rank2_gamma_beta(&a, &b);
            let gen = reconstruct_r_omega_general(&g, &be, 7).unwrap();
            let closed = reconstruct_r_omega_rank2(case, r, sigma, 7).unwrap();
            assert!(gen.same_as(&closed), "case {case} r {r:?} sigma {sigma}");
        }
    }

    #[test]
    fn general_r1_diagonal_and_gamma_equals_beta() {
        let a = Scalar::gauss(0, 1, 2, 7);
        let b = Scalar::gauss(1, 3, 1, 5);
        let (g, be) = rank2_gamma_beta(&a, &b);
        let r = reconstruct_r_omega_general(&g, &be, 1).unwrap();
        // (R1)_11 = (u1-u2)(gamma-beta)(gamma+beta) = (a^2-b^2)/(u1-u2)
        let want = HomogeneousRatCoeff::difference_power(2, 0, 1, -1, &(&a * &a) - &(&b * &b));
        assert!(r.coeffs[1][0][0].sub(&want).is_zero());
        let (g, be) = rank2_gamma_beta(&b, &b);
        let r = reconstruct_r_omega_general(&g, &be, 4).unwrap();
        assert!((1..=4).all(|k| r.is_zero_at(k)));
        let mut bad = g.clone();
        bad[0][1] = bad[0][1].scale(&Scalar::int(2));
        assert!(matches!(reconstruct_r_omega_general(&bad, &be, 2), Err(Error::NonSymmetricGamma(_))));
    }

    fn rank2_curves() -> Vec<crate::frobenius_rank2::Rank2Family> {
        use crate::frobenius_rank2::{build_family, Rank2Params};
        let be = Backend::float(60).unwrap();
        [(1u8, 0.7, 0.3), (2, -0.4, 1.1)]
            .into_iter()
            .map(|(case, re, im)| {
                let s1 = be.from_c64(re, im).unwrap();
                let s2 = be.from_c64(0.25, -0.5).unwrap();
                build_family(case, &Rank2Params::S { s1, s2 }, &be, 16).unwrap()
            })
            .collect()
    }

    #[test]
    fn r_sigma_on_rank2_curves() {
        for f in rank2_curves() {
            let b = crate::spectral_curve::bergman_coeffs(&f.cover, 6).unwrap();
            let r = r_sigma_from_bergman(&b, 6, f.cover.values()).unwrap();
            assert!(check_symplectic(&r.r, 6) < 1e-25);
            assert!(check_eynard_identity(&r, &b, 3).unwrap() < 1e-25);
            let sp = r_sigma_stationary_phase(&f.cover, 6).unwrap();
            assert!(sp.r.max_diff(&r.r) < 1e-25, "stationary phase vs Bergman: {}", sp.r.max_diff(&r.r));
            let k = higher_residue_pairing(&f.cover, 6).unwrap();
            let id = MatrixSeries::new(vec![Mat::identity(2)]);
            assert!(k.coeffs[0].sub(&id.coeffs[0]).max_abs() < 1e-25);
            assert!(k.coeffs[1..].iter().all(|m| m.max_abs() < 1e-25));
            let beta = crate::spectral_curve::beta_matrix(&b);
            assert!((r.r.coeffs[1].get(0, 1) - beta.get(1, 0)).abs_f64() < 1e-40);
        }
    }

    #[test]
    fn product_with_trivial_r_omega() {
        let f = &rank2_curves()[0];
        let b = crate::spectral_curve::bergman_coeffs(&f.cover, 4).unwrap();
        let rs = r_sigma_from_bergman(&b, 4, f.cover.values()).unwrap();
        let ro = RData::new(reconstruct_r_omega_rank2(1, (1, 3), 1, 4).unwrap().eval(&rs.u).unwrap(), Provenance::Omega, rs.u.clone()).unwrap();
        let p = compose_r(&ro, &rs).unwrap();
        assert_eq!(p.r.max_diff(&rs.r), 0.0);
        let ro = RData::new(reconstruct_r_omega_rank2(1, (2, 7), -1, 4).unwrap().eval(&rs.u).unwrap(), Provenance::Omega, rs.u.clone()).unwrap();
        assert!(check_symplectic(&ro.r, 4) < 1e-40);
        assert!(check_symplectic(&compose_r(&ro, &rs).unwrap().r, 4) < 1e-25);
    }

    #[test]
    fn classification_lists() {
        let c1 = classify_dimensions(1, 0..=1, 20).unwrap();
        let ds: Vec<_> = c1.iter().map(|x| x.d).collect();
        assert_eq!(ds, vec![(1, 3), (-1, 3), (5, 3), (-5, 3)]);
        assert!(c1.iter().all(|x| x.degree.is_some()));
        let c2 = classify_dimensions(2, -1..=2, 20).unwrap();
        let mut ds: Vec<_> = c2.iter().map(|x| x.d.0).collect();
        ds.sort();
        assert_eq!(ds, vec![-5, -3, -1, 1, 3, 5]);
        assert!(c2.iter().all(|x| x.degree.is_some()));
        assert!(admissible_by_criterion(1, (13, 3), 10).unwrap());
        assert!(!admissible_by_criterion(1, (1, 2), 10).unwrap());
    }
}
