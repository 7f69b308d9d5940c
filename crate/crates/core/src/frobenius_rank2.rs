//! The two rank-2 Hurwitz families x^3/3 + s1 x + s2 and x + s1/x + s2, with
//! the labelling of critical points fixed by sqrt(p_i), homogeneous c-vectors
//! and finite-difference checks of gamma and beta.

use crate::error::{Error, Result};
use crate::givental_r::{rank2_a, rank2_b};
use crate::scalar::{Backend, Scalar};
use crate::spectral_curve::{bergman_coeffs, beta_matrix, BranchedCover, CoverOptions, RationalFn};

#[derive(Clone, Debug)]
pub enum Rank2Params {
    /// (s1, s2) with t1 = Log s1 on the principal branch.
    S { s1: Scalar, s2: Scalar },
    /// (t1, t2) with s1 = e^{t1}.
    T { t1: Scalar, t2: Scalar },
}

#[derive(Clone, Debug)]
pub struct Rank2Family {
    pub case: u8,
    pub s1: Scalar,
    pub s2: Scalar,
    /// e^{t1/4}; fixes every branch below.
    pub quarter: Scalar,
    pub sqrt_p: [Scalar; 2],
    pub p: [Scalar; 2],
    pub u: [Scalar; 2],
    pub cover: BranchedCover,
}

impl Rank2Family {
    pub fn delta(&self) -> Scalar {
        &self.u[0] - &self.u[1]
    }
}

/// Critical values from the closed formulas: case 1 u = s2 +- (2i/3) e^{3 t1/2},
/// case 2 u = s2 +- 2 e^{t1/2}.
pub fn closed_form_u(case: u8, quarter: &Scalar, s2: &Scalar) -> Result<[Scalar; 2]> {
    let h = quarter.powi(2)?;
    let w = match case {
        1 => &Scalar::gauss(0, 1, 2, 3) * &h.powi(3)?,
        2 => &Scalar::int(2) * &h,
        _ => return Err(Error::Config(format!("rank-2 case must be 1 or 2, got {case}"))),
    };
    Ok([s2 + &w, s2 - &w])
}

pub fn build_family(case: u8, params: &Rank2Params, be: &Backend, chart_order: usize) -> Result<Rank2Family> {
    if be.is_exact() {
        return Err(Error::NotRepresentable("the rank-2 Morse charts need sqrt 2; use the bigfloat backend".into()));
    }
    let (s1, s2, quarter) = match params {
        Rank2Params::S { s1, s2 } => {
            if s1.is_zero() {
                return Err(Error::Config("s1 = 0 is outside the family".into()));
            }
            let s1 = be.lift(s1);
            let q = s1.nth_root(4)?;
            (s1, be.lift(s2), q)
        }
        Rank2Params::T { t1, t2 } => {
            let q = (&be.lift(t1) / &Scalar::int(4)).exp(be)?;
            (q.powi(4)?, be.lift(t2), q)
        }
    };
    let r2 = be.sqrt2()?;
    let i = be.i();
    let (sqrt_p, x) = match case {
        1 => {
            // e^{i pi/4} and e^{3 i pi/4}
            let z8 = &(&be.one() + &i) / &r2;
            let z83 = &z8 * &i;
            let x = RationalFn::poly(vec![s2.clone(), s1.clone(), be.zero(), be.rat(1, 3)]);
            ([&quarter * &z8, &quarter * &z83], x)
        }
        2 => {
            let x = RationalFn::new(vec![s1.clone(), s2.clone(), be.one()], vec![be.zero(), be.one()]);
            ([quarter.clone(), &quarter * &i], x)
        }
        _ => return Err(Error::Config(format!("rank-2 case must be 1 or 2, got {case}"))),
    };
    let p = [sqrt_p[0].powi(2)?, sqrt_p[1].powi(2)?];
    let kappa: Vec<Scalar> = sqrt_p
        .iter()
        .map(|q| if case == 1 { Ok(&r2 * q) } else { Ok(&r2 / q) })
        .collect::<Result<_>>()?;
    let u = closed_form_u(case, &quarter, &s2)?;
    let margin = match be {
        Backend::Float { digits } => 10f64.powf(-(*digits as f64) / 3.0),
        Backend::Exact => 0.0,
    };
    if (&u[0] - &u[1]).abs_f64() <= margin {
        return Err(Error::NonSemisimple(format!("u1 = u2 = {} (caustic)", u[0])));
    }
    let labels = Some(vec![(p[0].clone(), kappa[0].clone()), (p[1].clone(), kappa[1].clone())]);
    let cover = BranchedCover::new(x, be, &CoverOptions { chart_order, labels })?;
    let tol = be.tolerance().sqrt().max(1e-30);
    for k in 0..2 {
        let d = (&cover.charts[k].u - &u[k]).abs_f64();
        if d > tol * (1.0 + u[k].abs_f64()) {
            return Err(Error::Internal(format!("critical value u_{} off the closed form by {d:.3e}", k + 1)));
        }
    }
    Ok(Rank2Family { case, s1, s2, quarter, sqrt_p, p, u, cover })
}

/// beta_12 (u1 - u2), which is constant along the family.
pub fn beta_constant(fam: &Rank2Family) -> Result<Scalar> {
    let b = bergman_coeffs(&fam.cover, 0)?;
    Ok(beta_matrix(&b).get(0, 1) * &fam.delta())
}

fn exponent(r: (i64, i64)) -> (i64, i64) {
    // r - 1/2 = (2 r.0 - r.1) / (2 r.1)
    (2 * r.0 - r.1, 2 * r.1)
}

/// c_i(u,0) = c_i° (u1-u2)^{r-1/2} with c1° = sigma i, c2° = 1, principal branch.
pub fn c_scaling_at(u: &[Scalar; 2], r: (i64, i64), sigma: i64) -> Result<[Scalar; 2]> {
    let d = &u[0] - &u[1];
    if d.is_zero() {
        return Err(Error::NonSemisimple("u1 = u2 (caustic)".into()));
    }
    let (a, b) = exponent(r);
    let w = d.pow_rat(a, b)?;
    Ok([&(&Scalar::i() * &Scalar::int(sigma)) * &w, w])
}

pub fn c_scaling_solution(fam: &Rank2Family, r: (i64, i64), sigma: i64) -> Result<[Scalar; 2]> {
    c_scaling_at(&fam.u, r, sigma)
}

#[derive(Clone, Debug)]
pub struct GammaBetaReport {
    pub gamma12: Scalar,
    pub gamma21: Scalar,
    pub closed_form: Scalar,
    pub symmetry_defect: f64,
    pub closed_form_defect: f64,
    /// Present when a(r, sigma) = b, the primary-differential case.
    pub beta12: Option<Scalar>,
    pub gamma_beta_defect: Option<f64>,
    pub richardson_gap: f64,
}

/// d c_i / d u_j by central differences with one Richardson step.
fn fd_partial(u: &[Scalar; 2], r: (i64, i64), sigma: i64, i: usize, j: usize, h: &Scalar) -> Result<(Scalar, f64)> {
    let cd = |h: &Scalar| -> Result<Scalar> {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[j] = &up[j] + h;
        dn[j] = &dn[j] - h;
        let f1 = c_scaling_at(&up, r, sigma)?[i].clone();
        let f0 = c_scaling_at(&dn, r, sigma)?[i].clone();
        Ok(&(&f1 - &f0) / &(h * &Scalar::int(2)))
    };
    let d1 = cd(h)?;
    let d2 = cd(&(h / &Scalar::int(2)))?;
    let rich = &(&(&d2 * &Scalar::int(4)) - &d1) / &Scalar::int(3);
    let gap = (&rich - &d2).abs_f64();
    Ok((rich, gap))
}

pub fn check_gamma_beta(fam: &Rank2Family, r: (i64, i64), sigma: i64, h: f64) -> Result<GammaBetaReport> {
    let be = fam.cover.backend;
    let hs = be.from_c64(h, 0.0)?;
    let c = c_scaling_solution(fam, r, sigma)?;
    let (d12, g1) = fd_partial(&fam.u, r, sigma, 0, 1, &hs)?;
    let (d21, g2) = fd_partial(&fam.u, r, sigma, 1, 0, &hs)?;
    let gamma12 = &d12 / &c[1];
    let gamma21 = &d21 / &c[0];
    let gap = g1.max(g2) / c[0].abs_f64().min(c[1].abs_f64());
    let scale = gamma12.abs_f64().max(1.0 / fam.delta().abs_f64());
    // Richardson error is O(h^4) against an O(h^2) gap; a gap above 1e-4 relative means h is too large.
    if gap > 1e-4 * scale {
        return Err(Error::Config(format!("step h = {h} too large: Richardson estimates differ by {gap:.3e}")));
    }
    let a = be.lift(&rank2_a(r, sigma));
    let closed = &a / &fam.delta();
    let b = rank2_b(fam.case)?;
    let (beta12, gbd) = if rank2_a(r, sigma).exact_eq(&b) {
        let beta = &beta_constant(fam)? / &fam.delta();
        let d = (&gamma12 - &beta).abs_f64();
        (Some(beta), Some(d))
    } else {
        (None, None)
    };
    Ok(GammaBetaReport {
        symmetry_defect: (&gamma12 - &gamma21).abs_f64(),
        closed_form_defect: (&gamma12 - &closed).abs_f64(),
        gamma12,
        gamma21,
        closed_form: closed,
        beta12,
        gamma_beta_defect: gbd,
        richardson_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_curve::{c_vector, primary_differential, PrimaryKind};

    fn bf() -> Backend {
        Backend::float(60).unwrap()
    }

    #[test]
    fn family_examples() {
        let be = bf();
        let f = build_family(1, &Rank2Params::S { s1: Scalar::int(-1), s2: Scalar::zero() }, &be, 12).unwrap();
        assert!((&f.p[0] - &Scalar::int(-1)).abs_f64() < 1e-50);
        assert!((&f.p[1] - &Scalar::int(1)).abs_f64() < 1e-50);
        assert!((&f.u[0] - &Scalar::rat(2, 3)).abs_f64() < 1e-50);
        let f = build_family(2, &Rank2Params::S { s1: Scalar::int(1), s2: Scalar::zero() }, &be, 12).unwrap();
        assert!((&f.p[0] - &Scalar::int(1)).abs_f64() < 1e-50);
        assert!((&f.u[1] - &Scalar::int(-2)).abs_f64() < 1e-50);
        assert!(build_family(1, &Rank2Params::S { s1: Scalar::zero(), s2: Scalar::zero() }, &be, 12).is_err());
        assert!(build_family(1, &Rank2Params::S { s1: Scalar::int(1), s2: Scalar::zero() }, &Backend::Exact, 12).is_err());
    }

    #[test]
    fn t_parameters_match_s_parameters() {
        let be = bf();
        let t1 = be.from_c64(0.3, -0.7).unwrap();
        let t2 = be.from_c64(-0.2, 0.1).unwrap();
        let a = build_family(2, &Rank2Params::T { t1: t1.clone(), t2: t2.clone() }, &be, 8).unwrap();
        let s1 = t1.exp(&be).unwrap();
        let b = build_family(2, &Rank2Params::S { s1, s2: t2 }, &be, 8).unwrap();
        for k in 0..2 {
            assert!((&a.u[k] - &b.u[k]).abs_f64() < 1e-50);
        }
    }

    #[test]
    fn beta_constants() {
        let be = bf();
        for (case, want) in [(1u8, Scalar::gauss(0, 1, 1, 6)), (2, Scalar::gauss(0, 1, 1, 2))] {
            for (re, im) in [(0.7, 0.2), (-1.3, 0.5)] {
                let s1 = be.from_c64(re, im).unwrap();
                let f = build_family(case, &Rank2Params::S { s1, s2: be.from_c64(0.1, 0.3).unwrap() }, &be, 8).unwrap();
                let b = beta_constant(&f).unwrap();
                assert!((&b - &want).abs_f64() < 1e-40, "case {case}: {b}");
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let be = bf();
        let f = build_family(1, &Rank2Params::S { s1: be.from_c64(0.8, 0.4).unwrap(), s2: Scalar::zero() }, &be, 8).unwrap();
        let rep = check_gamma_beta(&f, (1, 3), 1, 1e-6).unwrap();
        assert!(rep.gamma_beta_defect.unwrap() < 1e-9, "{rep:?}");
        let rep = check_gamma_beta(&f, (2, 7), -1, 1e-6).unwrap();
        assert!(rep.symmetry_defect < 1e-9 && rep.closed_form_defect < 1e-9);
        let rep = check_gamma_beta(&f, (1, 2), 1, 1e-6).unwrap();
        assert!(rep.gamma12.abs_f64() < 1e-20);
        assert!(check_gamma_beta(&f, (1, 3), 1, 10.0).is_err());
    }

    #[test]
    fn primary_form_is_homogeneous_c() {
        // A2 primary differential: c1/c2 = +-i and c_i^2 equals the residue pairing.
        let be = bf();
        let f = build_family(1, &Rank2Params::S { s1: be.from_c64(0.5, -0.9).unwrap(), s2: Scalar::zero() }, &be, 8).unwrap();
        let phi = primary_differential(&f.cover, PrimaryKind::TypeI { pole: 0, a: 1 }).unwrap();
        let c = c_vector(&f.cover, &phi).unwrap();
        let ratio = &c[0] / &c[1];
        assert!((&(&ratio * &ratio) + &Scalar::one()).abs_f64() < 1e-40);
    }
}
