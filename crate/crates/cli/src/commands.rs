//! One function per subcommand. Each returns a report whose rows follow a
//! fixed order, so identical configs give identical bytes.

use frobtr::descendants::{
    a2_point, descendant_00, descendant_01, descendant_02, levelt_solution, p1_point, symplectic_gauge, w_matrices,
};
use frobtr::eo_recursion::{compare_eo_frobenius, Atom, EoEngine};
use frobtr::frobenius_rank2::beta_constant;
use frobtr::givental_r::{
    check_eynard_identity, check_symplectic, classify_dimensions, r_sigma_from_bergman, r_sigma_stationary_phase,
};
use frobtr::local_recursion::compare_frob_eo;
use frobtr::spectral_curve::{bergman_coeffs, beta_matrix, PolePlace};
use frobtr::{Backend, Error, Result};

use crate::config::{build_cover, build_phi, BuiltCover, FrobSpec, RunConfig};
use crate::output::{fmt_f64, Report, Row, DIGITS};
use crate::suite::{self, Fault, SuiteOptions};

fn cover_of(cfg: &RunConfig, be: &Backend) -> Result<BuiltCover> {
    let spec = cfg.cover.as_ref().ok_or_else(|| Error::Config("missing field 'cover'".into()))?;
    build_cover(spec, be, cfg.orders.chart)
}

fn atom_name(a: &Atom) -> String {
    match a {
        Atom::Pole { j, k } => format!("dt/(t-p{})^{k}", j + 1),
        Atom::Class { a, m } => format!("dx^-{m} omega_{}", a + 1),
    }
}

pub fn curve_info(cfg: &RunConfig, be: &Backend) -> Result<Report> {
    let built = cover_of(cfg, be)?;
    let c = &built.cover;
    let mut rep = Report::new("curve-info", be);
    let src = "spectral_curve::ramification_data";
    rep.text("ramification", "N".into(), c.n().to_string(), src, be);
    for (k, p) in c.poles.iter().enumerate() {
        let place = match &p.place {
            PolePlace::Infinity => "infinity".to_string(),
            PolePlace::Finite(b) => b.render(DIGITS),
        };
        rep.text("pole list", format!("pole {} (order {})", k + 1, p.order), place, src, be);
    }
    for ch in &c.charts {
        let i = ch.index + 1;
        rep.scalar("ramification", format!("p{i}"), &ch.p, src, be);
        rep.scalar("ramification", format!("u{i}"), &ch.u, src, be);
        for k in 1..=3 {
            rep.scalar("morse chart", format!("tau{i} [s^{k}]"), &ch.tau.coeff(k)?, "spectral_curve::morse_coordinate", be);
        }
    }
    let cutoff = cfg.orders.bergman;
    let b = bergman_coeffs(c, cutoff)?;
    let beta = beta_matrix(&b);
    for i in 0..c.n() {
        for j in 0..c.n() {
            if i != j {
                rep.scalar("beta matrix", format!("beta{}{}", i + 1, j + 1), beta.get(i, j), "spectral_curve::beta_matrix", be);
            }
        }
    }
    if let Some(fam) = &built.family {
        rep.scalar("beta constant", "beta12 (u1-u2)".into(), &beta_constant(fam)?, "frobenius_rank2::beta_constant", be);
    }
    for i in 0..c.n() {
        for j in 0..c.n() {
            for m in 0..=cutoff {
                for n in 0..=cutoff - m {
                    let q = format!("B{}{} [{m},{n}]", i + 1, j + 1);
                    rep.scalar("bergman expansion", q, b.get(i, j, m, n)?, "spectral_curve::bergman_coeffs", be);
                }
            }
        }
    }
    rep.measure("bergman symmetry", "max |B_ij(m,n) - B_ji(n,m)|".into(), b.symmetry_defect(), "spectral_curve::bergman_coeffs", be, be.tolerance());
    Ok(rep)
}

pub fn recursion(cfg: &RunConfig, be: &Backend) -> Result<Report> {
    let built = cover_of(cfg, be)?;
    let phi = build_phi(cfg.phi.as_ref(), &built.cover)?;
    let mut eo = EoEngine::new(&built.cover, &phi)?;
    let mut rep = Report::new("recursion", be);
    for (g, n) in cfg.cases(&[(0, 3), (1, 1)]) {
        let w = eo.correlator(g, n)?.clone();
        for (atoms, c) in &w.terms {
            let q = format!("omega_{{{g},{n}}} [{}]", atoms.iter().map(atom_name).collect::<Vec<_>>().join(" x "));
            rep.scalar("eo_step", q, c, "eo_recursion::correlator", be);
        }
        rep.measure("omega symmetry", format!("omega_{{{g},{n}}} symmetry defect"), w.symmetry_defect(), "eo_recursion::correlator", be, be.tolerance());
    }
    Ok(rep)
}

pub fn r_matrix(cfg: &RunConfig, be: &Backend) -> Result<Report> {
    let built = cover_of(cfg, be)?;
    let c = &built.cover;
    let order = cfg.orders.z;
    let b = bergman_coeffs(c, cfg.orders.bergman.max(order))?;
    let r = r_sigma_from_bergman(&b, order, c.values())?;
    let mut rep = Report::new("r-matrix", be);
    for k in 1..=order {
        let m = &r.r.coeffs[k];
        for i in 0..m.rows {
            for j in 0..m.cols {
                let q = format!("R_{k} [{},{}]", i + 1, j + 1);
                rep.scalar("r_sigma from bergman", q, m.get(i, j), "givental_r::r_sigma_from_bergman", be);
            }
        }
    }
    let tol = be.tolerance();
    rep.measure("symplectic condition", format!("R(z)R(-z)^T - 1 through z^{order}"), check_symplectic(&r.r, order), "givental_r::check_symplectic", be, tol);
    let sp = r_sigma_stationary_phase(c, order)?;
    rep.measure("stationary phase", "|R_stationary - R_bergman|".into(), sp.r.max_diff(&r.r), "givental_r::r_sigma_stationary_phase", be, tol);
    let eyn = order.saturating_sub(1).min(3);
    rep.measure("eynard identity", format!("V_mn - B_2m,2n through m+n <= {eyn}"), check_eynard_identity(&r, &b, eyn)?, "givental_r::check_eynard_identity", be, tol);
    Ok(rep)
}

pub fn classify_2d(cfg: &RunConfig, be: &Backend) -> Result<Report> {
    let spec = cfg.classify.as_ref().ok_or_else(|| Error::Config("missing field 'classify'".into()))?;
    let list = classify_dimensions(spec.case, spec.n_min..=spec.n_max, spec.probe)?;
    let mut rep = Report::new("classify-2d", be);
    for a in &list {
        let degree = a.degree.map_or("none".to_string(), |m| m.to_string());
        let q = format!("case {} n={} D={}/{} r={}/{}", spec.case, a.n, a.d.0, a.d.1, a.r.0, a.r.1);
        rep.text("rank-2 classification", q, degree, "givental_r::classify_dimensions", be);
    }
    Ok(rep)
}

pub fn descendants(cfg: &RunConfig, be: &Backend) -> Result<Report> {
    let spec = cfg.frobenius.as_ref().ok_or_else(|| Error::Config("missing field 'frobenius'".into()))?;
    let point = match spec {
        FrobSpec::A2 { t1, t2 } => a2_point(&t1.scalar(be)?, &t2.scalar(be)?),
        FrobSpec::P1 { t1, q } => p1_point(&t1.scalar(be)?, &q.scalar(be)?),
    };
    let order = cfg.orders.z.max(5);
    let levelt = levelt_solution(&point, order)?;
    let (cal, _) = symplectic_gauge(&levelt)?;
    let w = w_matrices(&cal, order)?;
    let mut rep = Report::new("descendants", be);
    let tol = be.tolerance();
    rep.measure("levelt solution", "theta skewness defect".into(), cal.theta_skew_defect()?, "descendants::levelt_solution", be, tol);
    rep.measure("symplectic gauge", format!("S(-z)^T S(z) - 1 through z^-{order}"), cal.symplectic_defect()?, "descendants::symplectic_gauge", be, tol);
    for k in 1..=3 {
        let m = &cal.s[k];
        for i in 0..m.rows {
            for j in 0..m.cols {
                rep.scalar("calibration", format!("S_{k} [{},{}]", i + 1, j + 1), m.get(i, j), "descendants::symplectic_gauge", be);
            }
        }
    }
    rep.scalar("genus-0 potential", "<>_{0,0}".into(), &descendant_00(&cal)?, "descendants::descendant_00", be);
    let dim = cal.dim();
    for a in 0..dim {
        for k in 0..3 {
            rep.scalar("unstable descendants", format!("<phi_{} psi^{k}>_{{0,1}}", a + 1), &descendant_01(&cal, (a, k))?, "descendants::descendant_01", be);
        }
    }
    for a in 0..dim {
        for k in 0..3 {
            for b in 0..dim {
                for l in 0..3 {
                    if (a, k) <= (b, l) {
                        let q = format!("<phi_{} psi^{k}, phi_{} psi^{l}>_{{0,2}}", a + 1, b + 1);
                        rep.scalar("unstable descendants", q, &descendant_02(&cal, &w, (a, k), (b, l))?, "descendants::descendant_02", be);
                    }
                }
            }
        }
    }
    Ok(rep)
}

pub fn compare(cfg: &RunConfig, be: &Backend) -> Result<Report> {
    let built = cover_of(cfg, be)?;
    let phi = build_phi(cfg.phi.as_ref(), &built.cover)?;
    let cases = cfg.cases(&[(0, 3), (1, 1)]);
    let (count, depth) = (cfg.orders.count, cfg.orders.depth);
    let tol = be.tolerance();
    let mut rep = Report::new("compare", be);
    for c in compare_eo_frobenius(&built.cover, &phi, &cases, count, depth)? {
        let q = format!("({},{}) EO pullback vs Frobenius local recursion", c.g, c.n);
        rep.measure("frobenius-eo equivalence", q, c.deviation, "eo_recursion::compare_eo_frobenius", be, tol);
        rep.text("frobenius-eo equivalence", format!("({},{}) scale", c.g, c.n), fmt_f64(c.scale), "eo_recursion::compare_eo_frobenius", be);
    }
    for c in compare_frob_eo(&built.cover, &phi, None, &cases, count, depth)? {
        let q = format!("({},{}) Frobenius vs curve P-data", c.g, c.n);
        rep.measure("p-data equivalence", q, c.deviation, "local_recursion::compare_frob_eo", be, tol);
    }
    Ok(rep)
}

/// Runs the acceptance suite; the flag is true when every criterion passed.
pub fn verify(cfg: &RunConfig, be: &Backend, fault: Fault) -> Result<(Report, bool)> {
    let ids: Vec<u32> = match &cfg.suite {
        Some(s) => s.clone(),
        None if be.is_exact() => suite::EXACT_SUITE.to_vec(),
        None => (1..=11).collect(),
    };
    let digits = match be {
        Backend::Float { digits } => *digits,
        Backend::Exact => 60,
    };
    let opts = SuiteOptions { digits, fault };
    let mut rep = Report::new("verify", be);
    let mut all = true;
    for id in ids {
        let c = suite::run_criterion(id, &opts);
        all &= c.pass;
        for m in &c.measures {
            rep.rows.push(Row {
                paper_anchor: c.name.into(),
                quantity: format!("criterion {id}: {}", m.quantity),
                value: m.value.clone(),
                provenance: format!("{} [{}]", c.provenance, m.backend),
                tolerance: m.tolerance.clone(),
            });
        }
        let status = if c.pass { "PASS".to_string() } else { format!("FAIL {}", c.detail) };
        rep.rows.push(Row {
            paper_anchor: c.name.into(),
            quantity: format!("criterion {id}"),
            value: status,
            provenance: format!("{} [suite]", c.provenance),
            tolerance: "-".into(),
        });
    }
    Ok((rep, all))
}
