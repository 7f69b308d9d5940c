use std::collections::BTreeMap;

use proptest::prelude::*;

use frobtr::descendants::{
    a2_point, descendant_correlators, levelt_solution, p1_point, symplectic_gauge, Ancestors, FrobeniusPoint,
};
use frobtr::eo_recursion::{Atom, EoEngine};
use frobtr::givental_r::{
    admissible_by_criterion, check_eynard_identity, check_symplectic, degree_for_dimension, r_sigma_from_bergman,
    r_sigma_stationary_phase, rank2_a, rank2_b, rank2_gamma_beta, reconstruct_r_omega_general,
    reconstruct_r_omega_rank2,
};
use frobtr::matrix::Mat;
use frobtr::series::Series;
use frobtr::spectral_curve::{bergman_coeffs, good_basis_local, BranchedCover, CoverOptions, RationalFn};
use frobtr::{Backend, Error, Scalar};

fn rat() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| Scalar::rat(p, q))
}

fn nonzero_rat() -> impl Strategy<Value = Scalar> {
    (prop_oneof![-9i64..=-1, 1i64..=9], 1i64..=5).prop_map(|(p, q)| Scalar::rat(p, q))
}

fn gauss() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=5, -9i64..=9, 1i64..=5).prop_map(|(a, b, c, d)| Scalar::gauss(a, b, c, d))
}

/// Power series with the given leading term at x^1 and random tail, known below x^prec.
fn order_one(prec: usize) -> impl Strategy<Value = Series> {
    (nonzero_rat(), prop::collection::vec(rat(), prec - 2)).prop_map(move |(a1, tail)| {
        let mut c = vec![Scalar::zero(), a1];
        c.extend(tail);
        Series::from_coeffs("x", c, prec as i64)
    })
}

/// Random cubic t^3/3 + b t^2 + c t on the bigfloat backend.
fn cubic_cover(digits: u32, chart: usize) -> impl Strategy<Value = Option<BranchedCover>> {
    (rat(), nonzero_rat()).prop_map(move |(b, c)| {
        let be = Backend::float(digits).unwrap();
        let x = RationalFn::poly(vec![Scalar::zero(), c, b, Scalar::rat(1, 3)]);
        BranchedCover::new(x, &be, &CoverOptions { chart_order: chart, labels: None }).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reversion_is_a_two_sided_inverse(f in order_one(8)) {
        let g = f.reversion().unwrap();
        let x = Series::var("x").truncate(8);
        prop_assert_eq!(f.compose(&g).unwrap().max_diff(&x, 8).unwrap(), 0.0);
        prop_assert_eq!(g.compose(&f).unwrap().max_diff(&x, 8).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_squares_back(c in nonzero_rat(), tail in prop::collection::vec(rat(), 6), shift in -3i64..=3) {
        let mut coeffs = vec![&c * &c];
        coeffs.extend(tail);
        let f = Series::new("x", 1, 2 * shift, coeffs, 2 * shift + 7);
        let r = f.sqrt().unwrap();
        prop_assert_eq!(r.mul(&r).unwrap().max_diff(&f, 2 * shift + 7).unwrap(), 0.0);
    }

    #[test]
    fn derivative_has_no_residue(coeffs in prop::collection::vec(rat(), 10)) {
        let f = Series::new("x", 1, -4, coeffs, 6);
        prop_assert!(f.derivative().unwrap().residue().unwrap().is_zero());
    }

    #[test]
    fn exact_and_bigfloat_agree(f in order_one(7), h in prop::collection::vec(rat(), 6)) {
        let mut h = h;
        h[0] = Scalar::one();
        let h = Series::from_coeffs("x", h, 7);
        let exact = h.inv().unwrap().compose(&f).unwrap().mul(&f.reversion().unwrap()).unwrap();
        let be = Backend::float(40).unwrap();
        let (fl, hl) = (f.lift(&be), h.lift(&be));
        let float = hl.inv().unwrap().compose(&fl).unwrap().mul(&fl.reversion().unwrap()).unwrap();
        prop_assert!(exact.max_diff(&float, 7).unwrap() < 1e-35);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn cubic_cover_charts_kernel_and_basis(cover in cubic_cover(40, 14)) {
        prop_assume!(cover.is_some());
        let cover = cover.unwrap();
        for i in 0..cover.n() {
            prop_assert!(cover.morse_defect(i).unwrap() < 1e-25);
            for j in 0..cover.n() {
                let lead = good_basis_local(&cover, i, j, 4).unwrap().coeff(0).unwrap();
                let want = if i == j { -1 } else { 0 };
                prop_assert!((&lead - &Scalar::int(want)).abs_f64() < 1e-25);
            }
        }
        let b = bergman_coeffs(&cover, 4).unwrap();
        prop_assert!(b.symmetry_defect() < 1e-25);
        let r = r_sigma_from_bergman(&b, 4, cover.values()).unwrap();
        prop_assert!(check_symplectic(&r.r, 4) < 1e-25);
        prop_assert!(check_eynard_identity(&r, &b, 2).unwrap() < 1e-25);
        let sp = r_sigma_stationary_phase(&cover, 4).unwrap();
        prop_assert!(sp.r.max_diff(&r.r) < 1e-25);
    }

    #[test]
    fn correlators_are_symmetric_and_anti_invariant(cover in cubic_cover(40, 20)) {
        prop_assume!(cover.is_some());
        let cover = cover.unwrap();
        let be = cover.backend;
        let mut eo = EoEngine::new(&cover, &RationalFn::poly(vec![be.int(-1)])).unwrap();
        let q = [be.rat(3, 7), be.rat(-5, 4), be.rat(11, 5)];
        for (g, n) in [(0, 3), (1, 1), (0, 4)] {
            let w = eo.correlator(g, n).unwrap().clone();
            prop_assert!(w.symmetry_defect() < 1e-25);
            let bound = 6 * g as u32 + 2 * n as u32 - 4;
            for atoms in w.terms.keys() {
                for a in atoms {
                    if let Atom::Pole { k, .. } = a {
                        prop_assert!(*k <= bound);
                    }
                }
            }
            // First slot in chart i, the other slots at fixed points: the part
            // odd under the deck involution s -> -s carries no pole.
            for i in 0..cover.n() {
                let mut f = Series::zero("s", 12);
                for (atoms, c) in &w.terms {
                    let mut t = c.clone();
                    for (a, x) in atoms[1..].iter().zip(&q) {
                        if let Atom::Pole { j, k } = a {
                            t = &t * &(x - &cover.charts[*j].p).powi(-(*k as i64)).unwrap();
                        }
                    }
                    f = f.add(&eo.expansion(atoms[0], i).unwrap().truncate(12).scale(&t)).unwrap();
                }
                let even = f.parity_part(false);
                prop_assert!((even.start.min(0)..0).any(|k| even.coeff_or_zero(k).abs_f64() > 1e-12));
                let odd = f.parity_part(true);
                for k in odd.start.min(0)..0 {
                    prop_assert!(odd.coeff_or_zero(k).abs_f64() < 1e-25, "({},{}) chart {} s^{}", g, n, i, k);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_form_matches_general_recursion(case in 1u8..=2, p in -12i64..=12, q in 1i64..=9, sigma in prop_oneof![Just(-1i64), Just(1)]) {
        let a = rank2_a((p, q), sigma);
        let b = rank2_b(case).unwrap();
        let (g, be) = rank2_gamma_beta(&a, &b);
        let general = reconstruct_r_omega_general(&g, &be, 6).unwrap();
        let closed = reconstruct_r_omega_rank2(case, (p, q), sigma, 6).unwrap();
        prop_assert!(general.same_as(&closed));
    }

    #[test]
    fn polynomiality_matches_the_closed_criterion(case in 1u8..=2, p in -15i64..=15, q in 1i64..=6) {
        let finite = degree_for_dimension(case, (p, q), 20).unwrap().is_some();
        prop_assert_eq!(finite, admissible_by_criterion(case, (p, q), 10).unwrap());
    }

    #[test]
    fn asymmetric_gamma_is_rejected(a in gauss(), b in gauss(), f in prop_oneof![2i64..=5, -5i64..=-1]) {
        let (mut g, be) = rank2_gamma_beta(&a, &b);
        prop_assume!(!g[0][1].is_zero());
        g[0][1] = g[0][1].scale(&Scalar::int(f));
        let asym = matches!(reconstruct_r_omega_general(&g, &be, 2), Err(Error::NonSymmetricGamma(_)));
        prop_assert!(asym);
    }

    #[test]
    fn calibrations_are_symplectic_exactly(t1 in rat(), t2 in rat(), p1 in any::<bool>()) {
        let point = if p1 { p1_point(&t1, &Scalar::one()) } else { a2_point(&t1, &t2) };
        let levelt = levelt_solution(&point, 7).unwrap();
        prop_assert_eq!(levelt.theta_skew_defect().unwrap(), 0.0);
        let (cal, _) = symplectic_gauge(&levelt).unwrap();
        prop_assert_eq!(cal.symplectic_defect().unwrap(), 0.0);
        if !p1 {
            // flat coordinates t_a = (S_1 1, phi^a)
            prop_assert_eq!(cal.s[1].get(0, 0), &t1);
            prop_assert_eq!(cal.s[1].get(1, 0), &t2);
        }
    }

    #[test]
    fn identity_calibration_returns_the_ancestors(vals in prop::collection::vec(rat(), 8)) {
        let cal = levelt_solution(
            &FrobeniusPoint { eta: Mat::identity(1), theta: Mat::zeros(1, 1), e_dot: Mat::zeros(1, 1), unit: 0 },
            5,
        ).unwrap();
        // genus 0, four points: kappa <= 1 in every slot
        let mut anc = Ancestors::new();
        let mut keys = Vec::new();
        for m in 0..16u32 {
            let key: Vec<(usize, usize)> = (0..4).map(|b| (0, (m >> b & 1) as usize)).collect();
            anc.insert(key.clone(), vals[(m % 8) as usize].clone());
            keys.push(key);
        }
        let mut all = BTreeMap::new();
        all.insert((0, 4), anc.clone());
        let req: Vec<_> = keys.iter().map(|k| (0, k.clone())).collect();
        let st = descendant_correlators(&cal, &all, &req).unwrap();
        for k in &keys {
            prop_assert_eq!(&st.values[&(0, k.clone())], &anc[k]);
        }
    }
}
