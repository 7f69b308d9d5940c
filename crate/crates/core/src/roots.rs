//! Polynomial roots: exact over Q(i) when every root is a small Gaussian
//! rational, otherwise Durand-Kerner at working precision with a
//! separation certificate.

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar};

/// Coefficients low degree first; trailing structural zeros ignored.
pub fn degree(p: &[Scalar]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for c in p.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub fn derivative(p: &[Scalar]) -> Vec<Scalar> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * &Scalar::int(k as i64)).collect()
}

pub fn mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

pub fn sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(Scalar::zero);
            let y = b.get(k).cloned().unwrap_or_else(Scalar::zero);
            &x - &y
        })
        .collect()
}

/// Coefficients of p(a + w) in w.
pub fn taylor_shift(p: &[Scalar], a: &Scalar) -> Vec<Scalar> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            c[j] = &c[j] + &(a * &c[j + 1]);
        }
    }
    c
}

/// Synthetic division by (t - a); the remainder is discarded.
pub fn deflate(p: &[Scalar], a: &Scalar) -> Vec<Scalar> {
    let d = match degree(p) {
        Some(d) if d > 0 => d,
        _ => return vec![],
    };
    let mut q = vec![Scalar::zero(); d];
    let mut carry = Scalar::zero();
    for k in (1..=d).rev() {
        carry = &(&carry * a) + &p[k];
        q[k - 1] = carry.clone();
    }
    q
}

pub(crate) fn rationalize(x: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..40 {
        let a = y.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a as f64;
        if frac.abs() < 1e-13 {
            break;
        }
        y = 1.0 / frac;
    }
    if k1 == 0 {
        None
    } else {
        Some((h1, k1))
    }
}

fn durand_kerner(p: &[Scalar], be: &Backend) -> Result<Vec<Scalar>> {
    let d = degree(p).ok_or_else(|| Error::Config("zero polynomial".into()))?;
    let lead_inv = p[d].inv()?;
    let monic: Vec<Scalar> = p[..=d].iter().map(|c| be.lift(&(c * &lead_inv))).collect();
    let seed = be.from_c64(0.4, 0.9)?;
    let mut z: Vec<Scalar> = (0..d).map(|k| seed.powi(k as i64).unwrap()).collect();
    let tol = be.tolerance() * 1e-20;
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for i in 0..d {
            let mut den = Scalar::one();
            for j in 0..d {
                if i != j {
                    den = &den * &(&z[i] - &z[j]);
                }
            }
            let step = &eval(&monic, &z[i]) / &den;
            worst = worst.max(step.abs_f64() / (1.0 + z[i].abs_f64()));
            z[i] = &z[i] - &step;
        }
        if worst < tol {
            break;
        }
    }
    Ok(z)
}

/// Roots of `p` (with multiplicity for exact roots). Exact Gaussian
/// rational roots are returned as exact scalars whenever they verify.
pub fn roots(p: &[Scalar], be: &Backend) -> Result<Vec<Scalar>> {
    let d = match degree(p) {
        None => return Err(Error::Config("zero polynomial has no root list".into())),
        Some(0) => return Ok(vec![]),
        Some(d) => d,
    };
    let all_exact = p[..=d].iter().all(Scalar::is_exact);
    if all_exact {
        // Seed with a low-precision numeric solve, then verify exactly.
        let probe = durand_kerner(p, &Backend::float(40)?)?;
        let mut rem = p[..=d].to_vec();
        let mut found = Vec::new();
        for z in &probe {
            let (re, im) = z.to_c64();
            let (Some((a, b)), Some((c, e))) = (rationalize(re, 100_000), rationalize(im, 100_000)) else {
                continue;
            };
            let cand = Scalar::gauss(a, b, c, e);
            while degree(&rem).unwrap_or(0) > 0 && eval(&rem, &cand).is_zero() {
                rem = deflate(&rem, &cand);
                found.push(cand.clone());
            }
        }
        if found.len() == d {
            return Ok(found);
        }
        if be.is_exact() {
            return Err(Error::NotRepresentable(format!(
                "polynomial of degree {d} has roots outside Q(i); use the bigfloat backend"
            )));
        }
    }
    let z = durand_kerner(p, be)?;
    let sep = match be {
        Backend::Float { digits } => 10f64.powf(-(*digits as f64) / 2.0),
        Backend::Exact => unreachable!(),
    };
    for i in 0..d {
        for j in 0..i {
            if (&z[i] - &z[j]).abs_f64() <= sep {
                return Err(Error::NonGeneric(format!("roots {} and {} are not separated", z[i], z[j])));
            }
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_numeric_roots() {
        let be = Backend::Exact;
        let p = vec![Scalar::int(-1), Scalar::zero(), Scalar::one()];
        let r = roots(&p, &be).unwrap();
        assert!(r.iter().all(Scalar::is_exact));
        assert!(r.contains(&Scalar::int(1)) && r.contains(&Scalar::int(-1)));
        let q = vec![Scalar::int(1), Scalar::zero(), Scalar::one()];
        let r = roots(&q, &be).unwrap();
        assert!(r.contains(&Scalar::i()));
        let two = vec![Scalar::int(-2), Scalar::zero(), Scalar::one()];
        assert!(matches!(roots(&two, &be), Err(Error::NotRepresentable(_))));
        let bf = Backend::float(50).unwrap();
        let r = roots(&two, &bf).unwrap();
        for z in r {
            assert!(eval(&two, &z).abs_f64() < 1e-45);
        }
        let shifted = taylor_shift(&[Scalar::zero(), Scalar::zero(), Scalar::one()], &Scalar::int(3));
        assert_eq!(shifted, vec![Scalar::int(9), Scalar::int(6), Scalar::int(1)]);
    }
}
