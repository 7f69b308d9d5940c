//! Dense matrices over `Scalar` and matrix-valued power series in z.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Scalar>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn diag(d: &[Scalar]) -> Mat {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn column(v: &[Scalar]) -> Mat {
        Mat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Scalar) {
        self.data[i * self.cols + j] = x;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn add(&self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn neg(&self) -> Mat {
        self.scale(&Scalar::int(-1))
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch");
        let mut m = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = m.get(i, j) + &(a * b);
                        m.set(i, j, v);
                    }
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Scalar::zero(), |acc, j| &acc + &(self.get(i, j) * &v[j])))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
    }

    /// Gauss-Jordan inverse with partial pivoting by magnitude.
    pub fn inverse(&self) -> Result<Mat> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("{}x{} matrix is not square", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = Mat::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&x, &y| a.get(x, col).abs_f64().total_cmp(&a.get(y, col).abs_f64()))
                .ok_or_else(|| Error::NonInvertible("singular matrix".into()))?;
            if piv != col {
                for j in 0..n {
                    let t = a.get(col, j).clone();
                    a.set(col, j, a.get(piv, j).clone());
                    a.set(piv, j, t);
                    let t = b.get(col, j).clone();
                    b.set(col, j, b.get(piv, j).clone());
                    b.set(piv, j, t);
                }
            }
            let inv = a.get(col, col).inv()?;
            for j in 0..n {
                a.set(col, j, a.get(col, j) * &inv);
                b.set(col, j, b.get(col, j) * &inv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.get(r, j) - &(&f * a.get(col, j)));
                    b.set(r, j, b.get(r, j) - &(&f * b.get(col, j)));
                }
            }
        }
        Ok(b)
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// A(z) = sum_k A_k z^k, known for k < coeffs.len().
#[derive(Clone, Debug)]
pub struct MatrixSeries {
    pub coeffs: Vec<Mat>,
}

impl MatrixSeries {
    pub fn new(coeffs: Vec<Mat>) -> MatrixSeries {
        assert!(!coeffs.is_empty());
        MatrixSeries { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].rows
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn identity_constant(&self) -> bool {
        self.coeffs[0] == Mat::identity(self.dim())
    }

    pub fn coeff(&self, k: usize) -> Result<&Mat> {
        self.coeffs.get(k).ok_or_else(|| {
            Error::Depth(format!("matrix coefficient {k} requested, known below {}", self.order()))
        })
    }

    pub fn truncate(&self, n: usize) -> MatrixSeries {
        MatrixSeries { coeffs: self.coeffs.iter().take(n.max(1)).cloned().collect() }
    }

    pub fn transpose(&self) -> MatrixSeries {
        MatrixSeries { coeffs: self.coeffs.iter().map(Mat::transpose).collect() }
    }

    /// A(-z).
    pub fn reflect(&self) -> MatrixSeries {
        MatrixSeries {
            coeffs: self.coeffs.iter().enumerate().map(|(k, m)| if k % 2 == 1 { m.neg() } else { m.clone() }).collect(),
        }
    }

    pub fn mul(&self, o: &MatrixSeries) -> MatrixSeries {
        let n = self.order().min(o.order());
        let coeffs = (0..n)
            .map(|k| {
                let mut acc = Mat::zeros(self.coeffs[0].rows, o.coeffs[0].cols);
                for i in 0..=k {
                    acc = acc.add(&self.coeffs[i].mul(&o.coeffs[k - i]));
                }
                acc
            })
            .collect();
        MatrixSeries { coeffs }
    }

    /// Largest entry of `R(-z)^T R(z) - 1` over the known orders.
    pub fn symplectic_defect(&self) -> f64 {
        let p = self.reflect().transpose().mul(self);
        let id = Mat::identity(self.dim());
        p.coeffs
            .iter()
            .enumerate()
            .map(|(k, m)| if k == 0 { m.sub(&id).max_abs() } else { m.max_abs() })
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, o: &MatrixSeries) -> f64 {
        self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b).max_abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(r: &[&[i64]]) -> Mat {
        Mat::from_rows(r.iter().map(|x| x.iter().map(|&v| Scalar::int(v)).collect()).collect())
    }

    #[test]
    fn inverse_and_product() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let ai = a.inverse().unwrap();
        assert_eq!(a.mul(&ai), Mat::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_err());
    }

    #[test]
    fn symplectic_examples() {
        let one = Mat::identity(2);
        let n = m(&[&[0, 1], &[1, 0]]);
        // (1 - N z)(1 + N z) = 1 - N^2 z^2, so truncating at order 2 hides z^2
        let r = MatrixSeries::new(vec![one.clone(), n.clone()]);
        assert_eq!(r.symplectic_defect(), 0.0);
        let r3 = MatrixSeries::new(vec![one, n, Mat::zeros(2, 2)]);
        assert!(r3.symplectic_defect() > 0.5);
    }
}
