//! Minimal dense complex linear algebra.
//!
//! Only what the kernel basis and estimator need: a column-major matrix,
//! products with its adjoint, and a one-sided Jacobi SVD. Jacobi is used
//! because it recovers small singular values to high relative accuracy,
//! which matters for nulling windows whose kernel columns are nearly
//! collinear.

use crate::scalar::{dot_h, norm_sqr, Cx, Real};

/// Dense complex matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cx::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from equal-length columns.
    ///
    /// `rows` is needed so an empty column set still has a height.
    pub fn from_columns(rows: usize, columns: &[Vec<Cx<T>>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Cx<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [Cx<T>] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Cx::new(T::zero(), T::zero()); self.rows];
        for (j, xj) in x.iter().enumerate() {
            for (yi, aij) in y.iter_mut().zip(self.column(j)) {
                *yi += aij * xj;
            }
        }
        y
    }

    /// `Aᴴ x`.
    pub fn adjoint_mul_vec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot_h(self.column(j), x)).collect()
    }

    /// `A B`.
    pub fn mul(&self, other: &CMat<T>) -> CMat<T> {
        assert_eq!(self.cols, other.rows);
        let cols: Vec<_> = (0..other.cols).map(|j| self.mul_vec(other.column(j))).collect();
        CMat::from_columns(self.rows, &cols)
    }

    pub fn adjoint(&self) -> CMat<T> {
        let mut out = CMat::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn sub(&self, other: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        norm_sqr(&self.data).sqrt()
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[j * self.rows + i]
    }
}

/// Thin SVD pieces: left singular vectors and singular values, sorted by
/// decreasing singular value. Right vectors are not accumulated.
#[derive(Debug, Clone)]
pub struct LeftSvd<T> {
    /// `rows × k` with orthonormal columns wherever the singular value is
    /// non-zero. Columns paired with a zero singular value are left zero.
    pub u: CMat<T>,
    pub sigma: Vec<T>,
}

impl<T: Real> LeftSvd<T> {
    /// `σ_max / σ_min`, infinite when the smallest singular value is zero.
    pub fn condition_number(&self) -> T {
        match (self.sigma.first(), self.sigma.last()) {
            (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
            (Some(_), Some(_)) => T::infinity(),
            _ => T::one(),
        }
    }
}

/// One-sided (Hestenes) Jacobi SVD of a tall matrix.
pub fn left_svd<T: Real>(a: &CMat<T>) -> LeftSvd<T> {
    let (m, k) = (a.rows(), a.cols());
    assert!(m >= k, "left_svd expects rows >= cols");
    let mut w = a.clone();
    let tol = T::epsilon() * T::from_usize_lossy(m);
    let zero = Cx::new(T::zero(), T::zero());

    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let alpha = norm_sqr(w.column(i));
                let beta = norm_sqr(w.column(j));
                let g = dot_h(w.column(i), w.column(j));
                let gabs = g.norm();
                if gabs == T::zero() || gabs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Phase-align column j so the coupling is real, then apply a
                // real Givens rotation that zeroes it.
                let phase = g.unscale(gabs).conj();
                let zeta = (beta - alpha) / (T::lit(2.0) * gabs);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let ai = w[(r, i)];
                    let bj = w[(r, j)] * phase;
                    w[(r, i)] = ai.scale(c) - bj.scale(s);
                    w[(r, j)] = ai.scale(s) + bj.scale(c);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(T, usize)> = (0..k).map(|j| (norm_sqr(w.column(j)).sqrt(), j)).collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = CMat::zeros(m, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &(s, src)) in order.iter().enumerate() {
        sigma.push(s);
        if s > T::zero() {
            for r in 0..m {
                u[(r, dst)] = w[(r, src)].unscale(s);
            }
        } else {
            for r in 0..m {
                u[(r, dst)] = zero;
            }
        }
    }
    LeftSvd { u, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cis;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn svd_of_orthogonal_columns_is_their_norms() {
        let a = CMat::from_columns(
            3,
            &[
                vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 3.0), c(0.0, 0.0)],
            ],
        );
        let svd = left_svd(&a);
        assert!((svd.sigma[0] - 3.0).abs() < 1e-14);
        assert!((svd.sigma[1] - 2.0).abs() < 1e-14);
        assert!((svd.condition_number() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn duplicated_column_gives_zero_singular_value() {
        let col: Vec<_> = (0..8).map(|m| cis(0.3 * m as f64)).collect();
        let a = CMat::from_columns(8, &[col.clone(), col]);
        let svd = left_svd(&a);
        assert!(svd.sigma[1] < 1e-13 * svd.sigma[0]);
        assert!(svd.condition_number() > 1e12);
    }

    #[test]
    fn left_vectors_are_orthonormal_and_reconstruct_span() {
        let cols: Vec<Vec<_>> = (0..4)
            .map(|k| {
                (0..10)
                    .map(|m| cis(0.7 * (m * (k + 1)) as f64 + 0.1 * k as f64))
                    .collect()
            })
            .collect();
        let a = CMat::from_columns(10, &cols);
        let svd = left_svd(&a);
        let gram = svd.u.adjoint().mul(&svd.u);
        let eye = CMat::identity(4);
        assert!(gram.sub(&eye).frobenius_norm() < 1e-13);
        // every column of A lies in span(U)
        for k in 0..4 {
            let coeff = svd.u.adjoint_mul_vec(a.column(k));
            let back = svd.u.mul_vec(&coeff);
            let err: f64 = back.iter().zip(a.column(k)).map(|(x, y)| (x - y).norm_sqr()).sum();
            assert!(err.sqrt() < 1e-12);
        }
    }

    #[test]
    fn adjoint_product_matches_explicit_adjoint() {
        let a = CMat::from_columns(2, &[vec![c(1.0, 2.0), c(3.0, -1.0)], vec![c(0.0, 1.0), c(2.0, 2.0)]]);
        let x = [c(0.5, 0.5), c(-1.0, 0.0)];
        let y1 = a.adjoint_mul_vec(&x);
        let y2 = a.adjoint().mul_vec(&x);
        for (p, q) in y1.iter().zip(&y2) {
            assert!((p - q).norm() < 1e-15);
        }
    }
}
