//! Dense exact linear algebra.
//!
//! All elimination is leftmost-pivot Gauss–Jordan, so every basis returned
//! here depends only on the input matrix.

use std::fmt;

use crate::error::{Result, SseqError};
use crate::field::Field;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: fmt::Debug> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:?}", self[(i, j)])?;
            }
        }
        write!(f, "] ({}x{})", self.rows, self.cols)
    }
}

impl<F> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon<F> {
    pub reduced: Matrix<F>,
    pub pivots: Vec<usize>,
}

impl<F: Field> Matrix<F> {
    pub fn new(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from integer rows, reducing into the field.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| F::from_i64(rows[i][j]))
    }

    /// Column vector.
    pub fn column(v: &[F]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<F>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<F> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<F>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(F::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = &self[(i, j)];
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Matrix product. Panics on incompatible shapes.
    pub fn mul(&self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out: Matrix<F> = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        let cur = out[(i, j)].clone();
                        out[(i, j)] = cur + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shapes");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shapes");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn neg(&self) -> Matrix<F> {
        self.scale(&-F::one())
    }

    pub fn scale(&self, c: &F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.rows, rhs.rows, "hstack row counts");
        Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - self.cols)].clone()
            }
        })
    }

    /// `[self ; rhs]`.
    pub fn vstack(&self, rhs: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, rhs.cols, "vstack column counts");
        let mut data = self.data.clone();
        data.extend(rhs.data.iter().cloned());
        Matrix {
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix<F> {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix<F> {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix<F> {
        let (r0, c0) = (rows.start, cols.start);
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix<F>) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    /// Reduced row echelon form with leftmost pivots.
    pub fn echelon(&self) -> Echelon<F> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, row * m.cols + j);
                }
            }
            let inv = m[(row, col)].inv().expect("nonzero pivot");
            for j in col..m.cols {
                let v = m[(row, j)].clone() * inv.clone();
                m[(row, j)] = v;
            }
            for i in 0..m.rows {
                if i == row || m[(i, col)].is_zero() {
                    continue;
                }
                let factor = m[(i, col)].clone();
                for j in col..m.cols {
                    let pv = m[(row, j)].clone();
                    if !pv.is_zero() {
                        let v = m[(i, j)].clone() - factor.clone() * pv;
                        m[(i, j)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Columns form a basis of the null space.
    pub fn kernel_basis(&self) -> Matrix<F> {
        let Echelon { reduced, pivots } = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&j| !is_pivot[j]).collect();
        let mut k = Matrix::zeros(self.cols, free.len());
        for (c, &f) in free.iter().enumerate() {
            k[(f, c)] = F::one();
            for (r, &p) in pivots.iter().enumerate() {
                k[(p, c)] = -reduced[(r, f)].clone();
            }
        }
        k
    }

    /// The leftmost linearly independent columns; they span the column space.
    pub fn image_basis(&self) -> Matrix<F> {
        let pivots = self.echelon().pivots;
        self.select_columns(&pivots)
    }

    /// Indices of the leftmost linearly independent columns.
    pub fn independent_columns(&self) -> Vec<usize> {
        self.echelon().pivots
    }

    /// Some `x` with `self * x = b`, or `None` when `b` is outside the column space.
    pub fn solve(&self, b: &[F]) -> Result<Option<Vec<F>>> {
        if b.len() != self.rows {
            return Err(SseqError::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let aug = self.hstack(&Matrix::column(b));
        let Echelon { reduced, pivots } = aug.echelon();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![F::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = reduced[(r, self.cols)].clone();
        }
        Ok(Some(x))
    }

    /// Solves `self * X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix<F>) -> Result<Option<Matrix<F>>> {
        if b.rows != self.rows {
            return Err(SseqError::DimensionMismatch {
                expected: self.rows,
                found: b.rows,
            });
        }
        let aug = self.hstack(b);
        let Echelon { reduced, pivots } = aug.echelon();
        if pivots.iter().any(|&p| p >= self.cols) {
            return Ok(None);
        }
        let mut x = Matrix::zeros(self.cols, b.cols);
        for (r, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x[(p, j)] = reduced[(r, self.cols + j)].clone();
            }
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<Matrix<F>> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve_matrix(&Matrix::identity(self.rows)).ok()??;
        Some(x)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Injective, i.e. full column rank.
    pub fn is_injective(&self) -> bool {
        self.rank() == self.cols
    }

    /// Surjective, i.e. full row rank.
    pub fn is_surjective(&self) -> bool {
        self.rank() == self.rows
    }

    /// Columns appended greedily from `candidates` that are independent of
    /// `self` and of each other. `self` must have independent columns.
    pub fn extension_from(&self, candidates: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.rows, candidates.rows);
        let k = self.cols;
        let pivots = self.hstack(candidates).echelon().pivots;
        let chosen: Vec<usize> = pivots.into_iter().filter(|&p| p >= k).map(|p| p - k).collect();
        candidates.select_columns(&chosen)
    }
}

/// Basis `C` of a complement, so that `sub ⊕ C` is the whole ambient space.
/// Standard basis vectors are added leftmost first.
pub fn complement_in<F: Field>(sub: &Matrix<F>, ambient: usize) -> Result<Matrix<F>> {
    if sub.rows() != ambient {
        return Err(SseqError::DimensionMismatch {
            expected: ambient,
            found: sub.rows(),
        });
    }
    if !sub.is_injective() {
        return Err(SseqError::Invariant(
            "complement_in needs independent columns".into(),
        ));
    }
    Ok(sub.extension_from(&Matrix::identity(ambient)))
}

/// A left inverse `L` of an injective `basis`, with `L * basis = I` and `L`
/// vanishing on the deterministic complement.
pub fn left_inverse<F: Field>(basis: &Matrix<F>) -> Matrix<F> {
    let n = basis.rows();
    let k = basis.cols();
    let full = basis.hstack(&basis.extension_from(&Matrix::identity(n)));
    let inv = full.inverse().expect("basis extended to a full basis");
    inv.submatrix(0..k, 0..n)
}

/// Basis of the sum of two subspaces given by spanning columns.
pub fn subspace_sum<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    a.hstack(b).image_basis()
}

/// Basis of the intersection of two column spaces.
pub fn subspace_intersection<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    let a = a.image_basis();
    let b = b.image_basis();
    let k = a.hstack(&b.neg()).kernel_basis();
    a.mul(&k.submatrix(0..a.cols(), 0..k.cols())).image_basis()
}

/// Whether every column of `v` lies in the column space of `span`.
pub fn contains<F: Field>(span: &Matrix<F>, v: &Matrix<F>) -> bool {
    span.rank() == span.hstack(v).rank()
}

/// Solution set of an affine system described by a residual function.
///
/// `residual` must be affine in its argument. The returned particular
/// solution makes it vanish; `kernel` spans the directions that keep it zero.
#[derive(Clone, Debug)]
pub struct AffineSolution<F> {
    pub particular: Option<Vec<F>>,
    pub kernel: Matrix<F>,
}

impl<F: Field> AffineSolution<F> {
    pub fn dimension(&self) -> usize {
        self.kernel.cols()
    }

    /// `particular + kernel * coeffs`.
    pub fn point(&self, coeffs: &[F]) -> Option<Vec<F>> {
        let base = self.particular.as_ref()?;
        let dir = self.kernel.mul_vec(coeffs);
        Some(base.iter().zip(dir).map(|(a, b)| a.clone() + b).collect())
    }
}

/// Solves `residual(x) = 0` for an affine `residual: F^n -> F^m` by probing
/// it on the origin and the unit vectors.
pub fn solve_affine<F: Field>(n: usize, residual: impl Fn(&[F]) -> Vec<F>) -> AffineSolution<F> {
    let origin = vec![F::zero(); n];
    let r0 = residual(&origin);
    let m = r0.len();
    let mut a = Matrix::zeros(m, n);
    let mut e = origin;
    for j in 0..n {
        e[j] = F::one();
        let rj = residual(&e);
        assert_eq!(rj.len(), m, "residual length must not depend on the input");
        for i in 0..m {
            a[(i, j)] = rj[i].clone() - r0[i].clone();
        }
        e[j] = F::zero();
    }
    let rhs: Vec<F> = r0.into_iter().map(|x| -x).collect();
    let particular = a.solve(&rhs).expect("shapes agree");
    AffineSolution {
        particular,
        kernel: a.kernel_basis(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, F7};

    fn m7(rows: &[&[i64]]) -> Matrix<F7> {
        Matrix::from_i64_rows(rows)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::<F7>::identity(2).rank(), 2);
        assert_eq!(Matrix::<F7>::zeros(3, 4).rank(), 0);
        assert_eq!(m7(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(Matrix::<Rational>::from_i64_rows(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(Matrix::<Rational>::from_i64_rows(&[&[1, 2], &[3, 4]]).rank(), 2);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Matrix::<F7>::identity(3).kernel_basis().cols(), 0);
        assert_eq!(Matrix::<F7>::zeros(1, 2).kernel_basis().cols(), 2);
        let m = m7(&[&[1, 2], &[2, 4]]);
        let k = m.kernel_basis();
        assert_eq!(k.cols(), 1);
        assert!(m.mul(&k).is_zero());
        // (2, -1) up to scale
        let v = k.col(0);
        assert_eq!(v[0], F7::new(2) * -v[1]);
    }

    #[test]
    fn solve_examples() {
        let b = vec![F7::new(3), F7::new(5)];
        assert_eq!(Matrix::<F7>::identity(2).solve(&b).unwrap(), Some(b.clone()));
        assert_eq!(Matrix::<F7>::zeros(2, 2).solve(&b).unwrap(), None);
        assert!(Matrix::<F7>::zeros(2, 2).solve(&[F7::one()]).is_err());
    }

    #[test]
    fn complement_example() {
        let sub = m7(&[&[1], &[0]]);
        let c = complement_in(&sub, 2).unwrap();
        assert_eq!(c.cols(), 1);
        assert_eq!(sub.hstack(&c).rank(), 2);
        assert!(complement_in(&sub, 3).is_err());
    }

    #[test]
    fn left_inverse_is_left_inverse() {
        let b = m7(&[&[1, 0], &[2, 1], &[3, 5]]);
        let l = left_inverse(&b);
        assert!(l.mul(&b).is_identity());
    }

    #[test]
    fn intersection_and_sum() {
        let a = m7(&[&[1, 0], &[0, 1], &[0, 0]]);
        let b = m7(&[&[0, 0], &[1, 0], &[0, 1]]);
        assert_eq!(subspace_intersection(&a, &b).cols(), 1);
        assert_eq!(subspace_sum(&a, &b).cols(), 3);
    }

    #[test]
    fn affine_solver() {
        // x + 2y = 3 over F_7
        let sol = solve_affine::<F7>(2, |x| vec![x[0] + F7::new(2) * x[1] - F7::new(3)]);
        let p = sol.particular.clone().unwrap();
        assert_eq!(p[0] + F7::new(2) * p[1], F7::new(3));
        assert_eq!(sol.dimension(), 1);
        let none = solve_affine::<F7>(1, |_| vec![F7::one()]);
        assert!(none.particular.is_none());
    }
}
