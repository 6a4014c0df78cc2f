//! Minkowski form `Q(x) = x_1^2 + ... + x_{n+1}^2 - x_{n+2}^2`, its positive
//! light cone, and the subgroups of `G = SO(n+1,1)°` used for counting:
//! the flow `g_t`, the horospherical group `u_y`, and the compact group `K`.
//!
//! Coordinates are 0-based in code: `x_{n+1}` is `coords[n]` and `x_{n+2}` is
//! `coords[n + 1]`.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::numeric::dot2;
use crate::scalar::{Real, Scalar};

/// Tolerance for group membership and cone membership of floating values.
pub const GROUP_TOL: f64 = 1e-9;

/// Sphere dimension `n`; the ambient space is `R^{n+2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dim(usize);

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if (1..=3).contains(&n) {
            Ok(Dim(n))
        } else {
            Err(Error::UnsupportedDimension(n))
        }
    }

    /// `n`, the dimension of the sphere `S^n`.
    pub fn n(self) -> usize {
        self.0
    }

    /// `n + 1`: length of the numerator vector `p`.
    pub fn sphere_ambient(self) -> usize {
        self.0 + 1
    }

    /// `n + 2`: length of cone vectors.
    pub fn ambient(self) -> usize {
        self.0 + 2
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::Dimension { expected: c, got: bad.len() });
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = S::zero();
                for k in 0..self.cols {
                    acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, got: x.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> S {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a.get(i, col)
                        .abs()
                        .partial_cmp(&a.get(j, col).abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty range");
            if a.get(pivot, col).is_zero() {
                return S::zero();
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(col, j).clone();
                    a.set(col, j, a.get(pivot, j).clone());
                    a.set(pivot, j, tmp);
                }
                det = -det;
            }
            let p = a.get(col, col).clone();
            det = det * p.clone();
            for i in col + 1..n {
                let factor = a.get(i, col).clone() / p.clone();
                for j in col..n {
                    let v = a.get(i, j).clone() - factor.clone() * a.get(col, j).clone();
                    a.set(i, j, v);
                }
            }
        }
        det
    }

    /// Largest entrywise absolute difference, in `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }

    fn entries_near(&self, other: &Self, tol: f64) -> bool {
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a.clone() - b.clone()).near_zero(tol))
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

/// Gram matrix `J = diag(1, ..., 1, -1)` of `Q`.
pub fn gram<S: Scalar>(dim: Dim) -> Matrix<S> {
    let size = dim.ambient();
    let mut j = Matrix::identity(size);
    j.set(size - 1, size - 1, -S::one());
    j
}

/// Element of `G = SO(Q)°`, stored as its `(n+2) x (n+2)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<S> {
    dim: Dim,
    matrix: Matrix<S>,
}

impl<S: Scalar> GroupElement<S> {
    /// Validates `g^T J g = J`, `det g = 1` and `g_{n+2,n+2} > 0`.
    pub fn new(dim: Dim, matrix: Matrix<S>) -> Result<Self> {
        let g = GroupElement { dim, matrix };
        g.check()?;
        Ok(g)
    }

    pub fn identity(dim: Dim) -> Self {
        GroupElement { dim, matrix: Matrix::identity(dim.ambient()) }
    }

    #[cfg(test)]
    pub(crate) fn from_matrix_unchecked(dim: Dim, matrix: Matrix<S>) -> Self {
        GroupElement { dim, matrix }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn check(&self) -> Result<()> {
        let size = self.dim.ambient();
        if self.matrix.rows() != size || self.matrix.cols() != size {
            return Err(Error::Dimension { expected: size, got: self.matrix.rows() });
        }
        let j = gram::<S>(self.dim);
        let form = self.matrix.transpose().mul(&j).mul(&self.matrix);
        if !form.entries_near(&j, GROUP_TOL) {
            return Err(invalid(format!(
                "matrix does not preserve Q (deviation {:.3e})",
                form.max_abs_diff(&j)
            )));
        }
        let det = self.matrix.determinant();
        if !(det.clone() - S::one()).near_zero(GROUP_TOL) {
            return Err(invalid(format!("determinant {:?} is not 1", det)));
        }
        if *self.matrix.get(size - 1, size - 1) <= S::zero() {
            return Err(invalid("g_{n+2,n+2} <= 0: not in the identity component"));
        }
        Ok(())
    }

    /// Group product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "composing elements of different dimension");
        GroupElement { dim: self.dim, matrix: self.matrix.mul(&other.matrix) }
    }

    /// `g^{-1} = J g^T J`.
    pub fn inverse(&self) -> Self {
        let j = gram::<S>(self.dim);
        GroupElement { dim: self.dim, matrix: j.mul(&self.matrix.transpose()).mul(&j) }
    }

    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        self.matrix.mul_vec(x)
    }

    /// Image of a cone vector; the result is re-validated as a cone vector.
    pub fn act(&self, x: &ConeVector<S>) -> Result<ConeVector<S>> {
        if x.dim != self.dim {
            return Err(Error::Dimension { expected: self.dim.ambient(), got: x.dim.ambient() });
        }
        ConeVector::new(self.dim, self.apply(&x.coords)?)
    }

    /// The `SO(n+1)` block if this element lies in `K` (block diagonal with a
    /// trailing 1) up to `tol`.
    pub fn rotation_block(&self, tol: f64) -> Option<Matrix<S>> {
        let m = self.dim.sphere_ambient();
        let last = m;
        for i in 0..m {
            if !self.matrix.get(i, last).near_zero(tol) || !self.matrix.get(last, i).near_zero(tol) {
                return None;
            }
        }
        if !(self.matrix.get(last, last).clone() - S::one()).near_zero(tol) {
            return None;
        }
        let mut r = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                r.set(i, j, self.matrix.get(i, j).clone());
            }
        }
        Some(r)
    }
}

impl GroupElement<f64> {
    /// Matrix-vector product with compensated dot products, accurate to a few
    /// ulps of each output coordinate even under heavy cancellation.
    pub fn apply_compensated(&self, x: &[f64]) -> Result<Vec<f64>> {
        let size = self.dim.ambient();
        if x.len() != size {
            return Err(Error::Dimension { expected: size, got: x.len() });
        }
        Ok((0..size).map(|i| dot2(self.matrix.row(i), x)).collect())
    }

    /// Operator (spectral) norm.
    pub fn operator_norm(&self) -> f64 {
        let size = self.dim.ambient();
        let m = nalgebra::DMatrix::from_fn(size, size, |i, j| *self.matrix.get(i, j));
        m.singular_values().max()
    }
}

/// A point of `R^{n+2}` on the positive light cone.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeVector<S> {
    dim: Dim,
    coords: Vec<S>,
    integer: bool,
}

impl<S: Scalar> ConeVector<S> {
    /// Checks `Q(x) = 0` (relative tolerance `1e-9` for floats, exact for
    /// rationals and integers), `x_{n+2} >= 0` and `x_{n+2} >= |x_i|`.
    pub fn new(dim: Dim, coords: Vec<S>) -> Result<Self> {
        let q = eval_q(dim, &coords)?;
        let norm2 = coords
            .iter()
            .fold(0.0, |acc, c| acc + c.to_f64_lossy() * c.to_f64_lossy());
        let tol = GROUP_TOL * (1.0 + norm2);
        if !q.near_zero(tol) {
            return Err(invalid(format!("Q(x) = {:?} is not zero", q)));
        }
        let top = coords[dim.n() + 1].clone();
        let slack = tol.sqrt();
        if top.to_f64_lossy() < -slack {
            return Err(invalid("x_{n+2} < 0: not on the positive cone"));
        }
        for c in &coords[..=dim.n()] {
            if (c.abs() - top.clone()).to_f64_lossy() > slack {
                return Err(invalid("x_{n+2} < |x_i|"));
            }
        }
        let integer = coords.iter().all(Scalar::is_integral);
        Ok(ConeVector { dim, coords, integer })
    }

    /// Integer cone point `(p, q)`.
    pub fn from_lattice(dim: Dim, p: &[i64], q: i64) -> Result<Self> {
        if p.len() != dim.sphere_ambient() {
            return Err(Error::Dimension { expected: dim.sphere_ambient(), got: p.len() });
        }
        let coords = p
            .iter()
            .chain(std::iter::once(&q))
            .map(|&v| S::from_i64(v).expect("integer fits the scalar type"))
            .collect();
        Self::new(dim, coords)
    }

    pub(crate) fn from_parts_unchecked(dim: Dim, coords: Vec<S>, integer: bool) -> Self {
        ConeVector { dim, coords, integer }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn is_integer(&self) -> bool {
        self.integer
    }

    /// `x_{n+1}`.
    pub fn axis(&self) -> &S {
        &self.coords[self.dim.n()]
    }

    /// `x_{n+2}`.
    pub fn height(&self) -> &S {
        &self.coords[self.dim.n() + 1]
    }

    /// `(x_1, ..., x_n)`.
    pub fn truncation(&self) -> &[S] {
        &self.coords[..self.dim.n()]
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }
}

/// `Q(x) = sum_{i <= n+1} x_i^2 - x_{n+2}^2`.
pub fn eval_q<S: Scalar>(dim: Dim, x: &[S]) -> Result<S> {
    if x.len() != dim.ambient() {
        return Err(Error::Dimension { expected: dim.ambient(), got: x.len() });
    }
    let (space, time) = x.split_at(dim.n() + 1);
    let spatial = space.iter().fold(S::zero(), |acc, v| acc + v.clone() * v.clone());
    Ok(spatial - time[0].clone() * time[0].clone())
}

/// Bracket `[x] = x_{n+2} + x_{n+1}`; scales by `e^{-t}` under `g_t`.
pub fn bracket<S: Scalar>(x: &ConeVector<S>) -> S {
    x.height().clone() + x.axis().clone()
}

/// Geodesic flow `g_t`: identity on the first `n` coordinates, hyperbolic
/// rotation `[[cosh t, -sinh t], [-sinh t, cosh t]]` on the last two.
pub fn make_g_t<F: Real>(dim: Dim, t: F) -> GroupElement<F> {
    let size = dim.ambient();
    let mut m = Matrix::identity(size);
    let (a, b) = (size - 2, size - 1);
    m.set(a, a, t.cosh());
    m.set(b, b, t.cosh());
    m.set(a, b, -t.sinh());
    m.set(b, a, -t.sinh());
    GroupElement { dim, matrix: m }
}

/// Element `u_y` of the contracting horospherical subgroup `N`.
pub fn make_u_y<S: Scalar>(dim: Dim, y: &[S]) -> Result<GroupElement<S>> {
    let n = dim.n();
    if y.len() != n {
        return Err(Error::Dimension { expected: n, got: y.len() });
    }
    let half_norm = y.iter().fold(S::zero(), |acc, v| acc + v.clone() * v.clone()) * S::half();
    let mut m = Matrix::identity(n + 2);
    for (i, yi) in y.iter().enumerate() {
        m.set(i, n, -yi.clone());
        m.set(i, n + 1, yi.clone());
        m.set(n, i, yi.clone());
        m.set(n + 1, i, yi.clone());
    }
    m.set(n, n, S::one() - half_norm.clone());
    m.set(n, n + 1, half_norm.clone());
    m.set(n + 1, n, -half_norm.clone());
    m.set(n + 1, n + 1, S::one() + half_norm);
    Ok(GroupElement { dim, matrix: m })
}

/// Embeds a rotation `R in SO(n+1)` as the block-diagonal element `(R, 1)` of `K`.
pub fn embed_k<S: Scalar>(dim: Dim, rotation: &Matrix<S>) -> Result<GroupElement<S>> {
    let m = dim.sphere_ambient();
    if rotation.rows() != m || rotation.cols() != m {
        return Err(Error::Dimension { expected: m, got: rotation.rows() });
    }
    let gram = rotation.transpose().mul(rotation);
    if !gram.entries_near(&Matrix::identity(m), GROUP_TOL) {
        return Err(invalid("R^T R != I: not a rotation"));
    }
    if !(rotation.determinant() - S::one()).near_zero(GROUP_TOL) {
        return Err(invalid("det R != 1: not a proper rotation"));
    }
    let mut g = Matrix::identity(m + 1);
    for i in 0..m {
        for j in 0..m {
            g.set(i, j, rotation.get(i, j).clone());
        }
    }
    Ok(GroupElement { dim, matrix: g })
}

/// Matrix-vector product `g x`.
pub fn apply<S: Scalar>(g: &GroupElement<S>, x: &[S]) -> Result<Vec<S>> {
    g.apply(x)
}

/// Factors of `g = u_y g_t k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IwasawaFactors<F> {
    pub y: Vec<F>,
    pub t: F,
    pub k: GroupElement<F>,
}

impl<F: Real> IwasawaFactors<F> {
    pub fn reconstruct(&self) -> Result<GroupElement<F>> {
        let dim = self.k.dim();
        Ok(make_u_y(dim, &self.y)?.compose(&make_g_t(dim, self.t)).compose(&self.k))
    }
}

/// Iwasawa decomposition `G = NAK` read off the last column `w = g u_{n+2}`:
/// `e^t = w_{n+2} - w_{n+1}`, `y = e^{-t} (w_1..w_n)`, `k = g_{-t} u_{-y} g`.
pub fn iwasawa_decompose<F: Real>(g: &GroupElement<F>) -> Result<IwasawaFactors<F>> {
    let dim = g.dim();
    let n = dim.n();
    let last = n + 1;
    let col: Vec<F> = (0..=last).map(|i| *g.matrix().get(i, last)).collect();
    let gap = col[n + 1] - col[n];
    if gap <= F::zero() {
        return Err(invalid("w_{n+2} - w_{n+1} <= 0: not in the identity component"));
    }
    let t = gap.ln();
    let scale = (-t).exp();
    let y: Vec<F> = col[..n].iter().map(|&w| w * scale).collect();
    let neg_y: Vec<F> = y.iter().map(|&v| -v).collect();
    let k_matrix = make_g_t(dim, -t)
        .compose(&make_u_y(dim, &neg_y)?)
        .compose(g)
        .matrix
        .clone();
    let k = GroupElement { dim, matrix: k_matrix };
    if k.rotation_block(GROUP_TOL).is_none() {
        return Err(invalid("Iwasawa K-factor is not block diagonal"));
    }
    Ok(IwasawaFactors { y, t, k })
}
