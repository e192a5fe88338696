//! Compressed-row matrices assembled from element blocks, and a thin wrapper
//! around faer's sparse LU.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// CSR matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix whose pattern is the union of the element blocks
    /// `rows(e) x cols(e)`.
    pub fn from_blocks<'a, I>(nrows: usize, ncols: usize, blocks: I) -> Self
    where
        I: IntoIterator<Item = (&'a [usize], &'a [usize])>,
    {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nrows];
        for (r, c) in blocks {
            for &i in r {
                rows[i].extend_from_slice(c);
            }
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in trip {
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut r in rows {
            r.sort_by_key(|x| x.0);
            let mut k = 0;
            while k < r.len() {
                let j = r[k].0;
                let mut s = 0.0;
                while k < r.len() && r[k].0 == j {
                    s += r[k].1;
                    k += 1;
                }
                col_idx.push(j);
                values.push(s);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same pattern, all values zero.
    pub fn zeroed(&self) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v = 0.0);
        m
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.values[k] += v;
    }

    /// Scatters a dense row-major block `blk[a * cols.len() + b]`.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], blk: &[f64]) {
        let nc = cols.len();
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                let v = blk[a * nc + b];
                if v != 0.0 {
                    self.add(i, j, v);
                }
            }
        }
    }

    /// `self += s * other` for matrices sharing this pattern or a sub-pattern.
    pub fn axpy(&mut self, s: f64, other: &CsrMatrix) {
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            for (a, b) in self.values.iter_mut().zip(&other.values) {
                *a += s * b;
            }
            return;
        }
        for i in 0..other.nrows {
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                self.add(i, other.col_idx[k], s * other.values[k]);
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.nrows {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * x[i];
            }
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.mul_vec(y)).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                trip.push((self.col_idx[k], i, self.values[k]));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &trip)
    }

    /// Largest absolute entry of `A - A^T`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                worst = worst.max((self.values[k] - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Restriction to the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], col_map: &[Option<usize>], ncols: usize) -> Self {
        let mut trip = Vec::new();
        for (r, &i) in rows.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if let Some(c) = col_map[self.col_idx[k]] {
                    trip.push((r, c, self.values[k]));
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, &trip)
    }

    /// Appends this matrix's nonzeros, offset by `(r0, c0)`, to a triplet list.
    pub fn push_triplets(&self, r0: usize, c0: usize, out: &mut Vec<Triplet<usize, usize, f64>>) {
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.push(Triplet::new(r0 + i, c0 + self.col_idx[k], self.values[k]));
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row[self.col_idx[k]] += self.values[k];
            }
        }
        d
    }
}

/// Sparse LU factorization of a square system, reusable across solves.
pub struct SparseLu {
    n: usize,
    lu: Lu<usize, f64>,
}

impl SparseLu {
    pub fn factor(n: usize, trip: &[Triplet<usize, usize, f64>]) -> Result<Self> {
        Self::factor_with(n, trip, None).map(|(lu, _)| lu)
    }

    /// Factorizes, reusing `symbolic` when its pattern matches.
    pub fn factor_with(
        n: usize,
        trip: &[Triplet<usize, usize, f64>],
        symbolic: Option<&SymbolicLu<usize>>,
    ) -> Result<(Self, SymbolicLu<usize>)> {
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, trip)
            .map_err(|e| Error::LinearSolver(format!("matrix construction: {e:?}")))?;
        let sym = match symbolic {
            Some(s) => s.clone(),
            None => SymbolicLu::try_new(mat.symbolic())
                .map_err(|e| Error::LinearSolver(format!("symbolic factorization: {e:?}")))?,
        };
        let lu = Lu::try_new_with_symbolic(sym.clone(), mat.as_ref())
            .map_err(|e| Error::LinearSolver(format!("numeric factorization: {e:?}")))?;
        Ok((Self { n, lu }, sym))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = Col::<f64>::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver("singular or ill-conditioned system".into()));
        }
        Ok(out)
    }

    /// Solves for several right-hand sides stored as columns.
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut b = Mat::<f64>::from_fn(self.n, rhs.len(), |i, j| rhs[j][i]);
        self.lu.solve_in_place(b.as_mut());
        let mut out = Vec::with_capacity(rhs.len());
        for j in 0..rhs.len() {
            let col: Vec<f64> = (0..self.n).map(|i| b[(i, j)]).collect();
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::LinearSolver("singular or ill-conditioned system".into()));
            }
            out.push(col);
        }
        Ok(out)
    }
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
