//! Sparse direct solves with a cached symbolic factorization.

use faer::linalg::solvers::SolveCore;
use faer::reborrow::Reborrow;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Conj, Mat};

use crate::error::{Error, Result};

/// Coordinate-format matrix; duplicate entries are summed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Triplets {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Triplets {
    pub fn with_capacity(nnz: usize) -> Self {
        Triplets {
            rows: Vec::with_capacity(nnz),
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        self.rows.push(row);
        self.cols.push(col);
        self.vals.push(val);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn clear(&mut self) {
        self.rows.clear();
        self.cols.clear();
        self.vals.clear();
    }

    /// Dense copy, for tests and diagnostics on small systems.
    pub fn to_dense(&self, n: usize) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; n]; n];
        for k in 0..self.len() {
            a[self.rows[k]][self.cols[k]] += self.vals[k];
        }
        a
    }
}

struct Cached {
    rows: Vec<usize>,
    cols: Vec<usize>,
    matrix: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: SymbolicLu<usize>,
}

/// LU solver that reuses its symbolic analysis while the sparsity pattern
/// (including entry order) stays the same.
#[derive(Default)]
pub struct LinearSolver {
    cached: Option<Cached>,
    symbolic_count: usize,
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of symbolic factorizations performed so far.
    pub fn symbolic_count(&self) -> usize {
        self.symbolic_count
    }

    /// Solves `A x = b` for the `n × n` matrix `a`.
    pub fn solve(&mut self, n: usize, a: &Triplets, b: &[f64]) -> Result<Vec<f64>> {
        let reuse = matches!(&self.cached, Some(c) if c.rows == a.rows && c.cols == a.cols);
        if !reuse {
            let pairs: Vec<Pair<usize, usize>> = a
                .rows
                .iter()
                .zip(&a.cols)
                .map(|(&row, &col)| Pair { row, col })
                .collect();
            let (matrix, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
                .map_err(|e| Error::SingularJacobian(format!("invalid sparsity pattern: {e:?}")))?;
            let lu = SymbolicLu::try_new(matrix.rb())
                .map_err(|e| Error::SingularJacobian(format!("symbolic factorization failed: {e:?}")))?;
            self.cached = Some(Cached {
                rows: a.rows.clone(),
                cols: a.cols.clone(),
                matrix,
                argsort,
                lu,
            });
            self.symbolic_count += 1;
        }
        let c = self.cached.as_ref().expect("cache populated above");
        let mat = SparseColMat::new_from_argsort(c.matrix.clone(), &c.argsort, &a.vals)
            .map_err(|e| Error::SingularJacobian(format!("{e:?}")))?;
        let lu = Lu::try_new_with_symbolic(c.lu.clone(), mat.rb())
            .map_err(|e| Error::SingularJacobian(format!("numeric factorization failed: {e:?}")))?;
        let mut rhs = Mat::from_fn(n, 1, |i, _| b[i]);
        lu.solve_in_place_with_conj(Conj::No, rhs.as_mut());
        let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian("solution is not finite".into()));
        }
        Ok(x)
    }
}
