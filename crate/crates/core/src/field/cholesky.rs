//! Sparse LLᵀ factorization of the assembled system, backed by faer's
//! supernodal Cholesky with AMD fill-reducing ordering. Everything runs with
//! `Par::Seq` so results are bit-reproducible.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::LltRegularization;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Side};

use super::system::SparseSymmetric;
use super::FieldError;

pub(crate) struct SparseCholesky {
    symbolic: SymbolicCholesky<usize>,
    factor: Vec<f64>,
}

impl SparseCholesky {
    pub(crate) fn factorize(a: &SparseSymmetric) -> Result<Self, FieldError> {
        let n = a.dim();
        // Row-compressed arrays of a symmetric matrix double as column-compressed.
        let pattern = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let symbolic = factorize_symbolic_cholesky(
            pattern,
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams::default(),
        )
        .map_err(|e| FieldError::Factorization(format!("{e:?}")))?;

        let mut factor = vec![0.0f64; symbolic.len_val()];
        let matrix = SparseColMatRef::new(pattern, a.values());
        let mut buf = MemBuffer::try_new(
            symbolic.factorize_numeric_llt_scratch::<f64>(Par::Seq, Default::default()),
        )
        .map_err(|e| FieldError::Factorization(format!("{e:?}")))?;
        symbolic
            .factorize_numeric_llt(
                &mut factor,
                matrix,
                Side::Lower,
                LltRegularization::default(),
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            )
            .map_err(|e| FieldError::NotPositiveDefinite(format!("{e:?}")))?;
        Ok(Self { symbolic, factor })
    }

    /// Solves `A x = b` in place.
    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = b.len();
        let llt =
            faer::sparse::linalg::cholesky::LltRef::<usize, f64>::new(&self.symbolic, &self.factor);
        let mut buf = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        let rhs = MatMut::from_column_major_slice_mut(b, n, 1);
        llt.solve_in_place_with_conj(Conj::No, rhs, Par::Seq, MemStack::new(&mut buf));
    }
}
