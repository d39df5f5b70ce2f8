//! In-house eigensolvers: implicit QL for symmetric tridiagonal matrices and
//! Hessenberg + shifted QR for dense complex ones.

mod dense;
mod tridiag;

pub use dense::{eig_dense_complex, BandLu, DenseComplexMatrix, LuDecomposition};
pub use tridiag::{eig_sym_tridiag, SymTridiagMatrix};
