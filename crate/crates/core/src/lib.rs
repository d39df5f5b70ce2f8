//! Numerical toolkit for PT-symmetric deformed-momentum quantum mechanics:
//! the deformed momentum and Hamiltonian on complex contours, bound-state
//! spectra, the quasi-free closed forms and the point canonical map.

pub mod error;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod pct;
pub mod quadrature;
pub mod quasi_free;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{make_quasi_free_mu, ComplexPolynomial, Contour, PhysicalConstants, QuasiFreeParams};
pub use operators::{PotentialSpec, StencilScheme, WavefunctionTable};
pub use spectral::{classify_spectrum, solve_bound_states, BoundaryCondition, ContourChoice, SolveOptions, SpectrumReport};
