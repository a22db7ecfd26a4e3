//! Numerical integration as a finite matrix approximation of the
//! multiplication operator.
//!
//! For an orthonormal basis `1 = φ₀, φ₁, …` of `L²_w(Ω)` the matrix
//! `[M_n[g]]_{ij} = ∫ φ_i g φ_j w dx` turns the integral of a composition
//! `f(g(x))` into the matrix function entry `[f(M_n[g])]_{0,0}`. The
//! eigendecomposition of `M_n[g]` gives a generalized Gaussian quadrature
//! rule: the eigenvalues are the nodes and the squared first eigenvector
//! components are the weights. With `g(x) = x` this is Golub–Welsch.
//!
//! Module map:
//!
//! * [`basis`]: classical orthonormal polynomial families and their Jacobi matrices.
//! * [`opmatrix`]: matrix elements and Fourier coefficients by numerical integration.
//! * [`spectral`]: symmetric eigensolvers and matrix functions.
//! * [`quadrature`]: quadrature rules and the integral approximations built on them.
//! * [`study`]: convergence sweeps against independent reference integrals.
//! * [`cli`]: the `opquad` command line front end.

pub mod adaptive;
pub mod basis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod functions;
pub mod gauss;
pub mod matrix;
pub mod opmatrix;
pub mod quadrature;
pub mod spectral;
pub mod study;

pub use basis::{BasisFamily, Domain};
pub use error::{Error, Result};
pub use functions::ScalarFn;
pub use matrix::SymmetricMatrix;
pub use opmatrix::{CoefficientVector, MultiplicationMatrix};
pub use quadrature::QuadratureRule;
pub use spectral::SpectralDecomposition;
pub use study::{StudyConfig, StudyReport, Trend};
