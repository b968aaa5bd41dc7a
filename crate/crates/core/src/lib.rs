//! Level-set optimization of Dirichlet eigenvalue functionals
//! `F(λ₁, …, λ_N) + |Ω|` in 2D, with diagnostics of the free boundary.
//!
//! [`domain`] holds grids and level sets, [`spectral`] the eigenpairs and
//! torsion function, [`objective`] the regularized functionals `F_p` and
//! their weights, [`optimizer`] the gradient flow, [`diagnostics`] the
//! boundary tests and [`cli`] the command layer. Each capability has a
//! runnable program under `examples/`.

pub mod domain;
pub mod spectral;
pub mod objective;
pub mod optimizer;
pub mod diagnostics;
pub mod cli;
