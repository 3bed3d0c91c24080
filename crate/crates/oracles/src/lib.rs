//! Reference computations for cross-checking `slater-barron`.
//!
//! Everything here is deliberately naive: tensor-product quadrature instead of
//! closed forms, Leibniz expansions instead of factorizations. Nothing in this
//! crate depends on the main library.

pub mod det;
pub mod quad;
pub mod special;
pub mod wave;

pub use det::{dense_exp_gram, leibniz_det, leibniz_det_complex, mp_logdet_cholesky, sym_eigenvalues};
pub use quad::{adaptive_gl, gauss_hermite_prob, gauss_legendre};
pub use special::{highpass_by_fourier, hermite_orbital_overlap_gh, sine_integral_quad, softplus_by_convolution};
pub use wave::{planewave_slater_leibniz, slater_inner_gh, slater_inner_gh_factored};
