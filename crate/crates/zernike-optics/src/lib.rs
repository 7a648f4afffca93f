//! Zernike-mode optics toolkit.
//!
//! Everything here lives on (or propagates from) the unit disc: Zernike
//! polynomials `Z_n^m(ρ,θ) = √(n+1) R_n^{|m|}(ρ) e^{imθ}`, their disc
//! quadrature and expansion fitting, linearization of products through
//! Clebsch–Gordan coefficients, analytic Fourier/Fresnel propagation of the
//! modes, and two-photon (SPDC) states built in the tensor-product mode basis
//! together with their reduced-density-matrix entanglement analysis.
//!
//! The crate is organized to mirror that pipeline:
//!
//! * [`mode`] — mode indices `(n, m)`, validation, enumeration, linear
//!   ordering.
//! * [`special`] — self-contained special functions: Bessel `J_ν`, spherical
//!   Bessel `j_l`, log-factorials, Clebsch–Gordan coefficients.
//! * [`quadrature`] — Gauss–Legendre × uniform-azimuth rules on the disc.
//! * [`zernike`] — radial/full polynomial evaluation, expansions, fitting,
//!   reconstruction, rotation.
//! * [`coupling`] — product linearization `Z_a·Z_b = Σ A Z_c` with all
//!   selection rules.
//! * [`field`] — sampled complex fields on rectangular grids plus their
//!   on-disk formats (CSV, 16-bit PGM).
//! * [`propagation`] — analytic mode transforms `Z̃`, Fraunhofer image
//!   fields, and Fresnel propagation via a Bessel–Bessel series.
//! * [`spdc`] — single/two-photon states, correlation functions, reduced
//!   density matrices, purity, Schmidt spectra, entanglement verdicts.
//!
//! All floating-point work is `f64`. Functions are pure and types immutable
//! after construction, so everything can be shared freely across threads;
//! grid sampling parallelizes per pixel with bit-identical output regardless
//! of thread count.

pub mod coupling;
mod error;
pub mod field;
pub mod linalg;
pub mod mode;
pub mod propagation;
pub mod quadrature;
pub mod spdc;
pub mod special;
pub mod zernike;

pub use error::Error;
pub use mode::ModeIndex;
pub use zernike::ZernikeExpansion;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
