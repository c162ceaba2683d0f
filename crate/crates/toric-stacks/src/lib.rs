//! Stacky fans, raised heights, bounded-height point counts and Manin-type
//! asymptotics for split toric Deligne–Mumford stacks over ℚ.
//!
//! The crate is organized bottom-up:
//!
//! - [`exact_math`] — exact integer/rational matrices, HNF, kernels,
//!   saturations.
//! - [`stacky_fan`] — the combinatorial input (Σ, N, β): validation,
//!   barycentric coordinates, the q/r decomposition, twisted sectors.
//! - [`raised_heights`] — the linear forms Ξ, the cone Λ, the anti-canonical
//!   raised vector, the pairings φ and φ^∞, and local/global heights of
//!   rational torus points.
//! - [`zeta_local`] — R_σ/Q_Σ, local Fourier transforms, the Euler product γ
//!   with tail bounds, and the archimedean transform Ĥ_∞.
//! - [`geometry_cones`] — the Néron–Severi quotient model and X-functions of
//!   cones (exact triangulation plus Monte Carlo cross-check).
//! - [`counting`] — enumeration of torus points of bounded height via the
//!   finite-place skeleton, plus an independent naive oracle.
//! - [`predict_report`] — predicted exponent b and constant C, and
//!   least-squares fitting of measured counts against C·B·(log B)^{b−1}.
//! - [`fan_io`] — the JSON fan-file format.
//! - [`random_fans`] — generators of random complete simplicial stacky fans
//!   for property-test suites.

pub mod counting;
pub mod exact_math;
pub mod fan_io;
pub mod geometry_cones;
pub mod predict_report;
pub mod primes;
pub mod raised_heights;
pub mod random_fans;
pub mod stacky_fan;
pub mod zeta_local;
