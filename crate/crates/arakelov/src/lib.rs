//! Numerical Arakelov geometry for hyperelliptic Riemann surfaces and
//! principally polarised complex abelian varieties: Faltings' delta invariant,
//! the Zhang-Kawazumi invariant phi, the Arakelov-Green function, and the
//! theta-function integrals (H, S_k, Lambda, B) and modular discriminants
//! (||phi_g||, ||Delta_g||) they are built from.
//!
//! A curve is given by the complex branch points of y^2 = (x-a_1)...(x-a_{2g+1});
//! an abelian variety by a period matrix. See the `examples/` directory for one
//! runnable program per capability and the `arakelov` binary for the CLI.

pub mod abel_jacobi;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod hyperelliptic;
pub mod invariants;
pub mod numerics;
pub mod theta;
pub mod verify;

pub use abel_jacobi::Jacobian;
pub use error::{Error, Result};
pub use hyperelliptic::HyperellipticCurve;
pub use numerics::{Estimate, McConfig, StreamKind};
pub use theta::{PeriodMatrix, ThetaCharacteristic};
