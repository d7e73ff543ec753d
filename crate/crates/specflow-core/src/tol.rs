//! Tolerance and resolution defaults.
//!
//! Every threshold used by the solvers is named here. Scale-dependent
//! tolerances are stored as relative factors and multiplied by `1 + scale`
//! at the point of use, so they are invariant under rescaling the operator
//! family.

use serde::{Deserialize, Serialize};

/// An eigenvalue counts as a kernel element when `|lambda| <= KERNEL_TOL_REL * (1 + ||A||)`.
pub const KERNEL_TOL_REL: f64 = 1e-8;

/// Admissible self-adjointness defect before a matrix is rejected, relative to `||A||`.
pub const SYMMETRY_TOL_REL: f64 = 1e-12;

/// Polarization consistency threshold for reconstructing an operator from a quadratic form.
pub const POLARIZATION_TOL: f64 = 1e-8;

/// Eigenpair residual bound, relative to `1 + ||A||`.
pub const EIG_RESIDUAL_REL: f64 = 1e-10;

/// Orthonormality defect bound for eigenvector sets and clutching unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// Unitarity defect bound for cogredience frames.
pub const FRAME_TOL: f64 = 1e-8;

/// Max intertwining defect accepted on the spectral window of a clutched loop.
pub const CLUTCH_TOL: f64 = 1e-8;

/// Finite-difference step for path derivatives, relative to the interval length.
pub const DERIV_STEP_REL: f64 = 1e-5;

/// Crossing instants are bracketed to this accuracy, relative to the interval length.
pub const BRACKET_ACCURACY_REL: f64 = 1e-10;

/// A crossing form counts as regular when its smallest `|eigenvalue|` exceeds
/// `REGULARITY_TOL_REL * (1 + ||dA/dt||)`.
pub const REGULARITY_TOL_REL: f64 = 1e-6;

/// Hard cap on adaptive sampling size.
pub const MAX_SAMPLE_POINTS: usize = 200_000;

/// Accepted gap between the unwrapped determinant phase and `2*pi*winding` (radians).
pub const WINDING_TOL: f64 = 0.2;

/// Largest admissible phase step between adjacent winding samples (radians).
pub const MAX_PHASE_STEP: f64 = std::f64::consts::FRAC_PI_2;

/// Transversality threshold for the index-bundle subspace, relative to `1 + max ||L_x||`.
pub const TRANSVERSALITY_TOL_REL: f64 = 1e-6;

/// Max gradient norm along a trivial branch of critical points.
pub const BRANCH_TOL: f64 = 1e-10;

/// Newton residual target for nontrivial critical points.
pub const NEWTON_TOL: f64 = 1e-10;

/// Newton iteration cap per continuation step.
pub const NEWTON_MAX_ITER: usize = 50;

/// Initial amplitude of the kernel-direction Newton seed.
pub const NEWTON_SEED_AMPLITUDE: f64 = 1e-3;

/// Smallest displacement that still counts as leaving the trivial branch is
/// `10 * NEWTON_STEP_FLOOR`.
pub const NEWTON_STEP_FLOOR: f64 = 1e-9;

/// Bifurcation bracket width target, relative to the loop length.
pub const LOCATE_TOL_REL: f64 = 1e-8;

/// Arc endpoints are nudged off singular parameters by this fraction of the loop length.
pub const ENDPOINT_NUDGE_REL: f64 = 1e-7;

/// Attempts before endpoint nudging gives up.
pub const MAX_NUDGES: usize = 8;

/// Dyadic coarsening levels 2^0 .. 2^(BOX_COUNT_LEVELS-1) for the box-counting fit.
pub const BOX_COUNT_LEVELS: usize = 5;

/// Longest run of barely separated crossing clusters before the kernel band
/// counts as unresolved.
pub const MAX_CLUSTER: usize = 8;

/// Kernel tolerance at operator scale `norm`.
pub fn kernel_tol(norm: f64) -> f64 {
    KERNEL_TOL_REL * (1.0 + norm)
}

/// Run-time overridable subset of the tolerances.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    /// Relative kernel threshold (defaults to [`KERNEL_TOL_REL`]).
    pub kernel_tol: f64,
    /// Clutch intertwining defect bound (defaults to [`CLUTCH_TOL`]).
    pub clutch_tol: f64,
    /// Winding closure defect bound in radians (defaults to [`WINDING_TOL`]).
    pub winding_tol: f64,
    /// Relative bifurcation bracket width (defaults to [`LOCATE_TOL_REL`]).
    pub locate_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kernel_tol: KERNEL_TOL_REL,
            clutch_tol: CLUTCH_TOL,
            winding_tol: WINDING_TOL,
            locate_tol: LOCATE_TOL_REL,
        }
    }
}

impl Tolerances {
    /// Kernel threshold at operator scale `norm`.
    pub fn kernel_at(&self, norm: f64) -> f64 {
        self.kernel_tol * (1.0 + norm)
    }
}
