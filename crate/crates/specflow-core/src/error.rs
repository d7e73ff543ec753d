//! Error types shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not self-adjoint: defect {defect:.3e} exceeds {tol:.3e}")]
    NotSelfAdjoint { defect: f64, tol: f64 },

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    EigFailed { dim: usize },

    #[error("quadratic form is not consistent with a bilinear polarization: defect {defect:.3e}")]
    NonBilinearForm { defect: f64 },

    #[error("component classification is degenerate: {positive} positive / {negative} negative eigenvalues with essential rank {essential_rank}")]
    DegenerateSpectrum {
        positive: usize,
        negative: usize,
        essential_rank: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("path endpoint t = {t} is singular: min |eigenvalue| = {min_abs_eig:.3e} <= kernel tolerance {kernel_tol:.3e}")]
    EndpointSingular {
        t: f64,
        min_abs_eig: f64,
        kernel_tol: f64,
    },

    #[error("adaptive sampling exhausted {points} points without resolving [{lo}, {hi}]")]
    ResolutionExhausted { lo: f64, hi: f64, points: usize },

    #[error("unresolved crossing cluster in [{lo}, {hi}]: {count} coincident branches")]
    UnresolvedCluster { lo: f64, hi: f64, count: usize },

    #[error("irregular crossing at t = {t}: smallest |crossing-form eigenvalue| {min_form_eig:.3e} <= {regularity_tol:.3e}; use the eigenvalue-tracking method")]
    IrregularCrossing {
        t: f64,
        min_form_eig: f64,
        regularity_tol: f64,
    },

    #[error("frame is not unitary at t = {t}: defect {defect:.3e}")]
    NonUnitaryFrame { t: f64, defect: f64 },

    #[error("clutch validation failed: max intertwining defect {max_defect:.3e} exceeds {clutch_tol:.3e}")]
    ClutchInvalid { max_defect: f64, clutch_tol: f64 },

    #[error("spectral window too small: crossing branch from t = {t_crossing} reaches |lambda| = {reached:.3e} beyond window {window}")]
    WindowExit {
        t_crossing: f64,
        reached: f64,
        window: f64,
    },

    #[error("winding sample {index} vanishes; the determinant left the window")]
    ZeroWindingSample { index: usize },

    #[error("winding under-resolved: phase step {step:.3} rad at sample {index} exceeds pi/2")]
    UnderResolvedWinding { index: usize, step: f64 },

    #[error("winding closure defect {defect:.3} rad exceeds tolerance {tol:.3}")]
    WindingDefect { defect: f64, tol: f64 },

    #[error("transverse subspace would exceed the codomain dimension {dim}: family is inconsistent at grid point {grid_index}")]
    TransverseExhausted { dim: usize, grid_index: usize },

    #[error("index bundle rank jumps at grid point {grid_index}: rank {rank} vs {expected}; family is not Fredholm-constant")]
    RankJump {
        grid_index: usize,
        rank: usize,
        expected: usize,
    },

    #[error("virtual rank {virtual_rank} disagrees with the classical index {index} at grid point {grid_index}")]
    IndexMismatch {
        grid_index: usize,
        virtual_rank: i64,
        index: i64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate family: could not nudge arc endpoints to invertibility after {attempts} attempts near {t}")]
    DegenerateFamily { t: f64, attempts: usize },

    #[error("scan inconsistency: flagged set is empty but a sampled loop has spectral flow {sf}; refine the grid")]
    ScanInconsistent { sf: i64 },

    #[error("evaluation failed at t = {t}: {detail}")]
    EvaluationFailed { t: f64, detail: String },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("unknown parameter '{key}' for scenario '{scenario}'")]
    UnknownParam { scenario: String, key: String },

    #[error("invalid value for parameter '{key}': {detail}")]
    BadParam { key: String, detail: String },
}

impl Error {
    /// Coarse classification used by the CLI to pick an exit code:
    /// `true` for input/validation failures, `false` for computational ones.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonSquare { .. }
                | Error::NotSelfAdjoint { .. }
                | Error::InvalidArgument(_)
                | Error::UnknownScenario(_)
                | Error::UnknownParam { .. }
                | Error::BadParam { .. }
        )
    }
}
