//! One-parameter families of self-adjoint operators.
//!
//! An [`OperatorPath`] is an evaluator `t -> A(t)` on an interval with an
//! optional closed-form derivative. A [`ClutchedLoop`] adds a clutching
//! unitary identifying the end fiber with the start fiber together with a
//! spectral window `|lambda| <= window`; under Galerkin truncation the
//! intertwining `A(b) U = U A(a)` is demanded on the window only, and all
//! loop invariants are computed inside it.

use nalgebra::DMatrix;
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, Eigendecomposition, Scalar, ScalarField, SelfAdjoint};
use crate::tol;

type Evaluator<T> = Arc<dyn Fn(f64) -> SelfAdjoint<T> + Send + Sync>;

/// Unitary frame `t -> F(t)` used by [`cogredience_transform`].
pub type Frame<T> = Arc<dyn Fn(f64) -> DMatrix<T> + Send + Sync>;

/// A differentiable family `t -> A(t)` of self-adjoint matrices of fixed
/// dimension on a closed interval.
#[derive(Clone)]
pub struct OperatorPath<T: Scalar> {
    interval: (f64, f64),
    dim: usize,
    eval: Evaluator<T>,
    deriv: Option<Evaluator<T>>,
}

impl<T: Scalar> OperatorPath<T> {
    pub fn new(
        interval: (f64, f64),
        eval: impl Fn(f64) -> SelfAdjoint<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interval [{a}, {b}] is not a finite nondegenerate interval"
            )));
        }
        let dim = eval(a).dim();
        if dim == 0 {
            return Err(Error::InvalidArgument("path dimension is zero".into()));
        }
        Ok(OperatorPath {
            interval,
            dim,
            eval: Arc::new(eval),
            deriv: None,
        })
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(f64) -> SelfAdjoint<T> + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    pub fn constant(a: SelfAdjoint<T>, interval: (f64, f64)) -> Result<Self> {
        let dim = a.dim();
        let mut path = OperatorPath::new(interval, move |_| a.clone())?;
        path.deriv = Some(Arc::new(move |_| SelfAdjoint::zeros(dim)));
        Ok(path)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn length(&self) -> f64 {
        self.interval.1 - self.interval.0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scalar_field(&self) -> ScalarField {
        T::FIELD
    }

    pub fn has_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn evaluate(&self, t: f64) -> SelfAdjoint<T> {
        let a = (self.eval)(t);
        assert_eq!(a.dim(), self.dim, "path dimension changed at t = {t}");
        a
    }

    /// Exact derivative when provided, otherwise a central difference with
    /// step `1e-5 * (b - a)`, Richardson-extrapolated once; one-sided at
    /// the interval endpoints.
    pub fn derivative_at(&self, t: f64) -> SelfAdjoint<T> {
        if let Some(d) = &self.deriv {
            return d(t);
        }
        let (a, b) = self.interval;
        let h = tol::DERIV_STEP_REL * (b - a);
        let scale = |m: DMatrix<T>, s: f64| m.map(|x| x * T::from_re(s));
        let stencil = |h: f64| -> DMatrix<T> {
            if t - h >= a && t + h <= b {
                scale(
                    self.evaluate(t + h).into_matrix() - self.evaluate(t - h).into_matrix(),
                    0.5 / h,
                )
            } else if t + 2.0 * h <= b {
                // forward second-order at the left endpoint
                let m = scale(self.evaluate(t).into_matrix(), -3.0)
                    + scale(self.evaluate(t + h).into_matrix(), 4.0)
                    - self.evaluate(t + 2.0 * h).into_matrix();
                scale(m, 0.5 / h)
            } else {
                let m = scale(self.evaluate(t).into_matrix(), 3.0)
                    - scale(self.evaluate(t - h).into_matrix(), 4.0)
                    + self.evaluate(t - 2.0 * h).into_matrix();
                scale(m, 0.5 / h)
            }
        };
        let coarse = stencil(h);
        let fine = stencil(0.5 * h);
        let extrap = scale(scale(fine, 4.0) - coarse, 1.0 / 3.0);
        SelfAdjoint::symmetrize(extrap)
    }

    /// Restriction to a subinterval, sharing the evaluators.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<OperatorPath<T>> {
        let (a, b) = self.interval;
        if !(a <= lo && lo < hi && hi <= b) {
            return Err(Error::InvalidArgument(format!(
                "[{lo}, {hi}] is not a subinterval of [{a}, {b}]"
            )));
        }
        Ok(OperatorPath {
            interval: (lo, hi),
            dim: self.dim,
            eval: self.eval.clone(),
            deriv: self.deriv.clone(),
        })
    }

    /// The reversed path `t -> A(a + b - t)` on the same interval.
    pub fn reversed(&self) -> OperatorPath<T> {
        let (a, b) = self.interval;
        let eval = self.eval.clone();
        let deriv = self.deriv.clone();
        OperatorPath {
            interval: (a, b),
            dim: self.dim,
            eval: Arc::new(move |t| eval(a + b - t)),
            deriv: deriv.map(|d| {
                let neg: Evaluator<T> = Arc::new(move |t: f64| {
                    SelfAdjoint::symmetrize(d(a + b - t).into_matrix().map(|x| -x))
                });
                neg
            }),
        }
    }
}

/// Exact or finite-difference derivative of the path at `t`.
pub fn path_derivative<T: Scalar>(path: &OperatorPath<T>, t: f64) -> SelfAdjoint<T> {
    path.derivative_at(t)
}

/// Conjugates the path by a unitary frame: `t -> F(t)* A(t) F(t)`.
///
/// The frame is validated on a probe grid; spectra are pointwise identical
/// to the original path, so every spectral invariant is preserved.
pub fn cogredience_transform<T: Scalar>(
    path: &OperatorPath<T>,
    frame: Frame<T>,
) -> Result<OperatorPath<T>> {
    let (a, b) = path.interval();
    let n = path.dim();
    for k in 0..=16 {
        let t = a + (b - a) * (k as f64) / 16.0;
        let f = frame(t);
        if f.nrows() != n || f.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "frame is {}x{} but the path has dimension {n}",
                f.nrows(),
                f.ncols()
            )));
        }
        let defect = (f.adjoint() * &f - DMatrix::identity(n, n))
            .map(|x| x.modulus())
            .max();
        if defect > tol::FRAME_TOL {
            return Err(Error::NonUnitaryFrame { t, defect });
        }
    }
    let eval = path.eval.clone();
    let frame2 = frame.clone();
    Ok(OperatorPath {
        interval: path.interval,
        dim: n,
        eval: Arc::new(move |t| eval(t).conjugate_by(&frame2(t))),
        deriv: None,
    })
}

/// A path together with a clutching unitary `U` and a spectral window.
///
/// The pair `(path, U)` presents a family over the circle: the fiber at
/// `b` is identified with the fiber at `a` through `U`, which must
/// intertwine the endpoint operators on the window, `A(b) U v = lambda U v`
/// for every eigenpair `(lambda, v)` of `A(a)` with `|lambda| <= window`.
#[derive(Clone)]
pub struct ClutchedLoop<T: Scalar> {
    pub path: OperatorPath<T>,
    clutch: DMatrix<T>,
    window: f64,
}

impl<T: Scalar> ClutchedLoop<T> {
    pub fn new(path: OperatorPath<T>, clutch: DMatrix<T>, window: f64) -> Result<Self> {
        let n = path.dim();
        if clutch.nrows() != n || clutch.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "clutch is {}x{} but the path has dimension {n}",
                clutch.nrows(),
                clutch.ncols()
            )));
        }
        if !(window > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spectral window {window} must be positive"
            )));
        }
        let defect = (clutch.adjoint() * &clutch - DMatrix::identity(n, n))
            .map(|x| x.modulus())
            .max();
        if defect > tol::UNITARY_TOL {
            return Err(Error::NonUnitaryFrame {
                t: path.interval.1,
                defect,
            });
        }
        Ok(ClutchedLoop {
            path,
            clutch,
            window,
        })
    }

    pub fn clutch(&self) -> &DMatrix<T> {
        &self.clutch
    }

    pub fn window(&self) -> f64 {
        self.window
    }
}

/// Intertwining defect of one windowed eigenpair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClutchDefect {
    pub lambda: f64,
    pub defect: f64,
}

/// Outcome of [`validate_clutch`]: one entry per eigenpair of `A(a)` inside
/// the window. Failures are reported, not thrown.
#[derive(Clone, Debug, Serialize)]
pub struct ClutchReport {
    pub entries: Vec<ClutchDefect>,
    pub max_defect: f64,
    pub clutch_tol: f64,
    pub pass: bool,
}

/// Checks `||A(b) U v - lambda U v|| <= clutch_tol` for every eigenpair of
/// `A(a)` with `|lambda| <= window`.
pub fn validate_clutch<T: Scalar>(lp: &ClutchedLoop<T>) -> Result<ClutchReport> {
    validate_clutch_with(lp, tol::CLUTCH_TOL)
}

pub fn validate_clutch_with<T: Scalar>(
    lp: &ClutchedLoop<T>,
    clutch_tol: f64,
) -> Result<ClutchReport> {
    let (a, b) = lp.path.interval();
    let start = lp.path.evaluate(a);
    let end = lp.path.evaluate(b);
    let eig = eig_sym(&start)?;
    let mut entries = Vec::new();
    let mut max_defect: f64 = 0.0;
    for k in 0..eig.dim() {
        let lambda = eig.eigenvalues[k];
        if lambda.abs() > lp.window {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let uv = lp.clutch.clone() * v;
        let defect = (end.matrix() * &uv - &uv * T::from_re(lambda)).norm();
        max_defect = max_defect.max(defect);
        entries.push(ClutchDefect { lambda, defect });
    }
    Ok(ClutchReport {
        entries,
        max_defect,
        clutch_tol,
        pass: max_defect <= clutch_tol,
    })
}

/// Adaptively refined sampling of a path: a strictly increasing grid
/// covering the interval with the full spectrum at each instant.
pub struct PathSampling<T: Scalar> {
    pub grid: Vec<f64>,
    pub spectra: Vec<Eigendecomposition<T>>,
    /// Effective Lipschitz bound (input bound or largest observed slope).
    pub m_eff: f64,
    /// Largest `|eigenvalue|` seen over the sampling.
    pub norm_scale: f64,
}

impl<T: Scalar> PathSampling<T> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Absolute kernel threshold for this sampling.
    pub fn kernel_tol_abs(&self, kernel_tol_rel: f64) -> f64 {
        kernel_tol_rel * (1.0 + self.norm_scale)
    }

    /// Number of eigenvalues below `-zero_tol` at grid index `i`.
    pub fn negatives_at(&self, i: usize, zero_tol: f64) -> usize {
        self.spectra[i].count_negative(zero_tol)
    }
}

/// Samples the path on an adaptively refined grid.
///
/// Refinement guarantees that no eigenvalue branch can cross zero
/// undetected between adjacent instants: a gap of width `h` is split while
/// some branch has an endpoint value within `m_eff * h` of zero, where
/// `m_eff` is the Lipschitz bound raised to the largest observed slope.
/// Splitting stops once an endpoint enters the kernel band (the instant is
/// then detection-ready) or the spacing reaches the kernel-resolution
/// scale `kernel_tol / m_eff`. Deterministic for fixed inputs; fails with
/// the offending subinterval when the grid would exceed
/// [`tol::MAX_SAMPLE_POINTS`].
pub fn sample_path<T: Scalar>(
    path: &OperatorPath<T>,
    initial_points: usize,
    lipschitz_bound: f64,
) -> Result<PathSampling<T>> {
    if initial_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "initial_points = {initial_points} must be at least 2"
        )));
    }
    if !(lipschitz_bound > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lipschitz_bound = {lipschitz_bound} must be positive"
        )));
    }
    let (a, b) = path.interval();
    let mut grid: Vec<f64> = (0..initial_points)
        .map(|k| a + (b - a) * (k as f64) / ((initial_points - 1) as f64))
        .collect();
    let mut spectra: Vec<Eigendecomposition<T>> = grid
        .iter()
        .map(|&t| eig_sym(&path.evaluate(t)))
        .collect::<Result<_>>()?;

    let mut m_eff = lipschitz_bound;
    loop {
        let norm_scale = spectra
            .iter()
            .map(|e| e.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs())))
            .fold(0.0, f64::max);
        let kernel_abs = tol::kernel_tol(norm_scale);

        // Raise the effective bound to the largest observed slope first so
        // the proximity rule below never under-refines a steep family.
        for i in 0..grid.len() - 1 {
            let h = grid[i + 1] - grid[i];
            let disp = (0..path.dim())
                .map(|k| (spectra[i + 1].eigenvalues[k] - spectra[i].eigenvalues[k]).abs())
                .fold(0.0, f64::max);
            if disp > m_eff * h {
                m_eff = 1.2 * disp / h;
            }
        }
        let h_floor = (kernel_abs / m_eff).max(1e-12 * (b - a));

        let mut midpoints = Vec::new();
        for i in 0..grid.len() - 1 {
            let h = grid[i + 1] - grid[i];
            if h <= h_floor {
                continue;
            }
            // a gap whose endpoint already sits inside the kernel band is
            // detection-ready; deeper refinement adds nothing
            let in_band = spectra[i].min_abs_eigenvalue() <= kernel_abs
                || spectra[i + 1].min_abs_eigenvalue() <= kernel_abs;
            if in_band {
                continue;
            }
            let near_zero = (0..path.dim()).any(|k| {
                spectra[i].eigenvalues[k].abs() < m_eff * h
                    || spectra[i + 1].eigenvalues[k].abs() < m_eff * h
            });
            if near_zero {
                midpoints.push((i, 0.5 * (grid[i] + grid[i + 1])));
            }
        }
        if midpoints.is_empty() {
            return Ok(PathSampling {
                grid,
                spectra,
                m_eff,
                norm_scale,
            });
        }
        if grid.len() + midpoints.len() > tol::MAX_SAMPLE_POINTS {
            let (i, _) = midpoints[0];
            return Err(Error::ResolutionExhausted {
                lo: grid[i],
                hi: grid[i + 1],
                points: grid.len() + midpoints.len(),
            });
        }
        // merge old and new points in one ordered pass
        let mut new_grid = Vec::with_capacity(grid.len() + midpoints.len());
        let mut new_spectra = Vec::with_capacity(grid.len() + midpoints.len());
        let mut pending = midpoints.into_iter().peekable();
        for (i, (t, e)) in grid.drain(..).zip(spectra.drain(..)).enumerate() {
            new_grid.push(t);
            new_spectra.push(e);
            if let Some(&(j, tm)) = pending.peek() {
                if j == i {
                    new_grid.push(tm);
                    new_spectra.push(eig_sym(&path.evaluate(tm))?);
                    pending.next();
                }
            }
        }
        grid = new_grid;
        spectra = new_spectra;
    }
}
