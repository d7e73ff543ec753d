//! The spectral flow engine.
//!
//! Two independent routes to the same integer:
//!
//! * [`spectral_flow_crossing`] locates every kernel instant of the path,
//!   restricts the derivative to the kernel (the crossing form) and sums
//!   the signatures. Valid when all crossings are regular.
//! * [`spectral_flow_counting`] counts signed zero transits of the sorted
//!   eigenvalue branches over an adaptive sampling. Needs no derivative
//!   and tolerates irregular crossings.
//!
//! [`spectral_flow_loop`] evaluates either route on a clutched loop after
//! validating the clutch on the spectral window, and [`doubling_pair`]
//! checks the real/complex counting conventions against each other.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, Scalar, ScalarField, SelfAdjoint};
use crate::paths::{sample_path, validate_clutch_with, ClutchedLoop, OperatorPath, PathSampling};
use crate::tol;

/// Dimension-counting convention for kernels of complex operators.
///
/// `ComplexDim` counts complex dimensions and is the default for Hermitian
/// paths (the Chern identity holds in this normalization); `RealDim`
/// doubles complex counts and makes the doubling identity
/// `sf_C = 2 sf_R` literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convention {
    RealDim,
    ComplexDim,
}

/// How a spectral flow value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    CrossingForm,
    EigenvalueTracking,
}

/// One crossing of the path: the instant, an orthonormal kernel basis, and
/// (once completed by [`crossing_form`]) the crossing form with its
/// signature and regularity flag.
#[derive(Clone, Debug)]
pub struct CrossingRecord<T: Scalar> {
    pub t: f64,
    pub kernel_basis: DMatrix<T>,
    pub form: Option<SelfAdjoint<T>>,
    pub signature: Option<i64>,
    pub regular: Option<bool>,
}

impl<T: Scalar> CrossingRecord<T> {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.ncols()
    }

    pub fn summary(&self) -> CrossingSummary {
        CrossingSummary {
            t: self.t,
            kernel_dim: self.kernel_dim(),
            signature: self.signature.unwrap_or(0),
            regular: self.regular,
        }
    }
}

/// JSON-facing view of a crossing.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CrossingSummary {
    pub t: f64,
    pub kernel_dim: usize,
    pub signature: i64,
    pub regular: Option<bool>,
}

/// A computed spectral flow together with its crossing list.
#[derive(Clone, Debug)]
pub struct SpectralFlow<T: Scalar> {
    pub value: i64,
    pub convention: Convention,
    pub method: Method,
    pub crossings: Vec<CrossingRecord<T>>,
}

impl<T: Scalar> SpectralFlow<T> {
    pub fn result(&self) -> SpectralFlowResult {
        SpectralFlowResult {
            value: self.value,
            convention: self.convention,
            method: self.method,
            crossings: self.crossings.iter().map(CrossingRecord::summary).collect(),
        }
    }
}

/// Serializable spectral flow report: `{value, convention, method, crossings}`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralFlowResult {
    pub value: i64,
    pub convention: Convention,
    pub method: Method,
    pub crossings: Vec<CrossingSummary>,
}

fn natural_convention(field: ScalarField) -> Convention {
    match field {
        ScalarField::Real => Convention::RealDim,
        ScalarField::Complex => Convention::ComplexDim,
    }
}

/// Largest derivative norm over a probe grid, padded by 50%; used as the
/// Lipschitz bound for eigenvalue branches when the caller has none.
pub fn estimate_lipschitz<T: Scalar>(path: &OperatorPath<T>) -> f64 {
    let (a, b) = path.interval();
    let mut m: f64 = 0.0;
    for k in 0..=16 {
        let t = a + (b - a) * (k as f64) / 16.0;
        m = m.max(path.derivative_at(t).op_norm_bound());
    }
    let floor = 1e-3 * (1.0 + path.evaluate(a).op_norm_bound()) / (b - a);
    (1.5 * m).max(floor)
}

/// Default adaptive sampling for spectral flow work.
pub fn default_sampling<T: Scalar>(path: &OperatorPath<T>) -> Result<PathSampling<T>> {
    sample_path(path, 33, estimate_lipschitz(path))
}

fn positives_at<T: Scalar>(s: &PathSampling<T>, i: usize) -> usize {
    s.spectra[i].count_positive(0.0)
}

/// Locates every kernel instant of the path to accuracy
/// `BRACKET_ACCURACY_REL * (b - a)` and returns crossing records without
/// forms. Endpoints must be invertible at `kernel_tol`.
pub fn find_crossings<T: Scalar>(
    path: &OperatorPath<T>,
    sampling: &PathSampling<T>,
    kernel_tol: f64,
) -> Result<Vec<CrossingRecord<T>>> {
    let (a, b) = path.interval();
    for (t, idx) in [(a, 0), (b, sampling.len() - 1)] {
        let min_abs = sampling.spectra[idx].min_abs_eigenvalue();
        if min_abs <= kernel_tol {
            return Err(Error::EndpointSingular {
                t,
                min_abs_eig: min_abs,
                kernel_tol,
            });
        }
    }
    let accuracy = tol::BRACKET_ACCURACY_REL * (b - a);

    // candidate instants with the spectral gap reached there
    let mut candidates: Vec<(f64, f64)> = Vec::new();

    // sign-change crossings: recursively locate every jump of the positive
    // count, so several distinct crossings inside one gap are all found
    for i in 0..sampling.len() - 1 {
        let (p_lo, p_hi) = (positives_at(sampling, i), positives_at(sampling, i + 1));
        if p_lo != p_hi {
            scan_sign_jumps(
                path,
                sampling.grid[i],
                sampling.grid[i + 1],
                p_lo,
                p_hi,
                accuracy,
                &mut candidates,
            )?;
        }
    }

    // touch crossings: polish local minima of the spectral gap inside the
    // kernel band
    for i in 1..sampling.len() - 1 {
        let here = sampling.spectra[i].min_abs_eigenvalue();
        if here > kernel_tol
            || here > sampling.spectra[i - 1].min_abs_eigenvalue()
            || here > sampling.spectra[i + 1].min_abs_eigenvalue()
        {
            continue;
        }
        let lo = sampling.grid[i - 1];
        let hi = sampling.grid[i + 1];
        let t = golden_min(lo, hi, accuracy * 0.25, |t| {
            Ok(eig_sym(&path.evaluate(t))?.min_abs_eigenvalue())
        })?;
        let gap = eig_sym(&path.evaluate(t))?.min_abs_eigenvalue();
        candidates.push((t, gap));
    }

    // instants closer than the kernel-resolution scale describe the same
    // crossing; keep the deepest representative of each cluster
    candidates.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let merge_radius = (2.0 * kernel_tol / sampling.m_eff).max(4.0 * accuracy);
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (t, gap) in candidates {
        match merged.last_mut() {
            Some(last) if (t - last.0).abs() <= merge_radius => {
                if gap < last.1 {
                    *last = (t, gap);
                }
            }
            _ => merged.push((t, gap)),
        }
    }
    let clusters: Vec<f64> = merged.into_iter().map(|(t, _)| t).collect();

    // a long run of barely separated clusters means the kernel band is not
    // resolvable at this tolerance (e.g. an identically singular segment)
    let mut run = 1usize;
    for w in clusters.windows(2) {
        run = if w[1] - w[0] < 8.0 * merge_radius { run + 1 } else { 1 };
        if run > tol::MAX_CLUSTER {
            return Err(Error::UnresolvedCluster {
                lo: w[1] - 8.0 * merge_radius * run as f64,
                hi: w[1],
                count: run,
            });
        }
    }

    let mut records = Vec::new();
    for t in clusters {
        let eig = eig_sym(&path.evaluate(t))?;
        let kernel_basis = eig.kernel_vectors(kernel_tol);
        if kernel_basis.ncols() == 0 {
            // polishing drifted outside the kernel band: spurious event
            continue;
        }
        records.push(CrossingRecord {
            t,
            kernel_basis,
            form: None,
            signature: None,
            regular: None,
        });
    }
    Ok(records)
}

/// Finds all instants in `(lo, hi)` where the positive eigenvalue count
/// jumps: bisects to one jump, then rescans both remaining sides.
fn scan_sign_jumps<T: Scalar>(
    path: &OperatorPath<T>,
    lo0: f64,
    hi0: f64,
    p_lo0: usize,
    p_hi0: usize,
    accuracy: f64,
    out: &mut Vec<(f64, f64)>,
) -> Result<()> {
    let (mut lo, mut hi) = (lo0, hi0);
    let p_lo = p_lo0;
    while hi - lo > accuracy {
        let mid = 0.5 * (lo + hi);
        let p_mid = eig_sym(&path.evaluate(mid))?.count_positive(0.0);
        if p_mid != p_lo {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let gap = eig_sym(&path.evaluate(t))?.min_abs_eigenvalue();
    out.push((t, gap));

    // account for counts on either side of the located jump and rescan
    let eps = 2.0 * accuracy;
    if t - eps > lo0 {
        let p_left = eig_sym(&path.evaluate(t - eps))?.count_positive(0.0);
        if p_left != p_lo0 {
            scan_sign_jumps(path, lo0, t - eps, p_lo0, p_left, accuracy, out)?;
        }
    }
    if t + eps < hi0 {
        let p_right = eig_sym(&path.evaluate(t + eps))?.count_positive(0.0);
        if p_right != p_hi0 {
            scan_sign_jumps(path, t + eps, hi0, p_right, p_hi0, accuracy, out)?;
        }
    }
    Ok(())
}

/// Golden-section minimization of a unimodal scalar; deterministic.
fn golden_min(
    mut lo: f64,
    mut hi: f64,
    accuracy: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > accuracy {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Restricts the path derivative to the kernel of the crossing:
/// `Gamma[i][j] = <dA/dt(t) v_j, v_i>`, completing the record with the
/// form, its signature and the regularity flag.
pub fn crossing_form<T: Scalar>(
    path: &OperatorPath<T>,
    record: &CrossingRecord<T>,
) -> Result<CrossingRecord<T>> {
    if record.kernel_dim() == 0 {
        return Err(Error::InvalidArgument(
            "crossing_form needs a nonempty kernel basis".into(),
        ));
    }
    let da = path.derivative_at(record.t);
    let v = &record.kernel_basis;
    let gamma = SelfAdjoint::symmetrize(v.adjoint() * da.matrix() * v);
    let eig = eig_sym(&gamma)?;
    let reg_tol = tol::REGULARITY_TOL_REL * (1.0 + da.op_norm_bound());
    let pos = eig.count_positive(reg_tol) as i64;
    let neg = eig.count_negative(reg_tol) as i64;
    let regular = eig.min_abs_eigenvalue() > reg_tol;
    Ok(CrossingRecord {
        t: record.t,
        kernel_basis: record.kernel_basis.clone(),
        form: Some(gamma),
        signature: Some(pos - neg),
        regular: Some(regular),
    })
}

/// Spectral flow by the crossing-form formula: the sum of crossing
/// signatures over a path with regular crossings and invertible endpoints.
pub fn spectral_flow_crossing<T: Scalar>(path: &OperatorPath<T>) -> Result<SpectralFlow<T>> {
    let sampling = default_sampling(path)?;
    spectral_flow_crossing_sampled(path, &sampling)
}

pub fn spectral_flow_crossing_sampled<T: Scalar>(
    path: &OperatorPath<T>,
    sampling: &PathSampling<T>,
) -> Result<SpectralFlow<T>> {
    let kernel_tol = sampling.kernel_tol_abs(tol::KERNEL_TOL_REL);
    let bare = find_crossings(path, sampling, kernel_tol)?;
    let mut crossings = Vec::with_capacity(bare.len());
    for rec in &bare {
        let done = crossing_form(path, rec)?;
        if done.regular != Some(true) {
            let gamma = done.form.as_ref().expect("completed record has a form");
            let min_form_eig = eig_sym(gamma)?.min_abs_eigenvalue();
            return Err(Error::IrregularCrossing {
                t: done.t,
                min_form_eig,
                regularity_tol: tol::REGULARITY_TOL_REL
                    * (1.0 + path.derivative_at(done.t).op_norm_bound()),
            });
        }
        crossings.push(done);
    }
    let value = crossings.iter().map(|c| c.signature.unwrap_or(0)).sum();
    Ok(SpectralFlow {
        value,
        convention: natural_convention(T::FIELD),
        method: Method::CrossingForm,
        crossings,
    })
}

/// Spectral flow by eigenvalue tracking: the signed count of zero transits
/// of the sorted branches over the adaptive sampling. No derivative needed;
/// crossings are still located and reported, but carry no form.
pub fn spectral_flow_counting<T: Scalar>(path: &OperatorPath<T>) -> Result<SpectralFlow<T>> {
    let sampling = default_sampling(path)?;
    spectral_flow_counting_sampled(path, &sampling)
}

pub fn spectral_flow_counting_sampled<T: Scalar>(
    path: &OperatorPath<T>,
    sampling: &PathSampling<T>,
) -> Result<SpectralFlow<T>> {
    let kernel_tol = sampling.kernel_tol_abs(tol::KERNEL_TOL_REL);
    let bare = find_crossings(path, sampling, kernel_tol)?;

    // per-gap transits telescope; per-crossing signatures come from the
    // positive count on either side of each located instant
    let value: i64 = {
        let first = positives_at(sampling, 0) as i64;
        let last = positives_at(sampling, sampling.len() - 1) as i64;
        let mut transits = 0i64;
        for i in 0..sampling.len() - 1 {
            transits += positives_at(sampling, i + 1) as i64 - positives_at(sampling, i) as i64;
        }
        debug_assert_eq!(transits, last - first);
        transits
    };

    let (a, b) = path.interval();
    let mut crossings = Vec::with_capacity(bare.len());
    for (j, rec) in bare.iter().enumerate() {
        let before = if j == 0 { a } else { 0.5 * (bare[j - 1].t + rec.t) };
        let after = if j + 1 == bare.len() {
            b
        } else {
            0.5 * (rec.t + bare[j + 1].t)
        };
        let p_before = eig_sym(&path.evaluate(before))?.count_positive(0.0) as i64;
        let p_after = eig_sym(&path.evaluate(after))?.count_positive(0.0) as i64;
        crossings.push(CrossingRecord {
            t: rec.t,
            kernel_basis: rec.kernel_basis.clone(),
            form: None,
            signature: Some(p_after - p_before),
            regular: None,
        });
    }
    Ok(SpectralFlow {
        value,
        convention: natural_convention(T::FIELD),
        method: Method::EigenvalueTracking,
        crossings,
    })
}

/// Spectral flow of a clutched loop, computed on the underlying path after
/// validating the clutch on the spectral window.
///
/// Every zero transit happens inside the window, so the windowed value is
/// the path value; a crossing branch that leaves the window along the loop
/// is a window error, and a failed clutch validation is fatal.
pub fn spectral_flow_loop<T: Scalar>(
    lp: &ClutchedLoop<T>,
    method: Method,
) -> Result<SpectralFlow<T>> {
    spectral_flow_loop_with(lp, method, tol::CLUTCH_TOL)
}

pub fn spectral_flow_loop_with<T: Scalar>(
    lp: &ClutchedLoop<T>,
    method: Method,
    clutch_tol: f64,
) -> Result<SpectralFlow<T>> {
    let report = validate_clutch_with(lp, clutch_tol)?;
    if !report.pass {
        return Err(Error::ClutchInvalid {
            max_defect: report.max_defect,
            clutch_tol,
        });
    }
    let sampling = default_sampling(&lp.path)?;
    let flow = match method {
        Method::CrossingForm => spectral_flow_crossing_sampled(&lp.path, &sampling)?,
        Method::EigenvalueTracking => spectral_flow_counting_sampled(&lp.path, &sampling)?,
    };
    for rec in &flow.crossings {
        check_branch_stays_in_window(&sampling, rec.t, lp.window())?;
    }
    Ok(flow)
}

/// Follows the branch that vanishes at `t_crossing` to both ends of the
/// sampling by nearest-value continuation and checks it stays inside the
/// window.
fn check_branch_stays_in_window<T: Scalar>(
    sampling: &PathSampling<T>,
    t_crossing: f64,
    window: f64,
) -> Result<()> {
    let start = sampling
        .grid
        .binary_search_by(|g| g.partial_cmp(&t_crossing).unwrap())
        .unwrap_or_else(|i| i.min(sampling.len() - 1));
    let mut worst: f64 = 0.0;
    for dir in [-1i64, 1] {
        let mut value = 0.0; // the branch is at zero at the crossing
        let mut i = start as i64;
        loop {
            i += dir;
            if i < 0 || i as usize >= sampling.len() {
                break;
            }
            let spec = &sampling.spectra[i as usize];
            let nearest = spec
                .eigenvalues
                .iter()
                .cloned()
                .min_by(|x, y| {
                    (x - value).abs().partial_cmp(&(y - value).abs()).unwrap()
                })
                .unwrap();
            value = nearest;
            worst = worst.max(value.abs());
        }
    }
    if worst > window {
        return Err(Error::WindowExit {
            t_crossing,
            reached: worst,
            window,
        });
    }
    Ok(())
}

/// Real and complexified spectral flows of a real path:
/// `(sf_R, sf_C in real-dimension counting, sf_C in complex-dimension counting)`.
///
/// The doubling identity asserts the triple is `(s, 2s, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DoublingPair {
    pub sf_real: i64,
    pub sf_complex_realdim: i64,
    pub sf_complex_complexdim: i64,
}

/// Complexifies a real path and computes the spectral flow in both
/// conventions alongside the real value.
pub fn doubling_pair(path: &OperatorPath<f64>) -> Result<DoublingPair> {
    let sf_real = spectral_flow_crossing(path)?.value;

    let complex_path = complexify_path(path)?;
    let complex_natural = spectral_flow_crossing(&complex_path)?;
    debug_assert_eq!(complex_natural.convention, Convention::ComplexDim);
    // kernels of a complexified operator double their real dimension, and
    // so do the crossing-form inertia counts
    let sf_complex_complexdim = complex_natural.value;
    let sf_complex_realdim = 2 * complex_natural.value;
    Ok(DoublingPair {
        sf_real,
        sf_complex_realdim,
        sf_complex_complexdim,
    })
}

/// The same path viewed over the complex scalars.
pub fn complexify_path(path: &OperatorPath<f64>) -> Result<OperatorPath<num_complex::Complex64>> {
    let base = path.clone();
    let mut cp = OperatorPath::new(path.interval(), move |t| base.evaluate(t).complexify())?;
    let base_d = path.clone();
    if path.has_derivative() {
        cp = cp.with_derivative(move |t| base_d.derivative_at(t).complexify());
    }
    Ok(cp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymmetricMatrix;
    use crate::scenarios::{planted_crossings, twisted_fourier};
    use nalgebra::DVector;

    fn diag_path(
        interval: (f64, f64),
        entries: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> OperatorPath<f64> {
        OperatorPath::new(interval, move |t| SymmetricMatrix::diagonal(&entries(t))).unwrap()
    }

    #[test]
    fn find_crossings_single_linear() {
        let path = diag_path((-1.0, 1.0), |t| vec![t, 1.0]);
        let sampling = default_sampling(&path).unwrap();
        let recs =
            find_crossings(&path, &sampling, sampling.kernel_tol_abs(tol::KERNEL_TOL_REL)).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].t.abs() < 1e-9);
        assert_eq!(recs[0].kernel_dim(), 1);
        // kernel spans e_1
        let v = recs[0].kernel_basis.column(0);
        let e1 = DVector::from_column_slice(&[1.0, 0.0]);
        assert!((v.dot(&e1).abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn find_crossings_two_instants() {
        let path = diag_path((-1.0, 1.0), |t| vec![t - 0.3, t + 0.4]);
        let sampling = default_sampling(&path).unwrap();
        let recs =
            find_crossings(&path, &sampling, sampling.kernel_tol_abs(tol::KERNEL_TOL_REL)).unwrap();
        assert_eq!(recs.len(), 2);
        assert!((recs[0].t + 0.4).abs() < 1e-9);
        assert!((recs[1].t - 0.3).abs() < 1e-9);
    }

    #[test]
    fn find_crossings_recovers_planted_instants() {
        for seed in [42, 77, 2024] {
            let (path, truth) = planted_crossings(8, 4, (-1.0, 1.0), seed).unwrap();
            let sampling = default_sampling(&path).unwrap();
            let recs =
                find_crossings(&path, &sampling, sampling.kernel_tol_abs(tol::KERNEL_TOL_REL))
                    .unwrap();
            assert_eq!(recs.len(), truth.instants.len(), "seed {seed}");
            for (rec, &c) in recs.iter().zip(truth.instants.iter()) {
                assert!(
                    (rec.t - c).abs() < 1e-9,
                    "seed {seed}: found {} vs planted {c}",
                    rec.t
                );
            }
        }
    }

    #[test]
    fn find_crossings_rejects_singular_endpoint() {
        let path = diag_path((0.0, 1.0), |t| vec![t, 1.0]);
        let sampling = sample_path(&path, 9, 1.5).unwrap();
        let err = find_crossings(&path, &sampling, 1e-8).unwrap_err();
        assert!(matches!(err, Error::EndpointSingular { .. }));
    }

    #[test]
    fn crossing_form_signs() {
        let up = diag_path((-1.0, 1.0), |t| vec![t, 1.0]);
        let sampling = default_sampling(&up).unwrap();
        let recs = find_crossings(&up, &sampling, sampling.kernel_tol_abs(tol::KERNEL_TOL_REL)).unwrap();
        let done = crossing_form(&up, &recs[0]).unwrap();
        assert_eq!(done.signature, Some(1));
        assert_eq!(done.regular, Some(true));
        assert!((done.form.unwrap().matrix()[(0, 0)] - 1.0).abs() < 1e-8);

        let down = diag_path((-1.0, 1.0), |t| vec![-t, 1.0]);
        let sampling = default_sampling(&down).unwrap();
        let recs =
            find_crossings(&down, &sampling, sampling.kernel_tol_abs(tol::KERNEL_TOL_REL)).unwrap();
        let done = crossing_form(&down, &recs[0]).unwrap();
        assert_eq!(done.signature, Some(-1));
    }

    #[test]
    fn crossing_form_indefinite_touch() {
        // two branches crossing in opposite directions at t = 0
        let path = diag_path((-1.0, 1.0), |t| vec![t, -t]);
        let sampling = default_sampling(&path).unwrap();
        let recs =
            find_crossings(&path, &sampling, sampling.kernel_tol_abs(tol::KERNEL_TOL_REL)).unwrap();
        assert_eq!(recs.len(), 1, "instants: {:?}", recs.iter().map(|r| r.t).collect::<Vec<_>>());
        assert_eq!(recs[0].kernel_dim(), 2);
        let done = crossing_form(&path, &recs[0]).unwrap();
        assert_eq!(done.signature, Some(0));
        assert_eq!(done.regular, Some(true));
        let gamma = done.form.unwrap();
        let eig = eig_sym(&gamma).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-8);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sf_crossing_trivial_cases() {
        let path = diag_path((-1.0, 1.0), |t| vec![t, 1.0]);
        assert_eq!(spectral_flow_crossing(&path).unwrap().value, 1);

        let path = diag_path((-1.0, 1.0), |t| vec![t, -t]);
        assert_eq!(spectral_flow_crossing(&path).unwrap().value, 0);
    }

    #[test]
    fn sf_crossing_planted_signature_sum() {
        // signatures (+1, +1, -1) -> +1
        let path = diag_path((-1.0, 1.0), |t| vec![t + 0.5, t, -(t - 0.5), 2.0]);
        let flow = spectral_flow_crossing(&path).unwrap();
        assert_eq!(flow.value, 1);
        assert_eq!(flow.crossings.len(), 3);
        let sigs: Vec<i64> = flow.crossings.iter().map(|c| c.signature.unwrap()).collect();
        assert_eq!(sigs, vec![1, 1, -1]);
    }

    #[test]
    fn sf_crossing_rejects_tangency() {
        let path = diag_path((-1.0, 1.0), |t| vec![t * t, 1.0]);
        let err = spectral_flow_crossing(&path).unwrap_err();
        assert!(matches!(err, Error::IrregularCrossing { .. }), "{err}");
    }

    #[test]
    fn sf_counting_matches_closed_forms() {
        let path = diag_path((-1.0, 1.0), |t| vec![t, 1.0]);
        let flow = spectral_flow_counting(&path).unwrap();
        assert_eq!(flow.value, 1);
        assert_eq!(flow.method, Method::EigenvalueTracking);

        // a tangency contributes nothing to the count
        let path = diag_path((-1.0, 1.0), |t| vec![t * t, 1.0]);
        assert_eq!(spectral_flow_counting(&path).unwrap().value, 0);
    }

    #[test]
    fn sf_counting_genuine_matrix_loop_is_zero() {
        let tau = 2.0 * std::f64::consts::PI;
        let path = diag_path((0.0, 1.0), move |t| {
            vec![0.4 + (tau * t).cos(), -0.7 + 0.5 * (tau * t).sin(), 2.0]
        });
        let flow = spectral_flow_counting(&path).unwrap();
        assert_eq!(flow.value, 0);
        assert!(!flow.crossings.is_empty());
    }

    #[test]
    fn sf_methods_agree_on_planted_paths() {
        for seed in 0..10 {
            let (path, truth) = planted_crossings(6, 3, (-1.0, 1.0), seed).unwrap();
            let by_form = spectral_flow_crossing(&path).unwrap();
            let by_count = spectral_flow_counting(&path).unwrap();
            assert_eq!(by_form.value, truth.signature_sum(), "seed {seed}");
            assert_eq!(by_form.value, by_count.value, "seed {seed}");
        }
    }

    #[test]
    fn sf_loop_constant_is_zero() {
        let a = SymmetricMatrix::diagonal(&[1.0, -1.0, 2.0]);
        let path = OperatorPath::constant(a, (0.0, 1.0)).unwrap();
        let lp = ClutchedLoop::new(path, DMatrix::identity(3, 3), 5.0).unwrap();
        assert_eq!(spectral_flow_loop(&lp, Method::CrossingForm).unwrap().value, 0);
        assert_eq!(
            spectral_flow_loop(&lp, Method::EigenvalueTracking).unwrap().value,
            0
        );
    }

    #[test]
    fn sf_loop_twisted_single_branch() {
        let lp = twisted_fourier(16, 1, 8.0).unwrap();
        let by_count = spectral_flow_loop(&lp, Method::EigenvalueTracking).unwrap();
        assert_eq!(by_count.value, 1);
        assert_eq!(by_count.crossings.len(), 1);
        assert!((by_count.crossings[0].t - 1.0).abs() < 1e-9);
        let by_form = spectral_flow_loop(&lp, Method::CrossingForm).unwrap();
        assert_eq!(by_form.value, 1);
    }

    #[test]
    fn sf_loop_k_fold_twist() {
        for &k in &[-2i64, -1, 1, 2, 3] {
            let lp = twisted_fourier(16, k, 8.0).unwrap();
            let flow = spectral_flow_loop(&lp, Method::EigenvalueTracking).unwrap();
            assert_eq!(flow.value, k, "twist {k}");
            assert_eq!(flow.crossings.len(), k.unsigned_abs() as usize);
            let by_form = spectral_flow_loop(&lp, Method::CrossingForm).unwrap();
            assert_eq!(by_form.value, k, "twist {k} (crossing form)");
        }
    }

    #[test]
    fn sf_loop_rejects_wrong_clutch() {
        let lp = twisted_fourier(8, 1, 4.0).unwrap();
        let bad = ClutchedLoop::new(lp.path.clone(), DMatrix::identity(17, 17), 4.0).unwrap();
        let err = spectral_flow_loop(&bad, Method::EigenvalueTracking).unwrap_err();
        assert!(matches!(err, Error::ClutchInvalid { .. }));
    }

    #[test]
    fn sf_loop_window_exit_detected() {
        // single branch rises from -0.5 through zero up to 2.5: a window of
        // 1 is too small to contain its excursion
        let path = diag_path((0.0, 1.0), |t| vec![3.0 * t - 0.5, 4.0, -4.0]);
        // clutch must intertwine on the window; build a permutation sending
        // the crossing branch at t=1 (value 2.5) onto... no eigenvalue of
        // A(0) lies within the window at 2.5, so identity passes validation
        // vacuously for window 1 except the branch at -0.5 -> needs a match.
        // Use a window small enough that only the crossing branch at a is
        // windowed, and a clutch mapping it onto the 2.5 eigenvector: a
        // permutation swapping nothing intertwines nothing inside the
        // window unless defect small. Simplest honest check: identity
        // clutch fails validation here, so assert the window-exit error
        // through the unchecked path instead.
        let sampling = default_sampling(&path).unwrap();
        let err = check_branch_stays_in_window(&sampling, 1.0 / 6.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::WindowExit { .. }));
    }

    #[test]
    fn doubling_identities() {
        let path = diag_path((-1.0, 1.0), |t| vec![t]);
        let d = doubling_pair(&path).unwrap();
        assert_eq!(
            d,
            DoublingPair {
                sf_real: 1,
                sf_complex_realdim: 2,
                sf_complex_complexdim: 1
            }
        );

        let path = diag_path((-1.0, 1.0), |t| vec![t, -t]);
        let d = doubling_pair(&path).unwrap();
        assert_eq!(d.sf_real, 0);
        assert_eq!(d.sf_complex_realdim, 0);
        assert_eq!(d.sf_complex_complexdim, 0);
    }

    #[test]
    fn doubling_on_planted_paths() {
        for seed in [3, 14, 159] {
            let (path, truth) = planted_crossings(6, 3, (-1.0, 1.0), seed).unwrap();
            let s = truth.signature_sum();
            let d = doubling_pair(&path).unwrap();
            assert_eq!(d.sf_real, s, "seed {seed}");
            assert_eq!(d.sf_complex_realdim, 2 * s, "seed {seed}");
            assert_eq!(d.sf_complex_complexdim, s, "seed {seed}");
        }
    }

    #[test]
    fn concatenation_additivity() {
        for seed in [5, 6, 7] {
            let (path, _) = planted_crossings(6, 4, (-1.0, 1.0), seed).unwrap();
            // pick an interior split where the operator is invertible
            let mid = 0.0123;
            let whole = spectral_flow_crossing(&path).unwrap().value;
            let left = spectral_flow_crossing(&path.restrict(-1.0, mid).unwrap())
                .unwrap()
                .value;
            let right = spectral_flow_crossing(&path.restrict(mid, 1.0).unwrap())
                .unwrap()
                .value;
            assert_eq!(whole, left + right, "seed {seed}");
        }
    }

    #[test]
    fn reversal_negates_flow() {
        for seed in [21, 22] {
            let (path, truth) = planted_crossings(5, 3, (-1.0, 1.0), seed).unwrap();
            let fwd = spectral_flow_crossing(&path).unwrap().value;
            let rev = spectral_flow_crossing(&path.reversed()).unwrap().value;
            assert_eq!(fwd, truth.signature_sum(), "seed {seed}");
            assert_eq!(rev, -fwd, "seed {seed}");
        }
    }

    #[test]
    fn result_json_shape() {
        let path = diag_path((-1.0, 1.0), |t| vec![t, 1.0]);
        let flow = spectral_flow_crossing(&path).unwrap();
        let json = serde_json::to_value(flow.result()).unwrap();
        assert_eq!(json["value"], 1);
        assert_eq!(json["convention"], "RealDim");
        assert_eq!(json["method"], "CrossingForm");
        assert_eq!(json["crossings"][0]["kernel_dim"], 1);
        assert_eq!(json["crossings"][0]["signature"], 1);
        assert_eq!(json["crossings"][0]["regular"], true);
    }
}
