//! Computable avatars of the K-theoretic invariants.
//!
//! The abstract objects are represented concretely: the alpha loop
//! `Id cos(pi t) + i A sin(pi t)` as a sampled matrix path, the index
//! bundle through a transverse subspace and its fiber ranks, and the odd
//! first Chern number of a self-adjoint clutched loop as the winding of
//! the determinant of the Cayley transform compressed to the spectral
//! window. The Chern / spectral flow identity is a theorem here, not a
//! definition: both sides are computed by unrelated algorithms and
//! compared.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cayley_phase, eig_sym, Scalar};
use crate::paths::{validate_clutch_with, ClutchedLoop, PathSampling};
use crate::sflow::{self, Method};
use crate::tol;

/// The sampled path `alpha(A)(t) = Id cos(pi t) + i A sin(pi t)`, `t in [0, 1]`,
/// from `Id` to `-Id`. Singular exactly at `t = 1/2` when `A` is singular.
#[derive(Clone, Debug)]
pub struct AlphaPath {
    pub ts: Vec<f64>,
    pub samples: Vec<DMatrix<Complex64>>,
}

impl AlphaPath {
    /// Smallest singular value of each sample.
    pub fn min_singular_values(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|m| {
                m.clone()
                    .try_svd(false, false, f64::EPSILON, 10_000)
                    .expect("svd of a bounded matrix converges")
                    .singular_values
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

/// Samples the alpha loop construction on a uniform grid over `[0, 1]`.
pub fn alpha_path<T: Scalar>(a: &crate::linalg::SelfAdjoint<T>, n_samples: usize) -> Result<AlphaPath> {
    if n_samples < 3 {
        return Err(Error::InvalidArgument(format!(
            "n_samples = {n_samples} must be at least 3"
        )));
    }
    let dim = a.dim();
    let ac = a.matrix().map(|x| x.into_c64());
    let i_unit = Complex64::new(0.0, 1.0);
    let mut ts = Vec::with_capacity(n_samples);
    let mut samples = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let t = k as f64 / (n_samples - 1) as f64;
        let (c, s) = ((std::f64::consts::PI * t).cos(), (std::f64::consts::PI * t).sin());
        let mut m = ac.map(|x| x * i_unit * Complex64::new(s, 0.0));
        for d in 0..dim {
            m[(d, d)] += Complex64::new(c, 0.0);
        }
        ts.push(t);
        samples.push(m);
    }
    Ok(AlphaPath { ts, samples })
}

fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.clone()
        .try_svd(false, false, f64::EPSILON, 10_000)
        .expect("svd converges")
        .singular_values
        .iter()
        .cloned()
        .collect()
}

/// Left singular vectors of `m` whose singular values are `<= tol`.
fn deficient_directions(m: &DMatrix<Complex64>, tol: f64) -> Vec<nalgebra::DVector<Complex64>> {
    let svd = m
        .clone()
        .try_svd(true, false, f64::EPSILON, 10_000)
        .expect("svd converges");
    let u = svd.u.expect("left singular vectors requested");
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            out.push(u.column(k).clone_owned());
        }
    }
    // a wide SVD only returns min(m, n) singular triples; the remaining
    // codomain directions are unreached and count as deficient too
    if m.ncols() < m.nrows() {
        // complete the range basis by projecting out the found directions
        // from the standard basis greedily
        let mut have: Vec<nalgebra::DVector<Complex64>> =
            (0..u.ncols()).map(|k| u.column(k).clone_owned()).collect();
        for e in 0..m.nrows() {
            if have.len() >= m.nrows() {
                break;
            }
            let mut v = nalgebra::DVector::<Complex64>::zeros(m.nrows());
            v[e] = Complex64::new(1.0, 0.0);
            for w in &have {
                let proj = w.dotc(&v);
                v -= w * proj;
            }
            if v.norm() > 0.5 {
                let v = v.normalize();
                have.push(v.clone());
                out.push(v);
            }
        }
    }
    out
}

fn min_singular_of_augmented(l: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    let rows = l.nrows();
    let cols = l.ncols() + v.ncols();
    let mut aug = DMatrix::<Complex64>::zeros(rows, cols);
    aug.view_mut((0, 0), (rows, l.ncols())).copy_from(l);
    if v.ncols() > 0 {
        aug.view_mut((0, l.ncols()), (rows, v.ncols())).copy_from(v);
    }
    // smallest singular value as a map onto the codomain; a wide matrix has
    // rows <= cols here whenever dim V > 0
    let svals = singular_values(&aug);
    let rank_relevant = rows.min(cols);
    svals
        .iter()
        .take(rank_relevant)
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Greedy construction of a finite-dimensional subspace `V` transverse to
/// the family: `Im L_x + V` spans the codomain at every grid point.
///
/// Starting from `V = {0}`, each grid point contributes the deficient
/// codomain directions of `[L_x | V]`, re-orthonormalized against `V`.
pub fn transverse_subspace<X>(
    family: impl Fn(&X) -> DMatrix<Complex64>,
    grid: &[X],
) -> Result<DMatrix<Complex64>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid must be nonempty".into()));
    }
    let mats: Vec<DMatrix<Complex64>> = grid.iter().map(|x| family(x)).collect();
    let codim = mats[0].nrows();
    let scale = mats
        .iter()
        .map(|m| m.map(|z| z.norm()).max())
        .fold(0.0, f64::max);
    let tol = tol::TRANSVERSALITY_TOL_REL * (1.0 + scale);

    let mut v_cols: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    for (gi, l) in mats.iter().enumerate() {
        if l.nrows() != codim {
            return Err(Error::InvalidArgument(format!(
                "family codomain dimension changed at grid point {gi}"
            )));
        }
        loop {
            let v = columns_to_matrix(codim, &v_cols);
            if min_singular_of_augmented(l, &v) > tol {
                break;
            }
            let aug = {
                let mut aug = DMatrix::<Complex64>::zeros(codim, l.ncols() + v.ncols());
                aug.view_mut((0, 0), (codim, l.ncols())).copy_from(l);
                if v.ncols() > 0 {
                    aug.view_mut((0, l.ncols()), (codim, v.ncols())).copy_from(&v);
                }
                aug
            };
            let mut appended = false;
            for cand in deficient_directions(&aug, tol) {
                let mut w = cand;
                for existing in &v_cols {
                    let proj = existing.dotc(&w);
                    w -= existing * proj;
                }
                if w.norm() > 0.5 {
                    v_cols.push(w.normalize());
                    appended = true;
                }
            }
            if v_cols.len() > codim {
                return Err(Error::TransverseExhausted {
                    dim: codim,
                    grid_index: gi,
                });
            }
            if !appended {
                return Err(Error::TransverseExhausted {
                    dim: codim,
                    grid_index: gi,
                });
            }
        }
    }

    // every grid point satisfies transversality with the final V
    let v = columns_to_matrix(codim, &v_cols);
    for (gi, l) in mats.iter().enumerate() {
        if min_singular_of_augmented(l, &v) <= tol {
            return Err(Error::TransverseExhausted {
                dim: codim,
                grid_index: gi,
            });
        }
    }
    Ok(v)
}

fn columns_to_matrix(rows: usize, cols: &[nalgebra::DVector<Complex64>]) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Index bundle data of a family over a finite grid: the transverse
/// subspace `V`, the fiber ranks `dim L_x^{-1}(V)`, and the virtual rank
/// `fiber_rank - dim V`.
#[derive(Clone, Debug)]
pub struct IndexBundleData {
    pub v: DMatrix<Complex64>,
    pub fiber_ranks: Vec<usize>,
    pub virtual_rank: i64,
}

impl IndexBundleData {
    pub fn dim_v(&self) -> usize {
        self.v.ncols()
    }
}

/// Computes the fibers `Y_x = ker((I - V V*) L_x)` over the grid, checks
/// rank constancy and the agreement of the virtual rank with the classical
/// index `dim ker L_x - dim coker L_x` at every point.
pub fn index_bundle_data<X>(
    family: impl Fn(&X) -> DMatrix<Complex64>,
    grid: &[X],
    v: &DMatrix<Complex64>,
) -> Result<IndexBundleData> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid must be nonempty".into()));
    }
    let mats: Vec<DMatrix<Complex64>> = grid.iter().map(|x| family(x)).collect();
    let scale = mats
        .iter()
        .map(|m| m.map(|z| z.norm()).max())
        .fold(0.0, f64::max);
    let tol = tol::TRANSVERSALITY_TOL_REL * (1.0 + scale);

    let codim = mats[0].nrows();
    let proj = DMatrix::<Complex64>::identity(codim, codim) - v * v.adjoint();

    let mut fiber_ranks = Vec::with_capacity(mats.len());
    for (gi, l) in mats.iter().enumerate() {
        let m = &proj * l;
        let svals = singular_values(&m);
        let rank = svals.iter().filter(|&&s| s > tol).count();
        let fiber = l.ncols() - rank;
        if let Some(&first) = fiber_ranks.first() {
            if fiber != first {
                return Err(Error::RankJump {
                    grid_index: gi,
                    rank: fiber,
                    expected: first,
                });
            }
        }
        fiber_ranks.push(fiber);

        // classical index at this point
        let lsv = singular_values(l);
        let l_rank = lsv.iter().filter(|&&s| s > tol).count();
        let ker = l.ncols() - l_rank;
        let coker = l.nrows() - l_rank;
        let virtual_rank = fiber as i64 - v.ncols() as i64;
        let index = ker as i64 - coker as i64;
        if virtual_rank != index {
            return Err(Error::IndexMismatch {
                grid_index: gi,
                virtual_rank,
                index,
            });
        }
    }
    let virtual_rank = fiber_ranks[0] as i64 - v.ncols() as i64;
    Ok(IndexBundleData {
        v: v.clone(),
        fiber_ranks,
        virtual_rank,
    })
}

/// Winding of a sequence of nonzero complex numbers.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindingResult {
    pub value: i64,
    pub raw_phase: f64,
    pub closure_defect: f64,
}

/// Unwraps the phase along the samples (closing the loop when `closed`)
/// and rounds the total to an integer number of turns.
///
/// Errors on vanishing samples and on phase steps of `pi/2` or more, which
/// indicate an under-resolved sequence.
pub fn winding_number(samples: &[Complex64], closed: bool) -> Result<WindingResult> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(
            "winding needs at least two samples".into(),
        ));
    }
    for (i, z) in samples.iter().enumerate() {
        if z.norm() == 0.0 {
            return Err(Error::ZeroWindingSample { index: i });
        }
    }
    let mut raw = 0.0;
    let mut step_at = |i: usize, from: Complex64, to: Complex64| -> Result<f64> {
        let step = (to / from).arg();
        if step.abs() >= tol::MAX_PHASE_STEP {
            return Err(Error::UnderResolvedWinding { index: i, step });
        }
        Ok(step)
    };
    for i in 0..samples.len() - 1 {
        raw += step_at(i, samples[i], samples[i + 1])?;
    }
    if closed {
        raw += step_at(samples.len() - 1, samples[samples.len() - 1], samples[0])?;
    }
    let value = (raw / (2.0 * std::f64::consts::PI)).round() as i64;
    let closure_defect = (raw - 2.0 * std::f64::consts::PI * value as f64).abs();
    Ok(WindingResult {
        value,
        raw_phase: raw,
        closure_defect,
    })
}

/// Determinant of the Cayley transform compressed to the spectral window:
/// the product of `(lambda - i)/(lambda + i)` over eigenvalues with
/// `|lambda| <= window`, evaluated per sample.
fn window_determinant_samples<T: Scalar>(
    sampling: &PathSampling<T>,
    window: f64,
) -> Vec<Complex64> {
    sampling
        .spectra
        .iter()
        .map(|e| {
            let mut z = Complex64::new(1.0, 0.0);
            for &l in e.eigenvalues.iter() {
                if l.abs() <= window {
                    z *= Complex64::from_polar(1.0, cayley_phase(l));
                }
            }
            z
        })
        .collect()
}

/// Odd first Chern number of a self-adjoint clutched loop, computed as
/// the winding of the windowed Cayley determinant. Equals the loop
/// spectral flow in the complex-dimension convention; the identity is
/// checked by [`chern_report`], not assumed here.
pub fn chern_number_selfadjoint_loop<T: Scalar>(lp: &ClutchedLoop<T>) -> Result<i64> {
    chern_number_with(lp, tol::WINDING_TOL, tol::CLUTCH_TOL).map(|w| w.value)
}

/// Full winding data of the windowed Cayley determinant of a loop.
pub fn chern_number_with<T: Scalar>(
    lp: &ClutchedLoop<T>,
    winding_tol: f64,
    clutch_tol: f64,
) -> Result<WindingResult> {
    let report = validate_clutch_with(lp, clutch_tol)?;
    if !report.pass {
        return Err(Error::ClutchInvalid {
            max_defect: report.max_defect,
            clutch_tol,
        });
    }
    let mut sampling = sflow::default_sampling(&lp.path)?;
    let kernel_tol = sampling.kernel_tol_abs(tol::KERNEL_TOL_REL);
    for idx in [0, sampling.len() - 1] {
        let min_abs = sampling.spectra[idx].min_abs_eigenvalue();
        if min_abs <= kernel_tol {
            return Err(Error::EndpointSingular {
                t: sampling.grid[idx],
                min_abs_eig: min_abs,
                kernel_tol,
            });
        }
    }

    // refine until adjacent phase steps are comfortably below pi/2
    for _ in 0..16 {
        let samples = window_determinant_samples(&sampling, lp.window());
        let mut worst = (0.0_f64, 0usize);
        for i in 0..samples.len() - 1 {
            let step = (samples[i + 1] / samples[i]).arg().abs();
            if step > worst.0 {
                worst = (step, i);
            }
        }
        if worst.0 < 0.95 * tol::MAX_PHASE_STEP {
            break;
        }
        let mut grid = std::mem::take(&mut sampling.grid);
        let mut spectra = std::mem::take(&mut sampling.spectra);
        let mut new_grid = Vec::with_capacity(grid.len() * 2);
        let mut new_spectra = Vec::with_capacity(grid.len() * 2);
        for i in 0..grid.len() {
            new_grid.push(grid[i]);
            new_spectra.push(std::mem::replace(
                &mut spectra[i],
                crate::linalg::Eigendecomposition {
                    eigenvalues: nalgebra::DVector::zeros(0),
                    eigenvectors: DMatrix::zeros(0, 0),
                },
            ));
            if i + 1 < grid.len() {
                let tm = 0.5 * (grid[i] + grid[i + 1]);
                new_grid.push(tm);
                new_spectra.push(eig_sym(&lp.path.evaluate(tm))?);
            }
        }
        grid.clear();
        sampling.grid = new_grid;
        sampling.spectra = new_spectra;
    }

    let samples = window_determinant_samples(&sampling, lp.window());
    let winding = winding_number(&samples, true)?;
    if winding.closure_defect > winding_tol {
        return Err(Error::WindingDefect {
            defect: winding.closure_defect,
            tol: winding_tol,
        });
    }
    Ok(winding)
}

/// The two-sided Chern / spectral flow comparison:
/// `{chern, sf, agree, closure_defect, window}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChernReport {
    pub chern: i64,
    pub sf: i64,
    pub agree: bool,
    pub closure_defect: f64,
    pub window: f64,
}

/// Computes the Chern winding and the loop spectral flow independently and
/// reports whether they agree.
pub fn chern_report<T: Scalar>(lp: &ClutchedLoop<T>) -> Result<ChernReport> {
    chern_report_with(lp, tol::WINDING_TOL, tol::CLUTCH_TOL)
}

pub fn chern_report_with<T: Scalar>(
    lp: &ClutchedLoop<T>,
    winding_tol: f64,
    clutch_tol: f64,
) -> Result<ChernReport> {
    let winding = chern_number_with(lp, winding_tol, clutch_tol)?;
    let sf = sflow::spectral_flow_loop_with(lp, Method::EigenvalueTracking, clutch_tol)?;
    Ok(ChernReport {
        chern: winding.value,
        sf: sf.value,
        agree: winding.value == sf.value,
        closure_defect: winding.closure_defect,
        window: lp.window(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_hermitian, HermitianMatrix, SelfAdjoint, SymmetricMatrix};
    use crate::paths::OperatorPath;
    use crate::scenarios::{random_smooth_loop, twisted_fourier};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alpha_path_endpoints() {
        let a = HermitianMatrix::diagonal(&[1.0, -2.0]);
        let ap = alpha_path(&a, 11).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!((&ap.samples[0] - &id).map(|z| z.norm()).max() < 1e-14);
        assert!((&ap.samples[10] + &id).map(|z| z.norm()).max() < 1e-14);
    }

    #[test]
    fn alpha_path_unit_scalar_never_singular() {
        let a = HermitianMatrix::diagonal(&[1.0]);
        let ap = alpha_path(&a, 201).unwrap();
        // samples are cos(pi t) + i sin(pi t): unit modulus
        for (t, s) in ap.ts.iter().zip(ap.samples.iter()) {
            assert!((s[(0, 0)].norm() - 1.0).abs() < 1e-12, "at t = {t}");
        }
    }

    #[test]
    fn alpha_path_zero_scalar_singular_at_half() {
        let a = HermitianMatrix::diagonal(&[0.0]);
        let ap = alpha_path(&a, 201).unwrap();
        let mins = ap.min_singular_values();
        for (k, (&t, &s)) in ap.ts.iter().zip(mins.iter()).enumerate() {
            if (t - 0.5).abs() < 1e-12 {
                assert!(s < 1e-12, "sample {k} at t = 0.5 should be singular");
            } else {
                assert!(s > 1e-3, "sample {k} at t = {t} wrongly singular");
            }
        }
    }

    #[test]
    fn alpha_path_indefinite_invertible_stays_invertible() {
        let a = HermitianMatrix::diagonal(&[1.0, -1.0]);
        let ap = alpha_path(&a, 101).unwrap();
        let min = ap
            .min_singular_values()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.5, "grid minimum {min}");
    }

    #[test]
    fn alpha_invertibility_profile_random_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for _ in 0..5 {
            let a = random_hermitian(5, &mut rng);
            // shift away from singularity, then invertible everywhere
            let e = eig_sym(&a).unwrap();
            let shifted = a.shift(0.3 - e.nearest_eigenvalue());
            let gap = eig_sym(&shifted).unwrap().min_abs_eigenvalue();
            assert!(gap > 0.01);
            let ap = alpha_path(&shifted, 101).unwrap();
            let min = ap
                .min_singular_values()
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            assert!(min > 0.0 && min >= gap.min(1.0) - 1e-9);
        }
    }

    #[test]
    fn transverse_constant_invertible_is_trivial() {
        let grid: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let l = DMatrix::<Complex64>::identity(4, 4);
        let v = transverse_subspace(|_: &f64| l.clone(), &grid).unwrap();
        assert_eq!(v.ncols(), 0);
    }

    #[test]
    fn transverse_reads_cokernel() {
        let grid = vec![0.0];
        let l = DMatrix::<Complex64>::from_diagonal(&DVector::from_column_slice(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        let v = transverse_subspace(|_: &f64| l.clone(), &grid).unwrap();
        assert_eq!(v.ncols(), 1);
        assert!(v[(0, 0)].norm() < 1e-10);
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-10);
    }

    fn rotating_cokernel_family(dim: usize) -> impl Fn(&f64) -> DMatrix<Complex64> {
        move |theta: &f64| {
            // projector with kernel/cokernel along a direction rotating in
            // the plane of the last two coordinates
            let mut w = DVector::<Complex64>::zeros(dim);
            w[dim - 2] = Complex64::new(theta.cos(), 0.0);
            w[dim - 1] = Complex64::new(theta.sin(), 0.0);
            DMatrix::identity(dim, dim) - &w * w.adjoint()
        }
    }

    #[test]
    fn transverse_rotating_cokernel_is_two_dimensional() {
        let dim = 5;
        let grid: Vec<f64> = (0..64)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / 64.0)
            .collect();
        let v = transverse_subspace(rotating_cokernel_family(dim), &grid).unwrap();
        assert!(v.ncols() <= 2, "dim V = {}", v.ncols());
        // transversality holds at every grid point by construction of
        // transverse_subspace's final verification pass; spot-check one
        let l = rotating_cokernel_family(dim)(&0.1);
        assert!(min_singular_of_augmented(&l, &v) > 1e-6);
    }

    #[test]
    fn index_bundle_invertible_family() {
        let grid: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let l = DMatrix::<Complex64>::identity(4, 4);
        let v = transverse_subspace(|_: &f64| l.clone(), &grid).unwrap();
        let data = index_bundle_data(|_: &f64| l.clone(), &grid, &v).unwrap();
        assert_eq!(data.virtual_rank, 0);
        assert!(data.fiber_ranks.iter().all(|&r| r == 0));
    }

    #[test]
    fn index_bundle_constant_projector() {
        let grid = vec![0.0, 1.0];
        let l = DMatrix::<Complex64>::from_diagonal(&DVector::from_column_slice(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        let v = transverse_subspace(|_: &f64| l.clone(), &grid).unwrap();
        let data = index_bundle_data(|_: &f64| l.clone(), &grid, &v).unwrap();
        assert_eq!(data.dim_v(), 1);
        assert_eq!(data.fiber_ranks, vec![1, 1]);
        assert_eq!(data.virtual_rank, 0);
    }

    #[test]
    fn index_bundle_virtual_rank_is_v_independent() {
        let dim = 5;
        let grid: Vec<f64> = (0..64)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / 64.0)
            .collect();
        let fam = rotating_cokernel_family(dim);
        let v1 = transverse_subspace(&fam, &grid).unwrap();
        let d1 = index_bundle_data(&fam, &grid, &v1).unwrap();

        // an admissible enlargement of V: append a fresh direction
        let mut extra = DVector::<Complex64>::zeros(dim);
        extra[0] = Complex64::new(1.0, 0.0);
        for j in 0..v1.ncols() {
            let col = v1.column(j).clone_owned();
            let proj = col.dotc(&extra);
            extra -= col * proj;
        }
        let extra = extra.normalize();
        let mut v2 = DMatrix::<Complex64>::zeros(dim, v1.ncols() + 1);
        v2.view_mut((0, 0), (dim, v1.ncols())).copy_from(&v1);
        v2.set_column(v1.ncols(), &extra);
        let d2 = index_bundle_data(&fam, &grid, &v2).unwrap();

        assert_eq!(d1.virtual_rank, d2.virtual_rank);
        assert_eq!(d2.fiber_ranks[0], d1.fiber_ranks[0] + 1);
    }

    #[test]
    fn winding_closed_circle() {
        let samples: Vec<Complex64> = (0..64)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 64.0))
            .collect();
        let w = winding_number(&samples, true).unwrap();
        assert_eq!(w.value, 1);
        assert!(w.closure_defect < 1e-10);
    }

    #[test]
    fn winding_constant_and_double_negative() {
        let ones = vec![Complex64::new(1.0, 0.0); 16];
        assert_eq!(winding_number(&ones, true).unwrap().value, 0);

        let samples: Vec<Complex64> = (0..128)
            .map(|k| Complex64::from_polar(1.0, -4.0 * std::f64::consts::PI * k as f64 / 128.0))
            .collect();
        assert_eq!(winding_number(&samples, true).unwrap().value, -2);
    }

    #[test]
    fn winding_rejects_bad_input() {
        let with_zero = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        assert!(matches!(
            winding_number(&with_zero, false),
            Err(Error::ZeroWindingSample { index: 1 })
        ));

        let coarse = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ];
        assert!(matches!(
            winding_number(&coarse, false),
            Err(Error::UnderResolvedWinding { .. })
        ));
    }

    #[test]
    fn winding_additive_under_concatenation() {
        let arc = |from: f64, to: f64, n: usize| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    Complex64::from_polar(1.0, from + (to - from) * k as f64 / (n - 1) as f64)
                })
                .collect()
        };
        let first = arc(0.0, 3.0, 40);
        let second = arc(3.0, 7.5, 50);
        let whole = arc(0.0, 7.5, 89);
        let w1 = winding_number(&first, false).unwrap();
        let w2 = winding_number(&second, false).unwrap();
        let w = winding_number(&whole, false).unwrap();
        assert!((w1.raw_phase + w2.raw_phase - w.raw_phase).abs() < 1e-9);
    }

    #[test]
    fn chern_constant_invertible_loop_is_zero() {
        let a = SymmetricMatrix::diagonal(&[1.5, -0.7, 2.0]);
        let path = OperatorPath::constant(a, (0.0, 1.0)).unwrap();
        let lp = crate::paths::ClutchedLoop::new(path, DMatrix::identity(3, 3), 5.0).unwrap();
        assert_eq!(chern_number_selfadjoint_loop(&lp).unwrap(), 0);
    }

    #[test]
    fn chern_matches_twisted_oracle() {
        let lp = twisted_fourier(16, 1, 8.0).unwrap();
        let report = chern_report(&lp).unwrap();
        assert_eq!(report.chern, 1);
        assert_eq!(report.sf, 1);
        assert!(report.agree);
        assert!(
            report.closure_defect < 0.2,
            "closure defect {}",
            report.closure_defect
        );
    }

    #[test]
    fn chern_two_fold_twist() {
        let lp = twisted_fourier(16, -2, 8.0).unwrap();
        let report = chern_report(&lp).unwrap();
        assert_eq!(report.chern, -2);
        assert!(report.agree);
    }

    #[test]
    fn chern_zero_on_genuine_matrix_loops() {
        for seed in [1, 2, 3] {
            let lp = random_smooth_loop(6, 3, 0.7, seed).unwrap();
            let report = chern_report(&lp).unwrap();
            assert_eq!(report.chern, 0, "seed {seed}");
            assert!(report.agree, "seed {seed}");
        }
    }

    #[test]
    fn cayley_phase_consistent_with_transform() {
        // the windowed determinant uses phases directly; cross-check one
        // value against the matrix Cayley transform
        let a = SelfAdjoint::<f64>::diagonal(&[0.7]);
        let u = crate::linalg::cayley(&a);
        let phase = u[(0, 0)].arg().rem_euclid(2.0 * std::f64::consts::PI);
        assert!((phase - cayley_phase(0.7)).abs() < 1e-12);
    }
}
