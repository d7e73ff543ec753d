//! Self-adjoint linear algebra substrate.
//!
//! Dense symmetric / Hermitian matrices stand in for the representing
//! operators of Fredholm quadratic forms on a Galerkin truncation. The
//! module provides eigendecomposition with ascending eigenvalues, the
//! polarization map from quadratic forms to operators, complexification,
//! the Cayley transform onto the unitary group, and the classification of
//! a self-adjoint operator into the essentially positive / negative /
//! indefinite components.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tol;

/// Scalar field of an operator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarField {
    Real,
    Complex,
}

/// Entry scalar for self-adjoint matrices: `f64` or `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const FIELD: ScalarField;

    fn from_re(x: f64) -> Self;
    fn into_c64(self) -> Complex64;
}

impl Scalar for f64 {
    const FIELD: ScalarField = ScalarField::Real;

    fn from_re(x: f64) -> Self {
        x
    }
    fn into_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    const FIELD: ScalarField = ScalarField::Complex;

    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn into_c64(self) -> Complex64 {
        self
    }
}

/// A dense self-adjoint matrix. Construction symmetrizes exactly, so every
/// value of this type satisfies `A = A*`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfAdjoint<T: Scalar> {
    mat: DMatrix<T>,
}

/// Real symmetric representative of a Fredholm quadratic form.
pub type SymmetricMatrix = SelfAdjoint<f64>;
/// Complex self-adjoint representative; also the home of complexifications.
pub type HermitianMatrix = SelfAdjoint<Complex64>;

impl<T: Scalar> SelfAdjoint<T> {
    /// Accepts a square matrix with self-adjointness defect at most
    /// `SYMMETRY_TOL_REL * ||A||` and stores its exact symmetrization
    /// `(A + A*) / 2`.
    pub fn try_new(mat: DMatrix<T>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NonSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let adj = mat.adjoint();
        let defect = (&mat - &adj).map(|x| x.modulus()).max();
        let scale = mat.map(|x| x.modulus()).max();
        let tol = tol::SYMMETRY_TOL_REL * scale.max(1.0);
        if defect > tol {
            return Err(Error::NotSelfAdjoint { defect, tol });
        }
        let half = T::from_re(0.5);
        let sym = (mat + adj).map(|x| x * half);
        Ok(SelfAdjoint { mat: sym })
    }

    /// Symmetrizes without a defect check; for matrices that are
    /// self-adjoint by construction.
    pub fn symmetrize(mat: DMatrix<T>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "symmetrize needs a square matrix");
        let adj = mat.adjoint();
        let half = T::from_re(0.5);
        SelfAdjoint {
            mat: (mat + adj).map(|x| x * half),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> T) -> Self {
        Self::symmetrize(DMatrix::from_fn(dim, dim, f))
    }

    /// Diagonal matrix with the given real entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        SelfAdjoint {
            mat: DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    T::from_re(entries[i])
                } else {
                    T::zero()
                }
            }),
        }
    }

    pub fn identity(dim: usize) -> Self {
        SelfAdjoint {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        SelfAdjoint {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.mat
    }

    /// Upper bound on the spectral norm (max absolute row sum).
    pub fn op_norm_bound(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.mat[(i, j)].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Kernel threshold for this operator: `KERNEL_TOL_REL * (1 + ||A||)`.
    pub fn kernel_tol(&self) -> f64 {
        tol::kernel_tol(self.op_norm_bound())
    }

    /// `A + s * I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.mat.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += T::from_re(s);
        }
        SelfAdjoint { mat: m }
    }

    /// `F* A F` for an arbitrary square `F` (self-adjoint again).
    pub fn conjugate_by(&self, frame: &DMatrix<T>) -> Self {
        Self::symmetrize(frame.adjoint() * &self.mat * frame)
    }
}

impl SymmetricMatrix {
    /// The same entries viewed as a complex self-adjoint operator.
    ///
    /// The complex kernel is `ker A + i ker A`, so its complex dimension
    /// equals the real kernel dimension and its real dimension doubles it.
    pub fn complexify(&self) -> HermitianMatrix {
        SelfAdjoint {
            mat: self.mat.map(|x| Complex64::new(x, 0.0)),
        }
    }
}

/// Full spectral data of a self-adjoint matrix: eigenvalues ascending,
/// eigenvectors as orthonormal columns in matching order.
#[derive(Clone, Debug)]
pub struct Eigendecomposition<T: Scalar> {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<T>,
}

impl<T: Scalar> Eigendecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Signed eigenvalue of smallest modulus.
    pub fn nearest_eigenvalue(&self) -> f64 {
        let mut best = f64::INFINITY;
        let mut val = f64::INFINITY;
        for &l in self.eigenvalues.iter() {
            if l.abs() < best {
                best = l.abs();
                val = l;
            }
        }
        val
    }

    pub fn count_negative(&self, zero_tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < -zero_tol).count()
    }

    pub fn count_positive(&self, zero_tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > zero_tol).count()
    }

    /// Orthonormal basis of the span of eigenvectors with `|lambda| <= zero_tol`.
    pub fn kernel_vectors(&self, zero_tol: f64) -> DMatrix<T> {
        let cols: Vec<usize> = (0..self.dim())
            .filter(|&k| self.eigenvalues[k].abs() <= zero_tol)
            .collect();
        let mut out = DMatrix::zeros(self.dim(), cols.len());
        for (j, &k) in cols.iter().enumerate() {
            out.set_column(j, &self.eigenvectors.column(k));
        }
        out
    }
}

/// Eigendecomposition with eigenvalues sorted ascending.
pub fn eig_sym<T: Scalar>(a: &SelfAdjoint<T>) -> Result<Eigendecomposition<T>> {
    let dim = a.dim();
    let se = a
        .mat
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::EigFailed { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let eigenvalues = DVector::from_fn(dim, |k, _| se.eigenvalues[order[k]]);
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (k, &src) in order.iter().enumerate() {
        eigenvectors.set_column(k, &se.eigenvectors.column(src));
    }
    Ok(Eigendecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// A real-valued quadratic form given by an evaluator.
#[derive(Clone)]
pub struct QuadraticForm {
    dim: usize,
    eval: Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>,
}

impl QuadraticForm {
    pub fn new(dim: usize, eval: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static) -> Self {
        QuadraticForm {
            dim,
            eval: Arc::new(eval),
        }
    }

    /// `q(u) = <Au, u>` for a symmetric matrix `A`.
    pub fn from_matrix(a: &SymmetricMatrix) -> Self {
        let m = a.matrix().clone();
        QuadraticForm::new(a.dim(), move |u| (&m * u).dot(u))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, u: &DVector<f64>) -> f64 {
        (self.eval)(u)
    }
}

/// Representing operator of a quadratic form via polarization on the
/// standard basis: `A[i][j] = (q(e_i + e_j) - q(e_i - e_j)) / 4`.
///
/// Rejects evaluators whose polarization is not bilinear, checked by
/// comparing `<Au, u>` against `q(u)` on seeded probe vectors.
pub fn form_to_operator(q: &QuadraticForm) -> Result<SymmetricMatrix> {
    let n = q.dim();
    let basis = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    let mut mat = DMatrix::zeros(n, n);
    for i in 0..n {
        mat[(i, i)] = q.evaluate(&basis(i));
        for j in (i + 1)..n {
            let b = 0.25 * (q.evaluate(&(basis(i) + basis(j))) - q.evaluate(&(basis(i) - basis(j))));
            mat[(i, j)] = b;
            mat[(j, i)] = b;
        }
    }
    let a = SelfAdjoint { mat };

    // Polarization of a genuine quadratic form reproduces the evaluator.
    let mut rng = ChaCha8Rng::seed_from_u64(0x51_FA);
    let scale = 1.0 + a.op_norm_bound();
    for _ in 0..16 {
        let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let via_op = (a.matrix() * &u).dot(&u);
        let direct = q.evaluate(&u);
        let defect = (via_op - direct).abs() / (scale * (1.0 + u.norm_squared()));
        if defect > tol::POLARIZATION_TOL {
            return Err(Error::NonBilinearForm { defect });
        }
    }
    Ok(a)
}

/// Cayley transform `(A - iI)(A + iI)^{-1}`: unitary, with eigenvalue
/// phases `pi + 2 atan(lambda)` increasing in `lambda`; `-1` is the image
/// of kernel directions.
pub fn cayley<T: Scalar>(a: &SelfAdjoint<T>) -> DMatrix<Complex64> {
    let n = a.dim();
    let ac = a.mat.map(|x| x.into_c64());
    let i = Complex64::new(0.0, 1.0);
    let mut plus = ac.clone();
    let mut minus = ac;
    for k in 0..n {
        plus[(k, k)] += i;
        minus[(k, k)] -= i;
    }
    // A + iI is invertible for self-adjoint A.
    plus.lu().solve(&minus).expect("A + iI must be invertible")
}

/// Cayley phase of a single eigenvalue, continuous and increasing on
/// `(0, 2*pi)`: `arg((lambda - i)/(lambda + i)) = pi + 2 atan(lambda)`.
pub fn cayley_phase(lambda: f64) -> f64 {
    std::f64::consts::PI + 2.0 * lambda.atan()
}

/// Connected component of the self-adjoint Fredholm operators, decided at
/// essential rank `m`: eigenvalues beyond the `m` smallest in count on one
/// side must all share a sign for the definite components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentClass {
    EssentiallyPositive,
    EssentiallyNegative,
    Indefinite,
}

/// Classifies `A` as essentially positive / negative / indefinite.
///
/// With `p` positive and `q` negative eigenvalues (zeros counted in
/// neither): essentially positive iff `q <= m < p`, essentially negative
/// iff `p <= m < q`, indefinite iff both exceed `m`; anything else is a
/// degenerate input.
pub fn classify_component<T: Scalar>(a: &SelfAdjoint<T>, essential_rank: usize) -> Result<ComponentClass> {
    if essential_rank >= a.dim() {
        return Err(Error::InvalidArgument(format!(
            "essential rank {} must be smaller than the dimension {}",
            essential_rank,
            a.dim()
        )));
    }
    let eig = eig_sym(a)?;
    let zero_tol = a.kernel_tol();
    let p = eig.count_positive(zero_tol);
    let q = eig.count_negative(zero_tol);
    if q <= essential_rank && essential_rank < p {
        Ok(ComponentClass::EssentiallyPositive)
    } else if p <= essential_rank && essential_rank < q {
        Ok(ComponentClass::EssentiallyNegative)
    } else if p > essential_rank && q > essential_rank {
        Ok(ComponentClass::Indefinite)
    } else {
        Err(Error::DegenerateSpectrum {
            positive: p,
            negative: q,
            essential_rank,
        })
    }
}

/// Default essential rank when the caller has no better truncation data.
pub fn default_essential_rank(dim: usize) -> usize {
    dim / 4
}

/// Random symmetric matrix with entries in `[-1, 1]`, for tests and the
/// seeded scenario registry.
pub fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    SelfAdjoint::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random Hermitian matrix with unit-scale entries.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let raw = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    SelfAdjoint::symmetrize(raw)
}

/// Random orthogonal matrix via Gram-Schmidt on a seeded Gaussian-free
/// uniform sample; deterministic for a fixed RNG state.
pub fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    gram_schmidt(raw)
}

fn gram_schmidt(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for j in 0..n {
        for k in 0..j {
            let proj = m.column(k).dot(&m.column(j));
            let col_k = m.column(k).clone_owned();
            let mut col_j = m.column_mut(j);
            col_j.axpy(-proj, &col_k, 1.0);
        }
        let norm = m.column(j).norm();
        assert!(norm > 1e-12, "rank-deficient sample in random_orthogonal");
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dmat(rows: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, rows, data)
    }

    #[test]
    fn eig_diagonal_case() {
        let a = SymmetricMatrix::diagonal(&[2.0, 3.0]);
        let e = eig_sym(&a).unwrap();
        assert!((e.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_offdiagonal_pair() {
        let a = SymmetricMatrix::try_new(dmat(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let e = eig_sym(&a).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_residual_oracle_8x8_seed_42() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = random_symmetric(8, &mut rng);
        let e = eig_sym(&a).unwrap();
        let bound = 1e-10 * (1.0 + a.op_norm_bound());
        for k in 0..8 {
            let v = e.eigenvectors.column(k);
            let residual = (a.matrix() * v - v * e.eigenvalues[k]).norm();
            assert!(residual < bound, "eigenpair {k} residual {residual:.3e}");
        }
        // orthonormality to 1e-10
        let gram = e.eigenvectors.transpose() * &e.eigenvectors;
        let defect = (gram - DMatrix::identity(8, 8)).map(f64::abs).max();
        assert!(defect < 1e-10, "orthonormality defect {defect:.3e}");
    }

    #[test]
    fn eig_eigenvalues_ascending() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_hermitian(9, &mut rng);
        let e = eig_sym(&a).unwrap();
        for k in 1..9 {
            assert!(e.eigenvalues[k] >= e.eigenvalues[k - 1]);
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = dmat(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            SymmetricMatrix::try_new(m),
            Err(Error::NotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn rejects_nonsquare_input() {
        let m = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        assert!(matches!(
            SymmetricMatrix::try_new(m),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn form_to_operator_diagonal_form() {
        let q = QuadraticForm::new(2, |u| u[0] * u[0] - u[1] * u[1]);
        let a = form_to_operator(&q).unwrap();
        let expect = dmat(2, &[1.0, 0.0, 0.0, -1.0]);
        assert!((a.matrix() - expect).map(f64::abs).max() < 1e-12);
    }

    #[test]
    fn form_to_operator_cross_term() {
        let q = QuadraticForm::new(2, |u| 2.0 * u[0] * u[1]);
        let a = form_to_operator(&q).unwrap();
        let expect = dmat(2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((a.matrix() - expect).map(f64::abs).max() < 1e-12);
    }

    #[test]
    fn form_to_operator_recovers_symmetrization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = DMatrix::from_fn(5, 5, |_, _| rng.gen_range(-1.0..1.0_f64));
        let bq = b.clone();
        let q = QuadraticForm::new(5, move |u| (&bq * u).dot(u));
        let a = form_to_operator(&q).unwrap();
        let sym = (&b + b.transpose()) * 0.5;
        assert!((a.matrix() - sym).map(f64::abs).max() < 1e-10);
    }

    #[test]
    fn form_to_operator_rejects_nonquadratic() {
        let q = QuadraticForm::new(3, |u| u[0] * u[0] + u[1].abs() + 0.3);
        assert!(matches!(
            form_to_operator(&q),
            Err(Error::NonBilinearForm { .. })
        ));
    }

    #[test]
    fn form_matrix_consistency_on_random_vectors() {
        // <form_to_operator(q) u, u> == q(u) to relative 1e-8 on 100 samples
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a0 = random_symmetric(6, &mut rng);
        let q = QuadraticForm::from_matrix(&a0);
        let a = form_to_operator(&q).unwrap();
        for _ in 0..100 {
            let u = DVector::from_fn(6, |_, _| rng.gen_range(-2.0..2.0));
            let lhs = (a.matrix() * &u).dot(&u);
            let rhs = q.evaluate(&u);
            assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn quadratic_form_homogeneity_and_polarization() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_symmetric(5, &mut rng);
        let q = QuadraticForm::from_matrix(&a);
        for _ in 0..20 {
            let u = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
            let v = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
            let w = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
            let lambda: f64 = rng.gen_range(-3.0..3.0);
            let qs = q.evaluate(&(lambda * &u));
            assert!((qs - lambda * lambda * q.evaluate(&u)).abs() < 1e-9 * (1.0 + qs.abs()));
            // polarization is additive in the first slot
            let b = |x: &DVector<f64>, y: &DVector<f64>| {
                0.25 * (q.evaluate(&(x + y)) - q.evaluate(&(x - y)))
            };
            let lhs = b(&(&u + &v), &w);
            let rhs = b(&u, &w) + b(&v, &w);
            assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
            // and symmetric
            assert!((b(&u, &v) - b(&v, &u)).abs() < 1e-9);
        }
    }

    #[test]
    fn complexify_identity_of_entries() {
        let a = SymmetricMatrix::diagonal(&[1.0, -1.0]);
        let h = a.complexify();
        assert_eq!(h.matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(h.matrix()[(1, 1)], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn complexify_doubles_real_kernel_dimension() {
        let a = SymmetricMatrix::diagonal(&[0.0, 1.0]);
        let h = a.complexify();
        let e = eig_sym(&h).unwrap();
        let ker = e.kernel_vectors(h.kernel_tol());
        // complex dimension 1
        assert_eq!(ker.ncols(), 1);
        // v and i*v are R-linearly independent: the real dimension is 2
        let v = ker.column(0);
        let iv = v.map(|z| z * Complex64::new(0.0, 1.0));
        let mut real_span = DMatrix::zeros(4, 2);
        for r in 0..2 {
            real_span[(r, 0)] = v[r].re;
            real_span[(2 + r, 0)] = v[r].im;
            real_span[(r, 1)] = iv[r].re;
            real_span[(2 + r, 1)] = iv[r].im;
        }
        assert_eq!(real_span.rank(1e-10), 2);
    }

    #[test]
    fn complexify_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_symmetric(7, &mut rng);
        let ea = eig_sym(&a).unwrap();
        let eh = eig_sym(&a.complexify()).unwrap();
        for k in 0..7 {
            assert!((ea.eigenvalues[k] - eh.eigenvalues[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn cayley_scalar_cases() {
        let zero = SymmetricMatrix::diagonal(&[0.0]);
        let u = cayley(&zero);
        assert!((u[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);

        let one = SymmetricMatrix::diagonal(&[1.0]);
        let u = cayley(&one);
        assert!((u[(0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn cayley_unitarity_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = random_hermitian(6, &mut rng);
        let u = cayley(&a);
        let defect = (u.adjoint() * &u - DMatrix::identity(6, 6))
            .map(|z| z.norm())
            .max();
        assert!(defect < 1e-10, "unitarity defect {defect:.3e}");
    }

    #[test]
    fn cayley_phases_increase_with_eigenvalue() {
        let lambdas = [-50.0, -3.0, -0.5, 0.0, 0.4, 2.0, 40.0];
        let a = SymmetricMatrix::diagonal(&lambdas);
        let u = cayley(&a);
        let mut prev = -1.0;
        for (k, &l) in lambdas.iter().enumerate() {
            let phase = u[(k, k)].arg().rem_euclid(2.0 * std::f64::consts::PI);
            assert!((phase - cayley_phase(l)).abs() < 1e-12);
            assert!(phase > prev, "phase not increasing at lambda = {l}");
            prev = phase;
        }
    }

    #[test]
    fn classify_component_examples() {
        let id = SymmetricMatrix::identity(10);
        assert_eq!(
            classify_component(&id, 2).unwrap(),
            ComponentClass::EssentiallyPositive
        );
        let neg = SymmetricMatrix::diagonal(&[-1.0; 10]);
        assert_eq!(
            classify_component(&neg, 2).unwrap(),
            ComponentClass::EssentiallyNegative
        );
        let entries: Vec<f64> = (-5..=5).map(|n| n as f64 + 0.5).collect();
        let ind = SymmetricMatrix::diagonal(&entries);
        assert_eq!(
            classify_component(&ind, 2).unwrap(),
            ComponentClass::Indefinite
        );
    }

    #[test]
    fn classify_component_degenerate_input() {
        let z = SymmetricMatrix::zeros(4);
        assert!(matches!(
            classify_component(&z, 1),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(matches!(
            classify_component(&z, 4),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn eig_invariant_under_orthogonal_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_symmetric(6, &mut rng);
        let qmat = random_orthogonal(6, &mut rng);
        let b = a.conjugate_by(&qmat);
        let ea = eig_sym(&a).unwrap();
        let eb = eig_sym(&b).unwrap();
        for k in 0..6 {
            assert!(
                (ea.eigenvalues[k] - eb.eigenvalues[k]).abs() < 1e-9,
                "eigenvalue {k} moved under conjugation"
            );
        }
    }
}
