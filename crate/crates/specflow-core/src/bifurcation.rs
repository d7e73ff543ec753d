//! Variational bifurcation from the trivial branch.
//!
//! A [`FunctionalFamily`] is a parameterized family of functionals on a
//! Galerkin truncation together with a branch of critical points. Nonzero
//! spectral flow of the Hessian family along a parameter loop certifies a
//! bifurcation point on that loop; [`locate_bifurcation`] turns the
//! certificate into an arbitrarily small parameter bracket by arc
//! bisection (spectral flow is additive over arcs), and
//! [`continue_branch`] produces the nontrivial critical points themselves
//! by Newton iteration seeded along the kernel direction.
//!
//! [`bif_set_scan`] examines a whole torus of parameters at grid scale:
//! it flags cells touching the degeneracy locus, estimates the box
//! dimension of the flagged set, and tests whether the set wraps a torus
//! generator and whether its complement stays connected.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, SymmetricMatrix};
use crate::paths::{ClutchedLoop, OperatorPath};
use crate::sflow::{self, Method, SpectralFlow};
use crate::tol;

/// Parameter manifold of a family: a circle or a torus grid.
#[derive(Clone, Debug, Serialize)]
pub enum ParameterSpace {
    Circle {
        period: f64,
        base: f64,
    },
    TorusGrid {
        n1: usize,
        n2: usize,
        periods: (f64, f64),
        base: (f64, f64),
    },
}

impl ParameterSpace {
    pub fn generators(&self) -> usize {
        match self {
            ParameterSpace::Circle { .. } => 1,
            ParameterSpace::TorusGrid { .. } => 2,
        }
    }

    pub fn period(&self, generator: usize) -> f64 {
        match self {
            ParameterSpace::Circle { period, .. } => *period,
            ParameterSpace::TorusGrid { periods, .. } => {
                if generator == 0 {
                    periods.0
                } else {
                    periods.1
                }
            }
        }
    }

    pub fn base(&self) -> Vec<f64> {
        match self {
            ParameterSpace::Circle { base, .. } => vec![*base],
            ParameterSpace::TorusGrid { base, .. } => vec![base.0, base.1],
        }
    }
}

/// A generator loop in the parameter space: coordinate `generator` sweeps
/// one period starting from `base`, the other coordinates stay fixed.
#[derive(Clone, Debug, Serialize)]
pub struct ParamLoop {
    pub generator: usize,
    pub base: Vec<f64>,
}

impl ParamLoop {
    pub fn describe(&self) -> String {
        format!("generator {} from {:?}", self.generator, self.base)
    }
}

type ValueFn = Arc<dyn Fn(&[f64], &DVector<f64>) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64], &DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessianFn = Arc<dyn Fn(&[f64], &DVector<f64>) -> SymmetricMatrix + Send + Sync>;
type BranchFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;

/// A smooth family of functionals `f_x` on a truncated state space with a
/// trivial branch of critical points and optional clutch data per
/// parameter-space generator.
#[derive(Clone)]
pub struct FunctionalFamily {
    parameter_space: ParameterSpace,
    state_dim: usize,
    value: ValueFn,
    gradient: GradientFn,
    hessian: Option<HessianFn>,
    trivial_branch: BranchFn,
    /// One entry per generator: clutching unitary and spectral window for
    /// the Hessian loop along that generator.
    clutches: Vec<Option<(DMatrix<f64>, f64)>>,
}

impl FunctionalFamily {
    pub fn new(
        parameter_space: ParameterSpace,
        state_dim: usize,
        value: impl Fn(&[f64], &DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        let generators = parameter_space.generators();
        FunctionalFamily {
            parameter_space,
            state_dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: None,
            trivial_branch: Arc::new(|_| DVector::zeros(0)),
            clutches: vec![None; generators],
        }
    }

    pub fn with_hessian(
        mut self,
        hessian: impl Fn(&[f64], &DVector<f64>) -> SymmetricMatrix + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    pub fn with_trivial_branch(
        mut self,
        branch: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.trivial_branch = Arc::new(branch);
        self
    }

    pub fn with_clutch(mut self, generator: usize, unitary: DMatrix<f64>, window: f64) -> Self {
        self.clutches[generator] = Some((unitary, window));
        self
    }

    pub fn parameter_space(&self) -> &ParameterSpace {
        &self.parameter_space
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn value_at(&self, x: &[f64], u: &DVector<f64>) -> f64 {
        (self.value)(x, u)
    }

    pub fn gradient_at(&self, x: &[f64], u: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x, u)
    }

    pub fn branch_at(&self, x: &[f64]) -> DVector<f64> {
        let s = (self.trivial_branch)(x);
        if s.len() == 0 {
            DVector::zeros(self.state_dim)
        } else {
            s
        }
    }

    /// Closed-form Hessian when provided, otherwise central differences of
    /// the gradient with step 1e-5, symmetrized.
    pub fn hessian_at(&self, x: &[f64], u: &DVector<f64>) -> SymmetricMatrix {
        if let Some(h) = &self.hessian {
            return h(x, u);
        }
        let n = self.state_dim;
        let h = 1e-5;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[j] += h;
            dn[j] -= h;
            let col = (self.gradient_at(x, &up) - self.gradient_at(x, &dn)) / (2.0 * h);
            m.set_column(j, &col);
        }
        SymmetricMatrix::symmetrize(m)
    }

    /// Default generator loop through the parameter-space base point.
    pub fn generator_loop(&self, generator: usize) -> ParamLoop {
        ParamLoop {
            generator,
            base: self.parameter_space.base(),
        }
    }

    fn loop_point(&self, gamma: &ParamLoop, t: f64) -> Vec<f64> {
        let mut x = gamma.base.clone();
        x[gamma.generator] = t;
        x
    }
}

/// Trivial-branch verification: the largest gradient norm along the branch
/// over sampled parameters.
#[derive(Clone, Debug, Serialize)]
pub struct TrivialBranchReport {
    pub max_residual: f64,
    pub branch_tol: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Samples `||gradient(x, sigma(x))||` over the parameter space.
pub fn verify_trivial_branch(family: &FunctionalFamily, n_samples: usize) -> TrivialBranchReport {
    let mut max_residual: f64 = 0.0;
    let mut samples = 0usize;
    match family.parameter_space() {
        ParameterSpace::Circle { period, base } => {
            for k in 0..n_samples.max(1) {
                let t = base + period * k as f64 / n_samples.max(1) as f64;
                let x = [t];
                let sigma = family.branch_at(&x);
                max_residual = max_residual.max(family.gradient_at(&x, &sigma).norm());
                samples += 1;
            }
        }
        ParameterSpace::TorusGrid { periods, base, .. } => {
            let k = (n_samples.max(1) as f64).sqrt().ceil() as usize;
            for i in 0..k {
                for j in 0..k {
                    let x = [
                        base.0 + periods.0 * i as f64 / k as f64,
                        base.1 + periods.1 * j as f64 / k as f64,
                    ];
                    let sigma = family.branch_at(&x);
                    max_residual = max_residual.max(family.gradient_at(&x, &sigma).norm());
                    samples += 1;
                }
            }
        }
    }
    TrivialBranchReport {
        max_residual,
        branch_tol: tol::BRANCH_TOL,
        samples,
        pass: max_residual <= tol::BRANCH_TOL,
    }
}

/// The Hessian family along a loop as an operator path, plus the clutched
/// loop when clutch data is attached to the generator.
pub fn hessian_family(
    family: &FunctionalFamily,
    gamma: &ParamLoop,
) -> Result<(OperatorPath<f64>, Option<ClutchedLoop<f64>>)> {
    if gamma.generator >= family.parameter_space().generators() {
        return Err(Error::InvalidArgument(format!(
            "generator {} does not exist",
            gamma.generator
        )));
    }
    let t0 = gamma.base[gamma.generator];
    let period = family.parameter_space().period(gamma.generator);
    let fam = family.clone();
    let gam = gamma.clone();
    let path = OperatorPath::new((t0, t0 + period), move |t| {
        let x = fam.loop_point(&gam, t);
        let sigma = fam.branch_at(&x);
        fam.hessian_at(&x, &sigma)
    })?;
    let clutched = match &family.clutches[gamma.generator] {
        Some((u, window)) => Some(ClutchedLoop::new(path.clone(), u.clone(), *window)?),
        None => None,
    };
    Ok((path, clutched))
}

/// Spectral flow of the Hessian family along a loop, in both counting
/// conventions.
#[derive(Clone, Debug)]
pub struct LoopFlow {
    pub flow: SpectralFlow<f64>,
    /// Real-dimension value of the real Hessian path.
    pub real_dim: i64,
    /// Complex-dimension value of the complexified path, computed
    /// independently; equals `real_dim` by the doubling identity.
    pub complex_dim: i64,
}

/// Runs the loop spectral flow on the Hessian family.
///
/// Generators carrying clutch data go through the full clutched-loop
/// machinery (validation and window checks); generators without clutch
/// data get the eigenvalue-tracking path flow, which is the right notion
/// for loops of grid edges whose endpoints are not unitarily identified.
pub fn sf_along_loop(family: &FunctionalFamily, gamma: &ParamLoop) -> Result<LoopFlow> {
    let (path, clutched) = hessian_family(family, gamma)?;
    let flow = match clutched {
        Some(lp) => sflow::spectral_flow_loop(&lp, Method::EigenvalueTracking)?,
        None => sflow::spectral_flow_counting(&path)?,
    };
    let complex_path = sflow::complexify_path(&path)?;
    let complex_flow = sflow::spectral_flow_counting(&complex_path)?;
    Ok(LoopFlow {
        real_dim: flow.value,
        complex_dim: complex_flow.value,
        flow,
    })
}

/// A parameter bracket certified to contain a bifurcation point.
#[derive(Clone, Debug, Serialize)]
pub struct BifBracket {
    pub lo: f64,
    pub hi: f64,
    pub generator: usize,
    pub base: Vec<f64>,
    /// Net spectral flow across the bracket.
    pub sf: i64,
}

impl BifBracket {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn positives_of_hessian(
    family: &FunctionalFamily,
    gamma: &ParamLoop,
    t: f64,
    kernel_tol: f64,
) -> Result<(usize, f64)> {
    let x = family.loop_point(gamma, t);
    let sigma = family.branch_at(&x);
    let h = family.hessian_at(&x, &sigma);
    let e = eig_sym(&h)?;
    let _ = kernel_tol;
    Ok((e.count_positive(0.0), e.min_abs_eigenvalue()))
}

/// Nudges `t` inside `(lo, hi)` until the Hessian is invertible there.
fn nudged_instant(
    family: &FunctionalFamily,
    gamma: &ParamLoop,
    t: f64,
    lo: f64,
    hi: f64,
    kernel_tol: f64,
    nudge: f64,
) -> Result<(f64, usize)> {
    let mut attempt = 0usize;
    loop {
        let offsets = [0.0, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0, 8.0, -8.0];
        for (j, &o) in offsets.iter().enumerate() {
            if j < attempt {
                continue;
            }
            let cand = t + o * nudge;
            if cand <= lo || cand >= hi {
                continue;
            }
            let (p, min_abs) = positives_of_hessian(family, gamma, cand, kernel_tol)?;
            if min_abs > kernel_tol {
                return Ok((cand, p));
            }
            attempt = j + 1;
            if attempt > tol::MAX_NUDGES {
                return Err(Error::DegenerateFamily {
                    t,
                    attempts: attempt,
                });
            }
        }
        return Err(Error::DegenerateFamily {
            t,
            attempts: attempt,
        });
    }
}

/// Shrinks a nonzero-flow loop to a parameter bracket of width
/// `locate_tol * period` by repeated arc bisection.
///
/// Arc spectral flow is the jump of the positive eigenvalue count between
/// invertible arc endpoints (exact additivity), so each bisection keeps an
/// arc with nonzero flow. Endpoints landing on singular parameters are
/// nudged by `ENDPOINT_NUDGE_REL * period`.
pub fn locate_bifurcation(family: &FunctionalFamily, gamma: &ParamLoop) -> Result<BifBracket> {
    locate_bifurcation_with(family, gamma, tol::LOCATE_TOL_REL)
}

pub fn locate_bifurcation_with(
    family: &FunctionalFamily,
    gamma: &ParamLoop,
    locate_tol: f64,
) -> Result<BifBracket> {
    let loop_flow = sf_along_loop(family, gamma)?;
    if loop_flow.real_dim == 0 {
        return Err(Error::Precondition(format!(
            "loop spectral flow vanishes along {}",
            gamma.describe()
        )));
    }

    let t0 = gamma.base[gamma.generator];
    let period = family.parameter_space().period(gamma.generator);
    let nudge = tol::ENDPOINT_NUDGE_REL * period;
    let target = locate_tol * period;

    // scale-aware kernel threshold from the basepoint Hessian
    let x0 = family.loop_point(gamma, t0);
    let h0 = family.hessian_at(&x0, &family.branch_at(&x0));
    let kernel_tol = h0.kernel_tol();

    let (mut lo, mut hi) = (t0, t0 + period);
    let (_, p_lo0) = {
        let (t, p) = nudged_instant(family, gamma, lo, lo - nudge * 16.0, hi, kernel_tol, nudge)?;
        lo = t;
        (t, p)
    };
    let (_, p_hi0) = {
        let (t, p) = nudged_instant(family, gamma, hi, lo, hi + nudge * 16.0, kernel_tol, nudge)?;
        hi = t;
        (t, p)
    };
    let mut p_lo = p_lo0;
    let mut p_hi = p_hi0;
    let mut sf_arc = loop_flow.real_dim;

    while hi - lo > target {
        let (mid, p_mid) =
            nudged_instant(family, gamma, 0.5 * (lo + hi), lo, hi, kernel_tol, nudge)?;
        let sf_left = p_mid as i64 - p_lo as i64;
        let sf_right = p_hi as i64 - p_mid as i64;
        debug_assert_eq!(sf_left + sf_right, p_hi as i64 - p_lo as i64);
        if sf_left != 0 {
            hi = mid;
            p_hi = p_mid;
            sf_arc = sf_left;
        } else if sf_right != 0 {
            lo = mid;
            p_lo = p_mid;
            sf_arc = sf_right;
        } else {
            // the loop flow came from clutch twisting rather than an
            // interior jump; cannot happen once both endpoints are pinned
            return Err(Error::Precondition(
                "arc flows vanish on both halves although the loop flow is nonzero".into(),
            ));
        }
    }
    Ok(BifBracket {
        lo,
        hi,
        generator: gamma.generator,
        base: gamma.base.clone(),
        sf: sf_arc,
    })
}

/// One continued critical point.
#[derive(Clone, Debug)]
pub struct BranchPoint {
    /// Loop coordinate of the parameter.
    pub x: f64,
    pub u: DVector<f64>,
    pub residual: f64,
    /// Distance from the trivial branch.
    pub amplitude: f64,
    /// Parameter offset from the bracket center.
    pub offset: f64,
}

/// Continuation output: the branch, the fitted amplitude exponent of
/// `log ||u - sigma||` against `log offset`, and how many steps failed.
#[derive(Clone, Debug)]
pub struct BranchContinuation {
    pub points: Vec<BranchPoint>,
    pub exponent_fit: Option<f64>,
    /// `+1` or `-1`: the side of the bracket with a negative crossing
    /// eigenvalue, where the branch lives.
    pub side: f64,
    pub failures: usize,
}

fn newton_solve(
    family: &FunctionalFamily,
    x: &[f64],
    seed: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    let mut u = seed.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..tol::NEWTON_MAX_ITER {
        let g = family.gradient_at(x, &u);
        residual = g.norm();
        if residual <= 1e-13 * (1.0 + u.norm()) {
            break;
        }
        let h = family.hessian_at(x, &u);
        let step = h.matrix().clone().lu().solve(&g)?;
        u -= step;
        if !u.iter().all(|c| c.is_finite()) {
            return None;
        }
    }
    let g = family.gradient_at(x, &u);
    residual = residual.min(g.norm());
    Some((u, residual))
}

/// Newton-continues the nontrivial branch away from a bifurcation bracket.
///
/// Parameters step away from the bracket center on the side where the
/// crossing eigenvalue is negative, with offsets log-spaced from 1e-1 down
/// to 1e-4. Each step seeds Newton at `sigma(x) + delta * v` along the
/// kernel eigenvector `v`; a seed captured by the trivial branch is
/// escalated by decades until a genuinely nontrivial critical point
/// emerges. Failed steps are reported, not fatal.
pub fn continue_branch(
    family: &FunctionalFamily,
    bracket: &BifBracket,
    n_steps: usize,
) -> Result<BranchContinuation> {
    if n_steps < 2 {
        return Err(Error::InvalidArgument("n_steps must be at least 2".into()));
    }
    let gamma = ParamLoop {
        generator: bracket.generator,
        base: bracket.base.clone(),
    };
    let t_star = bracket.center();

    // kernel direction at the bracket center
    let x_c = family.loop_point(&gamma, t_star);
    let h_c = family.hessian_at(&x_c, &family.branch_at(&x_c));
    let e_c = eig_sym(&h_c)?;
    let k_min = (0..e_c.dim())
        .min_by(|&i, &j| {
            e_c.eigenvalues[i]
                .abs()
                .partial_cmp(&e_c.eigenvalues[j].abs())
                .unwrap()
        })
        .expect("nonempty spectrum");
    let kernel_dir = e_c.eigenvectors.column(k_min).clone_owned();

    // the branch bifurcates toward parameters where the crossing
    // eigenvalue is negative
    let probe = (10.0 * bracket.width()).max(1e-6);
    let side = {
        let nearest = |t: f64| -> Result<f64> {
            let x = family.loop_point(&gamma, t);
            let h = family.hessian_at(&x, &family.branch_at(&x));
            Ok(eig_sym(&h)?.nearest_eigenvalue())
        };
        if nearest(t_star - probe)? < 0.0 {
            -1.0
        } else if nearest(t_star + probe)? < 0.0 {
            1.0
        } else {
            return Err(Error::Precondition(
                "no side of the bracket has a negative crossing eigenvalue".into(),
            ));
        }
    };

    let mut points = Vec::new();
    let mut failures = 0usize;
    for j in 0..n_steps {
        let offset = 10f64.powf(-1.0 - 3.0 * j as f64 / (n_steps - 1) as f64);
        let t = t_star + side * offset;
        let x = family.loop_point(&gamma, t);
        let sigma = family.branch_at(&x);

        let mut found = None;
        let mut delta = tol::NEWTON_SEED_AMPLITUDE;
        while delta <= 1.0 + 1e-12 {
            let seed = &sigma + &kernel_dir * delta;
            if let Some((u, residual)) = newton_solve(family, &x, &seed) {
                let amplitude = (&u - &sigma).norm();
                if residual <= tol::NEWTON_TOL && amplitude >= 10.0 * tol::NEWTON_STEP_FLOOR {
                    found = Some(BranchPoint {
                        x: t,
                        u,
                        residual,
                        amplitude,
                        offset,
                    });
                    break;
                }
            }
            delta *= 10.0;
        }
        match found {
            Some(p) => points.push(p),
            None => failures += 1,
        }
    }

    let exponent_fit = if points.len() >= 3 {
        let xs: Vec<f64> = points.iter().map(|p| p.offset.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.amplitude.ln()).collect();
        Some(least_squares_slope(&xs, &ys))
    } else {
        None
    };
    Ok(BranchContinuation {
        points,
        exponent_fit,
        side,
        failures,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// A full bifurcation certificate: nonzero loop flow, a tight bracket, and
/// a nontrivial critical point witnessing the bifurcation.
#[derive(Clone, Debug)]
pub struct BifurcationCertificate {
    pub gamma: ParamLoop,
    pub sf: i64,
    pub bracket: BifBracket,
    pub witness: BranchPoint,
    pub exponent_fit: Option<f64>,
}

impl BifurcationCertificate {
    /// `{scenario, loop, sf, bracket, witness:{x, norm_u, residual}, exponent_fit}`.
    pub fn report(&self, scenario: &str) -> CertificateReport {
        CertificateReport {
            scenario: scenario.to_string(),
            r#loop: self.gamma.describe(),
            sf: self.sf,
            bracket: [self.bracket.lo, self.bracket.hi],
            witness: WitnessReport {
                x: self.witness.x,
                norm_u: self.witness.amplitude,
                residual: self.witness.residual,
            },
            exponent_fit: self.exponent_fit,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub x: f64,
    pub norm_u: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub scenario: String,
    pub r#loop: String,
    pub sf: i64,
    pub bracket: [f64; 2],
    pub witness: WitnessReport,
    pub exponent_fit: Option<f64>,
}

/// Runs the whole certificate pipeline along a loop: spectral flow,
/// bracket, and witness (the continued point closest to the bracket).
pub fn certify_bifurcation(
    family: &FunctionalFamily,
    gamma: &ParamLoop,
    n_steps: usize,
) -> Result<BifurcationCertificate> {
    certify_bifurcation_with(family, gamma, n_steps, tol::LOCATE_TOL_REL)
}

pub fn certify_bifurcation_with(
    family: &FunctionalFamily,
    gamma: &ParamLoop,
    n_steps: usize,
    locate_tol: f64,
) -> Result<BifurcationCertificate> {
    let flow = sf_along_loop(family, gamma)?;
    let bracket = locate_bifurcation_with(family, gamma, locate_tol)?;
    let continuation = continue_branch(family, &bracket, n_steps)?;
    let witness = continuation
        .points
        .iter()
        .min_by(|p, q| p.offset.partial_cmp(&q.offset).unwrap())
        .cloned()
        .ok_or_else(|| {
            Error::Precondition(
                "no nontrivial branch found; the certificate still holds by nonzero spectral flow"
                    .into(),
            )
        })?;
    Ok(BifurcationCertificate {
        gamma: gamma.clone(),
        sf: flow.real_dim,
        bracket,
        witness,
        exponent_fit: continuation.exponent_fit,
    })
}

/// Grid-scale scan of the bifurcation set of a family over a torus.
#[derive(Clone, Debug, Serialize)]
pub struct BifSetScan {
    pub n1: usize,
    pub n2: usize,
    /// Row-major cell mask: degeneracy at a corner or an edge sign change.
    pub flagged: Vec<bool>,
    /// Cells flagged by corner degeneracy alone, without an edge-level
    /// eigenvalue sign change backing them.
    pub candidate_only: Vec<bool>,
    pub certified_count: usize,
    pub candidate_only_count: usize,
    pub box_dimension_estimate: f64,
    pub wraps_generator: (bool, bool),
    pub complement_connected: bool,
}

/// Flags every cell whose corner Hessians bracket a kernel, estimates the
/// box-counting dimension of the flagged set over dyadic coarsenings, and
/// computes the torus-topology indicators.
pub fn bif_set_scan(family: &FunctionalFamily) -> Result<BifSetScan> {
    let (n1, n2, periods, base) = match family.parameter_space() {
        ParameterSpace::TorusGrid {
            n1,
            n2,
            periods,
            base,
        } => (*n1, *n2, *periods, *base),
        ParameterSpace::Circle { .. } => {
            return Err(Error::InvalidArgument(
                "bif_set_scan needs a torus-grid parameter space".into(),
            ))
        }
    };
    if n1 < 32 || n2 < 32 {
        return Err(Error::InvalidArgument(format!(
            "torus grid {n1}x{n2} is below the minimum 32x32"
        )));
    }

    // nearest-to-zero eigenvalue of the Hessian at every grid node
    let mut nearest = vec![0.0f64; n1 * n2];
    let mut min_abs = vec![0.0f64; n1 * n2];
    let mut norm_scale = 0.0f64;
    for i in 0..n1 {
        for j in 0..n2 {
            let x = [
                base.0 + periods.0 * i as f64 / n1 as f64,
                base.1 + periods.1 * j as f64 / n2 as f64,
            ];
            let sigma = family.branch_at(&x);
            let h = family.hessian_at(&x, &sigma);
            let e = eig_sym(&h)?;
            let v = e.nearest_eigenvalue();
            nearest[i * n2 + j] = v;
            min_abs[i * n2 + j] = v.abs();
            norm_scale = norm_scale.max(h.op_norm_bound());
        }
    }
    let kernel_tol = tol::kernel_tol(norm_scale);

    let idx = |i: usize, j: usize| (i % n1) * n2 + (j % n2);
    let mut flagged = vec![false; n1 * n2];
    let mut candidate_only = vec![false; n1 * n2];
    let mut certified_count = 0usize;
    let mut candidate_only_count = 0usize;
    for i in 0..n1 {
        for j in 0..n2 {
            let corners = [idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)];
            let degenerate = corners.iter().any(|&c| min_abs[c] <= kernel_tol);
            let edges = [
                (idx(i, j), idx(i + 1, j)),
                (idx(i, j), idx(i, j + 1)),
                (idx(i + 1, j), idx(i + 1, j + 1)),
                (idx(i, j + 1), idx(i + 1, j + 1)),
            ];
            let sign_change = edges
                .iter()
                .any(|&(a, b)| nearest[a] * nearest[b] < 0.0);
            if sign_change {
                flagged[i * n2 + j] = true;
                certified_count += 1;
            } else if degenerate {
                flagged[i * n2 + j] = true;
                candidate_only[i * n2 + j] = true;
                candidate_only_count += 1;
            }
        }
    }

    if flagged.iter().all(|&f| !f) {
        // an empty flagged set must be consistent with every generator
        // loop having zero spectral flow
        for generator in 0..2 {
            for frac in [0.0, 0.25, 0.5, 0.75] {
                let mut b = vec![base.0, base.1];
                let other = 1 - generator;
                b[other] += frac * if other == 0 { periods.0 } else { periods.1 };
                let gamma = ParamLoop {
                    generator,
                    base: b,
                };
                let flow = sf_along_loop(family, &gamma)?;
                if flow.real_dim != 0 {
                    return Err(Error::ScanInconsistent { sf: flow.real_dim });
                }
            }
        }
    }

    let box_dimension_estimate = box_dimension(&flagged, n1, n2);
    let wraps_generator = wraps(&flagged, n1, n2);
    let complement_connected = complement_connected(&flagged, n1, n2);

    Ok(BifSetScan {
        n1,
        n2,
        flagged,
        candidate_only,
        certified_count,
        candidate_only_count,
        box_dimension_estimate,
        wraps_generator,
        complement_connected,
    })
}

/// Least-squares box-counting dimension over dyadic coarsenings
/// `2^0 .. 2^(BOX_COUNT_LEVELS-1)`.
fn box_dimension(flagged: &[bool], n1: usize, n2: usize) -> f64 {
    let mut log_inv_size = Vec::new();
    let mut log_count = Vec::new();
    for level in 0..tol::BOX_COUNT_LEVELS {
        let s = 1usize << level;
        let b1 = n1.div_ceil(s);
        let b2 = n2.div_ceil(s);
        let mut count = 0usize;
        for bi in 0..b1 {
            for bj in 0..b2 {
                let mut hit = false;
                'block: for i in bi * s..((bi + 1) * s).min(n1) {
                    for j in bj * s..((bj + 1) * s).min(n2) {
                        if flagged[i * n2 + j] {
                            hit = true;
                            break 'block;
                        }
                    }
                }
                if hit {
                    count += 1;
                }
            }
        }
        if count > 0 {
            log_inv_size.push(-(s as f64).ln());
            log_count.push((count as f64).ln());
        }
    }
    if log_inv_size.len() < 2 {
        return 0.0;
    }
    least_squares_slope(&log_inv_size, &log_count)
}

/// Whether the flagged set contains a cycle wrapping either generator:
/// breadth-first search over flagged cells with integer lifts; a revisit
/// with a shifted lift certifies a wrap.
fn wraps(flagged: &[bool], n1: usize, n2: usize) -> (bool, bool) {
    let mut wraps0 = false;
    let mut wraps1 = false;
    let mut lift: Vec<Option<(i64, i64)>> = vec![None; n1 * n2];
    for start in 0..n1 * n2 {
        if !flagged[start] || lift[start].is_some() {
            continue;
        }
        lift[start] = Some((0, 0));
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(cell) = queue.pop_front() {
            let (i, j) = (cell / n2, cell % n2);
            let (a, b) = lift[cell].unwrap();
            let neighbors = [
                ((i + 1) % n1, j, a + 1, b),
                ((i + n1 - 1) % n1, j, a - 1, b),
                (i, (j + 1) % n2, a, b + 1),
                (i, (j + n2 - 1) % n2, a, b - 1),
            ];
            for (ni, nj, na, nb) in neighbors {
                let ncell = ni * n2 + nj;
                if !flagged[ncell] {
                    continue;
                }
                match lift[ncell] {
                    None => {
                        lift[ncell] = Some((na, nb));
                        queue.push_back(ncell);
                    }
                    Some((ea, eb)) => {
                        if na != ea {
                            wraps0 = true;
                        }
                        if nb != eb {
                            wraps1 = true;
                        }
                    }
                }
            }
        }
    }
    (wraps0, wraps1)
}

/// Whether the unflagged cells form a single 4-connected component on the
/// torus. An empty complement counts as connected.
fn complement_connected(flagged: &[bool], n1: usize, n2: usize) -> bool {
    let total_free = flagged.iter().filter(|&&f| !f).count();
    if total_free == 0 {
        return true;
    }
    let start = flagged.iter().position(|&f| !f).unwrap();
    let mut seen = vec![false; n1 * n2];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    let mut reached = 1usize;
    while let Some(cell) = queue.pop_front() {
        let (i, j) = (cell / n2, cell % n2);
        let neighbors = [
            ((i + 1) % n1, j),
            ((i + n1 - 1) % n1, j),
            (i, (j + 1) % n2),
            (i, (j + n2 - 1) % n2),
        ];
        for (ni, nj) in neighbors {
            let ncell = ni * n2 + nj;
            if !flagged[ncell] && !seen[ncell] {
                seen[ncell] = true;
                reached += 1;
                queue.push_back(ncell);
            }
        }
    }
    reached == total_free
}

/// Checks that every sampled generator loop with nonzero spectral flow
/// passes through the flagged set.
pub fn scan_loop_consistency(
    family: &FunctionalFamily,
    scan: &BifSetScan,
    loops_per_generator: usize,
) -> Result<bool> {
    let (periods, base) = match family.parameter_space() {
        ParameterSpace::TorusGrid { periods, base, .. } => (*periods, *base),
        _ => {
            return Err(Error::InvalidArgument(
                "scan consistency needs a torus family".into(),
            ))
        }
    };
    for generator in 0..2 {
        let other = 1 - generator;
        for k in 0..loops_per_generator {
            let frac = k as f64 / loops_per_generator as f64;
            let mut b = vec![base.0, base.1];
            b[other] += frac * if other == 0 { periods.0 } else { periods.1 };
            let gamma = ParamLoop { generator, base: b };
            let flow = sf_along_loop(family, &gamma)?;
            if flow.real_dim == 0 {
                continue;
            }
            // the loop passes through one row / column of cells
            let along_other_idx = if other == 0 {
                ((frac * scan.n1 as f64).floor() as usize).min(scan.n1 - 1)
            } else {
                ((frac * scan.n2 as f64).floor() as usize).min(scan.n2 - 1)
            };
            let hit = if generator == 0 {
                (0..scan.n1).any(|i| scan.flagged[i * scan.n2 + along_other_idx])
            } else {
                (0..scan.n2).any(|j| scan.flagged[along_other_idx * scan.n2 + j])
            };
            if !hit {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
