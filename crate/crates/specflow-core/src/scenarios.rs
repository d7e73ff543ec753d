//! Built-in operator families and the scenario registry.
//!
//! The closed-form families here double as test oracles: each constructor
//! returns enough ground truth (planted crossing instants, signatures,
//! twist counts) to check the solvers against independent knowledge.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, random_orthogonal, SymmetricMatrix};
use crate::paths::{ClutchedLoop, Frame, OperatorPath};

/// Ground truth for a planted-crossings path.
#[derive(Clone, Debug)]
pub struct PlantedTruth {
    /// Crossing instants, increasing.
    pub instants: Vec<f64>,
    /// Signature contribution of each crossing (sign of the branch slope).
    pub signs: Vec<i64>,
}

impl PlantedTruth {
    pub fn signature_sum(&self) -> i64 {
        self.signs.iter().sum()
    }
}

/// `diag(t - c_i)` with evenly spaced offsets; every branch crosses upward.
pub fn diag_linear(dim: usize, interval: (f64, f64), c_lo: f64, c_hi: f64) -> Result<OperatorPath<f64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be positive".into()));
    }
    let offsets: Vec<f64> = (0..dim)
        .map(|i| {
            if dim == 1 {
                0.5 * (c_lo + c_hi)
            } else {
                c_lo + (c_hi - c_lo) * (i as f64) / ((dim - 1) as f64)
            }
        })
        .collect();
    let offs = offsets.clone();
    Ok(OperatorPath::new(interval, move |t| {
        SymmetricMatrix::diagonal(&offs.iter().map(|c| t - c).collect::<Vec<_>>())
    })?
    .with_derivative(move |_| SymmetricMatrix::identity(dim)))
}

/// Conjugated planted family `Q diag(s_i w_i (t - c_i), offsets...) Q^T`.
///
/// Crossing instants keep a minimum separation of 8% of the interval and
/// stay 15% away from the endpoints; non-crossing branches oscillate but
/// never come closer to zero than 1. Derivative in closed form.
pub fn planted_crossings(
    dim: usize,
    crossings: usize,
    interval: (f64, f64),
    seed: u64,
) -> Result<(OperatorPath<f64>, PlantedTruth)> {
    if crossings > dim {
        return Err(Error::InvalidArgument(format!(
            "{crossings} crossings do not fit in dimension {dim}"
        )));
    }
    let (a, b) = interval;
    let len = b - a;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut instants: Vec<f64> = Vec::new();
    let mut guard = 0;
    while instants.len() < crossings {
        let c = a + len * (0.15 + 0.70 * rng.gen::<f64>());
        if instants.iter().all(|x| (x - c).abs() >= 0.08 * len) {
            instants.push(c);
        }
        guard += 1;
        assert!(guard < 10_000, "could not place {crossings} separated crossings");
    }
    instants.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let signs: Vec<i64> = (0..crossings)
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect();
    let slopes: Vec<f64> = (0..crossings).map(|_| rng.gen_range(0.5..2.0)).collect();

    // non-crossing branches: bounded oscillation around an offset >= 1.2
    let spares: Vec<(f64, f64, f64, f64)> = (crossings..dim)
        .map(|i| {
            let base = (1.2 + 0.8 * rng.gen::<f64>()) * if i % 2 == 0 { 1.0 } else { -1.0 };
            let amp = 0.15 * rng.gen::<f64>();
            let freq = rng.gen_range(0.5..3.0);
            let phase = rng.gen_range(0.0..6.28);
            (base, amp, freq, phase)
        })
        .collect();

    let q = random_orthogonal(dim, &mut rng);
    let truth = PlantedTruth {
        instants: instants.clone(),
        signs: signs.clone(),
    };

    let entries = {
        let instants = instants.clone();
        let signs = signs.clone();
        let slopes = slopes.clone();
        let spares = spares.clone();
        move |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| {
                    if i < instants.len() {
                        signs[i] as f64 * slopes[i] * (t - instants[i])
                    } else {
                        let (base, amp, freq, phase) = spares[i - instants.len()];
                        base + amp * (freq * t + phase).sin()
                    }
                })
                .collect()
        }
    };
    let entries_d = {
        let signs = signs.clone();
        let slopes = slopes.clone();
        let spares = spares.clone();
        let n_cross = crossings;
        move |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| {
                    if i < n_cross {
                        signs[i] as f64 * slopes[i]
                    } else {
                        let (_, amp, freq, phase) = spares[i - n_cross];
                        amp * freq * (freq * t + phase).cos()
                    }
                })
                .collect()
        }
    };

    let q_eval = q.clone();
    let q_deriv = q.clone();
    let path = OperatorPath::new(interval, move |t| {
        SymmetricMatrix::diagonal(&entries(t)).conjugate_by(&q_eval.transpose())
    })?
    .with_derivative(move |t| {
        SymmetricMatrix::diagonal(&entries_d(t)).conjugate_by(&q_deriv.transpose())
    });
    Ok((path, truth))
}

/// Cyclic index shift `e_n -> e_{n-k}` on the truncation `n in [-nn, nn]`.
pub fn shift_clutch(nn: i64, k: i64) -> DMatrix<f64> {
    let dim = (2 * nn + 1) as usize;
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let row = (col as i64 - k).rem_euclid(dim as i64) as usize;
        u[(row, col)] = 1.0;
    }
    u
}

/// Truncated twisted Fourier family `A(t) = diag(n + k t)`, `n in [-nn, nn]`,
/// over one period of the twist, clutched by the index shift `e_n -> e_{n-k}`.
///
/// Exactly `|k|` branches cross zero, each with signature `sign(k)`, so the
/// loop spectral flow and the Chern number both equal `k`. The interval is
/// `[1/(2k), 1/(2k) + 1]` so that endpoint spectra sit at half-integers; for
/// `k = 1` this is `t in [0.5, 1.5]`.
pub fn twisted_fourier(nn: i64, twist: i64, window: f64) -> Result<ClutchedLoop<f64>> {
    if nn < 1 {
        return Err(Error::InvalidArgument(format!("truncation {nn} must be >= 1")));
    }
    if twist == 0 {
        return Err(Error::InvalidArgument("twist must be nonzero".into()));
    }
    if !(window > 0.0) || window > nn as f64 {
        return Err(Error::InvalidArgument(format!(
            "window {window} must lie in (0, {nn}]"
        )));
    }
    if window + twist.unsigned_abs() as f64 >= nn as f64 {
        return Err(Error::InvalidArgument(format!(
            "window {window} plus twist {twist} reaches the truncation edge {nn}"
        )));
    }
    let k = twist as f64;
    let t0 = 0.5 / k;
    let dim = (2 * nn + 1) as usize;
    let path = OperatorPath::new((t0, t0 + 1.0), move |t| {
        SymmetricMatrix::diagonal(&(-nn..=nn).map(|n| n as f64 + k * t).collect::<Vec<_>>())
    })?
    .with_derivative(move |_| {
        SymmetricMatrix::symmetrize(DMatrix::from_diagonal_element(dim, dim, k))
    });
    ClutchedLoop::new(path, shift_clutch(nn, twist), window)
}

/// Seeded trigonometric loop `A(t) = C_0 + sum_j C_j cos(2 pi j t) + S_j sin(2 pi j t)`
/// on `[0, 1]` with `A(1) = A(0)`, clutched by the identity.
///
/// The constant term is shifted so the endpoint spectrum keeps a gap of at
/// least 0.25 around zero. A genuine matrix loop: its spectral flow and
/// Chern number vanish.
pub fn random_smooth_loop(
    dim: usize,
    modes: usize,
    amplitude: f64,
    seed: u64,
) -> Result<ClutchedLoop<f64>> {
    if dim == 0 || modes == 0 {
        return Err(Error::InvalidArgument("dim and modes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0 = SymmetricMatrix::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    let coeffs: Vec<(SymmetricMatrix, SymmetricMatrix)> = (1..=modes)
        .map(|j| {
            let scale = amplitude / j as f64;
            let c = SymmetricMatrix::from_fn(dim, |_, _| rng.gen_range(-scale..scale));
            let s = SymmetricMatrix::from_fn(dim, |_, _| rng.gen_range(-scale..scale));
            (c, s)
        })
        .collect();

    let eval_raw = {
        let c0 = c0.clone();
        let coeffs = coeffs.clone();
        move |t: f64| -> DMatrix<f64> {
            let tau = 2.0 * std::f64::consts::PI * t;
            let mut m = c0.matrix().clone();
            for (j, (c, s)) in coeffs.iter().enumerate() {
                let w = (j + 1) as f64 * tau;
                m += c.matrix() * w.cos() + s.matrix() * w.sin();
            }
            m
        }
    };

    // shift so that A(0) keeps a spectral gap around zero
    let e0 = eig_sym(&SymmetricMatrix::symmetrize(eval_raw(0.0)))?;
    let mut shift = 0.0;
    let mut best_gap = e0.min_abs_eigenvalue();
    for step in 1..=40 {
        if best_gap >= 0.25 {
            break;
        }
        let cand = 0.1 * ((step + 1) / 2) as f64 * if step % 2 == 0 { -1.0 } else { 1.0 };
        let gap = e0
            .eigenvalues
            .iter()
            .map(|l| (l + cand).abs())
            .fold(f64::INFINITY, f64::min);
        if gap > best_gap {
            best_gap = gap;
            shift = cand;
        }
    }

    let eval = move |t: f64| {
        let mut m = eval_raw(t);
        for i in 0..dim {
            m[(i, i)] += shift;
        }
        SymmetricMatrix::symmetrize(m)
    };
    let path = OperatorPath::new((0.0, 1.0), eval)?;
    let a0 = path.evaluate(0.0);
    let window = 0.5 * (1.0 + a0.op_norm_bound());
    ClutchedLoop::new(path, DMatrix::identity(dim, dim), window)
}

/// Smooth orthogonal frame built from seeded Givens rotations whose angles
/// grow linearly in `t`; `F(a) = I`.
pub fn rotation_frame(dim: usize, interval: (f64, f64), seed: u64) -> Frame<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_planes = (dim / 2).max(1).min(3);
    let planes: Vec<(usize, usize, f64)> = (0..n_planes)
        .map(|_| {
            let p = rng.gen_range(0..dim);
            let mut q = rng.gen_range(0..dim);
            if q == p {
                q = (p + 1) % dim;
            }
            (p.min(q), p.max(q), rng.gen_range(-2.0..2.0))
        })
        .collect();
    let a = interval.0;
    Arc::new(move |t: f64| {
        let mut f = DMatrix::identity(dim, dim);
        for &(p, q, rate) in &planes {
            if p == q {
                continue;
            }
            let theta = rate * (t - a);
            let mut g = DMatrix::identity(dim, dim);
            g[(p, p)] = theta.cos();
            g[(q, q)] = theta.cos();
            g[(p, q)] = -theta.sin();
            g[(q, p)] = theta.sin();
            f *= g;
        }
        f
    })
}

fn pitchfork_pieces(
    linear_part: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static,
    dim: usize,
) -> (
    impl Fn(&[f64], &DVector<f64>) -> f64 + Send + Sync + 'static,
    impl Fn(&[f64], &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    impl Fn(&[f64], &DVector<f64>) -> SymmetricMatrix + Send + Sync + 'static,
) {
    let lp_v = linear_part.clone();
    let lp_g = linear_part.clone();
    let lp_h = linear_part;
    let value = move |x: &[f64], u: &DVector<f64>| -> f64 {
        let d = lp_v(x);
        let quad: f64 = (0..dim).map(|k| d[k] * u[k] * u[k]).sum();
        0.5 * quad + 0.25 * u.norm_squared() * u.norm_squared()
    };
    let gradient = move |x: &[f64], u: &DVector<f64>| -> DVector<f64> {
        let d = lp_g(x);
        let n2 = u.norm_squared();
        DVector::from_fn(dim, |k, _| d[k] * u[k] + n2 * u[k])
    };
    let hessian = move |x: &[f64], u: &DVector<f64>| -> SymmetricMatrix {
        let d = lp_h(x);
        let n2 = u.norm_squared();
        let mut m = DMatrix::from_fn(dim, dim, |i, j| 2.0 * u[i] * u[j]);
        for k in 0..dim {
            m[(k, k)] += d[k] + n2;
        }
        SymmetricMatrix::symmetrize(m)
    };
    (value, gradient, hessian)
}

/// Pitchfork family over the circle: `f_t(u) = <A(t)u, u>/2 + |u|^4/4` with
/// `A(t) = diag(n + twist * t) (x) I_modes` on the Fourier truncation
/// `n in [-nn, nn]`.
///
/// The Hessian along the trivial branch is the twisted family itself, so
/// the generator loop has spectral flow `modes * twist`; each crossing
/// branch carries a pitchfork with amplitude `sqrt(-lambda)`.
pub fn pitchfork_twisted(nn: i64, twist: i64, modes: usize) -> Result<FunctionalFamily> {
    if nn < 1 || modes == 0 {
        return Err(Error::InvalidArgument(
            "pitchfork-twisted needs nn >= 1 and modes >= 1".into(),
        ));
    }
    if twist == 0 {
        return Err(Error::InvalidArgument("twist must be nonzero".into()));
    }
    if twist.unsigned_abs() as f64 + nn as f64 / 2.0 >= nn as f64 {
        return Err(Error::InvalidArgument(format!(
            "twist {twist} reaches the truncation edge {nn}"
        )));
    }
    let block = (2 * nn + 1) as usize;
    let dim = block * modes;
    let k = twist as f64;
    let t0 = 0.5 / k;

    let linear_part = move |x: &[f64]| -> Vec<f64> {
        let t = x[0];
        let mut d = Vec::with_capacity(dim);
        for n in -nn..=nn {
            for _ in 0..modes {
                d.push(n as f64 + k * t);
            }
        }
        d
    };
    let (value, gradient, hessian) = pitchfork_pieces(linear_part, dim);

    // clutch: index shift on the truncation, acting blockwise on modes
    let base_shift = shift_clutch(nn, twist);
    let mut u = DMatrix::zeros(dim, dim);
    for r in 0..block {
        for c in 0..block {
            if base_shift[(r, c)] != 0.0 {
                for m in 0..modes {
                    u[(r * modes + m, c * modes + m)] = base_shift[(r, c)];
                }
            }
        }
    }

    Ok(FunctionalFamily::new(
        ParameterSpace::Circle {
            period: 1.0,
            base: t0,
        },
        dim,
        value,
        gradient,
    )
    .with_hessian(hessian)
    .with_clutch(0, u, nn as f64 / 2.0))
}

/// Pitchfork family over the torus `(t, phi)` with the crossing branch
/// perturbed by `eps * cos(phi)`: the Hessian along the trivial branch is
/// `diag(n + t) + eps cos(phi) P_{-1}`, so the kernel locus is the closed
/// curve `t = 1 - eps cos(phi)` wrapping the `phi` generator.
///
/// For `eps != 0` the rank-one perturbation is pinned to the mode
/// `e_{-1}`, which genuinely breaks the twist identification in the `t`
/// direction; `t` loops therefore carry no clutch data and are measured by
/// the path spectral flow.
pub fn pitchfork_perturbed_torus(nn: i64, eps: f64, grid: usize) -> Result<FunctionalFamily> {
    if nn < 2 {
        return Err(Error::InvalidArgument("nn must be at least 2".into()));
    }
    if grid < 32 {
        return Err(Error::InvalidArgument(format!(
            "grid {grid} is below the minimum 32"
        )));
    }
    if !(0.0..0.5).contains(&eps.abs()) && eps != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon {eps} must satisfy |eps| < 0.5"
        )));
    }
    let dim = (2 * nn + 1) as usize;
    let crossing_index = (nn - 1) as usize; // position of n = -1

    let linear_part = move |x: &[f64]| -> Vec<f64> {
        let (t, phi) = (x[0], x[1]);
        (-nn..=nn)
            .map(|n| {
                let mut v = n as f64 + t;
                if n == -1 {
                    v += eps * phi.cos();
                }
                v
            })
            .collect()
    };
    let (value, gradient, hessian) = pitchfork_pieces(linear_part, dim);

    let mut family = FunctionalFamily::new(
        ParameterSpace::TorusGrid {
            n1: grid,
            n2: grid,
            periods: (1.0, 2.0 * std::f64::consts::PI),
            base: (0.5, 0.0),
        },
        dim,
        value,
        gradient,
    )
    .with_hessian(hessian)
    // phi loops are genuinely periodic
    .with_clutch(1, DMatrix::identity(dim, dim), nn as f64 / 2.0);
    if eps == 0.0 {
        family = family.with_clutch(0, shift_clutch(nn, 1), nn as f64 / 2.0);
    }
    let _ = crossing_index;
    Ok(family)
}

/// Purely quadratic family `f_t(u) = <A(t)u, u>/2` over the circle with a
/// positive definite loop `A(t)`: invertible Hessians everywhere, no
/// bifurcation anywhere.
pub fn quadratic_invertible(dim: usize, seed: u64) -> Result<FunctionalFamily> {
    let lp = random_smooth_loop(dim, 3, 0.5, seed)?;
    // shift to positive definiteness over a probe of the loop
    let mut min_eig = f64::INFINITY;
    for k in 0..=32 {
        let t = k as f64 / 32.0;
        let e = eig_sym(&lp.path.evaluate(t))?;
        min_eig = min_eig.min(e.eigenvalues[0]);
    }
    let shift = 0.5 - min_eig.min(0.0);
    let path = lp.path.clone();
    let path_g = lp.path.clone();
    let path_h = lp.path.clone();
    Ok(FunctionalFamily::new(
        ParameterSpace::Circle {
            period: 1.0,
            base: 0.0,
        },
        dim,
        move |x, u| 0.5 * (path.evaluate(x[0]).shift(shift).matrix() * u).dot(u),
        move |x, u| path_g.evaluate(x[0]).shift(shift).matrix() * u,
    )
    .with_hessian(move |x, _| path_h.evaluate(x[0]).shift(shift))
    .with_clutch(0, DMatrix::identity(dim, dim), 1e6))
}

/// Torus variant of [`quadratic_invertible`]: positive definite in both
/// directions, genuinely doubly periodic.
pub fn quadratic_invertible_torus(dim: usize, seed: u64, grid: usize) -> Result<FunctionalFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b1 = random_symmetric(dim, &mut rng);
    let b2 = random_symmetric(dim, &mut rng);
    let b3 = random_symmetric(dim, &mut rng);
    let scale = 0.2 / dim as f64;
    let shift = 1.0 + 3.0 * 0.2;
    let tau = 2.0 * std::f64::consts::PI;
    let mat = move |x: &[f64]| -> SymmetricMatrix {
        let m = b1.matrix() * (scale * (tau * x[0]).cos())
            + b2.matrix() * (scale * (tau * x[0]).sin())
            + b3.matrix() * (scale * x[1].cos());
        let mut m = m;
        for k in 0..dim {
            m[(k, k)] += shift;
        }
        SymmetricMatrix::symmetrize(m)
    };
    let mat_v = mat.clone();
    let mat_g = mat.clone();
    Ok(FunctionalFamily::new(
        ParameterSpace::TorusGrid {
            n1: grid,
            n2: grid,
            periods: (1.0, tau),
            base: (0.0, 0.0),
        },
        dim,
        move |x, u| 0.5 * (mat_v(x).matrix() * u).dot(u),
        move |x, u| mat_g(x).matrix() * u,
    )
    .with_hessian(move |x, _| mat(x)))
}

/// What a registry key builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScenarioKind {
    Path,
    Loop,
    Bifurcation,
}

/// Typed scenario parameter value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
}

impl ParamValue {
    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            ParamValue::Int(v) => Some(v),
            ParamValue::Float(v) if v.fract() == 0.0 && v.abs() < 9e15 => Some(v as i64),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            ParamValue::Int(v) => v as f64,
            ParamValue::Float(v) => v,
        }
    }
}

/// One documented parameter of a scenario.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParamSpec {
    pub key: &'static str,
    pub doc: &'static str,
    pub default: ParamValue,
}

/// A registry entry.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScenarioInfo {
    pub key: &'static str,
    pub kind: ScenarioKind,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
}

/// Alphabetical scenario registry consumed by the CLI.
pub fn registry() -> &'static [ScenarioInfo] {
    &[
        ScenarioInfo {
            key: "diag-linear",
            kind: ScenarioKind::Path,
            summary: "diagonal path diag(t - c_i) with evenly spaced offsets",
            params: &[
                ParamSpec { key: "dim", doc: "matrix dimension", default: ParamValue::Int(4) },
                ParamSpec { key: "c_lo", doc: "smallest crossing offset", default: ParamValue::Float(-0.5) },
                ParamSpec { key: "c_hi", doc: "largest crossing offset", default: ParamValue::Float(0.5) },
                ParamSpec { key: "t0", doc: "interval start", default: ParamValue::Float(-1.0) },
                ParamSpec { key: "t1", doc: "interval end", default: ParamValue::Float(1.0) },
            ],
        },
        ScenarioInfo {
            key: "pitchfork-perturbed-torus",
            kind: ScenarioKind::Bifurcation,
            summary: "pitchfork family over the (t, phi) torus with kernel curve t = 1 - eps cos(phi)",
            params: &[
                ParamSpec { key: "N", doc: "Fourier truncation: modes n in [-N, N]", default: ParamValue::Int(8) },
                ParamSpec { key: "epsilon", doc: "perturbation amplitude (|eps| < 0.5)", default: ParamValue::Float(0.3) },
                ParamSpec { key: "grid", doc: "torus grid size per generator (>= 32)", default: ParamValue::Int(128) },
            ],
        },
        ScenarioInfo {
            key: "pitchfork-twisted",
            kind: ScenarioKind::Bifurcation,
            summary: "pitchfork family over the circle whose Hessian is the twisted Fourier family",
            params: &[
                ParamSpec { key: "N", doc: "Fourier truncation: modes n in [-N, N]", default: ParamValue::Int(8) },
                ParamSpec { key: "twist", doc: "winding of the spectral ladder per period", default: ParamValue::Int(1) },
                ParamSpec { key: "modes", doc: "multiplicity of every spectral branch", default: ParamValue::Int(1) },
            ],
        },
        ScenarioInfo {
            key: "planted-crossings",
            kind: ScenarioKind::Path,
            summary: "conjugated diagonal path with seeded crossing instants and signatures",
            params: &[
                ParamSpec { key: "dim", doc: "matrix dimension", default: ParamValue::Int(8) },
                ParamSpec { key: "crossings", doc: "number of planted crossings", default: ParamValue::Int(3) },
                ParamSpec { key: "t0", doc: "interval start", default: ParamValue::Float(-1.0) },
                ParamSpec { key: "t1", doc: "interval end", default: ParamValue::Float(1.0) },
            ],
        },
        ScenarioInfo {
            key: "quadratic-invertible",
            kind: ScenarioKind::Bifurcation,
            summary: "purely quadratic family with positive definite Hessians: no bifurcation",
            params: &[
                ParamSpec { key: "dim", doc: "state dimension", default: ParamValue::Int(5) },
            ],
        },
        ScenarioInfo {
            key: "random-smooth",
            kind: ScenarioKind::Loop,
            summary: "seeded trigonometric matrix loop, identity clutch, zero invariants",
            params: &[
                ParamSpec { key: "dim", doc: "matrix dimension", default: ParamValue::Int(6) },
                ParamSpec { key: "modes", doc: "number of Fourier modes", default: ParamValue::Int(3) },
                ParamSpec { key: "amplitude", doc: "oscillation amplitude", default: ParamValue::Float(0.7) },
            ],
        },
        ScenarioInfo {
            key: "two-crossing",
            kind: ScenarioKind::Bifurcation,
            summary: "pitchfork family with two upward crossings on one loop",
            params: &[
                ParamSpec { key: "N", doc: "Fourier truncation: modes n in [-N, N]", default: ParamValue::Int(8) },
            ],
        },
        ScenarioInfo {
            key: "twisted-fourier",
            kind: ScenarioKind::Loop,
            summary: "truncated twisted family diag(n + twist*t) with the index-shift clutch",
            params: &[
                ParamSpec { key: "N", doc: "Fourier truncation: modes n in [-N, N]", default: ParamValue::Int(16) },
                ParamSpec { key: "twist", doc: "number of branches crossing zero", default: ParamValue::Int(1) },
                ParamSpec { key: "window", doc: "spectral window (0 = auto N/2)", default: ParamValue::Float(0.0) },
            ],
        },
    ]
}

/// Looks up a registry entry.
pub fn scenario_info(key: &str) -> Result<&'static ScenarioInfo> {
    registry()
        .iter()
        .find(|s| s.key == key)
        .ok_or_else(|| Error::UnknownScenario(key.to_string()))
}

/// A built scenario, ready for the pipelines.
pub enum Built {
    Path(OperatorPath<f64>),
    Loop(ClutchedLoop<f64>),
    Bifurcation(FunctionalFamily),
}

/// Validates the overrides against the schema and builds the scenario.
/// Unknown or ill-typed parameter keys are rejected before any
/// computation.
pub fn build_scenario(
    key: &str,
    overrides: &std::collections::BTreeMap<String, ParamValue>,
    seed: u64,
) -> Result<Built> {
    let info = scenario_info(key)?;
    for k in overrides.keys() {
        if !info.params.iter().any(|p| p.key == k) {
            return Err(Error::UnknownParam {
                scenario: key.to_string(),
                key: k.clone(),
            });
        }
    }
    let get = |pkey: &str| -> ParamValue {
        overrides
            .get(pkey)
            .copied()
            .unwrap_or_else(|| {
                info.params
                    .iter()
                    .find(|p| p.key == pkey)
                    .expect("parameter key exists in schema")
                    .default
            })
    };
    let get_int = |pkey: &str| -> Result<i64> {
        get(pkey).as_i64().ok_or_else(|| Error::BadParam {
            key: pkey.to_string(),
            detail: "expected an integer".to_string(),
        })
    };
    let get_pos = |pkey: &str| -> Result<usize> {
        let v = get_int(pkey)?;
        usize::try_from(v).map_err(|_| Error::BadParam {
            key: pkey.to_string(),
            detail: format!("expected a nonnegative integer, got {v}"),
        })
    };

    match key {
        "diag-linear" => Ok(Built::Path(diag_linear(
            get_pos("dim")?,
            (get("t0").as_f64(), get("t1").as_f64()),
            get("c_lo").as_f64(),
            get("c_hi").as_f64(),
        )?)),
        "planted-crossings" => {
            let (path, _) = planted_crossings(
                get_pos("dim")?,
                get_pos("crossings")?,
                (get("t0").as_f64(), get("t1").as_f64()),
                seed,
            )?;
            Ok(Built::Path(path))
        }
        "twisted-fourier" => {
            let nn = get_int("N")?;
            let mut window = get("window").as_f64();
            if window <= 0.0 {
                window = nn as f64 / 2.0;
            }
            Ok(Built::Loop(twisted_fourier(nn, get_int("twist")?, window)?))
        }
        "random-smooth" => Ok(Built::Loop(random_smooth_loop(
            get_pos("dim")?,
            get_pos("modes")?,
            get("amplitude").as_f64(),
            seed,
        )?)),
        "pitchfork-twisted" => Ok(Built::Bifurcation(pitchfork_twisted(
            get_int("N")?,
            get_int("twist")?,
            get_pos("modes")?,
        )?)),
        "two-crossing" => Ok(Built::Bifurcation(pitchfork_twisted(get_int("N")?, 2, 1)?)),
        "quadratic-invertible" => Ok(Built::Bifurcation(quadratic_invertible(
            get_pos("dim")?,
            seed,
        )?)),
        "pitchfork-perturbed-torus" => Ok(Built::Bifurcation(pitchfork_perturbed_torus(
            get_int("N")?,
            get("epsilon").as_f64(),
            get_pos("grid")?,
        )?)),
        _ => Err(Error::UnknownScenario(key.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::validate_clutch;

    #[test]
    fn planted_crossings_respect_separation() {
        for seed in 0..20 {
            let (path, truth) = planted_crossings(8, 4, (-1.0, 1.0), seed).unwrap();
            assert_eq!(truth.instants.len(), 4);
            for w in truth.instants.windows(2) {
                assert!(w[1] - w[0] >= 0.16 - 1e-12);
            }
            for &c in &truth.instants {
                assert!(c > -0.71 && c < 0.71);
            }
            // the planted instants really are kernel instants
            for &c in &truth.instants {
                let e = eig_sym(&path.evaluate(c)).unwrap();
                assert!(e.min_abs_eigenvalue() < 1e-12);
            }
            // endpoints invertible
            for t in [-1.0, 1.0] {
                let e = eig_sym(&path.evaluate(t)).unwrap();
                assert!(e.min_abs_eigenvalue() > 0.05);
            }
        }
    }

    #[test]
    fn twisted_fourier_is_validly_clutched() {
        for &k in &[-2i64, -1, 1, 2, 3] {
            let lp = twisted_fourier(16, k, 8.0).unwrap();
            let report = validate_clutch(&lp).unwrap();
            assert!(report.pass, "twist {k}: defect {:.3e}", report.max_defect);
        }
    }

    #[test]
    fn twisted_fourier_rejects_edge_window() {
        assert!(twisted_fourier(8, 1, 7.5).is_err());
        assert!(twisted_fourier(8, 0, 4.0).is_err());
    }

    #[test]
    fn random_smooth_loop_closes_and_is_invertible() {
        for seed in 0..10 {
            let lp = random_smooth_loop(6, 3, 0.7, seed).unwrap();
            let a0 = lp.path.evaluate(0.0);
            let a1 = lp.path.evaluate(1.0);
            let diff = (a0.matrix() - a1.matrix()).map(f64::abs).max();
            assert!(diff < 1e-12, "seed {seed}: loop does not close ({diff:.3e})");
            let gap = eig_sym(&a0).unwrap().min_abs_eigenvalue();
            assert!(gap > 0.2, "seed {seed}: endpoint gap {gap}");
        }
    }

    #[test]
    fn rotation_frame_is_orthogonal_and_identity_at_start() {
        let frame = rotation_frame(5, (0.0, 2.0), 7);
        let at0 = frame(0.0);
        assert!((&at0 - DMatrix::identity(5, 5)).map(f64::abs).max() < 1e-14);
        for &t in &[0.3, 1.1, 2.0] {
            let f = frame(t);
            let defect = (f.transpose() * &f - DMatrix::identity(5, 5))
                .map(f64::abs)
                .max();
            assert!(defect < 1e-12);
        }
    }

    #[test]
    fn diag_linear_crossing_count() {
        let path = diag_linear(4, (-1.0, 1.0), -0.5, 0.5).unwrap();
        let e = eig_sym(&path.evaluate(-1.0)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l < 0.0));
        let e = eig_sym(&path.evaluate(1.0)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l > 0.0));
    }
}
