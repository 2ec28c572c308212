//! Factorization machinery for `H₁ = A†A`, `H₂ = AA†` with
//! `A = U d/dx + W(x, a)` and `A†ψ = -(Uψ)' + Wψ`.
//!
//! Potentials follow from the superpotential:
//! `V₁ = W² - (UW)'` and `V₂ = W² - (UW)' + 2UW' - UU''`. Shape invariance
//! `V₂(x, a₁) = V₁(x, a₂) + R(a₁)` makes the spectrum a running sum of `R`.

use std::cell::RefCell;
use std::sync::Arc;

use crate::error::{GsipError, Result};
use crate::grid::{Grid, GridFunction, MIN_NODES};
use crate::profiles::{Interval, MassProfile};
use crate::quadrature;

/// A parameter-dependent superpotential together with its shape-invariance
/// data: the parameter step `a₁ → a₂` and the remainder `R(a₁)`.
pub trait Superpotential: Send + Sync {
    fn profile(&self) -> &MassProfile;

    /// `W(x, a)`.
    fn w(&self, x: f64, a: f64) -> Result<f64>;

    /// `∂W/∂x`. Central differences unless overridden.
    fn w_prime(&self, x: f64, a: f64) -> Result<f64> {
        let h = 1e-5 * x.abs().max(1.0);
        Ok((self.w(x + h, a)? - self.w(x - h, a)?) / (2.0 * h))
    }

    /// `a₂ = F(a₁)`.
    fn step(&self, a: f64) -> f64;

    /// `R(a₁)`.
    fn remainder(&self, a: f64) -> f64;

    /// Open interval in `x` on which `W` is regular; defaults to the profile
    /// domain.
    fn domain(&self) -> Interval {
        self.profile().domain()
    }

    /// The same interval expressed in `Y`.
    fn y_interval(&self) -> Result<Interval> {
        self.profile().y_range()
    }

    /// Length scale in `Y` used to place the proxies for `x → ±∞`.
    fn characteristic_scale(&self, _a: f64) -> f64 {
        1.0
    }

    /// `ln ψ₀(x)` up to an additive constant, where `Aψ₀ = 0`, i.e.
    /// `ψ₀ = exp(-∫ W/U dx)`. Quadrature from the profile's reference point
    /// unless overridden with a closed form.
    fn log_ground_state(&self, x: f64, a: f64) -> Result<f64> {
        let profile = self.profile();
        let x_ref = profile.reference_point();
        let err = RefCell::new(None);
        let integral = quadrature::integrate(
            |t| match self.w(t, a) {
                Ok(w) => w / profile.u(t),
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            x_ref,
            x,
            1e-12,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(-integral?)
    }
}

type ParamFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SuperFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Superpotential given by closures; `W'` by central differences.
#[derive(Clone)]
pub struct CustomSuperpotential {
    profile: MassProfile,
    w: SuperFn,
    step: ParamFn,
    remainder: ParamFn,
}

impl CustomSuperpotential {
    pub fn new<W, S, R>(profile: MassProfile, w: W, step: S, remainder: R) -> Self
    where
        W: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CustomSuperpotential {
            profile,
            w: Arc::new(w),
            step: Arc::new(step),
            remainder: Arc::new(remainder),
        }
    }
}

impl Superpotential for CustomSuperpotential {
    fn profile(&self) -> &MassProfile {
        &self.profile
    }

    fn w(&self, x: f64, a: f64) -> Result<f64> {
        self.profile.check_domain(x)?;
        Ok((self.w)(x, a))
    }

    fn step(&self, a: f64) -> f64 {
        (self.step)(a)
    }

    fn remainder(&self, a: f64) -> f64 {
        (self.remainder)(a)
    }
}

fn check_point(sp: &dyn Superpotential, x: f64) -> Result<()> {
    let d = sp.domain();
    if d.contains(x) {
        Ok(())
    } else {
        Err(GsipError::Domain {
            x,
            lo: d.lo,
            hi: d.hi,
        })
    }
}

/// `V₁ = W² - (UW)'`.
pub fn v1_from_w(sp: &dyn Superpotential, a: f64, x: f64) -> Result<f64> {
    check_point(sp, x)?;
    let p = sp.profile();
    let w = sp.w(x, a)?;
    let wp = sp.w_prime(x, a)?;
    Ok(w * w - (p.u_prime(x) * w + p.u(x) * wp))
}

/// `V₂ = W² - (UW)' + 2UW' - UU''`.
pub fn v2_from_w(sp: &dyn Superpotential, a: f64, x: f64) -> Result<f64> {
    check_point(sp, x)?;
    let p = sp.profile();
    let w = sp.w(x, a)?;
    let wp = sp.w_prime(x, a)?;
    let u = p.u(x);
    Ok(w * w - p.u_prime(x) * w + u * wp - u * p.u_double_prime(x))
}

/// `max_x |V₂(x, a₁) - V₁(x, a₂) - R(a₁)|` over the grid nodes.
pub fn shape_invariance_residual(sp: &dyn Superpotential, a1: f64, grid: &Grid) -> Result<f64> {
    let a2 = sp.step(a1);
    let r = sp.remainder(a1);
    grid.nodes().try_fold(0.0f64, |worst, x| {
        let d = v2_from_w(sp, a1, x)? - v1_from_w(sp, a2, x)? - r;
        Ok(worst.max(d.abs()))
    })
}

/// The parameter chain `a₁, a₂, …, a_{len}`.
pub fn parameter_chain(sp: &dyn Superpotential, a1: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut a = a1;
    for _ in 0..len {
        out.push(a);
        a = sp.step(a);
    }
    out
}

/// `Eₙ = Σ_{i=1..n} R(aᵢ)` along the parameter chain.
pub fn spectrum_accumulate(sp: &dyn Superpotential, a1: f64, n: usize) -> Result<f64> {
    let mut energy = 0.0;
    for (i, a) in parameter_chain(sp, a1, n).into_iter().enumerate() {
        let r = sp.remainder(a);
        if r < 0.0 {
            return Err(GsipError::UnboundLevel {
                level: n,
                reason: format!("R(a_{}) = {r} < 0 at a = {a}", i + 1),
            });
        }
        energy += r;
    }
    Ok(energy)
}

/// Fourth-order first derivative on the interior nodes: five-point central
/// stencil inside, one-sided five-point stencils on the two outermost nodes
/// at each end.
pub fn derivative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < MIN_NODES {
        return Err(GsipError::Grid(format!(
            "derivative stencil needs {MIN_NODES} nodes, got {n}"
        )));
    }
    let f = values;
    let s = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
    }
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * s;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
        + 3.0 * f[n - 5])
        * s;
    Ok(d)
}

fn sample_uw(sp: &dyn Superpotential, a: f64, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = sp.profile();
    let u = grid.nodes().map(|x| p.u(x)).collect();
    let w = grid
        .nodes()
        .map(|x| sp.w(x, a))
        .collect::<Result<Vec<_>>>()?;
    Ok((u, w))
}

/// `(Aψ)(x) = U ψ' + W ψ`.
pub fn apply_a(sp: &dyn Superpotential, a: f64, psi: &GridFunction) -> Result<GridFunction> {
    let grid = *psi.grid();
    let dpsi = derivative(psi.values(), grid.spacing())?;
    let (u, w) = sample_uw(sp, a, &grid)?;
    let values = (0..grid.len())
        .map(|i| u[i] * dpsi[i] + w[i] * psi.values()[i])
        .collect();
    GridFunction::new(grid, values)
}

/// `(A†ψ)(x) = -(Uψ)' + W ψ`.
pub fn apply_a_dagger(sp: &dyn Superpotential, a: f64, psi: &GridFunction) -> Result<GridFunction> {
    let grid = *psi.grid();
    if grid.len() < MIN_NODES {
        return Err(GsipError::Grid(format!(
            "derivative stencil needs {MIN_NODES} nodes, got {}",
            grid.len()
        )));
    }
    let (u, w) = sample_uw(sp, a, &grid)?;
    let u_psi: Vec<f64> = u.iter().zip(psi.values()).map(|(u, p)| u * p).collect();
    let d = derivative(&u_psi, grid.spacing())?;
    let values = (0..grid.len())
        .map(|i| -d[i] + w[i] * psi.values()[i])
        .collect();
    GridFunction::new(grid, values)
}

/// `ψ₀(x; a)` sampled on the grid, scaled so its largest entry is 1.
pub fn ground_state_samples(sp: &dyn Superpotential, a: f64, grid: &Grid) -> Result<GridFunction> {
    let logs = grid
        .nodes()
        .map(|x| sp.log_ground_state(x, a))
        .collect::<Result<Vec<_>>>()?;
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(GsipError::numerics(
            "ground state has no finite samples on grid",
        ));
    }
    GridFunction::new(*grid, logs.into_iter().map(|l| (l - peak).exp()).collect())
}

/// `ψₙ ∝ A†(a₁) A†(a₂) ⋯ A†(aₙ) ψ₀(a_{n+1})`, normalized on the grid.
pub fn ladder_excited_state(
    sp: &dyn Superpotential,
    a1: f64,
    n: usize,
    grid: &Grid,
) -> Result<GridFunction> {
    spectrum_accumulate(sp, a1, n)?;
    let chain = parameter_chain(sp, a1, n + 1);
    let mut psi = ground_state_samples(sp, chain[n], grid)?;
    for &a in chain[..n].iter().rev() {
        psi = apply_a_dagger(sp, a, &psi)?.normalized();
    }
    Ok(psi.normalized())
}

/// Outcome of the asymptotic sign test on `W/U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizability {
    pub normalizable: bool,
    /// `W/U` at the proxy for the lower end of the domain.
    pub lower: f64,
    /// `W/U` at the proxy for the upper end of the domain.
    pub upper: f64,
    pub x_lower: f64,
    pub x_upper: f64,
}

/// Threshold below which `|W/U|` at an edge proxy counts as sign-less.
pub const SIGN_TOLERANCE: f64 = 1e-10;

/// Square integrability of `ψ₀ = exp(-∫ W/U)`: the exponent must grow
/// without bound at both ends, which holds when `W/U` is negative at the
/// lower end and positive at the upper end.
///
/// Finite ends of the `Y` interval (poles of the superpotential, `Y = 0`
/// walls) are probed just inside. Infinite ends are probed at
/// `|Y| = 10 s, 40 s, 160 s, …` for the characteristic scale `s`, and the
/// outermost finite sample is taken as the limit.
pub fn check_normalizability(sp: &dyn Superpotential, a: f64) -> Result<Normalizability> {
    let profile = sp.profile();
    let yi = sp.y_interval()?;
    let scale = sp.characteristic_scale(a).abs().max(f64::MIN_POSITIVE);
    let ratio = |y: f64| -> Option<(f64, f64)> {
        let x = profile.y_inverse(y).ok()?;
        let w = sp.w(x, a).ok()?;
        let r = w / profile.u(x);
        (x.is_finite() && r.is_finite()).then_some((x, r))
    };
    let edge = |y_edge: f64, inward: f64| -> Result<(f64, f64)> {
        if y_edge.is_finite() {
            let y = y_edge + inward * 1e-6 * scale;
            return ratio(y).ok_or_else(|| {
                GsipError::numerics(format!("W/U undefined next to the edge Y = {y_edge}"))
            });
        }
        let base = y_edge.signum() * 10.0 * scale;
        (0..8)
            .filter_map(|k| ratio(base * 4f64.powi(k)))
            .next_back()
            .ok_or_else(|| GsipError::numerics("W/U undefined at every asymptotic probe"))
    };
    let (xa, ra) = edge(yi.lo, 1.0)?;
    let (xb, rb) = edge(yi.hi, -1.0)?;
    let ((x_lower, lower), (x_upper, upper)) = if xa < xb {
        ((xa, ra), (xb, rb))
    } else {
        ((xb, rb), (xa, ra))
    };
    if lower.abs() < SIGN_TOLERANCE || upper.abs() < SIGN_TOLERANCE {
        return Err(GsipError::Indeterminate { lower, upper });
    }
    Ok(Normalizability {
        normalizable: lower < 0.0 && upper > 0.0,
        lower,
        upper,
        x_lower,
        x_upper,
    })
}
