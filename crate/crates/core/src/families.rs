//! Closed forms for the six shape-invariant families.
//!
//! Every family has a superpotential of the form `W = U'/2 + w(Y, a)` where
//! `w` depends on `x` only through `Y(x)`. Then
//! `V₁ = w² - ∂w/∂Y + V₀` and `V₂ = w² + ∂w/∂Y + V₀`, so shape invariance
//! reduces to the constant-mass condition on `w` and holds for any profile.
//!
//! | family          | `w(Y, a)`                      | `a₂`    | `R(a₁)`        |
//! |-----------------|--------------------------------|---------|----------------|
//! | `OscShift`      | `R₀Y/2 + a`                    | `a`     | `R₀`           |
//! | `Exponential`   | `a - u₀e^{-αY}/2`              | `a - α` | `α(2a₁ - α)`   |
//! | `OscLinearG`    | `aY`                           | `a`     | `2a₁`          |
//! | `OscInverseG`   | `C₁Y/4 + a/(αY)`               | `a - α` | `C₁`           |
//! | `Trigonometric` | `-a tan(αY) + b sec(αY)`       | `a - α` | `α(α - 2a₁)`   |
//! | `Hyperbolic`    | `a tanh(αY) + b sech(αY)`      | `a - α` | `α(2a₁ - α)`   |

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GsipError, Result};
use crate::grid::{Grid, GridFunction};
use crate::profiles::{Interval, MassProfile};
use crate::susy::{self, Superpotential};

/// Distance (in `αY`) kept from the `sec`/`tan` poles when boxing the
/// trigonometric family.
pub const TRIG_WALL_MARGIN: f64 = 1e-3;

/// Proximity to a pole of the superpotential that is reported as an error.
pub const POLE_TOLERANCE: f64 = 1e-12;

const SPECTRUM_PROBE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    OscShift,
    Exponential,
    OscLinearG,
    OscInverseG,
    Trigonometric,
    Hyperbolic,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::OscShift,
        FamilyKind::Exponential,
        FamilyKind::OscLinearG,
        FamilyKind::OscInverseG,
        FamilyKind::Trigonometric,
        FamilyKind::Hyperbolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::OscShift => "OscShift",
            FamilyKind::Exponential => "Exponential",
            FamilyKind::OscLinearG => "OscLinearG",
            FamilyKind::OscInverseG => "OscInverseG",
            FamilyKind::Trigonometric => "Trigonometric",
            FamilyKind::Hyperbolic => "Hyperbolic",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = GsipError;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GsipError::parameter("family", format!("unknown family `{s}`")))
    }
}

/// Family-specific constants in the standardized parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    OscShift { r0: f64 },
    Exponential { alpha: f64, u0: f64 },
    OscLinearG,
    OscInverseG { alpha: f64, c1: f64 },
    Trigonometric { alpha: f64, b: f64 },
    Hyperbolic { alpha: f64, b: f64 },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::OscShift { .. } => FamilyKind::OscShift,
            Family::Exponential { .. } => FamilyKind::Exponential,
            Family::OscLinearG => FamilyKind::OscLinearG,
            Family::OscInverseG { .. } => FamilyKind::OscInverseG,
            Family::Trigonometric { .. } => FamilyKind::Trigonometric,
            Family::Hyperbolic { .. } => FamilyKind::Hyperbolic,
        }
    }

    /// The parameter decrement `α`; zero for the equi-spaced `α = 0` families.
    pub fn alpha(&self) -> f64 {
        match *self {
            Family::OscShift { .. } | Family::OscLinearG => 0.0,
            Family::Exponential { alpha, .. }
            | Family::OscInverseG { alpha, .. }
            | Family::Trigonometric { alpha, .. }
            | Family::Hyperbolic { alpha, .. } => alpha,
        }
    }

    /// Named family constants, in a fixed order.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Family::OscShift { r0 } => vec![("r0", r0)],
            Family::Exponential { alpha, u0 } => vec![("alpha", alpha), ("u0", u0)],
            Family::OscLinearG => vec![],
            Family::OscInverseG { alpha, c1 } => vec![("alpha", alpha), ("c1", c1)],
            Family::Trigonometric { alpha, b } | Family::Hyperbolic { alpha, b } => {
                vec![("alpha", alpha), ("b", b)]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(GsipError::parameter(field, "must be finite"))
            }
        };
        let nonzero_alpha = |alpha: f64| {
            finite("alpha", alpha)?;
            if alpha == 0.0 {
                return Err(GsipError::parameter(
                    "alpha",
                    "must be non-zero for this family (use OscShift/OscLinearG for α = 0)",
                ));
            }
            Ok(())
        };
        match *self {
            Family::OscShift { r0 } => {
                finite("r0", r0)?;
                if r0 <= 0.0 {
                    return Err(GsipError::parameter("r0", "must be positive"));
                }
            }
            Family::Exponential { alpha, u0 } => {
                nonzero_alpha(alpha)?;
                finite("u0", u0)?;
            }
            Family::OscLinearG => {}
            Family::OscInverseG { alpha, c1 } => {
                nonzero_alpha(alpha)?;
                finite("c1", c1)?;
            }
            Family::Trigonometric { alpha, b } | Family::Hyperbolic { alpha, b } => {
                nonzero_alpha(alpha)?;
                finite("b", b)?;
            }
        }
        Ok(())
    }
}

/// A family, its shape parameter `a` (= `a₁`) and the mass profile.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    family: Family,
    a: f64,
    profile: MassProfile,
    y_interval: Interval,
    domain: Interval,
}

impl FamilySpec {
    pub fn new(family: Family, a: f64, profile: MassProfile) -> Result<Self> {
        family.validate()?;
        if !a.is_finite() {
            return Err(GsipError::parameter("a", "must be finite"));
        }
        let y_range = profile.y_range()?;
        let restriction = match family {
            Family::OscInverseG { .. } => Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            Family::Trigonometric { alpha, .. } => {
                let edge = FRAC_PI_2 / alpha.abs();
                Interval {
                    lo: -edge,
                    hi: edge,
                }
            }
            _ => Interval::REAL_LINE,
        };
        let y_interval = y_range.intersect(&restriction).ok_or_else(|| {
            GsipError::parameter(
                "profile",
                format!(
                    "Y range ({}, {}) does not meet the {} domain",
                    y_range.lo,
                    y_range.hi,
                    family.kind()
                ),
            )
        })?;
        let domain = x_interval(&profile, y_interval)?;
        Ok(FamilySpec {
            family,
            a,
            profile,
            y_interval,
            domain,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn profile(&self) -> &MassProfile {
        &self.profile
    }

    /// The same family and profile at another shape parameter.
    pub fn with_a(&self, a: f64) -> FamilySpec {
        FamilySpec { a, ..self.clone() }
    }

    /// `Y` interval used for numerical boxes: the family interval with the
    /// trigonometric poles pulled in by [`TRIG_WALL_MARGIN`].
    pub fn working_y_interval(&self) -> Interval {
        match self.family {
            Family::Trigonometric { alpha, .. } => {
                let edge = (FRAC_PI_2 - TRIG_WALL_MARGIN) / alpha.abs();
                Interval {
                    lo: self.y_interval.lo.max(-edge),
                    hi: self.y_interval.hi.min(edge),
                }
            }
            _ => self.y_interval,
        }
    }

    pub fn working_interval(&self) -> Result<Interval> {
        x_interval(&self.profile, self.working_y_interval())
    }

    /// Whether the bound spectrum terminates (finitely many levels).
    pub fn has_finite_spectrum(&self) -> bool {
        self.bound_level_count(SPECTRUM_PROBE_LIMIT) < SPECTRUM_PROBE_LIMIT
    }

    /// Maps `Y` back to `x`, sending the ends of the profile's `Y` range to
    /// the ends of its domain.
    pub fn x_of_y(&self, y: f64) -> Result<f64> {
        map_y_to_x(&self.profile, y)
    }

    fn y_at(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(GsipError::Domain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        self.profile.y(x)
    }

    /// `(w, ∂w/∂Y)` at `Y = y`.
    fn reduced(&self, x: f64, y: f64, a: f64) -> Result<(f64, f64)> {
        Ok(match self.family {
            Family::OscShift { r0 } => (0.5 * r0 * y + a, 0.5 * r0),
            Family::Exponential { alpha, u0 } => {
                let e = u0 * (-alpha * y).exp();
                (a - 0.5 * e, 0.5 * alpha * e)
            }
            Family::OscLinearG => (a * y, a),
            Family::OscInverseG { alpha, c1 } => {
                if y.abs() < POLE_TOLERANCE {
                    return Err(GsipError::Pole { x });
                }
                let beta = a / alpha;
                (0.25 * c1 * y + beta / y, 0.25 * c1 - beta / (y * y))
            }
            Family::Trigonometric { alpha, b } => {
                let (s, c) = (alpha * y).sin_cos();
                if c.abs() < POLE_TOLERANCE {
                    return Err(GsipError::Pole { x });
                }
                let (t, sec) = (s / c, 1.0 / c);
                (-a * t + b * sec, alpha * sec * (b * t - a * sec))
            }
            Family::Hyperbolic { alpha, b } => {
                let u = alpha * y;
                let (t, sech) = (u.tanh(), 1.0 / u.cosh());
                (a * t + b * sech, alpha * sech * (a * sech - b * t))
            }
        })
    }

    /// `W(x, a)` at this spec's `a`.
    pub fn superpotential_of(&self, x: f64) -> Result<f64> {
        self.w(x, self.a)
    }

    /// `V₁(x, a)` from the closed form of the family table.
    pub fn potential_of(&self, x: f64) -> Result<f64> {
        let y = self.y_at(x)?;
        let v0 = self.profile.v0_unchecked(x);
        let a = self.a;
        let v = match self.family {
            Family::OscShift { r0 } => {
                let q = r0 * y + 2.0 * a;
                0.25 * (q * q - 2.0 * r0)
            }
            Family::Exponential { alpha, u0 } => {
                let e = u0 * (-alpha * y).exp();
                let q = e - 2.0 * a;
                0.25 * (q * q - 2.0 * alpha * e)
            }
            Family::OscLinearG => a * a * y * y - a,
            Family::OscInverseG { alpha, c1 } => {
                if y.abs() < POLE_TOLERANCE {
                    return Err(GsipError::Pole { x });
                }
                let beta = a / alpha;
                c1 * c1 * y * y / 16.0 + (beta * beta + beta) / (y * y) + 0.5 * c1 * (beta - 0.5)
            }
            Family::Trigonometric { alpha, b } => {
                let (s, c) = (alpha * y).sin_cos();
                if c.abs() < POLE_TOLERANCE {
                    return Err(GsipError::Pole { x });
                }
                let (t, sec) = (s / c, 1.0 / c);
                let q = a * t - b * sec;
                q * q - alpha * sec * (b * t - a * sec)
            }
            Family::Hyperbolic { alpha, b } => {
                let u = alpha * y;
                let (t, sech) = (u.tanh(), 1.0 / u.cosh());
                let q = a * t + b * sech;
                q * q + alpha * sech * (b * t - a * sech)
            }
        };
        Ok(v + v0)
    }

    /// `V₂(x, a) = V₁(x, a₂) + R(a)` evaluated through the superpotential.
    pub fn partner_potential_of(&self, x: f64) -> Result<f64> {
        susy::v2_from_w(self, self.a, x)
    }

    /// `a₂` for this spec.
    pub fn param_step_of(&self) -> f64 {
        self.step(self.a)
    }

    /// Closed-form `Eₙ`. Levels are bound while `Eₙ` strictly increases.
    pub fn spectrum_of(&self, n: usize) -> Result<f64> {
        let energy = |m: usize| self.closed_form_energy(m);
        for m in 1..=n {
            let (prev, cur) = (energy(m - 1), energy(m));
            if cur <= prev {
                return Err(GsipError::UnboundLevel {
                    level: n,
                    reason: format!("E_{m} = {cur} does not exceed E_{} = {prev}", m - 1),
                });
            }
        }
        Ok(energy(n))
    }

    fn closed_form_energy(&self, n: usize) -> f64 {
        let n = n as f64;
        let a = self.a;
        match self.family {
            Family::OscShift { r0 } => n * r0,
            Family::Exponential { alpha, .. } | Family::Hyperbolic { alpha, .. } => {
                alpha * n * (2.0 * a - alpha * n)
            }
            Family::OscLinearG => 2.0 * a * n,
            Family::OscInverseG { c1, .. } => c1 * n,
            Family::Trigonometric { alpha, .. } => n * alpha * (n * alpha - 2.0 * a),
        }
    }

    /// Number of bound levels, capped at `limit`.
    pub fn bound_level_count(&self, limit: usize) -> usize {
        (0..limit)
            .take_while(|&n| self.spectrum_of(n).is_ok())
            .count()
    }

    /// `ψ₀(x)` (unnormalized), the zero mode of `A`.
    pub fn ground_state_of(&self, x: f64) -> Result<f64> {
        self.require_normalizable()?;
        Ok(self.log_ground_state(x, self.a)?.exp())
    }

    /// `ψ₀` on the grid, unit-normalized.
    pub fn ground_state_on(&self, grid: &Grid) -> Result<GridFunction> {
        self.require_normalizable()?;
        Ok(susy::ground_state_samples(self, self.a, grid)?.normalized())
    }

    pub fn check_normalizability(&self) -> Result<susy::Normalizability> {
        susy::check_normalizability(self, self.a)
    }

    fn require_normalizable(&self) -> Result<()> {
        let check = self.check_normalizability()?;
        if check.normalizable {
            Ok(())
        } else {
            Err(GsipError::Normalizability(format!(
                "{} with a = {}: W/U = {:e} at x = {:e}, {:e} at x = {:e} (need -, +)",
                self.kind(),
                self.a,
                check.lower,
                check.x_lower,
                check.upper,
                check.x_upper
            )))
        }
    }
}

impl Superpotential for FamilySpec {
    fn profile(&self) -> &MassProfile {
        &self.profile
    }

    fn w(&self, x: f64, a: f64) -> Result<f64> {
        let y = self.y_at(x)?;
        let (w, _) = self.reduced(x, y, a)?;
        Ok(0.5 * self.profile.u_prime(x) + w)
    }

    fn w_prime(&self, x: f64, a: f64) -> Result<f64> {
        let y = self.y_at(x)?;
        let (_, wy) = self.reduced(x, y, a)?;
        Ok(0.5 * self.profile.u_double_prime(x) + wy / self.profile.u(x))
    }

    fn step(&self, a: f64) -> f64 {
        a - self.family.alpha()
    }

    fn remainder(&self, a: f64) -> f64 {
        match self.family {
            Family::OscShift { r0 } => r0,
            Family::Exponential { alpha, .. } | Family::Hyperbolic { alpha, .. } => {
                alpha * (2.0 * a - alpha)
            }
            Family::OscLinearG => 2.0 * a,
            Family::OscInverseG { c1, .. } => c1,
            Family::Trigonometric { alpha, .. } => alpha * (alpha - 2.0 * a),
        }
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn y_interval(&self) -> Result<Interval> {
        Ok(self.y_interval)
    }

    fn characteristic_scale(&self, a: f64) -> f64 {
        match self.family {
            Family::OscShift { r0 } => 1.0 / r0.sqrt(),
            Family::OscLinearG => {
                if a == 0.0 {
                    1.0
                } else {
                    1.0 / a.abs().sqrt()
                }
            }
            Family::OscInverseG { c1, .. } => {
                if c1 == 0.0 {
                    1.0
                } else {
                    2.0 / c1.abs().sqrt()
                }
            }
            Family::Exponential { alpha, .. }
            | Family::Trigonometric { alpha, .. }
            | Family::Hyperbolic { alpha, .. } => 1.0 / alpha.abs(),
        }
    }

    fn log_ground_state(&self, x: f64, a: f64) -> Result<f64> {
        let y = self.y_at(x)?;
        let prefactor = -0.5 * self.profile.u(x).abs().ln();
        let exponent = match self.family {
            Family::OscShift { r0 } => -0.25 * r0 * y * y - a * y,
            Family::Exponential { alpha, u0 } => -u0 * (-alpha * y).exp() / (2.0 * alpha) - a * y,
            Family::OscLinearG => -0.5 * a * y * y,
            Family::OscInverseG { alpha, c1 } => {
                if y.abs() < POLE_TOLERANCE {
                    return Err(GsipError::Pole { x });
                }
                -(a / alpha) * y.abs().ln() - c1 * y * y / 8.0
            }
            Family::Trigonometric { alpha, b } => {
                let theta = alpha * y;
                let c = theta.cos();
                if c.abs() < POLE_TOLERANCE {
                    return Err(GsipError::Pole { x });
                }
                // |tan θ + sec θ| = (1 + sin θ)/|cos θ| = 2 sin²(θ/2 + π/4)/|cos θ|
                let log_sec = -c.abs().ln();
                let s = (0.5 * theta + FRAC_PI_4).sin();
                let log_tan_sec = (2.0 * s * s).ln() + log_sec;
                (a / alpha) * log_sec - (b / alpha) * log_tan_sec
            }
            Family::Hyperbolic { alpha, b } => {
                let u = alpha * y;
                -(a / alpha) * log_cosh(u) - (b / alpha) * u.sinh().atan()
            }
        };
        Ok(prefactor + exponent)
    }
}

fn log_cosh(u: f64) -> f64 {
    let v = u.abs();
    v + (-2.0 * v).exp().ln_1p() - std::f64::consts::LN_2
}

fn map_y_to_x(profile: &MassProfile, y: f64) -> Result<f64> {
    let range = profile.y_range()?;
    let domain = profile.domain();
    let increasing = profile.u(profile.reference_point()) > 0.0;
    if y == range.lo {
        Ok(if increasing { domain.lo } else { domain.hi })
    } else if y == range.hi {
        Ok(if increasing { domain.hi } else { domain.lo })
    } else {
        profile.y_inverse(y)
    }
}

/// Maps an open `Y` interval back to `x`.
fn x_interval(profile: &MassProfile, y: Interval) -> Result<Interval> {
    let (xa, xb) = (map_y_to_x(profile, y.lo)?, map_y_to_x(profile, y.hi)?);
    Interval::new(xa.min(xb), xa.max(xb))
}
