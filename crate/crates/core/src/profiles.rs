//! Mass profiles: the kinetic prefactor `U(x)` with `1/(2m) = U²`, its
//! derivatives, the coordinate map `Y(x) = ∫ dx/U` and the mass-induced
//! offset `V₀ = -U'²/4 - U U''/2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{GsipError, Result};
use crate::quadrature;

/// Relative tolerance used whenever `Y` is obtained by quadrature.
pub const Y_QUADRATURE_TOL: f64 = 1e-12;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(GsipError::parameter(
                "domain",
                format!("expected lo < hi, got ({lo}, {hi})"),
            ));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The built-in profile shapes plus a user-supplied closure.
#[derive(Clone)]
pub enum ProfileKind {
    /// `U = u0`, constant mass `m = 1/(2 u0²)`.
    Constant { u0: f64 },
    /// `U = c/x` on the half-line; `c = 1/2` gives `m = 2x²`.
    InverseLinear { c: f64 },
    /// `U = 1/cosh x`, `m = cosh²x / 2`.
    Sech,
    /// `U = s x` on the half-line.
    Linear { s: f64 },
    /// Arbitrary `U`; derivatives by central differences, `Y` by quadrature.
    Custom { u: ProfileFn },
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Constant { u0 } => f.debug_struct("Constant").field("u0", u0).finish(),
            ProfileKind::InverseLinear { c } => {
                f.debug_struct("InverseLinear").field("c", c).finish()
            }
            ProfileKind::Sech => f.write_str("Sech"),
            ProfileKind::Linear { s } => f.debug_struct("Linear").field("s", s).finish(),
            ProfileKind::Custom { .. } => f.write_str("Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MassProfile {
    kind: ProfileKind,
    domain: Interval,
}

impl MassProfile {
    pub fn constant(u0: f64) -> Result<Self> {
        if !u0.is_finite() || u0 == 0.0 {
            return Err(GsipError::parameter("u0", "must be finite and non-zero"));
        }
        Ok(MassProfile {
            kind: ProfileKind::Constant { u0 },
            domain: Interval::REAL_LINE,
        })
    }

    /// Unit-mass profile `U = 1/√2`.
    pub fn unit_mass() -> Self {
        Self::constant(std::f64::consts::FRAC_1_SQRT_2).expect("non-zero constant")
    }

    pub fn inverse_linear(c: f64) -> Result<Self> {
        if !c.is_finite() || c == 0.0 {
            return Err(GsipError::parameter("c", "must be finite and non-zero"));
        }
        Ok(MassProfile {
            kind: ProfileKind::InverseLinear { c },
            domain: Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
        })
    }

    pub fn sech() -> Self {
        MassProfile {
            kind: ProfileKind::Sech,
            domain: Interval::REAL_LINE,
        }
    }

    pub fn linear(s: f64) -> Result<Self> {
        if !s.is_finite() || s == 0.0 {
            return Err(GsipError::parameter("s", "must be finite and non-zero"));
        }
        Ok(MassProfile {
            kind: ProfileKind::Linear { s },
            domain: Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
        })
    }

    /// A profile given only by its values. The caller guarantees `U ≠ 0`
    /// on `domain`.
    pub fn custom<F>(u: F, domain: Interval) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MassProfile {
            kind: ProfileKind::Custom { u: Arc::new(u) },
            domain,
        }
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Config-file name of the profile kind.
    pub fn name(&self) -> &'static str {
        match self.kind {
            ProfileKind::Constant { .. } => "constant",
            ProfileKind::InverseLinear { .. } => "inverse-linear",
            ProfileKind::Sech => "sech-mass",
            ProfileKind::Linear { .. } => "linear",
            ProfileKind::Custom { .. } => "custom",
        }
    }

    pub fn has_analytic_y(&self) -> bool {
        !matches!(self.kind, ProfileKind::Custom { .. })
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(GsipError::Domain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    /// `U(x)`, unchecked.
    pub fn u(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { u0 } => *u0,
            ProfileKind::InverseLinear { c } => c / x,
            ProfileKind::Sech => 1.0 / x.cosh(),
            ProfileKind::Linear { s } => s * x,
            ProfileKind::Custom { u } => u(x),
        }
    }

    pub fn u_prime(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { .. } => 0.0,
            ProfileKind::InverseLinear { c } => -c / (x * x),
            ProfileKind::Sech => -x.tanh() / x.cosh(),
            ProfileKind::Linear { s } => *s,
            ProfileKind::Custom { u } => {
                let h = derivative_step(x);
                (u(x + h) - u(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn u_double_prime(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { .. } | ProfileKind::Linear { .. } => 0.0,
            ProfileKind::InverseLinear { c } => 2.0 * c / (x * x * x),
            ProfileKind::Sech => {
                let t = x.tanh();
                let s = 1.0 / x.cosh();
                s * (t * t - s * s)
            }
            ProfileKind::Custom { u } => {
                let h = second_derivative_step(x);
                (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h)
            }
        }
    }

    /// `m(x) = 1/(2U²)`.
    pub fn mass(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let u = self.u(x);
        Ok(1.0 / (2.0 * u * u))
    }

    /// `V₀(x) = -U'²/4 - U U''/2`.
    pub fn v0(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.v0_unchecked(x))
    }

    pub(crate) fn v0_unchecked(&self, x: f64) -> f64 {
        let up = self.u_prime(x);
        -0.25 * up * up - 0.5 * self.u(x) * self.u_double_prime(x)
    }

    /// Point where the quadrature route for `Y` starts: 0 when inside the
    /// domain, otherwise the midpoint of a finite domain or one unit in from
    /// the finite end of a half-line.
    pub fn reference_point(&self) -> f64 {
        let Interval { lo, hi } = self.domain;
        if self.domain.contains(0.0) {
            0.0
        } else if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo + 1.0
        } else {
            hi - 1.0
        }
    }

    fn y_analytic(&self, x: f64) -> Option<f64> {
        match &self.kind {
            ProfileKind::Constant { u0 } => Some(x / u0),
            ProfileKind::InverseLinear { c } => Some(x * x / (2.0 * c)),
            ProfileKind::Sech => Some(x.sinh()),
            ProfileKind::Linear { s } => Some(x.ln() / s),
            ProfileKind::Custom { .. } => None,
        }
    }

    /// `Y(x) = ∫ dx/U`, closed form where available.
    pub fn y(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        match self.y_analytic(x) {
            Some(y) => Ok(y),
            None => self.y_quadrature(x),
        }
    }

    /// `Y(x)` by adaptive quadrature from the reference point. The value at
    /// the reference point is taken from the closed form when one exists so
    /// both routes share the same additive constant.
    pub fn y_quadrature(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let x_ref = self.reference_point();
        let anchor = self.y_analytic(x_ref).unwrap_or(0.0);
        let integral = quadrature::integrate(|t| 1.0 / self.u(t), x_ref, x, Y_QUADRATURE_TOL)?;
        Ok(anchor + integral)
    }

    /// Image of the domain under `Y`, ordered so that `lo < hi`.
    pub fn y_range(&self) -> Result<Interval> {
        let Interval { lo, hi } = self.domain;
        let (y_lo, y_hi) = match &self.kind {
            ProfileKind::Constant { u0 } => (lo / u0, hi / u0),
            ProfileKind::InverseLinear { c } => (0.0, hi * hi / (2.0 * c)),
            ProfileKind::Sech => (f64::NEG_INFINITY, f64::INFINITY),
            ProfileKind::Linear { s } => (f64::NEG_INFINITY / s, f64::INFINITY / s),
            ProfileKind::Custom { .. } => {
                let span = custom_y_bound(self, lo)?;
                let span_hi = custom_y_bound(self, hi)?;
                (span, span_hi)
            }
        };
        Interval::new(y_lo.min(y_hi), y_lo.max(y_hi))
    }

    /// Inverts `Y`: returns the `x` in the domain with `Y(x) = y`.
    pub fn y_inverse(&self, y: f64) -> Result<f64> {
        let range = self.y_range()?;
        if !range.contains(y) {
            return Err(GsipError::Domain {
                x: y,
                lo: range.lo,
                hi: range.hi,
            });
        }
        match &self.kind {
            ProfileKind::Constant { u0 } => Ok(y * u0),
            ProfileKind::InverseLinear { c } => Ok((2.0 * c * y).sqrt()),
            ProfileKind::Sech => Ok(y.asinh()),
            ProfileKind::Linear { s } => Ok((s * y).exp()),
            ProfileKind::Custom { .. } => self.y_inverse_bisect(y),
        }
    }

    fn y_inverse_bisect(&self, y: f64) -> Result<f64> {
        let x_ref = self.reference_point();
        let increasing = self.u(x_ref) > 0.0;
        let target = |x: f64| -> Result<f64> {
            let v = self.y(x)? - y;
            Ok(if increasing { v } else { -v })
        };
        let f_ref = target(x_ref)?;
        if f_ref == 0.0 {
            return Ok(x_ref);
        }
        let dir = if f_ref < 0.0 { 1.0 } else { -1.0 };
        let edge = if dir > 0.0 {
            self.domain.hi
        } else {
            self.domain.lo
        };
        let mut inner = x_ref;
        let mut step = 1.0;
        let mut outer = None;
        for _ in 0..400 {
            let mut cand = x_ref + dir * step;
            if !self.domain.contains(cand) {
                cand = 0.5 * (inner + edge);
            }
            if target(cand)?.signum() != f_ref.signum() {
                outer = Some(cand);
                break;
            }
            inner = cand;
            step *= 2.0;
        }
        let outer =
            outer.ok_or_else(|| GsipError::numerics(format!("could not bracket Y⁻¹({y})")))?;
        let (mut lo, mut hi) = if inner < outer {
            (inner, outer)
        } else {
            (outer, inner)
        };
        let f_lo_negative = target(lo)? < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (target(mid)? < 0.0) == f_lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn derivative_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

fn second_derivative_step(x: f64) -> f64 {
    1e-4 * x.abs().max(1.0)
}

fn custom_y_bound(profile: &MassProfile, edge: f64) -> Result<f64> {
    if edge.is_infinite() {
        // Y is monotone; for an infinite edge assume it is unbounded in the
        // direction fixed by the sign of U.
        let s = profile.u(profile.reference_point()).signum();
        Ok(edge.signum() * s * f64::INFINITY)
    } else {
        let inward = if edge == profile.domain.lo {
            1e-9
        } else {
            -1e-9
        };
        profile.y_quadrature(edge + inward * edge.abs().max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn mass_examples() {
        let inv = MassProfile::inverse_linear(0.5).unwrap();
        assert!((inv.mass(1.0).unwrap() - 2.0).abs() < 1e-15);
        let sech = MassProfile::sech();
        assert!((sech.mass(0.0).unwrap() - 0.5).abs() < 1e-15);
        let c = MassProfile::constant(FRAC_1_SQRT_2).unwrap();
        assert!((c.mass(-3.7).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mass_outside_domain_is_rejected() {
        let inv = MassProfile::inverse_linear(0.5).unwrap();
        assert!(matches!(inv.mass(-1.0), Err(GsipError::Domain { .. })));
        assert!(matches!(inv.mass(0.0), Err(GsipError::Domain { .. })));
    }

    #[test]
    fn y_examples() {
        let inv = MassProfile::inverse_linear(0.5).unwrap();
        assert!((inv.y(2.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(MassProfile::sech().y(0.0).unwrap(), 0.0);
        let c = MassProfile::constant(FRAC_1_SQRT_2).unwrap();
        assert!((c.y(1.0).unwrap() - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn v0_examples() {
        let c = MassProfile::constant(0.3).unwrap();
        assert_eq!(c.v0(1.2).unwrap(), 0.0);
        // U' = -1/(2x²), U'' = 1/x³ at x = 1.
        let inv = MassProfile::inverse_linear(0.5).unwrap();
        assert!((inv.v0(1.0).unwrap() + 5.0 / 16.0).abs() < 1e-15);
        // U'(0) = 0, U''(0) = -1.
        assert!((MassProfile::sech().v0(0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_linear_v0_is_quartic_barrier() {
        let inv = MassProfile::inverse_linear(0.5).unwrap();
        for &x in &[0.3f64, 0.9, 2.5, 7.0] {
            let expected = -5.0 / (16.0 * x.powi(4));
            assert!((inv.v0(x).unwrap() - expected).abs() < 1e-12 * expected.abs());
        }
    }

    #[test]
    fn reference_points() {
        assert_eq!(MassProfile::sech().reference_point(), 0.0);
        assert_eq!(MassProfile::linear(2.0).unwrap().reference_point(), 1.0);
        let boxed = MassProfile::custom(|_| 1.0, Interval::new(2.0, 6.0).unwrap());
        assert_eq!(boxed.reference_point(), 4.0);
    }

    fn builtins() -> Vec<(MassProfile, f64, f64)> {
        vec![
            (MassProfile::constant(FRAC_1_SQRT_2).unwrap(), -5.0, 5.0),
            (MassProfile::constant(-1.3).unwrap(), -5.0, 5.0),
            (MassProfile::inverse_linear(0.5).unwrap(), 0.05, 6.0),
            (MassProfile::sech(), -4.0, 4.0),
            (MassProfile::linear(-0.5).unwrap(), 0.05, 8.0),
        ]
    }

    #[test]
    fn analytic_and_quadrature_y_agree() {
        for (p, lo, hi) in builtins() {
            for i in 0..100 {
                let x = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
                let a = p.y(x).unwrap();
                let q = p.y_quadrature(x).unwrap();
                assert!(
                    (a - q).abs() < 1e-10,
                    "{}: x={x} analytic={a} quad={q}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn derivative_of_y_is_inverse_u() {
        for (p, lo, hi) in builtins() {
            for i in 1..50 {
                let x = lo + (hi - lo) * i as f64 / 50.0;
                let h = 1e-5 * x.abs().max(1.0);
                let dy = (p.y(x + h).unwrap() - p.y(x - h).unwrap()) / (2.0 * h);
                let expected = 1.0 / p.u(x);
                assert!(
                    ((dy - expected) / expected).abs() < 1e-6,
                    "{}: x={x}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn custom_v0_matches_closed_form() {
        let analytic = MassProfile::sech();
        let custom = MassProfile::custom(|x: f64| 1.0 / x.cosh(), Interval::REAL_LINE);
        for i in 0..=80 {
            let x = -4.0 + 0.1 * i as f64;
            let a = analytic.v0(x).unwrap();
            let c = custom.v0(x).unwrap();
            assert!((a - c).abs() < 1e-6, "x={x}: {a} vs {c}");
        }
    }

    #[test]
    fn y_inverse_round_trips() {
        for (p, lo, hi) in builtins() {
            for i in 1..10 {
                let x = lo + (hi - lo) * i as f64 / 10.0;
                let back = p.y_inverse(p.y(x).unwrap()).unwrap();
                assert!((back - x).abs() < 1e-9 * x.abs().max(1.0), "{}", p.name());
            }
        }
        let custom = MassProfile::custom(|x: f64| 1.0 / x.cosh(), Interval::REAL_LINE);
        let x = custom.y_inverse(2.0).unwrap();
        assert!((x - 2.0f64.asinh()).abs() < 1e-9);
    }

    #[test]
    fn y_range_orientation() {
        let lin = MassProfile::linear(-0.5).unwrap();
        let r = lin.y_range().unwrap();
        assert!(r.lo.is_infinite() && r.hi.is_infinite());
        let inv = MassProfile::inverse_linear(0.5).unwrap();
        assert_eq!(inv.y_range().unwrap().lo, 0.0);
    }
}
