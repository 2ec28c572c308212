//! Cross-checks of the closed forms against the variable-mass eigensolver.
//!
//! A case is one [`FamilySpec`] on one grid. [`run_case`] compares the
//! closed-form spectrum with Richardson-extrapolated eigenvalues, the
//! analytic ground state with the numeric one, ladder states with numeric
//! excited states, and evaluates the shape-invariance residual.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensolver::{self, TridiagonalOperator};
use crate::error::{GsipError, Result};
use crate::families::{FamilyKind, FamilySpec};
use crate::grid::{Grid, GridFunction};
use crate::profiles::Interval;
use crate::susy::{self, Superpotential};

pub const REPORT_SCHEMA: &str = "gsip-report/1";

/// Default interior node count for automatically boxed grids.
pub const DEFAULT_AUTO_NODES: usize = 2000;

/// Edge magnitude of the analytic ground states (relative to their peak)
/// that fixes the automatic box.
pub const BOX_TOLERANCE: f64 = 1e-12;

/// Half-width cap of the automatic box in characteristic lengths of `Y`.
pub const BOX_CAP: f64 = 60.0;

const BOX_SAMPLES: usize = 4001;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "GSIP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Relative eigenvalue error per verified level.
    pub spectrum_rel: f64,
    /// Ground-state overlap must exceed `1 - ground_overlap`.
    pub ground_overlap: f64,
    /// `‖Aψ₀‖/‖ψ₀‖` for the analytic ground state.
    pub ground_residual: f64,
    pub ladder_overlap: f64,
    /// Relative error of ladder-state Rayleigh quotients.
    pub ladder_rayleigh_rel: f64,
    /// Shape-invariance residual relative to `max(1, max|V₂|)`.
    pub shape_invariance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            spectrum_rel: 1e-3,
            ground_overlap: 1e-6,
            ground_residual: 1e-5,
            ladder_overlap: 0.999,
            ladder_rayleigh_rel: 1e-3,
            shape_invariance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPolicy {
    /// Box chosen from the analytic ground states, `n` interior nodes.
    Auto {
        n: usize,
    },
    Fixed(Grid),
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy::Auto {
            n: DEFAULT_AUTO_NODES,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyCase {
    pub id: String,
    pub spec: FamilySpec,
    pub grid: GridPolicy,
    /// Highest level index checked; levels `0..=k`.
    pub k: usize,
    pub thresholds: Thresholds,
    pub richardson: bool,
}

impl VerifyCase {
    pub fn new(id: impl Into<String>, spec: FamilySpec, k: usize) -> Self {
        VerifyCase {
            id: id.into(),
            spec,
            grid: GridPolicy::default(),
            k,
            thresholds: Thresholds::default(),
            richardson: true,
        }
    }

    pub fn with_grid(mut self, grid: GridPolicy) -> Self {
        self.grid = grid;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("case `{id}`: {source}")]
pub struct CaseError {
    pub id: String,
    #[source]
    pub source: GsipError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
    pub auto_box: bool,
    pub richardson: bool,
    /// Whether each end is a truncation of an infinite `Y` range (as
    /// opposed to a wall of the problem itself).
    pub truncated_lo: bool,
    pub truncated_hi: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: usize,
    /// `None` when the level is not in the bound spectrum.
    pub e_analytic: Option<f64>,
    pub e_numeric: f64,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
    /// Interior sign changes of the numeric eigenvector.
    pub nodes: usize,
    pub bound: bool,
    /// Bound and below the artificial continuum of the truncated box.
    pub verified: bool,
    pub ladder_overlap: Option<f64>,
    pub ladder_rayleigh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CriterionResult {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        CriterionResult {
            name: name.to_string(),
            value,
            threshold,
            passed: value < threshold,
        }
    }

    fn above(name: &str, value: f64, threshold: f64) -> Self {
        CriterionResult {
            name: name.to_string(),
            value,
            threshold,
            passed: value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub family: FamilyKind,
    pub profile: String,
    pub a: f64,
    pub parameters: BTreeMap<String, f64>,
    pub grid: GridMeta,
    pub normalizable: bool,
    pub finite_spectrum: bool,
    /// Levels in `0..=k` that the closed form declares bound.
    pub bound_levels: usize,
    pub levels: Vec<LevelRow>,
    pub shape_invariance_residual: f64,
    pub shape_invariance_scale: f64,
    pub ground_overlap: f64,
    pub ground_residual: f64,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

/// Sampled functions behind a report.
#[derive(Debug, Clone)]
pub struct CaseArtifacts {
    pub grid: Grid,
    pub psi_analytic: GridFunction,
    pub psi_numeric: Vec<GridFunction>,
}

impl CaseArtifacts {
    /// Columns `x, psi_analytic, psi_numeric_0..k`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "x,psi_analytic")?;
        for j in 0..self.psi_numeric.len() {
            write!(out, ",psi_numeric_{j}")?;
        }
        writeln!(out)?;
        for (i, x) in self.grid.nodes().enumerate() {
            write!(out, "{x:.16e},{:.16e}", self.psi_analytic.values()[i])?;
            for psi in &self.psi_numeric {
                write!(out, ",{:.16e}", psi.values()[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn run_case(case: &VerifyCase) -> std::result::Result<VerificationReport, CaseError> {
    run_case_detailed(case).map(|(report, _)| report)
}

pub fn run_case_detailed(
    case: &VerifyCase,
) -> std::result::Result<(VerificationReport, CaseArtifacts), CaseError> {
    verify_inner(case).map_err(|source| CaseError {
        id: case.id.clone(),
        source,
    })
}

/// One result per case, in input order. Cases run concurrently, capped by
/// `GSIP_THREADS` when set.
pub fn sweep(cases: &[VerifyCase]) -> Vec<std::result::Result<VerificationReport, CaseError>> {
    in_pool(|| cases.par_iter().map(run_case).collect())
}

/// [`sweep`] keeping the sampled functions of each case.
pub fn sweep_detailed(
    cases: &[VerifyCase],
) -> Vec<std::result::Result<(VerificationReport, CaseArtifacts), CaseError>> {
    in_pool(|| cases.par_iter().map(run_case_detailed).collect())
}

fn in_pool<T: Send, F: FnOnce() -> T + Send>(run: F) -> T {
    match thread_cap() {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Discretized `H₁` for the spec on a grid.
pub fn hamiltonian(spec: &FamilySpec, grid: &Grid) -> Result<TridiagonalOperator> {
    let profile = spec.profile();
    eigensolver::discretize(
        |x| 0.5 / profile.u(x).powi(2),
        |x| spec.potential_of(x).unwrap_or(f64::NAN),
        grid,
    )
}

/// Discretized partner `H₂`.
pub fn partner_hamiltonian(spec: &FamilySpec, grid: &Grid) -> Result<TridiagonalOperator> {
    let profile = spec.profile();
    eigensolver::discretize(
        |x| 0.5 / profile.u(x).powi(2),
        |x| spec.partner_potential_of(x).unwrap_or(f64::NAN),
        grid,
    )
}

/// A verification box and which of its ends are truncations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseBox {
    pub grid: Grid,
    pub truncated_lo: bool,
    pub truncated_hi: bool,
}

/// Box on which the analytic ground states `ψ₀(a_{j+1})` of levels
/// `j = 0..=k` fall below [`BOX_TOLERANCE`] of their peak. Walls of the
/// working interval are kept; levels without a normalizable partner ground
/// state use the full [`BOX_CAP`] extent.
pub fn auto_box(spec: &FamilySpec, k: usize, n: usize) -> Result<CaseBox> {
    let wy = spec.working_y_interval();
    let scale = spec.characteristic_scale(spec.a()).abs();
    let profile = spec.profile();
    let y_ref = profile.y(profile.reference_point())?;
    let center = y_ref.clamp(wy.lo, wy.hi);
    let scan = Interval {
        lo: wy.lo.max(center - BOX_CAP * scale),
        hi: wy.hi.min(center + BOX_CAP * scale),
    };
    let ys: Vec<f64> = (0..BOX_SAMPLES)
        .map(|i| scan.lo + (scan.hi - scan.lo) * (i as f64 + 0.5) / BOX_SAMPLES as f64)
        .collect();

    let chain = susy::parameter_chain(spec, spec.a(), k + 2);
    let mut lo_idx = usize::MAX;
    let mut hi_idx = 0usize;
    for (j, &a_j) in chain.iter().enumerate().take(k + 1) {
        if spec.spectrum_of(j).is_err() {
            break;
        }
        let partner = spec.with_a(a_j);
        let normalizable = partner
            .check_normalizability()
            .map(|c| c.normalizable)
            .unwrap_or(false);
        if !normalizable {
            lo_idx = 0;
            hi_idx = BOX_SAMPLES - 1;
            continue;
        }
        let logs = ys
            .iter()
            .map(|&y| partner.log_ground_state(spec.x_of_y(y)?, a_j))
            .collect::<Result<Vec<_>>>()?;
        let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let floor = peak + BOX_TOLERANCE.ln();
        let first = logs.iter().position(|&l| l >= floor).unwrap_or(0);
        let last = logs
            .iter()
            .rposition(|&l| l >= floor)
            .unwrap_or(BOX_SAMPLES - 1);
        lo_idx = lo_idx.min(first.saturating_sub(1));
        hi_idx = hi_idx.max((last + 1).min(BOX_SAMPLES - 1));
    }
    if lo_idx == usize::MAX {
        return Err(GsipError::numerics("no bound level to size the box"));
    }

    let wall_lo = wy.lo.is_finite() && scan.lo == wy.lo && lo_idx == 0;
    let wall_hi = wy.hi.is_finite() && scan.hi == wy.hi && hi_idx == BOX_SAMPLES - 1;
    let y_lo = if wall_lo { wy.lo } else { ys[lo_idx] };
    let y_hi = if wall_hi { wy.hi } else { ys[hi_idx] };
    let (xa, xb) = (spec.x_of_y(y_lo)?, spec.x_of_y(y_hi)?);
    let increasing = xa < xb;
    let grid = Grid::new(xa.min(xb), xa.max(xb), n)?;
    let (t_ylo, t_yhi) = (!wy.lo.is_finite(), !wy.hi.is_finite());
    Ok(CaseBox {
        grid,
        truncated_lo: if increasing { t_ylo } else { t_yhi },
        truncated_hi: if increasing { t_yhi } else { t_ylo },
    })
}

/// Classifies the ends of a user-supplied grid: an end is a truncation when
/// the working `Y` interval is unbounded in that direction.
pub fn fixed_box(spec: &FamilySpec, grid: Grid) -> Result<CaseBox> {
    let wy = spec.working_y_interval();
    let profile = spec.profile();
    let domain = Superpotential::domain(spec);
    for x in [grid.x_lo(), grid.x_hi()] {
        if !(domain.contains(x) || x == domain.lo || x == domain.hi) {
            return Err(GsipError::Domain {
                x,
                lo: domain.lo,
                hi: domain.hi,
            });
        }
    }
    let increasing = profile.u(grid.node(0)) > 0.0;
    let (t_ylo, t_yhi) = (!wy.lo.is_finite(), !wy.hi.is_finite());
    Ok(CaseBox {
        grid,
        truncated_lo: if increasing { t_ylo } else { t_yhi },
        truncated_hi: if increasing { t_yhi } else { t_ylo },
    })
}

fn relative_error(numeric: f64, analytic: f64, fallback_scale: f64) -> f64 {
    let scale = if analytic != 0.0 {
        analytic.abs()
    } else {
        fallback_scale
    };
    (numeric - analytic).abs() / scale
}

fn verify_inner(case: &VerifyCase) -> Result<(VerificationReport, CaseArtifacts)> {
    let spec = &case.spec;
    let k = case.k;
    let th = case.thresholds;

    let check = spec.check_normalizability()?;
    if !check.normalizable {
        return Err(GsipError::Normalizability(format!(
            "{} with a = {}: W/U = {:e} near x = {:e}, {:e} near x = {:e}",
            spec.kind(),
            spec.a(),
            check.lower,
            check.x_lower,
            check.upper,
            check.x_upper
        )));
    }

    let (cbox, auto) = match case.grid {
        GridPolicy::Auto { n } => (auto_box(spec, k, n)?, true),
        GridPolicy::Fixed(grid) => (fixed_box(spec, grid)?, false),
    };
    let grid = cbox.grid;
    if k + 1 > grid.len() {
        return Err(GsipError::Grid(format!(
            "{} levels requested on {} nodes",
            k + 1,
            grid.len()
        )));
    }

    let op = hamiltonian(spec, &grid)?;
    let pairs = eigensolver::lowest_eigenpairs(&op, k + 1)?;
    let energies = if case.richardson {
        eigensolver::richardson_refine(|g| hamiltonian(spec, g), &grid, k + 1)?
    } else {
        pairs.iter().map(|p| p.energy).collect()
    };
    let numeric: Vec<GridFunction> = pairs
        .iter()
        .map(|p| p.grid_function(grid))
        .collect::<Result<_>>()?;

    // Artificial continuum of the truncated box.
    let mut continuum = f64::INFINITY;
    if cbox.truncated_lo {
        continuum = continuum.min(spec.potential_of(grid.node(0))?);
    }
    if cbox.truncated_hi {
        continuum = continuum.min(spec.potential_of(grid.node(grid.len() - 1))?);
    }

    let e1_scale = spec
        .spectrum_of(1)
        .ok()
        .filter(|e| *e != 0.0)
        .map_or(1.0, f64::abs);

    let psi0 = spec.ground_state_on(&grid)?;
    let ground_overlap = psi0.overlap(&numeric[0]);
    let a_psi0 = susy::apply_a(spec, spec.a(), &psi0)?;
    let ground_residual = a_psi0.norm() / psi0.norm();

    let mut levels = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let analytic = spec.spectrum_of(j).ok();
        let e_num = energies[j];
        let bound = analytic.is_some();
        let verified = bound && e_num < continuum;
        let (ladder_overlap, ladder_rayleigh) = if verified && j > 0 {
            let psi = susy::ladder_excited_state(spec, spec.a(), j, &grid)?;
            let rq = op.rayleigh_quotient(psi.values());
            (Some(psi.overlap(&numeric[j])), Some(rq))
        } else {
            (None, None)
        };
        levels.push(LevelRow {
            n: j,
            e_analytic: analytic,
            e_numeric: e_num,
            abs_error: analytic.map(|e| (e_num - e).abs()),
            rel_error: analytic.map(|e| relative_error(e_num, e, e1_scale)),
            nodes: numeric[j].sign_changes(),
            bound,
            verified,
            ladder_overlap,
            ladder_rayleigh,
        });
    }

    let si_raw = susy::shape_invariance_residual(spec, spec.a(), &grid)?;
    let v2_peak = grid.nodes().try_fold(0.0f64, |m, x| {
        Ok::<_, GsipError>(m.max(spec.partner_potential_of(x)?.abs()))
    })?;
    let si_scale = v2_peak.max(1.0);

    let verified: Vec<&LevelRow> = levels.iter().filter(|r| r.verified).collect();
    let mut criteria = vec![
        CriterionResult::below(
            "spectrum",
            verified
                .iter()
                .filter_map(|r| r.rel_error)
                .fold(0.0, f64::max),
            th.spectrum_rel,
        ),
        CriterionResult::above("ground_overlap", ground_overlap, 1.0 - th.ground_overlap),
        CriterionResult::below("ground_residual", ground_residual, th.ground_residual),
        CriterionResult::below("shape_invariance", si_raw / si_scale, th.shape_invariance),
        CriterionResult::below(
            "node_count",
            verified.iter().filter(|r| r.nodes != r.n).count() as f64,
            0.5,
        ),
    ];
    if verified.iter().any(|r| r.ladder_overlap.is_some()) {
        criteria.push(CriterionResult::above(
            "ladder_overlap",
            verified
                .iter()
                .filter_map(|r| r.ladder_overlap)
                .fold(f64::INFINITY, f64::min),
            th.ladder_overlap,
        ));
        criteria.push(CriterionResult::below(
            "ladder_rayleigh",
            verified
                .iter()
                .filter_map(|r| Some(relative_error(r.ladder_rayleigh?, r.e_analytic?, e1_scale)))
                .fold(0.0, f64::max),
            th.ladder_rayleigh_rel,
        ));
    }
    criteria.push(CriterionResult::above(
        "verified_levels",
        verified.len() as f64,
        0.5,
    ));
    let passed = criteria.iter().all(|c| c.passed);

    let report = VerificationReport {
        id: case.id.clone(),
        family: spec.kind(),
        profile: spec.profile().name().to_string(),
        a: spec.a(),
        parameters: spec
            .family()
            .parameters()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        grid: GridMeta {
            x_lo: grid.x_lo(),
            x_hi: grid.x_hi(),
            n: grid.len(),
            auto_box: auto,
            richardson: case.richardson,
            truncated_lo: cbox.truncated_lo,
            truncated_hi: cbox.truncated_hi,
        },
        normalizable: true,
        finite_spectrum: spec.has_finite_spectrum(),
        bound_levels: levels.iter().filter(|r| r.bound).count(),
        levels,
        shape_invariance_residual: si_raw,
        shape_invariance_scale: si_scale,
        ground_overlap,
        ground_residual,
        criteria,
        passed,
    };
    let artifacts = CaseArtifacts {
        grid,
        psi_analytic: psi0,
        psi_numeric: numeric,
    };
    Ok((report, artifacts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseEntry {
    pub id: String,
    pub status: CaseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The JSON document written for a verify or sweep run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub cases: Vec<CaseEntry>,
}

impl ReportDocument {
    pub fn new(results: Vec<std::result::Result<VerificationReport, CaseError>>) -> Self {
        let cases = results
            .into_iter()
            .map(|r| match r {
                Ok(report) => CaseEntry {
                    id: report.id.clone(),
                    status: if report.passed {
                        CaseStatus::Pass
                    } else {
                        CaseStatus::Fail
                    },
                    report: Some(report),
                    error: None,
                },
                Err(e) => CaseEntry {
                    id: e.id.clone(),
                    status: CaseStatus::Error,
                    report: None,
                    error: Some(e.source.to_string()),
                },
            })
            .collect();
        ReportDocument {
            schema: REPORT_SCHEMA.to_string(),
            cases,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.status == CaseStatus::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}
