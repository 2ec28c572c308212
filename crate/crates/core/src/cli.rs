//! Config parsing and the `generate`, `verify`, `sweep` and `tabulate`
//! commands.
//!
//! A config is a TOML document with `[profile]`, `[family]`, `[grid]` and
//! `[run]` tables, plus optional `[[case]]` entries for sweeps. Each
//! `[[case]]` needs an `id` and may replace any of the `profile`, `family`
//! or `grid` tables, or `k`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GsipError;
use crate::families::{Family, FamilyKind, FamilySpec};
use crate::grid::Grid;
use crate::profiles::MassProfile;
use crate::susy::{self, Superpotential};
use crate::verify::{self, GridPolicy, ReportDocument, Thresholds, VerifyCase};

/// Smallest grid accepted by `verify` and `sweep`.
pub const MIN_VERIFY_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Generate,
    Verify,
    Sweep,
    Tabulate,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("bad override `{0}`: expected key=value")]
    Override(String),

    #[error(transparent)]
    Gsip(#[from] GsipError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// `2` for usage and config problems, `3` for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Override(_) => 2,
            CliError::Io { .. } => 2,
            CliError::Gsip(e) => match e {
                GsipError::Parameter { .. }
                | GsipError::Normalizability(_)
                | GsipError::Indeterminate { .. }
                | GsipError::Domain { .. } => 2,
                _ => 3,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// `constant`, `inverse-linear`, `sech-mass` or `linear`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Exponential amplitude; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    /// Second trigonometric/hyperbolic parameter; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to `true` unless `x_lo`/`x_hi` are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_box: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_hi: Option<f64>,
    #[serde(default = "default_nodes")]
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            auto_box: None,
            x_lo: None,
            x_hi: None,
            n: default_nodes(),
        }
    }
}

fn default_nodes() -> usize {
    verify::DEFAULT_AUTO_NODES
}

fn default_k() -> usize {
    3
}

fn default_id() -> String {
    "case".to_string()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default = "default_id")]
    pub id: String,
    /// Highest level index.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_true")]
    pub richardson: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            command: None,
            id: default_id(),
            k: default_k(),
            richardson: true,
            out: None,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileConfig,
    pub family: FamilyConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, rename = "case", skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<CaseConfig>,
}

/// A fully resolved case.
#[derive(Debug, Clone)]
pub struct ResolvedCase {
    pub id: String,
    pub spec: FamilySpec,
    pub grid: GridPolicy,
    pub k: usize,
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization is infallible")
    }

    /// The cases a command runs: the `[[case]]` entries for a sweep that has
    /// them, otherwise the single base case.
    pub fn resolve(&self, command: Command) -> CliResult<Vec<ResolvedCase>> {
        if self.cases.is_empty() || command != Command::Sweep {
            return Ok(vec![resolve_one(
                &self.run.id,
                &self.profile,
                &self.family,
                &self.grid,
                self.run.k,
                command,
            )?]);
        }
        self.cases
            .iter()
            .map(|c| {
                resolve_one(
                    &c.id,
                    c.profile.as_ref().unwrap_or(&self.profile),
                    c.family.as_ref().unwrap_or(&self.family),
                    c.grid.as_ref().unwrap_or(&self.grid),
                    c.k.unwrap_or(self.run.k),
                    command,
                )
            })
            .collect()
    }

    pub fn verify_cases(&self, command: Command) -> CliResult<Vec<VerifyCase>> {
        Ok(self
            .resolve(command)?
            .into_iter()
            .map(|c| VerifyCase {
                id: c.id,
                spec: c.spec,
                grid: c.grid,
                k: c.k,
                thresholds: self.run.thresholds,
                richardson: self.run.richardson,
            })
            .collect())
    }
}

fn finite(field: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(field, "must be a finite number"))
    }
}

fn required(field: &str, v: Option<f64>) -> CliResult<f64> {
    finite(
        field,
        v.ok_or_else(|| CliError::validation(field, "required for this choice"))?,
    )
}

fn forbid(field: &str, v: Option<f64>, what: &str) -> CliResult<()> {
    match v {
        Some(_) => Err(CliError::validation(field, format!("not used by {what}"))),
        None => Ok(()),
    }
}

fn prefixed(section: &str, e: GsipError) -> CliError {
    match e {
        GsipError::Parameter { field, reason } => {
            CliError::validation(format!("{section}.{field}"), reason)
        }
        other => CliError::Gsip(other),
    }
}

pub fn build_profile(p: &ProfileConfig) -> CliResult<MassProfile> {
    let profile = match p.kind.as_str() {
        "constant" => {
            forbid("profile.c", p.c, "constant")?;
            forbid("profile.s", p.s, "constant")?;
            MassProfile::constant(required("profile.u0", p.u0)?)
        }
        "inverse-linear" => {
            forbid("profile.u0", p.u0, "inverse-linear")?;
            forbid("profile.s", p.s, "inverse-linear")?;
            MassProfile::inverse_linear(required("profile.c", p.c)?)
        }
        "sech-mass" => {
            forbid("profile.u0", p.u0, "sech-mass")?;
            forbid("profile.c", p.c, "sech-mass")?;
            forbid("profile.s", p.s, "sech-mass")?;
            Ok(MassProfile::sech())
        }
        "linear" => {
            forbid("profile.u0", p.u0, "linear")?;
            forbid("profile.c", p.c, "linear")?;
            MassProfile::linear(required("profile.s", p.s)?)
        }
        other => {
            return Err(CliError::validation(
                "profile.kind",
                format!("unknown profile `{other}` (constant, inverse-linear, sech-mass, linear)"),
            ))
        }
    };
    profile.map_err(|e| prefixed("profile", e))
}

pub fn build_spec(p: &ProfileConfig, f: &FamilyConfig) -> CliResult<FamilySpec> {
    let kind: FamilyKind = f
        .name
        .parse()
        .map_err(|_| CliError::validation("family.name", format!("unknown family `{}`", f.name)))?;
    let a = required("family.a", f.a)?;
    let unused = |fields: &[(&str, Option<f64>)]| -> CliResult<()> {
        for (name, v) in fields {
            forbid(name, *v, kind.name())?;
        }
        Ok(())
    };
    let family = match kind {
        FamilyKind::OscShift => {
            unused(&[
                ("family.alpha", f.alpha),
                ("family.u0", f.u0),
                ("family.c1", f.c1),
                ("family.b", f.b),
            ])?;
            Family::OscShift {
                r0: required("family.r0", f.r0)?,
            }
        }
        FamilyKind::Exponential => {
            unused(&[("family.r0", f.r0), ("family.c1", f.c1), ("family.b", f.b)])?;
            Family::Exponential {
                alpha: required("family.alpha", f.alpha)?,
                u0: finite("family.u0", f.u0.unwrap_or(1.0))?,
            }
        }
        FamilyKind::OscLinearG => {
            unused(&[
                ("family.r0", f.r0),
                ("family.alpha", f.alpha),
                ("family.u0", f.u0),
                ("family.c1", f.c1),
                ("family.b", f.b),
            ])?;
            Family::OscLinearG
        }
        FamilyKind::OscInverseG => {
            unused(&[("family.r0", f.r0), ("family.u0", f.u0), ("family.b", f.b)])?;
            Family::OscInverseG {
                alpha: required("family.alpha", f.alpha)?,
                c1: required("family.c1", f.c1)?,
            }
        }
        FamilyKind::Trigonometric | FamilyKind::Hyperbolic => {
            unused(&[
                ("family.r0", f.r0),
                ("family.u0", f.u0),
                ("family.c1", f.c1),
            ])?;
            let alpha = required("family.alpha", f.alpha)?;
            let b = finite("family.b", f.b.unwrap_or(0.0))?;
            if kind == FamilyKind::Trigonometric {
                Family::Trigonometric { alpha, b }
            } else {
                Family::Hyperbolic { alpha, b }
            }
        }
    };
    let profile = build_profile(p)?;
    FamilySpec::new(family, a, profile).map_err(|e| prefixed("family", e))
}

fn resolve_one(
    id: &str,
    p: &ProfileConfig,
    f: &FamilyConfig,
    g: &GridConfig,
    k: usize,
    command: Command,
) -> CliResult<ResolvedCase> {
    if id.is_empty()
        || !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
    {
        return Err(CliError::validation(
            "id",
            format!("`{id}` must be non-empty and use only [A-Za-z0-9._-]"),
        ));
    }
    let spec = build_spec(p, f)?;
    if matches!(command, Command::Verify | Command::Sweep) && g.n < MIN_VERIFY_NODES {
        return Err(CliError::validation(
            "grid.n",
            format!(
                "{} is below the minimum of {MIN_VERIFY_NODES} for verification",
                g.n
            ),
        ));
    }
    let auto = g.auto_box.unwrap_or(g.x_lo.is_none() && g.x_hi.is_none());
    let grid = if auto {
        if g.x_lo.is_some() || g.x_hi.is_some() {
            return Err(CliError::validation(
                "grid.auto_box",
                "explicit x_lo/x_hi conflict with auto_box = true",
            ));
        }
        GridPolicy::Auto { n: g.n }
    } else {
        let lo = required("grid.x_lo", g.x_lo)?;
        let hi = required("grid.x_hi", g.x_hi)?;
        let grid =
            Grid::new(lo, hi, g.n).map_err(|e| CliError::validation("grid", e.to_string()))?;
        GridPolicy::Fixed(grid)
    };
    if k >= g.n {
        return Err(CliError::validation("run.k", "must be below grid.n"));
    }
    Ok(ResolvedCase {
        id: id.to_string(),
        spec,
        grid,
        k,
    })
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |p| before.len() - p - 1)
        + 1;
    (line, column)
}

fn parse_error(text: &str, e: &toml::de::Error) -> CliError {
    let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
    CliError::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Parses and validates a config document, then applies `key=value`
/// overrides (dotted keys, TOML values; bare words are taken as strings).
pub fn parse_config(text: &str, overrides: &[String]) -> CliResult<RunConfig> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    let config: RunConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| parse_error(text, &e))?
    } else {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Parse {
                line: 0,
                column: 0,
                message: format!("after overrides: {}", e.message()),
            })?
    };
    validate(&config)?;
    Ok(config)
}

fn apply_override(table: &mut toml::Table, item: &str) -> CliResult<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Override(item.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Override(item.to_string()));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut node = table;
    for part in parts {
        node = node
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Override(item.to_string()))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn validate(config: &RunConfig) -> CliResult<()> {
    let t = &config.run.thresholds;
    for (name, v) in [
        ("run.thresholds.spectrum_rel", t.spectrum_rel),
        ("run.thresholds.ground_overlap", t.ground_overlap),
        ("run.thresholds.ground_residual", t.ground_residual),
        ("run.thresholds.ladder_overlap", t.ladder_overlap),
        ("run.thresholds.ladder_rayleigh_rel", t.ladder_rayleigh_rel),
        ("run.thresholds.shape_invariance", t.shape_invariance),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::validation(name, "must be finite and positive"));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for c in &config.cases {
        if !seen.insert(c.id.as_str()) {
            return Err(CliError::validation(
                "case.id",
                format!("duplicate id `{}`", c.id),
            ));
        }
    }
    // Resolving builds every spec and grid, surfacing field errors early.
    let command = config.run.command.unwrap_or(Command::Generate);
    config.resolve(command)?;
    if !config.cases.is_empty() {
        config.resolve(Command::Sweep)?;
    }
    Ok(())
}

/// What a command produced, and how the process should exit.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: u8,
    pub written: Vec<PathBuf>,
    pub stdout: String,
}

pub fn execute(config: &RunConfig, command: Command, out_dir: Option<&Path>) -> CliResult<Outcome> {
    let out_dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.run.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match command {
        Command::Generate => cmd_generate(config, &out_dir),
        Command::Verify | Command::Sweep => cmd_verify(config, command, &out_dir),
        Command::Tabulate => cmd_tabulate(config),
    }
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file<F>(path: PathBuf, fill: F) -> CliResult<PathBuf>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
{
    let io_err = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    let file = fs::File::create(&path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    fill(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
    Ok(path)
}

/// Bound levels `0..=k`, stopping at the first unbound one.
fn bound_spectrum(spec: &FamilySpec, k: usize) -> Vec<f64> {
    (0..=k).map_while(|n| spec.spectrum_of(n).ok()).collect()
}

#[derive(Debug, Serialize)]
struct SpectrumSidecar<'a> {
    id: &'a str,
    family: FamilyKind,
    profile: &'a str,
    a: f64,
    a2: f64,
    remainder: f64,
    k: usize,
    finite_spectrum: bool,
    spectrum: Vec<f64>,
}

fn cmd_generate(config: &RunConfig, out_dir: &Path) -> CliResult<Outcome> {
    ensure_dir(out_dir)?;
    let mut written = Vec::new();
    for case in config.resolve(Command::Generate)? {
        let spec = &case.spec;
        let grid = match case.grid {
            GridPolicy::Auto { n } => verify::auto_box(spec, case.k, n)?.grid,
            GridPolicy::Fixed(g) => g,
        };
        let profile = spec.profile();
        let psi0 = spec.ground_state_on(&grid)?;
        let mut rows = Vec::with_capacity(grid.len());
        for (i, x) in grid.nodes().enumerate() {
            rows.push([
                x,
                profile.mass(x)?,
                profile.u(x),
                profile.y(x)?,
                spec.superpotential_of(x)?,
                spec.potential_of(x)?,
                susy::v2_from_w(spec, spec.a(), x)?,
                psi0.values()[i],
            ]);
        }
        written.push(write_file(
            out_dir.join(format!("case-{}.csv", case.id)),
            |w| {
                writeln!(w, "x,m,U,Y,W,V1,V2,psi0_analytic")?;
                for row in &rows {
                    let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                    writeln!(w, "{}", line.join(","))?;
                }
                Ok(())
            },
        )?);
        let sidecar = SpectrumSidecar {
            id: &case.id,
            family: spec.kind(),
            profile: profile.name(),
            a: spec.a(),
            a2: spec.param_step_of(),
            remainder: spec.remainder(spec.a()),
            k: case.k,
            finite_spectrum: spec.has_finite_spectrum(),
            spectrum: bound_spectrum(spec, case.k),
        };
        let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialization");
        written.push(write_file(
            out_dir.join(format!("case-{}.json", case.id)),
            |w| writeln!(w, "{json}"),
        )?);
    }
    Ok(Outcome {
        exit_code: 0,
        written,
        stdout: String::new(),
    })
}

fn cmd_verify(config: &RunConfig, command: Command, out_dir: &Path) -> CliResult<Outcome> {
    let cases = config.verify_cases(command)?;
    ensure_dir(out_dir)?;
    let results = verify::sweep_detailed(&cases);
    let mut written = Vec::new();
    let mut reports = Vec::with_capacity(results.len());
    let mut numerics_failure = false;
    let mut stdout = String::new();
    for result in results {
        match result {
            Ok((report, artifacts)) => {
                written.push(write_file(
                    out_dir.join(format!("case-{}.csv", report.id)),
                    |w| artifacts.write_csv(w),
                )?);
                let _ = writeln!(
                    stdout,
                    "{:<24} {}",
                    report.id,
                    if report.passed { "PASS" } else { "FAIL" }
                );
                reports.push(Ok(report));
            }
            Err(e) => {
                let code = CliError::Gsip(e.source.clone()).exit_code();
                numerics_failure |= code == 3;
                let _ = writeln!(stdout, "{:<24} ERROR {}", e.id, e.source);
                // A single-case run reports the error through the exit code.
                if command == Command::Verify {
                    return Err(CliError::Gsip(e.source));
                }
                reports.push(Err(e));
            }
        }
    }
    let doc = ReportDocument::new(reports);
    let json = doc.to_json();
    written.push(write_file(out_dir.join("report.json"), |w| {
        writeln!(w, "{json}")
    })?);
    let exit_code = if doc.all_passed() {
        0
    } else if numerics_failure {
        3
    } else {
        1
    };
    Ok(Outcome {
        exit_code,
        written,
        stdout,
    })
}

fn cmd_tabulate(config: &RunConfig) -> CliResult<Outcome> {
    let mut stdout = String::new();
    for case in config.resolve(Command::Tabulate)? {
        let spec = &case.spec;
        let _ = writeln!(stdout, "# {} {} a = {}", case.id, spec.kind(), spec.a());
        let _ = writeln!(stdout, "{:>4} {:>24} {:>24}", "n", "E_n", "dE_n");
        let spectrum = bound_spectrum(spec, case.k);
        for (n, e) in spectrum.iter().enumerate() {
            let delta = if n == 0 { 0.0 } else { e - spectrum[n - 1] };
            let _ = writeln!(stdout, "{n:>4} {e:>24} {delta:>24}");
        }
        if spectrum.len() <= case.k {
            let _ = writeln!(
                stdout,
                "# bound spectrum ends after n = {}",
                spectrum.len() - 1
            );
        }
    }
    Ok(Outcome {
        exit_code: 0,
        written: Vec::new(),
        stdout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[profile]
kind = "constant"
u0 = 0.7071067811865476

[family]
name = "OscShift"
a = 0.0
r0 = 2.0
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL, &[]).unwrap();
        assert_eq!(c.grid.n, verify::DEFAULT_AUTO_NODES);
        assert_eq!(c.run.k, 3);
        assert!(c.run.richardson);
        assert_eq!(c.run.thresholds, Thresholds::default());
        let cases = c.verify_cases(Command::Verify).unwrap();
        assert_eq!(cases.len(), 1);
        assert!(matches!(cases[0].grid, GridPolicy::Auto { .. }));
    }

    #[test]
    fn exponential_without_alpha_names_the_field() {
        let text = MINIMAL
            .replace("name = \"OscShift\"", "name = \"Exponential\"")
            .replace("r0 = 2.0", "");
        match parse_config(&text, &[]) {
            Err(CliError::Validation { field, .. }) => assert!(field.contains("alpha")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_grid_rejected_for_verify() {
        let text = format!("{MINIMAL}\n[grid]\nn = 10\n[run]\ncommand = \"verify\"\n");
        match parse_config(&text, &[]) {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "grid.n"),
            other => panic!("{other:?}"),
        }
        // fine for generate
        let text = format!("{MINIMAL}\n[grid]\nn = 10\n");
        assert!(parse_config(&text, &[]).is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let text = format!("{MINIMAL}\n[grid]\nspacing = 0.1\n");
        match parse_config(&text, &[]) {
            Err(CliError::Parse { line, message, .. }) => {
                assert!(message.contains("spacing"), "{message}");
                assert_eq!(
                    line,
                    text.lines().position(|l| l.starts_with("spacing")).unwrap() + 1
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_line_and_column() {
        let text = "[profile]\nkind = \"constant\"\nu0 = = 1\n";
        match parse_config(text, &[]) {
            Err(CliError::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column >= 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_finite_values_rejected() {
        let text = MINIMAL.replace("a = 0.0", "a = nan");
        assert!(matches!(
            parse_config(&text, &[]),
            Err(CliError::Validation { ref field, .. }) if field == "family.a"
        ));
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config(MINIMAL, &["family.a=0.5".into(), "run.id=shifted".into()]).unwrap();
        assert_eq!(c.family.a, Some(0.5));
        assert_eq!(c.run.id, "shifted");
        assert!(parse_config(MINIMAL, &["family.a".into()]).is_err());
        assert!(parse_config(MINIMAL, &["family.bogus=1".into()]).is_err());
    }

    #[test]
    fn round_trip() {
        let text = format!(
            "{MINIMAL}\n[grid]\nx_lo = -8.0\nx_hi = 8.0\nn = 4000\n[run]\nk = 5\nid = \"h\"\n\n\
             [[case]]\nid = \"one\"\n\n[[case]]\nid = \"two\"\nk = 2\n[case.family]\nname = \"Hyperbolic\"\na = 3.0\nalpha = 1.0\nb = 0.5\n"
        );
        let c = parse_config(&text, &[]).unwrap();
        let back = parse_config(&c.to_toml(), &[]).unwrap();
        assert_eq!(back, c);
        let cases = c.resolve(Command::Sweep).unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[1].spec.kind(), FamilyKind::Hyperbolic);
        assert_eq!(cases[1].k, 2);
    }

    #[test]
    fn tabulate_rows() {
        let text = MINIMAL.replace("r0 = 2.0", "r0 = 3.0");
        let c = parse_config(&text, &[]).unwrap();
        let out = cmd_tabulate(&c).unwrap().stdout;
        let energies: Vec<f64> = out
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim_start().starts_with('n'))
            .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(energies, vec![0.0, 3.0, 6.0, 9.0]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::validation("x", "y").exit_code(), 2);
        assert_eq!(
            CliError::Gsip(GsipError::Normalizability("n".into())).exit_code(),
            2
        );
        assert_eq!(CliError::Gsip(GsipError::numerics("boom")).exit_code(), 3);
    }
}
