//! Run configuration: flags layered over an optional TOML file, then
//! resolved into solver settings.

use std::path::Path;

use clap::ValueEnum;
use qphase::qlm::GridSpec;
use qphase::semiclassical::{BcMethod, Terminant};
use qphase::spectrum::{SolverSettings, SweepMode};
use qphase::SymmetricPotential;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Series,
    Wkb,
    Harmonic,
}

impl From<Bc> for BcMethod {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Series => BcMethod::AsymptoticSeries,
            Bc::Wkb => BcMethod::WkbP0,
            Bc::Harmonic => BcMethod::HarmonicExact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qlm,
    Wkb,
    Dunham,
    Airy,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TerminantArg {
    None,
    Stieltjes,
}

impl From<TerminantArg> for Terminant {
    fn from(t: TerminantArg) -> Self {
        match t {
            TerminantArg::None => Terminant::None,
            TerminantArg::Stieltjes => Terminant::StieltjesHalf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Warm,
    Parallel,
}

impl From<Mode> for SweepMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Warm => SweepMode::WarmStart,
            Mode::Parallel => SweepMode::Parallel,
        }
    }
}

/// Every setting a command may read. Unset fields fall back to the config
/// file, then to the defaults in [`RunConfig::resolve`]. Keys in the file
/// mirror the flag names with dashes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<String>,
    pub hbar: Option<f64>,
    pub tol: Option<f64>,
    pub grid_points: Option<usize>,
    pub nodes_per_wavelength: Option<f64>,
    pub xmax_factor: Option<f64>,
    pub bc: Option<Bc>,
    pub bc_order: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub levels: Option<String>,
    pub method: Option<Method>,
    pub kmax: Option<usize>,
    pub terminant: Option<TerminantArg>,
    pub energy: Option<f64>,
    pub emin: Option<f64>,
    pub emax: Option<f64>,
    pub samples: Option<usize>,
    pub lambdas: Option<Vec<f64>>,
    pub mode: Option<Mode>,
    pub with_semiclassical: Option<bool>,
    pub alpha_derivatives: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $(if $src.$f.is_some() { $dst.$f = $src.$f.clone(); })*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(mut self, flags: &RunConfig) -> Self {
        overlay!(self, flags; potential, hbar, tol, grid_points, nodes_per_wavelength, xmax_factor,
            bc, bc_order, format, out, jobs, levels, method, kmax, terminant, energy, emin, emax,
            samples, lambdas, mode, with_semiclassical, alpha_derivatives);
        self
    }

    /// Fills defaults and validates.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let spec = self.potential.clone().unwrap_or_else(|| "quartic".into());
        let hbar = self.hbar.unwrap_or(1.0);
        let potential = parse_potential(&spec)?
            .with_hbar(hbar)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let defaults = GridSpec::default();
        let grid = GridSpec {
            nodes_per_wavelength: self.nodes_per_wavelength.unwrap_or(defaults.nodes_per_wavelength),
            min_well_cells: self.grid_points.unwrap_or(defaults.min_well_cells),
            xmax_factor: self.xmax_factor.unwrap_or(defaults.xmax_factor),
        };
        let settings = SolverSettings {
            tol: self.tol.unwrap_or(1e-12),
            grid,
            bc_method: self.bc.unwrap_or(Bc::Series).into(),
            bc_order: self.bc_order.unwrap_or(10),
            ..SolverSettings::default()
        };
        positive("tol", settings.tol)?;
        positive("xmax-factor", grid.xmax_factor)?;
        positive("nodes-per-wavelength", grid.nodes_per_wavelength)?;
        if grid.min_well_cells < 10 {
            return Err(ConfigError::Invalid("grid-points must be at least 10".into()));
        }
        let kmax = self.kmax.unwrap_or(3);
        if kmax == 0 {
            return Err(ConfigError::Invalid("kmax must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::Invalid("jobs must be at least 1".into()));
        }
        let levels = parse_levels(self.levels.as_deref().unwrap_or("0"))?;
        Ok(Resolved {
            potential_spec: spec,
            potential,
            hbar,
            settings,
            format: self.format.unwrap_or(Format::Json),
            out: self.out.clone(),
            jobs: self.jobs,
            levels,
            method: self.method.unwrap_or(Method::Qlm),
            kmax,
            terminant: self.terminant.unwrap_or(TerminantArg::Stieltjes),
            energy: self.energy,
            emin: self.emin,
            emax: self.emax,
            samples: self.samples.unwrap_or(50),
            lambdas: self.lambdas.clone(),
            mode: self.mode.unwrap_or(Mode::Warm),
            with_semiclassical: self.with_semiclassical.unwrap_or(false),
            alpha_derivatives: self.alpha_derivatives.unwrap_or(false),
        })
    }
}

fn positive(name: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be positive, got {x}")))
    }
}

/// Fully resolved settings, embedded in every output document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    #[serde(rename = "potential")]
    pub potential_spec: String,
    #[serde(skip)]
    pub potential: SymmetricPotential,
    pub hbar: f64,
    pub settings: SolverSettings,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub levels: Vec<usize>,
    pub method: Method,
    pub kmax: usize,
    pub terminant: TerminantArg,
    pub energy: Option<f64>,
    pub emin: Option<f64>,
    pub emax: Option<f64>,
    pub samples: usize,
    pub lambdas: Option<Vec<f64>>,
    pub mode: Mode,
    pub with_semiclassical: bool,
    pub alpha_derivatives: bool,
}

/// Named oscillators or `2m:c` coefficient lists such as `2:0.5,10:500`.
pub fn parse_potential(spec: &str) -> Result<SymmetricPotential, ConfigError> {
    let named = match spec.trim() {
        "harmonic" => Some(SymmetricPotential::harmonic()),
        "quartic" => Some(SymmetricPotential::quartic()),
        "sextic" => Some(SymmetricPotential::sextic()),
        "octic" => Some(SymmetricPotential::octic()),
        _ => None,
    };
    if let Some(v) = named {
        return Ok(v);
    }
    if let Some(rest) = spec.trim().strip_prefix("decadic:") {
        let lambda: f64 = rest
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("bad coupling in {spec:?}")))?;
        return SymmetricPotential::decadic(lambda).map_err(|e| ConfigError::Invalid(e.to_string()));
    }
    spec.parse().map_err(|e: qphase::Error| ConfigError::Invalid(e.to_string()))
}

/// `3`, `0-5` or `0,2,7-9`.
pub fn parse_levels(spec: &str) -> Result<Vec<usize>, ConfigError> {
    let bad = || ConfigError::Invalid(format!("bad level list {spec:?}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if b < a {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}
