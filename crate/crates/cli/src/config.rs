//! Run configuration: one TOML or JSON file with a strict schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use squeezeline::geometry::{bending_angle, CurvatureProfile, ProfileSpec, ScalingFamily};
use squeezeline::quadrature::GridSpec;
use squeezeline::scaled::ProbeGrid;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    #[serde(default = "default_scaling")]
    pub scaling: ScalingFamily<f64>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

fn default_scaling() -> ScalingFamily<f64> {
    ScalingFamily::unperturbed()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Gauss–Legendre panels per smooth segment of the potential.
    pub panels: usize,
    /// Nodes per panel.
    pub nodes: usize,
    pub ode_tol: f64,
    /// Shooting tolerance on the normalized right-tail slope.
    pub resonance_tol: f64,
    /// Birman–Schwinger tolerance on `|μ + 1|`.
    pub bs_tol: f64,
    /// Cross-method tolerance for the coupling constants.
    pub constants_tol: f64,
    pub probe_grid: Vec<f64>,
    pub eps_list: Vec<f64>,
    /// `ε` values for the expansion probes.
    pub probe_eps: Vec<f64>,
    /// Spectral parameter `[Re k, Im k]`.
    pub k: [f64; 2],
    /// Real momenta for the scattering table.
    pub k_grid: Vec<f64>,
}

impl Default for Numerics {
    fn default() -> Self {
        let grid = GridSpec::default();
        Self {
            panels: grid.panels_per_segment,
            nodes: grid.nodes_per_panel,
            ode_tol: 1e-11,
            resonance_tol: 1e-8,
            bs_tol: 1e-6,
            constants_tol: 1e-6,
            probe_grid: ProbeGrid::<f64>::default().points,
            eps_list: vec![0.2, 0.1, 0.05, 0.025],
            probe_eps: vec![0.02, 0.01, 0.005],
            k: [0.0, 1.0],
            k_grid: vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    /// Total bending angle; the profile is rescaled to the requested angle.
    Theta,
    /// Multiplier of the curvature profile.
    Amplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub parameter: ScanParameter,
    pub range: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive (got {x})")))
    }
}

pub fn check_eps_list(name: &str, eps: &[f64]) -> Result<(), CliError> {
    if eps.is_empty() {
        return Err(CliError::Config(format!("{name} must not be empty")));
    }
    for &e in eps {
        positive(name, e)?;
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config(format!("{name} must be strictly decreasing")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            _ => toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.profile
            .to_profile::<f64>()
            .map_err(|e| CliError::Config(format!("profile: {e}")))?;
        self.scaling
            .validate()
            .map_err(|e| CliError::Config(format!("scaling: {e}")))?;
        let n = &self.numerics;
        if n.panels == 0 || n.nodes < 2 {
            return Err(CliError::Config("numerics.panels must be >= 1 and numerics.nodes >= 2".into()));
        }
        positive("numerics.ode_tol", n.ode_tol)?;
        positive("numerics.resonance_tol", n.resonance_tol)?;
        positive("numerics.bs_tol", n.bs_tol)?;
        positive("numerics.constants_tol", n.constants_tol)?;
        check_eps_list("numerics.eps_list", &n.eps_list)?;
        check_eps_list("numerics.probe_eps", &n.probe_eps)?;
        if n.probe_grid.is_empty() || n.probe_grid.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("numerics.probe_grid must hold finite points".into()));
        }
        positive("numerics.k[1] (Im k)", n.k[1])?;
        if n.k_grid.iter().any(|&k| !(k.is_finite() && k >= 0.0)) {
            return Err(CliError::Config("numerics.k_grid entries must be real and >= 0".into()));
        }
        if let Some(scan) = &self.scan {
            let [lo, hi] = scan.range;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CliError::Config("scan.range must satisfy lo < hi".into()));
            }
            if scan.samples < 2 {
                return Err(CliError::Config("scan.samples must be >= 2".into()));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            panels_per_segment: self.numerics.panels,
            nodes_per_panel: self.numerics.nodes,
        }
    }

    pub fn base_profile(&self) -> Result<CurvatureProfile<f64>, CliError> {
        self.profile
            .to_profile()
            .map_err(|e| CliError::Config(format!("profile: {e}")))
    }

    /// Profile at scan parameter `p`.
    pub fn profile_at(&self, parameter: ScanParameter, p: f64) -> squeezeline::Result<CurvatureProfile<f64>> {
        let base = self.profile.to_profile::<f64>()?;
        match parameter {
            ScanParameter::Amplitude => Ok(base.scaled(p)),
            ScanParameter::Theta => {
                let angle = bending_angle(&base);
                if angle == 0.0 {
                    return Err(squeezeline::Error::InvalidProfile(
                        "theta scan needs a profile with nonzero bending angle".into(),
                    ));
                }
                Ok(base.scaled(p / angle))
            }
        }
    }
}
