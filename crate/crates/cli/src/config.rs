//! Run configuration: a versioned TOML schema whose empty-file resolution
//! reproduces the reference device setting (J/2π = 3.8 MHz, Ω/2π = 50 MHz,
//! |α|/2π = 330 MHz, ω/2π = (5.114, 4.914, 5.014) GHz, L = 12, T = 16 ns).
//! Unknown keys are errors, not warnings, and every consumer works from the
//! fully resolved struct so a manifest round-trips bit-exactly.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use scarsim_core::cr_engine::{CoeffSource, DeviceParams};
use scarsim_core::floquet::Propagator;
use scarsim_core::scar_models::Variant;
use scarsim_core::units::{ghz, mhz};

use crate::{CliError, CliResult};

/// Only schema this build reads.
pub const SCHEMA_VERSION: u32 = 1;

/// Device block, in the experiment's natural units. `alpha_MHz` is the
/// anharmonicity magnitude; the engine works with the (negative) signed
/// value, so both `330` and `-330` denote the same device.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    #[serde(rename = "J_MHz")]
    pub j_mhz: f64,
    #[serde(rename = "Omega_MHz")]
    pub omega_mhz: f64,
    #[serde(rename = "alpha_MHz")]
    pub alpha_mhz: f64,
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: [f64; 3],
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            j_mhz: 3.8,
            omega_mhz: 50.0,
            alpha_mhz: 330.0,
            omega_ghz: [5.114, 4.914, 5.014],
        }
    }
}

/// Controlled-noise ensemble block.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Error strengths; a 0 entry runs a single noise-free sample.
    pub r_list: Vec<f64>,
    /// Samples per nonzero error strength.
    pub samples: usize,
    /// Measurement time in periods; 0 selects the per-family default
    /// (30 for x-polarized, 40 for cluster).
    pub t_meas: usize,
    /// `trotter` (exact gate sequence) or `effective_order1_dense`.
    pub propagator: Propagator,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            r_list: vec![0.0, 0.02, 0.05, 0.07, 0.1],
            samples: 500,
            t_meas: 0,
            propagator: Propagator::Trotter,
        }
    }
}

/// Trotter-resolution scan block (log-spaced period grid at fixed
/// physical time).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub t_total_ns: f64,
    #[serde(rename = "T_min_ns")]
    pub t_min_ns: f64,
    #[serde(rename = "T_max_ns")]
    pub t_max_ns: f64,
    pub points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            t_total_ns: 5000.0,
            t_min_ns: 4.0,
            t_max_ns: 1000.0,
            points: 24,
        }
    }
}

/// Top-level run configuration. All keys are optional; defaults reproduce
/// the reference setting.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    /// `x-polarized` or `cluster` (`ghz` parses but is rejected by the
    /// dynamics layer, which has no drive schedule for it).
    pub variant: Variant,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T_ns")]
    pub t_ns: f64,
    /// Periods to evolve in `quench`.
    pub n_steps: usize,
    /// Sampling cadence for `quench` (record every n-th period).
    pub cadence: usize,
    /// `table` (built-in reference calibration) or `eq6` (literal
    /// perturbative formulas).
    pub coefficient_source: CoeffSource,
    pub master_seed: u64,
    /// Where CSV/JSON/SVG products land; flag and SCARSIM_OUTPUT_DIR can
    /// override.
    pub output_dir: Option<PathBuf>,
    /// Entropy cut; 0 selects the half chain.
    pub cut: usize,
    /// Site carrying the sigma^y deformation of the probe state.
    pub deform_site: usize,
    pub device: DeviceConfig,
    pub noise: NoiseConfig,
    pub scan: ScanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            variant: Variant::XPolarized,
            l: 12,
            t_ns: 16.0,
            n_steps: 60,
            cadence: 1,
            coefficient_source: CoeffSource::Table,
            master_seed: 0,
            output_dir: None,
            cut: 0,
            deform_site: 1,
            device: DeviceConfig::default(),
            noise: NoiseConfig::default(),
            scan: ScanConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses a TOML file; an empty file yields the full defaults.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    fn check_schema(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (this build reads version {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    /// Builds the engine-facing device parameters (rad/ns internally) and
    /// validates them. The anharmonicity is stored as a negative number
    /// regardless of the sign the config used for its magnitude.
    pub fn device_params(&self) -> CliResult<DeviceParams> {
        let d = &self.device;
        let params = DeviceParams {
            j: mhz(d.j_mhz),
            omega: mhz(d.omega_mhz),
            alpha: -mhz(d.alpha_mhz.abs()),
            omegas: [
                ghz(d.omega_ghz[0]),
                ghz(d.omega_ghz[1]),
                ghz(d.omega_ghz[2]),
            ],
            l: self.l,
            t: self.t_ns,
        };
        params.validate()?;
        Ok(params)
    }

    /// Entropy cut with the half-chain default applied.
    pub fn resolved_cut(&self) -> usize {
        if self.cut == 0 {
            self.l / 2
        } else {
            self.cut
        }
    }
}

/// Flag-level overrides, applied on top of the file (or defaults). Kept as
/// strings at the edge so parse errors carry the offending token.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub variant: Option<String>,
    pub l: Option<usize>,
    pub t_ns: Option<f64>,
    pub n_steps: Option<usize>,
    pub cadence: Option<usize>,
    pub seed: Option<u64>,
    pub coeff_source: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub cut: Option<usize>,
    pub deform_site: Option<usize>,
    pub samples: Option<usize>,
    pub t_meas: Option<usize>,
    pub r_list: Option<String>,
    pub propagator: Option<String>,
    pub t_total_ns: Option<f64>,
    pub t_min_ns: Option<f64>,
    pub t_max_ns: Option<f64>,
    pub points: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        if let Some(v) = &self.variant {
            cfg.variant = v
                .parse::<Variant>()
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        if let Some(l) = self.l {
            cfg.l = l;
        }
        if let Some(t) = self.t_ns {
            cfg.t_ns = t;
        }
        if let Some(n) = self.n_steps {
            cfg.n_steps = n;
        }
        if let Some(c) = self.cadence {
            cfg.cadence = c;
        }
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(src) = &self.coeff_source {
            cfg.coefficient_source = src
                .parse::<CoeffSource>()
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = Some(dir.clone());
        }
        if let Some(c) = self.cut {
            cfg.cut = c;
        }
        if let Some(s) = self.deform_site {
            cfg.deform_site = s;
        }
        if let Some(n) = self.samples {
            cfg.noise.samples = n;
        }
        if let Some(t) = self.t_meas {
            cfg.noise.t_meas = t;
        }
        if let Some(list) = &self.r_list {
            cfg.noise.r_list = parse_r_list(list)?;
        }
        if let Some(p) = &self.propagator {
            cfg.noise.propagator = p
                .parse::<Propagator>()
                .map_err(|e| CliError::Validation(e.to_string()))?;
        }
        if let Some(t) = self.t_total_ns {
            cfg.scan.t_total_ns = t;
        }
        if let Some(t) = self.t_min_ns {
            cfg.scan.t_min_ns = t;
        }
        if let Some(t) = self.t_max_ns {
            cfg.scan.t_max_ns = t;
        }
        if let Some(p) = self.points {
            cfg.scan.points = p;
        }
        Ok(())
    }
}

fn parse_r_list(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad r value '{tok}' in --r-list")))
        })
        .collect()
}

/// Output directory priority: flag/config > SCARSIM_OUTPUT_DIR > `.`.
pub fn resolve_output_dir(cfg: &RunConfig) -> PathBuf {
    if let Some(dir) = &cfg.output_dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var("SCARSIM_OUTPUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}
