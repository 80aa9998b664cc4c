//! Serialization: fixed-schema CSVs (17 significant digits, `\n` newlines,
//! locale-independent) and the JSON manifest that makes every product
//! reproducible. A manifest stores the fully resolved configuration, the
//! command, the code version, and every derived stream seed — and contains
//! no timestamps, so re-running it regenerates each CSV bit-exactly.

use serde::{Deserialize, Serialize};
use std::path::Path;

use scarsim_core::cr_engine::CoeffRow;
use scarsim_core::experiments::{EnsembleResult, SampleOutcome, ScanResult, SpectrumScatter};
use scarsim_core::floquet::TrajectoryRow;

use crate::config::RunConfig;
use crate::{CliError, CliResult};

pub const TRAJECTORY_HEADER: &str = "t_ns,step,fidelity,obs,s_vn,s_renyi2";
pub const SPECTRUM_HEADER: &str = "quasienergy,unwound_energy,s_vn_over_page,scar_overlap";
pub const COEFFS_HEADER: &str =
    "variant,site_class,name,eq6_value_MHz,table1_value_MHz,rel_dev,verdict";
pub const NOISE_SUMMARY_HEADER: &str = "r,n_samples,\
scar_fidelity_mean,scar_fidelity_std,scar_obs_mean,scar_obs_std,\
scar_svn_over_page_mean,scar_svn_over_page_std,\
deformed_fidelity_mean,deformed_fidelity_std,deformed_obs_mean,deformed_obs_std,\
deformed_svn_over_page_mean,deformed_svn_over_page_std";
pub const NOISE_SAMPLES_HEADER: &str = "r_index,r,sample_index,seed,\
scar_fidelity,scar_obs,scar_s_vn,scar_s_renyi2,scar_svn_over_page,\
deformed_fidelity,deformed_obs,deformed_s_vn,deformed_s_renyi2,deformed_svn_over_page";
pub const SCAN_HEADER: &str = "t_step_ns,steps,scar_obs,deformed_obs";

/// 17 significant digits — enough to round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Validation(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r.t_ns),
            r.step,
            fmt_f64(r.fidelity),
            fmt_f64(r.obs),
            fmt_f64(r.s_vn),
            fmt_f64(r.s_renyi2),
        ));
    }
    out
}

pub fn spectrum_csv(scatter: &SpectrumScatter) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for r in &scatter.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(r.quasienergy),
            fmt_f64(r.unwound_energy),
            fmt_f64(r.s_vn_over_page),
            fmt_f64(r.scar_overlap),
        ));
    }
    out
}

pub fn coeffs_csv(rows: &[CoeffRow]) -> String {
    let mut out = String::from(COEFFS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.variant.name(),
            r.site_class,
            r.name,
            fmt_f64(r.eq6_value_mhz),
            fmt_f64(r.table_value_mhz),
            fmt_f64(r.rel_dev),
            r.verdict,
        ));
    }
    out
}

pub fn noise_summary_csv(result: &EnsembleResult) -> String {
    let mut out = String::from(NOISE_SUMMARY_HEADER);
    out.push('\n');
    for s in &result.summary {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(s.r),
            s.n_samples,
            fmt_f64(s.scar.fidelity.mean),
            fmt_f64(s.scar.fidelity.std),
            fmt_f64(s.scar.obs.mean),
            fmt_f64(s.scar.obs.std),
            fmt_f64(s.scar.svn_over_page.mean),
            fmt_f64(s.scar.svn_over_page.std),
            fmt_f64(s.deformed.fidelity.mean),
            fmt_f64(s.deformed.fidelity.std),
            fmt_f64(s.deformed.obs.mean),
            fmt_f64(s.deformed.obs.std),
            fmt_f64(s.deformed.svn_over_page.mean),
            fmt_f64(s.deformed.svn_over_page.std),
        ));
    }
    out
}

pub fn noise_samples_csv(result: &EnsembleResult) -> String {
    let mut out = String::from(NOISE_SAMPLES_HEADER);
    out.push('\n');
    for o in &result.outcomes {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            o.r_index,
            fmt_f64(o.r),
            o.sample_index,
            o.seed,
            fmt_f64(o.scar.fidelity),
            fmt_f64(o.scar.obs),
            fmt_f64(o.scar.s_vn),
            fmt_f64(o.scar.s_renyi2),
            fmt_f64(o.scar.svn_over_page),
            fmt_f64(o.deformed.fidelity),
            fmt_f64(o.deformed.obs),
            fmt_f64(o.deformed.s_vn),
            fmt_f64(o.deformed.s_renyi2),
            fmt_f64(o.deformed.svn_over_page),
        ));
    }
    out
}

pub fn scan_csv(result: &ScanResult) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(r.t_step_ns),
            r.steps,
            fmt_f64(r.scar_obs),
            fmt_f64(r.deformed_obs),
        ));
    }
    out
}

/// One derived stream seed, as recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub r_index: usize,
    pub r: f64,
    pub sample_index: usize,
    pub seed: u64,
}

impl From<&SampleOutcome> for SeedRecord {
    fn from(o: &SampleOutcome) -> Self {
        Self {
            r_index: o.r_index,
            r: o.r,
            sample_index: o.sample_index,
            seed: o.seed,
        }
    }
}

/// Everything needed to regenerate a product bit-exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub seeds: Vec<SeedRecord>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(
        command: &str,
        config: &RunConfig,
        seeds: Vec<SeedRecord>,
        outputs: Vec<String>,
    ) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            seeds,
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Validation(format!("manifest serialization: {e}")))?;
        text.push('\n');
        write_text(path, &text)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("manifest parse error: {e}")))
    }
}
