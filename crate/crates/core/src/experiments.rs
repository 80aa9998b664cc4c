//! The three detection protocols and the spectrum scatter.
//!
//! Every experiment contrasts the scar state with its locally deformed twin
//! (a single sigma^y applied to one site, which changes neither the average
//! energy nor the initial entanglement):
//!
//! * spectrum — the stroboscopic eigenmodes' half-chain entropy ratio
//!   S_vn/S_Page against unwound energy, with the scar-candidate mode (the
//!   one of maximal scar overlap) singled out;
//! * quench — paired stroboscopic trajectories from the scar and deformed
//!   initial states under one shared plan;
//! * controlled-noise ensemble — endpoint statistics over many coefficient
//!   perturbations (1 + r u) with per-sample derived seeds;
//! * Trotter-resolution scan — endpoint observable at fixed physical time
//!   as the period T sweeps a log grid.
//!
//! Observables are exact state-vector expectations of (1/L) sum sigma_i^x
//! or (1/L) sum sigma_i^z sigma_{i+1}^x sigma_{i+2}^z (periodic).

use crate::cr_engine::{CoeffSource, DeviceParams};
use crate::floquet::{
    evolve, floquet_modes, make_plan, NoiseSpec, Propagator, TrajectoryRow, TrotterPlan,
};
use crate::scar_models::{deform, scar_state, wrap_site, Variant};
use crate::seed::derive_stream_seed;
use crate::spin_ops::{
    kron_all, page_entropy, pauli_x, pauli_z, LocalOperator, OperatorSum, QubitState,
};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Site-averaged observable families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableKind {
    /// (1/L) sum_i sigma_i^x — the x-polarized family's order parameter.
    #[serde(rename = "x_mean")]
    XMean,
    /// (1/L) sum_i sigma_i^z sigma_{i+1}^x sigma_{i+2}^z — the cluster
    /// family's stabilizer average.
    #[serde(rename = "zxz_mean")]
    ZxzMean,
}

impl std::fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ObservableKind::XMean => "x_mean",
            ObservableKind::ZxzMean => "zxz_mean",
        })
    }
}

/// The observable each dynamical family is scored by: the scar state is an
/// exact +1 (x_mean) or -1 (zxz_mean) eigenstate of every term.
pub fn observable_for(variant: Variant) -> Result<ObservableKind> {
    match variant {
        Variant::XPolarized => Ok(ObservableKind::XMean),
        Variant::Cluster => Ok(ObservableKind::ZxzMean),
        Variant::Ghz => Err(Error::InvalidParameter(
            "the GHZ family has no dynamics observable".into(),
        )),
    }
}

/// Materializes the site-averaged observable on an L-site periodic chain.
pub fn observable(kind: ObservableKind, l: usize) -> Result<OperatorSum> {
    let mut sum = OperatorSum::new(l);
    let w = 1.0 / l as f64;
    match kind {
        ObservableKind::XMean => {
            for i in 1..=l {
                sum.push(w, LocalOperator::new(vec![i], pauli_x())?)?;
            }
        }
        ObservableKind::ZxzMean => {
            let zxz = kron_all(&[pauli_z().as_ref(), pauli_x().as_ref(), pauli_z().as_ref()]);
            for i in 1..=l {
                let sites = vec![i, wrap_site(i as i64 + 1, l), wrap_site(i as i64 + 2, l)];
                sum.push(w, LocalOperator::new(sites, zxz.clone())?)?;
            }
        }
    }
    Ok(sum)
}

/// Half-chain cut (the first L/2 sites form subsystem A).
pub fn half_cut(l: usize) -> usize {
    l / 2
}

/// Page entropy of the chain bipartitioned at `cut`.
pub fn page_for_cut(l: usize, cut: usize) -> f64 {
    page_entropy(1usize << cut, 1usize << (l - cut))
}

// ---------------------------------------------------------------------------
// spectrum scatter
// ---------------------------------------------------------------------------

/// One stroboscopic mode of the scatter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumRow {
    /// Quasienergy in (-pi/T, pi/T], rad/ns.
    pub quasienergy: f64,
    /// Branch-selected energy, rad/ns.
    pub unwound_energy: f64,
    /// Half-chain S_vn divided by the Page entropy.
    pub s_vn_over_page: f64,
    /// |<scar|mode>|^2.
    pub scar_overlap: f64,
}

/// The full mode scatter plus derived summary markers.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumScatter {
    pub rows: Vec<SpectrumRow>,
    /// Index (into rows) of the mode with maximal scar overlap.
    pub scar_candidate: usize,
    /// That mode's overlap and entropy ratio.
    pub candidate_overlap: f64,
    pub candidate_ratio: f64,
    /// Median entropy ratio over all modes.
    pub median_ratio: f64,
    /// The exact scar state's own entropy ratio at the same cut.
    pub exact_scar_ratio: f64,
    /// Page entropy at the cut (nats).
    pub page: f64,
    pub cut: usize,
}

/// Diagonalizes the plan's period unitary and scores every mode.
pub fn run_spectrum(plan: &TrotterPlan, cut: usize) -> Result<SpectrumScatter> {
    let modes = floquet_modes(plan)?;
    let page = page_for_cut(plan.l, cut);
    let mut rows = Vec::with_capacity(modes.len());
    let mut scar_candidate = 0usize;
    for (k, mode) in modes.iter().enumerate() {
        let (s_vn, _) = mode.state.entropies(cut)?;
        rows.push(SpectrumRow {
            quasienergy: mode.quasienergy,
            unwound_energy: mode.unwound_energy,
            s_vn_over_page: s_vn / page,
            scar_overlap: mode.scar_overlap,
        });
        if mode.scar_overlap > modes[scar_candidate].scar_overlap {
            scar_candidate = k;
        }
    }
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.s_vn_over_page).collect();
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    let median_ratio = if n % 2 == 1 {
        ratios[n / 2]
    } else {
        0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
    };
    let scar = scar_state(plan.variant, plan.l)?;
    let (scar_vn, _) = scar.entropies(cut)?;
    Ok(SpectrumScatter {
        candidate_overlap: rows[scar_candidate].scar_overlap,
        candidate_ratio: rows[scar_candidate].s_vn_over_page,
        rows,
        scar_candidate,
        median_ratio,
        exact_scar_ratio: scar_vn / page,
        page,
        cut,
    })
}

// ---------------------------------------------------------------------------
// quench
// ---------------------------------------------------------------------------

/// Paired stroboscopic trajectories sharing one plan.
#[derive(Debug, Clone, Serialize)]
pub struct QuenchResult {
    pub scar: Vec<TrajectoryRow>,
    pub deformed: Vec<TrajectoryRow>,
    /// Page entropy at the cut used for the trajectory entropies.
    pub page: f64,
    pub cut: usize,
    pub deform_site: usize,
}

/// Evolves the scar state and its sigma^y-deformed twin under the same plan,
/// recording fidelity, the variant observable, and cut entropies.
pub fn run_quench(
    plan: &TrotterPlan,
    propagator: Propagator,
    n_steps: usize,
    cadence: usize,
    deform_site: usize,
    cut: usize,
) -> Result<QuenchResult> {
    let obs = observable(observable_for(plan.variant)?, plan.l)?;
    let scar0 = scar_state(plan.variant, plan.l)?;
    let deformed0 = deform(&scar0, deform_site)?;
    let scar = evolve(plan, propagator, &scar0, n_steps, cadence, &obs, cut)?;
    let deformed = evolve(plan, propagator, &deformed0, n_steps, cadence, &obs, cut)?;
    Ok(QuenchResult {
        scar,
        deformed,
        page: page_for_cut(plan.l, cut),
        cut,
        deform_site,
    })
}

// ---------------------------------------------------------------------------
// controlled-noise ensemble
// ---------------------------------------------------------------------------

/// Endpoint measurements of one trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EndpointMeasures {
    pub fidelity: f64,
    pub obs: f64,
    pub s_vn: f64,
    pub s_renyi2: f64,
    pub svn_over_page: f64,
}

fn endpoint(row: &TrajectoryRow, page: f64) -> EndpointMeasures {
    EndpointMeasures {
        fidelity: row.fidelity,
        obs: row.obs,
        s_vn: row.s_vn,
        s_renyi2: row.s_renyi2,
        svn_over_page: row.s_vn / page,
    }
}

/// One noise realization: both initial states under the identical perturbed
/// plan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SampleOutcome {
    pub r_index: usize,
    pub r: f64,
    pub sample_index: usize,
    /// Derived per-realization stream seed.
    pub seed: u64,
    pub scar: EndpointMeasures,
    pub deformed: EndpointMeasures,
}

/// Mean and (sample, ddof = 1) standard deviation; std is exactly 0 for a
/// single sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> MeanStd {
    let n = values.clone().count();
    if n == 0 {
        return MeanStd {
            mean: f64::NAN,
            std: f64::NAN,
        };
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return MeanStd { mean, std: 0.0 };
    }
    let ss = values.map(|v| (v - mean) * (v - mean)).sum::<f64>();
    MeanStd {
        mean,
        std: (ss / (n - 1) as f64).sqrt(),
    }
}

/// Per-state endpoint statistics at one error strength.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroupStats {
    pub fidelity: MeanStd,
    pub obs: MeanStd,
    pub svn_over_page: MeanStd,
}

/// Aggregated statistics for one error strength.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RSummary {
    pub r: f64,
    pub n_samples: usize,
    pub scar: GroupStats,
    pub deformed: GroupStats,
}

/// Configuration for the controlled-noise ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseEnsembleConfig {
    pub variant: Variant,
    pub params: DeviceParams,
    pub source: CoeffSource,
    pub propagator: Propagator,
    /// Error strengths; 0 entries run a single (noise-free) sample.
    pub r_list: Vec<f64>,
    /// Samples per nonzero error strength.
    pub samples: usize,
    /// Measurement time in periods; 0 selects the variant default
    /// (30 for x-polarized, 40 for cluster).
    pub t_meas_steps: usize,
    pub master_seed: u64,
    pub deform_site: usize,
    /// Entropy cut; 0 selects the half chain.
    pub cut: usize,
}

impl NoiseEnsembleConfig {
    pub fn new(variant: Variant, params: DeviceParams) -> Self {
        Self {
            variant,
            params,
            source: CoeffSource::Table,
            propagator: Propagator::Trotter,
            r_list: default_r_list(),
            samples: 500,
            t_meas_steps: 0,
            master_seed: 0,
            deform_site: 1,
            cut: 0,
        }
    }

    pub fn resolved_t_meas(&self) -> usize {
        if self.t_meas_steps == 0 {
            default_t_meas_steps(self.variant)
        } else {
            self.t_meas_steps
        }
    }

    pub fn resolved_cut(&self) -> usize {
        if self.cut == 0 {
            half_cut(self.params.l)
        } else {
            self.cut
        }
    }
}

/// Reference error strengths.
pub fn default_r_list() -> Vec<f64> {
    vec![0.0, 0.02, 0.05, 0.07, 0.1]
}

/// Default endpoint measurement time in periods: the x-polarized ensemble is
/// sampled at 30T, the cluster ensemble at 40T.
pub fn default_t_meas_steps(variant: Variant) -> usize {
    match variant {
        Variant::Cluster => 40,
        _ => 30,
    }
}

/// Noise-stream tag for a variant (part of the documented seed derivation).
pub fn noise_tag(variant: Variant) -> String {
    format!("noise:{}", variant.name())
}

/// The derived stream seed of one (r index, sample index) realization.
pub fn ensemble_sample_seed(
    master_seed: u64,
    variant: Variant,
    r_index: usize,
    sample_index: usize,
) -> u64 {
    derive_stream_seed(
        master_seed,
        &noise_tag(variant),
        r_index as u64,
        sample_index as u64,
    )
}

/// Full ensemble output: every realization plus per-r aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub variant: Variant,
    pub r_list: Vec<f64>,
    pub samples: usize,
    /// Resolved measurement time (periods).
    pub t_meas_steps: usize,
    pub cut: usize,
    pub page: f64,
    pub master_seed: u64,
    pub outcomes: Vec<SampleOutcome>,
    pub summary: Vec<RSummary>,
}

/// Runs the controlled-noise ensemble: for every error strength and sample, a
/// fresh plan is drawn from the derived stream seed and both initial states
/// are evolved to the measurement time under it. Samples run in parallel;
/// aggregation is in stable (r, sample) order.
pub fn run_noise_ensemble(cfg: &NoiseEnsembleConfig) -> Result<EnsembleResult> {
    if cfg.samples < 1 {
        return Err(Error::InvalidParameter(
            "ensemble needs at least 1 sample per error strength".into(),
        ));
    }
    cfg.params.validate()?;
    let t_meas = cfg.resolved_t_meas();
    let cut = cfg.resolved_cut();
    let page = page_for_cut(cfg.params.l, cut);
    let obs = observable(observable_for(cfg.variant)?, cfg.params.l)?;
    let scar0 = scar_state(cfg.variant, cfg.params.l)?;
    let deformed0 = deform(&scar0, cfg.deform_site)?;

    let mut jobs = Vec::new();
    for (r_index, &r) in cfg.r_list.iter().enumerate() {
        if r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "error strength r must be >= 0, got {r}"
            )));
        }
        let n = if r == 0.0 { 1 } else { cfg.samples };
        for sample_index in 0..n {
            jobs.push((r_index, r, sample_index));
        }
    }

    let outcomes: Vec<SampleOutcome> = jobs
        .into_par_iter()
        .map(|(r_index, r, sample_index)| -> Result<SampleOutcome> {
            let seed = ensemble_sample_seed(cfg.master_seed, cfg.variant, r_index, sample_index);
            let plan = make_plan(
                cfg.variant,
                &cfg.params,
                cfg.source,
                Some(NoiseSpec { r, seed }),
            )?;
            let scar_rows = evolve(
                &plan,
                cfg.propagator,
                &scar0,
                t_meas,
                t_meas.max(1),
                &obs,
                cut,
            )?;
            let def_rows = evolve(
                &plan,
                cfg.propagator,
                &deformed0,
                t_meas,
                t_meas.max(1),
                &obs,
                cut,
            )?;
            Ok(SampleOutcome {
                r_index,
                r,
                sample_index,
                seed,
                scar: endpoint(scar_rows.last().expect("nonempty trajectory"), page),
                deformed: endpoint(def_rows.last().expect("nonempty trajectory"), page),
            })
        })
        .collect::<Result<_>>()?;

    let mut outcomes = outcomes;
    outcomes.sort_by_key(|o| (o.r_index, o.sample_index));

    let mut summary = Vec::with_capacity(cfg.r_list.len());
    for (r_index, &r) in cfg.r_list.iter().enumerate() {
        let group: Vec<&SampleOutcome> = outcomes.iter().filter(|o| o.r_index == r_index).collect();
        let stats = |pick: fn(&SampleOutcome) -> EndpointMeasures| GroupStats {
            fidelity: mean_std(group.iter().map(|o| pick(o).fidelity)),
            obs: mean_std(group.iter().map(|o| pick(o).obs)),
            svn_over_page: mean_std(group.iter().map(|o| pick(o).svn_over_page)),
        };
        summary.push(RSummary {
            r,
            n_samples: group.len(),
            scar: stats(|o| o.scar),
            deformed: stats(|o| o.deformed),
        });
    }

    Ok(EnsembleResult {
        variant: cfg.variant,
        r_list: cfg.r_list.clone(),
        samples: cfg.samples,
        t_meas_steps: t_meas,
        cut,
        page,
        master_seed: cfg.master_seed,
        outcomes,
        summary,
    })
}

// ---------------------------------------------------------------------------
// Trotter-resolution scan
// ---------------------------------------------------------------------------

/// One grid point of the resolution scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    /// Trotter period of this point (ns).
    pub t_step_ns: f64,
    /// round(t_total / T) periods.
    pub steps: usize,
    pub scar_obs: f64,
    pub deformed_obs: f64,
}

/// Endpoint observables at fixed physical time across the period grid.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub t_total_ns: f64,
    pub rows: Vec<ScanRow>,
}

/// Configuration for the resolution scan; the grid is log-spaced.
#[derive(Debug, Clone, Serialize)]
pub struct TrotterScanConfig {
    pub variant: Variant,
    pub params: DeviceParams,
    pub source: CoeffSource,
    pub t_total_ns: f64,
    pub t_min_ns: f64,
    pub t_max_ns: f64,
    pub points: usize,
    pub deform_site: usize,
}

impl TrotterScanConfig {
    pub fn new(variant: Variant, params: DeviceParams) -> Self {
        Self {
            variant,
            params,
            source: CoeffSource::Table,
            t_total_ns: 5000.0,
            t_min_ns: 4.0,
            t_max_ns: 1000.0,
            points: 24,
            deform_site: 1,
        }
    }
}

/// Strictly increasing log-spaced grid.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < min < max and at least 2 points, got [{min}, {max}] x {points}"
        )));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Runs the fixed-physical-time scan with the exact Trotter propagator,
/// recording the endpoint observable of both states at every period.
pub fn run_trotter_scan(cfg: &TrotterScanConfig) -> Result<ScanResult> {
    let grid = log_grid(cfg.t_min_ns, cfg.t_max_ns, cfg.points)?;
    let obs = observable(observable_for(cfg.variant)?, cfg.params.l)?;
    let scar0 = scar_state(cfg.variant, cfg.params.l)?;
    let deformed0 = deform(&scar0, cfg.deform_site)?;
    let cut = half_cut(cfg.params.l);

    let rows: Vec<ScanRow> = grid
        .par_iter()
        .map(|&t_step| -> Result<ScanRow> {
            let params = DeviceParams {
                t: t_step,
                ..cfg.params
            };
            let plan = make_plan(cfg.variant, &params, cfg.source, None)?;
            let steps = (cfg.t_total_ns / t_step).round() as usize;
            let cadence = steps.max(1);
            let scar_rows = evolve(
                &plan,
                Propagator::Trotter,
                &scar0,
                steps,
                cadence,
                &obs,
                cut,
            )?;
            let def_rows = evolve(
                &plan,
                Propagator::Trotter,
                &deformed0,
                steps,
                cadence,
                &obs,
                cut,
            )?;
            Ok(ScanRow {
                t_step_ns: t_step,
                steps,
                scar_obs: scar_rows.last().expect("nonempty").obs,
                deformed_obs: def_rows.last().expect("nonempty").obs,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ScanResult {
        t_total_ns: cfg.t_total_ns,
        rows,
    })
}

// ---------------------------------------------------------------------------
// spectral-range estimate (for energy-neutrality assertions)
// ---------------------------------------------------------------------------

/// Lower bound on the spectral range (lambda_max - lambda_min) of a Hermitian
/// operator sum via shifted power iterations with Rayleigh-quotient readout.
pub fn spectral_range_lower(h: &OperatorSum, iters: usize, seed: u64) -> Result<f64> {
    let mu = h.spectral_norm_lower(iters, seed)? * 1.05 + 1e-12;
    let extreme = |sign: f64, seed: u64| -> Result<f64> {
        let mut rng = crate::seed::SplitMix64::new(seed);
        let mut v = QubitState::random(h.l(), &mut rng);
        for _ in 0..iters {
            // v <- normalize(mu v + sign H v)
            let hv = h.apply(&v)?;
            let amps = hv.amps().to_vec();
            for (a, &b) in v.amps_mut().iter_mut().zip(amps.iter()) {
                *a = *a * mu + b * sign;
            }
            v.normalize();
        }
        let hv = h.apply(&v)?;
        let mut rayleigh = 0.0;
        for (a, b) in v.amps().iter().zip(hv.amps()) {
            rayleigh += (a.conj() * b).re;
        }
        Ok(rayleigh)
    };
    let top = extreme(1.0, seed ^ 0x517c_c1b7_2722_0a95)?;
    let bottom = extreme(-1.0, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok(top - bottom)
}
