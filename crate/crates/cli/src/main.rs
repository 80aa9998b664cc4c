//! `scarsim` — command-line driver for the transmon scar-chain simulator.
//!
//! Subcommands map 1:1 onto the library's experiments: `coeffs` (coefficient
//! comparison table), `verify` (annihilation and oracle suite), `spectrum`
//! (Floquet-mode scatter), `quench` (paired scar/deformed trajectories),
//! `noise` (controlled-noise ensembles), `trotter-scan` (fixed-physical-time
//! resolution scan), and `plot` (CSV -> SVG). Progress goes to stderr, data
//! summaries to stdout, products to the output directory.
//!
//! Exit codes: 0 success; 1 validation failure (flags, config, parameter
//! combinations, i/o); 2 numeric failure (non-convergent eigendecomposition,
//! near-resonant denominators, failed verification residuals).

mod config;
mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand};

use scarsim_core::cr_engine::{coefficient_report, report_tolerance};
use scarsim_core::experiments::{
    observable, observable_for, run_noise_ensemble, run_quench, run_spectrum, run_trotter_scan,
    spectral_range_lower, NoiseEnsembleConfig, TrotterScanConfig,
};
use scarsim_core::floquet::{average_hamiltonian, make_plan};
use scarsim_core::scar_models::{
    all_annihilators, deform, parent_hamiltonian, scar_state, verify_annihilation,
    ParentHamiltonianSpec, Variant,
};
use scarsim_core::seed::SplitMix64;

use config::{resolve_output_dir, Overrides, RunConfig};
use output::{Manifest, SeedRecord};
use plot::{Plot, Series, SeriesKind, PALETTE};

/// CLI-level error, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config, parameters, or i/o -> exit 1.
    #[error("{0}")]
    Validation(String),
    /// Numeric machinery failed or a verification check missed -> exit 2.
    #[error("{0}")]
    Numeric(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<scarsim_core::Error> for CliError {
    fn from(e: scarsim_core::Error) -> Self {
        use scarsim_core::Error as E;
        match &e {
            E::Eigen(_) | E::NearResonance { .. } | E::NoPositiveRoot(..) => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "scarsim",
    version,
    about = "Simulator for single quantum many-body scars on driven transmon chains",
    after_help = "Exit codes: 0 success, 1 validation failure, 2 numeric failure."
)]
struct Cli {
    /// TOML config file (empty file = reference defaults)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV/JSON/SVG products (also: SCARSIM_OUTPUT_DIR)
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads for ensembles and scans (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed for all derived noise streams
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Coefficient source driving the dynamics: table | eq6
    #[arg(long, global = true)]
    coeff_source: Option<String>,
    /// Scar family: x-polarized | cluster
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Chain length (L mod 3 = 0)
    #[arg(long, global = true)]
    l: Option<usize>,
    /// Trotter period in ns
    #[arg(long, global = true)]
    t_ns: Option<f64>,
    /// Re-run a previous product bit-exactly from its manifest
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare literal perturbative coefficients against the built-in
    /// reference calibration table (text + CSV)
    Coeffs,
    /// Run the annihilation and oracle suite; exits nonzero on failure
    Verify,
    /// Floquet-mode scatter: entropy ratio and scar overlap per mode
    Spectrum {
        /// Entropy cut (0 = half chain)
        #[arg(long)]
        cut: Option<usize>,
    },
    /// Paired quench: scar vs sigma^y-deformed twin under one plan
    Quench {
        /// Periods to evolve
        #[arg(long)]
        n_steps: Option<usize>,
        /// Record every n-th period
        #[arg(long)]
        cadence: Option<usize>,
        /// Site carrying the deformation
        #[arg(long)]
        deform_site: Option<usize>,
        /// Entropy cut (0 = half chain)
        #[arg(long)]
        cut: Option<usize>,
        /// trotter | effective_order1_dense
        #[arg(long)]
        propagator: Option<String>,
    },
    /// Controlled-noise ensembles over a list of error strengths
    Noise {
        /// Samples per nonzero error strength
        #[arg(long)]
        samples: Option<usize>,
        /// Measurement time in periods (0 = per-family default)
        #[arg(long)]
        t_meas: Option<usize>,
        /// Comma-separated error strengths, e.g. 0,0.02,0.05
        #[arg(long)]
        r_list: Option<String>,
        /// trotter | effective_order1_dense
        #[arg(long)]
        propagator: Option<String>,
        /// Site carrying the deformation
        #[arg(long)]
        deform_site: Option<usize>,
        /// Entropy cut (0 = half chain)
        #[arg(long)]
        cut: Option<usize>,
    },
    /// Endpoint observable vs Trotter period at fixed physical time
    TrotterScan {
        /// Total physical time in ns
        #[arg(long)]
        t_total_ns: Option<f64>,
        /// Smallest period in ns
        #[arg(long)]
        t_min_ns: Option<f64>,
        /// Largest period in ns
        #[arg(long)]
        t_max_ns: Option<f64>,
        /// Grid points (log-spaced)
        #[arg(long)]
        points: Option<usize>,
        /// Site carrying the deformation
        #[arg(long)]
        deform_site: Option<usize>,
    },
    /// Render experiment CSVs to a static SVG (kind inferred from header)
    Plot {
        /// Input CSV files (trajectory plots accept several)
        inputs: Vec<PathBuf>,
        /// Output SVG path (default: first input with .svg extension)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Verify => "verify",
            Command::Spectrum { .. } => "spectrum",
            Command::Quench { .. } => "quench",
            Command::Noise { .. } => "noise",
            Command::TrotterScan { .. } => "trotter-scan",
            Command::Plot { .. } => "plot",
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run() -> CliResult<()> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // flag/usage problems are validation failures (exit 1)
            return Err(CliError::Validation(e.to_string()));
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
    };

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }

    if let Some(manifest_path) = &cli.from_manifest {
        if cli.command.is_some() {
            return Err(CliError::Validation(
                "--from-manifest replaces the subcommand; pass one or the other".into(),
            ));
        }
        let manifest = Manifest::read(manifest_path)?;
        let mut cfg = manifest.config.clone();
        cfg.check_version_of_manifest(&manifest)?;
        if let Some(dir) = &cli.output_dir {
            cfg.output_dir = Some(dir.clone());
        }
        eprintln!(
            "re-running `{}` from {}",
            manifest.command,
            manifest_path.display()
        );
        return dispatch_by_name(&manifest.command, &cfg);
    }

    let Some(command) = cli.command else {
        let mut cmd = Cli::command();
        let help = cmd.render_help();
        print!("{help}");
        return Err(CliError::Validation(
            "a subcommand or --from-manifest is required".into(),
        ));
    };

    if let Command::Plot { inputs, output } = &command {
        return cmd_plot(inputs, output.as_deref(), cli.output_dir.as_deref());
    }

    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let mut ov = Overrides {
        variant: cli.variant.clone(),
        l: cli.l,
        t_ns: cli.t_ns,
        seed: cli.seed,
        coeff_source: cli.coeff_source.clone(),
        output_dir: cli.output_dir.clone(),
        ..Overrides::default()
    };
    match &command {
        Command::Spectrum { cut } => ov.cut = *cut,
        Command::Quench {
            n_steps,
            cadence,
            deform_site,
            cut,
            propagator,
        } => {
            ov.n_steps = *n_steps;
            ov.cadence = *cadence;
            ov.deform_site = *deform_site;
            ov.cut = *cut;
            ov.propagator = propagator.clone();
        }
        Command::Noise {
            samples,
            t_meas,
            r_list,
            propagator,
            deform_site,
            cut,
        } => {
            ov.samples = *samples;
            ov.t_meas = *t_meas;
            ov.r_list = r_list.clone();
            ov.propagator = propagator.clone();
            ov.deform_site = *deform_site;
            ov.cut = *cut;
        }
        Command::TrotterScan {
            t_total_ns,
            t_min_ns,
            t_max_ns,
            points,
            deform_site,
        } => {
            ov.t_total_ns = *t_total_ns;
            ov.t_min_ns = *t_min_ns;
            ov.t_max_ns = *t_max_ns;
            ov.points = *points;
            ov.deform_site = *deform_site;
        }
        Command::Coeffs | Command::Verify | Command::Plot { .. } => {}
    }
    ov.apply(&mut cfg)?;

    dispatch_by_name(command.name(), &cfg)
}

fn dispatch_by_name(name: &str, cfg: &RunConfig) -> CliResult<()> {
    match name {
        "coeffs" => cmd_coeffs(cfg),
        "verify" => cmd_verify(cfg),
        "spectrum" => cmd_spectrum(cfg),
        "quench" => cmd_quench(cfg),
        "noise" => cmd_noise(cfg),
        "trotter-scan" => cmd_trotter_scan(cfg),
        other => Err(CliError::Validation(format!(
            "manifest names unknown command '{other}'"
        ))),
    }
}

impl RunConfig {
    fn check_version_of_manifest(&self, manifest: &Manifest) -> CliResult<()> {
        let own = env!("CARGO_PKG_VERSION");
        if manifest.version != own {
            eprintln!(
                "note: manifest was written by version {}, this is {own}; \
                 bit-exactness is only guaranteed within a version",
                manifest.version
            );
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// command handlers
// ---------------------------------------------------------------------------

fn cmd_coeffs(cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.device_params()?;
    let rows = coefficient_report(&params)?;

    println!(
        "{:<12} {:>10} {:>6} {:>14} {:>14} {:>10}  verdict",
        "variant", "class", "name", "eq6 (MHz)", "table (MHz)", "rel_dev"
    );
    for r in &rows {
        println!(
            "{:<12} {:>10} {:>6} {:>14.4} {:>14.4} {:>9.1}%  {}",
            r.variant.name(),
            r.site_class,
            r.name,
            r.eq6_value_mhz,
            r.table_value_mhz,
            100.0 * r.rel_dev,
            r.verdict
        );
    }

    let dir = resolve_output_dir(cfg);
    let csv_path = dir.join("coeffs.csv");
    output::write_text(&csv_path, &output::coeffs_csv(&rows))?;
    Manifest::new("coeffs", cfg, vec![], vec!["coeffs.csv".into()])
        .write(&dir.join("coeffs_manifest.json"))?;
    eprintln!("wrote {}", csv_path.display());
    Ok(())
}

struct CheckList {
    failures: usize,
}

impl CheckList {
    fn new() -> Self {
        Self { failures: 0 }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("ok   {name}: {detail}");
        } else {
            self.failures += 1;
            println!("FAIL {name}: {detail}");
        }
    }
}

fn cmd_verify(cfg: &RunConfig) -> CliResult<()> {
    let t0 = Instant::now();
    let params = cfg.device_params()?;
    let mut checks = CheckList::new();

    // every simplified block annihilates its scar state, at every size
    for variant in [Variant::XPolarized, Variant::Cluster, Variant::Ghz] {
        let mut worst = 0.0f64;
        for l in [3usize, 6, 9, 12] {
            let ops = all_annihilators(variant, l)?;
            let state = scar_state(variant, l)?;
            worst = worst.max(verify_annihilation(&ops, &state)?);
        }
        checks.check(
            "annihilation",
            worst < 1e-12,
            format!("{variant}: max residual {worst:.3e} over L in {{3, 6, 9, 12}} (< 1e-12)"),
        );
    }

    // random-weight parent Hamiltonians keep the scar in their kernel
    let mut rng = SplitMix64::new(cfg.master_seed);
    for variant in [Variant::XPolarized, Variant::Cluster, Variant::Ghz] {
        let l = 6;
        let state = scar_state(variant, l)?;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let k: Vec<f64> = (0..l).map(|_| 0.5 + rng.uniform01()).collect();
            let h = parent_hamiltonian(&ParentHamiltonianSpec { variant, l, k })?;
            worst = worst.max(h.apply(&state)?.norm());
        }
        checks.check(
            "parent-kernel",
            worst < 1e-12,
            format!("{variant}: max |H|S>| {worst:.3e} over 10 random weight draws (< 1e-12)"),
        );
    }

    // coefficient regression against the reference calibration table
    for row in coefficient_report(&params)? {
        if row.name == "c_zx" {
            // known provenance gap; emitted and flagged, never a failure
            println!(
                "note c_zx {} class {}: rel_dev {:.1}% ({})",
                row.variant.name(),
                row.site_class,
                100.0 * row.rel_dev,
                row.verdict
            );
            continue;
        }
        let tol = report_tolerance(row.name);
        checks.check(
            "coefficients",
            row.rel_dev <= tol,
            format!(
                "{} class {} {}: rel_dev {:.2}% (<= {:.0}%)",
                row.variant.name(),
                row.site_class,
                row.name,
                100.0 * row.rel_dev,
                100.0 * tol
            ),
        );
    }

    // observables hit their exact values on the scar states
    for (variant, want) in [(Variant::XPolarized, 1.0), (Variant::Cluster, -1.0)] {
        let state = scar_state(variant, cfg.l)?;
        let obs = observable(observable_for(variant)?, cfg.l)?;
        let got = obs.expectation(&state)?;
        checks.check(
            "observable",
            (got - want).abs() < 1e-12,
            format!("{variant}: <obs> = {got:.15} (expected {want})"),
        );
    }

    // the sigma^y deformation is energy-neutral under the averaged drive
    for variant in [Variant::XPolarized, Variant::Cluster] {
        let plan = make_plan(variant, &params, cfg.coefficient_source, None)?;
        let h_avg = average_hamiltonian(&plan)?;
        let scar = scar_state(variant, cfg.l)?;
        let deformed = deform(&scar, cfg.deform_site)?;
        let de = (h_avg.expectation(&deformed)? - h_avg.expectation(&scar)?).abs();
        let range = spectral_range_lower(&h_avg, 200, cfg.master_seed)?;
        checks.check(
            "energy-neutrality",
            de <= 0.02 * range,
            format!(
                "{variant}: |dE| = {de:.3e} vs 0.02 * range = {:.3e}",
                0.02 * range
            ),
        );
    }

    // dimensionless-anharmonicity root solves its quadratic exactly
    {
        let x = params.alpha / params.omegas[0];
        let eps = scarsim_core::cr_engine::epsilon_of(x)?;
        let residual = (9.0 - 4.0 * x) * eps * eps + 16.0 * (1.0 - x) * eps + 64.0 * x;
        checks.check(
            "anharmonicity",
            eps > 0.0 && residual.abs() < 1e-12,
            format!("eps = {eps:.6}, quadratic residual {residual:.3e}"),
        );
    }

    eprintln!("verify finished in {:.2}s", t0.elapsed().as_secs_f64());
    if checks.failures > 0 {
        Err(CliError::Numeric(format!(
            "{} verification check(s) failed",
            checks.failures
        )))
    } else {
        println!("all checks passed");
        Ok(())
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.device_params()?;
    let plan = make_plan(cfg.variant, &params, cfg.coefficient_source, None)?;
    let cut = cfg.resolved_cut();
    let t0 = Instant::now();
    eprintln!(
        "diagonalizing the one-period propagator ({} modes)...",
        1usize << cfg.l
    );
    let scatter = run_spectrum(&plan, cut)?;
    eprintln!("spectrum done in {:.1}s", t0.elapsed().as_secs_f64());

    println!("modes              {}", scatter.rows.len());
    println!("candidate overlap  {:.6}", scatter.candidate_overlap);
    println!("candidate ratio    {:.6}", scatter.candidate_ratio);
    println!("exact scar ratio   {:.6}", scatter.exact_scar_ratio);
    println!("median ratio       {:.6}", scatter.median_ratio);
    println!(
        "page entropy       {:.6} nats (cut {})",
        scatter.page, scatter.cut
    );

    let dir = resolve_output_dir(cfg);
    let name = format!("spectrum_{}.csv", cfg.variant.name());
    output::write_text(&dir.join(&name), &output::spectrum_csv(&scatter))?;
    Manifest::new("spectrum", cfg, vec![], vec![name.clone()])
        .write(&dir.join(format!("spectrum_{}_manifest.json", cfg.variant.name())))?;
    eprintln!("wrote {}", dir.join(&name).display());
    Ok(())
}

fn cmd_quench(cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.device_params()?;
    let plan = make_plan(cfg.variant, &params, cfg.coefficient_source, None)?;
    let cut = cfg.resolved_cut();
    let t0 = Instant::now();
    let q = run_quench(
        &plan,
        cfg.noise.propagator,
        cfg.n_steps,
        cfg.cadence,
        cfg.deform_site,
        cut,
    )?;
    eprintln!(
        "quench ({} periods, {} rows) done in {:.1}s",
        cfg.n_steps,
        q.scar.len(),
        t0.elapsed().as_secs_f64()
    );

    let last_s = q.scar.last().expect("nonempty trajectory");
    let last_d = q.deformed.last().expect("nonempty trajectory");
    println!(
        "scar     @ {:>8.1} ns: fidelity {:.6}, obs {:+.6}, S_vn/S_page {:.6}",
        last_s.t_ns,
        last_s.fidelity,
        last_s.obs,
        last_s.s_vn / q.page
    );
    println!(
        "deformed @ {:>8.1} ns: fidelity {:.6}, obs {:+.6}, S_vn/S_page {:.6}",
        last_d.t_ns,
        last_d.fidelity,
        last_d.obs,
        last_d.s_vn / q.page
    );

    let dir = resolve_output_dir(cfg);
    let scar_name = format!("quench_{}_scar.csv", cfg.variant.name());
    let deformed_name = format!("quench_{}_deformed.csv", cfg.variant.name());
    output::write_text(&dir.join(&scar_name), &output::trajectory_csv(&q.scar))?;
    output::write_text(
        &dir.join(&deformed_name),
        &output::trajectory_csv(&q.deformed),
    )?;
    Manifest::new(
        "quench",
        cfg,
        vec![],
        vec![scar_name.clone(), deformed_name.clone()],
    )
    .write(&dir.join(format!("quench_{}_manifest.json", cfg.variant.name())))?;
    eprintln!(
        "wrote {} and {}",
        dir.join(&scar_name).display(),
        dir.join(&deformed_name).display()
    );
    Ok(())
}

fn cmd_noise(cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.device_params()?;
    let mut ecfg = NoiseEnsembleConfig::new(cfg.variant, params);
    ecfg.source = cfg.coefficient_source;
    ecfg.propagator = cfg.noise.propagator;
    ecfg.r_list = cfg.noise.r_list.clone();
    ecfg.samples = cfg.noise.samples;
    ecfg.t_meas_steps = cfg.noise.t_meas;
    ecfg.master_seed = cfg.master_seed;
    ecfg.deform_site = cfg.deform_site;
    ecfg.cut = cfg.cut;

    let n_jobs: usize = ecfg
        .r_list
        .iter()
        .map(|&r| if r == 0.0 { 1 } else { ecfg.samples })
        .sum();
    eprintln!(
        "running {} samples across {} error strengths...",
        n_jobs,
        ecfg.r_list.len()
    );
    let t0 = Instant::now();
    let result = run_noise_ensemble(&ecfg)?;
    eprintln!("ensemble done in {:.1}s", t0.elapsed().as_secs_f64());

    println!(
        "{:>8} {:>8} {:>22} {:>22}",
        "r", "samples", "scar S/S_page", "deformed S/S_page"
    );
    for s in &result.summary {
        println!(
            "{:>8.4} {:>8} {:>12.4} ± {:>7.4} {:>12.4} ± {:>7.4}",
            s.r,
            s.n_samples,
            s.scar.svn_over_page.mean,
            s.scar.svn_over_page.std,
            s.deformed.svn_over_page.mean,
            s.deformed.svn_over_page.std
        );
    }

    let dir = resolve_output_dir(cfg);
    let samples_name = format!("noise_{}_samples.csv", cfg.variant.name());
    let summary_name = format!("noise_{}_summary.csv", cfg.variant.name());
    output::write_text(
        &dir.join(&samples_name),
        &output::noise_samples_csv(&result),
    )?;
    output::write_text(
        &dir.join(&summary_name),
        &output::noise_summary_csv(&result),
    )?;
    let seeds: Vec<SeedRecord> = result.outcomes.iter().map(SeedRecord::from).collect();
    Manifest::new(
        "noise",
        cfg,
        seeds,
        vec![samples_name.clone(), summary_name.clone()],
    )
    .write(&dir.join(format!("noise_{}_manifest.json", cfg.variant.name())))?;
    eprintln!(
        "wrote {} and {}",
        dir.join(&samples_name).display(),
        dir.join(&summary_name).display()
    );
    Ok(())
}

fn cmd_trotter_scan(cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.device_params()?;
    let mut scfg = TrotterScanConfig::new(cfg.variant, params);
    scfg.source = cfg.coefficient_source;
    scfg.t_total_ns = cfg.scan.t_total_ns;
    scfg.t_min_ns = cfg.scan.t_min_ns;
    scfg.t_max_ns = cfg.scan.t_max_ns;
    scfg.points = cfg.scan.points;
    scfg.deform_site = cfg.deform_site;

    eprintln!(
        "scanning {} periods in [{}, {}] ns at fixed t = {} ns...",
        scfg.points, scfg.t_min_ns, scfg.t_max_ns, scfg.t_total_ns
    );
    let t0 = Instant::now();
    let result = run_trotter_scan(&scfg)?;
    eprintln!("scan done in {:.1}s", t0.elapsed().as_secs_f64());

    let scar_min = result
        .rows
        .iter()
        .map(|r| r.scar_obs)
        .fold(f64::INFINITY, f64::min);
    let scar_max = result
        .rows
        .iter()
        .map(|r| r.scar_obs)
        .fold(f64::NEG_INFINITY, f64::max);
    let small_t = result.rows.first().expect("nonempty grid").deformed_obs;
    let max_dep = result
        .rows
        .iter()
        .map(|r| (r.deformed_obs - small_t).abs())
        .fold(0.0, f64::max);
    println!("scar observable range    {:.6}", scar_max - scar_min);
    println!(
        "max deformed departure   {:.6} (from small-T value {:+.6})",
        max_dep, small_t
    );

    let dir = resolve_output_dir(cfg);
    let name = format!("scan_{}.csv", cfg.variant.name());
    output::write_text(&dir.join(&name), &output::scan_csv(&result))?;
    Manifest::new("trotter-scan", cfg, vec![], vec![name.clone()])
        .write(&dir.join(format!("scan_{}_manifest.json", cfg.variant.name())))?;
    eprintln!("wrote {}", dir.join(&name).display());
    Ok(())
}

// ---------------------------------------------------------------------------
// plot: CSV -> SVG with the kind inferred from the header row
// ---------------------------------------------------------------------------

struct Csv {
    header: String,
    rows: Vec<Vec<f64>>,
    stem: String,
}

fn read_csv(path: &Path) -> CliResult<Csv> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Validation(format!("{} is empty", path.display())))?
        .trim()
        .to_string();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        rows.push(row.map_err(|e| {
            CliError::Validation(format!("{} line {}: {e}", path.display(), k + 2))
        })?);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into());
    Ok(Csv { header, rows, stem })
}

fn cmd_plot(inputs: &[PathBuf], output: Option<&Path>, out_dir: Option<&Path>) -> CliResult<()> {
    if inputs.is_empty() {
        return Err(CliError::Validation(
            "plot needs at least one CSV input".into(),
        ));
    }
    let csvs: Vec<Csv> = inputs
        .iter()
        .map(|p| read_csv(p))
        .collect::<CliResult<_>>()?;
    let header = csvs[0].header.clone();
    if csvs.iter().any(|c| c.header != header) {
        return Err(CliError::Validation(
            "all plot inputs must share one CSV schema".into(),
        ));
    }

    let plot = match header.as_str() {
        output::TRAJECTORY_HEADER => plot_trajectories(&csvs),
        output::SPECTRUM_HEADER => plot_spectrum(&csvs[0]),
        output::NOISE_SUMMARY_HEADER => plot_noise(&csvs[0]),
        output::SCAN_HEADER => plot_scan(&csvs[0]),
        other => {
            return Err(CliError::Validation(format!(
                "unrecognized CSV header '{other}'"
            )))
        }
    };

    let svg = plot.render_svg()?;
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => {
            let base = inputs[0].with_extension("svg");
            match out_dir {
                Some(dir) => dir.join(base.file_name().expect("file name")),
                None => base,
            }
        }
    };
    output::write_text(&path, &svg)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn plot_trajectories(csvs: &[Csv]) -> Plot {
    let mut plot = Plot::new("quench trajectories", "step (periods)", "value", false);
    let mut color = 0;
    for csv in csvs {
        for (col, label) in [(2usize, "fidelity"), (3, "obs"), (4, "S_vn")] {
            let points: Vec<(f64, f64)> = csv.rows.iter().map(|r| (r[1], r[col])).collect();
            plot.series.push(Series {
                label: format!("{} {label}", csv.stem),
                color: PALETTE[color % PALETTE.len()],
                kind: SeriesKind::Line(points),
            });
            color += 1;
        }
    }
    plot
}

fn plot_spectrum(csv: &Csv) -> Plot {
    let mut plot = Plot::new(
        "Floquet-mode spectrum",
        "unwound energy (rad/ns)",
        "S_vn / S_page",
        false,
    );
    let points: Vec<(f64, f64)> = csv.rows.iter().map(|r| (r[1], r[2])).collect();
    plot.series.push(Series {
        label: "modes".into(),
        color: PALETTE[0],
        kind: SeriesKind::Scatter(points),
    });
    if let Some(best) = csv
        .rows
        .iter()
        .max_by(|a, b| a[3].total_cmp(&b[3]))
        .map(|r| (r[1], r[2]))
    {
        plot.series.push(Series {
            label: "scar candidate".into(),
            color: PALETTE[1],
            kind: SeriesKind::Scatter(vec![best]),
        });
    }
    plot
}

fn plot_noise(csv: &Csv) -> Plot {
    let mut plot = Plot::new(
        "controlled-noise ensemble",
        "error strength r",
        "S_vn / S_page",
        false,
    );
    let scar: Vec<(f64, f64, f64)> = csv.rows.iter().map(|r| (r[0], r[6], r[7])).collect();
    let deformed: Vec<(f64, f64, f64)> = csv.rows.iter().map(|r| (r[0], r[12], r[13])).collect();
    plot.series.push(Series {
        label: "scar".into(),
        color: PALETTE[0],
        kind: SeriesKind::ErrorBars(scar),
    });
    plot.series.push(Series {
        label: "deformed".into(),
        color: PALETTE[1],
        kind: SeriesKind::ErrorBars(deformed),
    });
    plot
}

fn plot_scan(csv: &Csv) -> Plot {
    let mut plot = Plot::new(
        "Trotter-resolution scan",
        "period T (ns)",
        "endpoint observable",
        true,
    );
    let scar: Vec<(f64, f64)> = csv.rows.iter().map(|r| (r[0], r[2])).collect();
    let deformed: Vec<(f64, f64)> = csv.rows.iter().map(|r| (r[0], r[3])).collect();
    plot.series.push(Series {
        label: "scar".into(),
        color: PALETTE[0],
        kind: SeriesKind::Line(scar),
    });
    plot.series.push(Series {
        label: "deformed".into(),
        color: PALETTE[1],
        kind: SeriesKind::Line(deformed),
    });
    plot
}
