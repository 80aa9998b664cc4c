//! Trotterized Floquet dynamics of the driven chain.
//!
//! One drive period T splits into three substeps; substep n simultaneously
//! drives the blocks at i = n, n+3, ..., whose site supports are pairwise
//! disjoint (L mod 3 = 0), so each substep exponential factorizes exactly
//! into small local gates:
//!
//! ```text
//! U(T) = exp(-i H_3 T/3) exp(-i H_2 T/3) exp(-i H_1 T/3),
//! H_n  = sum_{i = n, n+3, ...} H_i .
//! ```
//!
//! Propagation is gate-based at cost O(L 2^L) per period; the dense 2^L x 2^L
//! matrix is materialized only for diagonalization. Stroboscopic modes come
//! from the eigendecomposition of U(T); quasienergies live on (-pi/T, pi/T]
//! and are unwound onto the energy axis by the branch that best matches the
//! average-Hamiltonian expectation value of each mode (the average is always
//! taken noise-free, even for noisy plans).
//!
//! The effective (Floquet) Hamiltonian is available at order 0 (substep
//! average) and order 1, which adds the first Baker-Campbell-Hausdorff
//! correction of the three-factor product:
//!
//! ```text
//! H_eff = (H_1+H_2+H_3)/3 - (iT/18) ([H_3,H_2] + [H_3,H_1] + [H_2,H_1]).
//! ```
//!
//! Controlled coefficient noise multiplies every coefficient instance
//! (cross-resonance values and calibrated corrections alike) by an
//! independent factor (1 + r u), u uniform on [-1, 1); the draw order is a
//! stable, documented contract (see [`make_plan`]).

use crate::cr_engine::{
    block_coefficients, build_block, corrections_for, CRCoeffs, CoeffSource, CorrectionTerms,
    DeviceParams,
};
use crate::scar_models::{scar_state, Variant};
use crate::seed::SplitMix64;
use crate::spin_ops::{eigh, CompiledGate, LocalOperator, OperatorSum, QubitState, C64};
use crate::{Error, Result};
use faer::Mat;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest chain the dense-matrix paths will materialize (268 MB of
/// complex-128 at L = 12).
pub const MAX_DENSE_L: usize = 12;
/// Largest chain the dense effective-Hamiltonian propagator accepts.
pub const MAX_EFFECTIVE_DENSE_L: usize = 10;

/// Controlled-noise specification for one realization.
///
/// `seed` is the per-realization stream seed (already derived from the
/// master seed, the variant tag, and the sample coordinates; see
/// [`crate::seed::derive_stream_seed`]). Every coefficient instance of the
/// plan is multiplied by an independent (1 + r u) with u uniform on [-1, 1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Maximal relative error, >= 0. r = 0 reproduces the noise-free plan
    /// bit-exactly.
    pub r: f64,
    /// Per-realization stream seed.
    pub seed: u64,
}

/// One driven block of the plan: its substep, block index, realized
/// coefficients (after any noise), and the compiled period-T/3 gate.
#[derive(Debug, Clone)]
pub struct PlanBlock {
    /// Substep n in {1, 2, 3}.
    pub substep: usize,
    /// Block index i (1-based chain site the block is anchored at).
    pub index: usize,
    /// Realized cross-resonance coefficients.
    pub coeffs: CRCoeffs,
    /// Realized single-qubit corrections.
    pub corrections: CorrectionTerms,
    /// The block Hamiltonian on its support.
    pub hamiltonian: LocalOperator,
    gate: CompiledGate,
}

/// An immutable one-period Trotter schedule.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    pub variant: Variant,
    pub l: usize,
    /// Period T in ns.
    pub t_period: f64,
    pub source: CoeffSource,
    pub noise: Option<NoiseSpec>,
    pub params: DeviceParams,
    blocks: Vec<PlanBlock>,
}

impl TrotterPlan {
    /// All blocks, substep 1 first, ascending block index within a substep.
    pub fn blocks(&self) -> &[PlanBlock] {
        &self.blocks
    }

    /// Sum of the block Hamiltonians of substep n.
    pub fn substep_hamiltonian(&self, n: usize) -> Result<OperatorSum> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "substep {n} out of range 1..=3"
            )));
        }
        let mut sum = OperatorSum::new(self.l);
        for b in self.blocks.iter().filter(|b| b.substep == n) {
            sum.push(1.0, b.hamiltonian.clone())?;
        }
        Ok(sum)
    }

    /// The same schedule with noise stripped. Plans that carry no noise (or
    /// r = 0, which is bit-identical to no noise) are returned as-is.
    pub fn noise_free_twin(&self) -> Result<TrotterPlan> {
        match self.noise {
            None => Ok(self.clone()),
            Some(n) if n.r == 0.0 => Ok(self.clone()),
            Some(_) => make_plan(self.variant, &self.params, self.source, None),
        }
    }

    /// Builds a plan directly from (substep, block-Hamiltonian) pairs,
    /// compiling the gates; used for synthetic schedules in tests.
    pub fn from_blocks(
        variant: Variant,
        params: &DeviceParams,
        source: CoeffSource,
        blocks: Vec<(usize, usize, LocalOperator)>,
    ) -> Result<TrotterPlan> {
        params.validate()?;
        let mut plan_blocks = Vec::with_capacity(blocks.len());
        for (substep, index, h) in blocks {
            if !(1..=3).contains(&substep) {
                return Err(Error::InvalidParameter(format!(
                    "substep {substep} out of range 1..=3"
                )));
            }
            let u = h.exp_factor(params.t / 3.0)?;
            let gate = CompiledGate::compile(params.l, u.sites(), u.matrix())?;
            plan_blocks.push(PlanBlock {
                substep,
                index,
                coeffs: CRCoeffs {
                    control: 0,
                    target: 0,
                    c_z: 0.0,
                    c_x: 0.0,
                    c_zx: 0.0,
                    c_zz: 0.0,
                },
                corrections: CorrectionTerms {
                    d_z: Vec::new(),
                    d_x: (0, 0.0),
                    omega_x: 0.0,
                },
                hamiltonian: h,
                gate,
            });
        }
        plan_blocks.sort_by_key(|b| (b.substep, b.index));
        assert_substeps_disjoint(&plan_blocks);
        Ok(TrotterPlan {
            variant,
            l: params.l,
            t_period: params.t,
            source,
            noise: None,
            params: *params,
            blocks: plan_blocks,
        })
    }
}

fn assert_substeps_disjoint(blocks: &[PlanBlock]) {
    for n in 1..=3 {
        let mut seen = std::collections::HashSet::new();
        for b in blocks.iter().filter(|b| b.substep == n) {
            for &s in b.hamiltonian.sites() {
                assert!(
                    seen.insert(s),
                    "substep {n} blocks overlap at site {s}: schedule is invalid"
                );
            }
        }
    }
}

/// Builds the one-period schedule: substep n holds blocks at i = n, n+3, ...,
/// each assembled by the cross-resonance engine with optionally
/// noise-perturbed coefficients.
///
/// Noise contract (stable across versions and thread counts): a single
/// stream seeded with `noise.seed` is consumed in block order (substep 1
/// first, ascending i within a substep), drawing one factor (1 + r u) per
/// coefficient instance in the order
///
/// ```text
/// x-polarized: c_z, c_x, c_zx, c_zz, d_z,  d_x
/// cluster:     c_z, c_x, c_zx, c_zz, d_x,  d_z(i+1), d_z(i-1)
/// ```
///
/// Corrections are calibrated from the ideal coefficients first and then
/// perturbed independently; the d_x draw is simultaneously the drive
/// amplitude draw (one knob: Omega_x = 2|d_x|/nu01).
pub fn make_plan(
    variant: Variant,
    params: &DeviceParams,
    source: CoeffSource,
    noise: Option<NoiseSpec>,
) -> Result<TrotterPlan> {
    params.validate()?;
    if let Some(n) = noise {
        if !(n.r >= 0.0 && n.r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise amplitude r must be finite and >= 0, got {}",
                n.r
            )));
        }
    }
    let l = params.l;
    let mut rng = noise.map(|n| SplitMix64::new(n.seed));
    let r = noise.map_or(0.0, |n| n.r);
    let mut perturb = |value: f64| -> f64 {
        match rng.as_mut() {
            Some(rng) => value * (1.0 + r * rng.uniform_pm1()),
            None => value,
        }
    };

    let mut blocks = Vec::with_capacity(l);
    for substep in 1..=3usize {
        let mut i = substep;
        while i <= l {
            let ideal = block_coefficients(params, variant, source, i)?;
            let ideal_corr = corrections_for(params, variant, i, &ideal)?;
            let coeffs = CRCoeffs {
                c_z: perturb(ideal.c_z),
                c_x: perturb(ideal.c_x),
                c_zx: perturb(ideal.c_zx),
                c_zz: perturb(ideal.c_zz),
                ..ideal
            };
            let corrections = match variant {
                Variant::XPolarized => {
                    let d_z = perturb(ideal_corr.d_z[0].1);
                    let d_x = perturb(ideal_corr.d_x.1);
                    realize_corrections(params, variant, &ideal_corr, vec![d_z], d_x)?
                }
                Variant::Cluster => {
                    let d_x = perturb(ideal_corr.d_x.1);
                    let d_z_right = perturb(ideal_corr.d_z[0].1);
                    let d_z_left = perturb(ideal_corr.d_z[1].1);
                    realize_corrections(
                        params,
                        variant,
                        &ideal_corr,
                        vec![d_z_right, d_z_left],
                        d_x,
                    )?
                }
                Variant::Ghz => unreachable!("block_coefficients rejects GHZ"),
            };
            let hamiltonian = build_block(params, variant, i, &coeffs, &corrections)?;
            let u = hamiltonian.exp_factor(params.t / 3.0)?;
            let gate = CompiledGate::compile(l, u.sites(), u.matrix())?;
            blocks.push(PlanBlock {
                substep,
                index: i,
                coeffs,
                corrections,
                hamiltonian,
                gate,
            });
            i += 3;
        }
    }
    assert_substeps_disjoint(&blocks);
    Ok(TrotterPlan {
        variant,
        l,
        t_period: params.t,
        source,
        noise,
        params: *params,
        blocks,
    })
}

/// Rebuilds a CorrectionTerms with realized (possibly perturbed) strengths on
/// the ideal sites, re-deriving the drive amplitude from the realized d_x.
fn realize_corrections(
    params: &DeviceParams,
    variant: Variant,
    ideal: &CorrectionTerms,
    d_z_values: Vec<f64>,
    d_x_value: f64,
) -> Result<CorrectionTerms> {
    let d_z = ideal
        .d_z
        .iter()
        .zip(d_z_values)
        .map(|(&(site, _), v)| (site, v))
        .collect();
    let d_x = (ideal.d_x.0, d_x_value);
    // same nu01 the calibration used: recover it from the ideal pair
    let nu01 = if ideal.d_x.1 == 0.0 {
        let w = params.site_frequency(variant, ideal.d_x.0)?;
        crate::cr_engine::nu_of(crate::cr_engine::epsilon_of(params.alpha / w)?).nu01
    } else {
        2.0 * ideal.d_x.1.abs() / ideal.omega_x
    };
    Ok(CorrectionTerms {
        d_z,
        d_x,
        omega_x: 2.0 * d_x_value.abs() / nu01,
    })
}

/// Advances the state by one period: substep 1's gates first, then 2, then 3
/// (the right-to-left factor order of the period unitary).
pub fn step(plan: &TrotterPlan, state: &mut QubitState) {
    debug_assert_eq!(state.l(), plan.l);
    for b in &plan.blocks {
        b.gate.apply(state.amps_mut());
    }
}

/// Materializes U(T) column by column and verifies unitarity
/// (max |U†U - I| < 1e-9).
pub fn dense_period_unitary(plan: &TrotterPlan) -> Result<Mat<C64>> {
    if plan.l > MAX_DENSE_L {
        return Err(Error::TooLargeForDense {
            l: plan.l,
            max: MAX_DENSE_L,
        });
    }
    let dim = 1usize << plan.l;
    // column-major flat buffer; each column is one basis state propagated
    let mut flat = vec![ZERO; dim * dim];
    for j in 0..dim {
        let col = &mut flat[j * dim..(j + 1) * dim];
        col[j] = C64::new(1.0, 0.0);
        for b in &plan.blocks {
            b.gate.apply(col);
        }
    }
    let u = Mat::from_fn(dim, dim, |i, j| flat[j * dim + i]);
    drop(flat);

    let defect = unitarity_defect(&u);
    if defect >= 1e-9 {
        return Err(Error::Eigen(format!(
            "period unitary failed the unitarity check: max |U†U - I| = {defect:.3e}"
        )));
    }
    Ok(u)
}

/// max_ij |(U†U - I)_ij|.
pub fn unitarity_defect(u: &Mat<C64>) -> f64 {
    let prod = u.adjoint() * u;
    let dim = u.nrows();
    let mut defect = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let expect = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((prod[(i, j)] - C64::new(expect, 0.0)).norm());
        }
    }
    defect
}

/// Eigendecomposition of a unitary matrix via a Hermitian surrogate.
///
/// M(gamma) = (U + U†)/2 + gamma (U - U†)/(2i) is Hermitian and shares U's
/// eigenvectors whenever its eigenvalues cos(theta) + gamma sin(theta) are
/// simple; an irrational gamma ladder breaks accidental collisions. Each
/// candidate basis is validated against U directly (per-mode residual
/// ||U v - lambda v|| < 1e-8 with lambda = v†Uv) before acceptance.
pub fn unitary_eig(u: &Mat<C64>) -> Result<(Vec<C64>, Mat<C64>)> {
    const GAMMAS: [f64; 3] = [0.6180339887498949, 0.7548776662466927, 0.8832035059135813];
    let dim = u.nrows();
    if u.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "unitary_eig needs a square matrix, got {}x{}",
            dim,
            u.ncols()
        )));
    }
    let mut worst = f64::NAN;
    for gamma in GAMMAS {
        let half_rot = C64::new(0.0, -0.5 * gamma);
        let m = Mat::from_fn(dim, dim, |i, j| {
            let a = u[(i, j)];
            let b = u[(j, i)].conj();
            (a + b) * 0.5 + (a - b) * half_rot
        });
        let (_, v) = eigh(m.as_ref())?;
        let w = u * &v;
        let mut lambdas = Vec::with_capacity(dim);
        let mut max_residual = 0.0f64;
        for k in 0..dim {
            let mut lam = ZERO;
            for i in 0..dim {
                lam += v[(i, k)].conj() * w[(i, k)];
            }
            let mut res2 = 0.0;
            for i in 0..dim {
                res2 += (w[(i, k)] - lam * v[(i, k)]).norm_sqr();
            }
            max_residual = max_residual.max(res2.sqrt());
            lambdas.push(lam);
        }
        if max_residual < 1e-8 {
            return Ok((lambdas, v));
        }
        worst = if worst.is_nan() {
            max_residual
        } else {
            worst.min(max_residual)
        };
    }
    Err(Error::Eigen(format!(
        "unitary eigendecomposition did not converge: best per-mode residual {worst:.3e}"
    )))
}

/// One stroboscopic eigenmode of the period unitary.
#[derive(Debug, Clone)]
pub struct FloquetMode {
    pub state: QubitState,
    /// Quasienergy in (-pi/T, pi/T], rad/ns.
    pub quasienergy: f64,
    /// Quasienergy after branch selection against the mode's
    /// average-Hamiltonian expectation, rad/ns.
    pub unwound_energy: f64,
    /// |<scar|mode>|^2 against the plan variant's scar state.
    pub scar_overlap: f64,
}

/// Substep average (H_1 + H_2 + H_3)/3 of the noise-free twin schedule.
/// This is the unwinding reference even for noisy plans.
pub fn average_hamiltonian(plan: &TrotterPlan) -> Result<OperatorSum> {
    effective_hamiltonian(&plan.noise_free_twin()?, 0)
}

/// Selects the quasienergy branch closest to a target energy.
pub fn unwind_quasienergy(quasienergy: f64, target_energy: f64, t_period: f64) -> f64 {
    let period = 2.0 * PI / t_period;
    let m = ((target_energy - quasienergy) / period).round();
    quasienergy + period * m
}

/// Diagonalizes U(T): quasienergies on (-pi/T, pi/T], unwound energies via
/// the noise-free average Hamiltonian, and scar overlaps. Modes are sorted
/// by quasienergy.
pub fn floquet_modes(plan: &TrotterPlan) -> Result<Vec<FloquetMode>> {
    let u = dense_period_unitary(plan)?;
    let (lambdas, v) = unitary_eig(&u)?;
    drop(u);
    let avg = average_hamiltonian(plan)?;
    let scar = scar_state(plan.variant, plan.l)?;
    let dim = lambdas.len();
    let t = plan.t_period;
    let mut modes = Vec::with_capacity(dim);
    for k in 0..dim {
        let state = QubitState::from_amps(plan.l, (0..dim).map(|i| v[(i, k)]).collect::<Vec<_>>())?;
        let mut quasienergy = -lambdas[k].arg() / t;
        if quasienergy <= -PI / t {
            quasienergy += 2.0 * PI / t;
        }
        let href = avg.expectation(&state)?;
        let unwound_energy = unwind_quasienergy(quasienergy, href, t);
        let scar_overlap = scar.fidelity(&state)?;
        modes.push(FloquetMode {
            state,
            quasienergy,
            unwound_energy,
            scar_overlap,
        });
    }
    modes.sort_by(|a, b| a.quasienergy.total_cmp(&b.quasienergy));
    Ok(modes)
}

// ---------------------------------------------------------------------------
// effective Hamiltonian
// ---------------------------------------------------------------------------

/// Embeds a block onto an ordered union of chain sites (ascending), returning
/// the dense matrix on that union.
fn embed_on_union(op: &LocalOperator, union_sites: &[usize]) -> Result<Mat<C64>> {
    let pseudo_sites: Vec<usize> = op
        .sites()
        .iter()
        .map(|s| {
            union_sites
                .iter()
                .position(|t| t == s)
                .map(|p| p + 1)
                .ok_or_else(|| {
                    Error::DimensionMismatch(format!("site {s} missing from union support"))
                })
        })
        .collect::<Result<_>>()?;
    LocalOperator::new(pseudo_sites, op.matrix().to_owned())?.embed_dense(union_sites.len())
}

/// The stroboscopic generator to the requested order.
///
/// Order 0 is the substep average (H_1+H_2+H_3)/3. Order 1 adds the first
/// correction of the three-factor splitting,
/// -(iT/18) ([H_3,H_2] + [H_3,H_1] + [H_2,H_1]), assembled block-pairwise on
/// the support unions (disjoint pairs commute and are skipped). Uses the
/// plan's own (possibly noisy) blocks.
pub fn effective_hamiltonian(plan: &TrotterPlan, order: usize) -> Result<OperatorSum> {
    if order > 1 {
        return Err(Error::InvalidParameter(format!(
            "effective-Hamiltonian order {order} not supported (0 or 1)"
        )));
    }
    let mut sum = OperatorSum::new(plan.l);
    for b in &plan.blocks {
        sum.push(1.0 / 3.0, b.hamiltonian.clone())?;
    }
    if order == 0 {
        return Ok(sum);
    }
    let t = plan.t_period;
    for b in &plan.blocks {
        for a in &plan.blocks {
            if b.substep <= a.substep {
                continue; // pairs (later, earlier) only
            }
            let mut union_sites: Vec<usize> = b
                .hamiltonian
                .sites()
                .iter()
                .chain(a.hamiltonian.sites())
                .copied()
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            if union_sites.len() == b.hamiltonian.num_sites() + a.hamiltonian.num_sites() {
                continue; // disjoint supports commute
            }
            union_sites.sort_unstable();
            let mb = embed_on_union(&b.hamiltonian, &union_sites)?;
            let ma = embed_on_union(&a.hamiltonian, &union_sites)?;
            let comm = &mb * &ma - &ma * &mb;
            let dim = comm.nrows();
            // -i [H_b, H_a] is Hermitian; the T/18 weight rides the real
            // coefficient slot
            let herm = Mat::from_fn(dim, dim, |i, j| comm[(i, j)] * C64::new(0.0, -1.0));
            sum.push(t / 18.0, LocalOperator::new(union_sites, herm)?)?;
        }
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// stroboscopic evolution
// ---------------------------------------------------------------------------

/// How a trajectory advances by one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Propagator {
    /// The exact gate sequence (default).
    #[serde(rename = "trotter")]
    Trotter,
    /// One dense exponential of the order-1 effective Hamiltonian, reused
    /// every step; limited to L <= 10.
    #[serde(rename = "effective_order1_dense")]
    EffectiveOrder1Dense,
}

impl std::fmt::Display for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Propagator::Trotter => "trotter",
            Propagator::EffectiveOrder1Dense => "effective_order1_dense",
        })
    }
}

impl std::str::FromStr for Propagator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trotter" => Ok(Propagator::Trotter),
            "effective_order1_dense" => Ok(Propagator::EffectiveOrder1Dense),
            other => Err(Error::InvalidParameter(format!(
                "unknown propagator '{other}' (expected trotter | effective_order1_dense)"
            ))),
        }
    }
}

/// One sampled instant of a stroboscopic trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryRow {
    pub t_ns: f64,
    pub step: usize,
    /// |<initial|state>|^2.
    pub fidelity: f64,
    /// Expectation of the recorded observable.
    pub obs: f64,
    /// Half-chain von Neumann entropy (nats) at the requested cut.
    pub s_vn: f64,
    /// Second Renyi entropy (nats) at the requested cut.
    pub s_renyi2: f64,
}

/// Evolves for n_steps periods, sampling step 0, every `cadence`-th step, and
/// the final step.
pub fn evolve(
    plan: &TrotterPlan,
    propagator: Propagator,
    initial: &QubitState,
    n_steps: usize,
    cadence: usize,
    observable: &OperatorSum,
    cut: usize,
) -> Result<Vec<TrajectoryRow>> {
    if cadence == 0 {
        return Err(Error::InvalidParameter(
            "sampling cadence must be at least 1 step".into(),
        ));
    }
    if initial.l() != plan.l {
        return Err(Error::DimensionMismatch(format!(
            "state has {} sites, plan has {}",
            initial.l(),
            plan.l
        )));
    }
    let dense_step = match propagator {
        Propagator::Trotter => None,
        Propagator::EffectiveOrder1Dense => {
            if plan.l > MAX_EFFECTIVE_DENSE_L {
                return Err(Error::TooLargeForDense {
                    l: plan.l,
                    max: MAX_EFFECTIVE_DENSE_L,
                });
            }
            let h = effective_hamiltonian(plan, 1)?.to_dense()?;
            Some(crate::spin_ops::hermitian_exp_factor(
                h.as_ref(),
                plan.t_period,
            )?)
        }
    };

    let mut state = initial.clone();
    let mut rows = Vec::new();
    let mut record = |step: usize, state: &QubitState| -> Result<()> {
        let (s_vn, s_renyi2) = state.entropies(cut)?;
        rows.push(TrajectoryRow {
            t_ns: step as f64 * plan.t_period,
            step,
            fidelity: initial.fidelity(state)?,
            obs: observable.expectation(state)?,
            s_vn,
            s_renyi2,
        });
        Ok(())
    };
    record(0, &state)?;
    let mut scratch = vec![ZERO; state.dim()];
    for n in 1..=n_steps {
        match &dense_step {
            None => step(plan, &mut state),
            Some(u) => {
                let dim = state.dim();
                scratch.iter_mut().for_each(|v| *v = ZERO);
                let amps = state.amps_mut();
                for j in 0..dim {
                    let a = amps[j];
                    if a != ZERO {
                        for i in 0..dim {
                            scratch[i] += u[(i, j)] * a;
                        }
                    }
                }
                amps.copy_from_slice(&scratch);
            }
        }
        if n == n_steps || n % cadence == 0 {
            record(n, &state)?;
        }
    }
    Ok(rows)
}
