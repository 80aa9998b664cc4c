//! Scar states and the local operators that annihilate them.
//!
//! The model family lives on a periodic chain of L qubits. A parent
//! Hamiltonian H = sum_i k_i h_i is built from three-site (or two-site)
//! blocks h_i that each annihilate the scar state |S>, making |S> an exact
//! zero-energy eigenstate for every choice of the weights k_i.
//!
//! Supported scar families:
//!
//! * x-polarized: |S_+> = prod |+>, annihilated by
//!   h_i^+ = -sigma_i^z + sigma_i^z sigma_{i+1}^x;
//! * cluster: |S_-> = (prod_bonds CZ) prod |->, annihilated by
//!   h_i^- = -sigma_i^z - sigma_{i+1}^x sigma_{i+2}^z;
//! * GHZ: (|up...up> + |down...down>)/sqrt(2), annihilated by a five-term
//!   three-site block;
//! * the general two-parameter family (g, a): h = sum_n (-1)^n |psi_n><psi_n|
//!   built from four local vectors, which reduces to the families above at
//!   (g, a) = (+1, 1), (-1, 1), and (0, 1).

use crate::spin_ops::{
    identity2, kron_all, pauli_x, pauli_y, pauli_z, LocalOperator, OperatorSum, QubitState, C64,
};
use crate::{Error, Result};
use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

/// Scar family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "x-polarized")]
    XPolarized,
    #[serde(rename = "cluster")]
    Cluster,
    #[serde(rename = "ghz")]
    Ghz,
}

impl Variant {
    /// Stable lowercase name (used in file names, seeds, and CSV fields).
    pub fn name(self) -> &'static str {
        match self {
            Variant::XPolarized => "x-polarized",
            Variant::Cluster => "cluster",
            Variant::Ghz => "ghz",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x-polarized" | "xpolarized" | "x" => Ok(Variant::XPolarized),
            "cluster" | "c" => Ok(Variant::Cluster),
            "ghz" => Ok(Variant::Ghz),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant '{other}' (expected x-polarized | cluster | ghz)"
            ))),
        }
    }
}

/// Wraps a 1-based site index onto the periodic chain.
pub fn wrap_site(s: i64, l: usize) -> usize {
    let l = l as i64;
    ((s - 1).rem_euclid(l) + 1) as usize
}

// ---------------------------------------------------------------------------
// general annihilator family
// ---------------------------------------------------------------------------

/// The four local three-site vectors of the general construction, normalized.
/// Basis order |uuu>, |uud>, |udu>, |udd>, |duu>, |dud>, |ddu>, |ddd>.
pub fn psi_states(g: f64, a: f64) -> Result<[[f64; 8]; 4]> {
    let c = 0.5 * (1.0 + g * g);
    let raw: [[f64; 8]; 4] = [
        [-g, -1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -1.0, -1.0, 1.0, g],
        [
            -g * a,
            a * c,
            a,
            -a * c,
            -(1.0 - a) * c,
            1.0 - a,
            (1.0 - a) * c,
            -g * (1.0 - a),
        ],
        [
            -g * (1.0 - a),
            (1.0 - a) * c,
            1.0 - a,
            -(1.0 - a) * c,
            a * c,
            -a,
            -a * c,
            g * a,
        ],
    ];
    let mut out = [[0.0; 8]; 4];
    for (n, v) in raw.iter().enumerate() {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "psi_{} is degenerate (zero norm) at g = {g}, a = {a}",
                n + 1
            )));
        }
        for (o, x) in out[n].iter_mut().zip(v) {
            *o = x / norm;
        }
    }
    Ok(out)
}

/// General three-site annihilator h = sum_{n=1..4} (-1)^n |psi_n><psi_n|,
/// returned on sites (1, 2, 3); rebase with [`LocalOperator::sites`] mapping
/// via [`simplified_annihilator`]-style wrapping where needed.
pub fn annihilator_general(g: f64, a: f64) -> Result<LocalOperator> {
    let psis = psi_states(g, a)?;
    let mut m = Mat::<C64>::zeros(8, 8);
    for (n, v) in psis.iter().enumerate() {
        // (-1)^n for n = 1..4: negative for psi_1 and psi_3.
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        for i in 0..8 {
            for j in 0..8 {
                m[(i, j)] += C64::new(sign * v[i] * v[j], 0.0);
            }
        }
    }
    LocalOperator::new(vec![1, 2, 3], m)
}

// ---------------------------------------------------------------------------
// simplified blocks
// ---------------------------------------------------------------------------

fn xpol_block_matrix() -> Mat<C64> {
    // -sigma^z (x) I + sigma^z (x) sigma^x
    let z = pauli_z();
    let x = pauli_x();
    let id = identity2();
    let mut m = kron_all(&[z.as_ref(), id.as_ref()]);
    let zx = kron_all(&[z.as_ref(), x.as_ref()]);
    add_scaled(&mut m, zx.as_ref(), 1.0, -1.0);
    m
}

fn cluster_block_matrix() -> Mat<C64> {
    // -sigma^z (x) I (x) I - I (x) sigma^x (x) sigma^z
    let z = pauli_z();
    let x = pauli_x();
    let id = identity2();
    let mut m = kron_all(&[z.as_ref(), id.as_ref(), id.as_ref()]);
    let ixz = kron_all(&[id.as_ref(), x.as_ref(), z.as_ref()]);
    add_scaled(&mut m, ixz.as_ref(), -1.0, -1.0);
    m
}

fn ghz_block_matrix() -> Mat<C64> {
    // -2 z11 + 1z1 + zx1 - 1xz + zzz
    let z = pauli_z();
    let x = pauli_x();
    let id = identity2();
    let z11 = kron_all(&[z.as_ref(), id.as_ref(), id.as_ref()]);
    let iz1 = kron_all(&[id.as_ref(), z.as_ref(), id.as_ref()]);
    let zx1 = kron_all(&[z.as_ref(), x.as_ref(), id.as_ref()]);
    let ixz = kron_all(&[id.as_ref(), x.as_ref(), z.as_ref()]);
    let zzz = kron_all(&[z.as_ref(), z.as_ref(), z.as_ref()]);
    let mut m = Mat::<C64>::zeros(8, 8);
    add_scaled(&mut m, z11.as_ref(), -2.0, 1.0);
    add_scaled(&mut m, iz1.as_ref(), 1.0, 1.0);
    add_scaled(&mut m, zx1.as_ref(), 1.0, 1.0);
    add_scaled(&mut m, ixz.as_ref(), -1.0, 1.0);
    add_scaled(&mut m, zzz.as_ref(), 1.0, 1.0);
    m
}

fn add_scaled(acc: &mut Mat<C64>, m: MatRef<'_, C64>, c: f64, acc_scale: f64) {
    for i in 0..acc.nrows() {
        for j in 0..acc.ncols() {
            acc[(i, j)] = acc[(i, j)] * acc_scale + m[(i, j)] * c;
        }
    }
}

/// The block h_i for the given family, with periodic site wrapping.
pub fn simplified_annihilator(variant: Variant, i: usize, l: usize) -> Result<LocalOperator> {
    if i == 0 || i > l {
        return Err(Error::InvalidParameter(format!(
            "block index {i} out of range 1..={l}"
        )));
    }
    let min_l = match variant {
        Variant::XPolarized => 2,
        Variant::Cluster | Variant::Ghz => 3,
    };
    if l < min_l {
        return Err(Error::InvalidParameter(format!(
            "L = {l} too small for {variant} blocks (need L >= {min_l})"
        )));
    }
    let i = i as i64;
    match variant {
        Variant::XPolarized => LocalOperator::new(
            vec![wrap_site(i, l), wrap_site(i + 1, l)],
            xpol_block_matrix(),
        ),
        Variant::Cluster => LocalOperator::new(
            vec![wrap_site(i, l), wrap_site(i + 1, l), wrap_site(i + 2, l)],
            cluster_block_matrix(),
        ),
        Variant::Ghz => LocalOperator::new(
            vec![wrap_site(i, l), wrap_site(i + 1, l), wrap_site(i + 2, l)],
            ghz_block_matrix(),
        ),
    }
}

/// All L blocks of a family on the periodic chain.
pub fn all_annihilators(variant: Variant, l: usize) -> Result<Vec<LocalOperator>> {
    (1..=l)
        .map(|i| simplified_annihilator(variant, i, l))
        .collect()
}

// ---------------------------------------------------------------------------
// parent Hamiltonian
// ---------------------------------------------------------------------------

/// Specification of a parent Hamiltonian H = sum_i k_i h_i.
#[derive(Debug, Clone)]
pub struct ParentHamiltonianSpec {
    pub variant: Variant,
    pub l: usize,
    /// Per-block weights; empty means all ones. Any zero weight is rejected
    /// (a zero would silently drop a block from the sum).
    pub k: Vec<f64>,
}

impl ParentHamiltonianSpec {
    pub fn uniform(variant: Variant, l: usize) -> Self {
        Self {
            variant,
            l,
            k: Vec::new(),
        }
    }
}

/// Builds H = sum_i k_i h_i from simplified blocks.
pub fn parent_hamiltonian(spec: &ParentHamiltonianSpec) -> Result<OperatorSum> {
    let l = spec.l;
    let k: Vec<f64> = if spec.k.is_empty() {
        vec![1.0; l]
    } else {
        spec.k.clone()
    };
    if k.len() != l {
        return Err(Error::InvalidParameter(format!(
            "{} weights for L = {l}",
            k.len()
        )));
    }
    if let Some(pos) = k.iter().position(|&x| x == 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weight k_{} = 0 would drop a block",
            pos + 1
        )));
    }
    let mut h = OperatorSum::new(l);
    for (i, &ki) in k.iter().enumerate() {
        h.push(ki, simplified_annihilator(spec.variant, i + 1, l)?)?;
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// states
// ---------------------------------------------------------------------------

/// The scar state of a family on L sites.
pub fn scar_state(variant: Variant, l: usize) -> Result<QubitState> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    match variant {
        Variant::XPolarized => Ok(QubitState::product_state(l, |_| {
            [C64::new(inv_sqrt2, 0.0), C64::new(inv_sqrt2, 0.0)]
        })),
        Variant::Cluster => {
            if l < 3 {
                return Err(Error::InvalidParameter(format!(
                    "cluster scar needs L >= 3, got {l}"
                )));
            }
            let mut state = QubitState::product_state(l, |_| {
                [C64::new(inv_sqrt2, 0.0), C64::new(-inv_sqrt2, 0.0)]
            });
            // controlled-Z on every periodic bond: sign flip when both
            // neighbors are |down> (bit value 1).
            for (b, amp) in state.amps_mut().iter_mut().enumerate() {
                let mut flips = 0u32;
                for s in 1..=l {
                    let sn = s % l + 1;
                    if (b >> (l - s)) & 1 == 1 && (b >> (l - sn)) & 1 == 1 {
                        flips += 1;
                    }
                }
                if flips % 2 == 1 {
                    *amp = -*amp;
                }
            }
            Ok(state)
        }
        Variant::Ghz => {
            if l < 3 {
                return Err(Error::InvalidParameter(format!(
                    "GHZ scar needs L >= 3, got {l}"
                )));
            }
            let dim = 1usize << l;
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            amps[0] = C64::new(inv_sqrt2, 0.0);
            amps[dim - 1] = C64::new(inv_sqrt2, 0.0);
            QubitState::from_amps(l, amps)
        }
    }
}

/// Applies the sigma^y deformation at one site (default experiment site is 1).
pub fn deform(state: &QubitState, site: usize) -> Result<QubitState> {
    let mut out = state.clone();
    out.apply_local(&LocalOperator::new(vec![site], pauli_y())?)?;
    Ok(out)
}

/// Max over ops of || h_i |psi> ||.
pub fn verify_annihilation(ops: &[LocalOperator], state: &QubitState) -> Result<f64> {
    let mut worst = 0.0f64;
    for op in ops {
        let mut v = state.clone();
        v.apply_local(op)?;
        worst = worst.max(v.norm());
    }
    Ok(worst)
}
