//! Qubit-chain state vectors, embedded local operators, and entanglement
//! measures.
//!
//! Basis convention: a chain of L sites is stored as 2^L amplitudes indexed by
//! b = 0..2^L-1, where bit (L - s) of b holds site s (site 1 is the most
//! significant bit) and bit value 0 means the sigma^z = +1 state |up>.
//! A `LocalOperator` stores a 2^k x 2^k matrix over an ordered site list
//! (sites[0] is the most significant bit of the local index), so embeddings
//! inherit the global ordering automatically.
//!
//! The embedded application kernel enumerates the 2^(L-k) environment
//! configurations by bit deposition and applies the local matrix in place;
//! cost O(2^L * 2^k) per operator, no temporaries of full dimension.

use crate::{Error, Result};
use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

/// Complex amplitude type used throughout (re, im as f64).
pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

// ---------------------------------------------------------------------------
// small dense helpers
// ---------------------------------------------------------------------------

/// 2x2 identity.
pub fn identity2() -> Mat<C64> {
    Mat::from_fn(2, 2, |i, j| if i == j { ONE } else { ZERO })
}

/// Pauli x.
pub fn pauli_x() -> Mat<C64> {
    Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

/// Pauli y.
pub fn pauli_y() -> Mat<C64> {
    let mut m = Mat::zeros(2, 2);
    m[(0, 1)] = C64::new(0.0, -1.0);
    m[(1, 0)] = C64::new(0.0, 1.0);
    m
}

/// Pauli z (|up> = index 0 has eigenvalue +1).
pub fn pauli_z() -> Mat<C64> {
    let mut m = Mat::zeros(2, 2);
    m[(0, 0)] = ONE;
    m[(1, 1)] = -ONE;
    m
}

/// Kronecker product (a ⊗ b), row index of `a` most significant.
pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Kronecker product of a list of matrices, first entry most significant.
pub fn kron_all(mats: &[MatRef<'_, C64>]) -> Mat<C64> {
    assert!(!mats.is_empty());
    let mut out = mats[0].to_owned();
    for m in &mats[1..] {
        out = kron(out.as_ref(), *m);
    }
    out
}

/// Max-abs hermiticity defect of a square matrix.
pub fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian eigendecomposition: returns ascending eigenvalues and the
/// column-eigenvector matrix.
pub fn eigh(m: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("self-adjoint eigensolver: {e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let svd = m.svd().map_err(|e| Error::Eigen(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    Ok((0..m.nrows().min(m.ncols())).map(|i| s[i].re).collect())
}

/// exp(-i * t * H) for Hermitian H, via eigendecomposition.
pub fn hermitian_exp_factor(h: MatRef<'_, C64>, t: f64) -> Result<Mat<C64>> {
    let n = h.nrows();
    let (vals, v) = eigh(h)?;
    let phases = Mat::from_fn(n, n, |i, j| {
        if i == j {
            let ph = -vals[i] * t;
            C64::new(ph.cos(), ph.sin())
        } else {
            ZERO
        }
    });
    Ok(&v * &phases * v.adjoint())
}

// ---------------------------------------------------------------------------
// local operators
// ---------------------------------------------------------------------------

/// A 2^k x 2^k matrix acting on an ordered list of 1-based chain sites.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    sites: Vec<usize>,
    matrix: Mat<C64>,
}

impl LocalOperator {
    pub fn new(sites: Vec<usize>, matrix: Mat<C64>) -> Result<Self> {
        let k = sites.len();
        if k == 0 {
            return Err(Error::InvalidParameter("operator needs >= 1 site".into()));
        }
        let dim = 1usize << k;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected {dim}x{dim} for {k} sites",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::InvalidParameter(format!(
                "duplicate sites in {sites:?}"
            )));
        }
        if sorted[0] == 0 {
            return Err(Error::InvalidParameter("sites are 1-based".into()));
        }
        Ok(Self { sites, matrix })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(self.matrix.as_ref())
    }

    /// exp(-i * t * H) of this (Hermitian) operator, on the same sites.
    pub fn exp_factor(&self, t: f64) -> Result<LocalOperator> {
        let u = hermitian_exp_factor(self.matrix.as_ref(), t)?;
        LocalOperator::new(self.sites.clone(), u)
    }

    /// Scaled copy: c * H.
    pub fn scaled(&self, c: f64) -> LocalOperator {
        let m = Mat::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| {
            self.matrix[(i, j)] * c
        });
        LocalOperator {
            sites: self.sites.clone(),
            matrix: m,
        }
    }

    /// Dense embedding into the full 2^l-dimensional space.
    pub fn embed_dense(&self, l: usize) -> Result<Mat<C64>> {
        check_sites(l, &self.sites)?;
        guard_dense(l)?;
        let k = self.sites.len();
        let dim_local = 1usize << k;
        let full_dim = 1usize << l;
        let offsets = site_offsets(l, &self.sites);
        let mask: usize = offsets[dim_local - 1];
        let mut out = Mat::zeros(full_dim, full_dim);
        for idx_row in 0..full_dim {
            let env = idx_row & !mask;
            let a = local_label(idx_row, l, &self.sites);
            for b in 0..dim_local {
                let v = self.matrix[(a, b)];
                if v != ZERO {
                    out[(idx_row, env | offsets[b])] = v;
                }
            }
        }
        Ok(out)
    }
}

/// Sum of real-weighted local operators on an L-site chain.
#[derive(Debug, Clone)]
pub struct OperatorSum {
    l: usize,
    terms: Vec<(f64, LocalOperator)>,
}

impl OperatorSum {
    pub fn new(l: usize) -> Self {
        Self {
            l,
            terms: Vec::new(),
        }
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn terms(&self) -> &[(f64, LocalOperator)] {
        &self.terms
    }

    pub fn push(&mut self, coeff: f64, op: LocalOperator) -> Result<()> {
        check_sites(self.l, op.sites())?;
        self.terms.push((coeff, op));
        Ok(())
    }

    /// Sum of coeff * O |psi>.
    pub fn apply(&self, state: &QubitState) -> Result<QubitState> {
        if state.l() != self.l {
            return Err(Error::DimensionMismatch(format!(
                "operator on L = {} applied to state with L = {}",
                self.l,
                state.l()
            )));
        }
        let mut out = vec![ZERO; state.dim()];
        let mut scratch = state.amps().to_vec();
        for (c, op) in &self.terms {
            scratch.copy_from_slice(state.amps());
            apply_matrix_inplace(&mut scratch, self.l, op.sites(), op.matrix());
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += *c * s;
            }
        }
        QubitState::from_amps(self.l, out)
    }

    /// Real part of <psi| Sum |psi> (exact for Hermitian terms).
    pub fn expectation(&self, state: &QubitState) -> Result<f64> {
        let applied = self.apply(state)?;
        Ok(state.inner(&applied)?.re)
    }

    /// Dense matrix of the sum; guarded to L <= 12.
    pub fn to_dense(&self) -> Result<Mat<C64>> {
        guard_dense(self.l)?;
        let dim = 1usize << self.l;
        let mut out = Mat::zeros(dim, dim);
        for (c, op) in &self.terms {
            let e = op.embed_dense(self.l)?;
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += e[(i, j)] * *c;
                }
            }
        }
        Ok(out)
    }

    /// Lower bound on the spectral norm via power iteration from a seeded
    /// random state. For traceless Hamiltonians this also lower-bounds the
    /// spectral range.
    pub fn spectral_norm_lower(&self, iters: usize, seed: u64) -> Result<f64> {
        let mut rng = crate::seed::SplitMix64::new(seed);
        let mut v = QubitState::random(self.l, &mut rng);
        let mut norm_est = 0.0;
        for _ in 0..iters {
            let w = self.apply(&v)?;
            norm_est = w.norm();
            if norm_est == 0.0 {
                return Ok(0.0);
            }
            v = w;
            v.normalize();
        }
        Ok(norm_est)
    }
}

// ---------------------------------------------------------------------------
// state vectors
// ---------------------------------------------------------------------------

/// Normalized-or-not state vector over L qubits.
#[derive(Debug, Clone)]
pub struct QubitState {
    l: usize,
    amps: Vec<C64>,
}

impl QubitState {
    pub fn from_amps(l: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << l {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for L = {l}",
                amps.len()
            )));
        }
        Ok(Self { l, amps })
    }

    /// Computational basis state |index>.
    pub fn basis_state(l: usize, index: usize) -> Result<Self> {
        let dim = 1usize << l;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for L = {l}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { l, amps })
    }

    /// Product state with per-site single-qubit amplitudes [up, down].
    pub fn product_state(l: usize, site_amp: impl Fn(usize) -> [C64; 2]) -> Self {
        let dim = 1usize << l;
        let per_site: Vec<[C64; 2]> = (1..=l).map(&site_amp).collect();
        let mut amps = vec![ONE; dim];
        for (b, a) in amps.iter_mut().enumerate() {
            for s in 1..=l {
                let bit = (b >> (l - s)) & 1;
                *a *= per_site[s - 1][bit];
            }
        }
        Self { l, amps }
    }

    /// Haar-ish random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn random(l: usize, rng: &mut crate::seed::SplitMix64) -> Self {
        let dim = 1usize << l;
        let mut amps = Vec::with_capacity(dim);
        for _ in 0..dim {
            // Box-Muller from two open-interval uniforms.
            let u1 = (1.0 - rng.uniform01()).max(f64::MIN_POSITIVE);
            let u2 = rng.uniform01();
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            amps.push(C64::new(r * c, r * s));
        }
        let mut st = Self { l, amps };
        st.normalize();
        st
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// <self|other>.
    pub fn inner(&self, other: &QubitState) -> Result<C64> {
        if self.l != other.l {
            return Err(Error::DimensionMismatch(format!(
                "inner product between L = {} and L = {}",
                self.l, other.l
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &QubitState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Applies a local operator in place.
    pub fn apply_local(&mut self, op: &LocalOperator) -> Result<()> {
        check_sites(self.l, op.sites())?;
        apply_matrix_inplace(&mut self.amps, self.l, op.sites(), op.matrix());
        Ok(())
    }

    /// (S_vn, S_renyi2) in nats across the cut after the first `cut` sites.
    pub fn entropies(&self, cut: usize) -> Result<(f64, f64)> {
        if cut == 0 || cut >= self.l {
            return Err(Error::InvalidParameter(format!(
                "cut {cut} must satisfy 1 <= cut <= L-1 = {}",
                self.l - 1
            )));
        }
        let rb_bits = self.l - cut;
        let ra = 1usize << cut;
        let rb = 1usize << rb_bits;
        let m = Mat::from_fn(ra, rb, |i, j| self.amps[(i << rb_bits) | j]);
        let sv = singular_values(m.as_ref())?;
        let mut s_vn = 0.0;
        let mut purity = 0.0;
        for sigma in sv {
            let p = sigma * sigma;
            if p > 0.0 {
                s_vn -= p * p.ln();
                purity += p * p;
            }
        }
        Ok((s_vn, -purity.ln()))
    }
}

/// Page's average entanglement entropy ln(m) - m/(2n) for subsystem dimensions
/// m <= n (arguments may be given in either order).
pub fn page_entropy(dim_a: usize, dim_b: usize) -> f64 {
    let (m, n) = if dim_a <= dim_b {
        (dim_a as f64, dim_b as f64)
    } else {
        (dim_b as f64, dim_a as f64)
    };
    m.ln() - m / (2.0 * n)
}

// ---------------------------------------------------------------------------
// embedded application kernel
// ---------------------------------------------------------------------------

fn check_sites(l: usize, sites: &[usize]) -> Result<()> {
    for &s in sites {
        if s == 0 || s > l {
            return Err(Error::InvalidParameter(format!(
                "site {s} out of range 1..={l}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn guard_dense(l: usize) -> Result<()> {
    const MAX_DENSE_L: usize = 12;
    if l > MAX_DENSE_L {
        return Err(Error::TooLargeForDense {
            l,
            max: MAX_DENSE_L,
        });
    }
    Ok(())
}

/// Offset of each local basis label within the full index (local bits only).
fn site_offsets(l: usize, sites: &[usize]) -> Vec<usize> {
    let k = sites.len();
    (0..1usize << k)
        .map(|a| {
            let mut off = 0usize;
            for (j, &s) in sites.iter().enumerate() {
                if (a >> (k - 1 - j)) & 1 == 1 {
                    off |= 1usize << (l - s);
                }
            }
            off
        })
        .collect()
}

/// Local label of a full index (inverse of the offset map).
fn local_label(index: usize, l: usize, sites: &[usize]) -> usize {
    let k = sites.len();
    let mut a = 0usize;
    for (j, &s) in sites.iter().enumerate() {
        if (index >> (l - s)) & 1 == 1 {
            a |= 1usize << (k - 1 - j);
        }
    }
    a
}

/// A local gate pre-lowered for repeated in-place application at fixed L.
#[derive(Debug, Clone)]
pub struct CompiledGate {
    dim: usize,
    env_count: usize,
    /// Local-site bit positions, ascending, for environment deposition.
    pos: Vec<usize>,
    /// offsets[a]: full-index offset of local label a.
    offsets: Vec<usize>,
    /// Row-major flattened matrix.
    mflat: Vec<C64>,
}

impl CompiledGate {
    pub fn compile(l: usize, sites: &[usize], m: MatRef<'_, C64>) -> Result<Self> {
        check_sites(l, sites)?;
        let k = sites.len();
        if k > 6 {
            return Err(Error::InvalidParameter(format!(
                "compiled gates support up to 6 sites, got {k}"
            )));
        }
        let dim = 1usize << k;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "gate matrix {}x{} for {k} sites",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut pos: Vec<usize> = sites.iter().map(|&s| l - s).collect();
        pos.sort_unstable();
        let mflat = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| m[(i, j)]))
            .collect();
        Ok(Self {
            dim,
            env_count: 1usize << (l - k),
            pos,
            offsets: site_offsets(l, sites),
            mflat,
        })
    }

    /// In-place application to a full 2^L amplitude slice.
    pub fn apply(&self, amps: &mut [C64]) {
        let dim = self.dim;
        let mut gathered = [ZERO; 64];
        debug_assert!(dim <= 64, "compiled gates support up to 6 sites");
        for env in 0..self.env_count {
            let mut full = env;
            for &p in &self.pos {
                full = ((full >> p) << (p + 1)) | (full & ((1usize << p) - 1));
            }
            for a in 0..dim {
                gathered[a] = amps[full | self.offsets[a]];
            }
            for i in 0..dim {
                let row = &self.mflat[i * dim..(i + 1) * dim];
                let mut acc = ZERO;
                for (m_ij, g) in row.iter().zip(&gathered[..dim]) {
                    acc += m_ij * g;
                }
                amps[full | self.offsets[i]] = acc;
            }
        }
    }
}

/// One-shot embedded application (compiles and applies).
pub fn apply_matrix_inplace(amps: &mut [C64], l: usize, sites: &[usize], m: MatRef<'_, C64>) {
    let gate = CompiledGate::compile(l, sites, m).expect("validated sites/matrix");
    gate.apply(amps);
}
