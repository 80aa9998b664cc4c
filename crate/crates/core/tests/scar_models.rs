//! Scar-family oracles: exact annihilation on full chains, pinned component
//! values for the two-parameter local vectors, kernel agreement between the
//! general annihilator and the simplified blocks, and the sigma^y deformation
//! properties used by the quench experiments.

use faer::Mat;
use scarsim_core::scar_models::{
    all_annihilators, annihilator_general, deform, parent_hamiltonian, psi_states, scar_state,
    simplified_annihilator, verify_annihilation, wrap_site, ParentHamiltonianSpec, Variant,
};
use scarsim_core::seed::SplitMix64;
use scarsim_core::spin_ops::{eigh, kron_all, pauli_x, pauli_z, LocalOperator, OperatorSum, C64};

const ALL_VARIANTS: [Variant; 3] = [Variant::XPolarized, Variant::Cluster, Variant::Ghz];

/// Rebases the general three-site annihilator onto chain sites
/// (i, i+1, i+2) with periodic wrapping.
fn general_on_chain(g: f64, a: f64, i: usize, l: usize) -> LocalOperator {
    let op = annihilator_general(g, a).unwrap();
    let i = i as i64;
    let sites = vec![wrap_site(i, l), wrap_site(i + 1, l), wrap_site(i + 2, l)];
    LocalOperator::new(sites, op.matrix().to_owned()).unwrap()
}

#[test]
fn simplified_blocks_annihilate_their_scar_on_full_chains() {
    for l in [3usize, 6, 9, 12] {
        for variant in ALL_VARIANTS {
            let ops = all_annihilators(variant, l).unwrap();
            let state = scar_state(variant, l).unwrap();
            let residual = verify_annihilation(&ops, &state).unwrap();
            assert!(residual < 1e-12, "{variant} L={l}: residual {residual:.3e}");
        }
    }
}

#[test]
fn general_annihilator_matches_family_at_special_parameters() {
    let l = 6;
    for (g, variant) in [
        (1.0, Variant::XPolarized),
        (-1.0, Variant::Cluster),
        (0.0, Variant::Ghz),
    ] {
        let ops: Vec<LocalOperator> = (1..=l).map(|i| general_on_chain(g, 1.0, i, l)).collect();
        let state = scar_state(variant, l).unwrap();
        let residual = verify_annihilation(&ops, &state).unwrap();
        assert!(
            residual < 1e-12,
            "general (g={g}, a=1) on {variant} scar: residual {residual:.3e}"
        );
    }
}

#[test]
fn psi_component_values_at_reference_parameters() {
    // (g, a) = (1, 1): third vector is (-1, 1, 1, -1, 0, 0, 0, 0)/2.
    let psis = psi_states(1.0, 1.0).unwrap();
    let expect3 = [-0.5, 0.5, 0.5, -0.5, 0.0, 0.0, 0.0, 0.0];
    for (have, want) in psis[2].iter().zip(expect3) {
        assert!((have - want).abs() < 1e-15);
    }
    // (g, a) = (0, 1): first vector is (0, -1, 1, 1, 0, 0, 0, 0)/sqrt(3).
    let psis = psi_states(0.0, 1.0).unwrap();
    let s = 1.0 / 3.0f64.sqrt();
    let expect1 = [0.0, -s, s, s, 0.0, 0.0, 0.0, 0.0];
    for (have, want) in psis[0].iter().zip(expect1) {
        assert!((have - want).abs() < 1e-15);
    }
}

#[test]
fn psi_states_are_normalized_over_the_parameter_domain() {
    let mut rng = SplitMix64::new(7);
    for _ in 0..50 {
        let g = rng.uniform_pm1();
        let a = 0.5 * (rng.uniform_pm1() + 1.0);
        let psis = psi_states(g, a).unwrap();
        for v in psis {
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12, "g={g} a={a}");
        }
    }
}

#[test]
fn general_annihilator_is_traceless_and_hermitian() {
    let mut rng = SplitMix64::new(13);
    for _ in 0..20 {
        let g = rng.uniform_pm1();
        let a = 0.5 * (rng.uniform_pm1() + 1.0);
        let op = annihilator_general(g, a).unwrap();
        assert!(op.hermiticity_defect() < 1e-12);
        let m = op.matrix();
        let mut trace = C64::new(0.0, 0.0);
        for i in 0..8 {
            trace += m[(i, i)];
        }
        assert!(trace.norm() < 1e-12, "trace {trace} at g={g} a={a}");
    }
}

#[test]
fn general_annihilator_spectrum_is_sign_ladder_at_special_points() {
    for g in [1.0, -1.0, 0.0] {
        let op = annihilator_general(g, 1.0).unwrap();
        let (vals, _) = eigh(op.matrix()).unwrap();
        for v in &vals {
            let dist = (v + 1.0).abs().min(v.abs()).min((v - 1.0).abs());
            assert!(dist < 1e-10, "eigenvalue {v} not in {{-1, 0, 1}} at g={g}");
        }
        let zeros = vals.iter().filter(|v| v.abs() < 1e-10).count();
        assert_eq!(zeros, 4, "kernel dimension at g={g}");
    }
}

/// The kernel of the general annihilator at the special points coincides with
/// the kernel of the corresponding simplified block (both are 4-dimensional,
/// and each annihilates the other's kernel vectors).
#[test]
fn general_and_simplified_kernels_agree_at_special_points() {
    let cases: [(f64, Variant); 3] = [
        (1.0, Variant::XPolarized),
        (-1.0, Variant::Cluster),
        (0.0, Variant::Ghz),
    ];
    for (g, variant) in cases {
        let general = annihilator_general(g, 1.0).unwrap();
        // Simplified block i = 1 on a 3-site chain covers the same support
        // as the general annihilator (the two-site block embeds trivially).
        let simplified = simplified_annihilator(variant, 1, 3)
            .unwrap()
            .embed_dense(3)
            .unwrap();
        let (gvals, gvecs) = eigh(general.matrix()).unwrap();
        let (svals, svecs) = eigh(simplified.as_ref()).unwrap();
        let g_kernel: Vec<usize> = (0..8).filter(|&k| gvals[k].abs() < 1e-10).collect();
        let s_kernel: Vec<usize> = (0..8).filter(|&k| svals[k].abs() < 1e-10).collect();
        assert_eq!(g_kernel.len(), 4, "{variant}");
        assert_eq!(s_kernel.len(), 4, "{variant}");
        let residual = |m: faer::MatRef<'_, C64>, v: faer::MatRef<'_, C64>, col: usize| -> f64 {
            let mut acc = 0.0;
            for i in 0..8 {
                let mut x = C64::new(0.0, 0.0);
                for j in 0..8 {
                    x += m[(i, j)] * v[(j, col)];
                }
                acc += x.norm_sqr();
            }
            acc.sqrt()
        };
        for &k in &g_kernel {
            let r = residual(simplified.as_ref(), gvecs.as_ref(), k);
            assert!(
                r < 1e-10,
                "{variant}: simplified on general-kernel vector: {r:.3e}"
            );
        }
        for &k in &s_kernel {
            let r = residual(general.matrix(), svecs.as_ref(), k);
            assert!(
                r < 1e-10,
                "{variant}: general on simplified-kernel vector: {r:.3e}"
            );
        }
    }
}

#[test]
fn two_site_block_spectrum_on_minimal_chain() {
    // -z1 + zx on two sites has eigenvalues {-2, 0, 0, 2}.
    let op = simplified_annihilator(Variant::XPolarized, 1, 2).unwrap();
    let (vals, _) = eigh(op.matrix()).unwrap();
    let expect = [-2.0, 0.0, 0.0, 2.0];
    for (have, want) in vals.iter().zip(expect) {
        assert!((have - want).abs() < 1e-12, "{vals:?}");
    }
}

#[test]
fn x_polarized_scar_amplitudes_are_uniform() {
    let state = scar_state(Variant::XPolarized, 2).unwrap();
    for amp in state.amps() {
        assert!((amp - C64::new(0.5, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn cluster_scar_has_exact_three_site_correlator() {
    // <zxz> = -1 on every consecutive triple.
    let l = 6;
    let state = scar_state(Variant::Cluster, l).unwrap();
    let zxz = kron_all(&[pauli_z().as_ref(), pauli_x().as_ref(), pauli_z().as_ref()]);
    for i in 1..=l {
        let i = i as i64;
        let sites = vec![wrap_site(i, l), wrap_site(i + 1, l), wrap_site(i + 2, l)];
        let mut h = OperatorSum::new(l);
        h.push(1.0, LocalOperator::new(sites, zxz.clone()).unwrap())
            .unwrap();
        let val = h.expectation(&state).unwrap();
        assert!((val + 1.0).abs() < 1e-12, "triple at {i}: {val}");
    }
}

#[test]
fn cluster_scar_half_chain_entropy_is_two_bonds() {
    // A contiguous half of the ring cuts exactly two bonds: S = 2 ln 2.
    let target = 2.0 * std::f64::consts::LN_2;
    for l in [6usize, 12] {
        let state = scar_state(Variant::Cluster, l).unwrap();
        let (s_vn, _) = state.entropies(l / 2).unwrap();
        assert!((s_vn - target).abs() < 1e-12, "L={l}: {s_vn}");
    }
}

#[test]
fn parent_hamiltonian_annihilates_scar_for_random_weights() {
    let l = 6;
    let mut rng = SplitMix64::new(101);
    for variant in ALL_VARIANTS {
        let state = scar_state(variant, l).unwrap();
        for _ in 0..10 {
            // weights in [0.5, 1.5], safely away from zero
            let k: Vec<f64> = (0..l).map(|_| 1.0 + 0.5 * rng.uniform_pm1()).collect();
            let spec = ParentHamiltonianSpec { variant, l, k };
            let h = parent_hamiltonian(&spec).unwrap();
            let hs = h.apply(&state).unwrap();
            assert!(hs.norm() < 1e-12, "{variant}: |H|S>| = {:.3e}", hs.norm());
        }
    }
}

#[test]
fn parent_hamiltonian_rejects_bad_weights() {
    let spec = ParentHamiltonianSpec {
        variant: Variant::XPolarized,
        l: 4,
        k: vec![1.0, 0.0, 1.0, 1.0],
    };
    let err = parent_hamiltonian(&spec).unwrap_err().to_string();
    assert!(err.contains("k_2"), "error should name the position: {err}");

    let spec = ParentHamiltonianSpec {
        variant: Variant::XPolarized,
        l: 4,
        k: vec![1.0, 1.0],
    };
    assert!(parent_hamiltonian(&spec).is_err());

    // empty weights default to all ones
    let spec = ParentHamiltonianSpec::uniform(Variant::XPolarized, 4);
    let h = parent_hamiltonian(&spec).unwrap();
    assert_eq!(h.terms().len(), 4);
}

#[test]
fn deformation_is_an_involution_up_to_phase() {
    let l = 6;
    for variant in ALL_VARIANTS {
        let state = scar_state(variant, l).unwrap();
        let twice = deform(&deform(&state, 1).unwrap(), 1).unwrap();
        let fid = twice.fidelity(&state).unwrap();
        assert!((fid - 1.0).abs() < 1e-12, "{variant}: fidelity {fid}");
    }
}

#[test]
fn deformed_x_polarized_scar_is_still_a_product_state() {
    let l = 6;
    let state = deform(&scar_state(Variant::XPolarized, l).unwrap(), 1).unwrap();
    for cut in 1..l {
        let (s_vn, s_r2) = state.entropies(cut).unwrap();
        assert!(s_vn.abs() < 1e-12 && s_r2.abs() < 1e-12, "cut {cut}");
    }
}

#[test]
fn deformed_x_polarized_scar_has_zero_parent_energy() {
    let l = 6;
    let spec = ParentHamiltonianSpec::uniform(Variant::XPolarized, l);
    let h = parent_hamiltonian(&spec).unwrap();
    let state = deform(&scar_state(Variant::XPolarized, l).unwrap(), 1).unwrap();
    let e = h.expectation(&state).unwrap();
    assert!(e.abs() < 1e-10, "<def|H|def> = {e:.3e}");
}

#[test]
fn deformation_preserves_cluster_entanglement() {
    // A single-site unitary cannot change entanglement across any cut.
    let l = 6;
    let state = scar_state(Variant::Cluster, l).unwrap();
    let deformed = deform(&state, 1).unwrap();
    let (before, _) = state.entropies(l / 2).unwrap();
    let (after, _) = deformed.entropies(l / 2).unwrap();
    assert!((before - after).abs() < 1e-10);
}

#[test]
fn deformed_cluster_scar_breaks_annihilation() {
    let l = 6;
    let ops = all_annihilators(Variant::Cluster, l).unwrap();
    let deformed = deform(&scar_state(Variant::Cluster, l).unwrap(), 1).unwrap();
    let residual = verify_annihilation(&ops, &deformed).unwrap();
    assert!(residual >= 0.5, "residual {residual}");
}

#[test]
fn block_index_and_size_validation() {
    assert!(simplified_annihilator(Variant::XPolarized, 0, 6).is_err());
    assert!(simplified_annihilator(Variant::XPolarized, 7, 6).is_err());
    assert!(simplified_annihilator(Variant::Cluster, 1, 2).is_err());
    assert!(simplified_annihilator(Variant::Ghz, 1, 2).is_err());
    assert!(simplified_annihilator(Variant::XPolarized, 1, 2).is_ok());
    assert!(scar_state(Variant::Cluster, 2).is_err());
    assert!(scar_state(Variant::Ghz, 2).is_err());
}

#[test]
fn variant_names_round_trip() {
    for variant in ALL_VARIANTS {
        let parsed: Variant = variant.name().parse().unwrap();
        assert_eq!(parsed, variant);
    }
    assert_eq!("x".parse::<Variant>().unwrap(), Variant::XPolarized);
    assert_eq!("c".parse::<Variant>().unwrap(), Variant::Cluster);
    assert!("xy".parse::<Variant>().is_err());
}

#[test]
fn site_wrapping_is_periodic_and_one_based() {
    assert_eq!(wrap_site(1, 6), 1);
    assert_eq!(wrap_site(6, 6), 6);
    assert_eq!(wrap_site(7, 6), 1);
    assert_eq!(wrap_site(0, 6), 6);
    assert_eq!(wrap_site(-1, 6), 5);
    assert_eq!(wrap_site(13, 6), 1);
}

#[test]
fn scar_states_are_normalized() {
    for variant in ALL_VARIANTS {
        for l in [3usize, 6] {
            let state = scar_state(variant, l).unwrap();
            assert!((state.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn general_annihilator_embeds_as_hermitian_dense() {
    let op = annihilator_general(0.3, 0.7).unwrap();
    let dense = op.embed_dense(4).unwrap();
    let mut defect = 0.0f64;
    for i in 0..dense.nrows() {
        for j in 0..dense.ncols() {
            defect = defect.max((dense[(i, j)] - dense[(j, i)].conj()).norm());
        }
    }
    assert!(defect < 1e-14);
    let _ = Mat::<C64>::zeros(2, 2); // keep faer linked into this test crate
}
