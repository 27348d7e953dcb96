mod common;

use common::{bisection_eigenvalues, real_embedding, reduced_density, slater_entropy_table, von_neumann};
use ehl_core::gaussian::{Boundary, ModelSpec};
use ehl_core::linalg::hermitian_eigenvalues;
use ehl_core::{build_named_state, random_state, DenseMatrix, Family, SubsetMask};

fn mask(sites: &[usize], n: usize) -> SubsetMask {
    SubsetMask::from_sites(sites, n).unwrap()
}

/// Entropy of `block` from the explicit partial trace.
fn traced_entropy(state: &ehl_core::State, block: SubsetMask) -> f64 {
    if block.is_empty() {
        return 0.0;
    }
    let rho = reduced_density(state, block);
    let spec = hermitian_eigenvalues(&DenseMatrix::from_rows(rho).unwrap()).unwrap();
    von_neumann(spec.values())
}

#[test]
fn ghz4_pair_spectrum() {
    let s = build_named_state::<f64>(Family::Ghz, 4, None).unwrap();
    let rho = reduced_density(&s, mask(&[1, 2], 4));
    let mut spec = bisection_eigenvalues(&real_embedding(&rho));
    spec.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let expected = [0.0, 0.5];
    assert_eq!(spec.len(), 2);
    for (a, b) in spec.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12);
    }
    // The Gram path sees the same non-zero spectrum {1/2, 1/2}.
    let fast = s.reduced_spectrum(mask(&[1, 2], 4)).unwrap();
    let v = fast.values();
    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(v.iter().filter(|x| (**x - 0.5).abs() < 1e-12).count(), 2);
    assert!(v.iter().all(|x| x.abs() < 1e-12 || (x - 0.5).abs() < 1e-12));
}

#[test]
fn basis_order_site_one_most_significant() {
    // |0⟩⊗|1⟩⊗|1⟩ on sites 1..3 is basis index 0b011.
    let n = 3;
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 8];
    amps[0b011] = num_complex::Complex64::new(1.0, 0.0);
    let s = ehl_core::State::new(n, 2, amps).unwrap();
    let rho = reduced_density(&s, mask(&[1], n));
    assert!((rho[0][0].re - 1.0).abs() < 1e-15);
    let rho = reduced_density(&s, mask(&[3], n));
    assert!((rho[1][1].re - 1.0).abs() < 1e-15);
}

#[test]
fn mirror_rule_matches_direct_trace() {
    for n in 2..=8 {
        let s = random_state::<f64>(n, 900 + n as u64).unwrap();
        let table = s.entropy_table().unwrap();
        for a in table.masks() {
            let direct = traced_entropy(&s, a);
            assert!(
                (direct - table.at(a)).abs() <= 1e-10,
                "n={n} block {a}: {direct} vs {}",
                table.at(a)
            );
        }
    }
}

#[test]
fn w3_single_site() {
    let s = build_named_state::<f64>(Family::W, 3, None).unwrap();
    // Spectrum {1/3, 2/3}.
    let expected = -(1.0f64 / 3.0) * (1.0f64 / 3.0).ln() - (2.0f64 / 3.0) * (2.0f64 / 3.0).ln();
    assert!((traced_entropy(&s, mask(&[2], 3)) - expected).abs() < 1e-12);
    assert!((s.block_entropy(mask(&[2], 3)).unwrap() - expected).abs() < 1e-12);
}

fn assert_gaussian_matches_slater(spec: &ModelSpec) {
    let gs = spec.ground_state::<f64>().unwrap();
    let fast = gs.entropy_table().unwrap();
    let oracle = slater_entropy_table(&gs);
    for (k, (a, b)) in fast.values().iter().zip(&oracle).enumerate() {
        assert!((a - b).abs() <= 1e-9, "{spec:?} mask {k}: {a} vs {b}");
    }
}

#[test]
fn gaussian_tables_match_slater_states() {
    for n in 2..=6 {
        for delta in [0.0, 0.3, -0.6, 1.0] {
            assert_gaussian_matches_slater(&ModelSpec::dimerized(n, delta));
        }
        assert_gaussian_matches_slater(&ModelSpec::random_hopping(n, 17 + n as u64));
    }
    assert_gaussian_matches_slater(&ModelSpec::dimerized(6, 0.4).with_boundary(Boundary::Periodic));
    let mut quarter = ModelSpec::random_hopping(6, 3);
    quarter.filling = Some(2);
    assert_gaussian_matches_slater(&quarter);
}

#[test]
fn non_contiguous_blocks_need_fermion_signs() {
    // Without the block-first reordering the {1,3} entropy of a
    // free-fermion chain differs from the correlation-matrix value.
    let gs = ModelSpec::dimerized(4, 0.2).ground_state::<f64>().unwrap();
    let block = mask(&[1, 3], 4);
    let plain = common::slater_state(&gs, &[0, 1, 2, 3]);
    let naive = traced_entropy(&plain, block);
    let exact = gs.block_entropy(block).unwrap();
    assert!((naive - exact).abs() > 1e-3, "{naive} vs {exact}");
    let reordered = common::slater_state(&gs, &[0, 2, 1, 3]);
    assert!((traced_entropy(&reordered, mask(&[1, 2], 4)) - exact).abs() < 1e-10);
}
