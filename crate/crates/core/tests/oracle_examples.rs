use mieflow_core::estimator::{oracle_check, random_oracle_instance};
use mieflow_core::gaussian::GaussianState;
use mieflow_core::lattice::{xx_chain_state, ChainGeometry};
use mieflow_core::linalg::CMatrix;
use mieflow_core::oracle::strange::check_sc_bound;
use mieflow_core::oracle::{fock, mie_mii_exact, outcome_ensemble, Frame, ProductBasis, StateVector};
use mieflow_core::region::RegionSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

fn xx6() -> (GaussianState, StateVector) {
    let g = xx_chain_state(ChainGeometry::new(6).unwrap(), 0.5).unwrap();
    let phi = fock::orbitals_from_correlation(g.corr());
    let dense = fock::slater_state(&phi, &(0..6).collect::<Vec<_>>()).unwrap();
    (g, dense)
}

fn random_op(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
}

#[test]
fn xx_edge_sites_respect_bound_for_random_operators() {
    let (_, dense) = xx6();
    let regions = RegionSpec::partition(6, vec![0], vec![5], vec![1, 2, 3, 4]).unwrap();
    let basis = ProductBasis::z(&regions.m, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let ra = StateVector::basis(vec![2], &[rng.gen_range(0..2)]).unwrap();
        let rb = StateVector::basis(vec![2], &[rng.gen_range(0..2)]).unwrap();
        let r = check_sc_bound(&dense, &regions, &basis, &ra, &rb, &random_op(&mut rng, 2), &random_op(&mut rng, 2)).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.bound >= 0.0);
    }
}

#[test]
fn bell_measured_singlets_give_ln2_above_bound() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = [0.0, h, -h, 0.0];
    let amps: Vec<Complex64> = (0..16).map(|i| Complex64::new(singlet[i >> 2] * singlet[i & 3], 0.0)).collect();
    let state = StateVector::qubits(amps).unwrap();
    let regions = RegionSpec::partition(4, vec![0], vec![3], vec![1, 2]).unwrap();
    let basis = ProductBasis::new(vec![Frame::bell(1, 2)]).unwrap();
    assert!((mie_mii_exact(&state, &regions, &basis).unwrap().mie - LN_2).abs() < 1e-12);
    let zero = StateVector::basis(vec![2], &[0]).unwrap();
    let lower = CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0)));
    let r = check_sc_bound(&state, &regions, &basis, &zero, &zero, &lower, &lower).unwrap();
    assert!((r.mie - LN_2).abs() < 1e-12);
    assert!(r.holds() && r.bound > 0.0, "{r:?}");
}

#[test]
fn xx_joint_outcomes_match_enumeration() {
    let (g, dense) = xx6();
    let regions = RegionSpec::partition(6, vec![0, 1], vec![4, 5], vec![2, 3]).unwrap();
    let exact: Vec<f64> = outcome_ensemble(&dense, &regions, &ProductBasis::z(&[2, 3], 2)).unwrap().iter().map(|(p, _)| *p).collect();
    let n = 100_000;
    let mut counts = [0usize; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..n {
        let rec = g.clone().measure_region(&[2, 3], &mut rng).unwrap();
        counts[(rec.outcomes[0] * 2 + rec.outcomes[1]) as usize] += 1;
    }
    let tv = 0.5 * counts.iter().zip(&exact).map(|(&k, &p)| (k as f64 / n as f64 - p).abs()).sum::<f64>();
    let sigma = (exact.iter().map(|p| p * (1.0 - p)).sum::<f64>() / n as f64).sqrt();
    assert!(tv < 3.0 * sigma, "tv {tv} sigma {sigma}");
}

#[test]
fn random_instances_agree_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for k in 0..5 {
        let inst = random_oracle_instance(8, &mut rng).unwrap();
        let c = oracle_check(&inst, 4000, k).unwrap();
        assert!(c.max_probability_error < 1e-10, "{c:?}");
        assert!(c.within(4.0), "{c:?}");
    }
}
