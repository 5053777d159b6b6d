//! Property checks on the quantum-information primitives and channels.

use proptest::prelude::*;
use qbdissim::collision::{CollisionChannel, CollisionSpec};
use qbdissim::control::{dephase, propagate_protocol, DriveParams, Protocol};
use qbdissim::lindblad::{liouvillian, propagate};
use qbdissim::qcore::info::energy;
use qbdissim::qcore::linalg::{commutator, max_abs};
use qbdissim::qcore::operators::{sigma_minus, sigma_plus};
use qbdissim::qcore::{
    ergotropy, kron, matrix_exp, mutual_information, thermal_state, vn_entropy, CMatrix, DensityMatrix,
    HermitianOperator, C64,
};

fn complex_entries(d: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d)
}

fn matrix(d: usize, e: &[(f64, f64)]) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| C64::new(e[i * d + j].0, e[i * d + j].1))
}

fn state(d: usize, e: &[(f64, f64)]) -> DensityMatrix {
    let a = matrix(d, e);
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    let dims = if d == 4 { vec![2, 2] } else { vec![d] };
    DensityMatrix::with_dims(m.unscale(tr), dims).unwrap()
}

fn hamiltonian(d: usize, e: &[(f64, f64)]) -> HermitianOperator {
    let a = matrix(d, e);
    HermitianOperator::new((&a + a.adjoint()).scale(0.5), "H").unwrap()
}

fn unitary(d: usize, e: &[(f64, f64)]) -> CMatrix {
    let h = hamiltonian(d, e);
    matrix_exp(&h.matrix().scale(3.0).map(|z| z * C64::new(0.0, -1.0)))
}

fn qubit_drive() -> CollisionSpec {
    let v = kron(&sigma_plus(), &sigma_minus()) + kron(&sigma_minus(), &sigma_plus());
    CollisionSpec::new(
        HermitianOperator::qubit(1.0, "H_S"),
        HermitianOperator::qubit(1.0, "H_R"),
        HermitianOperator::with_dims(v, "V", vec![2, 2]).unwrap(),
        0.5,
        1e-3,
        0.7,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ergotropy_bounds_any_unitary(d in prop::sample::select(vec![2usize, 4]), seed in complex_entries(4 * 4)) {
        let rho = state(d, &seed[..d * d]);
        let h = hamiltonian(d, &seed[d * d..2 * d * d]);
        let u = unitary(d, &seed[2 * d * d..3 * d * d]);
        let w = ergotropy(&rho, &h).unwrap();
        let e = energy(&rho, &h);
        let rotated = DensityMatrix::from_evolved(&u * rho.matrix() * u.adjoint(), rho.basis_dims().to_vec()).unwrap();
        let e_min = h.spectral().eigenvalues[0];
        prop_assert!(w >= -1e-12);
        prop_assert!(w <= e - e_min + 1e-10);
        prop_assert!(w >= e - energy(&rotated, &h) - 1e-10);
    }

    #[test]
    fn mutual_information_bounds(seed in complex_entries(4)) {
        let rho = state(4, &seed);
        let i = mutual_information(&rho, &[0]).unwrap();
        prop_assert!(i >= -1e-12);
        prop_assert!(i <= 2.0 * 2f64.ln() + 1e-12);
        prop_assert!(vn_entropy(&rho).unwrap() <= 4f64.ln() + 1e-12);
        let product = state(2, &seed[..4]).kron(&state(2, &seed[..4]));
        prop_assert!(mutual_information(&product, &[0]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn thermal_state_commutes(seed in complex_entries(3), beta in 0.01..10.0f64) {
        let h = hamiltonian(3, &seed);
        let tau = thermal_state(&h, beta).unwrap();
        prop_assert!(max_abs(&commutator(h.matrix(), tau.matrix())) < 1e-10);
        prop_assert!((tau.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(ergotropy(&tau, &h).unwrap().abs() < 1e-10);
    }

    #[test]
    fn dephasing_conserves_energy(seed in complex_entries(2), alpha in 0.0..1.0f64, p in 0.0..1.0f64) {
        let rho = state(2, &seed);
        let x = CMatrix::from_fn(2, 2, |i, j| C64::new(if i == j { 0.0 } else { 0.5 }, 0.0));
        let h = HermitianOperator::new(HermitianOperator::qubit(1.5, "H").matrix() + x.scale(alpha), "H").unwrap();
        let out = dephase(&rho, p, &h).unwrap();
        prop_assert!((energy(&out, &h) - energy(&rho, &h)).abs() < 1e-12);
        prop_assert!(vn_entropy(&out).unwrap() >= vn_entropy(&rho).unwrap() - 1e-10);
    }

    #[test]
    fn collision_channel_is_cptp(seed in complex_entries(2), t in 0.0..20.0f64) {
        let spec = qubit_drive();
        let rho = state(2, &seed);
        let channel = CollisionChannel::new(&spec).unwrap();
        let (out, _) = channel.step(rho.matrix());
        prop_assert!(DensityMatrix::new(out).unwrap().validate().is_ok());
        let l = liouvillian(&spec).unwrap();
        let later = propagate(&l, &rho, t).unwrap();
        prop_assert!(later.validate().is_ok());
        prop_assert!((later.matrix().trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn driven_propagation_stays_physical(
        seed in complex_entries(2),
        alphas in prop::collection::vec(0.0..1.0f64, 1..12),
        total in 0.5..30.0f64,
    ) {
        let params = DriveParams::new(1.5, 0.5, 1.0).unwrap();
        let protocol = Protocol::from_alphas(&alphas, total).unwrap();
        prop_assert!((protocol.total_time() - total).abs() < 1e-12);
        for rho in propagate_protocol(&protocol, &state(2, &seed), &params).unwrap() {
            prop_assert!(rho.validate().is_ok());
        }
    }
}
