//! Properties of the numerical diagonalization over random Hamiltonians.

use larmor_core::dirac::{build_hamiltonian, standard_basis};
use larmor_core::oracle::{classify_spin, diagonalize, splitting_numeric, CLUSTER_TOL};
use larmor_core::quantities::NaturalParams;
use larmor_core::spectrum::{eigenvalues_analytic, spin_splitting};
use proptest::prelude::*;

fn signed_log() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64, any::<bool>()).prop_map(|(u, neg)| if neg { -(10f64.powf(u)) } else { 10f64.powf(u) })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn eigenvalues_agree_with_closed_form(p in signed_log(), pi in signed_log(), d in signed_log()) {
        let np = NaturalParams::new(p, pi, d);
        let es = diagonalize(&build_hamiltonian(&np).unwrap()).unwrap();
        let analytic = eigenvalues_analytic(np.eta_tilde(), np.delta_tilde()).unwrap().sorted();
        for (a, b) in es.eigenvalues.iter().zip(analytic) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs());
        }
    }

    #[test]
    fn reconstruction_and_residual(p in signed_log(), pi in signed_log(), d in signed_log()) {
        let h = build_hamiltonian(&NaturalParams::new(p, pi, d)).unwrap();
        let es = diagonalize(&h).unwrap();
        let lmax = es.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(es.reconstruct().max_abs_diff(&h) <= 1e-12 * (1.0 + lmax));
        prop_assert!(es.residual < 1e-12 * (1.0 + lmax));
    }

    #[test]
    fn labels_follow_sigma_x(p in signed_log(), pi in signed_log(), d in signed_log()) {
        let basis = standard_basis();
        let h = build_hamiltonian(&NaturalParams::new(p, pi, d)).unwrap();
        let l = classify_spin(&diagonalize(&h).unwrap(), &basis, CLUSTER_TOL).unwrap();
        for e in &l.entries {
            prop_assert!(e.sigma_x_expectation.abs() > 1.0 - 1e-10);
            let sv = basis.sigma_x_big.mul_vec(&e.vector);
            for (a, x) in sv.iter().zip(&e.vector) {
                prop_assert!((a - x * e.sigma_x_expectation.signum()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn numeric_splitting_matches_for_positive_delta(
        p in -10.0..10.0f64,
        pi in -10.0..10.0f64,
        d in 1e-6..10.0f64,
    ) {
        let np = NaturalParams::new(p, pi, d);
        let n = splitting_numeric(&np, &standard_basis()).unwrap();
        prop_assert!(n >= 0.0);
        prop_assert!((n - spin_splitting(np.eta_tilde(), d).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn exact_degeneracies_are_labeled() {
    let basis = standard_basis();
    for (p, pi, d) in [(0.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0), (3.0, 0.0, 0.0), (0.0, 2.0, 0.0)] {
        let n = splitting_numeric(&NaturalParams::new(p, pi, d), &basis).unwrap();
        let e = spin_splitting(p.hypot(pi), d).unwrap();
        assert!((n - e).abs() < 1e-12, "({p}, {pi}, {d}): {n} vs {e}");
    }
}
