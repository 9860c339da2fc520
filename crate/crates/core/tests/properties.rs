//! Randomized invariants across modules.

use mrk_core::matrange::{membership, nu_n, MembershipStatus, SDP_TOL};
use mrk_core::matrix::{
    eig_hermitian, kron, partial_trace, random_hermitian, random_matrix, random_unitary, rng_from_seed,
    schatten_norm, ComplexMatrix, Subsystem, C64,
};
use mrk_core::numrange::{boundary_points, numerical_radius};
use mrk_core::sdp::{self, SdpProblem, SdpStatus};
use mrk_core::ucp::{random_ucp, validate};
use proptest::prelude::*;

fn omega(t: &ComplexMatrix) -> f64 {
    numerical_radius(t, 1e-12).unwrap().omega
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_is_a_schatten_isometry(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let m = random_matrix(k, &mut rng);
        prop_assert_eq!(m.adjoint().adjoint(), m.clone());
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let a = schatten_norm(&m, p).unwrap();
            let b = schatten_norm(&m.adjoint(), p).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }
        let one = schatten_norm(&m, 1.0).unwrap();
        prop_assert!(one + 1e-12 >= schatten_norm(&m, f64::INFINITY).unwrap());
        prop_assert!(m.trace().norm() <= one + 1e-12);
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), d in 1usize..17) {
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(d, &mut rng);
        let eig = eig_hermitian(&h, 1e-12).unwrap();
        let err = eig.map_values(|x| x).distance(&h);
        prop_assert!(err <= 1e-9 * h.frobenius_norm().max(1.0));
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), k in 1usize..4, n in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let a = random_matrix(k, &mut rng);
        let b = random_matrix(n, &mut rng);
        let ab = kron(&a, &b);
        let pi = partial_trace(&ab, k, n, Subsystem::Input).unwrap();
        let po = partial_trace(&ab, k, n, Subsystem::Output).unwrap();
        prop_assert!(pi.max_abs_diff(&b.scale(a.trace())) <= 1e-12);
        prop_assert!(po.max_abs_diff(&a.scale(b.trace())) <= 1e-12);
    }

    #[test]
    fn ucp_maps_transport_structure(seed in any::<u64>(), k in 1usize..5, n in 1usize..5) {
        let r = n.div_ceil(k).max(1) + (seed % 3) as usize;
        let phi = random_ucp(k, n, r, seed).unwrap();
        prop_assert!(validate(&phi, 1e-9).passes);
        prop_assert!((phi.choi().trace().re - n as f64).abs() <= 1e-8);
        let mut rng = rng_from_seed(seed ^ 1);
        let a = random_matrix(k, &mut rng);
        let img = phi.apply(&a).unwrap();
        prop_assert!(phi.apply(&a.adjoint()).unwrap().max_abs_diff(&img.adjoint()) <= 1e-10);
        let psd = &a.adjoint() * &a;
        let floor = eig_hermitian(&phi.apply(&psd).unwrap().hermitian_part(), 1e-8).unwrap().min_value();
        prop_assert!(floor >= -1e-8);
    }

    #[test]
    fn numerical_range_translates(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let t = random_matrix(k, &mut rng);
        let alpha = C64::new(0.3, -1.2);
        let beta = 1.7;
        let moved = &ComplexMatrix::scalar(k, alpha) + &t.scale_real(beta);
        let a = boundary_points(&t, 64).unwrap();
        let b = boundary_points(&moved, 64).unwrap();
        for (z, w) in a.iter().zip(&b) {
            prop_assert!((alpha + beta * z - w).norm() <= 1e-8);
        }
    }

    #[test]
    fn direct_sum_radius(seed in any::<u64>(), k in 1usize..4, m in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let t = random_matrix(k, &mut rng);
        let s = random_matrix(m, &mut rng).scale_real(1.5);
        prop_assert!((omega(&t.direct_sum(&s)) - omega(&t).max(omega(&s))).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn choi_sdp_value_is_conjugation_invariant(seed in any::<u64>()) {
        // maximize ⟨C, J⟩ over the unital Choi spectrahedron, k = n = 2, before
        // and after conjugating C and the constraints by U ⊗ V.
        let mut rng = rng_from_seed(seed);
        let c = random_hermitian(4, &mut rng);
        let u = kron(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng));
        let conj = |m: &ComplexMatrix| &(&u * m) * &u.adjoint();
        let constraints = |f: &dyn Fn(&ComplexMatrix) -> ComplexMatrix| -> Vec<(ComplexMatrix, f64)> {
            let mut out = Vec::new();
            for i in 0..2 {
                for j in i..2 {
                    let e = ComplexMatrix::unit(2, 2, j, i);
                    let m = kron(&ComplexMatrix::identity(2), &e);
                    let target = if i == j { 1.0 } else { 0.0 };
                    out.push((f(&m.hermitian_part()), target));
                    if i != j {
                        out.push((f(&m.scale(C64::new(0.0, -1.0)).hermitian_part()), 0.0));
                    }
                }
            }
            out
        };
        let a = SdpProblem::new(c.scale_real(-1.0), constraints(&|m| m.clone())).unwrap();
        let b = SdpProblem::new(conj(&c).scale_real(-1.0), constraints(&conj)).unwrap();
        let sa = sdp::solve(&a, 1e-9, 100_000).unwrap();
        let sb = sdp::solve(&b, 1e-9, 100_000).unwrap();
        prop_assert_eq!(sa.status, SdpStatus::Optimal);
        prop_assert_eq!(sb.status, SdpStatus::Optimal);
        prop_assert!((sa.value - sb.value).abs() <= 2e-7, "{} vs {}", sa.value, sb.value);
    }

    #[test]
    fn nu_equals_n_omega(seed in any::<u64>(), k in 2usize..5, n in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let t = random_matrix(k, &mut rng);
        let r = nu_n(&t, n, SDP_TOL).unwrap();
        prop_assert!((r.search_value - n as f64 * omega(&t)).abs() <= 1e-5);
    }

    #[test]
    fn images_of_ucp_maps_are_members(seed in any::<u64>(), k in 2usize..4, n in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let t = random_matrix(k, &mut rng);
        let x = random_ucp(k, n, k * n, seed ^ 7).unwrap().apply(&t).unwrap();
        let v = membership(&t, &x, 1e-6).unwrap();
        prop_assert_eq!(v.status, MembershipStatus::Member);
    }
}
