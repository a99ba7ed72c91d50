//! Heat kernel signature against the matrix-exponential reference.

mod common;

use common::{random_graph, rng};
use proptest::prelude::*;
use topoclasp_core::spectral::{eig_sym, heat_kernel_oracle, hks, laplacian, log_spaced_times};
use topoclasp_core::vectorize::TopoConfig;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn hks_is_heat_kernel_diagonal(n in 1usize..=14, p in 0.1f64..0.8, seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), n, p);
        let times = TopoConfig::default().times();
        let field = hks(&g, &times).unwrap();
        for (s, &t) in times.iter().enumerate() {
            let h = heat_kernel_oracle(&g, t).unwrap();
            for v in 0..n {
                let (a, b) = (field.get(v, s), h.get(v, v));
                prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300), "v={v} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn trace_identity_and_monotonicity(n in 1usize..=14, p in 0.1f64..0.8, seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), n, p);
        let times = log_spaced_times(0.05, 20.0, 12);
        let field = hks(&g, &times).unwrap();
        let spec = eig_sym(&laplacian(&g)).unwrap();
        for (s, &t) in times.iter().enumerate() {
            let trace: f64 = (0..n).map(|v| field.get(v, s)).sum();
            let expected: f64 = spec.eigenvalues.iter().map(|l| (-l * t).exp()).sum();
            prop_assert!((trace - expected).abs() <= 1e-10 * expected.max(1.0));
            if s > 0 {
                for v in 0..n {
                    prop_assert!(field.get(v, s) <= field.get(v, s - 1) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn hks_is_permutation_equivariant(n in 2usize..=10, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.4);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let h = g.relabel(&perm).unwrap();
        let times = [0.3, 2.0];
        let (a, b) = (hks(&g, &times).unwrap(), hks(&h, &times).unwrap());
        for v in 0..n {
            for s in 0..2 {
                prop_assert!((a.get(v, s) - b.get(perm[v], s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigendecomposition_reconstructs(n in 1usize..=16, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = random_graph(&mut rng(seed), n, p);
        let l = laplacian(&g);
        let spec = eig_sym(&l).unwrap();
        let back = spec.reconstruct();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((back.get(i, j) - l.get(i, j)).abs() < 1e-10);
            }
        }
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(spec.eigenvalues[0].abs() < 1e-10);
    }
}
