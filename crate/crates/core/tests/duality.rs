use gaugephase::dual_solve::{dual_objective, project_hyperplane, Gauge};
use gaugephase::operators::gen_gaussian;
use gaugephase::spectral::{EigMethod, SpectralOpts};
use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // ⟨A*(y), xxᵀ⟩ = ⟨y, b⟩ = 1 forces ‖x‖²·λ_max(A*(y)) ≥ 1
    #[test]
    fn weak_duality_on_feasible_points(
        n in 1usize..=10,
        extra in 0usize..50,
        seed in 0u64..10_000,
        raw in prop::collection::vec(-5.0f64..5.0, 60),
        nuclear in any::<bool>(),
    ) {
        let m = (n + extra).min(60);
        let inst = gen_gaussian(m, n, seed).unwrap();
        let b = inst.b.values();
        let s = DVector::from_column_slice(&raw[..m]);
        let y = project_hyperplane(&s, b).unwrap();
        prop_assert!((y.dot(b) - 1.0).abs() <= 1e-9);
        let gauge = if nuclear { Gauge::Nuclear } else { Gauge::TracePsd };
        let dense = SpectralOpts::with_method(EigMethod::Dense);
        let (dual, _) = dual_objective(&inst.ensemble, &y, gauge, &dense, 0).unwrap();
        let x = inst.x.as_ref().unwrap().values();
        prop_assert!(x.norm_squared() * dual >= 1.0 - 1e-9);
    }
}
