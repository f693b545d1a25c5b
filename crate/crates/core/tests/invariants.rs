use fermvac_core::pipeline::*;
use fermvac_core::sweep::{run_sweep, GridRange, Quantity, SweepSpec};
use fermvac_core::*;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = ModelTag> {
    prop_oneof![Just(ModelTag::KitaevChain), Just(ModelTag::GlobalCoupling), Just(ModelTag::SquareLattice2D)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_respect_overlap_bounds(
        tag in family(),
        mu in -2.0f64..2.0,
        t in -2.0f64..2.0,
        delta in -2.0f64..2.0,
        n_max in 4usize..12,
    ) {
        let model = ModelSpec::new(tag, mu, t, delta);
        let s = site_by_site_series(&model, 1, n_max, GrowthOptions::default()).unwrap();
        prop_assert_eq!(s.len(), n_max - 1);
        for i in 0..s.len() {
            prop_assert!((0.0..=1.0).contains(&s.overlaps[i]));
            prop_assert!(s.gaps[i] >= 0.0);
            prop_assert!(s.overlaps[i].powi(2) <= s.lambda1s[i] + 1e-9);
            // a single added site carries at most one mode of entanglement
            prop_assert!(s.lambda1s[i] >= 0.5 - 1e-10);
        }
    }

    #[test]
    fn half_half_respects_bounds(
        mu in -2.0f64..2.0,
        delta in -2.0f64..2.0,
        tag in prop_oneof![Just(ModelTag::KitaevChain), Just(ModelTag::GlobalCoupling)],
    ) {
        let s = half_half_series(&ModelSpec::new(tag, mu, 1.0, delta), 12, GrowthOptions::default()).unwrap();
        for i in 0..s.len() {
            prop_assert!(s.overlaps[i].powi(2) <= s.lambda1s[i] + 1e-9);
        }
    }

    #[test]
    fn optimal_added_state_dominates_vacuum(
        tag in family(),
        mu in -2.0f64..2.0,
        delta in -2.0f64..2.0,
        n in 1usize..9,
    ) {
        let model = ModelSpec::new(tag, mu, 1.0, delta);
        let vacuum = Covariance::from_matrix(ndarray::array![[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let opt = site_by_site_step(&model, n, None).unwrap().eta;
        prop_assert!(site_by_site_probe(&model, n, &vacuum).unwrap() <= opt + 1e-9);
    }

    #[test]
    fn cost_monotone_in_epsilon_and_linear_in_prefactor(
        mu in 1.2f64..2.0,
        eps in 1e-6f64..0.5,
        shrink in 0.01f64..0.9,
        prefactor in 0.1f64..10.0,
    ) {
        let s = site_by_site_series(&ModelSpec::kitaev(mu, 1.0, 1.0), 1, 8, GrowthOptions::default()).unwrap();
        let base = complexity_estimate(&s, eps, prefactor).unwrap();
        let tighter = complexity_estimate(&s, eps * shrink, prefactor).unwrap();
        let doubled = complexity_estimate(&s, eps, 2.0 * prefactor).unwrap();
        for i in 0..s.len() {
            prop_assert!(tighter.per_step_costs[i] > base.per_step_costs[i]);
            prop_assert_eq!(doubled.per_step_costs[i], 2.0 * base.per_step_costs[i]);
        }
        prop_assert_eq!(doubled.total_cost, 2.0 * base.total_cost);
    }

    #[test]
    fn thermal_regulariser_approaches_pure_result(mu in 1.2f64..2.0, delta in 0.3f64..1.5) {
        let model = ModelSpec::kitaev(mu, 1.0, delta);
        let pure = site_by_site_step(&model, 5, None).unwrap();
        let cold = site_by_site_step(&model, 5, Some(60.0)).unwrap();
        prop_assert!((pure.eta - cold.eta).abs() < 1e-9);
        let warm = site_by_site_step(&model, 5, Some(0.5)).unwrap();
        prop_assert!(warm.eta <= pure.eta + 1e-12);
    }
}

#[test]
fn global_model_gap_closes_exactly_without_pairing() {
    let model = ModelSpec::global(0.0, 1.0, 0.0);
    let gap = |mu: f64| {
        let h = ModelSpec { params: fermvac_core::models::ModelParams::new(mu, 1.0, 0.0), ..model }
            .hamiltonian(16)
            .unwrap();
        spectral_gap(&ground_state(&h).unwrap().0)
    };
    assert!(gap(-0.5) < 1e-10);
    assert!(gap(7.5) < 1e-10);
    assert!(gap(-0.4) > 1e-3);
}

#[test]
fn kitaev_critical_lines_are_column_minima() {
    let spec = SweepSpec::new(
        ModelTag::KitaevChain,
        40,
        1.0,
        GridRange::new(-2.0, 2.0, 41).unwrap(),
        GridRange::new(-2.0, 2.0, 9).unwrap(),
        vec![Quantity::Gap],
    );
    let r = run_sweep::<f64>(&spec, 4).unwrap();
    // for each Δ away from zero the gap starts closing at |μ| = 1: that is the
    // minimum over the trivial side, and the topological side lies lower still
    for j in [0, 1, 2, 6, 7, 8] {
        let column: Vec<(f64, f64)> = (0..41).map(|i| (r.rows[i * 9 + j].mu, r.rows[i * 9 + j].value)).collect();
        let trivial_min = |sign: f64| {
            column.iter().filter(|(m, _)| sign * m >= 1.0 - 1e-12).min_by(|a, b| a.1.total_cmp(&b.1)).copied().unwrap()
        };
        for sign in [1.0, -1.0] {
            let (mu, gap) = trivial_min(sign);
            assert!((mu - sign).abs() < 1e-12, "{mu}");
            let deep = column.iter().find(|(m, _)| (m - 2.0 * sign).abs() < 1e-12).unwrap().1;
            assert!(gap < 0.5 * deep);
        }
        let topological = column.iter().filter(|(m, _)| m.abs() < 1.0 - 1e-12).map(|c| c.1).fold(f64::MAX, f64::min);
        assert!(topological < trivial_min(1.0).1);
    }
}

#[test]
fn extended_precision_agrees_with_f64_on_gapped_chain() {
    let f = site_by_site_series(&ModelSpec::kitaev(1.5, 1.0, 0.7), 1, 10, GrowthOptions::default()).unwrap();
    let x = Extended::from;
    let e =
        site_by_site_series(&ModelSpec::<Extended>::kitaev(x(1.5), x(1.0), x(0.7)), 1, 10, GrowthOptions::default())
            .unwrap();
    for i in 0..f.len() {
        assert!((f.overlaps[i] - e.overlaps[i].as_f64()).abs() < 1e-12);
        assert!((f.gaps[i] - e.gaps[i].as_f64()).abs() < 1e-12);
    }
}
