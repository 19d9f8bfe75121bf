use armor_core::crafted;
use armor_core::data::sample_dataset;
use armor_core::instance::InstanceFamily;
use armor_core::maximin::SolverMode;
use armor_core::theory::{
    check_on_support_bound, check_rpi, check_suboptimality_trend, mle_coverage_experiment, rpi_without_truth, TrendSpec,
};

#[test]
fn rpi_holds_across_alpha_range_on_random_instances() {
    let family = InstanceFamily::default();
    let mut asserted = 0;
    for i in 0..100 {
        let inst = family.instance(31, i).unwrap();
        let d = sample_dataset(&inst.m_star, &inst.behavior, 40, inst.trial_seed(0, 40, 0), None).unwrap();
        let grid = [1.0, 2.0, 5.0, 10.0, f64::INFINITY];
        for p in check_rpi(&inst, &d, &grid, SolverMode::Pure).unwrap() {
            if p.report.asserted {
                asserted += 1;
                assert!(p.report.passed, "instance {i}: {:?}", p.report);
            }
        }
    }
    assert!(
        asserted >= 450,
        "only {asserted} points had the truth in the version space"
    );
}

#[test]
fn rpi_holds_for_mixed_solutions() {
    let family = InstanceFamily::default();
    for i in 0..30 {
        let inst = family.instance(32, i).unwrap();
        let d = sample_dataset(&inst.m_star, &inst.behavior, 40, 9, None).unwrap();
        for p in check_rpi(&inst, &d, &[2.0, f64::INFINITY], SolverMode::Mixed { eps: 1e-9 }).unwrap() {
            assert!(!p.report.failed(), "instance {i}: {:?}", p.report);
        }
    }
}

#[test]
fn truth_is_load_bearing_for_improvement() {
    let inst = crafted::rpi_counterexample();
    let d = sample_dataset(&inst.m_star, &inst.behavior, 20, 1, None).unwrap();
    let with_truth = check_rpi(&inst, &d, &[f64::INFINITY], SolverMode::Pure).unwrap();
    assert!(with_truth[0].report.passed);
    let without = rpi_without_truth(&inst, &d, f64::INFINITY).unwrap();
    assert!(!without.passed, "{without:?}");
}

#[test]
fn suboptimality_vanishes_for_large_n() {
    let inst = crafted::two_state_family();
    let spec = TrendSpec {
        n_grid: vec![25, 400, 3200],
        trials: 20,
        alpha: 1.0,
        delta: 0.1,
        noise: None,
    };
    let r = check_suboptimality_trend(&inst, &spec).unwrap();
    assert!(r.report.passed, "{:?}", r.report);
    assert!(r.points[2].mean <= 1e-9, "{:?}", r.points);
    assert!(r.points[0].mean > r.points[2].mean);
}

#[test]
fn mle_event_is_frequent() {
    let family = InstanceFamily::default();
    for i in 0..5 {
        let inst = family.instance(41, i).unwrap();
        let r = mle_coverage_experiment(&inst, 100, 200, 0.1).unwrap();
        assert!(r.passed, "instance {i}: {r:?}");
    }
}

#[test]
fn support_constant_does_not_grow_with_n() {
    let inst = crafted::two_state_family();
    let c: Vec<f64> = [400, 800, 1600, 3200]
        .iter()
        .map(|&n| check_on_support_bound(&inst, n, 100, 0.1, 1.0).unwrap().lhs)
        .collect();
    for w in c.windows(2) {
        assert!(w[1] <= 2.0 * w[0], "doubling n doubled the constant: {c:?}");
    }
}
