//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use armor_core::crafted;
use armor_core::data::sample_dataset;
use armor_core::fixed_point::{is_fixed_point, optimistic_policy, psi_policy, PsiKind, PsiSpec, FIXED_POINT_TOL};
use armor_core::instance::InstanceFamily;
use armor_core::maximin::solver::{solve_mixed, solve_pure, Payoff};
use armor_core::maximin::{armor_on_table, ReturnTable, SolverMode};
use armor_core::mdp::{bellman_residual, evaluate, simulation_gap_bound, Policy};
use armor_core::theory::{
    check_absolute_decomposition, check_rpi, check_suboptimality_trend, compare_solution_concepts,
    mle_coverage_experiment, Instance, SolutionConcept, TrendSpec, THEORY_TOL,
};
use armor_core::version_space::{alpha_from_theory, build_version_space};
use armor_core::{derive_seed, Result};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHA_GRID: [f64; 5] = [0.5, 1.0, 2.0, 5.0, f64::INFINITY];
const DATA_N: usize = 50;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Result<Outcome> {
    Ok(Outcome { passed, summary })
}

fn dataset_for(inst: &Instance, tag: u64) -> Result<armor_core::data::Dataset> {
    sample_dataset(
        &inst.m_star,
        &inst.behavior,
        DATA_N,
        inst.trial_seed(tag, DATA_N, 0),
        None,
    )
}

fn rpi_suite() -> Result<Outcome> {
    let family = InstanceFamily::default();
    let (mut asserted, mut failures, mut skipped) = (0usize, 0usize, 0usize);
    for i in 0..100 {
        let inst = family.instance(2024, i)?;
        let d = dataset_for(&inst, 10)?;
        for p in check_rpi(&inst, &d, &ALPHA_GRID, SolverMode::Pure)? {
            if p.report.asserted {
                asserted += 1;
                failures += usize::from(!p.report.passed);
            } else {
                skipped += 1;
            }
        }
    }
    outcome(
        failures == 0 && asserted > 0,
        format!("{asserted} asserted points, {failures} failures, {skipped} without truth in version space"),
    )
}

fn random_subset(rng: &mut ChaCha8Rng, members: &[usize]) -> Vec<usize> {
    let k = rng.gen_range(1..=members.len());
    let mut s: Vec<usize> = members.choose_multiple(rng, k).copied().collect();
    s.sort_unstable();
    s
}

fn fixed_point_suite() -> Result<Outcome> {
    let family = InstanceFamily::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut cases, mut failures, mut worst) = (0usize, 0usize, 0.0f64);
    let mut idempotence_worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let inst = family.instance(7, i)?;
        let d = dataset_for(&inst, 11)?;
        let vs = build_version_space(&inst.class, &d, 2.0)?;
        let table = ReturnTable::for_version_space(&inst.class, &vs)?;
        let specs = [
            PsiSpec::new(PsiKind::Zero, random_subset(&mut rng, &vs.members)),
            PsiSpec::new(
                PsiKind::NegReferenceReturn(inst.reference.clone()),
                random_subset(&mut rng, &vs.members),
            ),
            PsiSpec::new(PsiKind::NegOptimalReturn, random_subset(&mut rng, &vs.members)),
            PsiSpec::singleton(*vs.members.choose(&mut rng).expect("version space is non-empty")),
        ];
        let mut policies: Vec<Policy> = Vec::new();
        for spec in &specs {
            let solved = psi_policy(&table, spec)?;
            policies.push(solved.policy.as_pure().expect("pure solve").clone());
        }
        policies.push(optimistic_policy(&table).policy);
        for pi in &policies {
            let c = is_fixed_point(pi, &table)?;
            cases += 1;
            worst = worst.max(c.certificate.abs());
            failures += usize::from(!c.is_fixed_point);
        }
        let (hat, _) = armor_on_table(&table, &inst.reference, SolverMode::Pure)?;
        let (again, _) = armor_on_table(&table, hat.policy.as_pure().expect("pure solve"), SolverMode::Pure)?;
        idempotence_worst = idempotence_worst.max(again.value);
    }
    let idem_ok = idempotence_worst <= FIXED_POINT_TOL;
    outcome(
        failures == 0 && idem_ok,
        format!(
            "{cases} certificates, {failures} failures, max |v*| = {worst:.3e}, max re-fed game value = {idempotence_worst:.3e}"
        ),
    )
}

fn decomposition_suite() -> Result<Outcome> {
    let family = InstanceFamily::default();
    let (mut asserted, mut failures, mut skipped) = (0usize, 0usize, 0usize);
    for i in 0..200u64 {
        let inst = family.instance(17, i)?;
        let d = dataset_for(&inst, 12)?;
        let alpha = ALPHA_GRID[i as usize % ALPHA_GRID.len()];
        let r = check_absolute_decomposition(&inst, &d, alpha)?;
        if r.asserted {
            asserted += 1;
            failures += usize::from(!r.passed);
        } else {
            skipped += 1;
        }
    }
    outcome(
        failures == 0 && asserted > 0,
        format!("{asserted} asserted draws, {failures} failures, {skipped} without truth in version space"),
    )
}

fn mle_suite() -> Result<Outcome> {
    let inst = crafted::two_state_family();
    let r = mle_coverage_experiment(&inst, 100, 500, 0.1)?;
    outcome(
        r.passed && r.lhs >= 0.848,
        format!(
            "frequency {:.4} (floor 0.848, binomial floor {:.4}), {}",
            r.lhs, r.rhs, r.details
        ),
    )
}

fn trend_suite() -> Result<Outcome> {
    let inst = crafted::two_state_family();
    let spec = TrendSpec {
        n_grid: vec![25, 100, 400],
        trials: 50,
        alpha: alpha_from_theory(inst.class.len(), 0.1, 1.0)?,
        delta: 0.1,
        noise: None,
    };
    let r = check_suboptimality_trend(&inst, &spec)?;
    outcome(r.report.passed && r.c_fit.is_finite(), r.report.details)
}

fn lp_game_value(g: &Payoff) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let v = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let x: Vec<_> = (0..g.n_rows()).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for j in 0..g.n_cols() {
        let mut terms: Vec<_> = x.iter().enumerate().map(|(i, &xi)| (xi, g.get(i, j))).collect();
        terms.push((v, -1.0));
        lp.add_constraint(&terms, ComparisonOp::Ge, 0.0);
    }
    let simplex: Vec<_> = x.iter().map(|&xi| (xi, 1.0)).collect();
    lp.add_constraint(&simplex, ComparisonOp::Eq, 1.0);
    lp.solve().expect("bounded feasible game LP").objective()
}

fn solver_suite() -> Result<Outcome> {
    let eps = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_mixed, mut pure_mismatch) = (0.0f64, 0usize);
    for _ in 0..50 {
        let (m, n) = (rng.gen_range(1..=32), rng.gen_range(1..=8));
        let data: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let g = Payoff::new(m, n, data)?;
        let mixed = solve_mixed(&g, eps)?;
        let oracle = lp_game_value(&g);
        worst_mixed = worst_mixed
            .max((mixed.lower - oracle).abs())
            .max((mixed.upper - oracle).abs());

        let row_mins: Vec<f64> = g
            .rows()
            .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let best = row_mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = row_mins.iter().position(|&v| v == best).expect("non-empty");
        let pure = solve_pure(&g);
        pure_mismatch += usize::from(pure.value != best || pure.row != first);
    }
    outcome(
        worst_mixed <= 2.0 * eps && pure_mismatch == 0,
        format!("max |mixed - LP| = {worst_mixed:.3e}, pure mismatches = {pure_mismatch}"),
    )
}

fn separation_suite() -> Result<Outcome> {
    let inst = crafted::separation_instance();
    let d = sample_dataset(&inst.m_star, &inst.behavior, 25, inst.seed, None)?;
    let cmp = compare_solution_concepts(&inst, &d, 1.0)?;
    let abs = cmp.row(SolutionConcept::AbsolutePessimism);
    let reg = cmp.row(SolutionConcept::RegretMinimization);
    outcome(
        cmp.separates() && cmp.return_column_ok && cmp.regret_column_ok,
        format!(
            "return-maximin row {} (worst return {:.4}) vs regret-minimax row {} (worst regret {:.4}), tol {THEORY_TOL:e}",
            abs.row, abs.worst_return, reg.row, reg.worst_regret
        ),
    )
}

fn numerics_suite() -> Result<Outcome> {
    let family = InstanceFamily::default();
    let (mut bellman, mut norm, mut identity) = (0.0f64, 0.0f64, 0.0f64);
    let mut sim_ok = 0usize;
    for i in 0..100u64 {
        let inst = family.instance(8, i)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(8, i, 2));
        let m = &inst.m_star;
        let others: Vec<usize> = (0..inst.class.len()).filter(|&k| k != inst.truth_index()).collect();
        let m2 = match others.choose(&mut rng) {
            Some(&k) => inst.class.model(k).clone(),
            None => m.scale_rewards(0.5)?,
        };
        let rows: Vec<Vec<f64>> = (0..m.n_states())
            .map(|_| {
                let w: Vec<f64> = (0..m.n_actions()).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let t: f64 = w.iter().sum();
                w.into_iter().map(|x| x / t).collect()
            })
            .collect();
        let pi = Policy::stochastic(&rows)?;
        let rep = evaluate(m, &pi)?;
        bellman = bellman.max(bellman_residual(m, &pi, &rep.v));
        norm = norm.max((rep.occupancy.iter().sum::<f64>() - 1.0).abs());
        let mut via_occ = 0.0;
        for s in 0..m.n_states() {
            for a in 0..m.n_actions() {
                via_occ += rep.occupancy(s, a) * m.r(s, a);
            }
        }
        identity = identity.max((rep.j - via_occ / (1.0 - m.gamma())).abs());
        sim_ok += usize::from(simulation_gap_bound(m, &m2, &pi)?.holds());
    }
    outcome(
        bellman < 1e-10 && norm < 1e-10 && identity < 1e-9 && sim_ok == 100,
        format!(
            "bellman {bellman:.2e}, normalization {norm:.2e}, occupancy-return {identity:.2e}, simulation lemma {sim_ok}/100"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 rpi", rpi_suite),
        ("2 fixed points", fixed_point_suite),
        ("3 absolute decomposition", decomposition_suite),
        ("4 mle coverage", mle_suite),
        ("5 suboptimality trend", trend_suite),
        ("6 solver cross-validation", solver_suite),
        ("7 solution-concept separation", separation_suite),
        ("8 core numerics", numerics_suite),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let start = Instant::now();
        let (passed, summary) = match run() {
            Ok(o) => (o.passed, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!(
            "{} criterion {name}: {summary} [{:.2}s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
