//! Independent oracles: Monte Carlo rollouts, truncated value iteration and
//! support enumeration for small games.

use armor_core::crafted;
use armor_core::instance::{generate_instance, RandomInstanceRecipe};
use armor_core::maximin::solver::{solve_mixed, Payoff};
use armor_core::maximin::ReturnTable;
use armor_core::mdp::{evaluate, evaluate_mixed, MixedPolicy, Policy, TabularMdp};
use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn value_iteration(m: &TabularMdp, pi: &Policy, sweeps: usize) -> Vec<f64> {
    let ns = m.n_states();
    let mut v = vec![0.0; ns];
    for _ in 0..sweeps {
        v = (0..ns)
            .map(|s| {
                (0..m.n_actions())
                    .map(|a| {
                        let next: f64 = m.transition_row(s, a).iter().zip(&v).map(|(p, x)| p * x).sum();
                        pi.prob(s, a) * (m.r(s, a) + m.gamma() * next)
                    })
                    .sum()
            })
            .collect();
    }
    v
}

#[test]
fn exact_evaluation_matches_value_iteration() {
    for seed in 0..20 {
        let inst = generate_instance(&RandomInstanceRecipe::default(), seed).unwrap();
        let pi = Policy::uniform(inst.m_star.n_states(), inst.m_star.n_actions());
        let exact = evaluate(&inst.m_star, &pi).unwrap();
        let vi = value_iteration(&inst.m_star, &pi, 600);
        for (a, b) in exact.v.iter().zip(&vi) {
            assert!((a - b).abs() < 1e-12, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn mixture_return_matches_monte_carlo() {
    let m = crafted::two_state_family().m_star;
    let mix = MixedPolicy::new(
        vec![
            Policy::deterministic(vec![crafted::GO, crafted::STAY], 2).unwrap(),
            Policy::deterministic(vec![crafted::STAY, crafted::GO], 2).unwrap(),
        ],
        vec![0.3, 0.7],
    )
    .unwrap();
    let exact = evaluate_mixed(&m, &mix).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let atom_pick = WeightedIndex::new(mix.weights()).unwrap();
    let rows: Vec<WeightedIndex<f64>> = (0..m.n_states())
        .flat_map(|s| (0..m.n_actions()).map(move |a| (s, a)))
        .map(|(s, a)| WeightedIndex::new(m.transition_row(s, a)).unwrap())
        .collect();
    let start = WeightedIndex::new(m.initial_dist()).unwrap();
    let (episodes, horizon) = (100_000, 200);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..episodes {
        let actions = mix.atoms()[atom_pick.sample(&mut rng)].actions().unwrap();
        let mut s = start.sample(&mut rng);
        let (mut ret, mut disc) = (0.0, 1.0);
        for _ in 0..horizon {
            let a = actions[s];
            ret += disc * m.r(s, a);
            disc *= m.gamma();
            s = rows[s * m.n_actions() + a].sample(&mut rng);
        }
        sum += ret;
        sum_sq += ret * ret;
    }
    let mean = sum / episodes as f64;
    let se = ((sum_sq / episodes as f64 - mean * mean) / episodes as f64).sqrt();
    // Truncation at 200 steps costs at most 0.9^200 / 0.1, far below one standard error.
    assert!((mean - exact).abs() <= 3.0 * se, "mc {mean} ± {se} vs exact {exact}");
}

/// Value of a zero-sum game by enumerating equal-size support pairs and
/// solving the indifference equations. Valid for nondegenerate games.
fn support_enumeration_value(g: &Payoff) -> f64 {
    let (m, n) = (g.n_rows(), g.n_cols());
    let subsets = |len: usize, k: usize| -> Vec<Vec<usize>> {
        (0u32..1 << len)
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| (0..len).filter(|i| mask >> i & 1 == 1).collect())
            .collect()
    };
    // Solves sum_i w_i M[i][j] = v for every j in the support, sum w = 1.
    let indifference = |k: usize, entry: &dyn Fn(usize, usize) -> f64| -> Option<(Vec<f64>, f64)> {
        let mut a = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut b = DVector::<f64>::zeros(k + 1);
        for j in 0..k {
            for i in 0..k {
                a[(j, i)] = entry(i, j);
            }
            a[(j, k)] = -1.0;
        }
        for i in 0..k {
            a[(k, i)] = 1.0;
        }
        b[k] = 1.0;
        let sol = a.lu().solve(&b)?;
        let w: Vec<f64> = sol.iter().take(k).copied().collect();
        w.iter().all(|&x| x >= -1e-12).then_some((w, sol[k]))
    };
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                let Some((x, v)) = indifference(k, &|i, j| g.get(rows[i], cols[j])) else {
                    continue;
                };
                let Some((y, v2)) = indifference(k, &|j, i| g.get(rows[i], cols[j])) else {
                    continue;
                };
                let row_ok =
                    (0..n).all(|j| rows.iter().zip(&x).map(|(&i, w)| w * g.get(i, j)).sum::<f64>() >= v - 1e-9);
                let col_ok =
                    (0..m).all(|i| cols.iter().zip(&y).map(|(&j, w)| w * g.get(i, j)).sum::<f64>() <= v2 + 1e-9);
                if row_ok && col_ok {
                    assert!((v - v2).abs() < 1e-9);
                    return v;
                }
            }
        }
    }
    panic!("no equilibrium found; game is degenerate");
}

#[test]
fn mixed_solver_matches_support_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let data: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = Payoff::new(6, 5, data).unwrap();
        let oracle = support_enumeration_value(&g);
        let s = solve_mixed(&g, 1e-9).unwrap();
        assert!((s.lower - oracle).abs() < 1e-8, "{} vs {oracle}", s.lower);
    }
}

#[test]
fn matching_pennies_has_value_zero() {
    let g = Payoff::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
    assert!(support_enumeration_value(&g).abs() < 1e-12);
    let s = solve_mixed(&g, 1e-9).unwrap();
    assert!(s.lower.abs() < 1e-9);
    for w in s.row_weights.iter().chain(&s.col_weights) {
        assert!((w - 0.5).abs() < 1e-9);
    }
}

#[test]
fn separation_instance_returns_match_hand_computation() {
    // A one-state bandit with gamma 0.5 has J = 2 r.
    let inst = crafted::separation_instance();
    let t = ReturnTable::for_class(&inst.class).unwrap();
    let truth = inst.truth_index();
    let other = 1 - truth;
    let expect_truth = [0.8, 2.0, 0.6];
    let expect_other = [0.8, 0.6, 0.7];
    for a in 0..3 {
        assert!((t.get(a, truth) - expect_truth[a]).abs() < 1e-12);
        assert!((t.get(a, other) - expect_other[a]).abs() < 1e-12);
    }
}
