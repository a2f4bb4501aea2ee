use proptest::prelude::*;
use rand::Rng;

use ratiobandit::gittins::{elimination_indices, restart_index};
use ratiobandit::numerics::{lu_solve, simplex_lp, LinearProgram, Matrix, Sense};
use ratiobandit::ratiomdp::{policy_iterate, solve_ratio_lp};
use ratiobandit::testkit;

fn random_matrix(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = rng.gen_range(-1.0..1.0);
        }
        // Diagonal dominance keeps the condition number modest.
        m[(i, i)] += n as f64 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lu_recovers_known_solution(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = testkit::seeded(seed);
        let a = random_matrix(&mut rng, n);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let b = Matrix::column(&a.mul_vec(&x));
        let got = lu_solve(&a, &b).unwrap();
        for k in 0..n {
            prop_assert!((got[(k, 0)] - x[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn simplex_finds_box_vertex(seed in any::<u64>(), n in 1usize..8) {
        // max c·x with 0 <= x <= u and one coupling row sum(x) <= s: the
        // greedy fill by decreasing c is optimal.
        let mut rng = testkit::seeded(seed);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let s = rng.gen_range(0.1..(n as f64));
        let mut g = Matrix::zeros(n + 1, n);
        let mut h = u.clone();
        for k in 0..n {
            g[(k, k)] = 1.0;
            g[(n, k)] = 1.0;
        }
        h.push(s);
        let sol = simplex_lp(&LinearProgram::new(c.clone()).with_inequalities(g, h), Sense::Maximize).unwrap();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| c[b].partial_cmp(&c[a]).unwrap());
        let (mut left, mut best) = (s, 0.0);
        for k in order {
            if c[k] <= 0.0 { break; }
            let take = u[k].min(left);
            best += c[k] * take;
            left -= take;
        }
        prop_assert!((sol.objective - best).abs() < 1e-9, "{} vs {}", sol.objective, best);
    }

    #[test]
    fn index_scales_with_rewards_and_sojourns(seed in any::<u64>(), n in 1usize..9, k in 0.1f64..10.0) {
        let mut rng = testkit::seeded(seed);
        let chain = testkit::random_discounted(&mut rng, n);
        let g = elimination_indices(&chain).unwrap();
        let gr = elimination_indices(&chain.scale_rewards(k)).unwrap();
        let gd = elimination_indices(&chain.scale_sojourns(k)).unwrap();
        for s in 0..n {
            prop_assert!((gr[s] - k * g[s]).abs() <= 1e-9 * (1.0 + g[s].abs() * k));
            prop_assert!((gd[s] - g[s] / k).abs() <= 1e-9 * (1.0 + g[s].abs() / k));
        }
    }

    #[test]
    fn index_follows_state_permutation(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = testkit::seeded(seed);
        let chain = testkit::random_discounted(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let g = elimination_indices(&chain).unwrap();
        let gp = elimination_indices(&chain.permuted(&perm)).unwrap();
        for k in 0..n {
            prop_assert!((gp[k] - g[perm[k]]).abs() < 1e-10);
        }
    }

    #[test]
    fn index_bounded_by_immediate_ratios(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = testkit::seeded(seed);
        let chain = testkit::random_discounted(&mut rng, n);
        let q: Vec<f64> = chain.r().iter().zip(chain.d()).map(|(r, d)| r / d).collect();
        let max_q = q.iter().copied().fold(f64::MIN, f64::max);
        for (s, g) in elimination_indices(&chain).unwrap().into_iter().enumerate() {
            // Stopping at once is always allowed, and no mix beats the best state.
            prop_assert!(g >= q[s] - 1e-12);
            prop_assert!(g <= max_q + 1e-12);
        }
    }

    #[test]
    fn restart_agrees_with_elimination(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = testkit::seeded(seed);
        let chain = testkit::random_discounted(&mut rng, n);
        let g = elimination_indices(&chain).unwrap();
        let s = rng.gen_range(0..n);
        prop_assert!((restart_index(&chain, s).unwrap() - g[s]).abs() < 1e-8);
    }

    #[test]
    fn policy_iteration_is_optimal(seed in any::<u64>(), n in 1usize..5, a in 1usize..4) {
        let mut rng = testkit::seeded(seed);
        let mdp = testkit::random_mdp(&mut rng, n, a);
        let (_, best) = testkit::brute_force_optimum(&mdp);
        let sol = policy_iterate(&mdp).unwrap();
        prop_assert!((sol.g - best).abs() <= 1e-9 * best.abs().max(1.0), "{} vs {}", sol.g, best);
    }

    #[test]
    fn lp_agrees_with_iteration(seed in any::<u64>(), n in 1usize..7, a in 1usize..4) {
        let mut rng = testkit::seeded(seed);
        let mdp = testkit::random_irreducible_mdp(&mut rng, n, a);
        let pi = policy_iterate(&mdp).unwrap();
        let lp = solve_ratio_lp(&mdp).unwrap();
        prop_assert!((pi.g - lp.g).abs() < 1e-8, "{} vs {}", pi.g, lp.g);
    }
}
