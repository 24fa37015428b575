use edgecolor::analysis::{epsilon_hat, path_bound, EvalOrder};
use edgecolor::builders::{random_order, random_regular};
use edgecolor::instrument::{atypical_sums, detect_d, detect_w, MartingaleTrace, TrackedSetFamily};
use edgecolor::oracle::{
    brute_force_max_window, exact_outcome_distribution, reference_greedy_distribution, Reconstruction,
};
use edgecolor::{run_game, ColorerKind, Exact, GameConfig};
use num_traits::{One, Zero};

#[test]
fn path_middle_edge_fails_half_the_time() {
    let d = exact_outcome_distribution(&[(0, 1), (2, 3), (1, 2)], ColorerKind::RandomGreedy, 2, 1).unwrap();
    assert_eq!(d.failure_probability(2), Exact::new(1.into(), 2.into()));
    assert_eq!(d.total_mass(), Exact::one());
}

#[test]
fn equivalence_on_every_triangle_schedule() {
    let edges = [(0, 1), (1, 2), (0, 2), (2, 3)];
    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let orders = permutations(4);
    for order in orders {
        let s: Vec<_> = order.iter().map(|&i| edges[i]).collect();
        for gamma in 2..=4 {
            let reference = reference_greedy_distribution(&s, gamma).unwrap();
            for b in [1, 2, 4] {
                assert_eq!(exact_outcome_distribution(&s, ColorerKind::PhasePalette, gamma, b).unwrap(), reference);
            }
        }
    }
}

#[test]
fn detectors_match_brute_force() {
    for seed in 0..6 {
        let g = random_regular(14, 7, seed).unwrap();
        let cfg = GameConfig::new(14, 7, 0.4).with_phases(4).with_seed(seed);
        let t = run_game(&mut random_order(&g.edges, seed, cfg.steps(), false).unwrap(), &cfg).unwrap();
        let mut fam = TrackedSetFamily::random(t.palette_size(), 5, &mut edgecolor::game::rng_stream(seed, 2));
        for &(u, v) in g.edges.iter().take(6) {
            fam.add_pair(u, v);
        }
        let trace = MartingaleTrace::build(&t, &fam);
        let rec = Reconstruction::new(&t).unwrap();
        for v in 0..14 {
            let w = detect_w::<Exact>(&t, &trace, v, &Exact::zero());
            assert_eq!(w.max_prefix, rec.max_collision_prefix(v));
            for s in 0..fam.sets.len() {
                assert_eq!(
                    atypical_sums::<Exact>(&t, &trace, v, s).unwrap(),
                    rec.atypical_sums(v, &fam.sets[s]).unwrap()
                );
            }
        }
        for &(u, v) in &fam.pairs {
            let fast = detect_d::<Exact>(&trace, u, v, &Exact::zero()).unwrap();
            let slow = brute_force_max_window(&rec.pair_differences(u, v));
            assert_eq!(fast.max_abs_window, slow);
        }
    }
}

#[test]
fn dp_below_path_bound_on_random_forests() {
    for seed in 0..30u64 {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (2, 6)];
        let cfg = GameConfig::new(7, 3, 0.5).with_phases(3).with_seed(seed);
        let t = run_game(&mut random_order(&edges, seed, cfg.steps(), true).unwrap(), &cfg).unwrap();
        let zeta: f64 = 1e-3;
        let a = epsilon_hat(&t, &zeta, EvalOrder::Ascending).unwrap();
        let d = epsilon_hat(&t, &zeta, EvalOrder::Descending).unwrap();
        for v in 0..7 {
            for r in 0..=3 {
                let x = *a.get(v, r).unwrap();
                assert!((x - d.get(v, r).unwrap()).abs() <= 1e-12);
                assert!(x <= path_bound(&t, v, r, &zeta).unwrap() + 1e-15);
            }
        }
    }
}
