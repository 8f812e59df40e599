mod common;

use std::collections::HashMap;

use common::{flat, flat_src, plan};
use mpead_core::FlatGraph;
use mpead_engine::kernel::Registry;
use mpead_engine::{compile, run, RunConfig, Simulation, TraceArg};
use proptest::prelude::*;

fn fitness_trace(graph: &FlatGraph, cfg: &RunConfig, gens: usize) -> Vec<Vec<(String, Vec<Option<f64>>)>> {
    let p = compile(graph, cfg, &Registry::with_builtins()).unwrap();
    let mut sim = Simulation::new(&p).unwrap();
    (0..gens).map(|_| sim.step().unwrap().fitness.into_iter().collect()).collect()
}

fn sorted(xs: &[Option<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = xs.iter().map(|x| x.unwrap()).collect();
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_order_does_not_matter(
        name in prop::sample::select(vec!["fig5b_scavenger", "fig4a_predprey", "fig3d_coop_cross_mod", "fig5a_decoded"]),
        keys in prop::collection::vec(any::<u32>(), 4),
        seed in 0u64..1000,
    ) {
        let base = flat(name);
        let mut d = base.diagram().clone();
        let mut order: Vec<(u32, usize)> = keys.iter().copied().zip(0..).take(d.computations.len()).collect();
        order.sort();
        d.computations = order.iter().map(|&(_, k)| d.computations[k].clone()).collect();
        let permuted = FlatGraph::try_from(d).unwrap();
        let cfg = RunConfig::new(3, seed);
        prop_assert_eq!(fitness_trace(&base, &cfg, 3), fitness_trace(&permuted, &cfg, 3));
    }

    #[test]
    fn all_pairs_calls_are_the_size_product(n in 1usize..25, m in 1usize..25) {
        let src = format!(r#"diagram law {{
            population P {{ size = {n} genome = bits(6) }}
            population Q {{ size = {m} genome = bits(6) }}
            compute F {{ fn = "pred_score" out = eval }}
            P[i] -> F : geno Q[*] -> F : geno F -> P[i] : eval
        }}"#);
        let p = compile(&flat_src(&src), &RunConfig::new(2, 0), &Registry::with_builtins()).unwrap();
        let stats = run(&p).unwrap();
        prop_assert_eq!(&stats.calls["F"], &vec![(n * m) as u64; 2]);
    }

    #[test]
    fn worker_count_never_changes_results(seed in any::<u64>(), workers in 2usize..6) {
        let one = RunConfig { workers: 1, ..RunConfig::new(4, seed) };
        let many = RunConfig { workers, ..one.clone() };
        for name in ["fig4a_predprey", "fig6_grid3x3"] {
            let a = run(&plan(name, &one)).unwrap();
            let b = run(&plan(name, &many)).unwrap();
            prop_assert_eq!(a.to_csv(), b.to_csv());
            prop_assert_eq!(a.migrations, b.migrations);
        }
    }

    #[test]
    fn cooperative_targets_share_values(seed in any::<u64>()) {
        for gen in fitness_trace(&flat("fig4d_coop"), &RunConfig::new(15, seed), 15) {
            let m: HashMap<String, Vec<Option<f64>>> = gen.into_iter().collect();
            prop_assert_eq!(&m["A"], &m["B"]);
            prop_assert_eq!(sorted(&m["A"]), sorted(&m["B"]));
        }
    }
}

#[test]
fn zero_sum_over_traced_pairs() {
    let cfg = RunConfig { trace: true, ..RunConfig::new(10, 8) };
    let stats = run(&plan("fig4a_predprey", &cfg)).unwrap();
    let mut pred: HashMap<(u32, usize, usize), f64> = HashMap::new();
    let mut prey: HashMap<(u32, usize, usize), f64> = HashMap::new();
    for c in &stats.trace {
        let idx: Vec<usize> = c.inputs.iter().map(|a| match a { TraceArg::Individual { index, .. } => *index, _ => unreachable!() }).collect();
        let v = c.outputs[0].as_scalar().unwrap();
        let slot = if c.node == "Fpred" { &mut pred } else { &mut prey };
        slot.insert((c.generation, idx[0], idx[1]), v);
    }
    assert_eq!(pred.len(), 10 * 400);
    for (k, p) in &pred {
        assert_eq!(p + prey[k], 20.0, "{k:?}");
    }
}

#[test]
fn population_sizes_are_conserved() {
    let p = plan("fig5b_scavenger", &RunConfig::new(12, 2));
    let mut sim = Simulation::new(&p).unwrap();
    for _ in 0..12 {
        sim.step().unwrap();
        assert!(sim.state().populations.iter().all(|pop| pop.len() == 20));
    }
}

#[test]
fn elitism_keeps_the_best_non_decreasing() {
    for seed in 0..5 {
        let stats = run(&plan("fig2a_onemax", &RunConfig::new(60, seed))).unwrap();
        let best: Vec<f64> = stats.rows_for("EA").map(|r| r.best_fitness.unwrap()).collect();
        assert!(best.windows(2).all(|w| w[1] >= w[0]), "seed {seed}: {best:?}");
    }
}

#[test]
fn stats_are_a_function_of_graph_and_config() {
    let cfg = RunConfig::new(20, 77);
    for name in ["fig3c_coop_mod", "fig4c_predprey_ten", "fig8_sefrioui7"] {
        assert_eq!(run(&plan(name, &cfg)).unwrap().to_csv(), run(&plan(name, &cfg)).unwrap().to_csv());
    }
    let other = run(&plan("fig4c_predprey_ten", &RunConfig::new(20, 78))).unwrap();
    assert_ne!(run(&plan("fig4c_predprey_ten", &cfg)).unwrap().to_csv(), other.to_csv());
}

#[test]
fn cumulative_evaluations_count_feeding_calls() {
    let stats = run(&plan("fig4c_predprey_ten", &RunConfig::new(3, 1))).unwrap();
    let pred: Vec<u64> = stats.rows_for("Pred").map(|r| r.evals_cumulative).collect();
    let prey: Vec<u64> = stats.rows_for("Prey").map(|r| r.evals_cumulative).collect();
    assert_eq!(pred, vec![200, 400, 600]);
    assert_eq!(prey, vec![20, 40, 60]);
}
