use mpead_core::GenomeSpec;
use mpead_kernel::builtins::ones;
use mpead_kernel::{ea_step, stream, AlgoConfig, Genome, Individual, Registry, Value};
use proptest::prelude::*;

fn bits(len: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), len)
}

fn pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (0usize..64).prop_flat_map(|n| (bits(n), bits(n)))
}

fn scalar(r: &Registry, name: &str, args: &[Value]) -> f64 {
    r.function(name).unwrap().call(args).unwrap()[0].as_scalar().unwrap()
}

/// Evaluate with the ones-count and step, `gens` times; returns per
/// generation best fitness.
fn onemax_trace(seed: u64, cfg: &AlgoConfig, n: usize, len: usize, gens: u64) -> Vec<f64> {
    let mut rng = stream(seed, "init", 0);
    let mut pop: Vec<Individual> = (0..n).map(|_| Individual::new(Genome::random(&GenomeSpec::Bits(len), &mut rng))).collect();
    let mut best = Vec::new();
    for g in 1..=gens {
        for ind in &mut pop {
            ind.fitness = Some(ones(&Value::from(&ind.genome)));
        }
        best.push(pop.iter().filter_map(|i| i.fitness).fold(f64::MIN, f64::max));
        pop = ea_step(&pop, cfg, &mut stream(seed, "pop", g)).unwrap();
    }
    best
}

proptest! {
    #[test]
    fn zero_sum((a, b) in pair()) {
        let r = Registry::with_builtins();
        let args = [Value::Bits(a.clone()), Value::Bits(b.clone())];
        let pred = scalar(&r, "pred_score", &args);
        let prey = scalar(&r, "prey_score", &args);
        prop_assert_eq!(pred + prey, a.len() as f64);
        // independent oracle: positionwise comparison
        let oracle = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        prop_assert_eq!(pred, oracle as f64);
    }

    #[test]
    fn onemax_is_the_bit_count(a in bits(40)) {
        let r = Registry::with_builtins();
        let oracle = a.iter().map(|&b| b as u32).sum::<u32>();
        prop_assert_eq!(scalar(&r, "onemax", &[Value::Bits(a)]), oracle as f64);
    }

    #[test]
    fn functions_are_pure((a, b) in pair(), x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let r = Registry::with_builtins();
        let (va, vb) = (Value::Bits(a), Value::Bits(b));
        let calls: Vec<(&str, Vec<Value>)> = vec![
            ("onemax", vec![va.clone()]),
            ("decode_binary", vec![va.clone()]),
            ("pheno_sum", vec![va.clone()]),
            ("pred_score", vec![va.clone(), vb.clone()]),
            ("prey_score", vec![va.clone(), vb.clone()]),
            ("compete", vec![va.clone(), vb.clone()]),
            ("coop_eval", vec![va.clone(), vb.clone()]),
            ("modify", vec![Value::Scalar(x), vb.clone()]),
            ("F_carc", vec![Value::Scalar(x), Value::Scalar(y)]),
            ("scav_eval", vec![Value::Scalar(x), va.clone(), vb.clone()]),
        ];
        for (name, args) in calls {
            let f = r.function(name).unwrap();
            prop_assert_eq!(f.call(&args).unwrap(), f.call(&args).unwrap(), "{}", name);
        }
        prop_assert!(scalar(&r, "F_carc", &[Value::Scalar(x), Value::Scalar(y)]) >= 0.0);
    }

    #[test]
    fn step_preserves_size(
        fits in prop::collection::vec(-100.0f64..100.0, 1..40),
        elitism in 0usize..3,
        seed in any::<u64>(),
    ) {
        let pop: Vec<Individual> = fits.iter().map(|&f| Individual {
            genome: Genome::Bits(vec![f > 0.0; 12]),
            fitness: Some(f),
            phenotype: None,
        }).collect();
        let cfg = AlgoConfig { elitism, ..AlgoConfig::default() };
        let next = ea_step(&pop, &cfg, &mut stream(seed, "p", 1)).unwrap();
        prop_assert_eq!(next.len(), pop.len());
        prop_assert!(next.iter().all(|i| i.genome.len() == 12));
    }

    #[test]
    fn elitism_keeps_best_non_decreasing(seed in any::<u64>()) {
        let trace = onemax_trace(seed, &AlgoConfig::default(), 12, 24, 30);
        prop_assert!(trace.windows(2).all(|w| w[1] >= w[0]), "{:?}", trace);
    }
}

#[test]
fn no_variation_only_copies_members() {
    let mut rng = stream(5, "init", 0);
    let pop: Vec<Individual> = (0..16)
        .map(|k| Individual {
            genome: Genome::random(&GenomeSpec::Bits(20), &mut rng),
            fitness: Some(k as f64),
            phenotype: None,
        })
        .collect();
    let cfg = AlgoConfig { crossover_rate: 0.0, mutation_rate: Some(0.0), ..AlgoConfig::default() };
    let next = ea_step(&pop, &cfg, &mut stream(5, "p", 1)).unwrap();
    assert_eq!(next[0], pop[15], "best preserved exactly");
    for ind in &next {
        assert!(pop.iter().any(|p| p.genome == ind.genome));
    }
}

#[test]
fn steps_are_deterministic() {
    let cfg = AlgoConfig::default();
    assert_eq!(onemax_trace(9, &cfg, 20, 30, 25), onemax_trace(9, &cfg, 20, 30, 25));
    let run = |seed| {
        let mut rng = stream(seed, "init", 0);
        let pop: Vec<Individual> = (0..10)
            .map(|k| Individual { genome: Genome::random(&GenomeSpec::Reals(5), &mut rng), fitness: Some(k as f64), phenotype: None })
            .collect();
        ea_step(&pop, &cfg, &mut stream(seed, "p", 1)).unwrap()
    };
    assert_eq!(run(3), run(3));
}

#[test]
fn ga_solves_small_onemax() {
    let trace = onemax_trace(1, &AlgoConfig::default(), 30, 20, 60);
    assert_eq!(*trace.last().unwrap(), 20.0);
}
