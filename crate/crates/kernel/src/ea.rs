use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::genome::{Genome, Individual};
use crate::KernelError;

/// Generational GA parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgoConfig {
    /// Best individuals copied unchanged into the next generation.
    pub elitism: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / genome length`.
    pub mutation_rate: Option<f64>,
    /// Standard deviation of the Gaussian step for real genes.
    pub sigma: f64,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        AlgoConfig {
            elitism: 1,
            tournament: 2,
            crossover_rate: 0.9,
            mutation_rate: None,
            sigma: 0.1,
        }
    }
}

impl AlgoConfig {
    pub fn without_elitism() -> Self {
        AlgoConfig { elitism: 0, ..AlgoConfig::default() }
    }
}

fn fitnesses(pop: &[Individual]) -> Result<Vec<f64>, KernelError> {
    pop.iter()
        .enumerate()
        .map(|(index, ind)| ind.fitness.ok_or(KernelError::MissingFitness { index }))
        .collect()
}

/// Indices sorted best first; ties keep the lower index first.
pub fn ranking(fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    order
}

fn tournament(fitness: &[f64], size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size.max(1) {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

fn crossover(a: &mut Genome, b: &mut Genome, rng: &mut impl Rng) {
    let len = a.len().min(b.len());
    if len < 2 {
        return;
    }
    let cut = rng.random_range(1..len);
    match (a, b) {
        (Genome::Bits(x), Genome::Bits(y)) => x[cut..len].swap_with_slice(&mut y[cut..len]),
        (Genome::Reals(x), Genome::Reals(y)) => x[cut..len].swap_with_slice(&mut y[cut..len]),
        _ => {}
    }
}

fn mutate(g: &mut Genome, cfg: &AlgoConfig, rng: &mut impl Rng) {
    let len = g.len();
    if len == 0 {
        return;
    }
    let rate = cfg.mutation_rate.unwrap_or(1.0 / len as f64).clamp(0.0, 1.0);
    if rate == 0.0 {
        return;
    }
    match g {
        Genome::Bits(bits) => {
            for b in bits {
                if rng.random_bool(rate) {
                    *b = !*b;
                }
            }
        }
        Genome::Reals(reals) => {
            let step = Normal::new(0.0, cfg.sigma.max(0.0)).expect("finite sigma");
            for r in reals {
                if rng.random_bool(rate) {
                    *r += step.sample(rng);
                }
            }
        }
    }
}

/// One generation of a generational GA: elites first, then offspring bred by
/// tournament selection, one-point crossover and per-gene mutation.
/// Offspring carry no fitness; elites keep theirs.
pub fn ea_step(pop: &[Individual], cfg: &AlgoConfig, rng: &mut impl Rng) -> Result<Vec<Individual>, KernelError> {
    let fitness = fitnesses(pop)?;
    if pop.is_empty() {
        return Ok(Vec::new());
    }
    let n = pop.len();
    let mut next: Vec<Individual> = ranking(&fitness)
        .into_iter()
        .take(cfg.elitism.min(n))
        .map(|i| Individual { phenotype: None, ..pop[i].clone() })
        .collect();
    while next.len() < n {
        let mut a = pop[tournament(&fitness, cfg.tournament, rng)].genome.clone();
        let mut b = pop[tournament(&fitness, cfg.tournament, rng)].genome.clone();
        if rng.random_bool(cfg.crossover_rate.clamp(0.0, 1.0)) {
            crossover(&mut a, &mut b, rng);
        }
        for mut g in [a, b] {
            if next.len() < n {
                mutate(&mut g, cfg, rng);
                next.push(Individual::new(g));
            }
        }
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn pop(fits: &[f64]) -> Vec<Individual> {
        fits.iter()
            .enumerate()
            .map(|(i, &f)| Individual {
                genome: Genome::Bits((0..8).map(|b| (i >> (b % 4)) & 1 == 1).collect()),
                fitness: Some(f),
                phenotype: None,
            })
            .collect()
    }

    #[test]
    fn missing_fitness_is_reported() {
        let mut p = pop(&[1.0, 2.0]);
        p[1].fitness = None;
        let err = ea_step(&p, &AlgoConfig::default(), &mut stream(0, "t", 0)).unwrap_err();
        assert_eq!(err, KernelError::MissingFitness { index: 1 });
    }

    #[test]
    fn elite_is_first_and_exact() {
        let p = pop(&[1.0, 5.0, 3.0, 5.0]);
        let next = ea_step(&p, &AlgoConfig::default(), &mut stream(0, "t", 0)).unwrap();
        assert_eq!(next.len(), 4);
        assert_eq!(next[0], p[1]);
        assert!(next[1..].iter().all(|i| i.fitness.is_none()));
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        assert_eq!(ranking(&[1.0, 3.0, 3.0, 0.5]), vec![1, 2, 0, 3]);
    }

    #[test]
    fn one_point_crossover_swaps_a_tail() {
        let mut a = Genome::Bits(vec![true; 6]);
        let mut b = Genome::Bits(vec![false; 6]);
        crossover(&mut a, &mut b, &mut stream(3, "t", 0));
        let (Genome::Bits(x), Genome::Bits(y)) = (&a, &b) else { panic!() };
        let cut = x.iter().position(|v| !v).unwrap();
        assert!(cut >= 1 && x[cut..].iter().all(|v| !v) && y[cut..].iter().all(|v| *v));
        assert!(y[..cut].iter().all(|v| !v));
    }

    #[test]
    fn real_genomes_mutate_by_gaussian_steps() {
        let cfg = AlgoConfig { mutation_rate: Some(1.0), ..AlgoConfig::default() };
        let mut g = Genome::Reals(vec![0.5; 1000]);
        mutate(&mut g, &cfg, &mut stream(0, "t", 0));
        let Genome::Reals(v) = g else { panic!() };
        let mean = v.iter().sum::<f64>() / 1000.0;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 999.0).sqrt();
        assert!((mean - 0.5).abs() < 0.02);
        assert!((sd - 0.1).abs() < 0.01);
    }
}
