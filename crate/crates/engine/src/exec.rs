//! Generation-by-generation execution.
//!
//! Each generation runs these phases:
//!
//! 1. the populations as they stand are the snapshot every read observes;
//! 2. computations run in dependency order, each reading the snapshot and
//!    the records of computations before it;
//! 3. evaluative writes set fitness (the mean of all values reaching an
//!    individual), then genetic writes overwrite genomes and clear fitness;
//! 4. on migration generations, copies of emigrants leave their (evaluated)
//!    source and replace individuals in the destination;
//! 5. every population that received evaluative writes takes one EA step.
//!
//! Individuals whose genome was overwritten in phase 3 are held out of the
//! EA step and keep their slot, so they are evaluated next generation.

use std::collections::BTreeMap;
use std::ops::Range;

use mpead_core::InfoKind;
use mpead_kernel::select;
use mpead_kernel::{diversity, ea_step, stream, Genome, Individual, Value};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Emigrant, Replace};
use crate::error::EngineError;
use crate::plan::{ExecutionPlan, InputSource, Pick, WriteMode};
use crate::stats::{PopulationRow, RunStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArgRef {
    Individual { pop: usize, index: usize },
    Record { comp: usize, record: usize },
}

/// One argument of a traced call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "from")]
pub enum TraceArg {
    Individual { population: String, index: usize },
    Record { node: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallRecord {
    pub generation: u32,
    pub node: String,
    /// Lockstep index the call belongs to, if the node has one.
    pub index: Option<usize>,
    pub inputs: Vec<TraceArg>,
    pub outputs: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MigrationEvent {
    pub generation: u32,
    pub edge: String,
    pub from: String,
    pub to: String,
    /// (emigrant index in the source, replaced index in the destination)
    pub moves: Vec<(usize, usize)>,
}

/// What happened in one generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationReport {
    pub generation: u32,
    /// Fitness of every individual after the writes of this generation, per
    /// population id.
    pub fitness: BTreeMap<String, Vec<Option<f64>>>,
    /// Function calls per computation this generation.
    pub calls: BTreeMap<String, u64>,
    pub migrations: Vec<MigrationEvent>,
    pub trace: Vec<CallRecord>,
    pub rows: Vec<PopulationRow>,
}

struct Output {
    records: Vec<Vec<Value>>,
    /// Record range per lockstep index (one range if unindexed).
    ranges: Vec<Range<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    /// Generations completed.
    pub generation: u32,
    pub populations: Vec<Vec<Individual>>,
}

/// A running system. Owns the state and a worker pool.
pub struct Simulation<'p> {
    plan: &'p ExecutionPlan,
    state: RunState,
    pool: rayon::ThreadPool,
    cumulative: Vec<u64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

impl<'p> Simulation<'p> {
    pub fn new(plan: &'p ExecutionPlan) -> Result<Self, EngineError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(plan.config.workers)
            .build()
            .map_err(|e| EngineError::InvalidConfig(e.to_string()))?;
        let seed = plan.config.seed;
        let populations = plan
            .populations
            .iter()
            .map(|p| {
                let mut rng = stream(seed, &format!("init:{}", p.id), 0);
                (0..p.size).map(|_| Individual::new(Genome::random(&p.genome, &mut rng))).collect()
            })
            .collect();
        Ok(Simulation {
            plan,
            state: RunState { generation: 0, populations },
            pool,
            cumulative: vec![0; plan.computations.len()],
        })
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn population(&self, id: &str) -> Option<&[Individual]> {
        self.plan.population_index(id).map(|k| self.state.populations[k].as_slice())
    }

    fn read(&self, arg: ArgRef, kind: InfoKind, output: usize, outputs: &[Output]) -> Result<Value, EngineError> {
        match arg {
            ArgRef::Individual { pop, index } => {
                let ind = &self.state.populations[pop][index];
                Ok(match kind {
                    InfoKind::Genotypic => Value::from(&ind.genome),
                    InfoKind::Phenotypic => ind.phenotype.clone().unwrap_or_else(|| Value::from(&ind.genome)),
                    InfoKind::Evaluative => Value::Scalar(ind.fitness.ok_or_else(|| EngineError::MissingFitness {
                        population: self.plan.populations[pop].id.clone(),
                        index,
                    })?),
                })
            }
            ArgRef::Record { comp, record } => Ok(outputs[comp].records[record][output].clone()),
        }
    }

    /// Phase 2 for one computation: enumerate its calls, then evaluate them.
    fn evaluate(&self, ci: usize, outputs: &[Output], trace: &mut Vec<CallRecord>) -> Result<Output, EngineError> {
        let plan = self.plan;
        let comp = &plan.computations[ci];
        let generation = self.state.generation + 1;
        let mut rng = stream(plan.config.seed, &format!("sel:{}", comp.id), generation as u64);
        let fitness: Vec<Vec<Option<f64>>> = comp
            .inputs
            .iter()
            .map(|i| match i.source {
                InputSource::Population { pop, .. } => self.state.populations[pop].iter().map(|x| x.fitness).collect(),
                InputSource::Upstream { .. } => Vec::new(),
            })
            .collect();

        let lanes = comp.domain.unwrap_or(1);
        let mut calls: Vec<Vec<ArgRef>> = Vec::with_capacity(comp.calls_per_generation());
        let mut ranges = Vec::with_capacity(lanes);
        for k in 0..lanes {
            let choices: Vec<Vec<ArgRef>> = comp
                .inputs
                .iter()
                .zip(&fitness)
                .map(|(input, fit)| match &input.source {
                    InputSource::Population { pop, pick } => {
                        let idx = match pick {
                            Pick::Index => vec![k],
                            Pick::All => (0..fit.len()).collect(),
                            Pick::Draw { k: n, selector } => selector(fit, *n, &mut rng),
                        };
                        idx.into_iter().map(|index| ArgRef::Individual { pop: *pop, index }).collect()
                    }
                    InputSource::Upstream { comp: up, scoped, .. } => {
                        let r = if *scoped { outputs[*up].ranges[k].clone() } else { 0..outputs[*up].records.len() };
                        r.map(|record| ArgRef::Record { comp: *up, record }).collect()
                    }
                })
                .collect();
            let start = calls.len();
            // Cartesian product, first input outermost
            let mut odometer = vec![0usize; choices.len()];
            if choices.iter().all(|c| !c.is_empty()) {
                'product: loop {
                    calls.push(odometer.iter().zip(&choices).map(|(&o, c)| c[o]).collect());
                    for d in (0..choices.len()).rev() {
                        odometer[d] += 1;
                        if odometer[d] < choices[d].len() {
                            continue 'product;
                        }
                        odometer[d] = 0;
                    }
                    break;
                }
            }
            ranges.push(start..calls.len());
        }

        let run = |args: &Vec<ArgRef>| -> Result<Vec<Value>, EngineError> {
            let values = args
                .iter()
                .zip(&comp.inputs)
                .map(|(a, input)| {
                    let output = match input.source {
                        InputSource::Upstream { output, .. } => output,
                        InputSource::Population { .. } => 0,
                    };
                    self.read(*a, input.kind, output, outputs)
                })
                .collect::<Result<Vec<_>, _>>()?;
            comp.function.call(&values).map_err(|source| EngineError::Function { node: comp.id.clone(), source })
        };
        let results: Vec<Result<Vec<Value>, EngineError>> =
            self.pool.install(|| calls.par_iter().with_min_len(64).map(run).collect());
        let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;

        if plan.config.trace {
            for (k, r) in ranges.iter().enumerate() {
                for c in r.clone() {
                    trace.push(CallRecord {
                        generation,
                        node: comp.id.clone(),
                        index: comp.domain.map(|_| k),
                        inputs: calls[c]
                            .iter()
                            .map(|a| match *a {
                                ArgRef::Individual { pop, index } => {
                                    TraceArg::Individual { population: plan.populations[pop].id.clone(), index }
                                }
                                ArgRef::Record { comp, record } => {
                                    TraceArg::Record { node: plan.computations[comp].id.clone(), index: record }
                                }
                            })
                            .collect(),
                        outputs: records[c].clone(),
                    });
                }
            }
        }
        Ok(Output { records, ranges })
    }

    /// Runs one generation.
    pub fn step(&mut self) -> Result<GenerationReport, EngineError> {
        let plan = self.plan;
        let generation = self.state.generation + 1;
        let mut trace = Vec::new();

        // phase 2
        let mut outputs: Vec<Output> = Vec::with_capacity(plan.computations.len());
        for ci in 0..plan.computations.len() {
            let out = self.evaluate(ci, &outputs, &mut trace)?;
            outputs.push(out);
        }
        let mut calls = BTreeMap::new();
        for (ci, c) in plan.computations.iter().enumerate() {
            let n = outputs[ci].records.len() as u64;
            self.cumulative[ci] += n;
            calls.insert(c.id.clone(), n);
        }

        // phase 3
        let mut acc: Vec<Vec<Vec<f64>>> = plan.populations.iter().map(|p| vec![Vec::new(); p.size]).collect();
        let mut genetic: Vec<(usize, usize, WriteMode, Value, &str)> = Vec::new();
        for (ci, comp) in plan.computations.iter().enumerate() {
            let out = &outputs[ci];
            for w in &comp.writes {
                let scalar = |r: usize| {
                    out.records[r][w.output].as_scalar().ok_or_else(|| EngineError::InvalidValue {
                        edge: w.edge.clone(),
                        detail: format!("expected a scalar, got {}", out.records[r][w.output].type_name()),
                    })
                };
                match w.mode {
                    WriteMode::FitnessAt => {
                        for (k, range) in out.ranges.iter().enumerate() {
                            if !range.is_empty() {
                                let xs = range.clone().map(scalar).collect::<Result<Vec<_>, _>>()?;
                                acc[w.pop][k].push(mean(&xs));
                            }
                        }
                    }
                    WriteMode::FitnessAll => {
                        if !out.records.is_empty() {
                            let xs = (0..out.records.len()).map(scalar).collect::<Result<Vec<_>, _>>()?;
                            let m = mean(&xs);
                            acc[w.pop].iter_mut().for_each(|a| a.push(m));
                        }
                    }
                    WriteMode::Compose | WriteMode::Phenotype => {
                        for (k, range) in out.ranges.iter().enumerate() {
                            for r in range.clone() {
                                genetic.push((w.pop, k, w.mode, out.records[r][w.output].clone(), &w.edge));
                            }
                        }
                    }
                }
            }
        }
        let mut pops = std::mem::take(&mut self.state.populations);
        for (p, plan_p) in plan.populations.iter().enumerate() {
            if plan_p.dynamic {
                for (ind, a) in pops[p].iter_mut().zip(&acc[p]) {
                    ind.fitness = (!a.is_empty()).then(|| mean(a));
                }
            }
        }
        let mut held: Vec<Vec<bool>> = plan.populations.iter().map(|p| vec![false; p.size]).collect();
        for (p, k, mode, value, edge) in genetic {
            let ind = &mut pops[p][k];
            if mode == WriteMode::Phenotype {
                ind.phenotype = Some(value);
                continue;
            }
            match value.as_genome() {
                Some(g) if g.matches_spec(&plan.populations[p].genome) => {
                    *ind = Individual::new(g);
                    held[p][k] = true;
                }
                _ => {
                    return Err(EngineError::InvalidValue {
                        edge: edge.to_string(),
                        detail: format!("a {} value does not fit the genome of `{}`", value.type_name(), plan.populations[p].id),
                    })
                }
            }
        }

        let fitness: BTreeMap<String, Vec<Option<f64>>> = plan
            .populations
            .iter()
            .zip(&pops)
            .map(|(p, inds)| (p.id.clone(), inds.iter().map(|i| i.fitness).collect()))
            .collect();
        let rows = plan
            .populations
            .iter()
            .zip(&pops)
            .map(|(p, inds)| {
                let fits: Vec<f64> = inds.iter().filter_map(|i| i.fitness).collect();
                PopulationRow {
                    generation,
                    population_id: p.id.clone(),
                    best_fitness: fits.iter().copied().reduce(f64::max),
                    mean_fitness: (!fits.is_empty()).then(|| mean(&fits)),
                    diversity: diversity(inds, plan.config.diversity_sample),
                    evals_cumulative: p.feeders.iter().map(|&c| self.cumulative[c]).sum(),
                }
            })
            .collect();

        // phase 4
        let mut migrations = Vec::new();
        if generation.is_multiple_of(plan.config.migration.interval) && !plan.migrations.is_empty() {
            let mut rng = stream(plan.config.seed, "mig", generation as u64);
            let sources = pops.clone();
            for m in &plan.migrations {
                let src_fit: Vec<Option<f64>> = sources[m.from].iter().map(|i| i.fitness).collect();
                let chosen = match (&m.selector, plan.config.migration.emigrant) {
                    (Some(sel), _) => sel(&src_fit, m.count, &mut rng),
                    (None, Emigrant::Best) => select::best(&src_fit, m.count, &mut rng),
                    (None, Emigrant::Random) => select::uniform(&src_fit, m.count, &mut rng),
                };
                let mut moves = Vec::with_capacity(chosen.len());
                for e in chosen {
                    let dest_fit: Vec<Option<f64>> = pops[m.to].iter().map(|i| i.fitness).collect();
                    let slot = match plan.config.migration.replace {
                        Replace::Worst => *select::best(&dest_fit, dest_fit.len(), &mut rng).last().expect("populations are non-empty"),
                        Replace::Random => select::uniform(&dest_fit, 1, &mut rng)[0],
                    };
                    let migrant = Individual { phenotype: None, ..sources[m.from][e].clone() };
                    // a migrant without fitness waits a generation, like a composed individual
                    held[m.to][slot] = migrant.fitness.is_none();
                    pops[m.to][slot] = migrant;
                    moves.push((e, slot));
                }
                migrations.push(MigrationEvent {
                    generation,
                    edge: m.edge.clone(),
                    from: plan.populations[m.from].id.clone(),
                    to: plan.populations[m.to].id.clone(),
                    moves,
                });
            }
        }

        // phase 5
        let seed = plan.config.seed;
        let stepped: Vec<Result<Option<Vec<Individual>>, EngineError>> = self.pool.install(|| {
            plan.populations
                .par_iter()
                .enumerate()
                .map(|(p, pp)| {
                    if !pp.dynamic {
                        return Ok(None);
                    }
                    let free: Vec<usize> = (0..pp.size).filter(|&k| !held[p][k]).collect();
                    let parents: Vec<Individual> = free.iter().map(|&k| pops[p][k].clone()).collect();
                    let mut rng = stream(seed, &format!("pop:{}", pp.id), generation as u64);
                    let children = ea_step(&parents, &pp.algo, &mut rng).map_err(|e| match e {
                        mpead_kernel::KernelError::MissingFitness { index } => {
                            EngineError::MissingFitness { population: pp.id.clone(), index: free[index] }
                        }
                        other => other.into(),
                    })?;
                    let mut next = pops[p].clone();
                    for (slot, child) in free.into_iter().zip(children) {
                        next[slot] = child;
                    }
                    Ok(Some(next))
                })
                .collect()
        });
        for (p, s) in stepped.into_iter().enumerate() {
            if let Some(next) = s? {
                pops[p] = next;
            }
        }

        self.state.populations = pops;
        self.state.generation = generation;
        Ok(GenerationReport { generation, fitness, calls, migrations, trace, rows })
    }
}

/// Runs the configured number of generations and collects statistics.
pub fn run(plan: &ExecutionPlan) -> Result<RunStats, EngineError> {
    let mut sim = Simulation::new(plan)?;
    let mut stats = RunStats::new(plan);
    for _ in 0..plan.config.generations {
        let report = sim.step()?;
        stats.absorb(report);
    }
    Ok(stats)
}
