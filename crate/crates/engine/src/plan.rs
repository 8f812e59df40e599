//! Compilation of a flat graph into an execution plan.
//!
//! The heart of compilation is turning edge labels into a binding plan for
//! each computation node:
//!
//! * Index variables on a node's inputs iterate in lockstep, so every
//!   bound population must have the same size. Distinct letters do not
//!   introduce nesting; `A[i]` and `B[j]` into one node pair `A_k` with `B_k`.
//! * Every other input adds an inner dimension, and a node is called once
//!   per element of their Cartesian product: `*` ranges over the whole
//!   population, a count draws that many individuals with its selector, an
//!   unlabeled input draws one with the default selector, and an upstream
//!   computation contributes the records it produced for the same index.
//! * Computations with no index variable anywhere upstream run once per
//!   generation over their inner dimensions.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use mpead_core::{Attachment, Binding, Diagram, Edge, FlatGraph, GenomeSpec, InfoKind};
use mpead_kernel::{AlgoConfig, FunctionHandle, Registry, Selector, DEFAULT_SELECTOR};

use crate::config::RunConfig;
use crate::error::EngineError;

#[derive(Clone)]
pub enum Pick {
    /// The individual at the current lockstep index.
    Index,
    All,
    Draw { k: usize, selector: Selector },
}

#[derive(Clone)]
pub enum InputSource {
    Population { pop: usize, pick: Pick },
    /// Output `output` of an earlier computation. `scoped` inputs read only
    /// the records produced at the same lockstep index.
    Upstream { comp: usize, output: usize, scoped: bool },
}

#[derive(Clone)]
pub struct InputPlan {
    pub edge: String,
    pub kind: InfoKind,
    pub source: InputSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteMode {
    /// Fitness of individual k is the mean of the records at index k.
    FitnessAt,
    /// Every individual gets the mean over all records.
    FitnessAll,
    /// Individual k's genome is overwritten and its fitness invalidated.
    Compose,
    /// Individual k's phenotype slot is set.
    Phenotype,
}

#[derive(Debug, Clone)]
pub struct WritePlan {
    pub edge: String,
    pub output: usize,
    pub pop: usize,
    pub mode: WriteMode,
}

#[derive(Clone)]
pub struct CompPlan {
    pub id: String,
    pub function: FunctionHandle,
    /// Lockstep length, if any input (direct or upstream) binds an index.
    pub domain: Option<usize>,
    /// Calls per lockstep index.
    pub multiplicity: usize,
    pub inputs: Vec<InputPlan>,
    pub writes: Vec<WritePlan>,
}

impl CompPlan {
    pub fn calls_per_generation(&self) -> usize {
        self.domain.unwrap_or(1) * self.multiplicity
    }
}

#[derive(Debug, Clone)]
pub struct PopPlan {
    pub id: String,
    pub size: usize,
    pub genome: GenomeSpec,
    pub algo: AlgoConfig,
    /// Receives evaluative writes and therefore evolves. Other populations
    /// stay as initialised apart from migration.
    pub dynamic: bool,
    /// Computations writing into this population.
    pub feeders: Vec<usize>,
}

#[derive(Clone)]
pub struct MigrationPlan {
    pub edge: String,
    pub from: usize,
    pub to: usize,
    pub count: usize,
    /// Selector from the source label; otherwise the run's emigrant policy.
    pub selector: Option<Selector>,
}

/// Everything needed to run a system, resolved and checked.
pub struct ExecutionPlan {
    pub name: String,
    pub config: RunConfig,
    pub populations: Vec<PopPlan>,
    /// In evaluation order: every computation comes after those it reads.
    pub computations: Vec<CompPlan>,
    pub migrations: Vec<MigrationPlan>,
}

impl ExecutionPlan {
    pub fn population_index(&self, id: &str) -> Option<usize> {
        self.populations.iter().position(|p| p.id == id)
    }

    pub fn computation_index(&self, id: &str) -> Option<usize> {
        self.computations.iter().position(|c| c.id == id)
    }

    /// Exact function calls per generation for each computation.
    pub fn calls_per_generation(&self) -> BTreeMap<String, usize> {
        self.computations.iter().map(|c| (c.id.clone(), c.calls_per_generation())).collect()
    }
}

fn unsupported(e: &Edge, detail: impl Into<String>) -> EngineError {
    EngineError::Unsupported { edge: e.id.clone(), detail: detail.into() }
}

/// Computations in dependency order, ties broken by declaration order.
fn topological(d: &Diagram) -> Result<Vec<usize>, EngineError> {
    let index: HashMap<&str, usize> = d.computations.iter().enumerate().map(|(k, c)| (c.id.as_str(), k)).collect();
    let n = d.computations.len();
    let mut indegree = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &d.edges {
        if let (Some(&a), Some(&b)) = (index.get(e.source.node.as_str()), index.get(e.target.node.as_str())) {
            succ[a].push(b);
            indegree[b] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&k| indegree[k] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(k)) = ready.pop() {
        order.push(k);
        for &s in &succ[k] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.push(Reverse(s));
            }
        }
    }
    if order.len() < n {
        let nodes = (0..n).filter(|&k| indegree[k] > 0).map(|k| d.computations[k].id.clone()).collect();
        return Err(EngineError::CyclicComputation { nodes });
    }
    Ok(order)
}

/// Index into the function's outputs for an edge leaving a computation.
/// Outgoing edges of one kind are numbered in order, a divergence group
/// counting once, and stream `s` reads the `s`-th output of that kind (the
/// last one if there are fewer).
fn output_index(d: &Diagram, func: &FunctionHandle, node: &str, edge: &Edge) -> Result<usize, EngineError> {
    let mut seen: Vec<&str> = Vec::new();
    for e in d.outgoing(node).filter(|e| e.kind == edge.kind) {
        let key = e.divergence_group.as_deref().unwrap_or(&e.id);
        if !seen.contains(&key) {
            seen.push(key);
        }
    }
    let key = edge.divergence_group.as_deref().unwrap_or(&edge.id);
    let stream = seen.iter().position(|k| *k == key).unwrap_or(0);
    let slots: Vec<usize> =
        func.signature.outputs.iter().enumerate().filter(|(_, k)| **k == edge.kind).map(|(i, _)| i).collect();
    match slots.last() {
        None => Err(EngineError::KindMismatch {
            edge: edge.id.clone(),
            detail: format!("function `{}` produces no {} output", func.name, edge.kind),
        }),
        Some(&last) => Ok(slots.get(stream).copied().unwrap_or(last)),
    }
}

struct Resolver<'a> {
    config: &'a RunConfig,
    registry: &'a Registry,
}

impl Resolver<'_> {
    fn selector(&self, e: &Edge, name: Option<&str>) -> Result<Selector, EngineError> {
        let name = name.unwrap_or(DEFAULT_SELECTOR);
        let bound = self.config.selectors.get(name).map(String::as_str).unwrap_or(name);
        self.registry
            .selector(bound)
            .cloned()
            .ok_or_else(|| EngineError::UnresolvedSelector { edge: e.id.clone(), name: name.to_string() })
    }
}

fn draw_count(e: &Edge, lo: u32, hi: u32, size: usize) -> Result<usize, EngineError> {
    let k = if hi > lo { (hi - lo + 1) as usize } else { lo as usize };
    if k == 0 {
        return Err(unsupported(e, "a count of zero"));
    }
    if k > size {
        return Err(EngineError::CountExceedsPopulation { edge: e.id.clone(), count: k, size });
    }
    Ok(k)
}

fn populations(d: &Diagram, r: &Resolver) -> Result<Vec<PopPlan>, EngineError> {
    for id in r.config.overrides.keys() {
        if d.population(id).is_none() {
            return Err(EngineError::InvalidConfig(format!("override for unknown population `{id}`")));
        }
    }
    d.populations
        .iter()
        .map(|p| {
            let o = r.config.overrides.get(&p.id);
            let missing = |attribute| EngineError::MissingAttribute { population: p.id.clone(), attribute };
            let size = o.and_then(|o| o.size).or(p.size).ok_or_else(|| missing("size"))?;
            let genome = o.and_then(|o| o.genome).or(p.genome).ok_or_else(|| missing("genome"))?;
            if size == 0 {
                return Err(EngineError::InvalidConfig(format!("population `{}` has size 0", p.id)));
            }
            let name = o.and_then(|o| o.algo.clone()).or(p.algo.clone()).unwrap_or_else(|| "ga".into());
            let algo = r
                .registry
                .algo(&name)
                .cloned()
                .ok_or_else(|| EngineError::UnresolvedAlgo { population: p.id.clone(), name })?;
            Ok(PopPlan { id: p.id.clone(), size, genome, algo, dynamic: false, feeders: Vec::new() })
        })
        .collect()
}

pub fn compile(flat: &FlatGraph, config: &RunConfig, registry: &Registry) -> Result<ExecutionPlan, EngineError> {
    config.check().map_err(EngineError::InvalidConfig)?;
    let d: &Diagram = flat;
    let r = Resolver { config, registry };
    let mut pops = populations(d, &r)?;
    let pop_index: HashMap<&str, usize> = d.populations.iter().enumerate().map(|(k, p)| (p.id.as_str(), k)).collect();

    let order = topological(d)?;
    let mut planned: HashMap<&str, usize> = HashMap::new();
    let mut letters_of: Vec<BTreeSet<char>> = Vec::new();
    let mut comps: Vec<CompPlan> = Vec::new();

    for &ci in &order {
        let node = &d.computations[ci];
        let function = registry
            .function(&node.fn_ref)
            .cloned()
            .ok_or_else(|| EngineError::UnresolvedFunction { node: node.id.clone(), name: node.fn_ref.clone() })?;
        let incoming: Vec<&Edge> = d.incoming(&node.id).collect();
        let ports = &function.signature.inputs;
        if incoming.len() != ports.len() {
            return Err(EngineError::ArityMismatch {
                node: node.id.clone(),
                function: function.name.clone(),
                expected: ports.len(),
                got: incoming.len(),
            });
        }

        let mut letters: BTreeSet<char> = BTreeSet::new();
        let mut sizes: Vec<(String, usize)> = Vec::new();
        let mut inputs = Vec::new();
        let mut multiplicity = 1usize;
        for (e, port) in incoming.iter().zip(ports) {
            if !port.accepts(e.kind) {
                return Err(EngineError::KindMismatch {
                    edge: e.id.clone(),
                    detail: format!("input {} of `{}` expects {port} information, edge carries {}", inputs.len(), function.name, e.kind),
                });
            }
            if e.target.attachment == Attachment::Inset {
                return Err(unsupported(e, "an inset arrowhead on a computation"));
            }
            let source = if let Some(&p) = pop_index.get(e.source.node.as_str()) {
                let size = pops[p].size;
                let pick = match e.source.label.as_ref().map(|l| (&l.binding, l.selector.as_deref())) {
                    None => Pick::Draw { k: 1, selector: r.selector(e, None)? },
                    Some((Binding::IndexVar { letter }, _)) => {
                        letters.insert(*letter);
                        sizes.push((e.source.node.clone(), size));
                        Pick::Index
                    }
                    Some((Binding::All, _)) => Pick::All,
                    Some((Binding::Count { lo, hi }, sel)) => Pick::Draw { k: draw_count(e, *lo, *hi, size)?, selector: r.selector(e, sel)? },
                };
                multiplicity *= match &pick {
                    Pick::Index => 1,
                    Pick::All => size,
                    Pick::Draw { k, .. } => *k,
                };
                InputSource::Population { pop: p, pick }
            } else {
                let up = planned[e.source.node.as_str()];
                let producer: &CompPlan = &comps[up];
                let output = output_index(d, &producer.function, &producer.id, e)?;
                letters.extend(letters_of[up].iter().copied());
                let scoped = producer.domain.is_some();
                if let Some(n) = producer.domain {
                    sizes.push((format!("{} (via {})", producer.id, e.id), n));
                    multiplicity *= producer.multiplicity;
                } else {
                    multiplicity *= producer.calls_per_generation();
                }
                InputSource::Upstream { comp: up, output, scoped }
            };
            inputs.push(InputPlan { edge: e.id.clone(), kind: e.kind, source });
        }
        let domain = sizes.first().map(|s| s.1);
        if sizes.iter().any(|s| Some(s.1) != domain) {
            return Err(EngineError::SizeMismatch { node: node.id.clone(), sizes });
        }

        let me = comps.len();
        let mut writes = Vec::new();
        for e in d.outgoing(&node.id) {
            let output = output_index(d, &function, &node.id, e)?;
            let Some(&p) = pop_index.get(e.target.node.as_str()) else { continue };
            if e.target.attachment == Attachment::Inset {
                return Err(unsupported(e, "migration from a computation"));
            }
            let indexed = |letter: char| -> Result<(), EngineError> {
                if !letters.contains(&letter) {
                    return Err(EngineError::UnboundIndex { edge: e.id.clone(), letter });
                }
                let n = domain.expect("a bound letter implies a domain");
                if pops[p].size != n {
                    let mut sizes = sizes.clone();
                    sizes.push((e.target.node.clone(), pops[p].size));
                    return Err(EngineError::SizeMismatch { node: node.id.clone(), sizes });
                }
                Ok(())
            };
            let binding = e.target.label.as_ref().map(|l| &l.binding);
            let mode = match (e.kind, binding) {
                (InfoKind::Evaluative, Some(Binding::IndexVar { letter })) => {
                    indexed(*letter)?;
                    WriteMode::FitnessAt
                }
                (InfoKind::Evaluative, Some(Binding::All)) => WriteMode::FitnessAll,
                (kind, Some(Binding::IndexVar { letter })) => {
                    indexed(*letter)?;
                    if multiplicity != 1 {
                        return Err(unsupported(e, format!("a genetic write fed by {multiplicity} calls per individual")));
                    }
                    if kind == InfoKind::Genotypic {
                        WriteMode::Compose
                    } else {
                        WriteMode::Phenotype
                    }
                }
                (kind, Some(_)) => return Err(unsupported(e, format!("a {kind} write through a count or `*` label"))),
                (kind, None) => return Err(unsupported(e, format!("an unlabeled {kind} write into a population"))),
            };
            if e.kind == InfoKind::Evaluative {
                pops[p].dynamic = true;
            }
            if !pops[p].feeders.contains(&me) {
                pops[p].feeders.push(me);
            }
            writes.push(WritePlan { edge: e.id.clone(), output, pop: p, mode });
        }

        planned.insert(&node.id, me);
        letters_of.push(letters);
        comps.push(CompPlan { id: node.id.clone(), function, domain, multiplicity, inputs, writes });
    }

    let mut migrations = Vec::new();
    for e in &d.edges {
        let (Some(&from), Some(&to)) = (pop_index.get(e.source.node.as_str()), pop_index.get(e.target.node.as_str())) else {
            continue;
        };
        if e.target.attachment != Attachment::Inset {
            return Err(unsupported(e, "a direct edge between populations without an inset arrowhead"));
        }
        if !e.kind.is_genetic() {
            return Err(EngineError::KindMismatch { edge: e.id.clone(), detail: "migration must carry genetic information".into() });
        }
        if e.target.label.is_some() {
            return Err(unsupported(e, "a label on the receiving end of a migration"));
        }
        if pops[from].genome != pops[to].genome {
            return Err(EngineError::KindMismatch { edge: e.id.clone(), detail: "migration between populations with different genomes".into() });
        }
        let size = pops[from].size;
        let (count, selector) = match e.source.label.as_ref().map(|l| (&l.binding, l.selector.as_deref())) {
            None => (1, None),
            Some((Binding::All, _)) => (size, None),
            Some((Binding::Count { lo, hi }, sel)) => {
                let k = draw_count(e, *lo, *hi, size)?;
                (k, sel.map(|s| r.selector(e, Some(s))).transpose()?)
            }
            Some((Binding::IndexVar { .. }, _)) => return Err(unsupported(e, "an index variable on a migration edge")),
        };
        migrations.push(MigrationPlan { edge: e.id.clone(), from, to, count, selector });
    }

    Ok(ExecutionPlan {
        name: d.name.clone(),
        config: config.clone(),
        populations: pops,
        computations: comps,
        migrations,
    })
}
