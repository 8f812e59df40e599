use std::collections::BTreeMap;
use std::io;

use serde::Serialize;

use crate::exec::{CallRecord, GenerationReport, MigrationEvent};
use crate::plan::ExecutionPlan;

/// One line of the statistics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationRow {
    pub generation: u32,
    pub population_id: String,
    /// Absent for populations that receive no evaluative writes.
    pub best_fitness: Option<f64>,
    pub mean_fitness: Option<f64>,
    /// Mean pairwise Hamming distance over a sample of individuals.
    pub diversity: f64,
    /// Calls so far of the computations writing into this population.
    pub evals_cumulative: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunStats {
    pub rows: Vec<PopulationRow>,
    /// Per computation, exact call counts for each generation.
    pub calls: BTreeMap<String, Vec<u64>>,
    pub migrations: Vec<MigrationEvent>,
    /// Filled only when tracing is enabled.
    pub trace: Vec<CallRecord>,
}

#[derive(Serialize)]
struct JsonStats<'a> {
    rows: &'a [PopulationRow],
    evaluation_calls: BTreeMap<&'a str, u64>,
    migration_events: usize,
}

impl RunStats {
    pub fn new(plan: &ExecutionPlan) -> Self {
        RunStats {
            calls: plan.computations.iter().map(|c| (c.id.clone(), Vec::new())).collect(),
            ..RunStats::default()
        }
    }

    pub fn absorb(&mut self, report: GenerationReport) {
        self.rows.extend(report.rows);
        for (node, n) in report.calls {
            self.calls.entry(node).or_default().push(n);
        }
        self.migrations.extend(report.migrations);
        self.trace.extend(report.trace);
    }

    pub fn generations(&self) -> u32 {
        self.rows.iter().map(|r| r.generation).max().unwrap_or(0)
    }

    pub fn total_calls(&self, node: &str) -> u64 {
        self.calls.get(node).map(|v| v.iter().sum()).unwrap_or(0)
    }

    pub fn rows_for<'a>(&'a self, population: &'a str) -> impl Iterator<Item = &'a PopulationRow> + 'a {
        self.rows.iter().filter(move |r| r.population_id == population)
    }

    /// Best fitness over all populations at each generation.
    pub fn global_best(&self) -> Vec<Option<f64>> {
        let mut best = vec![None; self.generations() as usize];
        for r in &self.rows {
            if let Some(b) = r.best_fitness {
                let slot: &mut Option<f64> = &mut best[r.generation as usize - 1];
                *slot = Some(slot.map_or(b, |s: f64| s.max(b)));
            }
        }
        best
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let j = JsonStats {
            rows: &self.rows,
            evaluation_calls: self.calls.iter().map(|(k, v)| (k.as_str(), v.iter().sum())).collect(),
            migration_events: self.migrations.len(),
        };
        serde_json::to_string_pretty(&j).expect("stats serialise") + "\n"
    }
}
