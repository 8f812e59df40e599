use std::collections::BTreeMap;

use mpead_core::GenomeSpec;
use serde::Serialize;

/// Which individuals leave the source population on a migration edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emigrant {
    #[default]
    Best,
    Random,
}

/// Which individual of the receiving population a migrant replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Replace {
    #[default]
    Worst,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MigrationPolicy {
    pub emigrant: Emigrant,
    /// Migration runs on generations divisible by this.
    pub interval: u32,
    pub replace: Replace,
}

impl Default for MigrationPolicy {
    fn default() -> Self {
        MigrationPolicy { emigrant: Emigrant::Best, interval: 5, replace: Replace::Worst }
    }
}

/// Per-population replacements for attributes written in the diagram.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PopulationOverride {
    pub size: Option<usize>,
    pub genome: Option<GenomeSpec>,
    pub algo: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub generations: u32,
    pub seed: u64,
    /// Worker threads; 0 lets the thread pool choose. Never affects results.
    pub workers: usize,
    pub overrides: BTreeMap<String, PopulationOverride>,
    pub migration: MigrationPolicy,
    /// Extra selector names, each bound to a selector in the registry.
    pub selectors: BTreeMap<String, String>,
    /// Record every function call (inputs and outputs).
    pub trace: bool,
    /// Individuals sampled for the diversity statistic.
    pub diversity_sample: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            generations: 100,
            seed: 0,
            workers: 1,
            overrides: BTreeMap::new(),
            migration: MigrationPolicy::default(),
            selectors: BTreeMap::new(),
            trace: false,
            diversity_sample: 16,
        }
    }
}

impl RunConfig {
    pub fn new(generations: u32, seed: u64) -> Self {
        RunConfig { generations, seed, ..RunConfig::default() }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.generations == 0 {
            return Err("generations must be at least 1".into());
        }
        if self.migration.interval == 0 {
            return Err("migration interval must be at least 1".into());
        }
        Ok(())
    }
}
