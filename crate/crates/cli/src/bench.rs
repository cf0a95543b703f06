//! Benchmark sweep over instance sizes and band counts.
//!
//! Each (K, D) cell generates `reps` random instances, solves every one both
//! as a single pruned QUBO and through the segmented pipeline, and averages
//! variable counts, applied scores, and wall time. Instance seeds depend on
//! (base seed, K, rep) only, so all band counts see the same instances and
//! rows are comparable down the D column.

use std::time::Instant;

use jrp_core::generate::{self, GeneratorParams};
use jrp_core::heuristics;
use jrp_core::model::PriorityMode;
use jrp_core::pipeline::{self, PipelineReport};
use jrp_core::solvers::SolverConfig;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkParams {
    /// Total job counts K to sweep.
    pub sizes: Vec<usize>,
    /// Band counts D to sweep.
    pub band_counts: Vec<usize>,
    pub vacancy_fraction: f64,
    pub reps: u32,
    pub affinity_count_max: u64,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        Self {
            sizes: vec![8, 12, 16],
            band_counts: vec![1, 2, 4],
            vacancy_fraction: 0.4,
            reps: 20,
            affinity_count_max: 3,
            seed: 0,
            solver: SolverConfig::anneal(0),
        }
    }
}

/// Mean measurements of one (K, D) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub total_jobs: usize,
    pub bands: usize,
    pub reps: u32,
    /// Variables of the full problem after both pruning filters.
    pub full_pruned_vars: f64,
    /// Variables summed over all band subproblems.
    pub total_band_vars: f64,
    /// Variables of the largest single band subproblem.
    pub largest_band_vars: f64,
    pub full_score: f64,
    pub segmented_score: f64,
    pub full_wall_ms: f64,
    pub segmented_wall_ms: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Seed of the instance used for (base seed, K, rep); shared by every D.
pub fn instance_seed(base: u64, total_jobs: usize, rep: u32) -> u64 {
    splitmix64(base ^ splitmix64(total_jobs as u64) ^ splitmix64(u64::from(rep) << 32))
}

pub fn run_benchmark(params: &BenchmarkParams) -> jrp_core::Result<Vec<BenchmarkRow>> {
    let mut rows = Vec::new();
    for &total_jobs in &params.sizes {
        for &bands in &params.band_counts {
            let mut cell = CellStats::default();
            for rep in 0..params.reps {
                let instance = generate::generate(&GeneratorParams {
                    total_jobs,
                    vacancy_fraction: params.vacancy_fraction,
                    priority_mode: PriorityMode::Continuous,
                    affinity_count_max: params.affinity_count_max,
                    seed: instance_seed(params.seed, total_jobs, rep),
                    priority_levels: 1,
                })?;
                let full_candidates = heuristics::enumerate_candidates(
                    &instance,
                    instance.vacants(),
                    instance.assigned(),
                )?;

                let started = Instant::now();
                let full = pipeline::run_full(&instance, &params.solver)?;
                let full_ms = started.elapsed().as_secs_f64() * 1e3;

                let started = Instant::now();
                let segmented = pipeline::run(&instance, bands, &params.solver)?;
                let segmented_ms = started.elapsed().as_secs_f64() * 1e3;

                cell.add(
                    full_candidates.pairs.len(),
                    &full,
                    &segmented,
                    full_ms,
                    segmented_ms,
                );
            }
            rows.push(cell.row(total_jobs, bands, params.reps));
        }
    }
    Ok(rows)
}

#[derive(Default)]
struct CellStats {
    samples: f64,
    full_pruned_vars: f64,
    total_band_vars: f64,
    largest_band_vars: f64,
    full_score: f64,
    segmented_score: f64,
    full_wall_ms: f64,
    segmented_wall_ms: f64,
}

impl CellStats {
    fn add(
        &mut self,
        full_vars: usize,
        full: &PipelineReport,
        segmented: &PipelineReport,
        full_ms: f64,
        segmented_ms: f64,
    ) {
        self.samples += 1.0;
        self.full_pruned_vars += full_vars as f64;
        self.total_band_vars += segmented.total_variables as f64;
        self.largest_band_vars += segmented
            .bands
            .iter()
            .map(|b| b.variables)
            .max()
            .unwrap_or(0) as f64;
        self.full_score += full.total_score;
        self.segmented_score += segmented.total_score;
        self.full_wall_ms += full_ms;
        self.segmented_wall_ms += segmented_ms;
    }

    fn row(&self, total_jobs: usize, bands: usize, reps: u32) -> BenchmarkRow {
        let n = self.samples.max(1.0);
        BenchmarkRow {
            total_jobs,
            bands,
            reps,
            full_pruned_vars: self.full_pruned_vars / n,
            total_band_vars: self.total_band_vars / n,
            largest_band_vars: self.largest_band_vars / n,
            full_score: self.full_score / n,
            segmented_score: self.segmented_score / n,
            full_wall_ms: self.full_wall_ms / n,
            segmented_wall_ms: self.segmented_wall_ms / n,
        }
    }
}

/// Renders rows as a comma-separated table with a header line.
pub fn render_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(
        "total_jobs,bands,reps,full_pruned_vars,total_band_vars,largest_band_vars,\
         full_score,segmented_score,full_wall_ms,segmented_wall_ms\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.3},{:.3},{:.3},{:.4},{:.4},{:.3},{:.3}\n",
            r.total_jobs,
            r.bands,
            r.reps,
            r.full_pruned_vars,
            r.total_band_vars,
            r.largest_band_vars,
            r.full_score,
            r.segmented_score,
            r.full_wall_ms,
            r.segmented_wall_ms,
        ));
    }
    out
}
