//! Deterministic random instance generation for tests and benchmarks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    AffinityTable, AgentId, AssignedJob, JobId, JrpInstance, PriorityMode, VacantJob,
};

/// Weights baked into generated instances. The affinity weight is kept small
/// so pair scores stay roughly symmetric around zero, which the sizing
/// heuristics assume.
pub const WEIGHT_PRIORITY: f64 = 1.0;
pub const WEIGHT_AFFINITY: f64 = 0.25;

/// Knobs of the random instance generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    /// Total number of jobs `K`; `I = round(p * K)` become vacant and the
    /// remaining `J = K - I` get agents.
    pub total_jobs: usize,
    /// Fraction `p` of jobs that are vacant, in (0, 1).
    pub vacancy_fraction: f64,
    /// Number of equispaced priority values used in discrete mode.
    pub priority_levels: u32,
    pub priority_mode: PriorityMode,
    /// Largest historical assignment count drawn for any pair.
    pub affinity_count_max: u64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            total_jobs: 12,
            vacancy_fraction: 0.4,
            priority_levels: 4,
            priority_mode: PriorityMode::Continuous,
            affinity_count_max: 3,
            seed: 0,
        }
    }
}

/// Builds a random valid instance. The same parameters always produce the
/// same instance, byte for byte.
pub fn generate(params: &GeneratorParams) -> Result<JrpInstance> {
    if params.total_jobs < 1 {
        return Err(Error::Parameter("total job count must be at least 1".into()));
    }
    if !(params.vacancy_fraction > 0.0 && params.vacancy_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "vacancy fraction must lie in (0, 1), got {}",
            params.vacancy_fraction
        )));
    }
    if params.priority_mode == PriorityMode::Discrete && params.priority_levels < 1 {
        return Err(Error::Parameter(
            "discrete generation needs at least 1 priority level".into(),
        ));
    }
    if params.affinity_count_max < 1 {
        return Err(Error::Parameter(
            "affinity count maximum must be at least 1".into(),
        ));
    }

    let vacant_count = (params.vacancy_fraction * params.total_jobs as f64).round() as usize;
    let assigned_count = params.total_jobs - vacant_count;
    let width = params.total_jobs.to_string().len();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let draw_priority = |rng: &mut ChaCha8Rng| match params.priority_mode {
        // gen::<f64>() covers [0, 1); flipping it lands in (0, 1].
        PriorityMode::Continuous => 1.0 - rng.gen::<f64>(),
        PriorityMode::Discrete => {
            f64::from(rng.gen_range(1..=params.priority_levels)) / f64::from(params.priority_levels)
        }
    };

    let assigned: Vec<AssignedJob> = (0..assigned_count)
        .map(|i| AssignedJob {
            job: JobId::new(format!("w{:0width$}", i + 1)),
            agent: AgentId::new(format!("a{:0width$}", i + 1)),
            priority: draw_priority(&mut rng),
        })
        .collect();
    let vacants: Vec<VacantJob> = (0..vacant_count)
        .map(|i| VacantJob {
            job: JobId::new(format!("v{:0width$}", i + 1)),
            priority: draw_priority(&mut rng),
        })
        .collect();

    // Every (job, agent) pair gets a history draw; the pair an agent
    // currently covers is forced to at least one past assignment.
    let mut table = AffinityTable::new();
    for a in &assigned {
        for other in &assigned {
            let count = if a.agent == other.agent {
                rng.gen_range(1..=params.affinity_count_max)
            } else {
                rng.gen_range(0..=params.affinity_count_max)
            };
            table.set_count(other.job.clone(), a.agent.clone(), count);
        }
        for v in &vacants {
            let count = rng.gen_range(0..=params.affinity_count_max);
            table.set_count(v.job.clone(), a.agent.clone(), count);
        }
    }

    JrpInstance::new(
        assigned,
        vacants,
        table,
        WEIGHT_PRIORITY,
        WEIGHT_AFFINITY,
        params.priority_mode,
    )
}
