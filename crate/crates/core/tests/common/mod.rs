//! Shared helpers for integration tests: an energy oracle computed straight
//! from the cost function's definition, independent of the matrix expansion
//! used by the library.

use std::collections::BTreeMap;

use jrp_core::model::{AgentId, AssignedJob, JobId, JrpInstance, VacantJob};

/// Evaluates the cost function directly: minus the summed scores of active
/// pairs, plus one `lambda * (group sum - 0.5)^2` penalty per vacant row and
/// per agent column present among the variables. Scores are recomputed from
/// priorities and raw affinity counts, not taken from the library.
pub fn direct_energy(
    instance: &JrpInstance,
    variables: &[(VacantJob, AssignedJob)],
    lambda1: f64,
    lambda2: f64,
    bits: &[bool],
) -> f64 {
    assert_eq!(variables.len(), bits.len());
    let mut energy = 0.0;
    let mut row_sums: BTreeMap<&JobId, f64> = BTreeMap::new();
    let mut col_sums: BTreeMap<&AgentId, f64> = BTreeMap::new();
    for ((vacant, agent_job), &bit) in variables.iter().zip(bits) {
        let x = if bit { 1.0 } else { 0.0 };
        let affinity = |job: &JobId| {
            let count = instance.affinities().count(job, &agent_job.agent);
            1.0 - 1.0 / (1.0 + count as f64)
        };
        let score = instance.weight_priority() * (vacant.priority - agent_job.priority)
            + instance.weight_affinity() * (affinity(&vacant.job) - affinity(&agent_job.job));
        energy -= score * x;
        *row_sums.entry(&vacant.job).or_insert(0.0) += x;
        *col_sums.entry(&agent_job.agent).or_insert(0.0) += x;
    }
    for sum in row_sums.values() {
        energy += lambda1 * (sum - 0.5).powi(2);
    }
    for sum in col_sums.values() {
        energy += lambda2 * (sum - 0.5).powi(2);
    }
    energy
}

/// All candidate variables of the full problem, before any pruning.
pub fn full_grid(instance: &JrpInstance) -> Vec<(VacantJob, AssignedJob)> {
    instance
        .vacants()
        .iter()
        .flat_map(|v| {
            instance
                .assigned()
                .iter()
                .map(move |a| (v.clone(), a.clone()))
        })
        .collect()
}

/// True when no vacant row and no agent column holds more than one set bit.
pub fn is_feasible(variables: &[(VacantJob, AssignedJob)], bits: &[bool]) -> bool {
    let mut rows: BTreeMap<&JobId, usize> = BTreeMap::new();
    let mut cols: BTreeMap<&AgentId, usize> = BTreeMap::new();
    for ((vacant, agent_job), &bit) in variables.iter().zip(bits) {
        if bit {
            *rows.entry(&vacant.job).or_insert(0) += 1;
            *cols.entry(&agent_job.agent).or_insert(0) += 1;
        }
    }
    rows.values().all(|&c| c <= 1) && cols.values().all(|&c| c <= 1)
}

pub fn all_bitstrings(n: usize) -> impl Iterator<Item = Vec<bool>> {
    assert!(n <= 20, "exhaustive enumeration kept small on purpose");
    (0u64..(1 << n)).map(move |mask| (0..n).map(|a| mask >> a & 1 == 1).collect())
}
