//! Variable reduction and subproblem segmentation.
//!
//! Two filters shrink the full `J x I` variable grid: pairs whose score is
//! not positive are dropped, and so are pairs whose priority gain is not
//! positive. Vacant jobs are then grouped into priority bands, solved from
//! high priority to low, which caps each subproblem's variable count.

use crate::error::{Error, Result};
use crate::model::{AssignedJob, JrpInstance, PriorityMode, VacantJob};

/// A retained (vacant job, agent) pair with its score data at the time the
/// filters ran.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub vacant: VacantJob,
    pub agent_job: AssignedJob,
    pub score: f64,
    pub priority_gain: f64,
}

/// Result of enumerating and filtering one vacants-by-agents grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    pub pairs: Vec<Candidate>,
    /// Pairs dropped because their score was <= 0.
    pub pruned_nonpositive_score: usize,
    /// Pairs with a positive score dropped because their priority gain was <= 0.
    pub pruned_nonpositive_gain: usize,
}

impl CandidateSet {
    /// Count of pairs inspected: retained plus pruned.
    pub fn total_enumerated(&self) -> usize {
        self.pairs.len() + self.pruned_nonpositive_score + self.pruned_nonpositive_gain
    }
}

/// Enumerates the grid of `vacants` by `agents` and keeps only pairs with
/// positive score and positive priority gain.
pub fn enumerate_candidates(
    instance: &JrpInstance,
    vacants: &[VacantJob],
    agents: &[AssignedJob],
) -> Result<CandidateSet> {
    let mut set = CandidateSet::default();
    for vacant in vacants {
        for agent_job in agents {
            let score = instance.score(vacant, agent_job)?;
            let gain = instance.priority_gain(vacant, agent_job)?;
            if score <= 0.0 {
                set.pruned_nonpositive_score += 1;
            } else if gain <= 0.0 {
                set.pruned_nonpositive_gain += 1;
            } else {
                set.pairs.push(Candidate {
                    vacant: vacant.clone(),
                    agent_job: agent_job.clone(),
                    score,
                    priority_gain: gain,
                });
            }
        }
    }
    Ok(set)
}

/// One group of vacant jobs sharing a priority value (discrete) or interval
/// (continuous). Bands are ordered from high priority to low.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityBand {
    /// 1-based position in the plan.
    pub index: usize,
    /// Lower bound of the band's priority range (exclusive in continuous mode).
    pub p_min: f64,
    /// Highest priority the band covers. Starts at the highest member
    /// priority (or the interval edge while empty) and is raised when
    /// higher-priority jobs are rolled in later.
    pub p_max: f64,
    pub vacants: Vec<VacantJob>,
}

impl PriorityBand {
    /// Re-derives the running maximum from the current members, keeping the
    /// construction edge as a floor while the band is empty.
    pub fn raise_to(&mut self, priority: f64) {
        if priority > self.p_max {
            self.p_max = priority;
        }
    }
}

/// Ordered priority bands covering every vacant of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemPlan {
    pub bands: Vec<PriorityBand>,
    pub mode: PriorityMode,
}

/// Number of bands a plan gets when the caller does not choose one: one per
/// distinct vacant priority in discrete mode, a single band otherwise.
pub fn default_band_count(instance: &JrpInstance) -> usize {
    match instance.priority_mode() {
        PriorityMode::Discrete => distinct_priorities(instance.vacants()).len(),
        PriorityMode::Continuous => 1,
    }
}

fn distinct_priorities(vacants: &[VacantJob]) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::new();
    for v in vacants {
        if !values.contains(&v.priority) {
            values.push(v.priority);
        }
    }
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values
}

/// Splits the instance's vacants into `bands` priority bands.
///
/// Discrete mode builds one band per distinct priority value in descending
/// order, and `bands` must equal that count. Continuous mode builds `bands`
/// half-open intervals `(1 - d/D, 1 - (d-1)/D]`; empty intervals are kept
/// since reassignment can feed them vacants later.
pub fn build_plan(instance: &JrpInstance, bands: usize) -> Result<SubproblemPlan> {
    if bands < 1 {
        return Err(Error::Parameter("band count must be at least 1".into()));
    }
    let mode = instance.priority_mode();
    match mode {
        PriorityMode::Discrete => {
            let values = distinct_priorities(instance.vacants());
            if bands != values.len() {
                return Err(Error::Parameter(format!(
                    "discrete instance has {} distinct vacant priorities, cannot use {} bands",
                    values.len(),
                    bands
                )));
            }
            let bands = values
                .iter()
                .enumerate()
                .map(|(i, &value)| PriorityBand {
                    index: i + 1,
                    p_min: value,
                    p_max: value,
                    vacants: instance
                        .vacants()
                        .iter()
                        .filter(|v| v.priority == value)
                        .cloned()
                        .collect(),
                })
                .collect();
            Ok(SubproblemPlan { bands, mode })
        }
        PriorityMode::Continuous => {
            let d = bands;
            let mut out: Vec<PriorityBand> = (1..=d)
                .map(|i| PriorityBand {
                    index: i,
                    p_min: 1.0 - i as f64 / d as f64,
                    p_max: 1.0 - (i as f64 - 1.0) / d as f64,
                    vacants: Vec::new(),
                })
                .collect();
            for v in instance.vacants() {
                // First band (descending) whose lower bound the priority
                // strictly exceeds; priorities are validated to (0, 1] and
                // the last bound is 1 - D/D = 0, so a slot always exists.
                let slot = out
                    .iter_mut()
                    .find(|band| v.priority > band.p_min)
                    .ok_or_else(|| {
                        Error::Internal(format!("no band for priority {}", v.priority))
                    })?;
                slot.vacants.push(v.clone());
            }
            for band in &mut out {
                if let Some(max) = band
                    .vacants
                    .iter()
                    .map(|v| v.priority)
                    .max_by(|a, b| a.partial_cmp(b).unwrap())
                {
                    band.p_max = max;
                }
            }
            Ok(SubproblemPlan { bands: out, mode })
        }
    }
}

/// Agents whose current job has priority strictly below the band's running
/// maximum. Anything at or above it could only yield non-positive priority
/// gains inside the band.
pub fn eligible_agents(assigned: &[AssignedJob], band: &PriorityBand) -> Vec<AssignedJob> {
    assigned
        .iter()
        .filter(|a| a.priority < band.p_max)
        .cloned()
        .collect()
}
