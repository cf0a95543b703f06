//! Domain model for the job reassignment problem.
//!
//! An instance holds `J` jobs currently covered by agents, `I` vacant jobs,
//! a table of historical assignment counts from which pairwise affinities
//! are derived, and the two weights that combine priority gain and affinity
//! gain into a single score per (vacant job, agent) pair.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque identifier of a job, vacant or covered.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(String);

impl JobId {
    pub fn new(id: impl Into<String>) -> Self {
        JobId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for JobId {
    fn from(id: &str) -> Self {
        JobId(id.to_owned())
    }
}

/// Opaque identifier of an agent (worker, machine, vehicle).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(id: &str) -> Self {
        AgentId(id.to_owned())
    }
}

/// Whether job priorities come from a fixed set of values or from a
/// continuous range. The mode changes how vacants are grouped into
/// subproblems, not how priorities are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorityMode {
    Discrete,
    Continuous,
}

/// A job currently covered by an agent, with the priority of that job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignedJob {
    pub job: JobId,
    pub agent: AgentId,
    pub priority: f64,
}

/// A job with no agent, with the priority of filling it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacantJob {
    pub job: JobId,
    pub priority: f64,
}

/// Maps a historical assignment count to an affinity in `[0, 1)`.
///
/// The mapping is strictly increasing in the count and saturates towards 1,
/// so a single past assignment already yields 0.5.
pub fn affinity_from_count(count: u64) -> f64 {
    1.0 - 1.0 / (1.0 + count as f64)
}

/// Historical (job, agent) assignment counts and the affinities derived
/// from them. Pairs without a recorded count have zero history, hence
/// affinity 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffinityTable {
    counts: BTreeMap<JobId, BTreeMap<AgentId, u64>>,
}

impl AffinityTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the number of times `agent` has covered `job`. A zero count
    /// removes the entry, since a missing pair already means zero.
    pub fn set_count(&mut self, job: JobId, agent: AgentId, count: u64) {
        if count == 0 {
            if let Some(row) = self.counts.get_mut(&job) {
                row.remove(&agent);
                if row.is_empty() {
                    self.counts.remove(&job);
                }
            }
        } else {
            self.counts.entry(job).or_default().insert(agent, count);
        }
    }

    pub fn count(&self, job: &JobId, agent: &AgentId) -> u64 {
        self.counts
            .get(job)
            .and_then(|row| row.get(agent))
            .copied()
            .unwrap_or(0)
    }

    /// Affinity of `agent` with `job`, in `[0, 1)`.
    pub fn affinity(&self, job: &JobId, agent: &AgentId) -> f64 {
        affinity_from_count(self.count(job, agent))
    }

    /// Iterates recorded counts in (job, agent) order.
    pub fn iter(&self) -> impl Iterator<Item = (&JobId, &AgentId, u64)> {
        self.counts
            .iter()
            .flat_map(|(job, row)| row.iter().map(move |(agent, c)| (job, agent, *c)))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// A validated job reassignment instance.
///
/// Construction checks every structural invariant eagerly, so downstream
/// code can assume well-formed data and only has to handle lookup failures.
#[derive(Debug, Clone, PartialEq)]
pub struct JrpInstance {
    assigned: Vec<AssignedJob>,
    vacants: Vec<VacantJob>,
    affinities: AffinityTable,
    weight_priority: f64,
    weight_affinity: f64,
    priority_mode: PriorityMode,
}

impl JrpInstance {
    pub fn new(
        assigned: Vec<AssignedJob>,
        vacants: Vec<VacantJob>,
        affinities: AffinityTable,
        weight_priority: f64,
        weight_affinity: f64,
        priority_mode: PriorityMode,
    ) -> Result<Self> {
        if weight_priority <= 0.0 || !weight_priority.is_finite() {
            return Err(Error::Validation(format!(
                "priority weight must be a positive finite number, got {weight_priority}"
            )));
        }
        if weight_affinity <= 0.0 || !weight_affinity.is_finite() {
            return Err(Error::Validation(format!(
                "affinity weight must be a positive finite number, got {weight_affinity}"
            )));
        }

        let mut job_ids = HashSet::new();
        let mut agent_ids = HashSet::new();
        for a in &assigned {
            if a.job.as_str().is_empty() {
                return Err(Error::Validation("empty job id in assigned list".into()));
            }
            if a.agent.as_str().is_empty() {
                return Err(Error::Validation(format!(
                    "empty agent id for assigned job `{}`",
                    a.job
                )));
            }
            if !job_ids.insert(a.job.clone()) {
                return Err(Error::Validation(format!("duplicate job id `{}`", a.job)));
            }
            if !agent_ids.insert(a.agent.clone()) {
                return Err(Error::Validation(format!(
                    "agent `{}` covers more than one job",
                    a.agent
                )));
            }
            check_priority(a.priority, &a.job, priority_mode)?;
            if affinities.count(&a.job, &a.agent) < 1 {
                return Err(Error::Validation(format!(
                    "assigned pair (`{}`, `{}`) needs an affinity count of at least 1",
                    a.job, a.agent
                )));
            }
        }
        for v in &vacants {
            if v.job.as_str().is_empty() {
                return Err(Error::Validation("empty job id in vacant list".into()));
            }
            if !job_ids.insert(v.job.clone()) {
                return Err(Error::Validation(format!(
                    "job `{}` appears both assigned and vacant",
                    v.job
                )));
            }
            check_priority(v.priority, &v.job, priority_mode)?;
        }

        Ok(Self {
            assigned,
            vacants,
            affinities,
            weight_priority,
            weight_affinity,
            priority_mode,
        })
    }

    pub fn assigned(&self) -> &[AssignedJob] {
        &self.assigned
    }

    pub fn vacants(&self) -> &[VacantJob] {
        &self.vacants
    }

    pub fn affinities(&self) -> &AffinityTable {
        &self.affinities
    }

    pub fn weight_priority(&self) -> f64 {
        self.weight_priority
    }

    pub fn weight_affinity(&self) -> f64 {
        self.weight_affinity
    }

    pub fn priority_mode(&self) -> PriorityMode {
        self.priority_mode
    }

    /// Number of covered jobs, `J`.
    pub fn num_assigned(&self) -> usize {
        self.assigned.len()
    }

    /// Number of vacant jobs, `I`.
    pub fn num_vacant(&self) -> usize {
        self.vacants.len()
    }

    /// Total number of jobs, `K = I + J`.
    pub fn num_jobs(&self) -> usize {
        self.assigned.len() + self.vacants.len()
    }

    pub fn contains_job(&self, job: &JobId) -> bool {
        self.assigned.iter().any(|a| &a.job == job) || self.vacants.iter().any(|v| &v.job == job)
    }

    /// Priority of any job in the instance, covered or vacant.
    pub fn job_priority(&self, job: &JobId) -> Option<f64> {
        self.assigned
            .iter()
            .find(|a| &a.job == job)
            .map(|a| a.priority)
            .or_else(|| {
                self.vacants
                    .iter()
                    .find(|v| &v.job == job)
                    .map(|v| v.priority)
            })
    }

    /// Priority gain of moving the agent covering `agent_job` to `vacant`.
    ///
    /// Both jobs must belong to the instance; the agent's current coverage is
    /// taken from the passed record, so callers tracking reassignments can
    /// score against the up-to-date assignment.
    pub fn priority_gain(&self, vacant: &VacantJob, agent_job: &AssignedJob) -> Result<f64> {
        self.check_known(&vacant.job)?;
        self.check_known(&agent_job.job)?;
        Ok(vacant.priority - agent_job.priority)
    }

    /// Weighted score of moving the agent covering `agent_job` to `vacant`:
    /// priority gain plus affinity gain, each scaled by its weight.
    pub fn score(&self, vacant: &VacantJob, agent_job: &AssignedJob) -> Result<f64> {
        let gain = self.priority_gain(vacant, agent_job)?;
        let affinity_vacant = self.affinities.affinity(&vacant.job, &agent_job.agent);
        let affinity_current = self.affinities.affinity(&agent_job.job, &agent_job.agent);
        Ok(self.weight_priority * gain
            + self.weight_affinity * (affinity_vacant - affinity_current))
    }

    fn check_known(&self, job: &JobId) -> Result<()> {
        if self.contains_job(job) {
            Ok(())
        } else {
            Err(Error::UnknownJob(job.as_str().to_owned()))
        }
    }
}

fn check_priority(priority: f64, job: &JobId, mode: PriorityMode) -> Result<()> {
    if priority <= 0.0 || !priority.is_finite() {
        return Err(Error::Validation(format!(
            "job `{job}` has non-positive priority {priority}"
        )));
    }
    if mode == PriorityMode::Continuous && priority > 1.0 {
        return Err(Error::Validation(format!(
            "job `{job}` has priority {priority} > 1 in continuous mode"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(&str, &str, u64)]) -> AffinityTable {
        let mut t = AffinityTable::new();
        for (job, agent, count) in entries {
            t.set_count(JobId::from(*job), AgentId::from(*agent), *count);
        }
        t
    }

    fn two_job_instance(
        weight_priority: f64,
        weight_affinity: f64,
        p_vacant: f64,
        p_current: f64,
        count_vacant: u64,
        count_current: u64,
    ) -> JrpInstance {
        JrpInstance::new(
            vec![AssignedJob {
                job: JobId::from("w1"),
                agent: AgentId::from("a1"),
                priority: p_current,
            }],
            vec![VacantJob {
                job: JobId::from("v1"),
                priority: p_vacant,
            }],
            table(&[("w1", "a1", count_current), ("v1", "a1", count_vacant)]),
            weight_priority,
            weight_affinity,
            PriorityMode::Continuous,
        )
        .unwrap()
    }

    #[test]
    fn affinity_of_known_counts() {
        assert_eq!(affinity_from_count(0), 0.0);
        assert_eq!(affinity_from_count(1), 0.5);
        assert_eq!(affinity_from_count(3), 0.75);
    }

    #[test]
    fn missing_pair_has_zero_affinity() {
        let t = table(&[("v1", "a1", 3)]);
        assert_eq!(t.affinity(&JobId::from("v1"), &AgentId::from("a2")), 0.0);
        assert_eq!(t.affinity(&JobId::from("v9"), &AgentId::from("a1")), 0.0);
    }

    #[test]
    fn affinity_is_monotone_and_bounded() {
        let mut previous = -1.0;
        for count in [0u64, 1, 2, 3, 10, 100, 1_000, 1_000_000] {
            let a = affinity_from_count(count);
            assert!(a > previous, "affinity must increase with the count");
            assert!((0.0..1.0).contains(&a));
            previous = a;
        }
    }

    #[test]
    fn priority_gain_is_plain_difference() {
        let cases = [(1.0, 1.0, 0.0), (1.0, 0.25, 0.75), (0.2, 0.9, -0.7)];
        for (p_vacant, p_current, expected) in cases {
            let inst = two_job_instance(1.0, 1.0, p_vacant, p_current, 1, 1);
            let gain = inst
                .priority_gain(&inst.vacants()[0].clone(), &inst.assigned()[0].clone())
                .unwrap();
            assert_eq!(gain, expected);
        }
    }

    #[test]
    fn priority_gain_rejects_unknown_job() {
        let inst = two_job_instance(1.0, 1.0, 1.0, 0.5, 1, 1);
        let stray = VacantJob {
            job: JobId::from("nowhere"),
            priority: 0.5,
        };
        let err = inst
            .priority_gain(&stray, &inst.assigned()[0].clone())
            .unwrap_err();
        assert!(matches!(err, Error::UnknownJob(_)));
    }

    #[test]
    fn score_combines_weighted_gains() {
        // Gain 0.5 and equal affinities on both sides: score is just c_p * gain.
        let inst = two_job_instance(1.0, 1.0, 1.0, 0.5, 1, 1);
        let s = inst
            .score(&inst.vacants()[0].clone(), &inst.assigned()[0].clone())
            .unwrap();
        assert_eq!(s, 0.5);

        // 2 * 0.25 + 1 * (0.0 - 0.5) = 0.
        let inst = two_job_instance(2.0, 1.0, 0.75, 0.5, 0, 1);
        let s = inst
            .score(&inst.vacants()[0].clone(), &inst.assigned()[0].clone())
            .unwrap();
        assert_eq!(s, 0.0);

        // Affinity terms cancel at equal counts, leaving the priority part.
        let inst = two_job_instance(1.0, 0.1, 1.0, 0.5, 1, 1);
        let s = inst
            .score(&inst.vacants()[0].clone(), &inst.assigned()[0].clone())
            .unwrap();
        assert_eq!(s, 0.5);
    }

    #[test]
    fn score_is_linear_in_weights() {
        for (p_vacant, p_current, cv, cc) in [(0.9, 0.3, 2, 1), (0.4, 0.7, 0, 5), (1.0, 1.0, 7, 7)]
        {
            let base = two_job_instance(1.3, 0.7, p_vacant, p_current, cv, cc);
            let doubled = two_job_instance(2.6, 1.4, p_vacant, p_current, cv, cc);
            let s1 = base
                .score(&base.vacants()[0].clone(), &base.assigned()[0].clone())
                .unwrap();
            let s2 = doubled
                .score(&doubled.vacants()[0].clone(), &doubled.assigned()[0].clone())
                .unwrap();
            assert!((s2 - 2.0 * s1).abs() < 1e-12);
        }
    }

    #[test]
    fn assigned_pairs_have_current_affinity_of_at_least_half() {
        let inst = two_job_instance(1.0, 1.0, 1.0, 0.5, 0, 1);
        for a in inst.assigned() {
            assert!(inst.affinities().affinity(&a.job, &a.agent) >= 0.5);
        }
    }

    #[test]
    fn rejects_assigned_pair_without_history() {
        let err = JrpInstance::new(
            vec![AssignedJob {
                job: JobId::from("w1"),
                agent: AgentId::from("a1"),
                priority: 0.5,
            }],
            vec![],
            AffinityTable::new(),
            1.0,
            1.0,
            PriorityMode::Continuous,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn rejects_job_listed_as_both_assigned_and_vacant() {
        let err = JrpInstance::new(
            vec![AssignedJob {
                job: JobId::from("x"),
                agent: AgentId::from("a1"),
                priority: 0.5,
            }],
            vec![VacantJob {
                job: JobId::from("x"),
                priority: 0.5,
            }],
            table(&[("x", "a1", 1)]),
            1.0,
            1.0,
            PriorityMode::Continuous,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn rejects_out_of_range_priorities() {
        // Zero priority is never allowed.
        let err = JrpInstance::new(
            vec![],
            vec![VacantJob {
                job: JobId::from("v1"),
                priority: 0.0,
            }],
            AffinityTable::new(),
            1.0,
            1.0,
            PriorityMode::Discrete,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));

        // Above 1 is rejected only in continuous mode.
        let above_one = |mode| {
            JrpInstance::new(
                vec![],
                vec![VacantJob {
                    job: JobId::from("v1"),
                    priority: 3.0,
                }],
                AffinityTable::new(),
                1.0,
                1.0,
                mode,
            )
        };
        assert!(above_one(PriorityMode::Continuous).is_err());
        assert!(above_one(PriorityMode::Discrete).is_ok());
    }

    #[test]
    fn rejects_non_positive_weights() {
        let build = |wp, wa| {
            JrpInstance::new(
                vec![],
                vec![],
                AffinityTable::new(),
                wp,
                wa,
                PriorityMode::Continuous,
            )
        };
        assert!(build(0.0, 1.0).is_err());
        assert!(build(1.0, -2.0).is_err());
        assert!(build(1.0, 1.0).is_ok());
    }

    #[test]
    fn rejects_duplicate_agents() {
        let err = JrpInstance::new(
            vec![
                AssignedJob {
                    job: JobId::from("w1"),
                    agent: AgentId::from("a1"),
                    priority: 0.5,
                },
                AssignedJob {
                    job: JobId::from("w2"),
                    agent: AgentId::from("a1"),
                    priority: 0.5,
                },
            ],
            vec![],
            table(&[("w1", "a1", 1), ("w2", "a1", 1)]),
            1.0,
            1.0,
            PriorityMode::Continuous,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
