//! Band-by-band reassignment pipeline.
//!
//! Bands are processed from high priority to low. Each round filters the
//! agents eligible for the band, enumerates and prunes candidate pairs,
//! minimizes the band's QUBO, and applies the selected moves. Jobs emptied
//! by a move re-enter a later band as vacants, so agents can end up on jobs
//! that were not vacant at the start.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristics::{self, Candidate, PriorityBand, SubproblemPlan};
use crate::model::{AgentId, AssignedJob, JobId, JrpInstance, PriorityMode, VacantJob};
use crate::qubo;
use crate::solvers::{self, SolverConfig};

/// One reassignment applied by the pipeline, with the pair's filter values
/// at the time its band was solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedMove {
    pub band: usize,
    pub vacant: JobId,
    pub agent: AgentId,
    pub vacated: JobId,
    pub score: f64,
    pub priority_gain: f64,
}

/// A (job, agent) entry of the final assignment list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub job: JobId,
    pub agent: AgentId,
}

/// Solve statistics for one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    pub band: usize,
    pub vacants_considered: usize,
    pub agents_considered: usize,
    /// Candidate variables left after both pruning filters.
    pub variables: usize,
    pub pruned_nonpositive_score: usize,
    pub pruned_nonpositive_gain: usize,
    pub solver_energy: Option<f64>,
    pub moves_applied: usize,
    pub vacants_filled: usize,
    pub assigned_after: usize,
    /// True when an infeasible solver state had conflicting bits dropped.
    pub repaired: bool,
}

/// Aggregate outcome of a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub bands: Vec<BandRecord>,
    pub moves: Vec<AppliedMove>,
    pub final_assigned: Vec<Assignment>,
    pub final_unfilled: Vec<JobId>,
    /// Vacancies no remaining band could take up again.
    pub dropped_vacants: Vec<JobId>,
    /// Mean fraction of considered vacants filled, over bands that had any.
    pub alpha_estimate: f64,
    pub total_variables: usize,
    pub total_score: f64,
}

/// Evolving assignment state while bands are processed.
///
/// The assigned list keeps its length through every update: a move swaps
/// which job an agent covers, it never adds or removes agents.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    mode: PriorityMode,
    assigned: Vec<AssignedJob>,
    bands: Vec<PriorityBand>,
    cursor: usize,
    history: Vec<AppliedMove>,
    dropped: Vec<VacantJob>,
}

impl WorldState {
    pub fn new(instance: &JrpInstance, plan: SubproblemPlan) -> Self {
        Self {
            mode: plan.mode,
            assigned: instance.assigned().to_vec(),
            bands: plan.bands,
            cursor: 0,
            history: Vec::new(),
            dropped: Vec::new(),
        }
    }

    pub fn assigned(&self) -> &[AssignedJob] {
        &self.assigned
    }

    pub fn bands(&self) -> &[PriorityBand] {
        &self.bands
    }

    pub fn history(&self) -> &[AppliedMove] {
        &self.history
    }

    pub fn dropped(&self) -> &[VacantJob] {
        &self.dropped
    }

    pub fn current_band(&self) -> Option<&PriorityBand> {
        self.bands.get(self.cursor)
    }

    /// Applies the moves selected for the current band and returns the
    /// updated state. Moves are processed in vacant-id order, so any
    /// permutation of the same set yields the same state.
    ///
    /// Each move replaces the agent's covered job in place; the job left
    /// behind becomes a vacancy and is inserted into the band matching its
    /// priority, or the immediately following band when its priority belongs
    /// to the current band's range or no later band's range holds it.
    pub fn apply_moves(&self, moves: &[Candidate]) -> Result<WorldState> {
        let mut ordered: Vec<&Candidate> = moves.iter().collect();
        ordered.sort_by(|a, b| a.vacant.job.cmp(&b.vacant.job));

        for (i, m) in ordered.iter().enumerate() {
            for earlier in &ordered[..i] {
                if earlier.vacant.job == m.vacant.job {
                    return Err(Error::InfeasibleMoves(format!(
                        "vacant job `{}` filled twice",
                        m.vacant.job
                    )));
                }
                if earlier.agent_job.agent == m.agent_job.agent {
                    return Err(Error::InfeasibleMoves(format!(
                        "agent `{}` moved twice",
                        m.agent_job.agent
                    )));
                }
            }
        }

        let mut next = self.clone();
        let band_label = next.bands.get(next.cursor).map_or(0, |b| b.index);
        let mut vacated = Vec::new();
        for m in &ordered {
            let slot = next
                .assigned
                .iter_mut()
                .find(|a| a.agent == m.agent_job.agent)
                .ok_or_else(|| {
                    Error::InfeasibleMoves(format!("agent `{}` is not assigned", m.agent_job.agent))
                })?;
            if slot.job != m.agent_job.job {
                return Err(Error::Internal(format!(
                    "agent `{}` covers `{}`, move expected `{}`",
                    m.agent_job.agent, slot.job, m.agent_job.job
                )));
            }
            vacated.push(VacantJob {
                job: slot.job.clone(),
                priority: slot.priority,
            });
            next.history.push(AppliedMove {
                band: band_label,
                vacant: m.vacant.job.clone(),
                agent: m.agent_job.agent.clone(),
                vacated: slot.job.clone(),
                score: m.score,
                priority_gain: m.priority_gain,
            });
            slot.job = m.vacant.job.clone();
            slot.priority = m.vacant.priority;
        }

        if let Some(band) = next.bands.get_mut(next.cursor) {
            band.vacants
                .retain(|v| !ordered.iter().any(|m| m.vacant.job == v.job));
        }
        for v in vacated {
            next.insert_vacated(v);
        }
        Ok(next)
    }

    fn insert_vacated(&mut self, vacancy: VacantJob) {
        let upcoming = &mut self.bands[self.cursor + 1..];
        match self.mode {
            PriorityMode::Discrete => {
                // Discrete bands are keyed by exact value; a vacancy whose
                // priority matches none of the remaining values cannot be
                // retried.
                match upcoming.iter_mut().find(|b| b.p_min == vacancy.priority) {
                    Some(band) => band.vacants.push(vacancy),
                    None => self.dropped.push(vacancy),
                }
            }
            PriorityMode::Continuous => {
                match upcoming.iter_mut().find(|b| vacancy.priority > b.p_min) {
                    Some(band) => {
                        band.raise_to(vacancy.priority);
                        band.vacants.push(vacancy);
                    }
                    None => self.dropped.push(vacancy),
                }
            }
        }
    }

    /// Moves on to the next band. In continuous mode the vacants the current
    /// band could not fill stay in play and follow into the next band; in
    /// discrete mode they stay where they are, since later bands hold
    /// strictly different priority values.
    fn advance(&mut self) {
        let done = self.cursor;
        self.cursor += 1;
        if self.mode == PriorityMode::Continuous && self.cursor < self.bands.len() {
            let leftovers = std::mem::take(&mut self.bands[done].vacants);
            for v in leftovers {
                self.bands[self.cursor].raise_to(v.priority);
                self.bands[self.cursor].vacants.push(v);
            }
        }
    }
}

/// Runs the segmented pipeline over `bands` priority bands.
pub fn run(instance: &JrpInstance, bands: usize, config: &SolverConfig) -> Result<PipelineReport> {
    config.validate()?;
    if instance.vacants().is_empty() {
        return Ok(empty_report(instance));
    }
    let plan = heuristics::build_plan(instance, bands)?;
    let mut state = WorldState::new(instance, plan);
    let mut records = Vec::new();
    for _ in 0..state.bands.len() {
        let record = run_band(instance, &mut state, config)?;
        records.push(record);
        state.advance();
    }
    finalize(instance, state, records)
}

/// Solves the whole pruned problem as one QUBO, with no segmentation and no
/// vacancy rollover.
pub fn run_full(instance: &JrpInstance, config: &SolverConfig) -> Result<PipelineReport> {
    config.validate()?;
    if instance.vacants().is_empty() {
        return Ok(empty_report(instance));
    }
    let p_max = instance
        .vacants()
        .iter()
        .map(|v| v.priority)
        .fold(f64::NEG_INFINITY, f64::max);
    let plan = SubproblemPlan {
        bands: vec![PriorityBand {
            index: 1,
            p_min: 0.0,
            p_max,
            vacants: instance.vacants().to_vec(),
        }],
        mode: instance.priority_mode(),
    };
    let mut state = WorldState::new(instance, plan);
    let record = solve_band(
        instance,
        &mut state,
        instance.assigned().to_vec(),
        config,
    )?;
    state.advance();
    finalize(instance, state, vec![record])
}

fn run_band(
    instance: &JrpInstance,
    state: &mut WorldState,
    config: &SolverConfig,
) -> Result<BandRecord> {
    let band = state.current_band().expect("cursor within plan");
    let eligible = heuristics::eligible_agents(state.assigned(), band);
    solve_band(instance, state, eligible, config)
}

fn solve_band(
    instance: &JrpInstance,
    state: &mut WorldState,
    eligible: Vec<AssignedJob>,
    config: &SolverConfig,
) -> Result<BandRecord> {
    let band = state.current_band().expect("cursor within plan");
    let mut record = BandRecord {
        band: band.index,
        vacants_considered: band.vacants.len(),
        agents_considered: eligible.len(),
        variables: 0,
        pruned_nonpositive_score: 0,
        pruned_nonpositive_gain: 0,
        solver_energy: None,
        moves_applied: 0,
        vacants_filled: 0,
        assigned_after: state.assigned.len(),
        repaired: false,
    };
    if record.vacants_considered == 0 || record.agents_considered == 0 {
        return Ok(record);
    }

    let candidates = heuristics::enumerate_candidates(instance, &band.vacants, &eligible)?;
    record.variables = candidates.pairs.len();
    record.pruned_nonpositive_score = candidates.pruned_nonpositive_score;
    record.pruned_nonpositive_gain = candidates.pruned_nonpositive_gain;
    if candidates.pairs.is_empty() {
        return Ok(record);
    }

    let lambda = qubo::default_penalty(candidates.pairs.iter().map(|c| c.score));
    let variables: Vec<(VacantJob, AssignedJob)> = candidates
        .pairs
        .iter()
        .map(|c| (c.vacant.clone(), c.agent_job.clone()))
        .collect();
    let problem = qubo::build_qubo(instance, &variables, lambda, lambda)?;
    let solved = solvers::solve(&problem, config)?;
    record.solver_energy = Some(solved.best.energy);

    let (selected, repaired) = repair_selection(&candidates.pairs, &solved.best.bits);
    record.repaired = repaired;
    let moves: Vec<Candidate> = selected.iter().map(|&i| candidates.pairs[i].clone()).collect();
    *state = state.apply_moves(&moves)?;
    record.moves_applied = moves.len();
    record.vacants_filled = moves.len();
    record.assigned_after = state.assigned.len();
    Ok(record)
}

/// Drops the lowest-score bits involved in row or column conflicts until the
/// selection is feasible. Exhaustive solves with the default penalty never
/// need this; an unlucky annealing run might.
fn repair_selection(candidates: &[Candidate], bits: &[bool]) -> (Vec<usize>, bool) {
    let mut selected: Vec<usize> = bits
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect();
    let mut repaired = false;
    loop {
        let conflicting: Vec<usize> = selected
            .iter()
            .copied()
            .filter(|&i| {
                selected.iter().any(|&j| {
                    j != i
                        && (candidates[j].vacant.job == candidates[i].vacant.job
                            || candidates[j].agent_job.agent == candidates[i].agent_job.agent)
                })
            })
            .collect();
        if conflicting.is_empty() {
            return (selected, repaired);
        }
        let worst = conflicting
            .into_iter()
            .min_by(|&a, &b| candidates[a].score.partial_cmp(&candidates[b].score).unwrap())
            .expect("non-empty conflict set");
        selected.retain(|&i| i != worst);
        repaired = true;
    }
}

fn empty_report(instance: &JrpInstance) -> PipelineReport {
    PipelineReport {
        bands: Vec::new(),
        moves: Vec::new(),
        final_assigned: instance
            .assigned()
            .iter()
            .map(|a| Assignment {
                job: a.job.clone(),
                agent: a.agent.clone(),
            })
            .collect(),
        final_unfilled: Vec::new(),
        dropped_vacants: Vec::new(),
        alpha_estimate: 0.0,
        total_variables: 0,
        total_score: 0.0,
    }
}

fn finalize(
    instance: &JrpInstance,
    state: WorldState,
    records: Vec<BandRecord>,
) -> Result<PipelineReport> {
    if state.assigned.len() != instance.num_assigned() {
        return Err(Error::Internal(format!(
            "assigned count changed from {} to {}",
            instance.num_assigned(),
            state.assigned.len()
        )));
    }

    let covered: std::collections::BTreeSet<&JobId> =
        state.assigned.iter().map(|a| &a.job).collect();
    let mut final_unfilled: Vec<JobId> = instance
        .assigned()
        .iter()
        .map(|a| &a.job)
        .chain(instance.vacants().iter().map(|v| &v.job))
        .filter(|job| !covered.contains(job))
        .cloned()
        .collect();
    final_unfilled.sort();

    let fractions: Vec<f64> = records
        .iter()
        .filter(|r| r.vacants_considered > 0)
        .map(|r| r.vacants_filled as f64 / r.vacants_considered as f64)
        .collect();
    let alpha_estimate = if fractions.is_empty() {
        0.0
    } else {
        fractions.iter().sum::<f64>() / fractions.len() as f64
    };

    Ok(PipelineReport {
        total_variables: records.iter().map(|r| r.variables).sum(),
        total_score: state.history.iter().map(|m| m.score).sum(),
        moves: state.history,
        final_assigned: state
            .assigned
            .iter()
            .map(|a| Assignment {
                job: a.job.clone(),
                agent: a.agent.clone(),
            })
            .collect(),
        final_unfilled,
        dropped_vacants: state.dropped.iter().map(|v| v.job.clone()).collect(),
        alpha_estimate,
        bands: records,
    })
}
