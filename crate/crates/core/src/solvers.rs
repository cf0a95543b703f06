//! QUBO minimizers: exhaustive search for oracle-scale problems and
//! single-bit-flip simulated annealing for everything else.
//!
//! Both solvers are generic over the coefficient matrix and never look at
//! the variable map, so they work for any QUBO, not just reassignment ones.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qubo::{QuboProblem, Solution};

/// Which minimizer to run and how.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Hard cap on exhaustive-search size.
    pub max_exact_vars: usize,
    /// Metropolis sweeps per restart; each sweep proposes one flip per variable.
    pub sweeps: u32,
    pub restarts: u32,
    /// Starting temperature; when unset, the largest coefficient magnitude
    /// of the problem is used.
    pub temp_initial: Option<f64>,
    pub temp_final: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    Anneal,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kind: SolverKind::Exact,
            max_exact_vars: 24,
            sweeps: 200,
            restarts: 10,
            temp_initial: None,
            temp_final: 1e-3,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn anneal(seed: u64) -> Self {
        Self {
            kind: SolverKind::Anneal,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps < 1 {
            return Err(Error::Parameter("sweeps must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Parameter("restarts must be at least 1".into()));
        }
        if self.temp_final <= 0.0 || !self.temp_final.is_finite() {
            return Err(Error::Parameter(format!(
                "final temperature must be positive, got {}",
                self.temp_final
            )));
        }
        if let Some(t0) = self.temp_initial {
            if t0 <= self.temp_final || !t0.is_finite() {
                return Err(Error::Parameter(format!(
                    "initial temperature {t0} must exceed final temperature {}",
                    self.temp_final
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best: Solution,
    /// Best energy reached in each restart, for annealing runs.
    pub energy_trace: Option<Vec<f64>>,
    /// Evaluated states (exhaustive) or proposed flips plus full
    /// re-evaluations (annealing).
    pub evaluations: u64,
}

/// Dispatches to the solver selected by the config.
pub fn solve(problem: &QuboProblem, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    match config.kind {
        SolverKind::Exact => solve_exact(problem, config.max_exact_vars),
        SolverKind::Anneal => solve_anneal(problem, config),
    }
}

/// Per-variable list of (neighbor, coupling) pairs, for O(degree) flip deltas.
fn adjacency(problem: &QuboProblem) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); problem.num_vars()];
    for (&(a, b), &w) in problem.quadratic() {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    adj
}

/// Energy change of flipping variable `var` in state `bits`.
fn flip_delta(linear: &[f64], adj: &[Vec<(usize, f64)>], bits: &[bool], var: usize) -> f64 {
    let mut local = linear[var];
    for &(other, w) in &adj[var] {
        if bits[other] {
            local += w;
        }
    }
    if bits[var] {
        -local
    } else {
        local
    }
}

/// Finds the true global minimum by enumerating all `2^N` states in Gray-code
/// order, so each step is a single incremental flip. Ties are broken towards
/// the lexicographically smallest bit vector.
pub fn solve_exact(problem: &QuboProblem, max_vars: usize) -> Result<SolveResult> {
    let n = problem.num_vars();
    let cap = max_vars.min(62);
    if n > cap {
        return Err(Error::Capacity { n, max: cap });
    }
    if n == 0 {
        return Ok(SolveResult {
            best: problem.decode(&[])?,
            energy_trace: None,
            evaluations: 1,
        });
    }

    let linear = problem.linear();
    let adj = adjacency(problem);

    let mut bits = vec![false; n];
    let mut energy = problem.offset();
    let mut best_bits = bits.clone();
    let mut best_energy = energy;

    let states = 1u64 << n;
    for step in 1..states {
        let var = step.trailing_zeros() as usize;
        energy += flip_delta(linear, &adj, &bits, var);
        bits[var] = !bits[var];

        // Near-best candidates are re-evaluated from scratch, which both
        // removes accumulated drift and makes the tie comparison exact.
        if energy <= best_energy + 1e-9 * (1.0 + best_energy.abs()) {
            let exact = problem.energy(&bits)?;
            energy = exact;
            if exact < best_energy || (exact == best_energy && bits < best_bits) {
                best_energy = exact;
                best_bits.copy_from_slice(&bits);
            }
        }
    }

    Ok(SolveResult {
        best: problem.decode(&best_bits)?,
        energy_trace: None,
        evaluations: states,
    })
}

/// Simulated annealing with single-bit-flip Metropolis sweeps under a
/// geometric temperature schedule. Each restart draws from its own RNG
/// stream derived from (seed, restart index), so results do not depend on
/// whether restarts run sequentially or not.
pub fn solve_anneal(problem: &QuboProblem, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let n = problem.num_vars();
    if n == 0 {
        return Ok(SolveResult {
            best: problem.decode(&[])?,
            energy_trace: Some(Vec::new()),
            evaluations: 1,
        });
    }

    let t_final = config.temp_final;
    let t_initial = config
        .temp_initial
        .unwrap_or_else(|| problem.max_abs_coefficient().max(10.0 * t_final));
    if t_initial <= t_final || !t_initial.is_finite() {
        return Err(Error::Parameter(format!(
            "initial temperature {t_initial} must exceed final temperature {t_final}"
        )));
    }
    let cooling = if config.sweeps > 1 {
        (t_final / t_initial).powf(1.0 / (config.sweeps as f64 - 1.0))
    } else {
        1.0
    };

    let linear = problem.linear();
    let adj = adjacency(problem);

    let mut evaluations = 0u64;
    let mut trace = Vec::with_capacity(config.restarts as usize);
    let mut global_best: Option<(f64, Vec<bool>)> = None;

    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(u64::from(restart) + 1);

        let mut bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let mut energy = problem.energy(&bits)?;
        evaluations += 1;
        let mut restart_best = energy;
        let mut restart_best_bits = bits.clone();

        let mut temperature = t_initial;
        for _ in 0..config.sweeps {
            for _ in 0..n {
                let var = rng.gen_range(0..n);
                let delta = flip_delta(linear, &adj, &bits, var);
                evaluations += 1;
                if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                    bits[var] = !bits[var];
                    energy += delta;
                    if energy < restart_best {
                        restart_best = energy;
                        restart_best_bits.copy_from_slice(&bits);
                    }
                }
            }
            debug_assert!(
                (energy - problem.energy(&bits).unwrap()).abs()
                    <= 1e-9 * (1.0 + energy.abs()),
                "incremental energy drifted from the exact value"
            );
            temperature = (temperature * cooling).max(t_final);
        }

        // From-scratch value of the restart's best state; the incremental
        // figure is only trusted for guiding the walk.
        let exact = problem.energy(&restart_best_bits)?;
        evaluations += 1;
        trace.push(exact);
        let better = match &global_best {
            None => true,
            Some((e, _)) => exact < *e,
        };
        if better {
            global_best = Some((exact, restart_best_bits));
        }
    }

    let (_, best_bits) = global_best.expect("at least one restart ran");
    Ok(SolveResult {
        best: problem.decode(&best_bits)?,
        energy_trace: Some(trace),
        evaluations,
    })
}
