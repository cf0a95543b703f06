//! QUBO construction for the reassignment cost function.
//!
//! The hamiltonian has a core term `-sum S_ij x_ij` rewarding high-score
//! moves, plus one penalty `lambda * (sum_row x - 0.5)^2` per vacant job and
//! one per agent. The fractional 0.5 offset makes both 0 and 1 active
//! variables equally cheap in a group, so "at most one" is enforced without
//! dummy variables. Expanding the square with `x^2 = x` leaves no linear
//! penalty contribution at all: each group adds `0.25 * lambda` to the
//! constant offset and `2 * lambda` to every quadratic pair inside it.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::model::{AgentId, AssignedJob, JobId, JrpInstance, VacantJob};

/// Dense index over the (vacant job, agent) pairs of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    pairs: Vec<(JobId, AgentId)>,
    index: BTreeMap<(JobId, AgentId), usize>,
}

impl VariableMap {
    pub fn new(pairs: Vec<(JobId, AgentId)>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, pair) in pairs.iter().enumerate() {
            if index.insert(pair.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(
                    pair.0.as_str().to_owned(),
                    pair.1.as_str().to_owned(),
                ));
            }
        }
        Ok(Self { pairs, index })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, var: usize) -> &(JobId, AgentId) {
        &self.pairs[var]
    }

    pub fn index_of(&self, job: &JobId, agent: &AgentId) -> Option<usize> {
        self.index.get(&(job.clone(), agent.clone())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(JobId, AgentId)> {
        self.pairs.iter()
    }
}

/// Upper-triangular QUBO: `E(x) = offset + sum linear[a] x_a +
/// sum_{a<b} quadratic[a,b] x_a x_b` over binary `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    varmap: VariableMap,
    lambda1: f64,
    lambda2: f64,
}

/// One decoded assignment of the problem's variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub bits: Vec<bool>,
    pub energy: f64,
    /// The (vacant job, agent) moves selected by the set bits.
    pub moves: Vec<(JobId, AgentId)>,
}

/// Penalty weight that makes every constraint violation strictly more
/// expensive than any achievable score gain: `max(max S, 0) + 1`.
pub fn default_penalty<I: IntoIterator<Item = f64>>(scores: I) -> f64 {
    let max_score = scores.into_iter().fold(0.0_f64, f64::max);
    max_score + 1.0
}

/// Builds the QUBO over the given (vacant, agent) variables, resolving each
/// score from the instance. The agent records carry the job the agent covers
/// right now, which after earlier reassignments need not be its original one.
pub fn build_qubo(
    instance: &JrpInstance,
    variables: &[(VacantJob, AssignedJob)],
    lambda1: f64,
    lambda2: f64,
) -> Result<QuboProblem> {
    let scored: Vec<((JobId, AgentId), f64)> = variables
        .iter()
        .map(|(vacant, agent_job)| {
            let s = instance.score(vacant, agent_job)?;
            Ok(((vacant.job.clone(), agent_job.agent.clone()), s))
        })
        .collect::<Result<_>>()?;
    QuboProblem::from_scored_pairs(&scored, lambda1, lambda2)
}

impl QuboProblem {
    /// Builds the matrix form from already-scored (vacant, agent) pairs.
    pub fn from_scored_pairs(
        pairs: &[((JobId, AgentId), f64)],
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        if lambda1 <= 0.0 || !lambda1.is_finite() {
            return Err(Error::Parameter(format!(
                "lambda1 must be positive, got {lambda1}"
            )));
        }
        if lambda2 <= 0.0 || !lambda2.is_finite() {
            return Err(Error::Parameter(format!(
                "lambda2 must be positive, got {lambda2}"
            )));
        }

        let varmap = VariableMap::new(pairs.iter().map(|(p, _)| p.clone()).collect())?;
        let n = varmap.len();

        let mut linear = vec![0.0; n];
        for (a, (_, score)) in pairs.iter().enumerate() {
            linear[a] = -score;
        }

        // Group variables by vacant row and agent column. Only groups that
        // actually contain a variable contribute penalty terms.
        let mut rows: BTreeMap<&JobId, Vec<usize>> = BTreeMap::new();
        let mut cols: BTreeMap<&AgentId, Vec<usize>> = BTreeMap::new();
        for (a, ((job, agent), _)) in pairs.iter().enumerate() {
            rows.entry(job).or_default().push(a);
            cols.entry(agent).or_default().push(a);
        }

        let mut quadratic: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut offset = 0.0;
        add_penalty_groups(lambda1, rows.values(), &mut quadratic, &mut offset);
        add_penalty_groups(lambda2, cols.values(), &mut quadratic, &mut offset);

        Ok(Self {
            linear,
            quadratic,
            offset,
            varmap,
            lambda1,
            lambda2,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn varmap(&self) -> &VariableMap {
        &self.varmap
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Largest coefficient magnitude over linear and quadratic terms.
    pub fn max_abs_coefficient(&self) -> f64 {
        let lin = self.linear.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        self.quadratic.values().fold(lin, |m, c| m.max(c.abs()))
    }

    pub fn energy(&self, bits: &[bool]) -> Result<f64> {
        if bits.len() != self.num_vars() {
            return Err(Error::LengthMismatch {
                expected: self.num_vars(),
                got: bits.len(),
            });
        }
        let mut e = self.offset;
        for (a, &bit) in bits.iter().enumerate() {
            if bit {
                e += self.linear[a];
            }
        }
        for (&(a, b), &w) in &self.quadratic {
            if bits[a] && bits[b] {
                e += w;
            }
        }
        Ok(e)
    }

    /// Spin form of the same energy function via `x = (1 - s) / 2`, so a set
    /// bit maps to spin -1 and a clear bit to spin +1.
    pub fn to_ising(&self) -> IsingProblem {
        let n = self.num_vars();
        let mut h = vec![0.0; n];
        let mut offset = self.offset;
        for (a, &c) in self.linear.iter().enumerate() {
            offset += c / 2.0;
            h[a] -= c / 2.0;
        }
        let mut couplings = BTreeMap::new();
        for (&(a, b), &w) in &self.quadratic {
            offset += w / 4.0;
            h[a] -= w / 4.0;
            h[b] -= w / 4.0;
            couplings.insert((a, b), w / 4.0);
        }
        IsingProblem {
            h,
            couplings,
            offset,
        }
    }

    pub fn decode(&self, bits: &[bool]) -> Result<Solution> {
        let energy = self.energy(bits)?;
        let moves = bits
            .iter()
            .enumerate()
            .filter(|(_, &bit)| bit)
            .map(|(a, _)| self.varmap.pair(a).clone())
            .collect();
        Ok(Solution {
            bits: bits.to_vec(),
            energy,
            moves,
        })
    }

    /// Writes the coefficient file consumed by external solvers: a header
    /// line `N offset`, then `i i value` per linear term and `i j value`
    /// (i < j) per quadratic term, whitespace-separated.
    pub fn write_coefficients<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.num_vars(), self.offset)?;
        for (a, &c) in self.linear.iter().enumerate() {
            if c != 0.0 {
                writeln!(out, "{a} {a} {c}")?;
            }
        }
        for (&(a, b), &w) in &self.quadratic {
            if w != 0.0 {
                writeln!(out, "{a} {b} {w}")?;
            }
        }
        Ok(())
    }
}

/// Adds one `lambda * (sum x - 0.5)^2` penalty per group: `0.25 * lambda`
/// to the offset and `2 * lambda` to every variable pair in the group. The
/// expansion has no linear part because `x^2 = x` cancels the cross term.
fn add_penalty_groups<'a>(
    lambda: f64,
    groups: impl Iterator<Item = &'a Vec<usize>>,
    quadratic: &mut BTreeMap<(usize, usize), f64>,
    offset: &mut f64,
) {
    for members in groups {
        *offset += 0.25 * lambda;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                let key = if a < b { (a, b) } else { (b, a) };
                *quadratic.entry(key).or_insert(0.0) += 2.0 * lambda;
            }
        }
    }
}

/// Ising form: `E(s) = offset + sum h[a] s_a + sum_{a<b} J[a,b] s_a s_b`
/// over spins in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    pub h: Vec<f64>,
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingProblem {
    pub fn num_vars(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.h.len() {
            return Err(Error::LengthMismatch {
                expected: self.h.len(),
                got: spins.len(),
            });
        }
        let mut e = self.offset;
        for (a, &s) in spins.iter().enumerate() {
            e += self.h[a] * f64::from(s);
        }
        for (&(a, b), &w) in &self.couplings {
            e += w * f64::from(spins[a]) * f64::from(spins[b]);
        }
        Ok(e)
    }
}

/// Spin image of a bit vector: 0 -> +1, 1 -> -1.
pub fn bits_to_spins(bits: &[bool]) -> Vec<i8> {
    bits.iter().map(|&b| if b { -1 } else { 1 }).collect()
}
