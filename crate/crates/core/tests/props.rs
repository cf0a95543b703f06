//! Cross-module invariants checked on randomly generated instances, with
//! the direct cost-function evaluation as the oracle.

mod common;

use common::{all_bitstrings, direct_energy, full_grid, is_feasible};
use jrp_core::generate::{self, GeneratorParams};
use jrp_core::heuristics;
use jrp_core::model::{JrpInstance, PriorityMode};
use jrp_core::pipeline;
use jrp_core::qubo::{self, bits_to_spins};
use jrp_core::solvers::SolverConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, total_jobs: usize, mode: PriorityMode) -> JrpInstance {
    generate::generate(&GeneratorParams {
        total_jobs,
        priority_mode: mode,
        seed,
        ..Default::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Matrix energy equals the direct formula on the full variable grid.
    #[test]
    fn qubo_matches_direct_formula(seed in 0u64..10_000, total_jobs in 6usize..=10) {
        let inst = instance(seed, total_jobs, PriorityMode::Continuous);
        let variables = full_grid(&inst);
        prop_assume!(!variables.is_empty());
        let problem = qubo::build_qubo(&inst, &variables, 2.0, 3.0).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        for _ in 0..20 {
            let bits: Vec<bool> = (0..variables.len()).map(|_| rng.gen_bool(0.5)).collect();
            let expected = direct_energy(&inst, &variables, 2.0, 3.0, &bits);
            let got = problem.energy(&bits).unwrap();
            prop_assert!(
                (got - expected).abs() <= 1e-9 * (1.0 + expected.abs()),
                "matrix {} vs direct {}", got, expected
            );
        }
    }

    /// The Ising conversion agrees with the QUBO on every bitstring.
    #[test]
    fn ising_matches_qubo_everywhere(seed in 0u64..10_000) {
        let inst = instance(seed, 7, PriorityMode::Continuous);
        let variables = full_grid(&inst);
        prop_assume!(!variables.is_empty() && variables.len() <= 12);
        let problem = qubo::build_qubo(&inst, &variables, 1.5, 2.5).unwrap();
        let ising = problem.to_ising();
        for bits in all_bitstrings(variables.len()) {
            let eq = problem.energy(&bits).unwrap();
            let ei = ising.energy(&bits_to_spins(&bits)).unwrap();
            prop_assert!((eq - ei).abs() <= 1e-9 * (1.0 + eq.abs()));
        }
    }

    /// Candidate filtering retains exactly the pairs an independent rescan
    /// keeps, and the pruning counters account for everything else.
    #[test]
    fn pruning_is_sound(seed in 0u64..10_000, total_jobs in 6usize..=12) {
        let inst = instance(seed, total_jobs, PriorityMode::Continuous);
        let set = heuristics::enumerate_candidates(&inst, inst.vacants(), inst.assigned()).unwrap();
        prop_assert_eq!(
            set.total_enumerated(),
            inst.num_vacant() * inst.num_assigned()
        );
        let mut kept = 0;
        for v in inst.vacants() {
            for a in inst.assigned() {
                let s = inst.score(v, a).unwrap();
                let g = inst.priority_gain(v, a).unwrap();
                let retained = set
                    .pairs
                    .iter()
                    .any(|c| c.vacant.job == v.job && c.agent_job.agent == a.agent);
                prop_assert_eq!(retained, s > 0.0 && g > 0.0);
                if retained {
                    kept += 1;
                }
            }
        }
        prop_assert_eq!(kept, set.pairs.len());
    }

    /// Bands tile the vacants: each vacant in exactly one band, band count
    /// as requested, and continuous lower bounds at 1 - d/D.
    #[test]
    fn bands_partition_the_vacants(seed in 0u64..10_000, d in 1usize..=6) {
        let inst = instance(seed, 12, PriorityMode::Continuous);
        let plan = heuristics::build_plan(&inst, d).unwrap();
        prop_assert_eq!(plan.bands.len(), d);
        let mut seen = 0;
        for (i, band) in plan.bands.iter().enumerate() {
            let expected_min = 1.0 - (i as f64 + 1.0) / d as f64;
            prop_assert!((band.p_min - expected_min).abs() < 1e-12);
            for v in &band.vacants {
                prop_assert!(v.priority > band.p_min && v.priority <= band.p_max);
                seen += 1;
            }
        }
        prop_assert_eq!(seen, inst.num_vacant());

        let discrete = instance(seed, 12, PriorityMode::Discrete);
        let bands = heuristics::default_band_count(&discrete);
        let plan = heuristics::build_plan(&discrete, bands).unwrap();
        let total: usize = plan.bands.iter().map(|b| b.vacants.len()).sum();
        prop_assert_eq!(total, discrete.num_vacant());
    }

    /// With the default penalty, every exhaustive minimizer is feasible.
    #[test]
    fn exhaustive_minimizers_are_feasible(seed in 0u64..10_000) {
        let inst = instance(seed, 8, PriorityMode::Continuous);
        let set = heuristics::enumerate_candidates(&inst, inst.vacants(), inst.assigned()).unwrap();
        prop_assume!(!set.pairs.is_empty() && set.pairs.len() <= 14);
        let variables: Vec<_> = set
            .pairs
            .iter()
            .map(|c| (c.vacant.clone(), c.agent_job.clone()))
            .collect();
        let lambda = qubo::default_penalty(set.pairs.iter().map(|c| c.score));
        let problem = qubo::build_qubo(&inst, &variables, lambda, lambda).unwrap();

        let n = variables.len();
        let mut best = f64::INFINITY;
        let mut energies = Vec::new();
        for bits in all_bitstrings(n) {
            let e = problem.energy(&bits).unwrap();
            best = best.min(e);
            energies.push((bits, e));
        }
        for (bits, e) in energies {
            if e == best {
                prop_assert!(is_feasible(&variables, &bits), "infeasible minimizer {:?}", bits);
            }
        }
    }
}

/// Over many random instances with roughly symmetric scores, the two
/// filters keep about half of the grid.
#[test]
fn mean_retained_fraction_is_near_half() {
    let mut fractions = Vec::new();
    for seed in 0..120u64 {
        let inst = instance(seed, 12, PriorityMode::Continuous);
        let total = inst.num_vacant() * inst.num_assigned();
        if total == 0 {
            continue;
        }
        let set =
            heuristics::enumerate_candidates(&inst, inst.vacants(), inst.assigned()).unwrap();
        fractions.push(set.pairs.len() as f64 / total as f64);
    }
    assert!(fractions.len() >= 100);
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    assert!(
        (0.3..=0.7).contains(&mean),
        "mean retained fraction {mean} drifted out of the expected range"
    );
}

/// Segmentation shrinks the combined variable count versus the pruned full
/// problem in the vast majority of instances.
#[test]
fn segmentation_reduces_total_variables() {
    // Bands can outgrow the exhaustive cap once vacated jobs roll in, so
    // this sweep anneals; only variable counts matter here.
    let cfg = SolverConfig::anneal(7);
    let mut wins = 0;
    let mut total = 0;
    for seed in 0..7u64 {
        for k in [12usize, 14, 16] {
            for d in [2usize, 3, 4] {
                let inst = instance(seed, k, PriorityMode::Continuous);
                let full =
                    heuristics::enumerate_candidates(&inst, inst.vacants(), inst.assigned())
                        .unwrap();
                if full.pairs.is_empty() {
                    continue;
                }
                let report = pipeline::run(&inst, d, &cfg).unwrap();
                total += 1;
                if report.total_variables < full.pairs.len() {
                    wins += 1;
                }
            }
        }
    }
    assert!(total >= 50);
    assert!(
        wins * 100 >= total * 80,
        "only {wins}/{total} runs used fewer variables than the full problem"
    );
}

/// A single-band pipeline is the direct pruned-QUBO solve.
#[test]
fn single_band_equals_direct_solve() {
    for seed in 200..210u64 {
        let inst = instance(seed, 9, PriorityMode::Continuous);
        for cfg in [SolverConfig::exact(), SolverConfig::anneal(seed)] {
            let banded = pipeline::run(&inst, 1, &cfg).unwrap();
            let direct = pipeline::run_full(&inst, &cfg).unwrap();
            assert_eq!(banded.moves, direct.moves, "seed {seed}");
            assert_eq!(banded.final_assigned, direct.final_assigned);
        }
    }
}

/// The assigned-job count never changes, and every applied move had the
/// positive score and positive priority gain the filters demand, re-checked
/// against the instance's own job priorities.
#[test]
fn pipeline_conserves_jobs_and_move_quality() {
    for seed in 300..330u64 {
        for mode in [PriorityMode::Continuous, PriorityMode::Discrete] {
            let inst = instance(seed, 10, mode);
            let bands = match mode {
                PriorityMode::Continuous => 3,
                PriorityMode::Discrete => heuristics::default_band_count(&inst),
            };
            let report = pipeline::run(&inst, bands, &SolverConfig::exact()).unwrap();
            assert_eq!(report.final_assigned.len(), inst.num_assigned());
            for record in &report.bands {
                assert_eq!(record.assigned_after, inst.num_assigned());
            }
            for m in &report.moves {
                assert!(m.score > 0.0);
                assert!(m.priority_gain > 0.0);
                let filled = inst.job_priority(&m.vacant).unwrap();
                let vacated = inst.job_priority(&m.vacated).unwrap();
                assert!(
                    filled > vacated,
                    "move into `{}` did not raise priority",
                    m.vacant
                );
                assert!(
                    inst.assigned().iter().any(|a| a.agent == m.agent),
                    "move references agent `{}` missing from the input",
                    m.agent
                );
            }
            // No agent moved twice within one band, no vacant filled twice ever.
            for (i, a) in report.moves.iter().enumerate() {
                for b in &report.moves[i + 1..] {
                    assert!(a.vacant != b.vacant);
                    assert!(!(a.agent == b.agent && a.band == b.band));
                }
            }
        }
    }
}
