//! Exit criteria. Each test prints one `[PASS]`/`[FAIL]` line.
//!
//! Run with `cargo test -p dexp3m-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use dexp3m::analysis::{
    ratio_audit, regret_report, simplex_audit, uniform_expected_regret, virtual_slot_map,
};
use dexp3m::depround::{depround, scale_and_cap};
use dexp3m::environment::{run_experiment, DelaySchedule, DelaySpec, LossSpec, RunConfig, Streams};
use dexp3m::feedback::DeliveryOrder;
use dexp3m::policy::PolicyParams;
use dexp3m::simplex::{compensated_sum, SimplexDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {name} :: {detail}");
}

/// Per-arm means spread evenly over [0.1, 0.9].
fn spread_means(arms: usize) -> Vec<f64> {
    (0..arms)
        .map(|i| 0.1 + 0.8 * i as f64 / (arms - 1) as f64)
        .collect()
}

#[test]
fn c1_virtual_slot_table() {
    let schedule = DelaySchedule::new(vec![2, 0, 0], 2).unwrap();
    let start = Instant::now();
    let map = virtual_slot_map(&schedule, DeliveryOrder::NewestFirst).unwrap();
    let elapsed = start.elapsed();
    let ok = map.t_of_tau() == [2, 3, 1]
        && map.l_before() == [0, 1, 0]
        && map.s_tilde() == [0, 0, 2]
        && elapsed < Duration::from_millis(1);
    report(
        1,
        "virtual-slot table for delays (2,0,0)",
        ok,
        &format!(
            "t(tau)={:?} L={:?} s~={:?} in {elapsed:?}",
            map.t_of_tau(),
            map.l_before(),
            map.s_tilde()
        ),
    );
    assert!(ok);
}

#[test]
fn c2_staleness_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let start = Instant::now();
    let mut failures = 0;
    for n in 0..200 {
        let horizon = rng.random_range(1..=500);
        let d_bar = rng.random_range(0..=20);
        // mix i.i.d. delays with bursty adversarial ones
        let delays: Vec<usize> = if n % 2 == 0 {
            (0..horizon).map(|_| rng.random_range(0..=d_bar)).collect()
        } else {
            (0..horizon)
                .map(|t| if (t / 7) % 2 == 0 { d_bar } else { 0 })
                .collect()
        };
        let schedule = DelaySchedule::new(delays, d_bar).unwrap();
        for order in [DeliveryOrder::NewestFirst, DeliveryOrder::Arrival] {
            let check = virtual_slot_map(&schedule, order).unwrap().check(&schedule);
            if !check.passed() {
                failures += 1;
                eprintln!("schedule {n} ({order:?}): {check:?}");
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = failures == 0 && elapsed < Duration::from_secs(5);
    report(
        2,
        "staleness identities on 200 random schedules",
        ok,
        &format!("{failures} violations in {elapsed:?}"),
    );
    assert!(ok);
}

#[test]
fn c3_depround_marginals() {
    const DRAWS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let start = Instant::now();
    let mut cardinality_errors = 0;
    let mut outside = Vec::new();
    for case in 0..50 {
        let arms = rng.random_range(1..=16);
        let k = rng.random_range(1..=arms);
        let raw: Vec<f64> = (0..arms).map(|_| -rng.random::<f64>().ln()).collect();
        let total: f64 = raw.iter().sum();
        let p = SimplexDistribution::new(raw.iter().map(|x| x / total).collect()).unwrap();
        let q = scale_and_cap(&p, k).unwrap();

        let mut hits = vec![0usize; arms];
        for _ in 0..DRAWS {
            let a = depround(&q, &mut rng).unwrap();
            if a.len() != k {
                cardinality_errors += 1;
            }
            for &i in a.arms() {
                hits[i] += 1;
            }
        }
        for (i, (&h, &qi)) in hits.iter().zip(q.weights()).enumerate() {
            let freq = h as f64 / DRAWS as f64;
            let sigma = (qi * (1.0 - qi) / DRAWS as f64).sqrt();
            if (freq - qi).abs() > 3.0 * sigma {
                outside.push(format!(
                    "case {case} arm {i}: q={qi:.6} freq={freq:.6} z={:.2}",
                    (freq - qi) / sigma
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    for line in &outside {
        eprintln!("{line}");
    }
    let ok = cardinality_errors == 0 && outside.is_empty() && elapsed < Duration::from_secs(60);
    report(
        3,
        "dependent rounding marginals within 3 sigma",
        ok,
        &format!(
            "{} arms outside 3 sigma, {cardinality_errors} cardinality errors, {elapsed:?}",
            outside.len()
        ),
    );
    assert!(ok);
}

fn audit_config(seed: u64) -> RunConfig {
    let mut c = RunConfig::new(
        10,
        3,
        10_000,
        LossSpec::bernoulli(spread_means(10)),
        DelaySpec::uniform(4),
    );
    c.seed = seed;
    c.record_trajectory = true;
    c
}

#[test]
fn c4_c5_trajectory_audits() {
    let mut floor_violations = 0;
    let mut sum_violations = 0;
    let mut ratio_ok = true;
    let mut min_margin = f64::INFINITY;
    let mut worst = (0.0f64, 0.0f64);
    let mut feasible = true;
    for seed in 0..3 {
        let rec = run_experiment(&audit_config(seed)).unwrap();
        let tr = rec.trajectory.as_ref().unwrap();
        let s = simplex_audit(tr, &rec.params);
        floor_violations += s.floor_violations;
        sum_violations += s.sum_violations;
        min_margin = min_margin.min(s.min_probability - rec.params.floor());
        let r = ratio_audit(tr, &rec.params);
        feasible &= rec.params.feasible;
        ratio_ok &= r.passed() && r.decrease_ok == Some(true);
        worst.0 = worst.0.max(r.max_decrease_ratio / r.decrease_bound);
        worst.1 = worst.1.max(r.max_increase_ratio / r.increase_bound);
    }
    let ok4 = floor_violations == 0 && sum_violations == 0;
    report(
        4,
        "simplex floor and unit sum at every virtual slot",
        ok4,
        &format!(
            "floor violations {floor_violations}, sum violations {sum_violations}, min p - gamma/K = {min_margin:e}"
        ),
    );
    let ok5 = feasible && ratio_ok;
    report(
        5,
        "consecutive-slot ratio bounds",
        ok5,
        &format!(
            "feasible={feasible}, max decrease/bound={:.6}, max increase/bound={:.6}",
            worst.0, worst.1
        ),
    );
    assert!(ok4 && ok5);
}

/// Immediate-update reference: no queue, one update right after each selection.
fn immediate_reference(config: &RunConfig, params: &PolicyParams) -> Vec<(Vec<usize>, Vec<f64>)> {
    let mut streams = Streams::from_seed(config.seed);
    let mut gen = config.losses.build().unwrap();
    let arms = params.arms;
    let mut p = vec![1.0 / arms as f64; arms];
    let mut out = Vec::new();
    let mut history = Vec::new();
    for t in 1..=config.horizon {
        let dist = SimplexDistribution::new(p.clone()).unwrap();
        let action = depround(&scale_and_cap(&dist, params.plays).unwrap(), &mut streams.actions).unwrap();
        let losses = gen.next_losses(t, &history, &mut streams.losses).unwrap();
        out.push((action.arms().to_vec(), p.clone()));

        let mut est = vec![0.0; arms];
        for &i in action.arms() {
            est[i] = losses.values()[i] / p[i];
        }
        let rate = params.plays as f64 * params.gamma / arms as f64;
        let raw: Vec<f64> = p
            .iter()
            .zip(&est)
            .map(|(pi, l)| pi * (-rate * l.min(params.delta1)).exp())
            .collect();
        let raw_sum = compensated_sum(raw.iter().copied());
        let w: Vec<f64> = raw
            .iter()
            .map(|x| (x / raw_sum).max(params.delta2 / arms as f64))
            .collect();
        let w_sum = compensated_sum(w.iter().copied());
        p = w
            .iter()
            .map(|x| (1.0 - params.gamma) * x / w_sum + params.gamma / arms as f64)
            .collect();
        let total = compensated_sum(p.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            p.iter_mut().for_each(|x| *x /= total);
        }
        history.push(action);
    }
    out
}

#[test]
fn c6_zero_delay_reduction() {
    let mut mismatches = 0;
    for seed in [1u64, 2, 3] {
        let mut c = RunConfig::new(
            8,
            3,
            3_000,
            LossSpec::bernoulli(spread_means(8)),
            DelaySpec::fixed(0),
        );
        c.seed = seed;
        let rec = run_experiment(&c).unwrap();
        assert_eq!(rec.params.d_bar, 1);
        let reference = immediate_reference(&c, &rec.params);
        for (row, (arms, p)) in rec.rounds.iter().zip(&reference) {
            let same_p = row.p.probs().iter().zip(p).all(|(a, b)| a.to_bits() == b.to_bits());
            if row.action.arms() != arms.as_slice() || !same_p {
                mismatches += 1;
            }
        }
    }
    let ok = mismatches == 0;
    report(
        6,
        "zero-delay run equals immediate-update reference bit for bit",
        ok,
        &format!("{mismatches} mismatching rounds over 3 seeds x 3000 rounds"),
    );
    assert!(ok);
}

const SEEDS: u64 = 30;

fn mean_regret(horizon: usize, d_bar: usize) -> (f64, f64) {
    let mut regret = 0.0;
    let mut bound = 0.0;
    for seed in 0..SEEDS {
        let mut c = RunConfig::new(
            10,
            2,
            horizon,
            LossSpec::bernoulli(spread_means(10)),
            DelaySpec::uniform(d_bar),
        );
        c.seed = seed;
        let rep = regret_report(&run_experiment(&c).unwrap()).unwrap();
        regret += rep.pseudo_regret;
        bound += rep.bound_value;
    }
    (regret / SEEDS as f64, bound / SEEDS as f64)
}

#[test]
fn c7_regret_scaling() {
    let start = Instant::now();
    let horizons = [2_500usize, 5_000, 10_000];
    let regrets: Vec<f64> = horizons.iter().map(|&t| mean_regret(t, 4).0).collect();
    let growth: Vec<f64> = regrets.windows(2).map(|w| w[1] / w[0]).collect();
    let per_round: Vec<f64> = regrets.iter().zip(horizons).map(|(r, t)| r / t as f64).collect();
    let sublinear = growth.iter().all(|g| *g <= 1.6);
    let decreasing = per_round.windows(2).all(|w| w[1] < w[0]);
    let elapsed = start.elapsed();
    let ok = sublinear && decreasing && elapsed < Duration::from_secs(600);
    report(
        7,
        "regret grows sublinearly in T",
        ok,
        &format!(
            "mean regret {regrets:.2?}, growth ratios {growth:.4?} (need <= 1.6), regret/T {per_round:.5?}, {elapsed:?}"
        ),
    );
    assert!(ok);
}

#[test]
fn c8_delay_sweep() {
    let sweep: Vec<(usize, f64, f64)> = [1usize, 4, 16]
        .iter()
        .map(|&d| {
            let (r, b) = mean_regret(10_000, d);
            (d, r, b)
        })
        .collect();
    let monotone = sweep.windows(2).all(|w| w[1].1 >= w[0].1);
    let ratios: Vec<f64> = sweep.iter().map(|(_, r, b)| r / b).collect();
    let banded = ratios.iter().all(|r| (0.001..=1.0).contains(r));
    let ok = monotone && banded;
    report(
        8,
        "regret nondecreasing in d_bar and within [0.001, 1] of the bound",
        ok,
        &format!(
            "(d_bar, regret, bound) {:?}; regret/bound {ratios:.4?}",
            sweep
                .iter()
                .map(|(d, r, b)| (*d, (r * 100.0).round() / 100.0, (b * 100.0).round() / 100.0))
                .collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

#[test]
fn c9_beats_uniform() {
    let horizon = 10_000;
    let (regret, _) = mean_regret(horizon, 4);
    let uniform = uniform_expected_regret(&spread_means(10), 2, horizon).unwrap();
    let ok = regret < 0.25 * uniform;
    report(
        9,
        "final regret below 25% of the uniform policy's",
        ok,
        &format!(
            "regret {regret:.2}, uniform {uniform:.2}, fraction {:.4}",
            regret / uniform
        ),
    );
    assert!(ok);
}
