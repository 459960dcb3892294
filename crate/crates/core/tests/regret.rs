use dexp3m::analysis::{regret_report, uniform_expected_regret, VirtualSlotMap};
use dexp3m::environment::{
    run_experiment, simulate, DelaySchedule, DelaySpec, LossSpec, RunConfig, RunRecord, Streams,
};
use dexp3m::feedback::{DeliveryOrder, Observation};
use dexp3m::policy::{Policy, PolicyParams};
use dexp3m::simplex::{Action, SimplexDistribution};
use dexp3m::Result;
use rand::RngCore;

/// Always plays the same arms with the matching extreme-point distribution.
struct Pinned {
    action: Action,
    p: SimplexDistribution,
    round: usize,
}

impl Policy for Pinned {
    fn name(&self) -> &'static str {
        "pinned"
    }
    fn distribution(&self) -> &SimplexDistribution {
        &self.p
    }
    fn round(&self) -> usize {
        self.round
    }
    fn update_count(&self) -> usize {
        0
    }
    fn select_action(&self, _rng: &mut dyn RngCore) -> Result<Action> {
        Ok(self.action.clone())
    }
    fn end_of_round(
        &mut self,
        _items: &[&Observation],
        _trace: &mut dyn FnMut(&SimplexDistribution),
    ) -> Result<()> {
        self.round += 1;
        Ok(())
    }
}

#[test]
fn zero_losses_zero_regret() {
    let c = RunConfig::new(
        4,
        2,
        200,
        LossSpec::fixed_sequence(vec![vec![0.0; 4]; 200]),
        DelaySpec::uniform(3),
    );
    let rep = regret_report(&run_experiment(&c).unwrap()).unwrap();
    assert_eq!(rep.pseudo_regret, 0.0);
    assert_eq!(rep.realized_regret, 0.0);
}

#[test]
fn playing_the_comparator_has_zero_pseudo_regret() {
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|t| vec![0.9, 0.1 * (t % 3) as f64, 0.5, 0.05])
        .collect();
    let spec = LossSpec::fixed_sequence(rows);
    let schedule = DelaySchedule::new(vec![1; 300], 1).unwrap();
    // columns sums: arm 1 = 30, arm 3 = 15 -> comparator {1, 3}
    let mut policy = Pinned {
        action: Action::new(vec![1, 3], 4).unwrap(),
        p: SimplexDistribution::new(vec![0.0, 0.5, 0.0, 0.5]).unwrap(),
        round: 1,
    };
    let mut gen = spec.build().unwrap();
    let mut streams = Streams::from_seed(0);
    let sim = simulate(
        &mut policy,
        gen.as_mut(),
        &schedule,
        DeliveryOrder::NewestFirst,
        &mut streams,
        false,
    )
    .unwrap();
    let record = RunRecord {
        seed: 0,
        policy: "pinned".into(),
        params: PolicyParams::from_horizon(4, 2, 1, 300, 300).unwrap(),
        schedule,
        estimation: Default::default(),
        delivery_order: DeliveryOrder::NewestFirst,
        rounds: sim.rounds,
        delivery_sequence: sim.delivery_sequence,
        trajectory: None,
    };
    let rep = regret_report(&record).unwrap();
    assert_eq!(rep.best_fixed_arms, vec![1, 3]);
    assert!(rep.pseudo_regret.abs() < 1e-9, "{}", rep.pseudo_regret);
    assert!(rep.realized_regret.abs() < 1e-9);
    assert_eq!(VirtualSlotMap::from_run(&record).unwrap().rows.len(), 300);
}

#[test]
fn two_arm_bernoulli_learns_something() {
    let mut c = RunConfig::new(
        2,
        1,
        5_000,
        LossSpec::bernoulli(vec![0.1, 0.9]),
        DelaySpec::fixed(0),
    );
    let uniform = uniform_expected_regret(&[0.1, 0.9], 1, 5_000).unwrap();
    assert!((uniform - 2000.0).abs() < 1e-9);
    let mut total = 0.0;
    for seed in 0..5 {
        c.seed = seed;
        let rep = regret_report(&run_experiment(&c).unwrap()).unwrap();
        assert!(rep.pseudo_regret > 0.0);
        // the cumulative curve is nondecreasing in expectation; its increments
        // are bounded by one round's loss gap
        assert!(rep
            .pseudo_curve
            .windows(2)
            .all(|w| (w[1] - w[0]).abs() <= 1.0));
        total += rep.pseudo_regret;
    }
    assert!(total / 5.0 < uniform);
}

#[test]
fn bound_curve_ends_at_bound_value() {
    let mut c = RunConfig::new(
        5,
        2,
        400,
        LossSpec::bernoulli(vec![0.2, 0.4, 0.5, 0.6, 0.8]),
        DelaySpec::uniform(3),
    );
    c.seed = 9;
    let rep = regret_report(&run_experiment(&c).unwrap()).unwrap();
    assert_eq!(rep.bound_curve.len(), 400);
    assert!((rep.bound_curve[399] - rep.bound_value).abs() < 1e-9);
    assert!(rep.bound_curve.windows(2).all(|w| w[1] >= w[0]));
}
