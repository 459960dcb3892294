use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DelaySchedule, DelaySpec, LossGenerator, LossSpec};
use crate::error::{invalid, Error, Result};
use crate::feedback::{DeliveryOrder, FeedbackItem, FeedbackQueue, Observation};
use crate::policy::{self, EstimationMode, Policy, PolicyContext, PolicyParams};
use crate::simplex::{Action, LossVector, SimplexDistribution};

/// Independent random streams of one run, all derived from the run seed.
/// Changing how one of them is consumed leaves the other draws untouched.
#[derive(Debug, Clone)]
pub struct Streams {
    pub actions: ChaCha8Rng,
    pub losses: ChaCha8Rng,
    pub delays: ChaCha8Rng,
}

impl Streams {
    pub fn from_seed(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            actions: stream(0),
            losses: stream(1),
            delays: stream(2),
        }
    }
}

/// Optional replacements for the tuned `gamma`, `delta1`, `delta2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub gamma: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
}

impl ParamOverrides {
    pub fn is_empty(&self) -> bool {
        self.gamma.is_none() && self.delta1.is_none() && self.delta2.is_none()
    }
}

/// Everything one seeded run needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub arms: usize,
    pub plays: usize,
    pub horizon: usize,
    pub seed: u64,
    pub policy: String,
    pub losses: LossSpec,
    pub delays: DelaySpec,
    pub overrides: ParamOverrides,
    pub estimation: EstimationMode,
    pub delivery_order: DeliveryOrder,
    /// Keep the distribution after every virtual slot (needed by the ratio audit).
    pub record_trajectory: bool,
}

impl RunConfig {
    pub fn new(arms: usize, plays: usize, horizon: usize, losses: LossSpec, delays: DelaySpec) -> Self {
        Self {
            arms,
            plays,
            horizon,
            seed: 0,
            policy: policy::Dexp3m::NAME.into(),
            losses,
            delays,
            overrides: ParamOverrides::default(),
            estimation: EstimationMode::default(),
            delivery_order: DeliveryOrder::default(),
            record_trajectory: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.plays == 0 || self.plays > self.arms {
            return Err(invalid!("need 1 <= k <= K, got k={}, K={}", self.plays, self.arms));
        }
        if self.horizon == 0 {
            return Err(invalid!("horizon must be at least 1"));
        }
        if !policy::registry().contains(&self.policy) {
            return Err(Error::UnknownStrategy {
                kind: "policy",
                name: self.policy.clone(),
                available: policy::registry().names().join(", "),
            });
        }
        Ok(())
    }

    /// Learner parameters for a realized schedule. A declared bound of 0
    /// enters the tuned schedule as 1.
    pub fn params_for(&self, schedule: &DelaySchedule) -> Result<PolicyParams> {
        let tuned = PolicyParams::from_horizon(
            self.arms,
            self.plays,
            schedule.d_bar().max(1),
            self.horizon,
            schedule.total_delay(),
        )?;
        if self.overrides.is_empty() {
            return Ok(tuned);
        }
        let p = tuned.with_overrides(self.overrides.gamma, self.overrides.delta1, self.overrides.delta2)?;
        p.require_feasible()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub action: Action,
    pub losses: LossVector,
    /// `|L_t|`
    pub delivered: usize,
    /// Distribution the action was drawn from.
    pub p: SimplexDistribution,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub policy: String,
    pub params: PolicyParams,
    pub schedule: DelaySchedule,
    pub estimation: EstimationMode,
    pub delivery_order: DeliveryOrder,
    pub rounds: Vec<RoundRecord>,
    /// Origin round of the feedback consumed at each virtual slot.
    pub delivery_sequence: Vec<usize>,
    /// Distribution at every virtual slot, starting with the initial one.
    pub trajectory: Option<Vec<SimplexDistribution>>,
}

impl RunRecord {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn loss_matrix(&self) -> Vec<&LossVector> {
        self.rounds.iter().map(|r| &r.losses).collect()
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone)]
pub struct Simulation {
    pub rounds: Vec<RoundRecord>,
    pub delivery_sequence: Vec<usize>,
    pub trajectory: Option<Vec<SimplexDistribution>>,
}

/// The round loop: select, incur, enqueue, deliver, update.
pub fn simulate(
    policy: &mut dyn Policy,
    generator: &mut dyn LossGenerator,
    schedule: &DelaySchedule,
    order: DeliveryOrder,
    streams: &mut Streams,
    record_trajectory: bool,
) -> Result<Simulation> {
    let horizon = schedule.horizon();
    let arms = policy.distribution().arms();
    if generator.arms() != arms {
        return Err(invalid!(
            "loss generator has {} arms, policy has {arms}",
            generator.arms()
        ));
    }
    if let Some(max) = generator.max_horizon() {
        if max < horizon {
            return Err(invalid!("loss generator covers {max} rounds, horizon is {horizon}"));
        }
    }

    let mut queue = FeedbackQueue::new(horizon, order);
    let mut rounds = Vec::with_capacity(horizon);
    let mut history: Vec<Action> = Vec::with_capacity(horizon);
    let mut delivery_sequence = Vec::with_capacity(horizon);
    let mut trajectory = record_trajectory.then(|| {
        let mut v = Vec::with_capacity(horizon + 1);
        v.push(policy.distribution().clone());
        v
    });

    for t in 1..=horizon {
        let mut step = || -> Result<RoundRecord> {
            let p = policy.distribution().clone();
            let action = policy.select_action(&mut streams.actions)?;
            let losses = generator.next_losses(t, &history, &mut streams.losses)?;
            if losses.arms() != arms {
                return Err(invalid!("generator returned {} losses, expected {arms}", losses.arms()));
            }
            let item = FeedbackItem::new(Observation::of_action(&action, &losses), t);
            queue.enqueue(item, t, schedule.delay(t))?;

            let delivered = queue.deliver(t);
            delivery_sequence.extend(delivered.iter().map(FeedbackItem::origin_round));
            let observations: Vec<&Observation> =
                delivered.iter().map(FeedbackItem::observation).collect();
            let mut sink = |p: &SimplexDistribution| {
                if let Some(tr) = trajectory.as_mut() {
                    tr.push(p.clone());
                }
            };
            policy.end_of_round(&observations, &mut sink)?;
            Ok(RoundRecord {
                action,
                losses,
                delivered: delivered.len(),
                p,
            })
        };
        let row = step().map_err(|e| e.at_round(t))?;
        history.push(row.action.clone());
        rounds.push(row);
    }

    if !queue.is_empty() || queue.delivered() != horizon {
        return Err(Error::Invariant(format!(
            "{} feedback items still pending, {} of {horizon} delivered",
            queue.pending_len(),
            queue.delivered()
        )));
    }
    Ok(Simulation {
        rounds,
        delivery_sequence,
        trajectory,
    })
}

/// Builds every strategy named in `config` and runs it.
pub fn run_experiment(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let mut streams = Streams::from_seed(config.seed);
    let schedule = config
        .delays
        .build()?
        .schedule(config.horizon, &mut streams.delays)?;
    let params = config.params_for(&schedule)?;
    let mut policy = policy::registry().create(
        &config.policy,
        &PolicyContext {
            params,
            estimation: config.estimation,
        },
    )?;
    let mut generator = config.losses.build()?;

    let sim = simulate(
        policy.as_mut(),
        generator.as_mut(),
        &schedule,
        config.delivery_order,
        &mut streams,
        config.record_trajectory,
    )?;
    Ok(RunRecord {
        seed: config.seed,
        policy: config.policy.clone(),
        params,
        schedule,
        estimation: config.estimation,
        delivery_order: config.delivery_order,
        rounds: sim.rounds,
        delivery_sequence: sim.delivery_sequence,
        trajectory: sim.trajectory,
    })
}
