use serde::Serialize;

use crate::policy::PolicyParams;
use crate::simplex::{SimplexDistribution, SUM_TOLERANCE};

/// Absolute slack when comparing measured ratios to their closed-form bounds.
pub const RATIO_TOLERANCE: f64 = 1e-9;

/// Floor slack for `p(i) >= gamma/K`.
const FLOOR_TOLERANCE: f64 = 1e-12;

/// Largest consecutive-slot probability ratios along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioAudit {
    /// `max p_{tau-1}(i) / p_tau(i)`
    pub max_decrease_ratio: f64,
    pub decrease_bound: f64,
    /// `None` when the parameters are infeasible and the bound does not apply.
    pub decrease_ok: Option<bool>,
    /// `max p_tau(i) / p_{tau-1}(i)`
    pub max_increase_ratio: f64,
    pub increase_bound: f64,
    pub increase_ok: bool,
    pub slots: usize,
}

impl RatioAudit {
    pub fn passed(&self) -> bool {
        self.increase_ok && self.decrease_ok.unwrap_or(true)
    }
}

pub fn ratio_audit(trajectory: &[SimplexDistribution], params: &PolicyParams) -> RatioAudit {
    let mut max_decrease: f64 = 1.0;
    let mut max_increase: f64 = 1.0;
    for pair in trajectory.windows(2) {
        for (prev, next) in pair[0].probs().iter().zip(pair[1].probs()) {
            max_decrease = max_decrease.max(prev / next);
            max_increase = max_increase.max(next / prev);
        }
    }
    let decrease_bound = params.decrease_ratio_bound();
    let increase_bound = params.increase_ratio_bound();
    RatioAudit {
        max_decrease_ratio: max_decrease,
        decrease_bound,
        decrease_ok: params
            .feasible
            .then_some(max_decrease <= decrease_bound + RATIO_TOLERANCE),
        max_increase_ratio: max_increase,
        increase_bound,
        increase_ok: max_increase <= increase_bound + RATIO_TOLERANCE,
        slots: trajectory.len().saturating_sub(1),
    }
}

/// Floor and unit-sum violations along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexAudit {
    pub checked: usize,
    pub floor_violations: usize,
    pub sum_violations: usize,
    pub min_probability: f64,
    pub max_sum_error: f64,
}

impl SimplexAudit {
    pub fn passed(&self) -> bool {
        self.floor_violations == 0 && self.sum_violations == 0
    }
}

/// Checks `p(i) >= gamma/K` and `|sum p - 1| <= 1e-9` for every distribution
/// after the first (the initial uniform one predates any update).
pub fn simplex_audit(trajectory: &[SimplexDistribution], params: &PolicyParams) -> SimplexAudit {
    let floor = params.floor() - FLOOR_TOLERANCE;
    let mut audit = SimplexAudit {
        checked: 0,
        floor_violations: 0,
        sum_violations: 0,
        min_probability: f64::INFINITY,
        max_sum_error: 0.0,
    };
    for (n, p) in trajectory.iter().enumerate() {
        let min = p.min();
        let err = (p.total() - 1.0).abs();
        audit.checked += 1;
        audit.min_probability = audit.min_probability.min(min);
        audit.max_sum_error = audit.max_sum_error.max(err);
        if n > 0 && min < floor {
            audit.floor_violations += 1;
        }
        if err > SUM_TOLERANCE || p.probs().iter().any(|x| *x < 0.0) {
            audit.sum_violations += 1;
        }
    }
    audit
}
