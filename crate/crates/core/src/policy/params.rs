use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Learner parameters: exploration `gamma`, estimate clip `delta1`, trim
/// floor `delta2`, plus the problem constants they were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyParams {
    pub arms: usize,
    pub plays: usize,
    pub gamma: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub d_bar: usize,
    pub horizon: usize,
    pub total_delay: usize,
    /// `1 - gamma - k*gamma*delta1/K - delta2 >= 0`.
    pub feasible: bool,
    /// The raw schedule asked for `gamma > 1`.
    pub gamma_clamped: bool,
}

impl PolicyParams {
    /// Parameter schedule tuned to a known horizon and total delay:
    /// `delta2 = 1/(T+D)`, `gamma = sqrt(K(1+ln K) / (k^3 d_bar (T+D)))`,
    /// `delta1 = 1/(2 gamma d_bar) + delta2/gamma`.
    pub fn from_horizon(
        arms: usize,
        plays: usize,
        d_bar: usize,
        horizon: usize,
        total_delay: usize,
    ) -> Result<Self> {
        check_shape(arms, plays, horizon)?;
        if d_bar == 0 {
            return Err(invalid!(
                "d_bar must be at least 1 for the tuned schedule (use 1 for zero delays)"
            ));
        }
        let kf = arms as f64;
        let plays_f = plays as f64;
        let dbar = d_bar as f64;
        let span = (horizon + total_delay) as f64;

        let delta2 = 1.0 / span;
        let raw_gamma = (kf * (1.0 + kf.ln()) / (plays_f.powi(3) * dbar * span)).sqrt();
        let gamma_clamped = raw_gamma > 1.0;
        if gamma_clamped {
            log::warn!("tuned gamma {raw_gamma:.4} exceeds 1; clamping to 1");
        }
        let gamma = raw_gamma.min(1.0);
        let delta1 = 1.0 / (2.0 * gamma * dbar) + delta2 / gamma;
        Ok(Self::assemble(
            arms,
            plays,
            gamma,
            delta1,
            delta2,
            d_bar,
            horizon,
            total_delay,
            gamma_clamped,
        ))
    }

    /// Explicit parameters, e.g. from config overrides.
    #[allow(clippy::too_many_arguments)]
    pub fn manual(
        arms: usize,
        plays: usize,
        gamma: f64,
        delta1: f64,
        delta2: f64,
        d_bar: usize,
        horizon: usize,
        total_delay: usize,
    ) -> Result<Self> {
        check_shape(arms, plays, horizon)?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(invalid!("gamma={gamma} outside (0, 1]"));
        }
        if !(delta1 >= 0.0 && delta1.is_finite()) || !(delta2 >= 0.0 && delta2.is_finite()) {
            return Err(invalid!("delta1={delta1}, delta2={delta2} must be finite and >= 0"));
        }
        Ok(Self::assemble(
            arms,
            plays,
            gamma,
            delta1,
            delta2,
            d_bar,
            horizon,
            total_delay,
            false,
        ))
    }

    /// Replaces any of the three tunables, keeping the rest.
    pub fn with_overrides(
        self,
        gamma: Option<f64>,
        delta1: Option<f64>,
        delta2: Option<f64>,
    ) -> Result<Self> {
        let p = Self::manual(
            self.arms,
            self.plays,
            gamma.unwrap_or(self.gamma),
            delta1.unwrap_or(self.delta1),
            delta2.unwrap_or(self.delta2),
            self.d_bar,
            self.horizon,
            self.total_delay,
        )?;
        Ok(Self {
            gamma_clamped: self.gamma_clamped && gamma.is_none(),
            ..p
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        arms: usize,
        plays: usize,
        gamma: f64,
        delta1: f64,
        delta2: f64,
        d_bar: usize,
        horizon: usize,
        total_delay: usize,
        gamma_clamped: bool,
    ) -> Self {
        let mut p = Self {
            arms,
            plays,
            gamma,
            delta1,
            delta2,
            d_bar,
            horizon,
            total_delay,
            feasible: false,
            gamma_clamped,
        };
        p.feasible = p.feasibility_margin() >= 0.0;
        p
    }

    /// Exponent scale `k*gamma/K` of the weight update.
    pub fn learning_rate(&self) -> f64 {
        self.plays as f64 * self.gamma / self.arms as f64
    }

    /// Lower bound `gamma/K` on every probability after an update.
    pub fn floor(&self) -> f64 {
        self.gamma / self.arms as f64
    }

    pub fn feasibility_margin(&self) -> f64 {
        1.0 - self.gamma - self.learning_rate() * self.delta1 - self.delta2
    }

    /// Bound on `p_{tau-1}(i) / p_tau(i)`; infinite when infeasible.
    pub fn decrease_ratio_bound(&self) -> f64 {
        let margin = self.feasibility_margin();
        if margin > 0.0 {
            1.0 / margin
        } else {
            f64::INFINITY
        }
    }

    /// Bound on `p_tau(i) / p_{tau-1}(i)`.
    pub fn increase_ratio_bound(&self) -> f64 {
        let d2 = self.delta2;
        let trimmed = d2 * (1.0 + d2) / (self.gamma + d2);
        let shrink = 1.0 - self.learning_rate() * self.delta1;
        let untrimmed = if shrink > 0.0 { 1.0 / shrink } else { f64::INFINITY };
        trimmed.max(untrimmed)
    }

    /// Fails when the ratio-bound condition does not hold.
    pub fn require_feasible(&self) -> Result<()> {
        if self.feasible {
            Ok(())
        } else {
            Err(Error::Infeasible(format!(
                "1 - gamma - k*gamma*delta1/K - delta2 = {:.6} < 0 (gamma={}, delta1={}, delta2={})",
                self.feasibility_margin(),
                self.gamma,
                self.delta1,
                self.delta2
            )))
        }
    }
}

fn check_shape(arms: usize, plays: usize, horizon: usize) -> Result<()> {
    if plays == 0 || plays > arms {
        return Err(invalid!("need 1 <= k <= K, got k={plays}, K={arms}"));
    }
    if horizon == 0 {
        return Err(invalid!("horizon must be at least 1"));
    }
    Ok(())
}

/// Reference scale of the regret bound,
/// `sqrt(d_bar * k * (T + D) * K * (1 + ln K))`, with constant 1.
pub fn regret_bound(arms: usize, plays: usize, d_bar: usize, horizon: usize, total_delay: usize) -> f64 {
    let kf = arms as f64;
    (d_bar as f64 * plays as f64 * (horizon + total_delay) as f64 * kf * (1.0 + kf.ln())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuned_schedule_by_substitution() {
        let p = PolicyParams::from_horizon(10, 2, 4, 1000, 2000).unwrap();
        let delta2 = 1.0 / 3000.0;
        let gamma = (10.0 * (1.0 + 10f64.ln()) / (8.0 * 4.0 * 3000.0)).sqrt();
        let delta1 = 1.0 / (8.0 * gamma) + delta2 / gamma;
        assert_eq!(p.delta2, delta2);
        assert!((p.gamma - gamma).abs() < 1e-15);
        assert!((p.delta1 - delta1).abs() < 1e-12);
        assert!(p.feasible && !p.gamma_clamped);
    }

    #[test]
    fn short_horizon_clamps_gamma() {
        // sqrt(2 (1 + ln 2) / 4) = 0.92 so use K=3: sqrt(3 (1 + ln 3) / 4) = 1.25
        let p = PolicyParams::from_horizon(2, 1, 1, 4, 0).unwrap();
        assert!(p.gamma <= 1.0);
        let p = PolicyParams::from_horizon(3, 1, 1, 4, 0).unwrap();
        assert!(p.gamma_clamped);
        assert_eq!(p.gamma, 1.0);
        assert!(!p.feasible);
    }

    #[test]
    fn large_instance_positive() {
        let p = PolicyParams::from_horizon(16, 4, 8, 10_000, 40_000).unwrap();
        for v in [p.gamma, p.delta1, p.delta2] {
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn rejects_zero_d_bar_and_bad_shape() {
        assert!(PolicyParams::from_horizon(4, 2, 0, 10, 0).is_err());
        assert!(PolicyParams::from_horizon(4, 5, 1, 10, 0).is_err());
        assert!(PolicyParams::from_horizon(4, 0, 1, 10, 0).is_err());
        assert!(PolicyParams::from_horizon(4, 2, 1, 0, 0).is_err());
    }

    #[test]
    fn overrides_recompute_feasibility() {
        let p = PolicyParams::from_horizon(10, 3, 4, 10_000, 20_000).unwrap();
        assert!(p.feasible);
        let q = p.with_overrides(Some(0.9), Some(100.0), None).unwrap();
        assert!(!q.feasible);
        assert!(q.require_feasible().is_err());
        assert!(p.with_overrides(Some(0.0), None, None).is_err());
        assert!(p.with_overrides(None, Some(-1.0), None).is_err());
    }

    #[test]
    fn bound_grows_in_every_argument() {
        let base = regret_bound(8, 2, 4, 1000, 2000);
        assert!(regret_bound(9, 2, 4, 1000, 2000) > base);
        assert!(regret_bound(8, 3, 4, 1000, 2000) > base);
        assert!(regret_bound(8, 2, 5, 1000, 2000) > base);
        assert!(regret_bound(8, 2, 4, 1001, 2000) > base);
        assert!(regret_bound(8, 2, 4, 1000, 2001) > base);
    }
}
