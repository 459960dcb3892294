//! Dependent rounding: turn a fractional vector summing to `k` into a random
//! set of exactly `k` arms whose inclusion probabilities equal the vector.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::simplex::{compensated_sum, Action, SimplexDistribution, SUM_TOLERANCE};

/// Coordinates within this distance of 0 or 1 count as integral.
const INTEGRAL_EPS: f64 = 1e-12;

/// Per-arm inclusion probabilities in `[0, 1]` summing to `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingInput {
    weights: Vec<f64>,
    k: usize,
}

impl RoundingInput {
    pub fn new(weights: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 || k > weights.len() {
            return Err(invalid!("k={k} outside 1..={}", weights.len()));
        }
        if let Some(w) = weights
            .iter()
            .find(|w| !w.is_finite() || **w < -INTEGRAL_EPS || **w > 1.0 + INTEGRAL_EPS)
        {
            return Err(invalid!("rounding weight {w} outside [0, 1]"));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - k as f64).abs() > SUM_TOLERANCE {
            return Err(invalid!("rounding weights sum to {total}, expected {k}"));
        }
        Ok(Self { weights, k })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Scales `p` by `k` and water-fills anything above 1 back onto the
/// uncapped arms, proportionally to their scaled mass.
///
/// When no scaled entry exceeds 1 the result is exactly `k * p`.
pub fn scale_and_cap(p: &SimplexDistribution, k: usize) -> Result<RoundingInput> {
    let arms = p.arms();
    if k == 0 || k > arms {
        return Err(invalid!("k={k} outside 1..={arms}"));
    }
    if !p.is_valid() {
        return Err(invalid!("input is not a probability vector"));
    }
    let mut q: Vec<f64> = p.probs().iter().map(|x| x * k as f64).collect();
    let mut capped = vec![false; arms];

    for _ in 0..arms {
        let mut excess = 0.0;
        for (qi, c) in q.iter_mut().zip(capped.iter_mut()) {
            if !*c && *qi >= 1.0 {
                excess += *qi - 1.0;
                *qi = 1.0;
                *c = true;
            }
        }
        if excess <= 0.0 {
            break;
        }
        let open: Vec<usize> = (0..arms).filter(|&i| !capped[i]).collect();
        if open.is_empty() {
            break;
        }
        let open_mass = compensated_sum(open.iter().map(|&i| q[i]));
        if open_mass > 0.0 {
            let scale = 1.0 + excess / open_mass;
            for &i in &open {
                q[i] *= scale;
            }
        } else {
            let share = excess / open.len() as f64;
            for &i in &open {
                q[i] += share;
            }
        }
    }
    for x in &mut q {
        *x = x.clamp(0.0, 1.0);
    }
    RoundingInput::new(q, k)
}

/// Whether [`scale_and_cap`] would have to cap any arm.
pub fn needs_capping(p: &SimplexDistribution, k: usize) -> bool {
    p.probs().iter().any(|x| x * k as f64 > 1.0)
}

fn is_fractional(x: f64) -> bool {
    x > INTEGRAL_EPS && x < 1.0 - INTEGRAL_EPS
}

/// Samples exactly `k` arms; arm `i` is included with probability `q[i]`.
///
/// Pairwise rounding with two cursors: the left cursor holds the one
/// fractional coordinate carried forward, the right cursor scans for the next.
/// Each step makes at least one of the pair integral, so the pass is `O(K)`.
pub fn depround<R: Rng + ?Sized>(input: &RoundingInput, rng: &mut R) -> Result<Action> {
    let mut q = input.weights.clone();
    let mut carried: Option<usize> = None;

    for j in 0..q.len() {
        if !is_fractional(q[j]) {
            continue;
        }
        let Some(i) = carried else {
            carried = Some(j);
            continue;
        };
        let up = (1.0 - q[i]).min(q[j]);
        let down = q[i].min(1.0 - q[j]);
        if rng.random::<f64>() * (up + down) < down {
            q[i] += up;
            q[j] -= up;
        } else {
            q[i] -= down;
            q[j] += down;
        }
        debug_assert!(q[i] >= -INTEGRAL_EPS && q[i] <= 1.0 + INTEGRAL_EPS);
        debug_assert!(q[j] >= -INTEGRAL_EPS && q[j] <= 1.0 + INTEGRAL_EPS);
        carried = if is_fractional(q[i]) {
            Some(i)
        } else if is_fractional(q[j]) {
            Some(j)
        } else {
            None
        };
    }

    let arms: Vec<usize> = (0..q.len()).filter(|&i| q[i] >= 0.5).collect();
    if arms.len() != input.k {
        return Err(Error::Invariant(format!(
            "dependent rounding produced {} arms, expected {}",
            arms.len(),
            input.k
        )));
    }
    Action::new(arms, q.len())
}
