use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::registry::Registry;
use crate::simplex::{Action, LossVector};

/// Declarative description of a loss generator, as it appears in configs.
///
/// Which fields matter depends on `kind`:
/// `bernoulli` reads `means`; `fixed-sequence` reads `file` or `matrix`;
/// `shifting` reads `means`, `means_b` and `period`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means_b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl LossSpec {
    pub fn bernoulli(means: Vec<f64>) -> Self {
        Self {
            kind: BernoulliLosses::NAME.into(),
            means: Some(means),
            ..Default::default()
        }
    }

    pub fn fixed_sequence(matrix: Vec<Vec<f64>>) -> Self {
        Self {
            kind: FixedSequence::NAME.into(),
            matrix: Some(matrix),
            ..Default::default()
        }
    }

    pub fn shifting(means: Vec<f64>, means_b: Vec<f64>, period: usize) -> Self {
        Self {
            kind: ShiftingAdversary::NAME.into(),
            means: Some(means),
            means_b: Some(means_b),
            period: Some(period),
            ..Default::default()
        }
    }

    pub fn build(&self) -> Result<Box<dyn LossGenerator>> {
        registry().create(&self.kind, self)
    }
}

/// Oblivious or action-adaptive source of per-round loss vectors.
pub trait LossGenerator: Send {
    fn name(&self) -> &'static str;

    fn arms(&self) -> usize;

    /// Rounds this generator can serve, if bounded.
    fn max_horizon(&self) -> Option<usize> {
        None
    }

    /// Losses for round `t` (1-based). `history` holds the actions played
    /// in rounds `1..t`; the learner's distribution is never exposed.
    fn next_losses(
        &mut self,
        t: usize,
        history: &[Action],
        rng: &mut dyn RngCore,
    ) -> Result<LossVector>;
}

fn check_means(means: &[f64], what: &str) -> Result<()> {
    if means.is_empty() {
        return Err(invalid!("{what} must list at least one arm"));
    }
    if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(invalid!("{what} entry {m} outside [0, 1]"));
    }
    Ok(())
}

fn draw_bernoulli(means: &[f64], rng: &mut dyn RngCore) -> Result<LossVector> {
    LossVector::new(
        means
            .iter()
            .map(|&m| if rng.random::<f64>() < m { 1.0 } else { 0.0 })
            .collect(),
    )
}

/// Independent Bernoulli losses with fixed per-arm means.
#[derive(Debug, Clone)]
pub struct BernoulliLosses {
    means: Vec<f64>,
}

impl BernoulliLosses {
    pub const NAME: &'static str = "bernoulli";

    pub fn new(means: Vec<f64>) -> Result<Self> {
        check_means(&means, "means")?;
        Ok(Self { means })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }
}

impl LossGenerator for BernoulliLosses {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn arms(&self) -> usize {
        self.means.len()
    }

    fn next_losses(&mut self, _t: usize, _history: &[Action], rng: &mut dyn RngCore) -> Result<LossVector> {
        draw_bernoulli(&self.means, rng)
    }
}

/// Replays an explicit `T x K` loss matrix.
#[derive(Debug, Clone)]
pub struct FixedSequence {
    rows: Vec<LossVector>,
}

impl FixedSequence {
    pub const NAME: &'static str = "fixed-sequence";

    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let width = matrix.first().map(Vec::len).unwrap_or(0);
        if width == 0 {
            return Err(invalid!("loss matrix is empty"));
        }
        let rows = matrix
            .into_iter()
            .enumerate()
            .map(|(t, row)| {
                if row.len() != width {
                    return Err(invalid!("row {} has {} losses, expected {width}", t + 1, row.len()));
                }
                LossVector::new(row).map_err(|e| invalid!("row {}: {e}", t + 1))
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(read_loss_file(path)?).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                msg,
            },
            e => e,
        })
    }
}

impl LossGenerator for FixedSequence {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn arms(&self) -> usize {
        self.rows[0].arms()
    }

    fn max_horizon(&self) -> Option<usize> {
        Some(self.rows.len())
    }

    fn next_losses(&mut self, t: usize, _history: &[Action], _rng: &mut dyn RngCore) -> Result<LossVector> {
        self.rows
            .get(t.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| invalid!("fixed sequence has {} rows, round {t} requested", self.rows.len()))
    }
}

/// Reads `T` lines of `K` whitespace-separated losses.
pub fn read_loss_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                let v = tok.parse::<f64>().map_err(|e| format!("bad loss `{tok}`: {e}"))?;
                if (0.0..=1.0).contains(&v) {
                    Ok(v)
                } else {
                    Err(format!("loss {v} outside [0, 1]"))
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|msg| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg,
            })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Bernoulli losses whose means switch between two vectors every `period`
/// rounds: `means` on rounds `1..=P`, `means_b` on `P+1..=2P`, and so on.
#[derive(Debug, Clone)]
pub struct ShiftingAdversary {
    means: Vec<f64>,
    means_b: Vec<f64>,
    period: usize,
}

impl ShiftingAdversary {
    pub const NAME: &'static str = "shifting";

    pub fn new(means: Vec<f64>, means_b: Vec<f64>, period: usize) -> Result<Self> {
        check_means(&means, "means")?;
        check_means(&means_b, "means_b")?;
        if means.len() != means_b.len() {
            return Err(invalid!("means and means_b differ in length"));
        }
        if period == 0 {
            return Err(invalid!("shift period must be at least 1"));
        }
        Ok(Self {
            means,
            means_b,
            period,
        })
    }

    pub fn active_means(&self, t: usize) -> &[f64] {
        if ((t - 1) / self.period).is_multiple_of(2) {
            &self.means
        } else {
            &self.means_b
        }
    }
}

impl LossGenerator for ShiftingAdversary {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn arms(&self) -> usize {
        self.means.len()
    }

    fn next_losses(&mut self, t: usize, _history: &[Action], rng: &mut dyn RngCore) -> Result<LossVector> {
        if t == 0 {
            return Err(invalid!("rounds start at 1"));
        }
        draw_bernoulli(self.active_means(t), rng)
    }
}

pub type LossRegistry = Registry<dyn LossGenerator, LossSpec>;

/// Built-in generators: `bernoulli`, `fixed-sequence`, `shifting`.
pub fn registry() -> &'static LossRegistry {
    static REGISTRY: OnceLock<LossRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: LossRegistry = Registry::new("loss generator");
        reg.register(BernoulliLosses::NAME, |s| {
            let means = s
                .means
                .clone()
                .ok_or_else(|| invalid!("`bernoulli` losses need `means`"))?;
            Ok(Box::new(BernoulliLosses::new(means)?))
        })
        .register(FixedSequence::NAME, |s| match (&s.matrix, &s.file) {
            (Some(m), None) => Ok(Box::new(FixedSequence::new(m.clone())?)),
            (None, Some(path)) => Ok(Box::new(FixedSequence::load(path)?)),
            _ => Err(invalid!("`fixed-sequence` losses need exactly one of `matrix` or `file`")),
        })
        .register(ShiftingAdversary::NAME, |s| {
            let (Some(a), Some(b), Some(period)) = (&s.means, &s.means_b, s.period) else {
                return Err(invalid!("`shifting` losses need `means`, `means_b` and `period`"));
            };
            Ok(Box::new(ShiftingAdversary::new(a.clone(), b.clone(), period)?))
        });
        reg
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    #[test]
    fn zero_matrix_gives_zero_losses() {
        let mut g = LossSpec::fixed_sequence(vec![vec![0.0; 3]; 4]).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 1..=4 {
            assert_eq!(g.next_losses(t, &[], &mut rng).unwrap().values(), &[0.0; 3]);
        }
        assert!(g.next_losses(5, &[], &mut rng).is_err());
        assert_eq!(g.max_horizon(), Some(4));
    }

    #[test]
    fn bernoulli_empirical_means() {
        let mut g = LossSpec::bernoulli(vec![0.1, 0.9]).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sums = [0.0; 2];
        for t in 1..=10_000 {
            let l = g.next_losses(t, &[], &mut rng).unwrap();
            sums[0] += l.values()[0];
            sums[1] += l.values()[1];
        }
        assert!((sums[0] / 1e4 - 0.1).abs() < 0.02);
        assert!((sums[1] / 1e4 - 0.9).abs() < 0.02);
    }

    #[test]
    fn shifting_swaps_on_period_boundaries() {
        let g = ShiftingAdversary::new(vec![0.0, 1.0], vec![1.0, 0.0], 3).unwrap();
        let a = [0.0, 1.0];
        let b = [1.0, 0.0];
        for t in 1..=3 {
            assert_eq!(g.active_means(t), a);
        }
        for t in 4..=6 {
            assert_eq!(g.active_means(t), b);
        }
        assert_eq!(g.active_means(7), a);
        // degenerate means make the draws deterministic
        let mut g: Box<dyn LossGenerator> = Box::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(g.next_losses(4, &[], &mut rng).unwrap().values(), &b);
    }

    #[test]
    fn missing_fields_are_config_errors() {
        let spec = LossSpec {
            kind: "bernoulli".into(),
            ..Default::default()
        };
        assert!(spec.build().is_err());
        let spec = LossSpec {
            kind: "nope".into(),
            ..Default::default()
        };
        assert!(matches!(spec.build().err().unwrap(), Error::UnknownStrategy { .. }));
        assert!(LossSpec::bernoulli(vec![1.2]).build().is_err());
    }

    #[test]
    fn loss_file_rejects_out_of_range() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.1 0.2\n0.3 1.5").unwrap();
        let err = FixedSequence::load(f.path()).err().unwrap();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.1 0.2\n0.3").unwrap();
        assert!(FixedSequence::load(f.path()).is_err());

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.1 0.2\n0.3 1").unwrap();
        assert_eq!(FixedSequence::load(f.path()).unwrap().max_horizon(), Some(2));
    }
}
