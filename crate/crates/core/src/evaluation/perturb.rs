//! Monte Carlo estimate of how often a plausible perturbation of the
//! observation changes a policy's action.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    /// Additive zero-mean noise; one σ per cue, or a single σ for all cues.
    GaussianNoise { sigma: Vec<f64> },
    /// Each present reading goes missing with probability `p`.
    Missingness { p: f64 },
    /// Each present binary reading is flipped with probability `p`.
    CueFlip { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationFamily {
    pub kind: PerturbationKind,
    pub draws: usize,
    pub seed: u64,
}

impl PerturbationFamily {
    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(invalid("perturbation family needs at least one draw"));
        }
        match &self.kind {
            PerturbationKind::GaussianNoise { sigma } => {
                if sigma.is_empty() || sigma.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                    return Err(invalid("noise sigma must be finite and >= 0"));
                }
            }
            PerturbationKind::Missingness { p } | PerturbationKind::CueFlip { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(invalid(format!("perturbation probability {p} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// Applies one draw of `kind` to an observation. Missing readings stay
/// missing.
pub fn perturb<R: Rng>(observation: &[Option<f64>], kind: &PerturbationKind, rng: &mut R) -> Result<Vec<Option<f64>>> {
    match kind {
        PerturbationKind::GaussianNoise { sigma } => {
            if sigma.len() != 1 && sigma.len() != observation.len() {
                return Err(invalid(format!("{} noise scales for {} cues", sigma.len(), observation.len())));
            }
            observation
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let s = if sigma.len() == 1 { sigma[0] } else { sigma[j] };
                    match v {
                        Some(x) if s > 0.0 => {
                            let noise = Normal::new(0.0, s).map_err(|e| invalid(e.to_string()))?;
                            Ok(Some(x + noise.sample(rng)))
                        }
                        other => Ok(*other),
                    }
                })
                .collect()
        }
        PerturbationKind::Missingness { p } => {
            Ok(observation.iter().map(|v| v.filter(|_| !rng.random_bool(*p))).collect())
        }
        PerturbationKind::CueFlip { p } => {
            Ok(observation.iter().map(|v| v.map(|x| if rng.random_bool(*p) { 1.0 - x } else { x })).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipRate {
    pub rate: f64,
    /// Binomial standard error `sqrt(r (1 - r) / n)`.
    pub standard_error: f64,
    pub flips: u64,
    pub trials: u64,
}

/// Fraction of (case, draw) pairs where the policy's action on the
/// perturbed observation differs from its action on the original.
///
/// Every pair draws from its own ChaCha stream keyed by the family seed
/// and the pair index, so results do not depend on thread scheduling.
pub fn flip_rate<A, F>(policy: F, cases: &[Vec<Option<f64>>], family: &PerturbationFamily) -> Result<FlipRate>
where
    A: PartialEq,
    F: Fn(&[Option<f64>]) -> A + Sync,
{
    family.validate()?;
    if cases.is_empty() {
        return Err(invalid("no cases to perturb"));
    }
    let draws = family.draws as u64;
    let flips = cases
        .par_iter()
        .enumerate()
        .map(|(i, obs)| -> Result<u64> {
            let base = policy(obs);
            let mut flips = 0;
            for d in 0..draws {
                let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
                rng.set_stream(i as u64 * draws + d);
                let moved = perturb(obs, &family.kind, &mut rng)?;
                flips += u64::from(policy(&moved) != base);
            }
            Ok(flips)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    let trials = cases.len() as u64 * draws;
    let rate = flips as f64 / trials as f64;
    Ok(FlipRate { rate, standard_error: (rate * (1.0 - rate) / trials as f64).sqrt(), flips, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(kind: PerturbationKind, draws: usize) -> PerturbationFamily {
        PerturbationFamily { kind, draws, seed: 7 }
    }

    fn threshold(obs: &[Option<f64>]) -> bool {
        obs[0].is_some_and(|p| p > 0.5)
    }

    #[test]
    fn zero_noise_never_flips() {
        let cases = vec![vec![Some(0.5)], vec![Some(0.500001)]];
        let out =
            flip_rate(threshold, &cases, &family(PerturbationKind::GaussianNoise { sigma: vec![0.0] }, 200)).unwrap();
        assert_eq!(out.flips, 0);
        assert_eq!(out.trials, 400);
    }

    #[test]
    fn constant_policy_never_flips() {
        let cases = vec![vec![Some(1.0), Some(0.0)]];
        for kind in [
            PerturbationKind::GaussianNoise { sigma: vec![3.0] },
            PerturbationKind::Missingness { p: 0.5 },
            PerturbationKind::CueFlip { p: 0.5 },
        ] {
            assert_eq!(flip_rate(|_| 1u8, &cases, &family(kind, 100)).unwrap().rate, 0.0);
        }
    }

    #[test]
    fn certain_flip_and_missingness() {
        let cases = vec![vec![Some(1.0)]];
        let out = flip_rate(threshold, &cases, &family(PerturbationKind::CueFlip { p: 1.0 }, 10)).unwrap();
        assert_eq!(out.rate, 1.0);
        let out = flip_rate(threshold, &cases, &family(PerturbationKind::Missingness { p: 1.0 }, 10)).unwrap();
        assert_eq!(out.rate, 1.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let cases = vec![vec![Some(0.52)], vec![Some(0.45)]];
        let f = family(PerturbationKind::GaussianNoise { sigma: vec![0.05] }, 500);
        assert_eq!(flip_rate(threshold, &cases, &f).unwrap(), flip_rate(threshold, &cases, &f).unwrap());
    }

    #[test]
    fn invalid_families() {
        let cases = vec![vec![Some(0.5)]];
        assert!(flip_rate(threshold, &cases, &family(PerturbationKind::CueFlip { p: 0.5 }, 0)).is_err());
        assert!(flip_rate(threshold, &cases, &family(PerturbationKind::CueFlip { p: 1.5 }, 1)).is_err());
        assert!(
            flip_rate(threshold, &cases, &family(PerturbationKind::GaussianNoise { sigma: vec![-1.0] }, 1)).is_err()
        );
        assert!(flip_rate(threshold, &cases, &family(PerturbationKind::GaussianNoise { sigma: vec![1.0, 1.0] }, 1))
            .is_err());
    }
}
