//! Monte Carlo check of exact recovery by weighted basis pursuit.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::certificates::lp::l1_min_exact;
use crate::error::{Error, Result};
use crate::linops::{self, DenseMatrix, IndexSet};

/// Success threshold on `‖x − x̂‖∞`.
pub const RECOVERY_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub enum SupportPolicy {
    /// Uniformly random support of size `k` per trial.
    Random(usize),
    /// The same support every trial; only the values are redrawn.
    Fixed(IndexSet),
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryOutcome {
    pub trials: usize,
    pub successes: usize,
}

impl RecoveryOutcome {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Fraction of random `k`-sparse signals recovered exactly by the LP oracle.
pub fn recovery_trial(phi: &DenseMatrix, weights: &[f64], k: usize, trials: usize, seed: u64) -> Result<f64> {
    Ok(recovery_trials(phi, weights, &SupportPolicy::Random(k), trials, seed)?.rate())
}

pub fn recovery_trials(
    phi: &DenseMatrix,
    weights: &[f64],
    support: &SupportPolicy,
    trials: usize,
    seed: u64,
) -> Result<RecoveryOutcome> {
    let n = phi.cols();
    match support {
        SupportPolicy::Random(k) if *k > n => {
            return Err(Error::InvalidArgument(format!("sparsity {k} exceeds {n} columns")))
        }
        SupportPolicy::Fixed(s) if s.ambient() != n => {
            return Err(Error::Dimension("fixed support ambient dimension".into()))
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0;
    for _ in 0..trials {
        let positions: Vec<usize> = match support {
            SupportPolicy::Random(k) => index::sample(&mut rng, n, *k).into_vec(),
            SupportPolicy::Fixed(s) => s.indices().to_vec(),
        };
        let mut truth = vec![0.0; n];
        for &p in &positions {
            truth[p] = StandardNormal.sample(&mut rng);
        }
        let b = phi.matvec(&truth)?;
        let x = l1_min_exact(phi, &b, weights)?;
        if linops::norm_inf(&linops::sub(&x, &truth)) <= RECOVERY_TOL {
            successes += 1;
        }
    }
    Ok(RecoveryOutcome { trials, successes })
}
