use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measure::{outcome_distribution, sample_index, ProjectiveMeasurement};
use crate::protocols::stats::{chi_square_gof, ChiSquare};
use crate::qstate::QuantumState;
use crate::rng::RandomStream;

/// Exact and sampled outcome statistics of two sources under one measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationReport {
    pub measurement: String,
    pub labels: Vec<String>,
    pub dist_a: Vec<f64>,
    pub dist_b: Vec<f64>,
    /// `½ Σ |p_A - p_B|` over the exact distributions.
    pub total_variation: f64,
    pub n_trials: u64,
    pub counts_a: Vec<u64>,
    pub counts_b: Vec<u64>,
    /// Samples of B tested against the exact distribution of A.
    pub chi_square: ChiSquare,
}

impl DiscriminationReport {
    pub fn freq_a(&self) -> Vec<f64> {
        self.counts_a.iter().map(|&c| c as f64 / self.n_trials as f64).collect()
    }

    pub fn freq_b(&self) -> Vec<f64> {
        self.counts_b.iter().map(|&c| c as f64 / self.n_trials as f64).collect()
    }

    pub fn p_value(&self) -> f64 {
        self.chi_square.p_value
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Compares sources A and B under `m`: exact distributions, their total
/// variation distance, `n` samples from each (streams `(seed, 0)` for A and
/// `(seed, 1)` for B) and a chi-square test of B's samples against A.
pub fn discriminate<A: QuantumState, B: QuantumState>(
    source_a: &A,
    source_b: &B,
    m: &ProjectiveMeasurement,
    measurement_name: &str,
    n: u64,
    seed: u64,
) -> Result<DiscriminationReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("trial count must be at least 1".into()));
    }
    let dist_a: Vec<f64> = outcome_distribution(m, source_a)?.iter().map(|r| r.probability).collect();
    let dist_b: Vec<f64> = outcome_distribution(m, source_b)?.iter().map(|r| r.probability).collect();
    let counts_a = sample_counts(&dist_a, n, RandomStream::new(seed, 0));
    let counts_b = sample_counts(&dist_b, n, RandomStream::new(seed, 1));
    let chi_square = chi_square_gof(&counts_b, &dist_a);
    Ok(DiscriminationReport {
        measurement: measurement_name.into(),
        labels: m.labels().map(String::from).collect(),
        total_variation: total_variation(&dist_a, &dist_b),
        dist_a,
        dist_b,
        n_trials: n,
        counts_a,
        counts_b,
        chi_square,
    })
}

fn sample_counts(dist: &[f64], n: u64, mut rng: RandomStream) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; dist.len()];
    for _ in 0..n {
        counts[sample_index(dist, rng.uniform())] += 1;
    }
    counts
}
