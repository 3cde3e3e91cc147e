//! Multivariate normal rectangle probabilities by randomized quasi-Monte
//! Carlo with sequential conditioning (Genz's separation of variables).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal;

const FIRST_JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-6;
const SYMMETRY_TOL: f64 = 1e-12;
/// Primes whose square roots generate the Richtmyer lattice.
const PRIMES: [u32; 30] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113,
];

#[derive(Debug, Clone)]
pub struct MvnOptions {
    /// Stop once the standard error across random shifts falls below this.
    pub target_se: f64,
    /// Upper bound on the total number of integrand evaluations.
    pub max_points: usize,
    /// Independent random shifts used to estimate the error.
    pub shifts: usize,
    pub seed: u64,
}

impl Default for MvnOptions {
    fn default() -> Self {
        Self {
            target_se: 1e-4,
            max_points: 1_000_000,
            shifts: 16,
            seed: 0x5eed,
        }
    }
}

impl MvnOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MvnEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub points: usize,
    /// Diagonal jitter that was needed for the Cholesky factorisation.
    pub jitter: f64,
}

fn validate(cov: &[Vec<f64>]) -> Result<usize> {
    let m = cov.len();
    if m == 0 {
        return Err(Error::invalid("covariance matrix has dimension 0"));
    }
    for (i, row) in cov.iter().enumerate() {
        if row.len() != m {
            return Err(Error::invalid(format!(
                "covariance row {i} has length {}, expected {m}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid(format!("covariance entry ({i},{j}) is {v}")));
            }
            if (v - cov[j][i]).abs() > SYMMETRY_TOL {
                return Err(Error::invalid(format!(
                    "covariance matrix is not symmetric at ({i},{j})"
                )));
            }
        }
        if row[i] <= 0.0 {
            return Err(Error::invalid(format!("variance {i} is not positive")));
        }
    }
    Ok(m)
}

fn try_cholesky(a: &[Vec<f64>], jitter: f64) -> Option<Vec<Vec<f64>>> {
    let m = a.len();
    let mut l = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let dot: f64 = l[i][..j].iter().zip(&l[j][..j]).map(|(x, y)| x * y).sum();
            let s = a[i][j] + if i == j { jitter } else { 0.0 } - dot;
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Cholesky factor of `cov`, adding jitter·I (1e-10, escalating by 10 up to
/// 1e-6) when the plain factorisation fails.
pub fn cholesky_with_jitter(cov: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    if let Some(l) = try_cholesky(cov, 0.0) {
        return Ok((l, 0.0));
    }
    let mut jitter = FIRST_JITTER;
    while jitter <= MAX_JITTER * (1.0 + 1e-9) {
        if let Some(l) = try_cholesky(cov, jitter) {
            log::warn!("covariance matrix needed jitter {jitter:e} to factorise");
            return Ok((l, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::NotPositiveDefinite { jitter: MAX_JITTER })
}

/// Integrand of the separated representation at one point of [0,1)^(m−1).
fn conditioned_product(l: &[Vec<f64>], upper: &[f64], w: &[f64], y: &mut [f64]) -> f64 {
    let m = l.len();
    let mut f = 1.0;
    for i in 0..m {
        let shift: f64 = (0..i).map(|j| l[i][j] * y[j]).sum();
        let e = normal::cdf((upper[i] - shift) / l[i][i]);
        f *= e;
        if f == 0.0 {
            return 0.0;
        }
        if i + 1 < m {
            let p = (w[i] * e).clamp(1e-300, 1.0 - 1e-16);
            y[i] = normal::quantile(p);
        }
    }
    f
}

/// P(U ≤ upper componentwise) for U ~ N(0, cov).
pub fn mvn_cdf(upper: &[f64], cov: &[Vec<f64>], opts: &MvnOptions) -> Result<MvnEstimate> {
    let m = validate(cov)?;
    if upper.len() != m {
        return Err(Error::invalid(format!(
            "{} limits for a {m}-dimensional distribution",
            upper.len()
        )));
    }
    if upper.iter().any(|u| u.is_nan()) {
        return Err(Error::invalid("integration limit is NaN"));
    }
    let (l, jitter) = cholesky_with_jitter(cov)?;
    if m == 1 {
        return Ok(MvnEstimate {
            probability: normal::cdf(upper[0] / l[0][0]),
            std_error: 0.0,
            points: 0,
            jitter,
        });
    }

    let dim = m - 1;
    let generator: Vec<f64> = PRIMES
        .iter()
        .cycle()
        .take(dim)
        .enumerate()
        .map(|(i, &p)| {
            // Beyond the prime table, perturb to keep coordinates distinct.
            let base = (p as f64).sqrt() * (1 + i / PRIMES.len()) as f64;
            base.fract()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shifts = opts.shifts.max(2);
    let mut n = 256usize;
    let mut w = vec![0.0; dim];
    let mut y = vec![0.0; m];
    let mut total_points = 0usize;
    loop {
        let mut means = Vec::with_capacity(shifts);
        for _ in 0..shifts {
            let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let mut acc = 0.0;
            for k in 1..=n {
                for d in 0..dim {
                    let x = (k as f64 * generator[d] + shift[d]).fract();
                    // Tent transform, which makes the periodised integrand continuous.
                    w[d] = 1.0 - (2.0 * x - 1.0).abs();
                }
                acc += conditioned_product(&l, upper, &w, &mut y);
            }
            means.push(acc / n as f64);
        }
        total_points += n * shifts;
        let s = shifts as f64;
        let mean = means.iter().sum::<f64>() / s;
        let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1.0);
        let se = (var / s).sqrt();
        if se <= opts.target_se || total_points + 2 * n * shifts > opts.max_points {
            return Ok(MvnEstimate {
                probability: mean.clamp(0.0, 1.0),
                std_error: se,
                points: total_points,
                jitter,
            });
        }
        n *= 2;
    }
}

/// P(Uᵢ ≤ u for all i), the probability that no component exceeds `u`.
pub fn mvn_orthant(u: f64, cov: &[Vec<f64>], opts: &MvnOptions) -> Result<MvnEstimate> {
    mvn_cdf(&vec![u; cov.len()], cov, opts)
}
