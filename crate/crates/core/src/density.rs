//! Product-Gaussian kernel density estimation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{log_sum_exp, normalize_log_weights};

/// Anything that can report a (possibly unnormalized) log density over
/// joint vectors. Conditional view entropies only need ratios of densities.
pub trait Density {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> Result<f64>;
}

/// `f(x) = (1/M) Σ_m Π_d N(x_d; p_md, h_d²)`
#[derive(Clone, Debug, PartialEq)]
pub struct KdeModel {
    points: Vec<Vec<f64>>,
    bandwidths: Vec<f64>,
    // Σ_d ln(h_d √(2π))
    log_norm: f64,
}

impl KdeModel {
    pub fn new(points: Vec<Vec<f64>>, bandwidths: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        let dim = bandwidths.len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        for (index, &value) in bandwidths.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidBandwidth { index, value });
            }
        }
        let log_norm = bandwidths.iter().map(|h| (h * (2.0 * PI).sqrt()).ln()).sum();
        Ok(KdeModel {
            points,
            bandwidths,
            log_norm,
        })
    }

    /// Bandwidths from [`silverman_bandwidth`].
    pub fn with_silverman(points: Vec<Vec<f64>>) -> Result<Self> {
        let bandwidths = silverman_bandwidth(&points)?;
        Self::new(points, bandwidths)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }
}

impl Density for KdeModel {
    fn dim(&self) -> usize {
        self.bandwidths.len()
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let terms: Vec<f64> = self
            .points
            .iter()
            .map(|p| {
                -x.iter()
                    .zip(p)
                    .zip(&self.bandwidths)
                    .map(|((xd, pd), h)| {
                        let z = (xd - pd) / h;
                        0.5 * z * z
                    })
                    .sum::<f64>()
            })
            .collect();
        Ok(log_sum_exp(&terms) - (self.len() as f64).ln() - self.log_norm)
    }
}

/// Silverman's rule of thumb per dimension:
/// `h_d = σ_d · (4 / ((D + 2) M))^(1 / (D + 4))` with `σ_d` the sample
/// standard deviation. A dimension with zero spread gets
/// `1e-3 · (1 + |mean_d|)`.
pub fn silverman_bandwidth(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = points.len();
    if m < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: m });
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let factor = (4.0 / ((dim as f64 + 2.0) * m as f64)).powf(1.0 / (dim as f64 + 4.0));
    let bandwidths = (0..dim)
        .map(|d| {
            let mean = points.iter().map(|p| p[d]).sum::<f64>() / m as f64;
            let var = points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            let sigma = var.sqrt();
            if sigma > 0.0 && sigma.is_finite() {
                sigma * factor
            } else {
                1e-3 * (1.0 + mean.abs())
            }
        })
        .collect();
    Ok(bandwidths)
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// `p(x^i | x^j) = f(x^i, x^j) / Σ_{c ∈ candidates} f(c, x^j)` for every
/// candidate, in candidate order. The joint density is over `[x^i; x^j]`.
/// If every joint density is zero the conditional is uniform.
pub fn conditional_distribution<D: Density + ?Sized>(
    joint: &D,
    candidates: &[Vec<f64>],
    given: &[f64],
) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let log_f = candidates
        .iter()
        .map(|c| {
            if c.len() + given.len() != joint.dim() {
                return Err(Error::DimensionMismatch {
                    expected: joint.dim(),
                    got: c.len() + given.len(),
                });
            }
            joint.log_density(&concat(c, given))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(normalize_log_weights(&log_f))
}

/// Single-candidate form of [`conditional_distribution`].
pub fn conditional_prob<D: Density + ?Sized>(
    joint: &D,
    candidates: &[Vec<f64>],
    x_i: &[f64],
    x_j: &[f64],
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let numerator = joint.log_density(&concat(x_i, x_j))?;
    let log_f = candidates
        .iter()
        .map(|c| joint.log_density(&concat(c, x_j)))
        .collect::<Result<Vec<f64>>>()?;
    let lse = log_sum_exp(&log_f);
    if !lse.is_finite() {
        return Ok(1.0 / candidates.len() as f64);
    }
    Ok((numerator - lse).exp())
}
