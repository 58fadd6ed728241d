//! Conditional view entropies, indicator bits and disagreement verdicts.
//!
//! For an ordered view pair `(i, j)` and unlabeled sample `k`, the table holds
//! `H(x^i | x_k^j) = -Σ_{x ∈ U^i} p(x | x_k^j) ln p(x | x_k^j)` in nats, with
//! the conditional taken from a joint KDE over `[x^i; x^j]` of the pool. The
//! indicator `m(x^i, x_k^j)` is 1 when that entropy is strictly below a
//! per-pair threshold (the pool mean by default): low entropy means view `j`
//! of sample `k` looks like foreground.

use std::io::Write;

use rayon::prelude::*;

use crate::dataset::{MultiViewDataset, MultiViewSample};
use crate::density::{conditional_distribution, silverman_bandwidth, Density};
use crate::error::{Error, Result};
use crate::math::entropy_nats;

/// `H(x^i | x^j = given)` over `candidates` (the pool's view `i`).
pub fn conditional_view_entropy<D: Density + ?Sized>(
    joint: &D,
    candidates: &[Vec<f64>],
    given: &[f64],
) -> Result<f64> {
    let p = conditional_distribution(joint, candidates, given)?;
    let max = (candidates.len() as f64).ln();
    Ok(entropy_nats(&p).clamp(0.0, max))
}

/// Entropies for every ordered view pair `(target, given)`, `target != given`,
/// and every pool sample, plus the per-pair means.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyTable {
    n_views: usize,
    n_samples: usize,
    entropies: Vec<Vec<f64>>,
    means: Vec<f64>,
}

fn pair_index(n_views: usize, target: usize, given: usize) -> Option<usize> {
    if target >= n_views || given >= n_views || target == given {
        return None;
    }
    Some(target * (n_views - 1) + if given < target { given } else { given - 1 })
}

/// Ordered pairs `(i, j)`, `i != j`, in table order.
pub fn ordered_pairs(n_views: usize) -> Vec<(usize, usize)> {
    (0..n_views)
        .flat_map(|i| (0..n_views).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

impl EntropyTable {
    /// Builds a table from precomputed columns. Every ordered pair must be
    /// present exactly once with one entry per sample.
    pub fn from_columns(n_views: usize, columns: Vec<((usize, usize), Vec<f64>)>) -> Result<Self> {
        let n_pairs = n_views * n_views.saturating_sub(1);
        let n_samples = columns.first().map(|(_, c)| c.len()).ok_or(Error::EmptyPool)?;
        if n_samples == 0 {
            return Err(Error::EmptyPool);
        }
        let mut entropies = vec![Vec::new(); n_pairs];
        for ((target, given), column) in columns {
            let idx = pair_index(n_views, target, given).ok_or(Error::MissingEntry {
                target,
                given,
                sample: 0,
            })?;
            if column.len() != n_samples {
                return Err(Error::LengthMismatch {
                    left: n_samples,
                    right: column.len(),
                });
            }
            entropies[idx] = column;
        }
        if let Some(idx) = entropies.iter().position(|c| c.is_empty()) {
            let (target, given) = ordered_pairs(n_views)[idx];
            return Err(Error::MissingEntry {
                target,
                given,
                sample: 0,
            });
        }
        let means = entropies
            .iter()
            .map(|c| c.iter().sum::<f64>() / n_samples as f64)
            .collect();
        Ok(EntropyTable {
            n_views,
            n_samples,
            entropies,
            means,
        })
    }

    pub fn n_views(&self) -> usize {
        self.n_views
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        ordered_pairs(self.n_views)
    }

    fn index(&self, target: usize, given: usize) -> Result<usize> {
        pair_index(self.n_views, target, given).ok_or(Error::MissingEntry {
            target,
            given,
            sample: 0,
        })
    }

    pub fn column(&self, target: usize, given: usize) -> Result<&[f64]> {
        Ok(&self.entropies[self.index(target, given)?])
    }

    pub fn entropy(&self, target: usize, given: usize, sample: usize) -> Result<f64> {
        self.column(target, given)?
            .get(sample)
            .copied()
            .ok_or(Error::MissingEntry {
                target,
                given,
                sample,
            })
    }

    /// `H̄_ij`, the mean over the pool.
    pub fn mean(&self, target: usize, given: usize) -> Result<f64> {
        Ok(self.means[self.index(target, given)?])
    }
}

/// Entropy table over the dataset's unlabeled pool.
pub fn build_entropy_table(dataset: &MultiViewDataset) -> Result<EntropyTable> {
    let samples: Vec<&MultiViewSample> = dataset.unlabeled.iter().collect();
    entropy_table_for(&samples)
}

/// Entropy table over an arbitrary pool. The joint KDE of each ordered pair
/// uses Silverman bandwidths over the pool's concatenated view vectors.
///
/// Because every pool sample is also a candidate, the normalizer of each
/// conditional includes the sample's own kernel product (which is 1 in
/// unnormalized form) and never underflows.
pub fn entropy_table_for(samples: &[&MultiViewSample]) -> Result<EntropyTable> {
    if samples.is_empty() {
        return Err(Error::EmptyPool);
    }
    let n_views = samples[0].n_views();
    if let Some(bad) = samples.iter().find(|s| s.n_views() != n_views) {
        return Err(Error::DimensionMismatch {
            expected: n_views,
            got: bad.n_views(),
        });
    }
    let columns = ordered_pairs(n_views)
        .into_iter()
        .map(|(i, j)| pair_entropies(samples, i, j).map(|c| ((i, j), c)))
        .collect::<Result<Vec<_>>>()?;
    EntropyTable::from_columns(n_views, columns)
}

fn pair_entropies(samples: &[&MultiViewSample], target: usize, given: usize) -> Result<Vec<f64>> {
    let m = samples.len();
    if m == 1 {
        return Ok(vec![0.0]);
    }
    let joint: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let mut v = s.views[target].clone();
            v.extend_from_slice(&s.views[given]);
            v
        })
        .collect();
    let bandwidths = silverman_bandwidth(&joint)?;
    let (h_target, h_given) = bandwidths.split_at(samples[0].views[target].len());
    let k_target = gram(samples, target, h_target);
    let k_given = gram(samples, given, h_given);
    let max = (m as f64).ln();

    Ok((0..m)
        .into_par_iter()
        .map(|k| {
            let weights = &k_given[k * m..(k + 1) * m];
            let f: Vec<f64> = k_target
                .chunks_exact(m)
                .map(|row| row.iter().zip(weights).map(|(a, b)| a * b).sum())
                .collect();
            let z: f64 = f.iter().sum();
            let p: Vec<f64> = f.iter().map(|v| v / z).collect();
            entropy_nats(&p).clamp(0.0, max)
        })
        .collect())
}

// Row-major M×M matrix of unnormalized kernels exp(-½ Σ_d ((a_d - b_d)/h_d)²).
fn gram(samples: &[&MultiViewSample], view: usize, bandwidths: &[f64]) -> Vec<f64> {
    let m = samples.len();
    let mut out = vec![0.0; m * m];
    for a in 0..m {
        out[a * m + a] = 1.0;
        for b in (a + 1)..m {
            let q: f64 = samples[a].views[view]
                .iter()
                .zip(&samples[b].views[view])
                .zip(bandwidths)
                .map(|((x, y), h)| {
                    let z = (x - y) / h;
                    z * z
                })
                .sum();
            let v = (-0.5 * q).exp();
            out[a * m + b] = v;
            out[b * m + a] = v;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    RedundantForeground,
    RedundantBackground,
    ViewDisagreement,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::RedundantForeground => "redundant_foreground",
            Verdict::RedundantBackground => "redundant_background",
            Verdict::ViewDisagreement => "view_disagreement",
        }
    }
}

/// Verdict for one pair of views plus its two indicator bits
/// `forward = m(x^i, x_k^j)` and `backward = m(x^j, x_k^i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairVerdict {
    pub verdict: Verdict,
    pub forward: bool,
    pub backward: bool,
}

impl PairVerdict {
    pub fn from_bits(forward: bool, backward: bool) -> Self {
        let verdict = match (forward, backward) {
            (true, true) => Verdict::RedundantForeground,
            (false, false) => Verdict::RedundantBackground,
            _ => Verdict::ViewDisagreement,
        };
        PairVerdict {
            verdict,
            forward,
            backward,
        }
    }

    /// The views may label each other: `¬(forward ⊕ backward)`.
    pub fn agrees(&self) -> bool {
        self.forward == self.backward
    }
}

/// Indicator bits against per-pair thresholds.
#[derive(Clone, Debug)]
pub struct Detector<'a> {
    table: &'a EntropyTable,
    thresholds: Vec<f64>,
}

impl<'a> Detector<'a> {
    /// Thresholds at the per-pair means `H̄_ij`.
    pub fn at_mean(table: &'a EntropyTable) -> Self {
        Detector {
            table,
            thresholds: table.means.clone(),
        }
    }

    /// Thresholds at the `q`-quantile of each pair's entropies (linear
    /// interpolation). `q = 0` puts every bit at 0; `q = 1` puts every bit
    /// at 1.
    pub fn at_quantile(table: &'a EntropyTable, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange {
                what: "threshold quantile",
                value: q,
            });
        }
        let thresholds = table
            .entropies
            .iter()
            .map(|c| {
                let mut sorted = c.clone();
                sorted.sort_by(f64::total_cmp);
                empirical_quantile(&sorted, q)
            })
            .collect();
        Ok(Detector { table, thresholds })
    }

    /// Explicit thresholds in [`ordered_pairs`] order. `+inf` forces every
    /// bit of that pair to 1.
    pub fn with_thresholds(table: &'a EntropyTable, thresholds: Vec<f64>) -> Result<Self> {
        let n = table.entropies.len();
        if thresholds.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: thresholds.len(),
            });
        }
        Ok(Detector { table, thresholds })
    }

    pub fn table(&self) -> &EntropyTable {
        self.table
    }

    pub fn threshold(&self, target: usize, given: usize) -> Result<f64> {
        Ok(self.thresholds[self.table.index(target, given)?])
    }

    /// `m(x^target, x_k^given)`
    pub fn bit(&self, target: usize, given: usize, sample: usize) -> Result<bool> {
        let idx = self.table.index(target, given)?;
        let h = self.table.entropy(target, given, sample)?;
        Ok(h < self.thresholds[idx])
    }

    pub fn classify_pair(&self, i: usize, j: usize, sample: usize) -> Result<PairVerdict> {
        Ok(PairVerdict::from_bits(
            self.bit(i, j, sample)?,
            self.bit(j, i, sample)?,
        ))
    }

    /// Redundant foreground when every ordered-pair bit is 1, redundant
    /// background when every bit is 0, disagreement otherwise.
    pub fn classify_sample(&self, sample: usize) -> Result<Verdict> {
        let mut ones = 0;
        let mut total = 0;
        for (i, j) in self.table.pairs() {
            total += 1;
            if self.bit(i, j, sample)? {
                ones += 1;
            }
        }
        Ok(if ones == total {
            Verdict::RedundantForeground
        } else if ones == 0 {
            Verdict::RedundantBackground
        } else {
            Verdict::ViewDisagreement
        })
    }
}

fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    if q >= 1.0 {
        return f64::INFINITY;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn indicator_m(table: &EntropyTable, target: usize, given: usize, sample: usize) -> Result<bool> {
    Detector::at_mean(table).bit(target, given, sample)
}

pub fn classify_pair(table: &EntropyTable, i: usize, j: usize, sample: usize) -> Result<PairVerdict> {
    Detector::at_mean(table).classify_pair(i, j, sample)
}

pub fn classify_sample(table: &EntropyTable, sample: usize) -> Result<Verdict> {
    Detector::at_mean(table).classify_sample(sample)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub quantile: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// One detection curve. Undefined curves (no positives or no negatives)
/// have no points, no operating point and no AUC.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    pub name: &'static str,
    pub points: Vec<RocPoint>,
    /// `(fpr, tpr)` with thresholds at the pool means.
    pub at_mean: Option<(f64, f64)>,
    pub auc: Option<f64>,
}

impl RocCurve {
    pub fn is_defined(&self) -> bool {
        self.auc.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionRoc {
    pub foreground: RocCurve,
    pub background: RocCurve,
}

/// Evenly spaced quantiles `0, 1/steps, ..., 1`.
pub fn quantile_grid(steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|s| s as f64 / steps as f64).collect()
}

/// Sweeps the threshold quantile and scores sample verdicts against ground
/// truth. Foreground curve: positives have every view showing the same
/// foreground class, predicted positive when the verdict is redundant
/// foreground. Background curve: positives are all-background samples,
/// predicted positive when the verdict is redundant background.
pub fn detection_roc(
    samples: &[MultiViewSample],
    table: &EntropyTable,
    grid: &[f64],
) -> Result<DetectionRoc> {
    if samples.len() != table.n_samples() {
        return Err(Error::LengthMismatch {
            left: samples.len(),
            right: table.n_samples(),
        });
    }
    if grid.is_empty() {
        return Err(Error::Empty);
    }
    let fg_truth: Vec<bool> = samples.iter().map(|s| s.is_redundant_foreground()).collect();
    let bg_truth: Vec<bool> = samples.iter().map(|s| s.is_redundant_background()).collect();

    let verdicts = |det: &Detector| -> Result<Vec<Verdict>> {
        (0..samples.len()).map(|k| det.classify_sample(k)).collect()
    };
    let mut sweeps = Vec::with_capacity(grid.len());
    for &q in grid {
        sweeps.push((q, verdicts(&Detector::at_quantile(table, q)?)?));
    }
    let at_mean = verdicts(&Detector::at_mean(table))?;

    let curve = |name, truth: &[bool], target: Verdict| {
        let pos = truth.iter().filter(|&&t| t).count();
        let neg = truth.len() - pos;
        if pos == 0 || neg == 0 {
            return RocCurve {
                name,
                points: Vec::new(),
                at_mean: None,
                auc: None,
            };
        }
        let rates = |v: &[Verdict]| {
            let (mut tp, mut fp) = (0usize, 0usize);
            for (&t, &verdict) in truth.iter().zip(v) {
                if verdict == target {
                    if t {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
            (fp as f64 / neg as f64, tp as f64 / pos as f64)
        };
        let points: Vec<RocPoint> = sweeps
            .iter()
            .map(|(q, v)| {
                let (fpr, tpr) = rates(v);
                RocPoint {
                    quantile: *q,
                    fpr,
                    tpr,
                }
            })
            .collect();
        let auc = trapezoid_auc(points.iter().map(|p| (p.fpr, p.tpr)));
        RocCurve {
            name,
            points,
            at_mean: Some(rates(&at_mean)),
            auc: Some(auc),
        }
    };

    Ok(DetectionRoc {
        foreground: curve("foreground", &fg_truth, Verdict::RedundantForeground),
        background: curve("background", &bg_truth, Verdict::RedundantBackground),
    })
}

/// Area under `(fpr, tpr)` points by the trapezoid rule, anchored at (0,0)
/// and (1,1).
pub fn trapezoid_auc(points: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

impl DetectionRoc {
    /// CSV with columns `curve_name,threshold_quantile,fpr,tpr`. Each curve
    /// adds a `mean` row for the operating point at `H̄` and an `auc` row
    /// carrying the area in the `tpr` column; undefined curves get a single
    /// `undefined` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["curve_name", "threshold_quantile", "fpr", "tpr"])?;
        for curve in [&self.foreground, &self.background] {
            match (curve.auc, curve.at_mean) {
                (Some(auc), Some((fpr, tpr))) => {
                    for p in &curve.points {
                        w.write_record([
                            curve.name.to_string(),
                            p.quantile.to_string(),
                            p.fpr.to_string(),
                            p.tpr.to_string(),
                        ])?;
                    }
                    w.write_record([curve.name, "mean", &fpr.to_string(), &tpr.to_string()])?;
                    w.write_record([curve.name, "auc", "", &auc.to_string()])?;
                }
                _ => w.write_record([curve.name, "undefined", "", ""])?,
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}
