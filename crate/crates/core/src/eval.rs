//! Metrics, single trials and disagreement-rate sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bootstrap::{
    cotrain_baseline, cross_modality_bootstrap, multiview_bootstrap, noisy_oracle_labels, test_ccr, BootstrapConfig,
    CrossModalOptions,
};
use crate::dataset::{generate_synthetic, split_labeled_unlabeled, ClassLabel, SyntheticConfig};
use crate::disagreement::{build_entropy_table, detection_roc, quantile_grid};
use crate::error::{Error, Result};
use crate::math::{mean, std_dev};

/// Correct classification rate: the fraction of positions where the
/// prediction equals the truth.
pub fn ccr(predictions: &[ClassLabel], truths: &[ClassLabel]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Empty);
    }
    let correct = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / predictions.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Conventional co-training.
    Baseline,
    /// Entropy-filtered multi-view bootstrapping.
    Filtered,
    /// Entropy-filtered cross-modality bootstrapping from oracle labels.
    CrossModal,
    /// Cross-modality bootstrapping with the filter bypassed.
    CrossModalUnfiltered,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Baseline,
        Method::Filtered,
        Method::CrossModal,
        Method::CrossModalUnfiltered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Filtered => "filtered",
            Method::CrossModal => "crossmodal",
            Method::CrossModalUnfiltered => "crossmodal-unfiltered",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Everything a trial needs besides the method, rate and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSetup {
    /// Data layout. Its `disagreement_rate` and `rng_seed` are overridden per
    /// trial.
    pub synthetic: SyntheticConfig,
    pub bootstrap: BootstrapConfig,
    pub seeds_per_class: usize,
    pub background_seed: bool,
    /// Symmetric noise on the strong-view oracle labels (cross-modal methods).
    pub label_noise: f64,
    /// Strong view for the cross-modal methods; the weak view is the other
    /// one of the first two views.
    pub strong_view: usize,
    /// Size of `L` for the cross-modal methods; `None` takes the whole pool.
    pub crossmodal_n: Option<usize>,
    pub roc_steps: usize,
}

impl Default for TrialSetup {
    fn default() -> Self {
        TrialSetup {
            synthetic: SyntheticConfig::default(),
            bootstrap: BootstrapConfig {
                max_iterations: 1000,
                ..BootstrapConfig::default()
            },
            seeds_per_class: 5,
            background_seed: true,
            label_noise: 0.1,
            strong_view: 0,
            crossmodal_n: None,
            roc_steps: 100,
        }
    }
}

impl TrialSetup {
    pub fn validate(&self) -> Result<()> {
        self.synthetic.validate()?;
        self.bootstrap.validate()?;
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::config("label_noise", "must be within [0, 1]"));
        }
        if self.strong_view > 1 {
            return Err(Error::config("strong_view", "must be 0 or 1"));
        }
        Ok(())
    }

    fn weak_view(&self) -> usize {
        1 - self.strong_view
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewCcr {
    pub view: usize,
    pub ccr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionAuc {
    pub foreground: Option<f64>,
    pub background: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub method: Method,
    pub disagreement_rate: f64,
    pub rng_seed: u64,
    pub ccr: Vec<ViewCcr>,
    /// Detection ROC areas for methods that build an entropy table.
    pub detection: Option<DetectionAuc>,
    pub wall_time: Duration,
}

impl PartialEq for TrialResult {
    /// Wall time is not part of a result's identity.
    fn eq(&self, other: &Self) -> bool {
        self.method == other.method
            && self.disagreement_rate.to_bits() == other.disagreement_rate.to_bits()
            && self.rng_seed == other.rng_seed
            && self.ccr == other.ccr
            && self.detection == other.detection
    }
}

/// Generates data with disagreement at `rate`, runs `method` and scores the
/// learned classifiers on the clean test set, one entry per learned view.
pub fn run_trial(method: Method, setup: &TrialSetup, rate: f64, seed: u64) -> Result<TrialResult> {
    setup.validate()?;
    let start = Instant::now();
    let synthetic = SyntheticConfig {
        disagreement_rate: rate,
        rng_seed: seed,
        ..setup.synthetic.clone()
    };
    let dataset = generate_synthetic(&synthetic)?;

    let (ccr, detection) = match method {
        Method::Baseline | Method::Filtered => {
            let dataset = split_labeled_unlabeled(dataset, setup.seeds_per_class, setup.background_seed, seed)?;
            let (outcome, detection) = if method == Method::Filtered {
                let table = build_entropy_table(&dataset)?;
                let roc = detection_roc(&dataset.unlabeled, &table, &quantile_grid(setup.roc_steps))?;
                let detection = DetectionAuc {
                    foreground: roc.foreground.auc,
                    background: roc.background.auc,
                };
                (multiview_bootstrap(&dataset, &table, &setup.bootstrap)?, Some(detection))
            } else {
                (cotrain_baseline(&dataset, &setup.bootstrap)?, None)
            };
            let ccr = outcome
                .test_ccr(&dataset)?
                .into_iter()
                .enumerate()
                .map(|(view, ccr)| ViewCcr { view, ccr })
                .collect();
            (ccr, detection)
        }
        Method::CrossModal | Method::CrossModalUnfiltered => {
            let strong = setup.strong_view;
            let weak = setup.weak_view();
            let labels = noisy_oracle_labels(&dataset.unlabeled, strong, &dataset.class_labels(), setup.label_noise, seed)?;
            let weak_points: Vec<Vec<f64>> = dataset.unlabeled.iter().map(|s| s.views[weak].clone()).collect();
            let n = setup.crossmodal_n.unwrap_or(weak_points.len());
            let options = CrossModalOptions {
                bypass_filter: method == Method::CrossModalUnfiltered,
                uniform_prior: setup.bootstrap.uniform_prior,
            };
            let outcome = cross_modality_bootstrap(&labels, &weak_points, n, options)?;
            let ccr = test_ccr(&outcome.classifier, &dataset.test, weak)?;
            (vec![ViewCcr { view: weak, ccr }], None)
        }
    };

    Ok(TrialResult {
        method,
        disagreement_rate: rate,
        rng_seed: seed,
        ccr,
        detection,
        wall_time: start.elapsed(),
    })
}

/// One requested trial and what became of it.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    pub rate: f64,
    pub trial: usize,
    pub seed: u64,
    pub outcome: Result<TrialResult, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub method: Method,
    pub rate: f64,
    pub view: usize,
    pub mean_ccr: f64,
    /// Population standard deviation over the successful trials.
    pub std_ccr: f64,
    pub trials: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rates: Vec<f64>,
    pub methods: Vec<Method>,
    pub cells: Vec<SweepCell>,
    pub records: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn cell(&self, method: Method, rate: f64, view: usize) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.rate == rate && c.view == view)
    }

    /// Mean over successful trials of a detection AUC, if any trial had one.
    pub fn mean_detection(&self, method: Method, rate: f64) -> Option<DetectionAuc> {
        let det: Vec<DetectionAuc> = self
            .records
            .iter()
            .filter(|r| r.method == method && r.rate == rate)
            .filter_map(|r| r.outcome.as_ref().ok().and_then(|t| t.detection))
            .collect();
        if det.is_empty() {
            return None;
        }
        let avg = |f: fn(&DetectionAuc) -> Option<f64>| {
            let v: Option<Vec<f64>> = det.iter().map(f).collect();
            v.map(|v| mean(&v))
        };
        Some(DetectionAuc {
            foreground: avg(|d| d.foreground),
            background: avg(|d| d.background),
        })
    }

    /// CSV with columns `method,rate,view,mean_ccr,std_ccr,trials`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "rate", "view", "mean_ccr", "std_ccr", "trials"])?;
        for c in &self.cells {
            w.write_record([
                c.method.name().to_string(),
                c.rate.to_string(),
                c.view.to_string(),
                c.mean_ccr.to_string(),
                c.std_ccr.to_string(),
                c.trials.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    /// Per-trial CSV with columns
    /// `method,rate,trial,seed,view,ccr,fg_auc,bg_auc,failure`. Failed trials
    /// get one row with empty scores and the failure reason.
    pub fn write_trials_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "rate", "trial", "seed", "view", "ccr", "fg_auc", "bg_auc", "failure"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let head = [r.method.name().to_string(), r.rate.to_string(), r.trial.to_string(), r.seed.to_string()];
            match &r.outcome {
                Ok(t) => {
                    let (fg, bg) = t
                        .detection
                        .map(|d| (opt(d.foreground), opt(d.background)))
                        .unwrap_or_default();
                    for v in &t.ccr {
                        let mut row = head.to_vec();
                        row.extend([v.view.to_string(), v.ccr.to_string(), fg.clone(), bg.clone(), String::new()]);
                        w.write_record(&row)?;
                    }
                }
                Err(reason) => {
                    let mut row = head.to_vec();
                    row.extend([String::new(), String::new(), String::new(), String::new(), reason.clone()]);
                    w.write_record(&row)?;
                }
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Runs `trials_per_point` trials for every (method, rate) in parallel.
/// Trial `t` uses seed `base_seed + t` for every method and rate, so methods
/// are compared on the same draws. Failed trials are recorded, not dropped.
pub fn run_sweep(
    methods: &[Method],
    rates: &[f64],
    trials_per_point: usize,
    base_seed: u64,
    setup: &TrialSetup,
) -> Result<SweepResult> {
    if methods.is_empty() {
        return Err(Error::config("methods", "must not be empty"));
    }
    if rates.is_empty() {
        return Err(Error::config("rates", "must not be empty"));
    }
    if trials_per_point == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    if let Some(&r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::config("rates", format!("{r} is outside [0, 1]")));
    }
    setup.validate()?;

    let jobs: Vec<(Method, f64, usize)> = methods
        .iter()
        .flat_map(|&m| rates.iter().flat_map(move |&r| (0..trials_per_point).map(move |t| (m, r, t))))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(method, rate, trial)| {
            let seed = base_seed.wrapping_add(trial as u64);
            TrialRecord {
                method,
                rate,
                trial,
                seed,
                outcome: run_trial(method, setup, rate, seed).map_err(|e| e.to_string()),
            }
        })
        .collect();

    let mut cells = Vec::new();
    for &method in methods {
        for &rate in rates {
            let ok: Vec<&TrialResult> = records
                .iter()
                .filter(|r| r.method == method && r.rate == rate)
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let mut views: Vec<usize> = ok.iter().flat_map(|t| t.ccr.iter().map(|v| v.view)).collect();
            views.sort_unstable();
            views.dedup();
            for view in views {
                let values: Vec<f64> = ok
                    .iter()
                    .filter_map(|t| t.ccr.iter().find(|v| v.view == view).map(|v| v.ccr))
                    .collect();
                cells.push(SweepCell {
                    method,
                    rate,
                    view,
                    mean_ccr: mean(&values),
                    std_ccr: std_dev(&values),
                    trials: values.len(),
                    values,
                });
            }
        }
    }
    Ok(SweepResult {
        rates: rates.to_vec(),
        methods: methods.to_vec(),
        cells,
        records,
    })
}
