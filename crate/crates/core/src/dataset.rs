//! Synthetic multi-view datasets.
//!
//! Every class draws each view from an isotropic Gaussian. Foreground class
//! `c` defaults to mean `(4c, 4c, ...)` in every view and background sits at
//! the origin, all with unit standard deviation. View disagreement is
//! injected afterwards by replacing one view of a foreground sample with a
//! fresh background draw.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, Stream};

/// Class of a single view. `Background` is the extra "neutral" class that can
/// co-occur with anything in the other views.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Background,
    Foreground(u32),
}

impl ClassLabel {
    /// File encoding: background is 0, foreground class `c` is `c`.
    pub fn code(self) -> u32 {
        match self {
            ClassLabel::Background => 0,
            ClassLabel::Foreground(c) => c,
        }
    }

    pub fn from_code(code: u32) -> Self {
        match code {
            0 => ClassLabel::Background,
            c => ClassLabel::Foreground(c),
        }
    }

    pub fn is_background(self) -> bool {
        matches!(self, ClassLabel::Background)
    }

    pub fn is_foreground(self) -> bool {
        !self.is_background()
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Background => write!(f, "background"),
            ClassLabel::Foreground(c) => write!(f, "{c}"),
        }
    }
}

/// All labels of a problem with `n_foreground` foreground classes, in class
/// index order: foreground `1..=n` first, background last.
pub fn class_labels(n_foreground: usize) -> Vec<ClassLabel> {
    (1..=n_foreground as u32)
        .map(ClassLabel::Foreground)
        .chain(std::iter::once(ClassLabel::Background))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiViewSample {
    pub views: Vec<Vec<f64>>,
    /// What each view actually depicts. Used for generation and scoring only.
    pub true_view_labels: Vec<ClassLabel>,
    /// The intended class before corruption.
    pub nominal_label: ClassLabel,
}

impl MultiViewSample {
    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    /// All views show the nominal foreground class.
    pub fn is_redundant_foreground(&self) -> bool {
        self.nominal_label.is_foreground()
            && self.true_view_labels.iter().all(|&l| l == self.nominal_label)
    }

    pub fn is_redundant_background(&self) -> bool {
        self.true_view_labels.iter().all(|l| l.is_background())
    }

    pub fn has_disagreement(&self) -> bool {
        !self.is_redundant_foreground() && !self.is_redundant_background()
    }

    fn is_clean(&self, class: ClassLabel) -> bool {
        self.nominal_label == class && self.true_view_labels.iter().all(|&l| l == class)
    }
}

/// Where a sample lives in a dataset file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Seed,
    Unlabeled,
    Test,
}

/// A labeled point of one view.
pub type LabeledPoint = (Vec<f64>, ClassLabel);

/// Seed samples, the unlabeled pool `U` and a held-out test set.
///
/// Seed samples are clean, so the per-view labeled sets `S_i` all start from
/// the same samples; [`MultiViewDataset::seed_set`] projects them onto one
/// view. Per-view pool membership during a run lives in the bootstrap state.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiViewDataset {
    pub dims: Vec<usize>,
    pub n_classes: usize,
    pub seeds: Vec<MultiViewSample>,
    pub unlabeled: Vec<MultiViewSample>,
    pub test: Vec<MultiViewSample>,
}

impl MultiViewDataset {
    pub fn n_views(&self) -> usize {
        self.dims.len()
    }

    pub fn class_labels(&self) -> Vec<ClassLabel> {
        class_labels(self.n_classes)
    }

    /// The labeled set `S_i` for `view`.
    pub fn seed_set(&self, view: usize) -> Vec<LabeledPoint> {
        self.seeds
            .iter()
            .map(|s| (s.views[view].clone(), s.true_view_labels[view]))
            .collect()
    }

    /// Number of unlabeled samples with exactly one background view and a
    /// foreground nominal label.
    pub fn disagreement_count(&self) -> usize {
        self.unlabeled.iter().filter(|s| s.has_disagreement()).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 {
            return Err(Error::config("dims", "needs at least two views"));
        }
        let n = self.n_classes as u32;
        for sample in self.seeds.iter().chain(&self.unlabeled).chain(&self.test) {
            check_sample(sample, &self.dims, n).map_err(|m| Error::config("samples", m))?;
        }
        Ok(())
    }
}

fn check_sample(sample: &MultiViewSample, dims: &[usize], n_classes: u32) -> Result<(), String> {
    let v = dims.len();
    if sample.views.len() != v {
        return Err(format!("expected {v} views, found {}", sample.views.len()));
    }
    if sample.true_view_labels.len() != v {
        return Err(format!(
            "expected {v} view labels, found {}",
            sample.true_view_labels.len()
        ));
    }
    for (i, (x, &d)) in sample.views.iter().zip(dims).enumerate() {
        if x.len() != d {
            return Err(format!("view {i} has dimension {}, expected {d}", x.len()));
        }
    }
    for &l in sample.true_view_labels.iter().chain(std::iter::once(&sample.nominal_label)) {
        if l.code() > n_classes {
            return Err(format!("label {} exceeds class count {n_classes}", l.code()));
        }
    }
    if sample.nominal_label.is_background()
        && sample.true_view_labels.iter().any(|l| l.is_foreground())
    {
        return Err("background sample with a foreground view".into());
    }
    Ok(())
}

/// Per-view mean and a shared standard deviation of the background class.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundModel {
    pub means: Vec<Vec<f64>>,
    pub std: f64,
}

impl BackgroundModel {
    fn draw<R: Rng>(&self, view: usize, rng: &mut R) -> Vec<f64> {
        draw_gaussian(&self.means[view], self.std, rng)
    }
}

fn draw_gaussian<R: Rng>(mean: &[f64], std: f64, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(0.0, std).expect("std validated as finite and positive");
    mean.iter().map(|m| m + normal.sample(rng)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub n_foreground_classes: usize,
    /// Training samples per foreground class.
    pub per_class_count: usize,
    /// Test samples per foreground class (test data is never corrupted).
    pub test_per_class: usize,
    pub dims: Vec<usize>,
    /// `class_means[view][c - 1]`
    pub class_means: Vec<Vec<Vec<f64>>>,
    pub class_std: f64,
    /// `background_mean[view]`
    pub background_mean: Vec<Vec<f64>>,
    pub background_std: f64,
    pub disagreement_rate: f64,
    /// Add `per_class_count` redundant background samples to the training set.
    pub redundant_background: bool,
    pub rng_seed: u64,
}

impl Default for SyntheticConfig {
    /// Two 2-D views, two foreground classes plus background, 100 training
    /// samples per class and 50 test samples per foreground class.
    fn default() -> Self {
        Self::with_layout(2, 100, vec![2, 2], 4.0)
    }
}

impl SyntheticConfig {
    /// Default means: class `c` at `(separation·c, ...)` in every view,
    /// background at the origin, unit standard deviation.
    pub fn with_layout(
        n_foreground_classes: usize,
        per_class_count: usize,
        dims: Vec<usize>,
        separation: f64,
    ) -> Self {
        let class_means = dims
            .iter()
            .map(|&d| {
                (1..=n_foreground_classes)
                    .map(|c| vec![separation * c as f64; d])
                    .collect()
            })
            .collect();
        let background_mean = dims.iter().map(|&d| vec![0.0; d]).collect();
        SyntheticConfig {
            n_foreground_classes,
            per_class_count,
            test_per_class: per_class_count / 2,
            dims,
            class_means,
            class_std: 1.0,
            background_mean,
            background_std: 1.0,
            disagreement_rate: 0.0,
            redundant_background: true,
            rng_seed: 0,
        }
    }

    pub fn background_model(&self) -> BackgroundModel {
        BackgroundModel {
            means: self.background_mean.clone(),
            std: self.background_std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_foreground_classes < 2 {
            return Err(Error::config("n_foreground_classes", "must be at least 2"));
        }
        if self.per_class_count == 0 {
            return Err(Error::config("per_class_count", "must be positive"));
        }
        if self.dims.len() < 2 {
            return Err(Error::config("dims", "needs at least two views"));
        }
        if self.dims.contains(&0) {
            return Err(Error::config("dims", "every view needs at least one dimension"));
        }
        if !(self.class_std.is_finite() && self.class_std > 0.0) {
            return Err(Error::config("class_std", "must be finite and positive"));
        }
        if !(self.background_std.is_finite() && self.background_std > 0.0) {
            return Err(Error::config("background_std", "must be finite and positive"));
        }
        if !(0.0..=1.0).contains(&self.disagreement_rate) {
            return Err(Error::config(
                "disagreement_rate",
                format!("must be within [0, 1], got {}", self.disagreement_rate),
            ));
        }
        if self.class_means.len() != self.dims.len() {
            return Err(Error::config("class_means", "needs one entry per view"));
        }
        for (means, &d) in self.class_means.iter().zip(&self.dims) {
            if means.len() != self.n_foreground_classes {
                return Err(Error::config("class_means", "needs one mean per foreground class"));
            }
            if means.iter().any(|m| m.len() != d) {
                return Err(Error::config("class_means", "mean dimension differs from view dimension"));
            }
        }
        if self.background_mean.len() != self.dims.len()
            || self.background_mean.iter().zip(&self.dims).any(|(m, &d)| m.len() != d)
        {
            return Err(Error::config("background_mean", "needs one mean per view of matching dimension"));
        }
        Ok(())
    }
}

/// Draws a training pool (shuffled) and a clean test set, then injects view
/// disagreement at `config.disagreement_rate`. Training samples land in
/// `unlabeled`; use [`split_labeled_unlabeled`] to carve out seeds.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<MultiViewDataset> {
    config.validate()?;
    let mut rng = rng_for(config.rng_seed, Stream::Generate);
    let n_views = config.dims.len();

    let draw_class = |class: ClassLabel, rng: &mut _| {
        let views = (0..n_views)
            .map(|v| match class {
                ClassLabel::Foreground(c) => {
                    draw_gaussian(&config.class_means[v][c as usize - 1], config.class_std, rng)
                }
                ClassLabel::Background => {
                    draw_gaussian(&config.background_mean[v], config.background_std, rng)
                }
            })
            .collect();
        MultiViewSample {
            views,
            true_view_labels: vec![class; n_views],
            nominal_label: class,
        }
    };

    let foreground = class_labels(config.n_foreground_classes);
    let foreground = &foreground[..config.n_foreground_classes];

    let mut train = Vec::new();
    for &class in foreground {
        for _ in 0..config.per_class_count {
            train.push(draw_class(class, &mut rng));
        }
    }
    if config.redundant_background {
        for _ in 0..config.per_class_count {
            train.push(draw_class(ClassLabel::Background, &mut rng));
        }
    }
    train.shuffle(&mut rng);

    let mut test = Vec::new();
    for &class in foreground {
        for _ in 0..config.test_per_class {
            test.push(draw_class(class, &mut rng));
        }
    }

    let dataset = MultiViewDataset {
        dims: config.dims.clone(),
        n_classes: config.n_foreground_classes,
        seeds: Vec::new(),
        unlabeled: train,
        test,
    };
    if config.disagreement_rate == 0.0 {
        return Ok(dataset);
    }
    inject_view_disagreement(
        dataset,
        &config.background_model(),
        config.disagreement_rate,
        config.rng_seed,
    )
}

/// Corrupts `round(rate · m)` of the `m` redundant-foreground unlabeled
/// samples: one uniformly chosen view of each is replaced by a background
/// draw and relabeled `Background`.
pub fn inject_view_disagreement(
    mut dataset: MultiViewDataset,
    background: &BackgroundModel,
    rate: f64,
    rng_seed: u64,
) -> Result<MultiViewDataset> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::OutOfRange {
            what: "disagreement rate",
            value: rate,
        });
    }
    if background.means.len() != dataset.n_views()
        || background.means.iter().zip(&dataset.dims).any(|(m, &d)| m.len() != d)
    {
        return Err(Error::config("background_mean", "does not match dataset views"));
    }
    if !(background.std.is_finite() && background.std > 0.0) {
        return Err(Error::config("background_std", "must be finite and positive"));
    }
    let candidates: Vec<usize> = dataset
        .unlabeled
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_redundant_foreground())
        .map(|(k, _)| k)
        .collect();
    if candidates.is_empty() {
        if rate == 0.0 {
            return Ok(dataset);
        }
        return Err(Error::EmptyPool);
    }
    let count = (rate * candidates.len() as f64).round() as usize;
    let mut rng = rng_for(rng_seed, Stream::Inject);
    let mut chosen: Vec<usize> = index::sample(&mut rng, candidates.len(), count)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    chosen.sort_unstable();
    let n_views = dataset.n_views();
    for k in chosen {
        let view = rng.random_range(0..n_views);
        let sample = &mut dataset.unlabeled[k];
        sample.views[view] = background.draw(view, &mut rng);
        sample.true_view_labels[view] = ClassLabel::Background;
    }
    Ok(dataset)
}

/// Moves `per_class_seed_count` clean samples of every foreground class (and
/// of background when `include_background`) from the pool into the seeds.
/// Seeds are ordered by class; the pool keeps its order.
pub fn split_labeled_unlabeled(
    mut dataset: MultiViewDataset,
    per_class_seed_count: usize,
    include_background: bool,
    rng_seed: u64,
) -> Result<MultiViewDataset> {
    let mut rng = rng_for(rng_seed, Stream::Split);
    let mut classes = dataset.class_labels();
    if !include_background {
        classes.retain(|c| c.is_foreground());
    }
    let mut picked = Vec::new();
    for class in classes {
        let clean: Vec<usize> = dataset
            .unlabeled
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_clean(class))
            .map(|(k, _)| k)
            .collect();
        if clean.len() < per_class_seed_count {
            return Err(Error::InsufficientSamples {
                class,
                needed: per_class_seed_count,
                available: clean.len(),
            });
        }
        for i in index::sample(&mut rng, clean.len(), per_class_seed_count) {
            picked.push(clean[i]);
        }
    }
    let pool = std::mem::take(&mut dataset.unlabeled);
    let mut by_index: Vec<Option<MultiViewSample>> = pool.into_iter().map(Some).collect();
    for k in picked {
        dataset.seeds.push(by_index[k].take().expect("picked once"));
    }
    dataset.unlabeled = by_index.into_iter().flatten().collect();
    Ok(dataset)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    #[serde(rename = "V")]
    n_views: usize,
    dims: Vec<usize>,
    n_classes: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    views: Vec<Vec<f64>>,
    true_view_labels: Vec<u32>,
    nominal_label: u32,
    role: Role,
}

impl Record {
    fn new(sample: &MultiViewSample, role: Role) -> Self {
        Record {
            views: sample.views.clone(),
            true_view_labels: sample.true_view_labels.iter().map(|l| l.code()).collect(),
            nominal_label: sample.nominal_label.code(),
            role,
        }
    }

    fn into_sample(self) -> (MultiViewSample, Role) {
        let sample = MultiViewSample {
            views: self.views,
            true_view_labels: self.true_view_labels.into_iter().map(ClassLabel::from_code).collect(),
            nominal_label: ClassLabel::from_code(self.nominal_label),
        };
        (sample, self.role)
    }
}

/// Writes the JSON Lines format: a header line, then one sample per line
/// (seeds, then unlabeled, then test).
pub fn write_dataset<W: Write>(dataset: &MultiViewDataset, mut out: W) -> std::io::Result<()> {
    let header = Header {
        n_views: dataset.n_views(),
        dims: dataset.dims.clone(),
        n_classes: dataset.n_classes,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let groups = [
        (&dataset.seeds, Role::Seed),
        (&dataset.unlabeled, Role::Unlabeled),
        (&dataset.test, Role::Test),
    ];
    for (samples, role) in groups {
        for s in samples {
            serde_json::to_writer(&mut out, &Record::new(s, role))?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<MultiViewDataset> {
    let mut lines = input.lines().enumerate();
    let header: Header = loop {
        match lines.next() {
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing header".into(),
                })
            }
            Some((i, line)) => {
                let line = line.map_err(|e| parse_error(i, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line).map_err(|e| parse_error(i, e))?;
            }
        }
    };
    if header.dims.len() != header.n_views {
        return Err(Error::Parse {
            line: 1,
            message: format!("header V = {} but {} dims", header.n_views, header.dims.len()),
        });
    }
    let mut dataset = MultiViewDataset {
        dims: header.dims,
        n_classes: header.n_classes,
        seeds: Vec::new(),
        unlabeled: Vec::new(),
        test: Vec::new(),
    };
    for (i, line) in lines {
        let line = line.map_err(|e| parse_error(i, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| parse_error(i, e))?;
        let (sample, role) = record.into_sample();
        check_sample(&sample, &dataset.dims, dataset.n_classes as u32).map_err(|message| {
            Error::Parse {
                line: i + 1,
                message,
            }
        })?;
        match role {
            Role::Seed => dataset.seeds.push(sample),
            Role::Unlabeled => dataset.unlabeled.push(sample),
            Role::Test => dataset.test.push(sample),
        }
    }
    Ok(dataset)
}

fn parse_error(index: usize, err: impl fmt::Display) -> Error {
    Error::Parse {
        line: index + 1,
        message: err.to_string(),
    }
}

pub fn save_dataset(dataset: &MultiViewDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<MultiViewDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file))
}
