//! Multi-view bootstrapping learners.
//!
//! [`cotrain_baseline`] is conventional co-training: each view's classifier
//! labels its most confident unlabeled samples for every view.
//! [`multiview_bootstrap`] runs the same loop but only lets view `i` label
//! view `j` of a sample when the two views' indicator bits agree, while each
//! view still self-trains on every sample it picks.
//! [`cross_modality_bootstrap`] trains a weak-view classifier from the labels
//! of a strong view, keeping only label/sample pairs that pass a mixed
//! label/feature version of the same agreement test.
//!
//! Samples are identified by their index in the dataset's unlabeled pool.

use std::io::Write;

use rand::Rng;

use crate::classifier::{FitOptions, GaussianBayesClassifier};
use crate::dataset::{ClassLabel, LabeledPoint, MultiViewDataset, MultiViewSample};
use crate::disagreement::{entropy_table_for, Detector, EntropyTable};
use crate::error::{Error, Result};
use crate::eval::ccr;
use crate::math::{entropy_nats, mean};
use crate::rng::{rng_for, Stream};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapConfig {
    /// Samples each classifier labels per iteration.
    pub n_per_iteration: usize,
    pub max_iterations: usize,
    /// Take `⌊N / #classes⌋` samples per predicted class instead of the
    /// overall top `N`.
    pub balance_classes: bool,
    /// Rebuild the entropy table over the remaining pool every iteration.
    pub recompute_entropy: bool,
    pub uniform_prior: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_per_iteration: 6,
            max_iterations: 100,
            balance_classes: true,
            recompute_entropy: false,
            uniform_prior: false,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_iteration == 0 {
            return Err(Error::config("n_per_iteration", "must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be at least 1"));
        }
        Ok(())
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions {
            uniform_prior: self.uniform_prior,
        }
    }
}

/// One sample picked by one view's classifier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub view: usize,
    pub sample: usize,
    pub label: ClassLabel,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViewRecord {
    pub view: usize,
    pub labeled_size: usize,
    pub unlabeled_size: usize,
    pub test_ccr: f64,
    /// Cross-labeling moves blocked by the agreement test during this
    /// iteration while this view was labeling.
    pub pairs_filtered: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub views: Vec<ViewRecord>,
    pub selections: Vec<Selection>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BootstrapTrace {
    pub iterations: Vec<IterationRecord>,
}

impl BootstrapTrace {
    /// CSV with columns `iteration,view,labeled_size,unlabeled_size,test_ccr,pairs_filtered`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iteration",
            "view",
            "labeled_size",
            "unlabeled_size",
            "test_ccr",
            "pairs_filtered",
        ])?;
        for it in &self.iterations {
            for v in &it.views {
                w.write_record([
                    it.iteration.to_string(),
                    v.view.to_string(),
                    v.labeled_size.to_string(),
                    v.unlabeled_size.to_string(),
                    v.test_ccr.to_string(),
                    v.pairs_filtered.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn total_filtered(&self) -> usize {
        self.iterations
            .iter()
            .flat_map(|it| &it.views)
            .map(|v| v.pairs_filtered)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapOutcome {
    pub classifiers: Vec<GaussianBayesClassifier>,
    pub labeled_sets: Vec<Vec<LabeledPoint>>,
    pub trace: BootstrapTrace,
}

impl BootstrapOutcome {
    /// Per-view CCR of the final classifiers on the dataset's test set.
    pub fn test_ccr(&self, dataset: &MultiViewDataset) -> Result<Vec<f64>> {
        self.classifiers
            .iter()
            .enumerate()
            .map(|(v, f)| test_ccr(f, &dataset.test, v))
            .collect()
    }
}

/// CCR of `classifier` on view `view` of `test` against each view's true label.
pub fn test_ccr(classifier: &GaussianBayesClassifier, test: &[MultiViewSample], view: usize) -> Result<f64> {
    let predicted = test
        .iter()
        .map(|s| classifier.predict(&s.views[view]).map(|p| p.label))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<ClassLabel> = test.iter().map(|s| s.true_view_labels[view]).collect();
    ccr(&predicted, &truth)
}

/// Which cross-labeling moves are allowed.
enum CrossFilter<'a> {
    Off,
    Fixed(Detector<'a>),
    Recompute,
}

/// Conventional co-training: every confident pick labels all other views.
pub fn cotrain_baseline(dataset: &MultiViewDataset, config: &BootstrapConfig) -> Result<BootstrapOutcome> {
    run(dataset, config, CrossFilter::Off)
}

/// Filtered multi-view bootstrapping with the indicator bits thresholded at
/// the pool means. With `config.recompute_entropy` the table is rebuilt every
/// iteration over samples that still have a view in the pool.
pub fn multiview_bootstrap(
    dataset: &MultiViewDataset,
    table: &EntropyTable,
    config: &BootstrapConfig,
) -> Result<BootstrapOutcome> {
    if config.recompute_entropy {
        check_table(dataset, table)?;
        return run(dataset, config, CrossFilter::Recompute);
    }
    multiview_bootstrap_with(dataset, &Detector::at_mean(table), config)
}

/// Filtered multi-view bootstrapping with an explicit detector (for instance
/// one with custom thresholds). `config.recompute_entropy` is ignored.
pub fn multiview_bootstrap_with(
    dataset: &MultiViewDataset,
    detector: &Detector<'_>,
    config: &BootstrapConfig,
) -> Result<BootstrapOutcome> {
    check_table(dataset, detector.table())?;
    run(dataset, config, CrossFilter::Fixed(detector.clone()))
}

fn check_table(dataset: &MultiViewDataset, table: &EntropyTable) -> Result<()> {
    if table.n_samples() != dataset.unlabeled.len() || table.n_views() != dataset.n_views() {
        return Err(Error::LengthMismatch {
            left: dataset.unlabeled.len(),
            right: table.n_samples(),
        });
    }
    Ok(())
}

/// Classes the learners model: every foreground class, plus background when
/// the seeds contain it.
fn learner_classes(dataset: &MultiViewDataset) -> Vec<ClassLabel> {
    let has_background = dataset.seeds.iter().any(|s| s.true_view_labels.iter().any(|l| l.is_background()));
    dataset
        .class_labels()
        .into_iter()
        .filter(|c| c.is_foreground() || has_background)
        .collect()
}

fn run(dataset: &MultiViewDataset, config: &BootstrapConfig, filter: CrossFilter<'_>) -> Result<BootstrapOutcome> {
    config.validate()?;
    let n_views = dataset.n_views();
    let pool = &dataset.unlabeled;
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let classes = learner_classes(dataset);
    let options = config.fit_options();
    let mut labeled: Vec<Vec<LabeledPoint>> = (0..n_views).map(|v| dataset.seed_set(v)).collect();
    for set in &labeled {
        GaussianBayesClassifier::fit_with(set, &classes, options)?;
    }
    // in_pool[v][k]: view v of sample k is still in U^v
    let mut in_pool = vec![vec![true; pool.len()]; n_views];
    let per_class = (config.n_per_iteration / classes.len()).max(1);

    let mut trace = BootstrapTrace::default();
    for iteration in 0..config.max_iterations {
        if in_pool.iter().all(|p| p.iter().all(|&x| !x)) {
            break;
        }
        let recomputed = match filter {
            CrossFilter::Recompute => recompute_table(pool, &in_pool)?,
            _ => None,
        };
        let detector = match (&filter, &recomputed) {
            (CrossFilter::Fixed(d), _) => Some(d.clone()),
            (CrossFilter::Recompute, Some((table, _))) => Some(Detector::at_mean(table)),
            _ => None,
        };
        let position = |k: usize| match &recomputed {
            Some((_, index)) => index[k],
            None => Some(k),
        };

        let mut filtered = vec![0usize; n_views];
        let mut selections = Vec::new();
        for i in 0..n_views {
            let f_i = GaussianBayesClassifier::fit_with(&labeled[i], &classes, options)?;
            let mut ranked = Vec::new();
            for (k, sample) in pool.iter().enumerate() {
                if in_pool[i][k] {
                    let p = f_i.predict(&sample.views[i])?;
                    ranked.push(Selection {
                        view: i,
                        sample: k,
                        label: p.label,
                        confidence: p.confidence,
                    });
                }
            }
            ranked.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.sample.cmp(&b.sample)));
            let picked = if config.balance_classes {
                let mut taken = vec![0usize; classes.len()];
                ranked
                    .into_iter()
                    .filter(|s| {
                        let c = classes.iter().position(|l| *l == s.label).expect("predicted class is modeled");
                        taken[c] += 1;
                        taken[c] <= per_class
                    })
                    .collect::<Vec<_>>()
            } else {
                ranked.truncate(config.n_per_iteration);
                ranked
            };

            for s in &picked {
                let k = s.sample;
                for j in (0..n_views).filter(|&j| j != i) {
                    if let (Some(det), Some(pos)) = (&detector, position(k)) {
                        if !det.classify_pair(i, j, pos)?.agrees() {
                            filtered[i] += 1;
                            continue;
                        }
                    }
                    if in_pool[j][k] {
                        in_pool[j][k] = false;
                        labeled[j].push((pool[k].views[j].clone(), s.label));
                    }
                }
                in_pool[i][k] = false;
                labeled[i].push((pool[k].views[i].clone(), s.label));
            }
            selections.extend(picked);
        }

        let views = (0..n_views)
            .map(|v| {
                let f = GaussianBayesClassifier::fit_with(&labeled[v], &classes, options)?;
                Ok(ViewRecord {
                    view: v,
                    labeled_size: labeled[v].len(),
                    unlabeled_size: in_pool[v].iter().filter(|&&x| x).count(),
                    test_ccr: if dataset.test.is_empty() {
                        f64::NAN
                    } else {
                        test_ccr(&f, &dataset.test, v)?
                    },
                    pairs_filtered: filtered[v],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        trace.iterations.push(IterationRecord {
            iteration: iteration + 1,
            views,
            selections,
        });
    }

    let classifiers = labeled
        .iter()
        .map(|set| GaussianBayesClassifier::fit_with(set, &classes, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(BootstrapOutcome {
        classifiers,
        labeled_sets: labeled,
        trace,
    })
}

// Table over samples that still have a view in the pool, plus a map from
// pool index to table position. None when fewer than two samples remain.
fn recompute_table(pool: &[MultiViewSample], in_pool: &[Vec<bool>]) -> Result<Option<(EntropyTable, Vec<Option<usize>>)>> {
    let mut index = vec![None; pool.len()];
    let mut active = Vec::new();
    for k in 0..pool.len() {
        if in_pool.iter().any(|p| p[k]) {
            index[k] = Some(active.len());
            active.push(&pool[k]);
        }
    }
    if active.len() < 2 {
        return Ok(None);
    }
    Ok(Some((entropy_table_for(&active)?, index)))
}

/// Strong-view labels from ground truth, each flipped with probability
/// `noise` to a uniformly chosen different class. Confidence is 1 for all.
pub fn noisy_oracle_labels(
    samples: &[MultiViewSample],
    view: usize,
    classes: &[ClassLabel],
    noise: f64,
    seed: u64,
) -> Result<Vec<(ClassLabel, f64)>> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::OutOfRange {
            what: "label noise",
            value: noise,
        });
    }
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let mut rng = rng_for(seed, Stream::LabelNoise);
    Ok(samples
        .iter()
        .map(|s| {
            let truth = s.true_view_labels[view];
            let label = if rng.random::<f64>() < noise {
                let others: Vec<ClassLabel> = classes.iter().copied().filter(|&c| c != truth).collect();
                others[rng.random_range(0..others.len())]
            } else {
                truth
            };
            (label, 1.0)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CrossModalOptions {
    /// Keep every pair of `L` (the unfiltered baseline).
    pub bypass_filter: bool,
    pub uniform_prior: bool,
}

/// What the mixed label/feature agreement test saw.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossModalReport {
    /// Pool indices of `L`, most confident first.
    pub selected: Vec<usize>,
    /// `H(y | x_k^2)` for each entry of `L`.
    pub label_entropy: Vec<f64>,
    /// `H(x^2 | y_k)` for each entry of `L`.
    pub view_entropy: Vec<f64>,
    pub label_threshold: f64,
    pub view_threshold: f64,
    /// `(m(y, x_k^2), m(x^2, y_k))` for each entry of `L`.
    pub bits: Vec<(bool, bool)>,
    /// Whether each entry of `L` entered the training set `S`.
    pub kept: Vec<bool>,
}

impl CrossModalReport {
    pub fn kept_count(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossModalOutcome {
    pub classifier: GaussianBayesClassifier,
    pub report: CrossModalReport,
}

/// Cross-modality bootstrapping.
///
/// Sorts the pool by strong-view confidence (stable by index) and takes the
/// top `n` as `L = {(y_k, x_k)}`. With one shared Silverman bandwidth `h`
/// over the weak-view points of `L` and `S_y(x) = Σ_{b ∈ L, y_b = y} K_h(x - x_b)`:
///
/// - `p(y | x_k) = S_y(x_k) / Σ_y' S_y'(x_k)` gives `H(y | x_k)`;
/// - `p(x | y) = S_y(x) / Σ_{x' ∈ L} S_y(x')` over the points of `L` gives
///   `H(x | y_k)`.
///
/// Each bit is 1 when its entropy is strictly below the mean over `L`. A
/// pair enters `S` when the bits agree. The weak classifier is fitted on `S`
/// over the labels present in `S`.
pub fn cross_modality_bootstrap(
    strong_labels: &[(ClassLabel, f64)],
    weak_view: &[Vec<f64>],
    n: usize,
    options: CrossModalOptions,
) -> Result<CrossModalOutcome> {
    if strong_labels.len() != weak_view.len() {
        return Err(Error::LengthMismatch {
            left: strong_labels.len(),
            right: weak_view.len(),
        });
    }
    if n < 2 || n > weak_view.len() {
        return Err(Error::OutOfRange {
            what: "N",
            value: n as f64,
        });
    }
    let mut order: Vec<usize> = (0..weak_view.len()).collect();
    order.sort_by(|&a, &b| strong_labels[b].1.total_cmp(&strong_labels[a].1).then(a.cmp(&b)));
    order.truncate(n);

    let labels: Vec<ClassLabel> = order.iter().map(|&k| strong_labels[k].0).collect();
    let points: Vec<&[f64]> = order.iter().map(|&k| weak_view[k].as_slice()).collect();
    let mut label_set = labels.clone();
    label_set.sort();
    label_set.dedup();
    let class_of: Vec<usize> = labels
        .iter()
        .map(|l| label_set.binary_search(l).expect("label in set"))
        .collect();

    let owned: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    let h = crate::density::silverman_bandwidth(&owned)?;
    // class_mass[a][c] = S_c(x_a)
    let mut class_mass = vec![vec![0.0; label_set.len()]; n];
    for a in 0..n {
        for b in 0..n {
            let q: f64 = points[a]
                .iter()
                .zip(points[b])
                .zip(&h)
                .map(|((x, y), h)| ((x - y) / h).powi(2))
                .sum();
            class_mass[a][class_of[b]] += (-0.5 * q).exp();
        }
    }

    let ln_n = (n as f64).ln();
    let ln_c = (label_set.len() as f64).ln();
    let label_entropy: Vec<f64> = class_mass
        .iter()
        .map(|row| {
            let z: f64 = row.iter().sum();
            let p: Vec<f64> = row.iter().map(|v| v / z).collect();
            entropy_nats(&p).clamp(0.0, ln_c)
        })
        .collect();
    let per_class_view_entropy: Vec<f64> = (0..label_set.len())
        .map(|c| {
            let z: f64 = class_mass.iter().map(|row| row[c]).sum();
            let p: Vec<f64> = class_mass.iter().map(|row| row[c] / z).collect();
            entropy_nats(&p).clamp(0.0, ln_n)
        })
        .collect();
    let view_entropy: Vec<f64> = class_of.iter().map(|&c| per_class_view_entropy[c]).collect();

    let label_threshold = mean(&label_entropy);
    let view_threshold = mean(&view_entropy);
    let bits: Vec<(bool, bool)> = label_entropy
        .iter()
        .zip(&view_entropy)
        .map(|(&hy, &hx)| (hy < label_threshold, hx < view_threshold))
        .collect();
    let kept: Vec<bool> = bits
        .iter()
        .map(|&(a, b)| options.bypass_filter || a == b)
        .collect();

    let train: Vec<LabeledPoint> = kept
        .iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .map(|(a, _)| (owned[a].clone(), labels[a]))
        .collect();
    let mut classes: Vec<ClassLabel> = train.iter().map(|(_, l)| *l).collect();
    classes.sort();
    classes.dedup();
    if !classes.iter().any(|c| c.is_foreground()) {
        return Err(Error::NoForeground);
    }
    // foreground classes first, background last, matching class index order
    classes.sort_by_key(|c| (c.is_background(), *c));
    let classifier = GaussianBayesClassifier::fit_with(
        &train,
        &classes,
        FitOptions {
            uniform_prior: options.uniform_prior,
        },
    )?;

    Ok(CrossModalOutcome {
        classifier,
        report: CrossModalReport {
            selected: order,
            label_entropy,
            view_entropy,
            label_threshold,
            view_threshold,
            bits,
            kept,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, split_labeled_unlabeled, SyntheticConfig};
    use crate::disagreement::{build_entropy_table, ordered_pairs, Verdict};
    use ClassLabel::*;

    fn prepared(rate: f64, seed: u64) -> MultiViewDataset {
        let cfg = SyntheticConfig {
            disagreement_rate: rate,
            rng_seed: seed,
            ..SyntheticConfig::default()
        };
        split_labeled_unlabeled(generate_synthetic(&cfg).unwrap(), 5, true, seed).unwrap()
    }

    fn assert_monotone_and_conserved(ds: &MultiViewDataset, out: &BootstrapOutcome) {
        let start = ds.seeds.len() + ds.unlabeled.len();
        let mut prev: Option<&IterationRecord> = None;
        for it in &out.trace.iterations {
            for v in &it.views {
                assert_eq!(v.labeled_size + v.unlabeled_size, start);
                if let Some(p) = prev {
                    assert!(v.labeled_size >= p.views[v.view].labeled_size);
                    assert!(v.unlabeled_size <= p.views[v.view].unlabeled_size);
                }
            }
            prev = Some(it);
        }
    }

    #[test]
    fn baseline_learns_clean_data() {
        let ds = prepared(0.0, 1);
        let out = cotrain_baseline(&ds, &BootstrapConfig::default()).unwrap();
        for c in out.test_ccr(&ds).unwrap() {
            assert!(c >= 0.95, "{c}");
        }
        assert_monotone_and_conserved(&ds, &out);
        let last = out.trace.iterations.last().unwrap();
        assert!(last.views.iter().all(|v| v.unlabeled_size == 0));
    }

    #[test]
    fn single_iteration_consumes_at_most_n_per_view() {
        let ds = prepared(0.3, 2);
        let table = build_entropy_table(&ds).unwrap();
        let cfg = BootstrapConfig {
            n_per_iteration: 6,
            max_iterations: 1,
            ..BootstrapConfig::default()
        };
        let out = multiview_bootstrap(&ds, &table, &cfg).unwrap();
        assert_eq!(out.trace.iterations.len(), 1);
        let it = &out.trace.iterations[0];
        for v in 0..2 {
            assert!(it.selections.iter().filter(|s| s.view == v).count() <= 6);
        }
        assert_monotone_and_conserved(&ds, &out);
    }

    #[test]
    fn oversized_n_drains_the_pool() {
        let ds = prepared(0.2, 3);
        let cfg = BootstrapConfig {
            n_per_iteration: 10_000,
            balance_classes: false,
            ..BootstrapConfig::default()
        };
        let out = cotrain_baseline(&ds, &cfg).unwrap();
        assert_eq!(out.trace.iterations.len(), 1);
        assert!(out.trace.iterations[0].views.iter().all(|v| v.unlabeled_size == 0));
    }

    #[test]
    fn filter_counts_match_pair_verdicts() {
        let ds = prepared(0.5, 4);
        let table = build_entropy_table(&ds).unwrap();
        let out = multiview_bootstrap(&ds, &table, &BootstrapConfig::default()).unwrap();
        let det = Detector::at_mean(&table);
        for it in &out.trace.iterations {
            for v in 0..2 {
                let expected = it
                    .selections
                    .iter()
                    .filter(|s| s.view == v)
                    .map(|s| {
                        (0..2)
                            .filter(|&j| j != v)
                            .filter(|&j| det.classify_pair(v, j, s.sample).unwrap().verdict == Verdict::ViewDisagreement)
                            .count()
                    })
                    .sum::<usize>();
                assert_eq!(it.views[v].pairs_filtered, expected);
            }
        }
        assert!(out.trace.total_filtered() > 0);
        assert_monotone_and_conserved(&ds, &out);
    }

    #[test]
    fn all_agree_filter_reproduces_baseline() {
        let ds = prepared(0.4, 5);
        let table = build_entropy_table(&ds).unwrap();
        let det = Detector::with_thresholds(&table, vec![f64::INFINITY; ordered_pairs(2).len()]).unwrap();
        let cfg = BootstrapConfig::default();
        let filtered = multiview_bootstrap_with(&ds, &det, &cfg).unwrap();
        let baseline = cotrain_baseline(&ds, &cfg).unwrap();
        assert_eq!(filtered, baseline);
    }

    #[test]
    fn runs_are_deterministic() {
        let ds = prepared(0.6, 6);
        let table = build_entropy_table(&ds).unwrap();
        let cfg = BootstrapConfig::default();
        assert_eq!(
            multiview_bootstrap(&ds, &table, &cfg).unwrap(),
            multiview_bootstrap(&ds, &table, &cfg).unwrap()
        );
    }

    #[test]
    fn recompute_mode_runs_and_conserves() {
        let ds = prepared(0.3, 7);
        let table = build_entropy_table(&ds).unwrap();
        let cfg = BootstrapConfig {
            recompute_entropy: true,
            max_iterations: 8,
            ..BootstrapConfig::default()
        };
        let out = multiview_bootstrap(&ds, &table, &cfg).unwrap();
        assert_eq!(out.trace.iterations.len(), 8);
        assert_monotone_and_conserved(&ds, &out);
    }

    #[test]
    fn missing_class_seed_is_an_error() {
        let mut ds = prepared(0.0, 8);
        ds.seeds.retain(|s| s.nominal_label != Foreground(2));
        assert!(matches!(
            cotrain_baseline(&ds, &BootstrapConfig::default()),
            Err(Error::EmptyClass(Foreground(2)))
        ));
    }

    #[test]
    fn table_must_match_pool() {
        let ds = prepared(0.2, 9);
        let other = prepared(0.2, 10);
        let mut shorter = other.clone();
        shorter.unlabeled.truncate(50);
        let table = build_entropy_table(&shorter).unwrap();
        assert!(multiview_bootstrap(&ds, &table, &BootstrapConfig::default()).is_err());
    }

    fn cross_modal_inputs(rate: f64, noise: f64, seed: u64) -> (MultiViewDataset, Vec<(ClassLabel, f64)>, Vec<Vec<f64>>) {
        let cfg = SyntheticConfig {
            disagreement_rate: rate,
            rng_seed: seed,
            ..SyntheticConfig::default()
        };
        let ds = generate_synthetic(&cfg).unwrap();
        let labels = noisy_oracle_labels(&ds.unlabeled, 0, &ds.class_labels(), noise, seed).unwrap();
        let weak = ds.unlabeled.iter().map(|s| s.views[1].clone()).collect();
        (ds, labels, weak)
    }

    #[test]
    fn label_conditioned_bit_is_constant_per_class() {
        // H(x | y_k) depends on y_k alone, so one bit per label; on clean data
        // the mean threshold therefore splits whole classes and S != L.
        let (_, labels, weak) = cross_modal_inputs(0.0, 0.0, 11);
        let out = cross_modality_bootstrap(&labels, &weak, weak.len(), CrossModalOptions::default()).unwrap();
        let r = &out.report;
        for a in 0..r.selected.len() {
            for b in 0..r.selected.len() {
                if labels[r.selected[a]].0 == labels[r.selected[b]].0 {
                    assert_eq!(r.view_entropy[a], r.view_entropy[b]);
                    assert_eq!(r.bits[a].1, r.bits[b].1);
                }
            }
            assert_eq!(r.kept[a], r.bits[a].0 == r.bits[a].1);
            assert_eq!(r.bits[a].0, r.label_entropy[a] < r.label_threshold);
        }
        let ln3 = 3f64.ln();
        assert!(r.label_entropy.iter().all(|&h| (0.0..=ln3).contains(&h)));
        assert!(r.kept_count() < weak.len());
    }

    #[test]
    fn cross_modal_rejects_disagreeing_pairs() {
        let (ds, labels, weak) = cross_modal_inputs(0.5, 0.0, 12);
        let out = cross_modality_bootstrap(&labels, &weak, weak.len(), CrossModalOptions::default()).unwrap();
        let r = &out.report;
        let (mut bad_kept, mut bad) = (0, 0);
        for (a, &k) in r.selected.iter().enumerate() {
            if ds.unlabeled[k].has_disagreement() {
                bad += 1;
                if r.kept[a] {
                    bad_kept += 1;
                }
            }
        }
        assert!(bad > 0);
        assert!((bad_kept as f64) < 0.2 * bad as f64, "{bad_kept} of {bad}");
        let unfiltered = cross_modality_bootstrap(
            &labels,
            &weak,
            weak.len(),
            CrossModalOptions {
                bypass_filter: true,
                ..CrossModalOptions::default()
            },
        )
        .unwrap();
        assert_eq!(unfiltered.report.kept_count(), weak.len());
        assert_eq!(unfiltered.report.bits, r.bits);
    }

    #[test]
    fn all_background_labels_fail_with_no_foreground() {
        let weak: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.1, 0.0]).collect();
        let labels = vec![(Background, 1.0); 20];
        let out = cross_modality_bootstrap(&labels, &weak, 20, CrossModalOptions::default());
        assert!(matches!(out, Err(Error::NoForeground)));
    }

    #[test]
    fn cross_modal_n_must_fit() {
        let weak: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let labels = vec![(Foreground(1), 1.0); 5];
        assert!(cross_modality_bootstrap(&labels, &weak, 6, CrossModalOptions::default()).is_err());
        assert!(cross_modality_bootstrap(&labels, &weak, 0, CrossModalOptions::default()).is_err());
        assert!(cross_modality_bootstrap(&labels[..4], &weak, 3, CrossModalOptions::default()).is_err());
    }

    #[test]
    fn cross_modal_takes_most_confident() {
        let weak: Vec<Vec<f64>> = (0..6).map(|i| vec![(i % 2) as f64 * 8.0 + i as f64 * 0.1]).collect();
        let labels: Vec<(ClassLabel, f64)> = (0..6)
            .map(|i| (if i % 2 == 0 { Foreground(1) } else { Foreground(2) }, [0.2, 0.9, 0.8, 0.3, 0.95, 0.99][i]))
            .collect();
        let out = cross_modality_bootstrap(&labels, &weak, 4, CrossModalOptions { bypass_filter: true, ..Default::default() }).unwrap();
        assert_eq!(out.report.selected, vec![5, 4, 1, 2]);
    }

    #[test]
    fn oracle_noise_rate() {
        let (ds, _, _) = cross_modal_inputs(0.0, 0.0, 13);
        let labels = noisy_oracle_labels(&ds.unlabeled, 0, &ds.class_labels(), 0.1, 13).unwrap();
        let flipped = labels
            .iter()
            .zip(&ds.unlabeled)
            .filter(|((l, _), s)| *l != s.true_view_labels[0])
            .count();
        // 300 draws at p = 0.1: mean 30, sd ≈ 5.2
        assert!((10..=50).contains(&flipped), "{flipped}");
        assert!(noisy_oracle_labels(&ds.unlabeled, 0, &ds.class_labels(), 1.5, 1).is_err());
    }
}
