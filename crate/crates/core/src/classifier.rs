//! Gaussian Bayes classifiers with diagonal covariance.

use crate::dataset::{ClassLabel, LabeledPoint};
use crate::error::{Error, Result};
use crate::math::normalize_log_weights;

/// Per-dimension variances never drop below this.
pub const VARIANCE_FLOOR: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FitOptions {
    /// Ignore class frequencies and use equal priors.
    pub uniform_prior: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBayesClassifier {
    classes: Vec<ClassLabel>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    priors: Vec<f64>,
    dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: ClassLabel,
    pub confidence: f64,
}

impl GaussianBayesClassifier {
    pub fn fit(data: &[LabeledPoint], classes: &[ClassLabel]) -> Result<Self> {
        Self::fit_with(data, classes, FitOptions::default())
    }

    /// Fits one diagonal Gaussian per class in `classes` (maximum-likelihood
    /// mean and variance, variance floored). Every class needs a sample and
    /// every sample must carry one of the classes.
    pub fn fit_with(data: &[LabeledPoint], classes: &[ClassLabel], options: FitOptions) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        let dim = data.first().map(|(x, _)| x.len()).ok_or(Error::Empty)?;
        let mut counts = vec![0usize; classes.len()];
        let mut sums = vec![vec![0.0; dim]; classes.len()];
        for (x, label) in data {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            let c = classes
                .iter()
                .position(|l| l == label)
                .ok_or(Error::UnknownClass(*label))?;
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(x) {
                *s += v;
            }
        }
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(Error::EmptyClass(classes[c]));
        }
        let means: Vec<Vec<f64>> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &n)| s.iter().map(|v| v / n as f64).collect())
            .collect();
        let mut variances = vec![vec![0.0; dim]; classes.len()];
        for (x, label) in data {
            let c = classes.iter().position(|l| l == label).expect("checked above");
            for ((acc, v), m) in variances[c].iter_mut().zip(x).zip(&means[c]) {
                *acc += (v - m).powi(2);
            }
        }
        for (var, &n) in variances.iter_mut().zip(&counts) {
            for v in var.iter_mut() {
                *v = (*v / n as f64).max(VARIANCE_FLOOR);
            }
        }
        let total = data.len() as f64;
        let priors = if options.uniform_prior {
            vec![1.0 / classes.len() as f64; classes.len()]
        } else {
            counts.iter().map(|&n| n as f64 / total).collect()
        };
        Ok(GaussianBayesClassifier {
            classes: classes.to_vec(),
            means,
            variances,
            priors,
            dim,
        })
    }

    pub fn classes(&self) -> &[ClassLabel] {
        &self.classes
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unnormalized log posterior `ln prior + ln N(x; μ_c, diag σ²_c)` per class.
    pub fn log_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self
            .means
            .iter()
            .zip(&self.variances)
            .zip(&self.priors)
            .map(|((mean, var), prior)| {
                let ll: f64 = x
                    .iter()
                    .zip(mean)
                    .zip(var)
                    .map(|((xd, m), v)| {
                        -0.5 * ((xd - m).powi(2) / v + (2.0 * std::f64::consts::PI * v).ln())
                    })
                    .sum();
                prior.ln() + ll
            })
            .collect())
    }

    /// Posterior over [`classes`](Self::classes), normalized in log space.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(normalize_log_weights(&self.log_scores(x)?))
    }

    /// Most probable class; ties go to the lower class index.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        Ok(argmax(&self.classes, &self.predict_proba(x)?))
    }
}

pub(crate) fn argmax(classes: &[ClassLabel], probs: &[f64]) -> Prediction {
    let mut best = 0;
    for (c, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = c;
        }
    }
    Prediction {
        label: classes[best],
        confidence: probs[best],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, split_labeled_unlabeled, SyntheticConfig};
    use proptest::prelude::*;
    use ClassLabel::*;

    fn two_class() -> Vec<ClassLabel> {
        vec![Foreground(1), Foreground(2)]
    }

    #[test]
    fn one_sample_per_class_sits_at_the_floor() {
        let data = vec![(vec![1.0, 2.0], Foreground(1)), (vec![-3.0, 0.5], Foreground(2))];
        let m = GaussianBayesClassifier::fit(&data, &two_class()).unwrap();
        assert_eq!(m.means()[0], vec![1.0, 2.0]);
        assert_eq!(m.means()[1], vec![-3.0, 0.5]);
        for v in m.variances() {
            assert_eq!(v, &vec![VARIANCE_FLOOR; 2]);
        }
    }

    #[test]
    fn priors_follow_counts() {
        let mut data: Vec<LabeledPoint> = (0..10).map(|i| (vec![i as f64], Foreground(1))).collect();
        data.extend((0..30).map(|i| (vec![100.0 + i as f64], Foreground(2))));
        let m = GaussianBayesClassifier::fit(&data, &two_class()).unwrap();
        assert_eq!(m.priors(), &[0.25, 0.75]);
        let u = GaussianBayesClassifier::fit_with(&data, &two_class(), FitOptions { uniform_prior: true }).unwrap();
        assert_eq!(u.priors(), &[0.5, 0.5]);
    }

    #[test]
    fn empty_class_is_named() {
        let data = vec![(vec![1.0], Foreground(1))];
        let err = GaussianBayesClassifier::fit(&data, &[Foreground(1), Background]).unwrap_err();
        assert!(matches!(err, Error::EmptyClass(Background)));
        let err = GaussianBayesClassifier::fit(&data, &[Foreground(1)]).unwrap_err();
        assert!(matches!(err, Error::TooFewClasses(1)));
    }

    #[test]
    fn fits_default_seed_perfectly() {
        let cfg = SyntheticConfig {
            rng_seed: 21,
            ..SyntheticConfig::default()
        };
        let ds = split_labeled_unlabeled(generate_synthetic(&cfg).unwrap(), 5, true, 21).unwrap();
        for view in 0..2 {
            let seed = ds.seed_set(view);
            let m = GaussianBayesClassifier::fit(&seed, &ds.class_labels()).unwrap();
            let correct = seed
                .iter()
                .filter(|(x, l)| m.predict(x).unwrap().label == *l)
                .count();
            assert_eq!(correct, seed.len());
        }
    }

    #[test]
    fn point_at_class_mean_is_most_probable() {
        let data = vec![
            (vec![0.0], Foreground(1)),
            (vec![1.0], Foreground(1)),
            (vec![5.0], Foreground(2)),
            (vec![6.0], Foreground(2)),
        ];
        let m = GaussianBayesClassifier::fit(&data, &two_class()).unwrap();
        assert_eq!(m.predict(&[0.5]).unwrap().label, Foreground(1));
        assert_eq!(m.predict(&[5.5]).unwrap().label, Foreground(2));
    }

    #[test]
    fn midpoint_splits_evenly_and_ties_go_low() {
        let data = vec![
            (vec![-1.5], Foreground(1)),
            (vec![-0.5], Foreground(1)),
            (vec![0.5], Foreground(2)),
            (vec![1.5], Foreground(2)),
        ];
        let m = GaussianBayesClassifier::fit(&data, &two_class()).unwrap();
        let p = m.predict_proba(&[0.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let pred = m.predict(&[0.0]).unwrap();
        assert_eq!(pred.label, Foreground(1));
        assert!((pred.confidence - 0.5).abs() < 1e-12);
    }

    #[test]
    fn argmax_returns_probability() {
        let classes = [Foreground(1), Foreground(2), Background];
        let p = argmax(&classes, &[0.7, 0.2, 0.1]);
        assert_eq!(p, Prediction { label: Foreground(1), confidence: 0.7 });
        let tie = argmax(&classes[..2], &[0.5, 0.5]);
        assert_eq!(tie.label, Foreground(1));
    }

    #[test]
    fn far_queries_stay_normalized() {
        let data = vec![(vec![0.0, 0.0], Foreground(1)), (vec![0.1, 0.0], Foreground(1)), (vec![4.0, 4.0], Foreground(2)), (vec![4.2, 3.9], Foreground(2))];
        let m = GaussianBayesClassifier::fit(&data, &two_class()).unwrap();
        for x in [[1e4, -1e4], [1e6, 1e6], [-20.0, 30.0]] {
            let p = m.predict_proba(&x).unwrap();
            assert!(p.iter().all(|v| v.is_finite()));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(m.predict(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn posterior_normalized_and_translation_invariant(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0usize..3), 6..40),
            shift in (-50.0f64..50.0, -50.0f64..50.0),
            q in (-15.0f64..15.0, -15.0f64..15.0),
        ) {
            let classes = [Foreground(1), Foreground(2), Background];
            let mut data: Vec<LabeledPoint> = pts.iter().map(|&(a, b, c)| (vec![a, b], classes[c])).collect();
            for (c, &class) in classes.iter().enumerate() {
                data.push((vec![c as f64, -(c as f64)], class));
            }
            let m = GaussianBayesClassifier::fit(&data, &classes).unwrap();
            let p = m.predict_proba(&[q.0, q.1]).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let pred = m.predict(&[q.0, q.1]).unwrap();
            prop_assert!(pred.confidence > 0.0 && pred.confidence <= 1.0);

            let moved: Vec<LabeledPoint> = data.iter().map(|(x, l)| (vec![x[0] + shift.0, x[1] + shift.1], *l)).collect();
            let m2 = GaussianBayesClassifier::fit(&moved, &classes).unwrap();
            let p2 = m2.predict_proba(&[q.0 + shift.0, q.1 + shift.1]).unwrap();
            // compare only when the winner is not a near-tie
            let mut sorted = p.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if sorted[0] - sorted[1] > 1e-6 {
                prop_assert_eq!(pred.label, m2.predict(&[q.0 + shift.0, q.1 + shift.1]).unwrap().label);
            }
            for (a, b) in p.iter().zip(&p2) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }
    }
}
