//! Command-line interface: `generate`, `detect`, `bootstrap` and `sweep`.
//!
//! Usage and validation problems exit with code 2, runtime failures and
//! sweeps with failed trials exit with code 1.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bootstrap::{
    cotrain_baseline, cross_modality_bootstrap, multiview_bootstrap, noisy_oracle_labels, test_ccr, BootstrapConfig,
    CrossModalOptions,
};
use crate::dataset::{generate_synthetic, load_dataset, save_dataset, split_labeled_unlabeled, SyntheticConfig};
use crate::disagreement::{build_entropy_table, detection_roc, quantile_grid, Detector, Verdict};
use crate::error::Error;
use crate::eval::{run_sweep, Method, TrialSetup};
use crate::plot::{roc_svg, sweep_svg};

#[derive(Debug, Parser)]
#[command(name = "mvdisagree", version, about = "Detect view disagreement and bootstrap multi-view classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-view dataset as JSON lines.
    Generate(GenerateArgs),
    /// Classify every unlabeled sample and write verdicts plus detection ROC.
    Detect(DetectArgs),
    /// Run one learner on a dataset and write its trace.
    Bootstrap(BootstrapArgs),
    /// Sweep disagreement rates over several methods and trials.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of foreground classes.
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Training samples per foreground class (and redundant background samples).
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    /// Test samples per foreground class; defaults to half of --per-class.
    #[arg(long)]
    pub test_per_class: Option<usize>,
    /// Fraction of redundant-foreground samples to corrupt.
    #[arg(long, default_value_t = 0.0, value_parser = unit_interval)]
    pub disagreement: f64,
    /// Distance between neighbouring class means, in units of the class std.
    #[arg(long, default_value_t = 4.0)]
    pub separation: f64,
    /// Labeled seeds per class.
    #[arg(long, default_value_t = 5)]
    pub seeds_per_class: usize,
    /// Do not seed the learners with background samples.
    #[arg(long)]
    pub no_background_seed: bool,
    /// Leave out the redundant background samples (implies --no-background-seed).
    #[arg(long)]
    pub no_redundant_background: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Threshold quantile steps for the ROC.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub roc_steps: u32,
    /// Output directory for verdicts.csv, roc.csv and roc.svg.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "filtered")]
    pub method: Method,
    /// Samples labeled per view per iteration (multi-view methods) or size of
    /// the selected set (cross-modal methods, defaults to the whole pool).
    #[arg(long)]
    pub n: Option<usize>,
    /// Maximum number of iterations.
    #[arg(long, default_value_t = 100)]
    pub t: usize,
    /// Rebuild the entropy table on the remaining pool every iteration.
    #[arg(long)]
    pub recompute: bool,
    #[arg(long)]
    pub uniform_prior: bool,
    /// Select the top N overall instead of N per predicted class.
    #[arg(long)]
    pub unbalanced: bool,
    /// Symmetric noise on the oracle labels of the cross-modal methods.
    #[arg(long, default_value_t = 0.1, value_parser = unit_interval)]
    pub label_noise: f64,
    /// View that supplies the oracle labels for the cross-modal methods.
    #[arg(long, default_value_t = 0)]
    pub strong_view: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trace CSV (multi-view methods) or selection report CSV (cross-modal).
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// `start:stop:step` or a comma-separated list of rates.
    #[arg(long)]
    pub rates: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub label_noise: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub seeds_per_class: Option<usize>,
    /// TOML file with the same keys as the flags (underscores for dashes).
    /// Flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for sweep.csv, trials.csv and sweep.svg.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    methods: Option<Vec<String>>,
    rates: Option<RatesValue>,
    trials: Option<usize>,
    seed: Option<u64>,
    jobs: Option<usize>,
    label_noise: Option<f64>,
    n: Option<usize>,
    t: Option<usize>,
    per_class: Option<usize>,
    seeds_per_class: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RatesValue {
    List(Vec<f64>),
    Spec(String),
}

/// Resolved sweep parameters after merging flags over the config file.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub methods: Vec<Method>,
    pub rates: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub setup: TrialSetup,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("{failed} of {total} trials failed; see trials.csv")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(Error::Config { .. }) => 2,
            CliError::Run(_) | CliError::Partial { .. } => 1,
        }
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} must be within [0, 1]"))
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_rates(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let rates = if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("rates: `{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err("rates: expected start:stop:step".into());
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err("rates: need step > 0 and stop >= start".into());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounded so that 0:0.9:0.1 yields 0.3 rather than 0.30000000000000004.
        (0..=n).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("rates: `{p}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?
    };
    if rates.is_empty() {
        return Err("rates: empty".into());
    }
    if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(format!("rates: {r} must be within [0, 1]"));
    }
    Ok(rates)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Error> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn make_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

pub fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let mut config = SyntheticConfig::with_layout(args.classes, args.per_class, vec![2, 2], args.separation);
    if let Some(t) = args.test_per_class {
        config.test_per_class = t;
    }
    config.disagreement_rate = args.disagreement;
    config.redundant_background = !args.no_redundant_background;
    config.rng_seed = args.seed;
    config.validate()?;
    let dataset = generate_synthetic(&config)?;
    let background_seed = !(args.no_background_seed || args.no_redundant_background);
    let dataset = split_labeled_unlabeled(dataset, args.seeds_per_class, background_seed, args.seed)?;
    save_dataset(&dataset, &args.output)?;

    let labels = dataset.class_labels();
    let counts: Vec<String> = labels
        .iter()
        .map(|l| {
            let n = dataset.unlabeled.iter().filter(|s| s.nominal_label == *l).count();
            format!("{l}={n}")
        })
        .collect();
    let fg = dataset.unlabeled.iter().filter(|s| s.nominal_label.is_foreground()).count();
    println!(
        "wrote {}: {} views, {} seeds, {} unlabeled ({}), {} test; {} of {} foreground samples corrupted",
        args.output.display(),
        dataset.n_views(),
        dataset.seeds.len(),
        dataset.unlabeled.len(),
        counts.join(" "),
        dataset.test.len(),
        dataset.disagreement_count(),
        fg
    );
    Ok(())
}

pub fn cmd_detect(args: DetectArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.data)?;
    let table = build_entropy_table(&dataset)?;
    let detector = Detector::at_mean(&table);
    let pairs = table.pairs();
    make_dir(&args.output)?;

    let verdict_path = args.output.join("verdicts.csv");
    let mut w = csv::Writer::from_writer(create(&verdict_path)?);
    let mut header = vec!["sample".to_string(), "verdict".to_string(), "truth".to_string()];
    header.extend(pairs.iter().map(|(i, j)| format!("m_{i}_{j}")));
    header.extend(pairs.iter().map(|(i, j)| format!("h_{i}_{j}")));
    w.write_record(&header).map_err(Error::from)?;
    let mut correct = 0usize;
    for (k, sample) in dataset.unlabeled.iter().enumerate() {
        let verdict = detector.classify_sample(k)?;
        let truth = if sample.is_redundant_foreground() {
            Verdict::RedundantForeground
        } else if sample.is_redundant_background() {
            Verdict::RedundantBackground
        } else {
            Verdict::ViewDisagreement
        };
        correct += usize::from(verdict == truth);
        let mut row = vec![k.to_string(), verdict.name().to_string(), truth.name().to_string()];
        for &(i, j) in &pairs {
            row.push(u8::from(detector.bit(i, j, k)?).to_string());
        }
        for &(i, j) in &pairs {
            row.push(table.entropy(i, j, k)?.to_string());
        }
        w.write_record(&row).map_err(Error::from)?;
    }
    let inner = w.into_inner().map_err(|e| Error::io(&verdict_path, e.into_error()))?;
    finish(inner, &verdict_path)?;

    let roc = detection_roc(&dataset.unlabeled, &table, &quantile_grid(args.roc_steps as usize))?;
    let roc_path = args.output.join("roc.csv");
    let mut w = create(&roc_path)?;
    roc.write_csv(&mut w)?;
    finish(w, &roc_path)?;
    write_text(&args.output.join("roc.svg"), &roc_svg(&roc))?;

    let n = dataset.unlabeled.len().max(1);
    let auc = |c: &crate::disagreement::RocCurve| c.auc.map_or("undefined".to_string(), |a| format!("{a:.3}"));
    println!(
        "{} samples, {} verdicts match ground truth ({:.1}%); foreground AUC {}, background AUC {}",
        dataset.unlabeled.len(),
        correct,
        100.0 * correct as f64 / n as f64,
        auc(&roc.foreground),
        auc(&roc.background)
    );
    Ok(())
}

pub fn cmd_bootstrap(args: BootstrapArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.data)?;
    match args.method {
        Method::Baseline | Method::Filtered => {
            let config = BootstrapConfig {
                n_per_iteration: args.n.unwrap_or(6),
                max_iterations: args.t,
                balance_classes: !args.unbalanced,
                recompute_entropy: args.recompute,
                uniform_prior: args.uniform_prior,
            };
            config.validate()?;
            let outcome = if args.method == Method::Filtered {
                let table = build_entropy_table(&dataset)?;
                multiview_bootstrap(&dataset, &table, &config)?
            } else {
                cotrain_baseline(&dataset, &config)?
            };
            let mut w = create(&args.output)?;
            outcome.trace.write_csv(&mut w)?;
            finish(w, &args.output)?;
            let ccr: Vec<String> = outcome
                .test_ccr(&dataset)?
                .iter()
                .enumerate()
                .map(|(v, c)| format!("view {v} {c:.3}"))
                .collect();
            println!(
                "{}: {} iterations, {} pairs filtered; test CCR {}",
                args.method,
                outcome.trace.iterations.len(),
                outcome.trace.total_filtered(),
                ccr.join(", ")
            );
        }
        Method::CrossModal | Method::CrossModalUnfiltered => {
            if dataset.n_views() != 2 || args.strong_view > 1 {
                return Err(CliError::Usage("cross-modal methods need two views and --strong-view 0 or 1".into()));
            }
            let weak = 1 - args.strong_view;
            let labels = noisy_oracle_labels(
                &dataset.unlabeled,
                args.strong_view,
                &dataset.class_labels(),
                args.label_noise,
                args.seed,
            )?;
            let points: Vec<Vec<f64>> = dataset.unlabeled.iter().map(|s| s.views[weak].clone()).collect();
            let n = args.n.unwrap_or(points.len());
            let options = CrossModalOptions {
                bypass_filter: args.method == Method::CrossModalUnfiltered,
                uniform_prior: args.uniform_prior,
            };
            let outcome = cross_modality_bootstrap(&labels, &points, n, options)?;
            let report = &outcome.report;
            let mut w = csv::Writer::from_writer(create(&args.output)?);
            w.write_record(["sample", "label", "h_label", "h_view", "m_label", "m_view", "kept"])
                .map_err(Error::from)?;
            for (r, &k) in report.selected.iter().enumerate() {
                w.write_record([
                    k.to_string(),
                    labels[k].0.to_string(),
                    report.label_entropy[r].to_string(),
                    report.view_entropy[r].to_string(),
                    u8::from(report.bits[r].0).to_string(),
                    u8::from(report.bits[r].1).to_string(),
                    u8::from(report.kept[r]).to_string(),
                ])
                .map_err(Error::from)?;
            }
            let inner = w.into_inner().map_err(|e| Error::io(&args.output, e.into_error()))?;
            finish(inner, &args.output)?;
            let ccr = test_ccr(&outcome.classifier, &dataset.test, weak)?;
            println!(
                "{}: kept {} of {} pairs; weak view {weak} test CCR {ccr:.3}",
                args.method,
                report.kept_count(),
                report.selected.len()
            );
        }
    }
    Ok(())
}

/// Merges flags over an optional config file and validates the result.
pub fn resolve_sweep(args: &SweepArgs) -> Result<SweepPlan, CliError> {
    let file: SweepFile = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => SweepFile::default(),
    };

    let methods = match (&args.methods, &file.methods) {
        (Some(m), _) => m.clone(),
        (None, Some(names)) => names
            .iter()
            .map(|n| n.parse::<Method>())
            .collect::<Result<_, _>>()
            .map_err(CliError::Usage)?,
        (None, None) => vec![Method::Baseline, Method::Filtered],
    };
    let rates = match (&args.rates, &file.rates) {
        (Some(s), _) => parse_rates(s).map_err(CliError::Usage)?,
        (None, Some(RatesValue::Spec(s))) => parse_rates(s).map_err(CliError::Usage)?,
        (None, Some(RatesValue::List(v))) => parse_rates(
            &v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
        )
        .map_err(CliError::Usage)?,
        (None, None) => parse_rates("0:0.9:0.1").map_err(CliError::Usage)?,
    };
    let trials = args.trials.or(file.trials).unwrap_or(10);
    if trials == 0 {
        return Err(CliError::Usage("trials: must be at least 1".into()));
    }
    let jobs = args.jobs.or(file.jobs);
    if jobs == Some(0) {
        return Err(CliError::Usage("jobs: must be at least 1".into()));
    }
    let label_noise = args.label_noise.or(file.label_noise).unwrap_or(0.1);
    if !(0.0..=1.0).contains(&label_noise) {
        return Err(CliError::Usage(format!("label-noise: {label_noise} must be within [0, 1]")));
    }

    let mut setup = TrialSetup {
        label_noise,
        ..TrialSetup::default()
    };
    if let Some(per_class) = args.per_class.or(file.per_class) {
        setup.synthetic = SyntheticConfig::with_layout(2, per_class, vec![2, 2], 4.0);
    }
    if let Some(n) = args.n.or(file.n) {
        setup.bootstrap.n_per_iteration = n;
    }
    if let Some(t) = args.t.or(file.t) {
        setup.bootstrap.max_iterations = t;
    }
    if let Some(s) = args.seeds_per_class.or(file.seeds_per_class) {
        setup.seeds_per_class = s;
    }
    setup.validate()?;
    Ok(SweepPlan {
        methods,
        rates,
        trials,
        seed: args.seed.or(file.seed).unwrap_or(0),
        jobs,
        setup,
    })
}

pub fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let plan = resolve_sweep(&args)?;
    let sweep = || run_sweep(&plan.methods, &plan.rates, plan.trials, plan.seed, &plan.setup);
    let result = match plan.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("jobs: {e}")))?
            .install(sweep)?,
        None => sweep()?,
    };

    make_dir(&args.output)?;
    let summary = args.output.join("sweep.csv");
    let mut w = create(&summary)?;
    result.write_summary_csv(&mut w)?;
    finish(w, &summary)?;
    let trials = args.output.join("trials.csv");
    let mut w = create(&trials)?;
    result.write_trials_csv(&mut w)?;
    finish(w, &trials)?;
    write_text(&args.output.join("sweep.svg"), &sweep_svg(&result))?;

    for c in &result.cells {
        println!(
            "{:<22} rate {:.2} view {}: CCR {:.3} ± {:.3} ({} trials)",
            c.method.name(),
            c.rate,
            c.view,
            c.mean_ccr,
            c.std_ccr,
            c.trials
        );
    }
    match result.failures() {
        0 => Ok(()),
        failed => Err(CliError::Partial {
            failed,
            total: result.records.len(),
        }),
    }
}
