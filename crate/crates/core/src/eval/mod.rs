//! Accuracy, per-class rating statistics, correlation against maximum-likelihood
//! baselines, and the asymmetric-structure ablation.

mod report;

pub use report::{export_report, write_csv, write_scatter, write_summary, Report};

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::bt::{mm_mle, pi_to_elo, EloConfig, MatchMatrix, MmOptions};
use crate::error::{ensure_len, Error, Result};
use crate::nbtr::{accuracy_of, train, Dataset, NbtrModel, Structure, TrainConfig, TrainReport};
use crate::scalar::Scalar;

/// Fraction of records whose most probable item is the winner, with ties in
/// probability going to the lowest index.
pub fn accuracy<T: Scalar>(model: &NbtrModel<T>, data: &Dataset<T>) -> Result<f64> {
    model.check_dataset(data)?;
    accuracy_of(model, data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub class: usize,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single item.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassStats {
    /// One entry per class, ascending by class.
    pub classes: Vec<ClassSummary>,
    /// `(class, rating)` for every item, in input order.
    pub scatter: Vec<(usize, f64)>,
}

impl ClassStats {
    pub fn means(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.mean).collect()
    }

    pub fn mean_of(&self, class: usize) -> Option<f64> {
        self.classes.iter().find(|c| c.class == class).map(|c| c.mean)
    }

    pub fn means_strictly_increasing(&self) -> bool {
        self.classes.windows(2).all(|w| w[0].mean < w[1].mean)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn rate_all<T: Scalar>(model: &NbtrModel<T>, items: &[Vec<T>]) -> Result<Vec<f64>> {
    let dim = model.feature_dim();
    let mut out = Vec::with_capacity(items.len());
    for chunk in items.chunks(1024) {
        let mut batch = Array2::zeros((chunk.len(), dim));
        for (mut row, x) in batch.rows_mut().into_iter().zip(chunk) {
            ensure_len(dim, x.len(), "item feature length")?;
            row.iter_mut().zip(x).for_each(|(r, v)| *r = *v);
        }
        out.extend(model.rate_items(batch.view())?.into_iter().map(|r| r.as_f64()));
    }
    Ok(out)
}

/// Mean and standard deviation of item ratings for each class in `keys`.
/// Every item's class must be a key and every key must have an item.
pub fn class_stats<T: Scalar>(model: &NbtrModel<T>, items: &[Vec<T>], classes: &[usize], keys: &[usize]) -> Result<ClassStats> {
    if items.is_empty() {
        return Err(Error::Empty("class statistics items"));
    }
    ensure_len(items.len(), classes.len(), "class labels")?;
    let mut groups: BTreeMap<usize, Vec<f64>> = keys.iter().map(|&k| (k, Vec::new())).collect();
    let ratings = rate_all(model, items)?;
    for (&c, &r) in classes.iter().zip(&ratings) {
        groups
            .get_mut(&c)
            .ok_or_else(|| Error::Config(format!("unknown class {c}")))?
            .push(r);
    }
    let mut summaries = Vec::with_capacity(groups.len());
    for (class, values) in groups {
        if values.is_empty() {
            return Err(Error::Config(format!("class {class} has no items")));
        }
        let (mean, std) = mean_std(&values);
        summaries.push(ClassSummary {
            class,
            count: values.len(),
            mean,
            std,
        });
    }
    Ok(ClassStats {
        classes: summaries,
        scatter: classes.iter().copied().zip(ratings).collect(),
    })
}

/// Maximum-likelihood scores of all items from their match record, on the Elo scale.
pub fn mle_baseline(matches: &MatchMatrix, elo: &EloConfig<f64>, opts: &MmOptions) -> Result<Vec<f64>> {
    let fit = mm_mle::<f64>(matches, opts)?;
    fit.scores.as_slice().iter().map(|&p| pi_to_elo(p, elo)).collect()
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    ensure_len(a.len(), b.len(), "correlation inputs")?;
    if a.len() < 3 {
        return Err(Error::Degenerate(format!("correlation needs at least 3 points, got {}", a.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("correlation input is not finite".into()));
    }
    Ok(())
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Degenerate("correlation input has zero variance".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, with tied values sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        order[start..end].iter().for_each(|&i| ranks[i] = rank);
        start = end;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    pearson(&average_ranks(a), &average_ranks(b))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationReport {
    pub pearson: f64,
    pub spearman: f64,
    /// `(item_id, learned rating, baseline Elo)` per evaluated item.
    pub pairs: Vec<(usize, f64, f64)>,
}

/// Correlation between the model's ratings and a baseline over the items in
/// `item_ids`; `features` and `baseline` are indexed by item id.
pub fn correlation<T: Scalar>(
    model: &NbtrModel<T>,
    item_ids: &[usize],
    features: &[Vec<T>],
    baseline: &[f64],
) -> Result<CorrelationReport> {
    ensure_len(features.len(), baseline.len(), "baseline ratings")?;
    let mut chosen = Vec::with_capacity(item_ids.len());
    for &id in item_ids {
        if id >= features.len() {
            return Err(Error::IndexOutOfRange {
                index: id,
                len: features.len(),
            });
        }
        chosen.push(features[id].clone());
    }
    let learned = rate_all(model, &chosen)?;
    let base: Vec<f64> = item_ids.iter().map(|&id| baseline[id]).collect();
    Ok(CorrelationReport {
        pearson: pearson(&learned, &base)?,
        spearman: spearman(&learned, &base)?,
        pairs: item_ids.iter().zip(learned).zip(base).map(|((&id, l), b)| (id, l, b)).collect(),
    })
}

/// The three structures compared on asymmetric data.
pub const ABLATION_STRUCTURES: [(&str, Structure); 3] = [
    ("no-adjuster", Structure::Symmetric),
    ("no-skip", Structure::Asymmetric { skip: false }),
    ("full", Structure::Asymmetric { skip: true }),
];

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRun {
    pub name: String,
    pub structure: Structure,
    pub accuracy: f64,
    pub class_stats: ClassStats,
    pub train_report: TrainReport,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AblationReport {
    pub runs: Vec<AblationRun>,
}

impl AblationReport {
    pub fn run(&self, name: &str) -> Option<&AblationRun> {
        self.runs.iter().find(|r| r.name == name)
    }
}

/// Held-out records plus the individual items and classes used for class statistics.
#[derive(Debug, Clone, Copy)]
pub struct EvalSet<'a, T> {
    pub data: &'a Dataset<T>,
    pub items: &'a [Vec<T>],
    pub classes: &'a [usize],
    pub keys: &'a [usize],
}

/// Trains every structure with the same seed and budget and evaluates each on `test`.
pub fn ablation_asymmetric<T: Scalar>(train_data: &Dataset<T>, test: EvalSet<'_, T>, cfg: &TrainConfig) -> Result<AblationReport> {
    let mut runs = Vec::with_capacity(ABLATION_STRUCTURES.len());
    for (name, structure) in ABLATION_STRUCTURES {
        let cfg = TrainConfig {
            structure,
            ..cfg.clone()
        };
        let model = cfg.build_model(train_data)?;
        let (model, train_report) = train(model, train_data, &cfg, None)?;
        runs.push(AblationRun {
            name: name.to_string(),
            structure,
            accuracy: accuracy(&model, test.data)?,
            class_stats: class_stats(&model, test.items, test.classes, test.keys)?,
            train_report,
        });
    }
    Ok(AblationReport { runs })
}
