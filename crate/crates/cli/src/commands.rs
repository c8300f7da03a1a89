use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use nbtr_core::bt::{
    check_ford_condition, elo_rate_history, history_matrix, mm_mle, mm_mle_home, read_history, read_match_matrix,
    write_history, write_match_matrix, write_scores, EloConfig, FordCheck, MmOptions,
};
use nbtr_core::datagen::{
    gen_digit_records, gen_planted_dataset, read_dataset, read_features_from, write_dataset, write_features,
    Confusion, DigitGenConfig, PlantedConfig, RatingMap,
};
use nbtr_core::eval::{
    ablation_asymmetric, accuracy, class_stats, correlation, export_report, mle_baseline, write_summary, EvalSet, Report,
};
use nbtr_core::io::write_atomic;
use nbtr_core::nbtr::{train, Structure, TrainConfig, TrainReport};
use nbtr_core::nn::AdamConfig;
use nbtr_core::{Dataset, Error, NbtrModel};

use crate::{Command, ConfusionKind, EloArgs, EvalArgs, GenArgs, MleArgs, Mode, RateArgs, Task, TrainArgs, TrainOptions};

pub enum Failure {
    /// Bad invocation: exit code 2.
    Usage(String),
    /// Domain or I/O failure: exit code 1.
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

const DIGIT_DIMS: [usize; 2] = [512, 512];
const PLANTED_DIMS: [usize; 2] = [64, 64];

fn ci_mode() -> bool {
    std::env::var("CI").is_ok_and(|v| !v.is_empty() && v != "0" && v != "false")
}

fn resolve_seed(seed: Option<u64>) -> Outcome<u64> {
    match seed {
        Some(s) => Ok(s),
        None if ci_mode() => Err(Failure::Usage("--seed is required when CI is set".into())),
        None => Ok(0),
    }
}

fn log_config(command: &Command, seed: Option<u64>) {
    let mut config = serde_json::to_value(command).unwrap_or(Value::Null);
    if let (Some(s), Value::Object(map)) = (seed, &mut config) {
        map.insert("resolved_seed".into(), json!(s));
    }
    eprintln!("nbtr: resolved config {config}");
}

fn manifest_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.manifest.json"))
}

fn write_manifest(path: &Path, command: &Command, seed: Option<u64>, outputs: &[PathBuf], extra: Value) -> Outcome {
    let mut manifest = json!({
        "tool": "nbtr",
        "version": env!("CARGO_PKG_VERSION"),
        "config": command,
        "seed": seed,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut manifest, extra) {
        m.extend(e);
    }
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Domain(e.to_string()))?;
    write_atomic(path, format!("{text}\n").as_bytes())?;
    Ok(())
}

fn save(path: &Path, fill: impl FnOnce(&mut Vec<u8>) -> nbtr_core::Result<()>) -> Outcome {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    write_atomic(path, &buf)?;
    Ok(())
}

/// Writes to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, fill: impl FnOnce(&mut Vec<u8>) -> nbtr_core::Result<()>) -> Outcome {
    match out {
        Some(p) => save(p, fill),
        None => {
            let mut buf = Vec::new();
            fill(&mut buf)?;
            std::io::stdout().write_all(&buf)?;
            Ok(())
        }
    }
}

/// A one-column CSV of non-negative integers under `header`.
fn read_index_column(path: &Path, header: &str) -> Outcome<Vec<usize>> {
    let reader = BufReader::new(File::open(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?);
    let mut values = Vec::new();
    let mut seen_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        if !seen_header {
            if field != header {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected header `{header}`"),
                }
                .into());
            }
            seen_header = true;
            continue;
        }
        values.push(field.parse().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("bad {header} {field:?}: {e}"),
        })?);
    }
    Ok(values)
}

fn read_items(path: &Path) -> Outcome<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    Ok(read_features_from(file)?)
}

fn load_dataset(path: &Path) -> Outcome<Dataset> {
    read_dataset(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Outcome<NbtrModel> {
    NbtrModel::load(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

pub fn run(command: Command) -> Outcome {
    match &command {
        Command::Gen(a) => gen(a, &command),
        Command::Train(a) => train_cmd(a, &command),
        Command::Rate(a) => rate(a, &command),
        Command::Mle(a) => mle(a, &command),
        Command::Elo(a) => elo(a, &command),
        Command::Eval(a) => eval(a, &command),
    }
}

fn gen(a: &GenArgs, command: &Command) -> Outcome {
    let seed = resolve_seed(a.seed)?;
    log_config(command, Some(seed));
    std::fs::create_dir_all(&a.out)?;
    let path = |name: &str| a.out.join(name);
    let mut outputs = Vec::new();
    let extra = match a.task {
        Task::Digits => {
            let cfg = DigitGenConfig {
                n_records: a.n,
                n_test: a.n_test.unwrap_or(a.n / 6),
                feature_dim: a.feature_dim.unwrap_or(16),
                noise_sigma: a.noise,
                confusion_rate: a.confusion,
                confusion: match a.confusion_kind {
                    ConfusionKind::Adjacent => Confusion::Adjacent,
                    ConfusionKind::Uniform => Confusion::Uniform,
                },
                seed,
                asymmetric: a.asymmetric,
                left_factor: a.left_factor,
                left_offset: a.left_offset,
            };
            let data = gen_digit_records::<f64>(&cfg)?;
            for (name, ds) in [("train.csv", &data.train.data), ("test.csv", &data.test.data)] {
                save(&path(name), |b| write_dataset(ds, b))?;
                outputs.push(path(name));
            }
            save(&path("test_items.csv"), |b| write_features(&data.test.items, b))?;
            let classes: String = std::iter::once("class".to_string())
                .chain(data.test.labels.iter().map(u8::to_string))
                .map(|l| l + "\n")
                .collect();
            write_atomic(&path("test_classes.csv"), classes.as_bytes())?;
            outputs.extend([path("test_items.csv"), path("test_classes.csv")]);
            let rule = if a.asymmetric {
                json!({
                    "kind": "asymmetric",
                    "left_factor": a.left_factor,
                    "left_offset": a.left_offset,
                    "left_wins_if": format!("{} * left + {} > right", a.left_factor, a.left_offset),
                })
            } else {
                json!({ "kind": "symmetric", "left_wins_if": "left > right" })
            };
            json!({ "rule": rule, "n_train": cfg.n_records, "n_test": cfg.n_test, "feature_dim": cfg.feature_dim })
        }
        Task::Planted => {
            let feature_dim = a.feature_dim.unwrap_or(8);
            let cfg = PlantedConfig {
                rating_map: RatingMap::alternating(feature_dim, a.spread),
                holdout_fraction: a.holdout,
                ..PlantedConfig::new(a.items, feature_dim, a.n, seed)
            };
            let data = gen_planted_dataset::<f64>(&cfg)?;
            save(&path("train.csv"), |b| write_dataset(&data.train, b))?;
            save(&path("test.csv"), |b| write_dataset(&data.test, b))?;
            save(&path("items.csv"), |b| write_features(&data.features, b))?;
            let ratings: String = std::iter::once("item_id,rating".to_string())
                .chain(data.true_ratings.iter().enumerate().map(|(i, r)| format!("{i},{r}")))
                .map(|l| l + "\n")
                .collect();
            write_atomic(&path("true_ratings.csv"), ratings.as_bytes())?;
            let holdout: String = std::iter::once("item_id".to_string())
                .chain(data.holdout.iter().map(usize::to_string))
                .map(|l| l + "\n")
                .collect();
            write_atomic(&path("holdout.csv"), holdout.as_bytes())?;
            save(&path("matches.csv"), |b| write_history(&data.matches, b))?;
            let matrix = history_matrix(cfg.n_items, &data.matches)?;
            save(&path("match_matrix.csv"), |b| write_match_matrix(&matrix, b))?;
            for name in ["train.csv", "test.csv", "items.csv", "true_ratings.csv", "holdout.csv", "matches.csv", "match_matrix.csv"] {
                outputs.push(path(name));
            }
            json!({
                "n_items": cfg.n_items,
                "feature_dim": feature_dim,
                "rating_map": { "weights": cfg.rating_map.weights, "bias": cfg.rating_map.bias },
                "holdout_items": data.holdout.len(),
            })
        }
    };
    write_manifest(&path("manifest.json"), command, Some(seed), &outputs, extra)?;
    eprintln!("nbtr: wrote {} files to {}", outputs.len() + 1, a.out.display());
    Ok(())
}

fn train_config(opts: &TrainOptions, structure: Structure, seed: u64) -> TrainConfig {
    let default_dims = match opts.task {
        Task::Digits => DIGIT_DIMS.to_vec(),
        Task::Planted => PLANTED_DIMS.to_vec(),
    };
    TrainConfig {
        epochs: opts.epochs,
        batch_size: opts.batch_size,
        seed,
        estimator_hidden: opts.dims.clone().unwrap_or(default_dims),
        adjuster_hidden: opts.adjuster_dims.clone(),
        structure,
        adam: AdamConfig {
            lr: opts.lr,
            ..AdamConfig::default()
        },
        validation_fraction: opts.val_fraction,
    }
}

fn structure_of(mode: Mode) -> Structure {
    match mode {
        Mode::Symmetric | Mode::AsymNoadj => Structure::Symmetric,
        Mode::Asym => Structure::Asymmetric { skip: true },
        Mode::AsymNoskip => Structure::Asymmetric { skip: false },
    }
}

fn write_train_report(report: &TrainReport, out: &mut Vec<u8>) -> nbtr_core::Result<()> {
    writeln!(out, "epoch,train_loss,val_accuracy,test_accuracy")?;
    let last = report.epoch_loss.len();
    for (k, loss) in report.epoch_loss.iter().enumerate() {
        let val = report.val_accuracy.get(k).copied().flatten().map_or(String::new(), |v| v.to_string());
        let test = if k + 1 == last {
            report.test_accuracy.map_or(String::new(), |v| v.to_string())
        } else {
            String::new()
        };
        writeln!(out, "{},{loss},{val},{test}", k + 1)?;
    }
    Ok(())
}

fn train_cmd(a: &TrainArgs, command: &Command) -> Outcome {
    let seed = resolve_seed(a.opts.seed)?;
    log_config(command, Some(seed));
    let data = load_dataset(&a.data)?;
    let test = a.test.as_deref().map(load_dataset).transpose()?;
    let cfg = train_config(&a.opts, structure_of(a.mode), seed);
    let model = cfg.build_model(&data)?;
    let (model, report) = train(model, &data, &cfg, test.as_ref())?;
    model.save(&a.out)?;
    let report_path = a.report.clone().unwrap_or_else(|| {
        let stem = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        a.out.with_file_name(format!("{stem}.report.csv"))
    });
    save(&report_path, |b| write_train_report(&report, b))?;
    let outputs = vec![a.out.clone(), report_path];
    let extra = json!({
        "final_train_loss": report.epoch_loss.last(),
        "test_accuracy": report.test_accuracy,
    });
    write_manifest(&manifest_path(&a.out), command, Some(seed), &outputs, extra)?;
    if let Some(acc) = report.test_accuracy {
        eprintln!("nbtr: test accuracy {acc:.4}");
    }
    Ok(())
}

fn rate(a: &RateArgs, command: &Command) -> Outcome {
    log_config(command, None);
    let model = load_model(&a.model)?;
    let items = read_items(&a.items)?;
    let mut ratings = Vec::with_capacity(items.len());
    for x in &items {
        ratings.push(model.rate_item(x)?);
    }
    emit(a.out.as_deref(), |b| {
        writeln!(b, "item_id,rating")?;
        for (i, r) in ratings.iter().enumerate() {
            writeln!(b, "{i},{r}")?;
        }
        Ok(())
    })?;
    if let Some(out) = &a.out {
        write_manifest(&manifest_path(out), command, None, std::slice::from_ref(out), json!({ "items": items.len() }))?;
    }
    Ok(())
}

fn ford_failure(e: Error) -> Failure {
    match e {
        Error::FordViolation { winners, losers } => Failure::Domain(format!(
            "Ford condition fails, maximum-likelihood scores do not exist: items {winners:?} never lost to items {losers:?}"
        )),
        other => other.into(),
    }
}

fn mle(a: &MleArgs, command: &Command) -> Outcome {
    log_config(command, None);
    let elo = EloConfig::new(a.elo.alpha, a.elo.beta, 32.0)?;
    let opts = MmOptions {
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let matrix = read_match_matrix(&a.matrix)?;
    let (scores, extra) = match (a.home, &a.away) {
        (true, Some(away)) => {
            let away = read_match_matrix(away)?;
            let fit = mm_mle_home::<f64>(&matrix, &away, &opts).map_err(ford_failure)?;
            eprintln!("nbtr: home advantage eta {} after {} iterations", fit.advantage.eta(), fit.iterations);
            let extra = json!({ "eta": fit.advantage.eta(), "iterations": fit.iterations, "converged": fit.converged });
            (fit.scores, extra)
        }
        (true, None) => return Err(Failure::Usage("--home requires --away".into())),
        (false, _) => {
            if let FordCheck::Violated { winners, losers } = check_ford_condition(&matrix) {
                return Err(ford_failure(Error::FordViolation { winners, losers }));
            }
            let fit = mm_mle::<f64>(&matrix, &opts).map_err(ford_failure)?;
            let extra = json!({ "iterations": fit.iterations, "converged": fit.converged });
            (fit.scores, extra)
        }
    };
    if extra["converged"] == json!(false) {
        eprintln!("nbtr: warning: not converged within {} iterations", a.max_iter);
    }
    emit(a.out.as_deref(), |b| write_scores(&scores, &elo, b))?;
    if let Some(out) = &a.out {
        write_manifest(&manifest_path(out), command, None, std::slice::from_ref(out), extra)?;
    }
    Ok(())
}

fn elo(a: &EloArgs, command: &Command) -> Outcome {
    log_config(command, None);
    let cfg = EloConfig::new(a.elo.alpha, a.elo.beta, a.k)?;
    let history = read_history(&a.history)?;
    let n = a
        .n
        .unwrap_or_else(|| history.iter().map(|g| g.i.max(g.j) + 1).max().unwrap_or(0));
    let ratings = if n == 0 { Vec::new() } else { elo_rate_history(n, &history, &cfg)? };
    emit(a.out.as_deref(), |b| {
        writeln!(b, "item_id,elo")?;
        for (i, r) in ratings.iter().enumerate() {
            writeln!(b, "{i},{r}")?;
        }
        Ok(())
    })?;
    if let Some(out) = &a.out {
        write_manifest(&manifest_path(out), command, None, std::slice::from_ref(out), json!({ "games": history.len() }))?;
    }
    Ok(())
}

fn show(report: &Report) -> Outcome {
    let mut buf = Vec::new();
    write_summary(report, &mut buf)?;
    std::io::stdout().write_all(&buf)?;
    Ok(())
}

fn eval(a: &EvalArgs, command: &Command) -> Outcome {
    let class_mode = a.classes.is_some() && !a.ablation;
    let requested = [class_mode, a.holdout.is_some(), a.ablation].iter().filter(|b| **b).count();
    if requested > 1 && a.out.is_some() {
        return Err(Failure::Usage(
            "--out takes one report; request one of --classes, --holdout or --ablation".into(),
        ));
    }
    if requested == 0 && a.data.is_none() {
        return Err(Failure::Usage("nothing to evaluate: give --data, --classes, --holdout or --ablation".into()));
    }
    if class_mode && a.items.is_none() {
        return Err(Failure::Usage("--classes requires --items".into()));
    }
    let seed = if a.ablation { Some(resolve_seed(a.opts.seed)?) } else { None };
    log_config(command, seed);

    let mut reports = Vec::new();
    let mut metrics = serde_json::Map::new();
    if a.ablation {
        let (train_path, test_path) = (a.train.as_deref().unwrap(), a.test.as_deref().unwrap());
        let train_data = load_dataset(train_path)?;
        let test = load_dataset(test_path)?;
        let items = read_items(a.items.as_deref().unwrap())?;
        let classes = read_index_column(a.classes.as_deref().unwrap(), "class")?;
        let mut keys = classes.clone();
        keys.sort_unstable();
        keys.dedup();
        let set = EvalSet {
            data: &test,
            items: &items,
            classes: &classes,
            keys: &keys,
        };
        let cfg = train_config(&a.opts, Structure::Symmetric, seed.unwrap_or(0));
        let report = ablation_asymmetric(&train_data, set, &cfg)?;
        for run in &report.runs {
            println!("{},{}", run.name, run.accuracy);
            metrics.insert(format!("accuracy_{}", run.name), json!(run.accuracy));
        }
        reports.push(Report::Ablation(report));
    }
    if let Some(model_path) = &a.model {
        let model = load_model(model_path)?;
        if let Some(data_path) = &a.data {
            let data = load_dataset(data_path)?;
            let acc = accuracy(&model, &data)?;
            println!("accuracy,{acc}");
            metrics.insert("accuracy".into(), json!(acc));
        }
        if class_mode {
            let items = read_items(a.items.as_deref().unwrap())?;
            let classes = read_index_column(a.classes.as_deref().unwrap(), "class")?;
            let mut keys = classes.clone();
            keys.sort_unstable();
            keys.dedup();
            reports.push(Report::ClassStats(class_stats(&model, &items, &classes, &keys)?));
        }
        if let Some(holdout_path) = &a.holdout {
            let items = read_items(a.items.as_deref().unwrap())?;
            let holdout = read_index_column(holdout_path, "item_id")?;
            let history = read_history(a.matches.as_deref().unwrap())?;
            let matrix = history_matrix(items.len(), &history)?;
            let baseline = mle_baseline(&matrix, &EloConfig::default(), &MmOptions::default()).map_err(ford_failure)?;
            let report = correlation(&model, &holdout, &items, &baseline)?;
            metrics.insert("pearson".into(), json!(report.pearson));
            metrics.insert("spearman".into(), json!(report.spearman));
            reports.push(Report::Correlation(report));
        }
    }
    for r in &reports {
        show(r)?;
    }
    if let (Some(out), Some(report)) = (&a.out, reports.first()) {
        let written = export_report(report, out)?;
        write_manifest(&manifest_path(out), command, seed, &written, Value::Object(metrics))?;
    }
    Ok(())
}
