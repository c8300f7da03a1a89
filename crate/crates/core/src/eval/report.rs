use std::io::Write;
use std::path::{Path, PathBuf};

use super::{AblationReport, ClassStats, CorrelationReport};
use crate::error::Result;
use crate::io::write_atomic;

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    ClassStats(ClassStats),
    Correlation(CorrelationReport),
    Ablation(AblationReport),
}

/// The report's table: `class,mean,std`, `item_id,learned_rating,baseline_elo`
/// or `structure,accuracy`.
pub fn write_csv(report: &Report, mut out: impl Write) -> Result<()> {
    match report {
        Report::ClassStats(s) => {
            writeln!(out, "class,mean,std")?;
            for c in &s.classes {
                writeln!(out, "{},{},{}", c.class, c.mean, c.std)?;
            }
        }
        Report::Correlation(c) => {
            writeln!(out, "item_id,learned_rating,baseline_elo")?;
            for (id, l, b) in &c.pairs {
                writeln!(out, "{id},{l},{b}")?;
            }
        }
        Report::Ablation(a) => {
            writeln!(out, "structure,accuracy")?;
            for r in &a.runs {
                writeln!(out, "{},{}", r.name, r.accuracy)?;
            }
        }
    }
    Ok(())
}

/// Per-item points for plotting; `None` for reports that have none beyond their table.
pub fn write_scatter(report: &Report, mut out: impl Write) -> Result<bool> {
    match report {
        Report::ClassStats(s) => {
            writeln!(out, "class,rating")?;
            for (c, r) in &s.scatter {
                writeln!(out, "{c},{r}")?;
            }
        }
        Report::Ablation(a) => {
            writeln!(out, "structure,class,rating")?;
            for run in &a.runs {
                for (c, r) in &run.class_stats.scatter {
                    writeln!(out, "{},{c},{r}", run.name)?;
                }
            }
        }
        Report::Correlation(_) => return Ok(false),
    }
    Ok(true)
}

/// Plain-text summary: three fixed lines plus one line per class.
pub fn write_summary(report: &Report, mut out: impl Write) -> Result<()> {
    match report {
        Report::ClassStats(s) => {
            writeln!(out, "ratings of {} items in {} classes", s.scatter.len(), s.classes.len())?;
            writeln!(out, "{:>6} {:>8} {:>12} {:>12}", "class", "count", "mean", "std")?;
            for c in &s.classes {
                writeln!(out, "{:>6} {:>8} {:>12.4} {:>12.4}", c.class, c.count, c.mean, c.std)?;
            }
            writeln!(out, "means strictly increasing: {}", yes_no(s.means_strictly_increasing()))?;
        }
        Report::Correlation(c) => {
            writeln!(out, "items compared: {}", c.pairs.len())?;
            writeln!(out, "pearson r: {:.4}", c.pearson)?;
            writeln!(out, "spearman rho: {:.4}", c.spearman)?;
        }
        Report::Ablation(a) => {
            let accs: Vec<String> = a.runs.iter().map(|r| format!("{} {:.4}", r.name, r.accuracy)).collect();
            writeln!(out, "accuracy: {}", accs.join(", "))?;
            let names: Vec<String> = a.runs.iter().map(|r| format!("{:>12}", r.name)).collect();
            writeln!(out, "{:>6} {}", "class", names.join(" "))?;
            if let Some(first) = a.runs.first() {
                for (k, c) in first.class_stats.classes.iter().enumerate() {
                    let means: Vec<String> = a
                        .runs
                        .iter()
                        .map(|r| r.class_stats.classes.get(k).map_or(String::new(), |s| format!("{:>12.4}", s.mean)))
                        .collect();
                    writeln!(out, "{:>6} {}", c.class, means.join(" "))?;
                }
            }
            let increasing: Vec<String> = a
                .runs
                .iter()
                .map(|r| format!("{} {}", r.name, yes_no(r.class_stats.means_strictly_increasing())))
                .collect();
            writeln!(out, "means strictly increasing: {}", increasing.join(", "))?;
        }
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Writes the table to `path`, the summary beside it as `<stem>.summary.txt`
/// and, when present, the plot points as `<stem>.scatter.csv`. Returns the
/// paths written.
pub fn export_report(report: &Report, path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let mut written = Vec::new();
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    write_atomic(path, &buf)?;
    written.push(path.to_path_buf());

    buf.clear();
    write_summary(report, &mut buf)?;
    let summary = sibling(path, ".summary.txt");
    write_atomic(&summary, &buf)?;
    written.push(summary);

    buf.clear();
    if write_scatter(report, &mut buf)? {
        let scatter = sibling(path, ".scatter.csv");
        write_atomic(&scatter, &buf)?;
        written.push(scatter);
    }
    Ok(written)
}
