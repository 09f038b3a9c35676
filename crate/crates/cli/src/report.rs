//! CSV training logs, evaluation reports, and the pairwise comparison
//! table.
//!
//! Float fields use Rust's shortest round-trip `{}` formatting, so a
//! written report parses back to bit-identical values and identical
//! runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};

use midpoint_core::eval::{winning_rate, EvalReport};
use midpoint_core::geometry::StatePoint;

/// Line-buffered CSV writer for training statistics; the caller owns
/// the column schema.
pub struct TrainLogger {
    out: BufWriter<File>,
    columns: usize,
}

impl TrainLogger {
    pub fn create(path: &Path, columns: &[&str]) -> anyhow::Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = File::create(path)
            .with_context(|| format!("cannot create log {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", columns.join(","))?;
        Ok(TrainLogger {
            out,
            columns: columns.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> anyhow::Result<()> {
        if fields.len() != self.columns {
            bail!("log row has {} fields, expected {}", fields.len(), self.columns);
        }
        writeln!(self.out, "{}", fields.join(","))?;
        // Rows arrive minutes apart in long runs; flush so the log can
        // be followed while training.
        self.out.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Writes an evaluation report: one `# key=value` metadata line, a
/// header, then one row per endpoint pair (empty length on failure).
pub fn write_eval_csv(
    path: &Path,
    meta: &BTreeMap<String, String>,
    report: &EvalReport,
) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = String::new();
    let meta_line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(text, "# {}", meta_line.join(" "))?;
    writeln!(text, "pair,success,length")?;
    for (i, (ok, len)) in report.successes.iter().zip(&report.lengths).enumerate() {
        match (ok, len) {
            (true, Some(l)) => writeln!(text, "{i},1,{l}")?,
            (false, None) => writeln!(text, "{i},0,")?,
            _ => bail!("inconsistent evaluation report at pair {i}"),
        }
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Parses a file written by [`write_eval_csv`].
pub fn read_eval_csv(path: &Path) -> anyhow::Result<(BTreeMap<String, String>, EvalReport)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read report {}", path.display()))?;
    let mut lines = text.lines();
    let meta_line = lines.next().context("empty report")?;
    let Some(meta_body) = meta_line.strip_prefix("# ") else {
        bail!("missing metadata line in {}", path.display());
    };
    let mut meta = BTreeMap::new();
    for item in meta_body.split(' ').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .with_context(|| format!("malformed metadata item `{item}`"))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let header = lines.next().context("missing header line")?;
    if header != "pair,success,length" {
        bail!("unexpected report header `{header}`");
    }
    let mut successes = Vec::new();
    let mut lengths = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut parts = line.splitn(3, ',');
        let pair: usize = parts.next().context("missing pair column")?.parse()?;
        if pair != i {
            bail!("report rows out of order at line {i}");
        }
        let success = match parts.next().context("missing success column")? {
            "1" => true,
            "0" => false,
            other => bail!("bad success flag `{other}`"),
        };
        let len_field = parts.next().context("missing length column")?;
        let length = if success {
            Some(len_field.parse::<f64>()?)
        } else {
            if !len_field.is_empty() {
                bail!("failure row {i} carries a length");
            }
            None
        };
        successes.push(success);
        lengths.push(length);
    }
    if successes.is_empty() {
        bail!("report holds no pairs");
    }
    let rate = successes.iter().filter(|&&b| b).count() as f64 / successes.len() as f64;
    let timestep = meta
        .get("timestep")
        .and_then(|t| t.parse().ok())
        .unwrap_or(0);
    Ok((
        meta,
        EvalReport {
            success_rate: rate,
            free_space_violations: 0,
            timestep,
            successes,
            lengths,
        },
    ))
}

/// Persists an evaluation pair set so that every method is scored on
/// identical endpoints. One coordinate column per start and goal entry.
pub fn write_pairs_csv(
    path: &Path,
    meta: &BTreeMap<String, String>,
    pairs: &[(StatePoint, StatePoint)],
) -> anyhow::Result<()> {
    if pairs.is_empty() {
        bail!("refusing to write an empty pair set");
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let d = pairs[0].0.coords.len();
    let mut text = String::new();
    let meta_line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(text, "# {}", meta_line.join(" "))?;
    let mut cols = vec!["pair".to_string()];
    cols.extend((0..d).map(|i| format!("s{i}")));
    cols.extend((0..d).map(|i| format!("g{i}")));
    writeln!(text, "{}", cols.join(","))?;
    for (i, (s, g)) in pairs.iter().enumerate() {
        if s.coords.len() != d || g.coords.len() != d {
            bail!("inconsistent coordinate dimension at pair {i}");
        }
        let mut row = vec![i.to_string()];
        row.extend(s.coords.iter().map(|c| format!("{c}")));
        row.extend(g.coords.iter().map(|c| format!("{c}")));
        writeln!(text, "{}", row.join(","))?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Parses a file written by [`write_pairs_csv`].
pub fn read_pairs_csv(
    path: &Path,
) -> anyhow::Result<(BTreeMap<String, String>, Vec<(StatePoint, StatePoint)>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read pair set {}", path.display()))?;
    let mut lines = text.lines();
    let meta_line = lines.next().context("empty pair file")?;
    let Some(meta_body) = meta_line.strip_prefix("# ") else {
        bail!("missing metadata line in {}", path.display());
    };
    let mut meta = BTreeMap::new();
    for item in meta_body.split(' ').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .with_context(|| format!("malformed metadata item `{item}`"))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let header = lines.next().context("missing header line")?;
    let cols = header.split(',').count();
    if cols < 3 || (cols - 1) % 2 != 0 {
        bail!("unexpected pair header `{header}`");
    }
    let d = (cols - 1) / 2;
    let mut pairs = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            bail!("pair row {i} has {} fields, expected {cols}", fields.len());
        }
        let idx: usize = fields[0].parse()?;
        if idx != i {
            bail!("pair rows out of order at line {i}");
        }
        let parse = |slice: &[&str]| -> anyhow::Result<StatePoint> {
            Ok(StatePoint {
                coords: slice
                    .iter()
                    .map(|f| f.parse::<f64>().map_err(Into::into))
                    .collect::<anyhow::Result<Vec<f64>>>()?,
            })
        };
        pairs.push((parse(&fields[1..1 + d])?, parse(&fields[1 + d..])?));
    }
    if pairs.is_empty() {
        bail!("pair file holds no pairs");
    }
    Ok((meta, pairs))
}

/// Metadata keys that must agree for two reports to be comparable:
/// same environment, same endpoint pairs, same task.
pub const COMPARE_KEYS: &[&str] = &["environment", "eval_seed", "pairs", "segments", "epsilon"];

/// Renders the side-by-side comparison: success rates and the winning
/// rate over jointly solved pairs ("—" when no pair is solved by both).
pub fn compare_text(
    name_a: &str,
    a: &EvalReport,
    name_b: &str,
    b: &EvalReport,
) -> anyhow::Result<String> {
    let (win_a, joint) = winning_rate(a, b)?;
    let (win_b, _) = winning_rate(b, a)?;
    let fmt_win = |w: Option<f64>| match w {
        Some(pct) => format!("{pct:.1}% ({joint:.1}% joint)"),
        None => "—".to_string(),
    };
    let mut text = String::new();
    writeln!(text, "{:<24} {:>10} {:>24}", "policy", "success", "winning")?;
    writeln!(
        text,
        "{:<24} {:>9.1}% {:>24}",
        name_a,
        a.success_rate * 100.0,
        fmt_win(win_a)
    )?;
    writeln!(
        text,
        "{:<24} {:>9.1}% {:>24}",
        name_b,
        b.success_rate * 100.0,
        fmt_win(win_b)
    )?;
    Ok(text)
}
