use std::path::{Path, PathBuf};

use werewolf_core::log::GameLog;
use werewolf_core::metrics::{build_report, render_ablation, render_table, MetricReport, MetricsError, ScoredGame};

/// Logs found under a run directory, split by usability.
#[derive(Debug, Default)]
pub struct LoadedLogs {
    pub games: Vec<ScoredGame>,
    /// Unreadable or malformed files with the reason.
    pub skipped: Vec<(PathBuf, String)>,
    /// Aborted games, excluded from metrics.
    pub aborted: Vec<PathBuf>,
}

/// `dir/logs/*.jsonl` when a `logs` subdirectory exists, else `dir/*.jsonl`,
/// in file-name order.
pub fn log_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let logs = dir.join("logs");
    let root = if logs.is_dir() { logs } else { dir.to_path_buf() };
    let mut files: Vec<PathBuf> = std::fs::read_dir(&root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl") && p.file_name().is_some_and(|n| n != "pool.jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every log; corrupt files are skipped with a warning. Only
/// schema version 1 is accepted: other versions are reported as corrupt.
pub fn load_logs(dir: &Path, guard_literal: bool) -> std::io::Result<LoadedLogs> {
    let mut out = LoadedLogs::default();
    for path in log_files(dir)? {
        let parsed = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| GameLog::parse(&t).map_err(|e| e.to_string()));
        let log = match parsed {
            Ok(log) => log,
            Err(reason) => {
                tracing::warn!(file = %path.display(), %reason, "skipping corrupt log");
                out.skipped.push((path, reason));
                continue;
            }
        };
        match ScoredGame::from_log(&log, guard_literal) {
            Ok(g) => out.games.push(g),
            Err(MetricsError::Aborted(_)) => out.aborted.push(path),
            Err(e) => {
                tracing::warn!(file = %path.display(), error = %e, "skipping unusable log");
                out.skipped.push((path, e.to_string()));
            }
        }
    }
    Ok(out)
}

/// Writes `report.json` and `report.txt` into `out`.
pub fn write_report(out: &Path, report: &MetricReport) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(report).expect("serializable") + "\n")?;
    std::fs::write(out.join("report.txt"), render_table(report))
}

pub fn write_ablation(out: &Path, without: &MetricReport, with: &MetricReport) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("ablation.txt"), render_ablation(without, with))
}

pub fn report_dir(dir: &Path, guard_literal: bool) -> anyhow::Result<(MetricReport, LoadedLogs)> {
    let loaded = load_logs(dir, guard_literal)?;
    let report = build_report(&loaded.games)?;
    Ok((report, loaded))
}
