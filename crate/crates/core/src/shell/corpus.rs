//! Running every problem in a directory.

use std::path::{Path, PathBuf};

use crate::symcore::current_seed;

use super::pipeline::{derive, DeriveOptions};
use super::problem::load_problem;
use super::report::{CorpusSummary, Report, SummaryRow, REPORT_SCHEMA};
use super::{par_map, EXIT_FAIL, EXIT_NOTHING, EXIT_OK};

/// The corpus shipped with the crate sources.
pub fn bundled_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

#[derive(Clone, Debug)]
pub struct CorpusRun {
    pub summary: CorpusSummary,
    /// Reports in file-name order; `None` where the file did not load.
    pub reports: Vec<(PathBuf, Option<Report>)>,
}

impl CorpusRun {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }
}

/// Problem files directly inside `dir`, sorted by name.
pub fn problem_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Derives every problem in `dir`. With `out`, writes one report per
/// problem and `summary.json` there.
pub fn run_corpus(dir: &Path, out: Option<&Path>, opts: &DeriveOptions) -> std::io::Result<CorpusRun> {
    let files = problem_files(dir)?;
    if files.is_empty() {
        return Ok(CorpusRun {
            summary: CorpusSummary {
                schema: REPORT_SCHEMA,
                seed: current_seed(),
                problems: Vec::new(),
                failing: vec![format!("no problem files in {}", dir.display())],
                exit_code: EXIT_NOTHING,
            },
            reports: Vec::new(),
        });
    }
    let results = par_map(&files, |f| match load_problem(f) {
        Ok(p) => Ok(derive(&p, opts)),
        Err(e) => Err(e.to_string()),
    });
    if let Some(out) = out {
        std::fs::create_dir_all(out)?;
    }
    let mut rows = Vec::new();
    let mut failing = Vec::new();
    let mut reports = Vec::new();
    for (f, r) in files.iter().zip(results) {
        let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let file = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match r {
            Ok(report) => {
                let name = format!("{stem}.report.json");
                if let Some(out) = out {
                    std::fs::write(out.join(&name), report.to_json())?;
                }
                for fl in &report.failures {
                    failing.push(format!("{}: {fl}", report.problem));
                }
                rows.push(SummaryRow {
                    name: report.problem.clone(),
                    file,
                    report: out.map(|_| name),
                    passed: report.passed(),
                    goldens: report.goldens.len(),
                    goldens_matched: report.goldens.iter().filter(|g| g.pass).count(),
                    failures: report.failures.clone(),
                });
                reports.push((f.clone(), Some(report)));
            }
            Err(e) => {
                failing.push(format!("{file}: {e}"));
                rows.push(SummaryRow {
                    name: stem,
                    file,
                    report: None,
                    passed: false,
                    goldens: 0,
                    goldens_matched: 0,
                    failures: vec![e],
                });
                reports.push((f.clone(), None));
            }
        }
    }
    let summary = CorpusSummary {
        schema: REPORT_SCHEMA,
        seed: current_seed(),
        exit_code: if failing.is_empty() { EXIT_OK } else { EXIT_FAIL },
        problems: rows,
        failing,
    };
    if let Some(out) = out {
        let mut s = serde_json::to_string_pretty(&summary).expect("summaries serialize");
        s.push('\n');
        std::fs::write(out.join("summary.json"), s)?;
    }
    Ok(CorpusRun { summary, reports })
}
