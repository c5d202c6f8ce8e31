//! Problem files, reports, the derivation pipeline and the bundled corpus.

pub mod corpus;
pub mod pipeline;
pub mod problem;
pub mod report;

pub use corpus::{bundled_corpus_dir, run_corpus, CorpusRun};
pub use pipeline::{derive, numcheck, verify, DeriveOptions};
pub use problem::{load_problem, problem_from_str, Problem, ProblemError};
pub use report::{CorpusSummary, Report};

/// Exit code when every check passed.
pub const EXIT_OK: i32 = 0;
/// Exit code when a check failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit code when there was nothing to run.
pub const EXIT_NOTHING: i32 = 2;

/// Order-preserving map, concurrent with the `parallel` feature.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
