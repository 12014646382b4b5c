//! Built-in problems, convergence and adaptive studies, and the `feec`
//! command line.

pub mod cli;
mod config;
mod problems;
mod study;

pub use config::{ConfigFile, ConfigOverrides, StudyConfig, CONFIG_KEYS};
pub use problems::{find_problem, registry, ProblemSpec};
pub use study::{
    dorfler_mark, evaluate_level, rows_to_csv, run_adaptive, run_adaptive_with, run_convergence,
    run_convergence_with, solve_problem, LevelResult, StudyRow, MAX_ADAPTIVE_STEPS,
    MAX_STUDY_CELLS, STUDY_CSV_HEADER,
};
