use std::fmt::Write as _;
use std::sync::Arc;

use super::config::StudyConfig;
use super::problems::ProblemSpec;
use crate::derham::DiscreteComplex;
use crate::error::{FeecError, Result};
use crate::estimator::{
    compose_parents, element_errors, local_efficiency, total_estimate, ElementErrors, ErrorSource,
    EstimatorOptions, EstimatorReport, ReferenceSolution,
};
use crate::hodge::{solve_hodge_laplacian, MixedSolution};
use crate::mesh::{refine_bisect, refine_uniform_with_parents, SimplicialComplex};
use crate::numfmt::fmt_f64;

pub const STUDY_CSV_HEADER: &str =
    "level,h_max,dofs,error_H,total,effectivity,mu,rate_error,rate_total";

/// Largest mesh a convergence study will refine to, counting the reference
/// mesh.
pub const MAX_STUDY_CELLS: usize = 250_000;

/// Upper bound on solve-estimate-mark-refine iterations.
pub const MAX_ADAPTIVE_STEPS: usize = 60;

/// One level of a convergence or adaptive study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub cells: usize,
    pub h_max: f64,
    pub dofs: usize,
    pub error_h: Option<f64>,
    pub total: f64,
    pub effectivity: Option<f64>,
    pub mu: f64,
    pub rate_error: Option<f64>,
    pub rate_total: Option<f64>,
    /// `max_K η(K) / (‖e‖_{ω_K} + osc_{ω_K})`, when errors are known.
    pub local_efficiency: Option<f64>,
}

impl StudyRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.level,
            fmt_f64(self.h_max),
            self.dofs,
            opt(self.error_h),
            fmt_f64(self.total),
            opt(self.effectivity),
            fmt_f64(self.mu),
            opt(self.rate_error),
            opt(self.rate_total)
        )
    }
}

pub fn rows_to_csv(rows: &[StudyRow]) -> String {
    let mut s = String::new();
    s.push_str(STUDY_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_line());
    }
    s
}

/// Everything computed on one mesh.
pub struct LevelResult {
    pub complex: DiscreteComplex,
    pub solution: MixedSolution,
    pub report: EstimatorReport,
    pub errors: Option<ElementErrors>,
    pub row: StudyRow,
}

pub fn solve_problem(spec: &ProblemSpec, cx: &DiscreteComplex) -> Result<MixedSolution> {
    solve_hodge_laplacian(cx, spec.k, &*spec.f)
}

/// Solve, estimate and (with a source) measure errors on `mesh`. Rates are
/// left empty.
pub fn evaluate_level(
    spec: &ProblemSpec,
    mesh: Arc<SimplicialComplex>,
    cfg: &StudyConfig,
    level: usize,
    source: Option<&ErrorSource<'_>>,
) -> Result<LevelResult> {
    let cx = DiscreteComplex::with_seed(mesh, spec.bc, cfg.seed);
    let solution = solve_problem(spec, &cx)?;
    let options = EstimatorOptions {
        mode: cfg.mode,
        osc_degree: cfg.osc_degree,
    };
    let mut report = total_estimate(&cx, &spec.data(), &solution, &options)?;
    let errors = match source {
        Some(s) => Some(element_errors(&cx, &solution, s)?),
        None => None,
    };
    let mut local = None;
    if let Some(e) = &errors {
        report.set_error(e.total());
        let osc_sq: Vec<f64> = report.elements.iter().map(|el| el.osc_sq()).collect();
        local = Some(local_efficiency(&cx, &report.eta(), e, &osc_sq));
    }
    let mesh = cx.mesh();
    let row = StudyRow {
        level,
        cells: mesh.num_cells(),
        h_max: mesh.h_max(),
        dofs: solution.system_size,
        error_h: errors.as_ref().map(ElementErrors::total),
        total: report.total(),
        effectivity: report.effectivity,
        mu: report.mu,
        rate_error: None,
        rate_total: None,
        local_efficiency: local,
    };
    Ok(LevelResult {
        complex: cx,
        solution,
        report,
        errors,
        row,
    })
}

fn rate(prev: Option<f64>, cur: Option<f64>, scale: f64) -> Option<f64> {
    match (prev, cur) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 && scale > 0.0 => Some((a / b).ln() / scale),
        _ => None,
    }
}

/// Rates from the previous row: `log₂` ratios under uniform refinement,
/// `n · ln(a/b) / ln(N_b/N_a)` otherwise.
fn fill_rates(row: &mut StudyRow, prev: Option<&StudyRow>, uniform: bool, n: usize) {
    let Some(p) = prev else { return };
    let scale = if uniform {
        std::f64::consts::LN_2
    } else {
        (row.dofs as f64 / p.dofs as f64).ln() / n as f64
    };
    row.rate_error = rate(p.error_h, row.error_h, scale);
    row.rate_total = rate(Some(p.total), Some(row.total), scale);
}

pub fn run_convergence(spec: &ProblemSpec, cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    run_convergence_with(spec, cfg, &mut |_| Ok(()))
}

/// Uniform refinement study, rows numbered from 1. `on_row` sees each finished row, so a caller can
/// flush partial tables when a later level fails.
pub fn run_convergence_with(
    spec: &ProblemSpec,
    cfg: &StudyConfig,
    on_row: &mut dyn FnMut(&StudyRow) -> Result<()>,
) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    if cfg.levels < 3 {
        return Err(FeecError::InvalidArgument(format!(
            "a convergence study needs at least 3 levels, got {}",
            cfg.levels
        )));
    }
    let extra = if spec.exact.is_some() { 0 } else { 2 };
    let base = spec.base_mesh()?;
    let finest =
        (1..cfg.levels + extra).fold(base.num_cells(), |c, _| c.saturating_mul(1 << spec.n()));
    if finest > MAX_STUDY_CELLS {
        return Err(FeecError::InvalidArgument(format!(
            "`{}` with {} levels needs a {finest}-cell mesh{}; the limit is {MAX_STUDY_CELLS}",
            spec.name,
            cfg.levels,
            if extra > 0 {
                " for the reference solution"
            } else {
                ""
            }
        )));
    }
    let mut meshes = vec![Arc::new(base)];
    let mut parents = Vec::new();
    for _ in 1..cfg.levels + extra {
        let (m, p) = refine_uniform_with_parents(meshes.last().expect("nonempty"));
        meshes.push(Arc::new(m));
        parents.push(p);
    }
    let reference = if spec.exact.is_none() {
        let cx =
            DiscreteComplex::with_seed(meshes.last().expect("nonempty").clone(), spec.bc, cfg.seed);
        let sol = solve_problem(spec, &cx)?;
        Some(ReferenceSolution::new(cx, &sol)?)
    } else {
        None
    };
    let mut rows: Vec<StudyRow> = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels {
        let parent;
        let source = match (&spec.exact, &reference) {
            (Some(exact), _) => ErrorSource::Exact(exact),
            (None, Some(reference)) => {
                parent = compose_parents(&parents[level..]);
                ErrorSource::Reference {
                    reference,
                    parent: &parent,
                }
            }
            (None, None) => unreachable!("reference exists without an exact solution"),
        };
        let mut row =
            evaluate_level(spec, meshes[level].clone(), cfg, level + 1, Some(&source))?.row;
        fill_rates(&mut row, rows.last(), true, spec.n());
        on_row(&row)?;
        rows.push(row);
    }
    Ok(rows)
}

/// Dörfler marking: the smallest set of cells, taken by decreasing indicator
/// with ties broken by cell id, whose squared indicators reach `θ²` of the
/// total. Returned sorted by cell id.
pub fn dorfler_mark(eta: &[f64], theta: f64) -> Vec<usize> {
    let n = eta.len();
    let total: f64 = eta.iter().map(|e| e * e).sum();
    if theta >= 1.0 || total == 0.0 {
        return (0..n).collect();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    let target = theta * theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for c in order {
        if acc >= target {
            break;
        }
        acc += eta[c] * eta[c];
        marked.push(c);
    }
    marked.sort_unstable();
    marked
}

pub fn run_adaptive(spec: &ProblemSpec, cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    run_adaptive_with(spec, cfg, &mut |_| Ok(()))
}

/// Solve, estimate, mark and bisect until the system size reaches
/// `cfg.max_dofs`.
pub fn run_adaptive_with(
    spec: &ProblemSpec,
    cfg: &StudyConfig,
    on_row: &mut dyn FnMut(&StudyRow) -> Result<()>,
) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    if spec.n() != 2 {
        return Err(FeecError::Unsupported(format!(
            "adaptive refinement is only available in 2-D (`{}` is {}-D)",
            spec.name,
            spec.n()
        )));
    }
    let source = spec.exact.as_ref().map(ErrorSource::Exact);
    let mut mesh = Arc::new(spec.base_mesh()?);
    let mut rows: Vec<StudyRow> = Vec::new();
    for level in 0..MAX_ADAPTIVE_STEPS {
        let result = evaluate_level(spec, mesh.clone(), cfg, level + 1, source.as_ref())?;
        let mut row = result.row;
        fill_rates(&mut row, rows.last(), false, 2);
        on_row(&row)?;
        let done = row.dofs >= cfg.max_dofs;
        rows.push(row);
        if done {
            break;
        }
        let marked = dorfler_mark(&result.report.eta(), cfg.theta);
        mesh = Arc::new(refine_bisect(&mesh, &marked)?);
    }
    Ok(rows)
}
