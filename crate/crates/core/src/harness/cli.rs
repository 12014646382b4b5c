use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use super::config::{ConfigFile, ConfigOverrides, StudyConfig};
use super::problems::{find_problem, registry, ProblemSpec};
use super::study::{
    evaluate_level, run_adaptive_with, run_convergence_with, solve_problem, STUDY_CSV_HEADER,
};
use crate::derham::{Bc, DiscreteComplex};
use crate::error::{FeecError, Result};
use crate::estimator::{gap_bound, Mode};
use crate::hodge::harmonic_basis;
use crate::mesh::{generate, read_mesh, Domain, SimplicialComplex};
use crate::numfmt::fmt_f64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "feec",
    version,
    about = "Mixed Hodge Laplacian solves and a posteriori error estimation"
)]
struct Cli {
    /// key=value file with study settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print counts and geometry of a mesh file or `gen:<domain>:<resolution>`.
    MeshInfo { mesh: String },
    /// List the built-in problems.
    Problems,
    /// Solve a registry problem and write the discrete solution as JSON.
    Solve {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve and write per-cell indicators (CSV) and the global report (JSON).
    Estimate {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        est: EstimatorFlags,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Harmonic forms of a mesh: dimension, gap indicators and their norm.
    Harmonic {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "natural")]
        bc: Bc,
        #[arg(long = "mesh", value_name = "MESH")]
        mesh_flag: Option<String>,
        #[arg(value_name = "MESH")]
        mesh: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Uniform refinement study.
    Converge {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        levels: Option<usize>,
        #[command(flatten)]
        est: EstimatorFlags,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Adaptive refinement study with Dörfler marking (2-D).
    Adapt {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        max_dofs: Option<usize>,
        #[command(flatten)]
        est: EstimatorFlags,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct Target {
    #[arg(long)]
    problem: String,
    /// Must match the problem's form degree when given.
    #[arg(long)]
    k: Option<usize>,
    /// Must match the problem's boundary condition when given.
    #[arg(long)]
    bc: Option<Bc>,
    /// Mesh file or `gen:<domain>:<resolution>`; defaults to the problem's base mesh.
    #[arg(long)]
    mesh: Option<String>,
}

#[derive(Args, Debug)]
struct EstimatorFlags {
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    osc_degree: Option<usize>,
}

/// Exit status for an error: input and usage problems map to 2, failures of
/// the numerics to 1.
pub fn exit_code(e: &FeecError) -> i32 {
    match e {
        FeecError::InvalidMesh(_)
        | FeecError::NonConforming(_)
        | FeecError::DegenerateCell { .. }
        | FeecError::UnsupportedDimension(_)
        | FeecError::Unsupported(_)
        | FeecError::UnknownDomain(_)
        | FeecError::UnknownProblem(_)
        | FeecError::InvalidDegree { .. }
        | FeecError::Parse { .. }
        | FeecError::Io { .. }
        | FeecError::InvalidArgument(_) => EXIT_USAGE,
        FeecError::PolyDegreeOverflow(_)
        | FeecError::DimensionMismatch(_)
        | FeecError::RankAmbiguous(_)
        | FeecError::RankDeficient(_)
        | FeecError::Singular(_)
        | FeecError::SolveTolerance { .. }
        | FeecError::RegularityDataRequired(_)
        | FeecError::Missing(_) => EXIT_NUMERICAL,
    }
}

/// Parse `gen:<domain>:<resolution>` or read a mesh file.
pub fn load_mesh(spec: &str) -> Result<SimplicialComplex> {
    if let Some(rest) = spec.strip_prefix("gen:") {
        let (name, res) = rest.split_once(':').ok_or_else(|| {
            FeecError::InvalidArgument(format!("expected gen:<domain>:<resolution>, got `{spec}`"))
        })?;
        let domain: Domain = name.parse()?;
        let res: usize = res.parse().map_err(|_| {
            FeecError::InvalidArgument(format!("bad resolution `{res}` in `{spec}`"))
        })?;
        return generate(domain, res);
    }
    read_mesh(spec)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| FeecError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn overrides(est: Option<&EstimatorFlags>, seed: Option<u64>) -> ConfigOverrides {
    ConfigOverrides {
        mode: est.and_then(|e| e.mode),
        osc_degree: est.and_then(|e| e.osc_degree),
        seed,
        ..Default::default()
    }
}

fn resolve_target(t: &Target) -> Result<(ProblemSpec, SimplicialComplex)> {
    let spec = find_problem(&t.problem)?;
    if let Some(k) = t.k.filter(|&k| k != spec.k) {
        return Err(FeecError::InvalidArgument(format!(
            "problem `{}` is posed for k={}, not k={k}",
            spec.name, spec.k
        )));
    }
    if let Some(bc) = t.bc.filter(|&bc| bc != spec.bc) {
        return Err(FeecError::InvalidArgument(format!(
            "problem `{}` uses {} boundary conditions, not {bc}",
            spec.name, spec.bc
        )));
    }
    let mesh = match &t.mesh {
        Some(m) => load_mesh(m)?,
        None => spec.base_mesh()?,
    };
    if mesh.dim() != spec.n() {
        return Err(FeecError::InvalidArgument(format!(
            "problem `{}` is {}-D but the mesh is {}-D",
            spec.name,
            spec.n(),
            mesh.dim()
        )));
    }
    Ok((spec, mesh))
}

/// Streams study rows to a file or stdout so that a failing level leaves
/// the finished rows behind.
struct TableSink {
    out: Box<dyn Write>,
    path: Option<PathBuf>,
}

impl TableSink {
    fn open(path: Option<&Path>) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(std::fs::File::create(p).map_err(|e| FeecError::io(p, e))?),
            None => Box::new(std::io::stdout()),
        };
        let mut sink = TableSink {
            out,
            path: path.map(Path::to_path_buf),
        };
        sink.line(STUDY_CSV_HEADER)?;
        Ok(sink)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        let path = self
            .path
            .clone()
            .unwrap_or_else(|| PathBuf::from("<stdout>"));
        writeln!(self.out, "{s}")
            .and_then(|_| self.out.flush())
            .map_err(|e| FeecError::io(path, e))
    }
}

fn mesh_info(mesh: &SimplicialComplex) -> String {
    let n = mesh.dim();
    let faces: Vec<String> = (0..=n).map(|k| mesh.num_faces(k).to_string()).collect();
    let boundary = (0..mesh.num_faces(n - 1))
        .filter(|&f| mesh.is_boundary(n - 1, f))
        .count();
    let g = mesh.geometry();
    let min_vol = g
        .volume
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    let max_shape = g.shape_ratio.iter().copied().fold(0.0, f64::max);
    format!(
        "dim={n}\nvertices={}\ncells={}\nfaces={}\nboundary_facets={boundary}\neuler_characteristic={}\nh_max={}\nmin_volume={}\nmax_shape_ratio={}\n",
        mesh.num_vertices(),
        mesh.num_cells(),
        faces.join(","),
        mesh.euler_characteristic(),
        fmt_f64(mesh.h_max()),
        fmt_f64(min_vol),
        fmt_f64(max_shape),
    )
}

fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => Some(ConfigFile::read(p)?),
        None => None,
    };
    let file = file.as_ref();
    match cli.command {
        Command::MeshInfo { mesh } => {
            print!("{}", mesh_info(&load_mesh(&mesh)?));
        }
        Command::Problems => {
            for p in registry() {
                println!(
                    "{}\tn={}\tk={}\tbc={}\t{}",
                    p.name,
                    p.n(),
                    p.k,
                    p.bc,
                    p.description
                );
            }
        }
        Command::Solve { target, out, seed } => {
            let cfg = StudyConfig::resolve(file, &overrides(None, seed))?;
            let (spec, mesh) = resolve_target(&target)?;
            let cx = DiscreteComplex::with_seed(Arc::new(mesh), spec.bc, cfg.seed);
            let sol = solve_problem(&spec, &cx)?;
            write_output(out.as_deref().or(cfg.out.as_deref()), &sol.to_json())?;
        }
        Command::Estimate {
            target,
            est,
            out_csv,
            out_json,
            seed,
        } => {
            let mut flags = overrides(Some(&est), seed);
            flags.out_csv = out_csv;
            flags.out_json = out_json;
            let cfg = StudyConfig::resolve(file, &flags)?;
            let (spec, mesh) = resolve_target(&target)?;
            let source = spec
                .exact
                .as_ref()
                .map(crate::estimator::ErrorSource::Exact);
            let result = evaluate_level(&spec, Arc::new(mesh), &cfg, 0, source.as_ref())?;
            if let Some(p) = &cfg.out_csv {
                result.report.write_csv(p)?;
            }
            match &cfg.out_json {
                Some(p) => result.report.write_json(p)?,
                None => print!("{}", result.report.to_json()),
            }
        }
        Command::Harmonic {
            k,
            bc,
            mesh_flag,
            mesh,
            seed,
        } => {
            let cfg = StudyConfig::resolve(file, &overrides(None, seed))?;
            let spec = match (mesh_flag, mesh) {
                (Some(m), None) | (None, Some(m)) => m,
                (Some(_), Some(_)) => {
                    return Err(FeecError::InvalidArgument(
                        "give the mesh either as --mesh or positionally".into(),
                    ))
                }
                (None, None) => {
                    return Err(FeecError::InvalidArgument("a mesh is required".into()))
                }
            };
            let cx = DiscreteComplex::with_seed(Arc::new(load_mesh(&spec)?), bc, cfg.seed);
            let basis = harmonic_basis(&cx, k)?;
            let gap = gap_bound(&cx, &basis)?;
            let mu_i: Vec<String> = gap.mu_i.iter().map(|&m| fmt_f64(m)).collect();
            println!("dim={}", basis.dim());
            println!("mu_i={}", mu_i.join(","));
            println!("mu={}", fmt_f64(gap.mu));
        }
        Command::Converge {
            problem,
            levels,
            est,
            out,
            seed,
        } => {
            let mut flags = overrides(Some(&est), seed);
            flags.levels = levels;
            flags.out = out;
            let cfg = StudyConfig::resolve(file, &flags)?;
            let spec = find_problem(&problem)?;
            let mut sink = TableSink::open(cfg.out.as_deref())?;
            run_convergence_with(&spec, &cfg, &mut |row| sink.line(&row.csv_line()))?;
        }
        Command::Adapt {
            problem,
            theta,
            max_dofs,
            est,
            out,
            seed,
        } => {
            let mut flags = overrides(Some(&est), seed);
            flags.theta = theta;
            flags.max_dofs = max_dofs;
            flags.out = out;
            let cfg = StudyConfig::resolve(file, &flags)?;
            let spec = find_problem(&problem)?;
            let mut sink = TableSink::open(cfg.out.as_deref())?;
            run_adaptive_with(&spec, &cfg, &mut |row| sink.line(&row.csv_line()))?;
        }
    }
    Ok(())
}

/// Run the command line and return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
