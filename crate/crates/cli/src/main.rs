//! `h2nc`: convergence studies, exact verification and exports.

mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use h2nc::assembly::{assemble, build_dof_map, check_hypotheses, ElementCache};
use h2nc::element::ElementFamily;
use h2nc::estimate::{convergence_study, ExactSolution};
use h2nc::mesh::{extract_entities, uniform_cube_mesh};
use h2nc::verify;

use config::{parse_levels, Format, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: key `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },
    #[error("--{flag}: {msg}")]
    Flag { flag: &'static str, msg: String },
    #[error("{0}")]
    Core(#[from] h2nc::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Parser, Debug)]
#[command(name = "h2nc", version, about = "H2-nonconforming tetrahedral elements for the biharmonic equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve on a sequence of uniform cube meshes and tabulate errors and orders.
    Converge(Opts),
    /// Run the exact-arithmetic verification suite.
    Verify(Opts),
    /// Write the cube mesh of the first level.
    ExportMesh(Opts),
    /// Write the assembled stiffness matrix (Matrix Market) of the first level.
    ExportMatrix(Opts),
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// p3, p4e8, p4e6, p5e7 or general:<l>
    #[arg(long)]
    element: Option<String>,
    /// `1..4` or a comma list
    #[arg(long)]
    levels: Option<String>,
    /// direct or cg
    #[arg(long)]
    solver: Option<String>,
    /// csv or markdown
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `key = value` file; flags given on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn resolve(opts: &Opts) -> Result<RunConfig, CliError> {
    let mut cfg = match &opts.config {
        Some(p) => RunConfig::parse(&read(p)?)?,
        None => RunConfig::default(),
    };
    let flag = |flag: &'static str| move |msg: String| CliError::Flag { flag, msg };
    if let Some(v) = &opts.element {
        cfg.set("element", v).map_err(flag("element"))?;
    }
    if let Some(v) = &opts.levels {
        cfg.levels = parse_levels(v).map_err(flag("levels"))?;
    }
    if let Some(v) = &opts.solver {
        cfg.set("solver", v).map_err(flag("solver"))?;
    }
    if let Some(v) = &opts.format {
        cfg.format = v.parse::<Format>().map_err(flag("format"))?;
    }
    if let Some(v) = &opts.out {
        cfg.out = Some(v.clone());
    }
    if let Some(n) = opts.threads {
        cfg.set("threads", &n.to_string()).map_err(flag("threads"))?;
    }
    if opts.seed.is_some() {
        cfg.seed = opts.seed;
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(p, text).map_err(|source| CliError::Io {
        path: p.display().to_string(),
        source,
    })
}

fn element_or_default(cfg: &RunConfig) -> ElementFamily {
    cfg.element.unwrap_or(ElementFamily::P4E6)
}

fn converge(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let family = element_or_default(cfg);
    let report = convergence_study(family, &cfg.levels, cfg.solver, cfg.seed.unwrap_or(0))?;
    for r in &report.rows {
        eprintln!(
            "level {}: {} tets, {} dofs, residual {:.1e}, galerkin {:.1e}, {:.2}s",
            r.level, r.tets, r.ndofs, r.stats.residual, r.galerkin, r.seconds
        );
    }
    emit(cfg, &output::table(&report, cfg.format))?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let mut report = verify::run_all()?;
    if let Some(seed) = cfg.seed {
        let families = match cfg.element {
            Some(f) => vec![f],
            None => vec![
                ElementFamily::GeneralEnriched(3),
                ElementFamily::GeneralEnriched(4),
                ElementFamily::P4E6,
                ElementFamily::P5E7,
            ],
        };
        let mesh = uniform_cube_mesh(2)?;
        let ents = extract_entities(&mesh)?;
        let mut worst = 0.0f64;
        for f in families {
            let map = build_dof_map(&mesh, &ents, f);
            let cache = ElementCache::build(&mesh, &map)?;
            worst = worst.max(check_hypotheses(&mesh, &ents, &map, &cache, 20, seed)?.max());
        }
        report.hypothesis_residual = Some(worst);
    }
    let text = report.render();
    match &cfg.out {
        Some(p) => {
            write_file(p, &text)?;
            write_file(&p.with_extension("verdict"), &report.verdict())?;
        }
        None => print!("{text}"),
    }
    Ok(if report.failures() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn export_mesh(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let mesh = uniform_cube_mesh(cfg.levels[0])?;
    let mut buf = Vec::new();
    mesh.write_ascii(&mut buf).expect("write to memory");
    emit(cfg, &String::from_utf8(buf).expect("ascii"))?;
    Ok(ExitCode::SUCCESS)
}

fn export_matrix(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let mesh = uniform_cube_mesh(cfg.levels[0])?;
    let ents = extract_entities(&mesh)?;
    let map = build_dof_map(&mesh, &ents, element_or_default(cfg));
    let cache = ElementCache::build(&mesh, &map)?;
    let exact = ExactSolution;
    let sys = assemble(&mesh, &map, &cache, &|x| exact.rhs(x))?;
    emit(cfg, &output::matrix_market(&sys))?;
    if let Some(p) = &cfg.out {
        write_file(&p.with_extension("rhs.mtx"), &output::rhs_array(&sys))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (opts, f): (&Opts, fn(&RunConfig) -> Result<ExitCode, CliError>) = match &cli.command {
        Command::Converge(o) => (o, converge),
        Command::Verify(o) => (o, run_verify),
        Command::ExportMesh(o) => (o, export_mesh),
        Command::ExportMatrix(o) => (o, export_matrix),
    };
    let cfg = resolve(opts)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Flag {
                flag: "threads",
                msg: e.to_string(),
            })?;
    }
    f(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
