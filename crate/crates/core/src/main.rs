use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use quasivem::convergence::{run_convergence, ConvergenceConfig, MeshSource, SolverChoice};
use quasivem::mesh::MeshKind;
use quasivem::problems::problem_by_name;
use quasivem::solver::SolverOptions;

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Fp,
    Newton,
    Both,
}

/// Convergence study for -div(kappa(u) grad u) = f with conforming virtual
/// elements on polygonal meshes of the unit square.
#[derive(Debug, Parser)]
#[command(name = "quasivem", version)]
struct Cli {
    /// squares, triangles, quads, voronoi, or file=PATH for a .pmesh file.
    #[arg(long, default_value = "voronoi", value_parser = parse_mesh_source)]
    mesh: MeshSource,
    /// Subdivisions of the coarsest generated mesh.
    #[arg(long, default_value_t = 8)]
    n0: usize,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Both)]
    solver: SolverArg,
    /// Relative increment tolerance of the nonlinear iterations.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// paper or patch:<degree>.
    #[arg(long, default_value = "paper")]
    problem: String,
    /// CSV destination; the table goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write projector CSVs and the assembled matrix of every level next to
    /// the output (or into ./matrices).
    #[arg(long)]
    dump_matrices: bool,
    /// Report absolute instead of relative errors.
    #[arg(long)]
    absolute_errors: bool,
}

fn parse_mesh_source(s: &str) -> Result<MeshSource, String> {
    if let Some(path) = s.strip_prefix("file=") {
        return Ok(MeshSource::File(PathBuf::from(path)));
    }
    s.parse::<MeshKind>().map(MeshSource::Generated).map_err(|e| e.to_string())
}

fn dump_dir(out: Option<&PathBuf>) -> PathBuf {
    match out {
        Some(p) => {
            let stem = p.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
            p.with_file_name(format!("{stem}_matrices"))
        }
        None => PathBuf::from("matrices"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let problem = match problem_by_name(&cli.problem) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    if cli.degree < 1 || cli.n0 < 1 || !(cli.tol > 0.0) {
        eprintln!("error: --degree and --n0 must be at least 1 and --tol positive");
        return ExitCode::from(EXIT_INPUT);
    }
    let config = ConvergenceConfig {
        mesh: cli.mesh.clone(),
        n0: cli.n0,
        levels: cli.levels,
        degree: cli.degree,
        solver: match cli.solver {
            SolverArg::Fp => SolverChoice::FixedPoint,
            SolverArg::Newton => SolverChoice::Newton,
            SolverArg::Both => SolverChoice::Both,
        },
        options: SolverOptions {
            tol: cli.tol,
            max_iter: cli.max_iter,
            ..SolverOptions::default()
        },
        seed: cli.seed,
        absolute_errors: cli.absolute_errors,
        dump_dir: cli.dump_matrices.then(|| dump_dir(cli.out.as_ref())),
    };
    let study = match run_convergence(&config, &problem) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let csv = study.to_csv();
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &csv) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => print!("{csv}"),
    }
    if study.converged() {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: nonlinear solver did not reach tolerance {:e}", cli.tol);
        ExitCode::from(EXIT_NOT_CONVERGED)
    }
}
