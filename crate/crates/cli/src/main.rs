use std::path::PathBuf;
use std::process::ExitCode;

use bsquad_cli::{
    dump_tables, generate_mesh, gnuplot_script, parse_weak_form, run_convergence, write_file, CliError, MeshSource,
    Problem, RunConfig,
};
use clap::{Parser, Subcommand};

/// Convergence studies for the clamped biharmonic problem with C¹
/// quadrilateral macro-elements.
#[derive(Debug, Parser)]
#[command(name = "bsquad", version)]
struct Args {
    #[command(subcommand)]
    command: Option<Command>,

    /// Polynomial degree (at least 3).
    #[arg(long, default_value_t = 3)]
    degree: usize,

    /// Spline segments per element side; defaults to max(1, 6 - degree).
    #[arg(long)]
    segments: Option<usize>,

    /// Number of regular refinements after the initial mesh (at most 8).
    #[arg(long, default_value_t = 3)]
    levels: usize,

    /// Initial mesh as JSON.
    #[arg(long, conflicts_with = "generate")]
    mesh: Option<PathBuf>,

    /// Built-in initial mesh, NAME[:PARAMS]; `unstructured` for studies and
    /// the unit square for table dumps when absent.
    #[arg(long)]
    generate: Option<String>,

    /// Manufactured solution: cos-sin, sin-cos, clamped-polynomial or patch.
    #[arg(long, default_value = "cos-sin")]
    problem: String,

    /// Bilinear form: laplacian or hessian.
    #[arg(long, default_value = "laplacian")]
    weak_form: String,

    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write a gnuplot script plotting the CSV (requires --out).
    #[arg(long, requires = "out")]
    gnuplot: Option<PathBuf>,

    /// Print the coefficient tables of the first quad of the mesh instead
    /// of running a study.
    #[arg(long)]
    dump_tables: bool,

    /// Seed for random problem data.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a built-in mesh as JSON.
    GenerateMesh {
        /// Generator, NAME[:PARAMS]: unit-square-grid:N, l-shape, trapezoid:LEVEL,
        /// perturbed-grid:N:SEED:MAGNITUDE, extraordinary-vertex:VALENCE, unstructured.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: Args) -> Result<(), CliError> {
    if let Some(Command::GenerateMesh { name, out }) = &args.command {
        return emit(out.as_ref(), &generate_mesh(name)?);
    }
    if args.dump_tables {
        let base = match (&args.mesh, &args.generate) {
            (Some(p), _) => bsquad::Mesh::load(p)?,
            (None, Some(g)) => bsquad::mesh_gen::by_name(g)?,
            (None, None) => bsquad::mesh_gen::unit_square_grid(1)?,
        };
        let corners = base.param_map(0).corners;
        return emit(args.out.as_ref(), &dump_tables(args.degree, corners)?);
    }
    let mesh = match &args.mesh {
        Some(p) => MeshSource::File(p.clone()),
        None => MeshSource::Generator(args.generate.clone().unwrap_or_else(|| "unstructured".into())),
    };
    let mut config = RunConfig::new(args.degree, args.levels, mesh, Problem::parse(&args.problem)?)?;
    if let Some(k) = args.segments {
        config.segments = k;
    }
    config.weak_form = parse_weak_form(&args.weak_form)?;
    config.seed = args.seed;
    config.validate()?;
    let csv = run_convergence(&config)?.to_csv();
    emit(args.out.as_ref(), &csv)?;
    if let (Some(script), Some(out)) = (&args.gnuplot, &args.out) {
        let title = format!("degree {} {}", config.degree, config.problem.name());
        write_file(script, &gnuplot_script(&out.display().to_string(), &title))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
