//! Convergence studies, coefficient-table dumps and mesh generation behind
//! the `bsquad` command.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use bsquad::biharmonic::{error_norms, rates, solve_problem, ErrorNorms, ProblemSpec, WeakForm};
use bsquad::bs_element::{build_basis_explicit, ElementSpec, LocalDof, VertexData};
use bsquad::functions::{clamped_polynomial, CachedPoly, CosSin, Poly2, SinCos, SmoothFunction};
use bsquad::global_space::{dimension_formula, GlobalSpace};
use bsquad::{mesh_gen, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const MAX_LEVELS: usize = 8;

pub const CSV_HEADER: &str =
    "level,h,ndof,err_linf,err_l2_rel,err_h1_rel,err_h2_rel,rate_linf,rate_l2,rate_h1,rate_h2";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bsquad::Error),
    #[error("{0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Where the level-0 mesh comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    /// A built-in generator, `NAME[:PARAMS]`.
    Generator(String),
}

impl MeshSource {
    fn describe(&self) -> String {
        match self {
            MeshSource::File(p) => format!("file {}", p.display()),
            MeshSource::Generator(g) => format!("generator {g}"),
        }
    }

    /// The mesh of refinement level `level`. Trapezoid meshes are generated
    /// afresh per level; everything else is refined regularly.
    fn mesh(&self, level: usize) -> Result<Mesh> {
        match self {
            MeshSource::File(p) => Ok(Mesh::load(p)?.refine_times(level)),
            MeshSource::Generator(g) => {
                let mut parts = g.splitn(2, ':');
                if parts.next() == Some("trapezoid") {
                    let base: usize = match parts.next() {
                        Some(s) => s.parse().map_err(|_| CliError::Config(format!("bad trapezoid level {s:?}")))?,
                        None => 0,
                    };
                    Ok(mesh_gen::trapezoid(base + level)?)
                } else {
                    Ok(mesh_gen::by_name::<f64>(g)?.refine_times(level))
                }
            }
        }
    }
}

/// Manufactured solutions available from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    /// `-4 cos(x/2) sin(y/2)`.
    CosSin,
    /// `sin(x) cos(y)`.
    SinCos,
    /// `(x^3 + 5y^2 - 10y^3 + y^4)^2 / 4`, clamped on the unit square.
    ClampedPolynomial,
    /// A random polynomial of total degree `p` drawn from the seed; the
    /// discrete space contains it, so errors sit at round-off level.
    Patch,
}

impl Problem {
    pub const NAMES: [&'static str; 4] = ["cos-sin", "sin-cos", "clamped-polynomial", "patch"];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "cos-sin" => Ok(Problem::CosSin),
            "sin-cos" => Ok(Problem::SinCos),
            "clamped-polynomial" => Ok(Problem::ClampedPolynomial),
            "patch" => Ok(Problem::Patch),
            _ => Err(CliError::Config(format!("unknown problem {name:?}; expected one of {}", Problem::NAMES.join(", ")))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::CosSin => "cos-sin",
            Problem::SinCos => "sin-cos",
            Problem::ClampedPolynomial => "clamped-polynomial",
            Problem::Patch => "patch",
        }
    }

    fn solution(self, degree: usize, seed: u64) -> Arc<dyn SmoothFunction<f64>> {
        match self {
            Problem::CosSin => Arc::new(CosSin),
            Problem::SinCos => Arc::new(SinCos),
            Problem::ClampedPolynomial => Arc::new(clamped_polynomial::<f64>()),
            Problem::Patch => Arc::new(random_polynomial(degree, seed)),
        }
    }
}

/// Polynomial of total degree `degree` with coefficients uniform in `[-1, 1]`.
pub fn random_polynomial(degree: usize, seed: u64) -> CachedPoly<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Poly2::constant(0.0);
    for i in 0..=degree {
        for j in 0..=degree - i {
            p = p.add(&Poly2::monomial(i, j).scale(rng.gen_range(-1.0..1.0)));
        }
    }
    CachedPoly::new(p)
}

pub fn parse_weak_form(name: &str) -> Result<WeakForm> {
    match name {
        "laplacian" => Ok(WeakForm::Laplacian),
        "hessian" => Ok(WeakForm::Hessian),
        _ => Err(CliError::Config(format!("unknown weak form {name:?}; expected laplacian or hessian"))),
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub degree: usize,
    pub segments: usize,
    pub levels: usize,
    pub mesh: MeshSource,
    pub problem: Problem,
    pub weak_form: WeakForm,
    pub seed: u64,
}

impl RunConfig {
    /// A configuration with the default segment count for `degree`.
    pub fn new(degree: usize, levels: usize, mesh: MeshSource, problem: Problem) -> Result<Self> {
        let spec = ElementSpec::default_for(degree)?;
        let cfg = Self { degree, segments: spec.segments, levels, mesh, problem, weak_form: WeakForm::Laplacian, seed: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<ElementSpec> {
        Ok(ElementSpec::new(self.degree, self.segments)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels > MAX_LEVELS {
            return Err(CliError::Config(format!("at most {MAX_LEVELS} levels, got {}", self.levels)));
        }
        self.spec().map(|_| ())
    }
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub errors: ErrorNorms,
    /// Rates against the previous level, `None` on the first.
    pub rates: Option<[f64; 4]>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: RunConfig,
    pub rows: Vec<LevelResult>,
}

fn mesh_size(mesh: &Mesh) -> f64 {
    mesh.edges().iter().map(|e| e.length).fold(0.0, f64::max)
}

pub fn run_convergence(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let spec = config.spec()?;
    let exact = config.problem.solution(config.degree, config.seed);
    let problem = ProblemSpec::manufactured(exact.clone(), config.weak_form)?;
    let mut rows: Vec<LevelResult> = Vec::with_capacity(config.levels + 1);
    for level in 0..=config.levels {
        let mesh = config.mesh.mesh(level)?;
        let h = mesh_size(&mesh);
        let formula = dimension_formula(&mesh, spec);
        let space = GlobalSpace::new(mesh, spec)?;
        debug_assert_eq!(space.dim(), formula);
        let solution = solve_problem(&space, &problem)?;
        let errors = error_norms(&space, &solution.coeffs, exact.as_ref())?;
        let rates = rows.last().map(|prev| rates(&prev.errors, &errors));
        rows.push(LevelResult { level, h, ndof: space.dim(), errors, rates });
    }
    Ok(Report { config: config.clone(), rows })
}

impl Report {
    /// CSV with `#` metadata lines ahead of the header. Numbers use the
    /// shortest round-trip representation, so output is bit-stable.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "# degree={} segments={}", c.degree, c.segments);
        let _ = writeln!(out, "# mesh={}", c.mesh.describe());
        let _ = writeln!(out, "# problem={} seed={}", c.problem.name(), c.seed);
        let _ = writeln!(out, "# weak_form={}", c.weak_form.name());
        let _ = writeln!(out, "{CSV_HEADER}");
        for r in &self.rows {
            let e = r.errors.as_array();
            let _ = write!(out, "{},{},{},{:e},{:e},{:e},{:e}", r.level, r.h, r.ndof, e[0], e[1], e[2], e[3]);
            match r.rates {
                Some(rt) => {
                    let _ = writeln!(out, ",{},{},{},{}", rt[0], rt[1], rt[2], rt[3]);
                }
                None => out.push_str(",,,,\n"),
            }
        }
        out
    }
}

/// Gnuplot script drawing the four error columns of `csv` against NDOF.
pub fn gnuplot_script(csv: &str, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'NDOF'");
    let _ = writeln!(s, "set ylabel 'error'");
    let _ = writeln!(s, "set key bottom left");
    let _ = writeln!(s, "set title '{}'", title.replace('\'', ""));
    let cols = [(4, "L-infinity"), (5, "relative L2"), (6, "relative H1"), (7, "relative H2")];
    let plots: Vec<String> =
        cols.iter().map(|(c, name)| format!("'{csv}' using 3:{c} skip 5 with linespoints title '{name}'")).collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

fn dof_label(d: LocalDof) -> String {
    match d {
        LocalDof::Vertex { corner, data } => {
            let name = match data {
                VertexData::Value => "value",
                VertexData::Dx => "dx",
                VertexData::Dy => "dy",
                VertexData::Dxx => "dxx",
                VertexData::Dxy => "dxy",
                VertexData::Dyy => "dyy",
            };
            format!("vertex corner={corner} {name}")
        }
        LocalDof::EdgePoint { edge, index } => format!("edge-point edge={edge} index={index}"),
        LocalDof::EdgeNormal { edge, index } => format!("edge-normal edge={edge} index={index}"),
        LocalDof::Interior { j1, j2 } => format!("interior j1={j1} j2={j2}"),
    }
}

/// Tensor coefficients of every local basis function on `corners`, built
/// from the closed-form tables. Each block starts with a `#` label line and
/// holds `n` rows of `n` entries, row `j2` listing `j1 = 0..n`.
pub fn dump_tables(degree: usize, corners: [[f64; 2]; 4]) -> Result<String> {
    let basis = build_basis_explicit(&bsquad::quad_mesh::BilinearMap::new(corners), degree)?;
    let n = basis.spec().n();
    let mut out = String::new();
    let _ = writeln!(out, "# degree={degree} n={n} corners={corners:?}");
    for (f, d) in basis.dofs().into_iter().enumerate() {
        let t = basis.table(f);
        let _ = writeln!(out, "# function {f}: {}", dof_label(d));
        for j2 in 0..n {
            let row: Vec<String> = (0..n).map(|j1| format!("{:?}", t.get(j1, j2))).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
    }
    Ok(out)
}

/// Mesh JSON of a built-in generator.
pub fn generate_mesh(name: &str) -> Result<String> {
    Ok(mesh_gen::by_name::<f64>(name)?.to_json_string())
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
