use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coopinf::io::{read_matrix, write_matrix, Format};
use coopinf::matrix::{column_normalize, row_normalize, DEFAULT_TOLERANCE};
use coopinf::qgaussian::{
    axis, axis_range, phase_diagram, PhaseDiagramConfig, DEFAULT_AXIS_MAX, DEFAULT_AXIS_STEP,
    DEFAULT_FIT_STEP,
};
use coopinf::sinkhorn::{
    cooperative_index_report, cooperative_iterate, CiMode, IterationOptions, Priors, Side,
};
use coopinf::structure::{count_positive_diagonals_with_cap, triangularize, DEFAULT_PERMANENT_CAP};
use coopinf::teaching::{
    average_teaching_dimension, build_threshold_learner, teaching_dimension, ConsistencyMatrix,
    Extended, ThresholdProblem,
};
use coopinf::transmission::{
    expected_teaching_dimension, machine_teaching_matrix, simulate_transmission, ti_certificate,
    TieRule,
};
use coopinf::{
    ColumnStochasticMatrix, Error, NonnegativeMatrix, Permutation, RowStochasticMatrix, SpaceIndex,
};

const EXIT_CODES: &str = "\
Exit status:
  0  success
  2  invalid command line
  3  file could not be read or written
  4  malformed input (unparsable file, negative or non-finite entry, ragged rows,
     matrix not stochastic where required)
  5  dimension mismatch (shapes disagree, or a square matrix was required)
  6  the computation's precondition failed (e.g. no positive diagonal, zero
     matrix, undefined ETD, permanent too large)";

/// Transmission and cooperative indices for teacher-learner matrices.
///
/// Matrices have one row per data set and one column per concept.
#[derive(Parser, Debug)]
#[command(name = "coopinf", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Convergence tolerance for the cooperative iteration.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive_f64)]
    tol: f64,
    /// Iteration cap for the cooperative iteration.
    #[arg(long, global = true, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Format of written matrices, and of input files without a .csv or .json extension.
    #[arg(long, global = true, value_enum)]
    format: Option<FileFormat>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Decimal places in printed numbers.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FileFormat {
    Csv,
    Json,
}

impl From<FileFormat> for Format {
    fn from(f: FileFormat) -> Self {
        match f {
            FileFormat::Csv => Format::Csv,
            FileFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Structural,
    Iterative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Learner,
    Teacher,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TieArg {
    Uniform,
    Lowest,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transmission index of a learner/teacher pair, with its optimality certificate.
    Ti {
        learner: PathBuf,
        teacher: PathBuf,
        /// Normalize the inputs (rows of the learner, columns of the teacher) first.
        #[arg(long)]
        normalize: bool,
    },
    /// Expected teaching dimension of the row/column normalizations of a matrix.
    Etd {
        matrix: PathBuf,
        /// Use this teacher matrix instead of the column normalization.
        #[arg(long)]
        teacher: Option<PathBuf>,
        /// Comma-separated data-set sizes (CSV input defaults to 1 each).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Teaching dimensions and their average for a 0/1 consistency matrix.
    Atd {
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Cooperative index with the unique-diagonal verdict.
    Ci {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "structural")]
        mode: ModeArg,
    },
    /// Run the cooperative iteration and print both limits.
    Sinkhorn {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "learner")]
        start: SideArg,
        /// Column of each row on a positive diagonal whose product is traced.
        #[arg(long, value_delimiter = ',')]
        diagonal: Option<Vec<usize>>,
        /// Comma-separated concept prior (one weight per column).
        #[arg(long, value_delimiter = ',')]
        concept_prior: Option<Vec<f64>>,
        /// Comma-separated data-set prior (one weight per row).
        #[arg(long, value_delimiter = ',')]
        dataset_prior: Option<Vec<f64>>,
        /// Write the per-step trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Number of positive diagonals (the permanent of the zero pattern).
    Diagonals {
        matrix: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PERMANENT_CAP)]
        cap: usize,
    },
    /// Row and column permutations making the matrix upper triangular, or "none".
    Triangularize { matrix: PathBuf },
    /// Machine teaching of threshold classifiers on a small version space.
    MtDemo {
        #[arg(long, value_enum, default_value = "uniform")]
        tie_rule: TieArg,
    },
    /// Monte Carlo estimate of the transmission index.
    Simulate {
        learner: PathBuf,
        teacher: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        episodes: u64,
        #[arg(long)]
        normalize: bool,
    },
    /// Cooperative index of the q-Gaussian regression experiment over an (a, delta) grid, as CSV.
    PhaseDiagram {
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        /// `LO:HI`; defaults to (0, 3].
        #[arg(long)]
        a_range: Option<String>,
        /// `LO:HI`; defaults to (0, 3].
        #[arg(long)]
        delta_range: Option<String>,
        #[arg(long, default_value_t = DEFAULT_AXIS_STEP, value_parser = positive_f64)]
        step: f64,
        /// Resolution of the offset grid used for maximum-likelihood fits.
        #[arg(long, default_value_t = DEFAULT_FIT_STEP, value_parser = positive_f64)]
        fit_step: f64,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        Error::NegativeEntry { .. }
        | Error::NonFiniteEntry { .. }
        | Error::EmptyMatrix
        | Error::RaggedRow { .. }
        | Error::Parse(_)
        | Error::NotStochastic { .. }
        | Error::InvalidSpaceIndex(_)
        | Error::ProbabilityOutOfRange { .. } => 4,
        Error::DimensionMismatch { .. } | Error::NotSquare { .. } => 5,
        _ => 6,
    }
}

struct Ctx<'a> {
    g: &'a Global,
}

impl Ctx<'_> {
    /// `.csv` and `.json` inputs are read by extension; other paths use `--format`.
    fn format_for(&self, path: &Path) -> Format {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match (ext.as_deref(), self.g.format) {
            (Some("json"), _) => Format::Json,
            (Some("csv"), _) => Format::Csv,
            (_, Some(f)) => f.into(),
            (_, None) => Format::Csv,
        }
    }

    fn read(&self, path: &Path) -> coopinf::Result<NonnegativeMatrix> {
        let file = File::open(path)
            .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        read_matrix(BufReader::new(file), self.format_for(path))
    }

    fn num(&self, v: f64) -> String {
        format!("{v:.*}", self.g.precision)
    }

    /// Integers print without decimals, everything else at the set precision.
    fn exact(&self, v: f64) -> String {
        if v.fract() == 0.0 && v.abs() < 1e15 {
            format!("{v:.0}")
        } else {
            self.num(v)
        }
    }

    fn table(&self, out: &mut String, m: &NonnegativeMatrix) {
        let cells: Vec<Vec<String>> = (0..m.rows())
            .map(|i| m.row(i).iter().map(|&v| self.num(v)).collect())
            .collect();
        let ix = m.index();
        let col_width = cells
            .iter()
            .flatten()
            .map(String::len)
            .chain(
                ix.iter()
                    .flat_map(|ix| ix.concept_labels().iter().map(String::len)),
            )
            .max()
            .unwrap_or(0);
        let row_width = ix.map_or(0, |ix| {
            ix.dataset_labels()
                .iter()
                .map(String::len)
                .max()
                .unwrap_or(0)
        });
        let pad = |v: &[String]| {
            v.iter()
                .map(|c| format!("{c:>col_width$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        if let Some(ix) = ix {
            let _ = writeln!(out, "{:row_width$}  {}", "", pad(ix.concept_labels()));
        }
        for (i, row) in cells.iter().enumerate() {
            match ix {
                Some(ix) => {
                    let _ = writeln!(out, "{:row_width$}  {}", ix.dataset_labels()[i], pad(row));
                }
                None => {
                    let _ = writeln!(out, "{}", pad(row));
                }
            }
        }
    }

    fn learner(&self, path: &Path, normalize: bool) -> coopinf::Result<RowStochasticMatrix> {
        let m = self.read(path)?;
        if normalize {
            Ok(row_normalize(&m))
        } else {
            RowStochasticMatrix::new(m, DEFAULT_TOLERANCE)
        }
    }

    fn teacher(&self, path: &Path, normalize: bool) -> coopinf::Result<ColumnStochasticMatrix> {
        let m = self.read(path)?;
        if normalize {
            Ok(column_normalize(&m))
        } else {
            ColumnStochasticMatrix::new(m, DEFAULT_TOLERANCE)
        }
    }
}

fn sizes_for(m: &NonnegativeMatrix, sizes: Option<Vec<usize>>) -> coopinf::Result<Vec<usize>> {
    match sizes {
        Some(s) if s.len() != m.rows() => Err(Error::DimensionMismatch {
            expected: (m.rows(), 1),
            found: (s.len(), 1),
        }),
        Some(s) => Ok(s),
        None => Ok(m
            .index()
            .map_or_else(|| vec![1; m.rows()], |ix| ix.dataset_sizes().to_vec())),
    }
}

fn parse_range(s: &str) -> coopinf::Result<(f64, f64)> {
    let bad = || Error::InvalidArgument(format!("range {s:?} is not LO:HI"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

fn max_iter(g: &Global) -> usize {
    usize::try_from(g.max_iter).unwrap_or(usize::MAX)
}

fn run(cli: Cli) -> coopinf::Result<String> {
    let ctx = Ctx { g: &cli.global };
    let g = &cli.global;
    let mut out = String::new();
    match cli.command {
        Command::Ti {
            learner,
            teacher,
            normalize,
        } => {
            let l = ctx.learner(&learner, normalize)?;
            let t = ctx.teacher(&teacher, normalize)?;
            let cert = ti_certificate(&l, &t, DEFAULT_TOLERANCE)?;
            let _ = writeln!(out, "TI = {}", ctx.num(cert.ti_value));
            if cert.condition_i_holds {
                let _ = writeln!(out, "condition (i): holds");
            } else {
                let at: Vec<String> = cert
                    .violations
                    .iter()
                    .map(|(i, j)| format!("({i}, {j})"))
                    .collect();
                let _ = writeln!(out, "condition (i): violated at {}", at.join(", "));
            }
            if cert.condition_ii_holds {
                let _ = writeln!(out, "condition (ii): holds");
            } else {
                let cols: Vec<String> = cert.zero_columns.iter().map(usize::to_string).collect();
                let _ = writeln!(
                    out,
                    "condition (ii): violated, zero columns {}",
                    cols.join(", ")
                );
            }
            let _ = writeln!(
                out,
                "optimal: {}",
                if cert.is_optimal() { "yes" } else { "no" }
            );
        }
        Command::Etd {
            matrix,
            teacher,
            sizes,
        } => {
            let m = ctx.read(&matrix)?;
            let sizes = sizes_for(&m, sizes)?;
            let l = row_normalize(&m);
            let t = match teacher {
                Some(p) => ctx.teacher(&p, false)?,
                None => column_normalize(&m),
            };
            let etd = expected_teaching_dimension(&l, &t, &sizes)?;
            let _ = writeln!(out, "ETD = {}", ctx.exact(etd));
        }
        Command::Atd { matrix, sizes } => {
            let m = ctx.read(&matrix)?;
            let sizes = sizes_for(&m, sizes)?;
            let index = match m.index() {
                Some(ix) => SpaceIndex::new(
                    ix.concept_labels().to_vec(),
                    ix.dataset_labels().to_vec(),
                    sizes,
                )?,
                None => SpaceIndex::with_sizes(m.cols(), sizes)?,
            };
            let c = ConsistencyMatrix::new(m.with_index(index)?)?;
            let names = c
                .index()
                .expect("consistency matrices carry an index")
                .concept_labels()
                .to_vec();
            for (j, name) in names.iter().enumerate() {
                let _ = writeln!(out, "TD({name}) = {}", teaching_dimension(&c, j)?);
            }
            let atd = match average_teaching_dimension(&c) {
                Extended::Finite(v) => ctx.exact(v),
                Extended::Infinite => "inf".to_string(),
            };
            let _ = writeln!(out, "ATD = {atd}");
        }
        Command::Ci { matrix, mode } => {
            let m = ctx.read(&matrix)?;
            let mode = match mode {
                ModeArg::Structural => CiMode::Structural,
                ModeArg::Iterative => CiMode::Iterative,
            };
            let report = cooperative_index_report(&m, mode, max_iter(g), g.tol)?;
            let _ = writeln!(out, "CI = {}", ctx.exact(report.value));
            let _ = writeln!(out, "iterations: {}", report.iterations);
            let _ = writeln!(
                out,
                "converged: {}",
                if report.converged { "yes" } else { "no" }
            );
            match count_positive_diagonals_with_cap(&m, DEFAULT_PERMANENT_CAP) {
                Ok(k) => {
                    let _ = writeln!(out, "positive diagonals: {k}");
                }
                Err(Error::Intractable { n, cap }) => {
                    let _ = writeln!(
                        out,
                        "positive diagonals: not counted (n = {n} exceeds {cap})"
                    );
                }
                Err(e) => return Err(e),
            }
            match triangularize(&m)? {
                Some(w) => {
                    let _ = writeln!(out, "triangularizable: yes");
                    let _ = writeln!(out, "row permutation: {}", w.row_perm);
                    let _ = writeln!(out, "column permutation: {}", w.col_perm);
                }
                None => {
                    let _ = writeln!(out, "triangularizable: no");
                }
            }
        }
        Command::Sinkhorn {
            matrix,
            start,
            diagonal,
            concept_prior,
            dataset_prior,
            trace,
        } => {
            let m = ctx.read(&matrix)?;
            let priors = match (concept_prior, dataset_prior) {
                (None, None) => Priors::uniform(m.rows(), m.cols()),
                (c, d) => Priors::new(
                    c.unwrap_or_else(|| vec![1.0; m.cols()]),
                    d.unwrap_or_else(|| vec![1.0; m.rows()]),
                )?,
            };
            let opts = IterationOptions {
                max_iter: max_iter(g),
                tol: g.tol,
                start: match start {
                    SideArg::Learner => Side::Learner,
                    SideArg::Teacher => Side::Teacher,
                },
                reference_diagonal: diagonal.map(Permutation::new).transpose()?,
                record_trace: trace.is_some(),
            };
            let r = cooperative_iterate(&m, &priors, &opts)?;
            if let Some(path) = trace {
                let mut buf = Vec::new();
                r.write_trace_csv(&mut buf)?;
                std::fs::write(&path, buf)?;
            }
            let _ = writeln!(out, "iterations: {}", r.iterations);
            let _ = writeln!(out, "converged: {}", if r.converged { "yes" } else { "no" });
            let _ = writeln!(out, "residual: {:e}", r.residual);
            if let Ok(ci) = r.cooperative_index() {
                let _ = writeln!(out, "CI = {}", ctx.exact(ci));
            }
            let products = r.diagonal_trace();
            if let Some(last) = products.last() {
                let _ = writeln!(out, "diagonal product: {}", ctx.num(*last));
            }
            let format = g.format.map_or(Format::Csv, Format::from);
            for (name, mat) in [("learner", &*r.learner), ("teacher", &*r.teacher)] {
                let mut buf = Vec::new();
                write_matrix(mat, &mut buf, format)?;
                let _ = writeln!(out, "{name}:");
                out.push_str(&String::from_utf8_lossy(&buf));
            }
        }
        Command::Diagonals { matrix, cap } => {
            let m = ctx.read(&matrix)?;
            let k = count_positive_diagonals_with_cap(&m, cap)?;
            let _ = writeln!(out, "positive diagonals: {k}");
        }
        Command::Triangularize { matrix } => {
            let m = ctx.read(&matrix)?;
            match triangularize(&m)? {
                Some(w) => {
                    let _ = writeln!(out, "row permutation: {}", w.row_perm);
                    let _ = writeln!(out, "column permutation: {}", w.col_perm);
                    ctx.table(&mut out, &w.apply(&m)?);
                }
                None => {
                    let _ = writeln!(out, "none");
                }
            }
        }
        Command::MtDemo { tie_rule } => {
            let rule = match tie_rule {
                TieArg::Uniform => TieRule::UniformSplit,
                TieArg::Lowest => TieRule::LowestIndex,
            };
            let problem = ThresholdProblem::new(vec![1, 2, 3], vec![0, 1, 2, 3])?;
            let l = build_threshold_learner(&problem)?;
            let _ = writeln!(out, "learner:");
            ctx.table(&mut out, &l);
            let t = machine_teaching_matrix(&l, rule)?;
            let _ = writeln!(out, "machine teaching:");
            ctx.table(&mut out, &t);
            let full = coopinf::transmission::transmission_index(&l, &t)?;

            let head: Vec<Vec<f64>> = (0..3).map(|i| l.row(i).to_vec()).collect();
            let truncated = RowStochasticMatrix::from_rows(&head)?;
            let t3 = machine_teaching_matrix(&truncated, rule)?;
            let part = coopinf::transmission::transmission_index(&truncated, &t3)?;
            let _ = writeln!(out, "TI(full) = {}", ctx.num(full));
            let _ = writeln!(out, "TI(truncated) = {}", ctx.num(part));
        }
        Command::Simulate {
            learner,
            teacher,
            episodes,
            normalize,
        } => {
            let l = ctx.learner(&learner, normalize)?;
            let t = ctx.teacher(&teacher, normalize)?;
            let estimate = simulate_transmission(&l, &t, episodes, g.seed)?;
            let ti = coopinf::transmission::transmission_index(&l, &t)?;
            let _ = writeln!(out, "episodes: {episodes}");
            let _ = writeln!(out, "seed: {}", g.seed);
            let _ = writeln!(out, "estimate = {}", ctx.num(estimate));
            let _ = writeln!(out, "TI = {}", ctx.num(ti));
        }
        Command::PhaseDiagram {
            q,
            a_range,
            delta_range,
            step,
            fit_step,
        } => {
            let grid = |r: Option<String>| match r {
                Some(s) => {
                    let (lo, hi) = parse_range(&s)?;
                    axis_range(lo, hi, step)
                }
                None => axis(DEFAULT_AXIS_MAX, step),
            };
            let cfg = PhaseDiagramConfig {
                a_values: grid(a_range)?,
                delta_values: grid(delta_range)?,
                fit_step,
                max_iter: max_iter(g),
                tol: g.tol,
                ..PhaseDiagramConfig::with_defaults(q)
            };
            let pd = phase_diagram(&cfg)?;
            let mut buf = Vec::new();
            pd.write_csv(&mut buf, g.precision)?;
            out.push_str(&String::from_utf8_lossy(&buf));
        }
    }
    Ok(out)
}

fn emit(report: &str, output: Option<&Path>) -> io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, report),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(report.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.global.output.clone();
    match run(cli).and_then(|report| Ok(emit(&report, output.as_deref())?)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
