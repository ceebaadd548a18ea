use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{ErrorCode, Failure};
use crate::pipeline;
use crate::problem::{self, parse_sign_argument, Problem};
use crate::render::{parse_bbox, PlaneDrawing, Projection};
use crate::result::{ResultFile, RESULT_SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "tropcount", version, about = "Count and lift rational curves in toric varieties through tropical constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a problem file.
    Validate { problem: PathBuf },
    /// Enumerate the tropical solutions and write a result file.
    Enumerate {
        problem: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the number of complex solutions.
    Count {
        problem: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the number of real solutions for a sign vector.
    RealCount {
        problem: PathBuf,
        /// `positive`, or comma-separated ±1 values for the constraint rows
        /// followed by the cross-ratios. Defaults to the problem's `signs`.
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Lift every tropical solution to a map over truncated t-adic series.
    Lift {
        problem: PathBuf,
        /// Order in units of t^(1/e). Defaults to the problem's `lift_order`.
        #[arg(long, allow_negative_numbers = true)]
        order: Option<i64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Draw each solution as an SVG file. Accepts a problem or a result file.
    Render {
        input: PathBuf,
        /// xmin,ymin,xmax,ymax
        #[arg(long, allow_hyphen_values = true)]
        bbox: String,
        #[arg(long)]
        out_dir: PathBuf,
        /// Two rows `a,b,...;c,d,...` mapping the lattice to the plane;
        /// required when the rank is not 2.
        #[arg(long, allow_hyphen_values = true)]
        projection: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(ErrorCode::Io, format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(ErrorCode::Io, format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Failure::from),
    }
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    problem::load(&read(path)?)
}

/// Fails with the generality code after the result has been written.
fn check_general(result: &ResultFile) -> Result<(), Failure> {
    if !result.tropically_general {
        let walls = result.diagnostics.iter().filter(|d| d.reason == "generality-violation").count();
        return Err(Failure::new(
            ErrorCode::Generality,
            format!("constraints are not tropically general: {walls} combinatorial types solve with a zero-length edge"),
        ));
    }
    if let Some(v) = result.genericity_violations.first() {
        return Err(Failure::new(ErrorCode::Generality, format!("curve {}: {}", v.curve, v.violation)));
    }
    Ok(())
}

fn enumerate_file(problem: &Problem, threads: Option<usize>, signs: Option<&[i8]>) -> Result<ResultFile, Failure> {
    let result = pipeline::enumerate(&problem.spec, threads)?;
    ResultFile::build(problem, &result, signs)
}

pub fn run(args: impl IntoIterator<Item = OsString>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            stdout.write_all(e.render().to_string().as_bytes())?;
            return Ok(());
        }
        Err(e) => return Err(Failure::parse(e.render().to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Validate { problem } => {
            let p = load_problem(&problem)?;
            let spec = &p.spec;
            let dimension = match spec.check_dimension() {
                Ok(()) => "dimension condition holds".to_string(),
                Err(e) => e.to_string(),
            };
            writeln!(
                stdout,
                "valid: {} ends, rank {}, {} constraint rows, {} cross-ratios; {dimension}",
                spec.num_ends(),
                spec.rank(),
                spec.total_codim(),
                spec.cross_ratios().len()
            )?;
        }
        Command::Enumerate { problem, output, threads } => {
            let p = load_problem(&problem)?;
            let result = enumerate_file(&p, threads, p.signs.as_deref())?;
            write_output(output.as_deref(), &result.to_json(), stdout)?;
            check_general(&result)?;
        }
        Command::Count { problem, threads } => {
            let p = load_problem(&problem)?;
            let result = enumerate_file(&p, threads, None)?;
            check_general(&result)?;
            writeln!(stdout, "{}", result.total_complex)?;
        }
        Command::RealCount { problem, sign, threads } => {
            let p = load_problem(&problem)?;
            let signs = match (sign, &p.signs) {
                (Some(arg), _) => parse_sign_argument(&arg, &p.spec)?,
                (None, Some(s)) => s.clone(),
                (None, None) => return Err(Failure::parse("real-count needs --sign or a `signs` entry in the problem")),
            };
            let result = enumerate_file(&p, threads, Some(&signs))?;
            check_general(&result)?;
            writeln!(stdout, "{}", result.total_real.expect("signs were given"))?;
        }
        Command::Lift { problem, order, output, threads } => {
            let p = load_problem(&problem)?;
            let order = order
                .or(p.lift_order)
                .ok_or_else(|| Failure::parse("lift needs --order or a `lift_order` entry in the problem"))?;
            if order < 0 {
                return Err(Failure::invariant(format!("lift order must be non-negative, got {order}")));
            }
            let enumerated = pipeline::enumerate(&p.spec, threads)?;
            let mut result = ResultFile::build(&p, &enumerated, p.signs.as_deref())?;
            check_general(&result)?;
            result.lifts = Some(pipeline::lift(&p, &enumerated, order, threads)?);
            write_output(output.as_deref(), &result.to_json(), stdout)?;
        }
        Command::Render { input, bbox, out_dir, projection, threads } => {
            let bbox = parse_bbox(&bbox)?;
            let text = read(&input)?;
            let is_result = serde_json::from_str::<serde_json::Value>(&text)
                .ok()
                .and_then(|v| v.get("schema").and_then(|s| s.as_str()).map(|s| s == RESULT_SCHEMA))
                .unwrap_or(false);
            let result = if is_result {
                ResultFile::from_json(&text)?
            } else {
                enumerate_file(&problem::load(&text)?, threads, None)?
            };
            let projection = match (projection, result.rank) {
                (Some(p), rank) => Projection::parse(&p, rank)?,
                (None, 2) => Projection::identity(),
                (None, rank) => {
                    return Err(Failure::invariant(format!(
                        "rendering rank {rank} curves needs --projection with two rows of {rank} entries"
                    )))
                }
            };
            fs::create_dir_all(&out_dir).map_err(|e| Failure::new(ErrorCode::Io, format!("{}: {e}", out_dir.display())))?;
            for curve in &result.curves {
                let drawing = PlaneDrawing::from_curve(curve, &result.degrees, &projection)?;
                let path = out_dir.join(format!("curve-{}.svg", curve.index));
                fs::write(&path, drawing.to_svg(bbox))
                    .map_err(|e| Failure::new(ErrorCode::Io, format!("{}: {e}", path.display())))?;
                writeln!(stdout, "{}", path.display())?;
            }
        }
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code. Failures print a human
/// line and a JSON line to stderr.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let mut stdout = std::io::stdout().lock();
    match run(args, &mut stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = stdout.flush();
            eprintln!("error: {}", f.message);
            eprintln!("{}", f.to_json_line());
            f.code.exit_code()
        }
    }
}
