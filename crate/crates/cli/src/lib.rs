//! Batch front end: problem files in, JSON reports and CSV plot data out.
//!
//! Every run writes exactly one document to stdout (JSON, or CSV for
//! `plot-data`) and a one-line human summary to stderr. Exit status is 0 on
//! success, 2 when a violation was found and 1 on error; errors are reported
//! on stderr as `{"error": {"kind", "message"}}`.

mod problem;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use inattention::beliefs::make_grid;
use inattention::diagnostics::{
    build_iia_counterexample_with, check_ie, check_ie_finite, check_iia, jdd_check, recover_psi,
    JddVerdict, Verdict,
};
use inattention::menus::menu_phi;
use inattention::solver::{lambda_set_seeded, solve_finite, solve_menu};
use inattention::{eval_hull, upper_hull};
use serde::Serialize;

pub use problem::{GridSpec, Model, ProblemFile};

#[derive(Parser, Debug)]
#[command(
    name = "inattention",
    version,
    about = "Menu values and choice-axiom diagnostics under costly information"
)]
struct Cli {
    /// Problem file (JSON).
    #[arg(short, long, global = true, default_value = "problem.json")]
    problem: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value, optimal posteriors and dual slope of a menu.
    Solve { menu: String },
    /// Extent of the set of optimal hyperplane slopes of a menu.
    Lambda { menu: String },
    /// Independence of irrelevant alternatives for two menus.
    CheckIia { f: String, g: String },
    /// Existence of an ignorance equivalent for a menu.
    CheckIe { menu: String },
    /// Joint-directional differentiability of the cost.
    Jdd,
    /// Certificate search followed by the explicit IIA counterexample.
    Counterexample,
    /// The measure rebuilt from irrelevant acts on the grid.
    Recover,
    /// CSV of p, phi, psi, net, cav, hyperplane for a two-state menu.
    PlotData {
        menu: String,
        /// Write the CSV here instead of stdout (a JSON summary is printed).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a ready-made problem file.
    Preset { name: PresetName },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PresetName {
    /// The two-state kinked example with acts a and b.
    Sec33,
    /// The two-component finite family with scaled acts.
    Sec5,
}

/// A failure with a stable machine-readable kind.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.into(),
            message: message.into(),
        }
    }
}

impl From<inattention::Error> for CliError {
    fn from(e: inattention::Error) -> Self {
        CliError::new("SolverError", format!("{}: {e}", e.kind()))
    }
}

struct Output {
    body: String,
    summary: String,
    code: i32,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn verdict_code(v: Verdict) -> i32 {
    if v == Verdict::Violated {
        2
    } else {
        0
    }
}

/// Run the command line and return the exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::new("UsageError", e.to_string().trim_end());
            let _ = writeln!(stderr, "{}", error_json(&err));
            return 1;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let _ = stdout.write_all(out.body.as_bytes());
            let _ = writeln!(stderr, "{}", out.summary);
            out.code
        }
        Err(err) => {
            let _ = writeln!(stderr, "{}", error_json(&err));
            1
        }
    }
}

fn error_json(err: &CliError) -> String {
    serde_json::json!({"error": {"kind": err.kind, "message": err.message}}).to_string()
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    if let Command::Preset { name } = &cli.command {
        let p = match name {
            PresetName::Sec33 => ProblemFile::sec33(),
            PresetName::Sec5 => ProblemFile::sec5(),
        };
        return Ok(Output {
            body: json(&p),
            summary: format!(
                "preset {} with menus {:?}",
                format!("{name:?}").to_lowercase(),
                p.menus.keys().collect::<Vec<_>>()
            ),
            code: 0,
        });
    }
    let problem = ProblemFile::load(&cli.problem)?;
    let model = problem.model()?;
    let grid = match &model {
        Model::Separable(m) => make_grid(m, problem.grid.resolution, &problem.knots()?)?,
        Model::Finite(m) => make_grid(m, problem.grid.resolution, &problem.knots()?)?,
    };
    match &cli.command {
        Command::Preset { .. } => unreachable!("handled above"),
        Command::Solve { menu } => {
            let f = problem.menu(menu)?;
            match &model {
                Model::Separable(m) => {
                    let r = solve_menu(m, &f, &grid)?;
                    Ok(Output {
                        summary: format!("V({menu}) = {}", r.value),
                        body: json(&r),
                        code: 0,
                    })
                }
                Model::Finite(m) => {
                    let r = solve_finite(m, &f, &grid)?;
                    Ok(Output {
                        summary: format!("V({menu}) = {}", r.value),
                        body: json(&r),
                        code: 0,
                    })
                }
            }
        }
        Command::Lambda { menu } => {
            let m = model.separable("lambda")?;
            let f = problem.menu(menu)?;
            let r = solve_menu(m, &f, &grid)?;
            let lam = lambda_set_seeded(m, &f, &grid, &r, problem.seed)?;
            Ok(Output {
                summary: format!(
                    "max width {:.3e} ({})",
                    lam.max_width,
                    if lam.singleton {
                        "unique"
                    } else {
                        "not unique"
                    }
                ),
                body: json(&lam),
                code: 0,
            })
        }
        Command::CheckIia { f, g } => {
            let m = model.separable("check-iia")?;
            let r = check_iia(m, &problem.menu(f)?, &problem.menu(g)?, &grid)?;
            Ok(Output {
                summary: format!("IIA {:?} (margin {})", r.verdict, r.margin),
                code: verdict_code(r.verdict),
                body: json(&r),
            })
        }
        Command::CheckIe { menu } => {
            let f = problem.menu(menu)?;
            let r = match &model {
                Model::Separable(m) => check_ie(m, &f, &grid)?,
                Model::Finite(m) => check_ie_finite(m, &f, &grid)?,
            };
            Ok(Output {
                summary: format!("IE {:?} (margin {})", r.verdict, r.margin),
                code: verdict_code(r.verdict),
                body: json(&r),
            })
        }
        Command::Jdd => {
            let m = model.separable("jdd")?;
            let r = jdd_check(m)?;
            Ok(Output {
                summary: format!(
                    "JDD {:?} over {} candidate sets",
                    r.verdict, r.candidate_sets
                ),
                code: if r.verdict == JddVerdict::Violated {
                    2
                } else {
                    0
                },
                body: json(&r),
            })
        }
        Command::Counterexample => {
            let m = model.separable("counterexample")?;
            let jdd = jdd_check(m)?;
            let report = match &jdd.certificate {
                Some(cert) => Some(build_iia_counterexample_with(
                    m,
                    cert,
                    problem.grid.resolution,
                )?),
                None => None,
            };
            let code = report.as_ref().map_or(0, |r| verdict_code(r.verdict));
            let summary = match &report {
                Some(r) => format!(
                    "IIA {:?}: V(F∪G) = {} ≥ {} while V(F) = V(G) = V(F∩G) = {}",
                    r.verdict, r.values.union, r.predicted_lower_bound, r.values.intersection
                ),
                None => format!("no certificate (JDD {:?})", jdd.verdict),
            };
            Ok(Output {
                body: json(&serde_json::json!({"jdd": jdd, "counterexample": report})),
                summary,
                code,
            })
        }
        Command::Recover => {
            let m = model.separable("recover")?;
            let r = recover_psi(m, &grid)?;
            Ok(Output {
                summary: format!(
                    "{} irrelevant acts, max error {:.3e}",
                    r.acts.len(),
                    r.max_error
                ),
                body: json(&r),
                code: 0,
            })
        }
        Command::PlotData { menu, out } => {
            let m = model.separable("plot-data")?;
            if m.n_states() != 2 {
                return Err(CliError::new(
                    "UsageError",
                    "plot-data needs a two-state problem",
                ));
            }
            let f = problem.menu(menu)?;
            let report = solve_menu(m, &f, &grid)?;
            let csv = plot_csv(m, &f, &grid, &report)?;
            let rows = csv.lines().count() - 1;
            match out {
                None => Ok(Output {
                    body: csv,
                    summary: format!("{rows} rows for menu {menu}"),
                    code: 0,
                }),
                Some(path) => {
                    std::fs::write(path, &csv).map_err(|e| {
                        CliError::new("IoError", format!("{}: {e}", path.display()))
                    })?;
                    Ok(Output {
                        body: json(&serde_json::json!({"written": path, "rows": rows})),
                        summary: format!("wrote {rows} rows to {}", path.display()),
                        code: 0,
                    })
                }
            }
        }
    }
}

fn plot_csv(
    model: &inattention::costs::CostModel,
    menu: &inattention::menus::Menu,
    grid: &inattention::beliefs::Grid,
    report: &inattention::solver::SolveReport,
) -> Result<String, CliError> {
    let chart = model.chart();
    let y0 = model.prior_chart();
    let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut points: Vec<_> = grid
        .points()
        .iter()
        .chain(report.optimal_pi.support())
        .cloned()
        .collect();
    points.sort_by(|a, b| a.as_slice()[1].total_cmp(&b.as_slice()[1]));
    points.dedup_by(|a, b| (a.as_slice()[1] - b.as_slice()[1]).abs() <= 1e-15);
    for p in &points {
        let phi = menu_phi(menu, p).0;
        let psi = model.psi_value(p)?;
        rows.push((p.as_slice()[1], phi, psi, phi - psi));
    }
    let hull = upper_hull(&rows.iter().map(|r| (r.0, r.3)).collect::<Vec<_>>());
    let mut s = String::from("p,phi,psi,net,cav,hyperplane\n");
    for (p, (x, phi, psi, net)) in points.iter().zip(&rows) {
        let (cav, _, _) = eval_hull(&hull, *x).expect("rows lie within the hull's range");
        let y = chart.apply(p.as_slice());
        let plane = report.value
            + report
                .dual_slope
                .iter()
                .zip(y.iter().zip(y0))
                .map(|(l, (yi, y0i))| l * (yi - y0i))
                .sum::<f64>();
        writeln!(
            s,
            "{x:.16e},{phi:.16e},{psi:.16e},{net:.16e},{cav:.16e},{plane:.16e}"
        )
        .expect("string write");
    }
    Ok(s)
}
