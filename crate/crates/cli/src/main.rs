use clap::{Parser, Subcommand, ValueEnum};
use monorel::fitz::{box2, fitzpatrick, ExtendedScalar, PartialQuadratic};
use monorel::l2exact::{gap_eval, FinSeq};
use monorel::monotone;
use monorel::run_suite;
use monorel::space::Vector;
use monorel::volterra::{ft_box_convergence, ConvergenceRow, Grid, TestFunction};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "monorel",
    version,
    about = "Verification suites, convergence sweeps, and point evaluations for linear-relation \
             monotone-operator calculus"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and emit its report
    Verify {
        /// Suite to run: l2exact, linrel, fitz, volterra, or all
        #[arg(long, conflicts_with = "suite_pos")]
        suite: Option<String>,
        /// Positional form of --suite
        #[arg(value_name = "SUITE", hide = true)]
        suite_pos: Option<String>,
        /// Seed for all randomized instances (reports are reproducible per seed)
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Base tolerance for floating-point checks
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report rendering
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a per-grid-size study and emit CSV
    Sweep {
        /// Family: volterra-box2, vplus-conj, or t1-identities
        family: String,
        /// Grid sizes: a comma list "8,16,32" or an inclusive range "2..64"
        #[arg(long, default_value = "2..32")]
        m: String,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a registered functional at a point
    Eval {
        /// Functional name: F_S_box2_F_Sstar_exact, F_S_plus_Sstar_exact, or one of
        /// F_T, F_Tstar, F_T1, F_T2, F_TplusTstar, F_T_box2_F_Tstar, q_Vplus_conj
        /// suffixed with "@m=SIZE"
        object: String,
        /// The point: inline, or a path to a file holding it. Exact functionals
        /// take whitespace-separated rationals "1 -1/2 ; 0"; grid functionals
        /// take a JSON array of coordinates
        #[arg(long)]
        point: String,
        /// Domain-membership tolerance for grid functionals
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

enum Failure {
    /// Bad invocation: unknown name, malformed point, unwritable output
    Usage(String),
    /// The suite ran and at least one check failed
    Checks,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Verify { suite, suite_pos, seed, tol, out, format } => {
            let suite = suite.or(suite_pos).unwrap_or_else(|| "all".into());
            let report =
                run_suite(&suite, seed, tol).map_err(|e| Failure::Usage(e.to_string()))?;
            let rendered = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Md => report.to_markdown(),
            };
            emit(&rendered, out.as_deref())?;
            if report.passed() { Ok(()) } else { Err(Failure::Checks) }
        }
        Cmd::Sweep { family, m, out } => {
            let m_list = parse_m_list(&m)?;
            let rows = match family.as_str() {
                "volterra-box2" => box2_sweep(&m_list)?,
                "vplus-conj" => vplus_conj_sweep(&m_list)?,
                "t1-identities" => t1_identities_sweep(&m_list)?,
                other => {
                    return Err(Failure::Usage(format!(
                        "unknown sweep family {other:?}; choose one of volterra-box2, \
                         vplus-conj, t1-identities"
                    )));
                }
            };
            emit(&render_csv(&rows), out.as_deref())
        }
        Cmd::Eval { object, point, tol } => {
            let point = resolve_point(&point)?;
            let printed = evaluate_object(&object, &point, tol)?;
            println!("{printed}");
            Ok(())
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    match out {
        Some(path) => std::fs::write(path, format!("{body}\n"))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

/// "8,16,32" or inclusive "2..64"; sizes must lie in 2..=512.
fn parse_m_list(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = |msg: String| Failure::Usage(format!("bad --m {spec:?}: {msg}"));
    let parse_one = |tok: &str| -> Result<usize, Failure> {
        let v: usize = tok
            .trim()
            .parse()
            .map_err(|_| bad(format!("{tok:?} is not a grid size")))?;
        if !(2..=512).contains(&v) {
            return Err(bad(format!("size {v} outside 2..=512")));
        }
        Ok(v)
    };
    let list: Vec<usize> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (parse_one(a)?, parse_one(b)?);
        if a > b {
            return Err(bad(format!("empty range {a}..{b}")));
        }
        (a..=b).collect()
    } else {
        spec.split(',').map(parse_one).collect::<Result<_, _>>()?
    };
    if list.is_empty() {
        return Err(bad("no sizes given".into()));
    }
    Ok(list)
}

fn grid(m: usize) -> Result<Grid, Failure> {
    Grid::new(m).map_err(|e| Failure::Usage(e.to_string()))
}

fn box2_sweep(m_list: &[usize]) -> Result<Vec<ConvergenceRow>, Failure> {
    let mut rows = Vec::new();
    for f in TestFunction::ALL {
        rows.extend(
            ft_box_convergence(f, m_list).map_err(|e| Failure::Usage(e.to_string()))?,
        );
    }
    Ok(rows)
}

/// Worst probe deviation of conjugate(q over V₊) from its rank-one closed
/// form, per size: finite probes l·e for l ∈ {−2,−1,0,1,3} against l², and
/// one off-span probe that must evaluate to +∞.
fn vplus_conj_sweep(m_list: &[usize]) -> Result<Vec<ConvergenceRow>, Failure> {
    let mut rows = Vec::new();
    for &m in m_list {
        let g = grid(m)?;
        let conj = PartialQuadratic::quadratic_form(g.ctx(), &g.v_plus_matrix())
            .and_then(|q| q.conjugate())
            .map_err(|e| Failure::Usage(e.to_string()))?;
        let e = g.ones();
        let mut worst = 0.0f64;
        for l in [-2.0f64, -1.0, 0.0, 1.0, 3.0] {
            match conj.evaluate(&e.scale(l), 1e-9) {
                Ok(ExtendedScalar::Finite(v)) => worst = worst.max((v - l * l).abs()),
                _ => worst = f64::INFINITY,
            }
        }
        let off = e
            .add(&g.ones_complement().basis_vector(0).scale(0.7))
            .map_err(|e| Failure::Usage(e.to_string()))?;
        if !matches!(conj.evaluate(&off, 1e-9), Ok(ExtendedScalar::PlusInfinity)) {
            worst = f64::INFINITY;
        }
        rows.push(ConvergenceRow {
            m,
            h: g.h(),
            function: "vplus-conj".into(),
            value: worst,
            target: 0.0,
            abs_error: worst,
            ratio_prev: None,
        });
    }
    Ok(rows)
}

/// Structural residuals of the mean-periodic extension per size:
/// anti-self-adjointness, range = e⊥, and uniqueness of the maximal
/// monotone extension of its negation. All should sit at rounding level.
fn t1_identities_sweep(m_list: &[usize]) -> Result<Vec<ConvergenceRow>, Failure> {
    let mut rows = Vec::new();
    for &m in m_list {
        let g = grid(m)?;
        let t1 = g.t1_relation();
        let asa = monotone::is_anti_self_adjoint(&t1, 1e-9).margin;
        let range = t1
            .range()
            .containment_residual(&g.ones_complement())
            .and_then(|r1| {
                g.ones_complement()
                    .containment_residual(&t1.range())
                    .map(|r2| r1.max(r2))
            })
            .map_err(|e| Failure::Usage(e.to_string()))?;
        let unique = monotone::unique_extension_check(&t1, 1e-8)
            .map_err(|e| Failure::Usage(e.to_string()))?
            .margin;
        for (name, value) in [
            ("t1-anti-self-adjoint", asa),
            ("t1-range-eperp", range),
            ("t1-unique-extension", unique),
        ] {
            rows.push(ConvergenceRow {
                m,
                h: g.h(),
                function: name.into(),
                value,
                target: 0.0,
                abs_error: value.abs(),
                ratio_prev: None,
            });
        }
    }
    Ok(rows)
}

fn render_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("m,h,function,value,target,abs_error,ratio_prev\n");
    for r in rows {
        // 0/0 steps carry NaN for "ratio undefined"; an empty cell says the same.
        let ratio = r
            .ratio_prev
            .filter(|v| v.is_finite())
            .map(|v| v.to_string())
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m, r.h, r.function, r.value, r.target, r.abs_error, ratio
        )
        .expect("string write");
    }
    out
}

/// `--point` names a file when one exists at that path; otherwise it is the
/// point itself.
fn resolve_point(point: &str) -> Result<String, Failure> {
    let path = Path::new(point);
    if path.exists() {
        std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| Failure::Usage(format!("cannot read point file {point:?}: {e}")))
    } else {
        Ok(point.to_string())
    }
}

/// "y" or "y ; x*" with rational tokens on each side.
fn parse_exact_pair(point: &str) -> Result<(FinSeq, FinSeq), Failure> {
    let (y_text, xs_text) = match point.split_once(';') {
        Some((a, b)) => (a, b),
        None => (point, ""),
    };
    let parse = |text: &str, side: &str| -> Result<FinSeq, Failure> {
        if text.trim().is_empty() {
            return Ok(FinSeq::zero());
        }
        text.trim()
            .parse()
            .map_err(|e: monorel::Error| Failure::Usage(format!("bad {side}: {e}")))
    };
    Ok((parse(y_text, "sequence")?, parse(xs_text, "second slot")?))
}

fn parse_coords(point: &str, expect: usize, object: &str) -> Result<Vec<f64>, Failure> {
    let coords: Vec<f64> = serde_json::from_str(point).map_err(|e| {
        Failure::Usage(format!("point for {object} must be a JSON array of numbers: {e}"))
    })?;
    if coords.len() != expect {
        return Err(Failure::Usage(format!(
            "{object} expects {expect} coordinates, got {}",
            coords.len()
        )));
    }
    Ok(coords)
}

fn print_extended(v: ExtendedScalar) -> String {
    match v {
        ExtendedScalar::Finite(x) => format!("{x}"),
        ExtendedScalar::PlusInfinity => "+inf".into(),
        ExtendedScalar::MinusInfinity => "-inf".into(),
    }
}

fn evaluate_object(object: &str, point: &str, tol: f64) -> Result<String, Failure> {
    match object {
        "F_S_box2_F_Sstar_exact" => {
            let (y, xs) = parse_exact_pair(point)?;
            if !xs.is_zero() {
                return Err(Failure::Usage(
                    "F_S_box2_F_Sstar_exact has an exact closed form only on the x* = 0 slice; \
                     drop the part after ';'"
                        .into(),
                ));
            }
            Ok(gap_eval(&y).lhs.to_string())
        }
        "F_S_plus_Sstar_exact" => {
            let (_, xs) = parse_exact_pair(point)?;
            Ok(if xs.is_zero() { "0".into() } else { "+inf".into() })
        }
        _ => {
            let (name, m_spec) = object.split_once('@').ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown functional {object:?}; exact names are F_S_box2_F_Sstar_exact and \
                     F_S_plus_Sstar_exact, grid names take the form F_T@m=16"
                ))
            })?;
            let m: usize = m_spec
                .strip_prefix("m=")
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| {
                    Failure::Usage(format!("bad grid suffix {m_spec:?}; expected m=SIZE"))
                })?;
            let g = grid(m)?;
            let build = |pq: Result<PartialQuadratic, monorel::Error>| {
                pq.map_err(|e| Failure::Usage(e.to_string()))
            };
            let func = match name {
                "F_T" => fitzpatrick(&g.t_relation()),
                "F_Tstar" => fitzpatrick(&g.t_star_relation()),
                "F_T1" => fitzpatrick(&g.t1_relation()),
                "F_T2" => fitzpatrick(&g.t2_relation()),
                "F_TplusTstar" => {
                    let sum = g
                        .t_relation()
                        .add(&g.t_star_relation())
                        .map_err(|e| Failure::Usage(e.to_string()))?;
                    fitzpatrick(&sum)
                }
                "F_T_box2_F_Tstar" => build(box2(
                    &fitzpatrick(&g.t_relation()),
                    &fitzpatrick(&g.t_star_relation()),
                ))?,
                "q_Vplus_conj" => build(
                    PartialQuadratic::quadratic_form(g.ctx(), &g.v_plus_matrix())
                        .and_then(|q| q.conjugate()),
                )?,
                other => {
                    return Err(Failure::Usage(format!("unknown grid functional {other:?}")));
                }
            };
            let dim = if name == "q_Vplus_conj" { m } else { 2 * m };
            let coords = parse_coords(point, dim, object)?;
            let ctx = if name == "q_Vplus_conj" { g.ctx().clone() } else { g.ctx().power(2) };
            let z = Vector::new(&ctx, coords).map_err(|e| Failure::Usage(e.to_string()))?;
            let v = func
                .evaluate(&z, tol)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(print_extended(v))
        }
    }
}
