mod bench;

// Output that tolerates a closed pipe (e.g. `mpltl check ... | head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

use anyhow::{anyhow, bail, Context, Result};
use bench::{read_csv, render_summary, summarize, write_csv, BenchRecord};
use clap::{Parser, Subcommand, ValueEnum};
use mpltl::cases::build_case;
use mpltl::check::{check, generate, CheckConfig, CheckReport};
use mpltl::cnf::parse_dimacs;
use mpltl::difftest::{difftest, DiffConfig};
use mpltl::parser::{parse_problem, Problem};
use mpltl::sat::{solve, Backend, Outcome};
use mpltl::{EncoderKind, TimeModel};
use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "mpltl", version, about = "Bounded satisfiability checking for metric PLTL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem file or a bundled case. Exit 0 on SAT, 1 on UNSAT.
    Check {
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        case: Option<String>,
        /// Case parameter as name=value; repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        time: Option<TimeModel>,
        #[arg(long)]
        encoder: Option<EncoderKind>,
        /// External solver command; `{input}` stands for the DIMACS file.
        #[arg(long, value_name = "TMPL")]
        solver_cmd: Option<String>,
        /// Write the CNF here instead of solving.
        #[arg(long, value_name = "PATH")]
        emit_dimacs: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        trace: TraceFormat,
        /// Solver timeout in seconds.
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Run both encoders over a matrix of cases and bounds.
    Bench {
        /// Comma-separated cases, each `name[:param=value...]`.
        #[arg(long, value_delimiter = ',', required = true)]
        cases: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        bounds: Vec<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_name = "TMPL")]
        solver_cmd: Option<String>,
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Recompute the benchmark summary from a CSV written by `bench`.
    Summary { csv: PathBuf },
    /// Compare the two encoders and the oracle on random formulas.
    Difftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Solve a DIMACS file with the embedded solver (exit 10 SAT, 20 UNSAT).
    SolveDimacs { file: PathBuf },
}

fn backend(cmd: &Option<String>) -> Backend {
    cmd.as_deref().map_or(Backend::Embedded, Backend::external)
}

fn timeout(secs: Option<f64>) -> Result<Option<Duration>> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|_| anyhow!("invalid timeout {s}")))
        .transpose()
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, String>> {
    items
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| anyhow!("parameter `{kv}` is not NAME=VALUE"))
        })
        .collect()
}

/// `name:p=v:q=w` as used by `bench`.
fn case_from_spec(spec: &str) -> Result<mpltl::cases::Case> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default();
    let params = parse_params(&parts.map(str::to_string).collect::<Vec<_>>())?;
    Ok(build_case(name, &params)?)
}

fn print_report(report: &CheckReport, cfg: &CheckConfig, format: TraceFormat) {
    match format {
        TraceFormat::Json => {
            let v = serde_json::json!({
                "verdict": report.verdict,
                "k": cfg.k,
                "time": cfg.time,
                "encoder": cfg.encoder,
                "gen_s": report.gen_time.as_secs_f64(),
                "sat_s": report.sat_time.as_secs_f64(),
                "vars": report.vars,
                "clauses": report.clauses,
                "stats": report.stats,
                "trace": report.trace.as_ref().map(|t| t.to_json()),
                "oracle": report.audit.as_ref().map(|a| match a {
                    Ok(()) => "ok".to_string(),
                    Err(e) => e.to_string(),
                }),
            });
            outln!("{}", serde_json::to_string_pretty(&v).expect("json value"));
        }
        TraceFormat::Text => {
            outln!("{}", report.verdict);
            outln!(
                "{} encoding, {} time, k={}: {} variables, {} clauses; generation {:.3}s, solving {:.3}s",
                cfg.encoder,
                cfg.time,
                cfg.k,
                report.vars,
                report.clauses,
                report.gen_time.as_secs_f64(),
                report.sat_time.as_secs_f64()
            );
            if let Some(t) = &report.trace {
                out!("{t}");
            }
            match &report.audit {
                Some(Ok(())) => outln!("oracle: trace satisfies the formula"),
                Some(Err(e)) => outln!("oracle: trace REJECTED: {e}"),
                None => {}
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    file: Option<PathBuf>,
    case: Option<String>,
    params: Vec<String>,
    bound: Option<usize>,
    time: Option<TimeModel>,
    encoder: Option<EncoderKind>,
    solver_cmd: Option<String>,
    emit_dimacs: Option<PathBuf>,
    trace: TraceFormat,
    secs: Option<f64>,
) -> Result<ExitCode> {
    let mut problem: Problem = match (&file, &case) {
        (Some(path), None) => {
            if !params.is_empty() {
                bail!("--param only applies to --case");
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_problem(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?
        }
        (None, Some(name)) => build_case(name, &parse_params(&params)?)?.problem,
        _ => bail!("give a problem file or --case NAME"),
    };
    if let Some(k) = bound {
        if k == 0 {
            bail!("the bound must be at least 1");
        }
        problem.bound = k;
    }
    if let Some(t) = time {
        problem.time_model = t;
    }
    if let Some(e) = encoder {
        problem.encoder = e;
    }
    let mut cfg = CheckConfig::new(problem.bound, problem.time_model, problem.encoder);
    cfg.backend = backend(&solver_cmd);
    cfg.timeout = timeout(secs)?;
    let f = problem.checked_formula();
    if let Some(path) = emit_dimacs {
        let (enc, mut cnf, _) = generate(&f, &problem.alphabet, &cfg);
        cnf.attach_names(|v| enc.vm.label(v));
        let out = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        cnf.write_dimacs(std::io::BufWriter::new(out))?;
        eprintln!("wrote {}: {} variables, {} clauses", path.display(), cnf.num_vars, cnf.num_clauses());
        return Ok(ExitCode::SUCCESS);
    }
    let report = check(&f, &problem.alphabet, &cfg)?;
    print_report(&report, &cfg, trace);
    if let Some(Err(e)) = &report.audit {
        bail!("internal error: the decoded trace fails the oracle: {e}");
    }
    Ok(match report.verdict {
        mpltl::check::Verdict::Sat => ExitCode::SUCCESS,
        mpltl::check::Verdict::Unsat => ExitCode::from(1),
    })
}

fn run_bench(
    cases: Vec<String>,
    bounds: Vec<usize>,
    csv_path: Option<PathBuf>,
    solver_cmd: Option<String>,
    secs: Option<f64>,
) -> Result<ExitCode> {
    let built = cases
        .iter()
        .map(|s| case_from_spec(s).map(|c| (s.clone(), c)))
        .collect::<Result<Vec<_>>>()?;
    if bounds.contains(&0) {
        bail!("bounds must be at least 1");
    }
    let limit = timeout(secs)?;
    let mut records = Vec::new();
    for (label, case) in &built {
        for &k in &bounds {
            for enc in [EncoderKind::Metric, EncoderKind::Nonmetric] {
                let mut cfg = CheckConfig::new(k, case.problem.time_model, enc);
                cfg.backend = backend(&solver_cmd);
                cfg.timeout = limit;
                let f = case.problem.checked_formula();
                let rec = match check(&f, &case.problem.alphabet, &cfg) {
                    Ok(r) => BenchRecord {
                        case: label.clone(),
                        variant: case.variant.clone(),
                        k,
                        encoder: enc.to_string(),
                        gen_s: r.gen_time.as_secs_f64(),
                        sat_s: r.sat_time.as_secs_f64(),
                        vars: r.vars,
                        clauses: r.clauses,
                        verdict: match r.audit {
                            Some(Err(_)) => "ERROR".into(),
                            _ => r.verdict.to_string(),
                        },
                    },
                    Err(e) => {
                        eprintln!("{label} k={k} {enc}: {e}");
                        BenchRecord {
                            case: label.clone(),
                            variant: case.variant.clone(),
                            k,
                            encoder: enc.to_string(),
                            gen_s: 0.0,
                            sat_s: 0.0,
                            vars: 0,
                            clauses: 0,
                            verdict: "ERROR".into(),
                        }
                    }
                };
                eprintln!(
                    "{} k={} {}: {} ({:.3}s + {:.3}s)",
                    rec.case, rec.k, rec.encoder, rec.verdict, rec.gen_s, rec.sat_s
                );
                records.push(rec);
            }
        }
    }
    match &csv_path {
        Some(p) => {
            let out = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(out, &records)?;
        }
        None => write_csv(std::io::stdout(), &records)?,
    }
    out!("{}", render_summary(&summarize(&records)));
    Ok(ExitCode::SUCCESS)
}

fn run_difftest(seed: u64, count: usize, k_min: usize, k_max: usize, json: Option<PathBuf>) -> Result<ExitCode> {
    let mut cfg = DiffConfig::new(seed, count);
    cfg.k_min = k_min;
    cfg.k_max = k_max;
    let report = difftest(&cfg).map_err(|e| anyhow!(e))?;
    out!("{report}");
    if let Some(p) = json {
        std::fs::write(&p, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(if report.discrepancies.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_solve_dimacs(path: PathBuf) -> Result<ExitCode> {
    let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let cnf = parse_dimacs(BufReader::new(file))?;
    match solve(&cnf, &Backend::Embedded, None)? {
        Outcome::Sat(model) => {
            outln!("s SATISFIABLE");
            let lits: Vec<String> = (1..=cnf.num_vars)
                .map(|v| if model[v as usize] { v.to_string() } else { format!("-{v}") })
                .collect();
            outln!("v {} 0", lits.join(" "));
            Ok(ExitCode::from(10))
        }
        Outcome::Unsat => {
            outln!("s UNSATISFIABLE");
            Ok(ExitCode::from(20))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check {
            file,
            case,
            params,
            bound,
            time,
            encoder,
            solver_cmd,
            emit_dimacs,
            trace,
            timeout,
        } => run_check(file, case, params, bound, time, encoder, solver_cmd, emit_dimacs, trace, timeout),
        Command::Bench {
            cases,
            bounds,
            csv,
            solver_cmd,
            timeout,
        } => run_bench(cases, bounds, csv, solver_cmd, timeout),
        Command::Difftest {
            seed,
            count,
            k_min,
            k_max,
            json,
        } => run_difftest(seed, count, k_min, k_max, json),
        Command::Summary { csv } => std::fs::File::open(&csv)
            .with_context(|| format!("opening {}", csv.display()))
            .and_then(|f| read_csv(f).map_err(|e| anyhow!("{}: {e}", csv.display())))
            .map(|rows| {
                out!("{}", render_summary(&summarize(&rows)));
                ExitCode::SUCCESS
            }),
        Command::SolveDimacs { file } => run_solve_dimacs(file),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
