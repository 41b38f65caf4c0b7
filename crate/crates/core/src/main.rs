//! Command-line front end. Exit codes follow solver convention:
//! 10 satisfiable, 20 unsatisfiable claim, 30 unknown or failed run;
//! configuration and IO errors exit 1.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spsat::gen::{gen_2xorsat, gen_ksat, parse_xor_comments, xor_comment_block, GenKind, GenSpec};
use spsat::oracle::{enumerate_with, xor2_satisfiable, EnumerateOptions};
use spsat::rng::mix_seed;
use spsat::sp::{run_sp_fresh, MessageState, SpConfig};
use spsat::walksat::{walksat, WalkSatParams, WalkSatStatus};
use spsat::{
    build_factor_graph, calibration_trace, emit_dimacs, emit_dimacs_marked, parse_calibrate_config,
    parse_dimacs, parse_sweep_config, run_sweep, solve_sid, solve_sis, streamline_preprocess,
    write_sweep_csv, write_trace_csv, Assignment, Formula, PreprocessWarning, SolveOutcome,
    SolveStatus, SolverConfig,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT_CLAIM: u8 = 20;
const EXIT_UNKNOWN: u8 = 30;

#[derive(Parser)]
#[command(name = "spsat", version, about = "Survey propagation SAT toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Sid,
    Sis,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ksat,
    Xor2,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance and write it as DIMACS.
    Gen {
        #[arg(long, value_enum, default_value = "ksat")]
        kind: KindArg,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a DIMACS file with decimation or streamlining.
    Solve {
        #[arg(long, value_enum)]
        alg: AlgArg,
        /// Streamlining rounds before decimation (sis only).
        #[arg(long = "T", default_value_t = 10)]
        t: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        r_frac: f64,
        /// Wall-clock cap in seconds.
        #[arg(long)]
        budget_s: Option<f64>,
        /// Write one message pass on the input as CSV before solving.
        #[arg(long)]
        dump_messages: Option<PathBuf>,
        file: PathBuf,
    },
    /// Add streamlining clauses and emit the augmented DIMACS.
    Streamline {
        #[arg(long)]
        rounds: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        r_frac: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        file: PathBuf,
    },
    /// Run local search alone.
    Walksat {
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
        #[arg(long, default_value_t = 10)]
        tries: u32,
        #[arg(long)]
        max_flips: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        file: PathBuf,
    },
    /// Exact enumeration queries on small instances.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
    /// Run a density sweep from a key=value config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace marginal calibration against exact enumeration.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleOp {
    /// Exact model count.
    Count {
        #[arg(long, default_value_t = 26)]
        cap: u32,
        file: PathBuf,
    },
    /// Exact per-variable marginals as CSV.
    Marginals {
        #[arg(long, default_value_t = 26)]
        cap: u32,
        file: PathBuf,
    },
    /// Decide a 2-XOR system replayed from DIMACS comments.
    #[command(name = "check-xor", alias = "xor")]
    CheckXor { file: PathBuf },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<u8> {
    match Cli::parse().cmd {
        Cmd::Gen {
            kind,
            n,
            alpha,
            k,
            seed,
            out,
        } => cmd_gen(kind, n, alpha, k, seed, out.as_deref()),
        Cmd::Solve {
            alg,
            t,
            seed,
            r_frac,
            budget_s,
            dump_messages,
            file,
        } => cmd_solve(alg, t, seed, r_frac, budget_s, dump_messages.as_deref(), &file),
        Cmd::Streamline {
            rounds,
            seed,
            r_frac,
            out,
            file,
        } => cmd_streamline(rounds, seed, r_frac, out.as_deref(), &file),
        Cmd::Walksat {
            noise,
            tries,
            max_flips,
            seed,
            file,
        } => cmd_walksat(noise, tries, max_flips, seed, &file),
        Cmd::Oracle { op } => match op {
            OracleOp::Count { cap, file } => cmd_count(cap, &file),
            OracleOp::Marginals { cap, file } => cmd_marginals(cap, &file),
            OracleOp::CheckXor { file } => cmd_check_xor(&file),
        },
        Cmd::Sweep { config, out } => cmd_sweep(&config, out.as_deref()),
        Cmd::Calibrate { config, out } => cmd_calibrate(&config, out.as_deref()),
    }
}

/// Stdout writer that tolerates a closed pipe (e.g. `spsat ... | head`).
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn read_formula(path: &Path) -> Result<Formula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f = parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(f)
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            emit(content);
            Ok(())
        }
    }
}

fn cmd_gen(
    kind: KindArg,
    n: u32,
    alpha: f64,
    k: u32,
    seed: u64,
    out: Option<&Path>,
) -> Result<u8> {
    let spec = GenSpec {
        n,
        alpha,
        k,
        seed,
        kind: match kind {
            KindArg::Ksat => GenKind::KSat,
            KindArg::Xor2 => GenKind::Xor2Sat,
        },
    };
    let text = match kind {
        KindArg::Ksat => emit_dimacs(&gen_ksat(&spec)?),
        KindArg::Xor2 => {
            let (f, system) = gen_2xorsat(&spec)?;
            format!("{}{}", emit_dimacs(&f), xor_comment_block(&system))
        }
    };
    write_output(out, &text)?;
    Ok(0)
}

fn print_solution(assignment: &Assignment) {
    let mut out = String::from("s SATISFIABLE\n");
    let mut line = String::from("v");
    for (var, value) in assignment.iter() {
        let code = if value { var as i64 } else { -(var as i64) };
        line.push_str(&format!(" {code}"));
        if line.len() > 72 {
            out.push_str(&line);
            out.push('\n');
            line = String::from("v");
        }
    }
    out.push_str(&format!("{line} 0\n"));
    emit(&out);
}

fn report_outcome(outcome: &SolveOutcome) -> u8 {
    let stats = &outcome.stats;
    emit(&format!(
        "c rounds {} sweeps {} fixed {} streamlined {} flips {} wall_s {:.3}\n",
        stats.rounds,
        stats.sweeps,
        stats.variables_fixed,
        stats.streamlining_clauses,
        stats.ls_flips,
        stats.wall.as_secs_f64()
    ));
    match &outcome.status {
        SolveStatus::Sat(a) => {
            print_solution(a);
            EXIT_SAT
        }
        SolveStatus::UnsatClaim => {
            emit("c contradiction reached; heuristic claim, not a proof\ns UNSATISFIABLE\n");
            EXIT_UNSAT_CLAIM
        }
        SolveStatus::Failure(kind) => {
            emit(&format!("c failed: {kind:?}\ns UNKNOWN\n"));
            EXIT_UNKNOWN
        }
    }
}

fn dump_message_csv(f: &Formula, sp: &SpConfig, seed: u64, path: &Path) -> Result<()> {
    let g = build_factor_graph(f);
    let mut msgs = MessageState::empty();
    let report = run_sp_fresh(&g, &mut msgs, sp, seed);
    let mut csv = String::from("edge,clause,var,eta\n");
    for c in g.live_clauses() {
        let base = g.clause_edge_base(c);
        for (offset, lit) in g.clause_lits(c).iter().enumerate() {
            let edge = base + offset as u32;
            csv.push_str(&format!(
                "{edge},{c},{},{:.6}\n",
                lit.var(),
                msgs.eta(edge)
            ));
        }
    }
    fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    eprintln!(
        "dumped messages after {} sweeps ({:?})",
        report.sweeps, report.status
    );
    Ok(())
}

fn cmd_solve(
    alg: AlgArg,
    t: u32,
    seed: u64,
    r_frac: f64,
    budget_s: Option<f64>,
    dump: Option<&Path>,
    file: &Path,
) -> Result<u8> {
    let f = read_formula(file)?;
    let cfg = SolverConfig {
        t,
        seed,
        r_frac,
        time_budget: budget_s.map(Duration::from_secs_f64),
        ..Default::default()
    };
    if let Some(path) = dump {
        dump_message_csv(&f, &cfg.sp, seed, path)?;
    }
    let outcome = match alg {
        AlgArg::Sid => solve_sid(&f, &cfg),
        AlgArg::Sis => solve_sis(&f, &cfg),
    };
    Ok(report_outcome(&outcome))
}

fn cmd_streamline(
    rounds: u32,
    seed: u64,
    r_frac: f64,
    out: Option<&Path>,
    file: &Path,
) -> Result<u8> {
    let f = read_formula(file)?;
    let cfg = SolverConfig {
        seed,
        r_frac,
        ..Default::default()
    };
    let result = streamline_preprocess(&f, &cfg, rounds)?;
    if let Some(w) = result.warning {
        let reason = match w {
            PreprocessWarning::NonConvergence => "message passing did not converge",
            PreprocessWarning::Contradiction => "contradiction reached",
        };
        eprintln!(
            "warning: stopped after {} rounds: {reason}",
            result.completed_rounds
        );
    }
    write_output(out, &emit_dimacs_marked(&result.formula))?;
    Ok(0)
}

fn cmd_walksat(
    noise: f64,
    tries: u32,
    max_flips: Option<u64>,
    seed: u64,
    file: &Path,
) -> Result<u8> {
    let f = read_formula(file)?;
    let params = WalkSatParams {
        noise,
        tries,
        max_flips,
        seed,
    };
    let result = walksat(&f, &params);
    emit(&format!(
        "c flips {} tries {}\n",
        result.flips, result.tries_used
    ));
    match result.status {
        WalkSatStatus::Found(a) => {
            print_solution(&a);
            Ok(EXIT_SAT)
        }
        WalkSatStatus::Timeout => {
            emit("s UNKNOWN\n");
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn cmd_count(cap: u32, file: &Path) -> Result<u8> {
    let f = read_formula(file)?;
    let opts = EnumerateOptions {
        cap_n: cap,
        ..Default::default()
    };
    let e = enumerate_with(&f, &opts)?;
    emit(&format!("{}\n", e.count));
    Ok(if e.count > 0 { EXIT_SAT } else { EXIT_UNSAT_CLAIM })
}

fn cmd_marginals(cap: u32, file: &Path) -> Result<u8> {
    let f = read_formula(file)?;
    let opts = EnumerateOptions {
        cap_n: cap,
        ..Default::default()
    };
    let e = enumerate_with(&f, &opts)?;
    match &e.marginals {
        Some(m) => {
            let mut csv = String::from("var,p_true\n");
            for (i, p) in m.iter().enumerate() {
                csv.push_str(&format!("{},{p:.6}\n", i + 1));
            }
            emit(&csv);
            Ok(EXIT_SAT)
        }
        None => {
            emit("var,p_true\n");
            Ok(EXIT_UNSAT_CLAIM)
        }
    }
}

fn cmd_check_xor(file: &Path) -> Result<u8> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let f = parse_dimacs(&text).with_context(|| format!("parsing {}", file.display()))?;
    let Some(system) = parse_xor_comments(&text, f.n_vars()) else {
        bail!("no parity annotations found in {}", file.display());
    };
    if xor2_satisfiable(&system) {
        emit("s SATISFIABLE\n");
        Ok(EXIT_SAT)
    } else {
        emit("s UNSATISFIABLE\n");
        Ok(EXIT_UNSAT_CLAIM)
    }
}

fn cmd_sweep(config: &Path, out: Option<&Path>) -> Result<u8> {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let spec = parse_sweep_config(&text)?;
    let report = run_sweep(&spec)?;
    for tuned in &report.tuned {
        let detail: Vec<String> = tuned
            .grid_successes
            .iter()
            .map(|(t, s)| format!("{s}@T={t}"))
            .collect();
        eprintln!(
            "tuned alpha={} T={} ({})",
            tuned.alpha,
            tuned.t,
            detail.join(", ")
        );
    }
    write_output(out, &write_sweep_csv(&report.rows))?;
    Ok(0)
}

fn cmd_calibrate(config: &Path, out: Option<&Path>) -> Result<u8> {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let spec = parse_calibrate_config(&text)?;
    let opts = EnumerateOptions {
        max_solutions: spec.max_solutions,
        ..Default::default()
    };
    let mut combined = String::new();
    for i in 0..spec.instances {
        let gen = GenSpec {
            n: spec.n,
            alpha: spec.alpha,
            k: spec.k,
            seed: mix_seed(&[spec.seed, 0x4341, i as u64]),
            kind: GenKind::KSat,
        };
        let f = gen_ksat(&gen)?;
        let cfg = SolverConfig {
            t: spec.t,
            r_frac: spec.r_frac,
            seed: mix_seed(&[spec.seed, 0x534f, i as u64]),
            ..Default::default()
        };
        let trace = calibration_trace(&f, &cfg, &opts)?;
        let csv = write_trace_csv(&trace);
        let mut lines = csv.lines();
        let header = lines.next().expect("trace csv has a header");
        if i == 0 {
            combined.push_str("instance,");
            combined.push_str(header);
            combined.push('\n');
        }
        for line in lines {
            combined.push_str(&format!("{i},{line}\n"));
        }
        if trace.truncated {
            eprintln!("instance {i}: trace truncated, formula ran out of solutions");
        }
    }
    write_output(out, &combined)?;
    Ok(0)
}
