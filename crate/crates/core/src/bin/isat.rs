use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use isat::format::{read_formula_file, write_assignment, write_formula};
use isat::harness::experiments::success_curve;
use isat::harness::output::{csv_string, write_json, Provenance};
use isat::harness::{self, run_all, with_threads, Config};
use isat::oracle::{brute_decide, OracleResult};
use isat::queue::{self, Arrival, QueueConfig, QueueOutcome};
use isat::rng::split;
use isat::solver::{drift, solve, Outcome, SolverConfig, DEFAULT_C_PRIME};
use isat::two_isat::{self, phase_experiment, Decision};
use isat::{generate_formula, ode, random_interval, Error, Formula, Result};

const EXIT_GAVE_UP: u8 = 10;

#[derive(Parser)]
#[command(name = "isat", version, about = "Random interval-signed SAT: solver, decider and experiments")]
struct Cli {
    /// Master seed; every trial derives its own stream from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file (directory for run-all). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave the timestamp out of CSV provenance lines.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Instance {
    /// Formula file; otherwise a random formula is drawn.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Clause density m/n of the random formula.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
}

impl Instance {
    fn load(&self, k: usize, seed: u64) -> Result<Formula> {
        match &self.input {
            Some(path) => read_formula_file(path),
            None => generate_formula(self.n, clause_count(self.n, self.c)?, k, seed),
        }
    }
}

fn clause_count(n: usize, c: f64) -> Result<usize> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidParameter(format!("density c = {c} (expected a finite value >= 0)")));
    }
    Ok((c * n as f64).floor() as usize)
}

#[derive(Clone, Copy, ValueEnum)]
enum QueueMode {
    Mean,
    Tail,
    Trace,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random formula.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Run the solver.
    Solve {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, default_value_t = DEFAULT_C_PRIME)]
        c_prime: f64,
        /// Write run statistics as JSON.
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },
    /// Decide a small formula exhaustively.
    Oracle {
        #[arg(long)]
        input: PathBuf,
    },
    /// Decide a formula of 2-clauses.
    Decide2 {
        #[command(flatten)]
        instance: Instance,
    },
    /// Satisfiable fraction of random 2-clause formulas.
    Phase2 {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1.2")]
        c: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Random-interval laws against Monte Carlo.
    Probe {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Simulate the inner-loop queue with Bin(m, 2P/n) arrivals.
    QueueSim {
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 100_000)]
        runs: usize,
        #[arg(long, value_enum, default_value_t = QueueMode::Mean)]
        mode: QueueMode,
        /// Largest alpha of the tail table.
        #[arg(long, default_value_t = 40)]
        alpha_max: u64,
    },
    /// Integrate the 2-clause density equation from x = 1.
    Ivp {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = ode::HANDOFF_X)]
        x_stop: f64,
        #[arg(long, default_value_t = ode::DEFAULT_STEP)]
        step: f64,
    },
    /// Largest density whose trajectory stays in the good region.
    Threshold {
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 1.0)]
        lo: f64,
        #[arg(long, default_value_t = 4.0)]
        hi: f64,
        /// Write the trajectory at the threshold as CSV.
        #[arg(long)]
        emit_trajectory: Option<PathBuf>,
    },
    /// Measured per-iteration drift against the predicted one.
    Drift {
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0.8)]
        x: f64,
        #[arg(long, default_value_t = 0.2)]
        y2: f64,
        #[arg(long, default_value_t = 1.0)]
        y3: f64,
        #[arg(long, default_value_t = 500)]
        window: usize,
        #[arg(long, default_value_t = 24)]
        seeds: u64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Solver success fraction over a density grid.
    SuccessCurve {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2.0,2.2")]
        c: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_C_PRIME)]
        c_prime: f64,
    },
    /// Evaluate every acceptance criterion and write a report directory.
    RunAll {
        /// key = value configuration; built-in defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    provenance: Provenance,
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
            None => io::stdout().write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e)),
        }
    }

    fn table<T: Serialize>(&self, rows: &[T]) -> Result<()> {
        self.emit(&csv_string(rows, &self.provenance)?)
    }
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source: e }
}

#[derive(Serialize)]
struct TrajectoryRow {
    x: f64,
    y2: f64,
    y3: f64,
    t: f64,
}

fn trajectory_rows(sol: &ode::OdeSolution) -> Vec<TrajectoryRow> {
    (0..sol.x.len())
        .map(|i| TrajectoryRow { x: sol.x[i], y2: sol.y[i], y3: sol.y3(sol.x[i]), t: sol.t[i] })
        .collect()
}

#[derive(Serialize)]
struct ZRow {
    run: usize,
    z: Option<u64>,
}

#[derive(Serialize)]
struct TraceRow {
    step: usize,
    arrivals: u64,
}

fn run(cli: Cli) -> Result<u8> {
    let ctx = Ctx {
        seed: cli.seed,
        out: cli.out.clone(),
        provenance: Provenance::new(cli.seed, !cli.no_timestamp),
    };
    let seed = ctx.seed;
    match cli.command {
        Command::Gen { n, c, k } => {
            let f = generate_formula(n, clause_count(n, c)?, k, seed)?;
            let mut buf = Vec::new();
            write_formula(&f, &mut buf).expect("in-memory write");
            ctx.emit(std::str::from_utf8(&buf).expect("UTF-8"))?;
        }
        Command::Solve { instance, c_prime, stats_out } => {
            let f = instance.load(3, split(seed, 0))?;
            let config = SolverConfig { c_prime, ..SolverConfig::default() };
            let report = solve(&f, &config, split(seed, 1))?;
            if let Some(path) = stats_out {
                write_json(&path, &report.stats)?;
            }
            return match report.outcome {
                Outcome::Sat(a) => {
                    let mut buf = b"SAT\n".to_vec();
                    write_assignment(&a, &mut buf).expect("in-memory write");
                    ctx.emit(std::str::from_utf8(&buf).expect("UTF-8"))?;
                    Ok(0)
                }
                Outcome::GaveUp(cause) => {
                    ctx.emit(&format!("GAVEUP {cause:?}\n"))?;
                    Ok(EXIT_GAVE_UP)
                }
            };
        }
        Command::Oracle { input } => {
            let f = read_formula_file(&input)?;
            match brute_decide(&f)? {
                OracleResult::Sat(a) => {
                    let mut buf = b"SAT\n".to_vec();
                    write_assignment(&a, &mut buf).expect("in-memory write");
                    ctx.emit(std::str::from_utf8(&buf).expect("UTF-8"))?;
                }
                OracleResult::Unsat => ctx.emit("UNSAT\n")?,
            }
        }
        Command::Decide2 { instance } => {
            let f = instance.load(2, seed)?;
            match two_isat::decide(&f)? {
                Decision::Sat(a) => {
                    let mut buf = b"SAT\n".to_vec();
                    write_assignment(&a, &mut buf).expect("in-memory write");
                    ctx.emit(std::str::from_utf8(&buf).expect("UTF-8"))?;
                }
                Decision::Unsat(w) => ctx.emit(&format!(
                    "UNSAT\nw {} {} {} component {}\n",
                    w.var + 1,
                    w.sign.lo(),
                    w.sign.hi(),
                    w.component
                ))?,
            }
        }
        Command::Phase2 { n, c, trials } => {
            let rows = with_threads(cli.threads, || phase_experiment(n, &c, trials, seed))??;
            ctx.table(&rows)?;
        }
        Command::Probe { samples } => {
            let rows = with_threads(cli.threads, || random_interval::probe(samples, seed))?;
            ctx.table(&rows)?;
        }
        Command::QueueSim { a, m, n, runs, mode, alpha_max } => {
            let config = QueueConfig::new(a, Arrival::BinomialRandomP { m, n });
            match mode {
                QueueMode::Mean => {
                    let samples = with_threads(cli.threads, || queue::sample_z(&config, runs, seed))??;
                    let rows: Vec<ZRow> = samples.into_iter().enumerate().map(|(run, z)| ZRow { run, z }).collect();
                    ctx.table(&rows)?;
                    let stats = queue::summarize(&rows.iter().map(|r| r.z).collect::<Vec<_>>());
                    eprintln!(
                        "mean {:.4} (std err {:.4}), predicted {}, {} runs did not die out",
                        stats.mean,
                        stats.std_err,
                        queue::mean_z_random_p(a as f64, m as f64 / n as f64)
                            .map_or_else(|e| format!("n/a ({e})"), |v| format!("{v:.4}")),
                        stats.non_extinct
                    );
                }
                QueueMode::Tail => {
                    let grid: Vec<u64> = (1..=alpha_max).collect();
                    let tail = with_threads(cli.threads, || queue::tail_estimate(a, m, n, &grid, runs, seed, 100))??;
                    ctx.table(&tail.rows)?;
                    eprintln!("fitted slope {:.5} on {} points", tail.slope, tail.fitted_points);
                }
                QueueMode::Trace => match queue::simulate(&config, seed, true)? {
                    QueueOutcome::Extinct { trace, .. } => {
                        let rows: Vec<TraceRow> = trace
                            .unwrap_or_default()
                            .into_iter()
                            .enumerate()
                            .map(|(step, arrivals)| TraceRow { step: step + 1, arrivals })
                            .collect();
                        ctx.table(&rows)?;
                    }
                    QueueOutcome::NonExtinct { steps } => {
                        return Err(Error::Domain(format!("queue did not die out within {steps} steps")));
                    }
                },
            }
        }
        Command::Ivp { c, x_stop, step } => {
            let sol = ode::integrate(c, x_stop, step)?;
            ctx.table(&trajectory_rows(&sol))?;
            if !sol.completed() {
                eprintln!("stopped at the singularity near x = {}", sol.x_end());
            }
        }
        Command::Threshold { eps, tol, lo, hi, emit_trajectory } => {
            let c = ode::find_threshold(eps, lo, hi, tol)?;
            ctx.emit(&format!("{c}\n"))?;
            if let Some(path) = emit_trajectory {
                let sol = ode::integrate(c, ode::HANDOFF_X, ode::DEFAULT_STEP)?;
                isat::harness::output::write_csv(&path, &trajectory_rows(&sol), &ctx.provenance)?;
            }
        }
        Command::Drift { n, x, y2, y3, window, seeds, eps } => {
            let table = with_threads(cli.threads, || drift::measure_drift(n, (x, y2, y3), window, seeds, seed, eps))??;
            ctx.table(&table.rows)?;
            eprintln!("{} iterations pooled, {} rejected", table.iterations, table.rejected);
        }
        Command::SuccessCurve { n, c, trials, c_prime } => {
            let rows = with_threads(cli.threads, || success_curve(n, &c, trials, c_prime, seed))??;
            ctx.table(&rows)?;
        }
        Command::RunAll { config } => {
            let mut cfg = match config {
                Some(path) => Config::load(&path)?,
                None => Config { seed, ..Config::default() },
            };
            if cli.threads != 0 {
                cfg.threads = cli.threads;
            }
            let dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("isat-report"));
            let summary = run_all(&cfg, &dir, !cli.no_timestamp)?;
            print_summary(&summary);
            return Ok(if summary.passed { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn print_summary(summary: &harness::Summary) {
    for v in &summary.criteria {
        println!(
            "{} {:>2} {}: {} ({:.1} s)",
            if v.passed { "PASS" } else { "FAIL" },
            v.id,
            v.name,
            v.detail,
            v.seconds
        );
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
