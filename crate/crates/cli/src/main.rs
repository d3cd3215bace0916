use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use machact::model::{
    add_random_assignment_costs, add_random_profits, add_random_release_times, gen_gap_instance, gen_random_instance,
    gen_random_set_system, gen_setcover_instance, Profile,
};
use machact::oracle::{exact_frontier, OracleLimits};
use machact_cli::compare::compare;
use machact_cli::golden::{check_golden, load_frontier, write_golden};
use machact_cli::io::{instance_hash, instance_to_string, pretty_json, read_instance, write_text};
use machact_cli::solve::{solve, trials_csv, Algo, SolveParams, Status};
use machact_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "machact", version, about = "Machine activation scheduling")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    Gap,
    Setcover,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Unrelated,
    Related,
    Restricted,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Unrelated => Profile::Unrelated,
            ProfileArg::Related => Profile::Related,
            ProfileArg::Restricted => Profile::Restricted,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Jobs (elements for setcover).
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Machines (sets for setcover).
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, value_enum, default_value = "unrelated")]
        profile: ProfileArg,
        /// Cost of the expensive machine of the gap family.
        #[arg(long = "R", default_value_t = 100.0)]
        r: f64,
        /// Makespan of the gap family.
        #[arg(long = "T", default_value_t = 12.0)]
        t: f64,
        /// Attach integer profits in 1..=MAX.
        #[arg(long, value_name = "MAX")]
        profits: Option<u32>,
        /// Attach integer assignment costs in 0..=MAX.
        #[arg(long, value_name = "MAX")]
        assign_costs: Option<u32>,
        /// Attach integer release times in 0..=MAX.
        #[arg(long, value_name = "MAX")]
        release: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm and write a JSON report.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long = "T")]
        t: Option<f64>,
        /// Run over a geometric grid of makespan guesses instead of one T.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long)]
        pi_target: Option<f64>,
        #[arg(long)]
        cost_budget: Option<f64>,
        #[arg(long)]
        drop_budget: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-trial statistics as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Migration events as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Tabulate cost and makespan ratios against an exact frontier.
    Compare {
        /// Instance file; optional when the golden file is given.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, conflicts_with = "oracle")]
        golden: Option<PathBuf>,
        /// Compute the frontier by brute force.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "main,greedy")]
        algo: Vec<Algo>,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the golden files (or check them with --check).
    Golden {
        #[arg(long, default_value = "crates/cli/tests/golden")]
        dir: PathBuf,
        #[arg(long)]
        check: bool,
    },
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.cmd {
        Cmd::Gen { kind, seed, n, m, profile, r, t, profits, assign_costs, release, out } => {
            let mut inst = match kind {
                Kind::Random => gen_random_instance(seed, n, m, profile.into())?,
                Kind::Gap => gen_gap_instance(m, r, t)?,
                Kind::Setcover => {
                    if n == 0 || m == 0 {
                        return Err(CliError::Usage("setcover needs --n and --m of at least 1".into()));
                    }
                    gen_setcover_instance(&gen_random_set_system(seed, n, m), n)?
                }
            };
            if let Some(max) = profits {
                inst = add_random_profits(inst, seed.wrapping_add(1), max)?;
            }
            if let Some(max) = assign_costs {
                inst = add_random_assignment_costs(inst, seed.wrapping_add(2), max)?;
            }
            if let Some(max) = release {
                inst = add_random_release_times(inst, seed.wrapping_add(3), max)?;
            }
            emit(out.as_deref(), &instance_to_string(&inst)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Solve {
            instance,
            algo,
            t,
            sweep,
            epsilon,
            pi_target,
            cost_budget,
            drop_budget,
            seed,
            trials,
            out,
            csv,
            trace,
        } => {
            let inst = read_instance(&instance)?;
            let params = SolveParams { algo, t, epsilon, pi_target, cost_budget, drop_budget, seed };
            let result = solve(&inst, &params, trials, sweep)?;
            emit(out.as_deref(), &result.report.to_json()?)?;
            if let Some(path) = csv {
                write_text(&path, &trials_csv(&result.trial_rows))?;
            }
            if let Some(path) = trace {
                write_text(&path, &result.trace_jsonl()?)?;
            }
            match result.report.status {
                Status::BoundViolation => {
                    for line in result.report.violations() {
                        eprintln!("bound violated: {line}");
                    }
                    if let Some(rows) = &result.report.sweep {
                        for r in rows.iter().filter(|r| r.status == Status::BoundViolation) {
                            eprintln!("bound violated at T = {}", r.t);
                        }
                    }
                    if let Some(s) = &result.report.trials {
                        if s.failures > 0 {
                            eprintln!("{} of {} trials violated a bound", s.failures, s.count);
                        }
                    }
                    Ok(ExitCode::from(1))
                }
                Status::Infeasible => {
                    eprintln!("INFEASIBLE");
                    Ok(ExitCode::SUCCESS)
                }
                Status::Ok => Ok(ExitCode::SUCCESS),
            }
        }
        Cmd::Compare { instance, golden, oracle, algo, epsilon, seed, out } => {
            let (inst, frontier) = match (golden, oracle) {
                (Some(path), false) => {
                    let (g_inst, frontier) = load_frontier(&path)?.decode()?;
                    if let Some(ipath) = &instance {
                        let inst = read_instance(ipath)?;
                        if instance_hash(&inst) != instance_hash(&g_inst) {
                            return Err(CliError::Golden(format!(
                                "{} does not belong to {}",
                                path.display(),
                                ipath.display()
                            )));
                        }
                    }
                    (g_inst, frontier)
                }
                (None, true) => {
                    let ipath = instance.ok_or_else(|| CliError::Usage("--oracle needs --instance".into()))?;
                    let inst = read_instance(&ipath)?;
                    let frontier = exact_frontier(&inst, OracleLimits::default())?;
                    (inst, frontier)
                }
                _ => return Err(CliError::Usage("give exactly one of --golden or --oracle".into())),
            };
            let rep = compare(&inst, &frontier, &algo, epsilon, seed)?;
            emit(out.as_deref(), &pretty_json(&rep)?)?;
            if rep.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                for r in rep.rows.iter().filter(|r| !r.pass) {
                    eprintln!(
                        "{} at (A*={}, T*={}): cost ratio {} (bound {}), makespan ratio {} (bound {})",
                        r.algo.name(),
                        r.a_star,
                        r.t_star,
                        r.cost_ratio,
                        r.cost_bound,
                        r.makespan_ratio,
                        r.makespan_bound
                    );
                }
                Ok(ExitCode::from(1))
            }
        }
        Cmd::Golden { dir, check } => {
            if check {
                let stale = check_golden(&dir)?;
                if stale.is_empty() {
                    println!("golden files up to date");
                    Ok(ExitCode::SUCCESS)
                } else {
                    for name in stale {
                        eprintln!("stale: {}", dir.join(name).display());
                    }
                    Ok(ExitCode::from(1))
                }
            } else {
                for name in write_golden(&dir)? {
                    println!("wrote {}", dir.join(name).display());
                }
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
