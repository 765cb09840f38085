//! Command-line harness: solve a scenario, sweep a fixture table, cross-check
//! a solution against the grid oracle, or check a preference distribution's
//! regularity.
//!
//! Exit codes: `0` success, `1` validation or parse failure (including a
//! failed distribution regularity check), `2` solver non-convergence, `3`
//! oracle-verdict failure or a collaboration result contradicting the
//! expected table.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use coopetition_core::{
    load_accuracy_fixtures, load_expected_collaboration, load_scenario, load_sweep_base, oracle,
    period1, solve_scenario, sweep, write_collaboration_csv, write_json, write_pricing_csv,
    DistributionKind, Error, PreferenceDistribution, SolverSettings,
};

#[derive(Parser)]
#[command(
    name = "coopetition",
    version,
    about = "Two-period market equilibrium solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for reports and series files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the oracle grid resolution.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Override the best-response convergence tolerance.
    #[arg(long, global = true)]
    eps: Option<f64>,

    /// Override the best-response damping factor in [0, 1).
    #[arg(long, global = true)]
    damping: Option<f64>,

    /// Worker threads for sweeps (1 = serial reference behavior).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Omit the timestamp field so identical runs produce identical bytes.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario file end to end and write the equilibrium report.
    Solve { scenario: PathBuf },
    /// Solve every fixture row and write the collaboration table and pricing
    /// series.
    Sweep {
        /// Accuracy fixture table (CSV).
        fixtures: PathBuf,
        /// Shared market configuration (scenario file; qualities ignored).
        params: PathBuf,
        /// Expected collaboration flags; mismatches produce a structured
        /// discrepancy report and exit code 3.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Solve a scenario and cross-check it against the exhaustive grid
    /// oracle.
    OracleCheck { scenario: PathBuf },
    /// Check a preference distribution's positivity and hazard monotonicity.
    CheckDist {
        /// One of: `uniform`, `gaussian:<mean>,<sd>`, `gamma:<shape>,<scale>`,
        /// `valley-mixture`, `valley-mixture:<lo>,<hi>,<sd>,<weight>`.
        descriptor: String,
        /// Hazard evaluation grid points.
        #[arg(long, default_value_t = 512)]
        points: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::NonConvergence { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    std::fs::create_dir_all(&cli.out).map_err(|source| Error::Io {
        path: cli.out.display().to_string(),
        source,
    })?;
    match &cli.command {
        Command::Solve { scenario } => solve(cli, scenario),
        Command::Sweep {
            fixtures,
            params,
            expect,
        } => run_sweep(cli, fixtures, params, expect.as_deref()),
        Command::OracleCheck { scenario } => oracle_check(cli, scenario),
        Command::CheckDist { descriptor, points } => check_dist(cli, descriptor, *points),
    }
}

fn apply_overrides(cli: &Cli, settings: &mut SolverSettings) -> Result<(), Error> {
    if let Some(grid) = cli.grid {
        settings.oracle_grid_n = grid;
    }
    if let Some(eps) = cli.eps {
        settings.br_tolerance = eps;
    }
    if let Some(damping) = cli.damping {
        settings.damping = damping;
    }
    settings.validate()
}

fn solve(cli: &Cli, path: &Path) -> Result<ExitCode, Error> {
    let mut scenario = load_scenario(path)?;
    apply_overrides(cli, &mut scenario.settings)?;
    let report = solve_scenario(&scenario, !cli.no_timestamp)?;
    let out = cli.out.join("solve_report.json");
    write_json(&report, &out)?;

    let eq = &report.equilibrium;
    println!("scenario        {}", scenario.metadata.label);
    println!(
        "collaborate     {}",
        if eq.collaborate { "yes" } else { "no" }
    );
    println!(
        "period-1 price  {:.6}  (threshold {:.6})",
        eq.period1_price, eq.threshold
    );
    println!(
        "period-2 prices incumbent {:.6}  entrant {:.6}",
        eq.incumbent_price2, eq.entrant_price2
    );
    println!(
        "profits         incumbent {:.6} (+{:.6} in period 1)  entrant {:.6}",
        eq.incumbent_total_profit, eq.period1_profit, eq.period2_entrant_profit
    );
    println!(
        "oracle          {}",
        if eq.oracle_verified {
            "verified"
        } else {
            "FAILED"
        }
    );
    if cli.verbose > 0 {
        for r in &eq.regions {
            println!(
                "  region {:<17} [{:.4}, {:.4}] -> price {:.6} profit {:.6} ({} iterations{})",
                r.label,
                r.lo,
                r.hi,
                r.price,
                r.total_profit,
                r.iterations,
                if r.converged { "" } else { ", hit cap" }
            );
        }
    }
    if let Some(cmp) = &report.reference {
        println!(
            "reference comparison at period-1 price {:.6}:",
            cmp.period1_price
        );
        println!(
            "  shared-model profits    computed ({:.6}, {:.6})  expected {}  -> {}",
            cmp.computed_federated.0,
            cmp.computed_federated.1,
            fmt_pair(cmp.expected_federated),
            fmt_match(cmp.federated_matches),
        );
        println!(
            "  local-model profits     computed ({:.6}, {:.6})  expected {}  -> {}",
            cmp.computed_standalone.0,
            cmp.computed_standalone.1,
            fmt_pair(cmp.expected_standalone),
            fmt_match(cmp.standalone_matches),
        );
        println!(
            "  collaboration           computed {}  expected {}  -> {}",
            cmp.computed_collaborate,
            cmp.expected_collaborate
                .map_or("-".into(), |b| b.to_string()),
            fmt_match(cmp.collaborate_matches),
        );
        println!(
            "  deviation verdicts      shared-model {}  local {}",
            if cmp.federated_verified {
                "pass"
            } else {
                "FAIL"
            },
            if cmp.standalone_verified {
                "pass"
            } else {
                "FAIL"
            },
        );
    }
    println!("report written to {}", out.display());

    let reference_verified = report
        .reference
        .as_ref()
        .is_none_or(|c| c.federated_verified && c.standalone_verified);
    if eq.oracle_verified && reference_verified {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

fn run_sweep(
    cli: &Cli,
    fixtures_path: &Path,
    params_path: &Path,
    expect: Option<&Path>,
) -> Result<ExitCode, Error> {
    let fixtures = load_accuracy_fixtures(fixtures_path)?;
    let mut base = load_sweep_base(params_path)?;
    apply_overrides(cli, &mut base.settings)?;
    let expected = expect.map(load_expected_collaboration).transpose()?;

    let report = sweep::run_sweep(
        &fixtures,
        &base,
        expected.as_deref(),
        cli.workers,
        !cli.no_timestamp,
    )?;

    write_json(&report, cli.out.join("sweep_report.json"))?;
    write_collaboration_csv(&report, cli.out.join("collaboration.csv"))?;
    write_pricing_csv(&report, cli.out.join("pricing.csv"))?;

    println!(
        "{:<10} {:<10} {:<12} {:>10} {:>10} {:>10}",
        "dataset", "key", "collaborate", "p1", "p2(inc)", "p2(ent)"
    );
    for cell in &report.cells {
        match &cell.report {
            Some(r) => println!(
                "{:<10} {:<10} {:<12} {:>10.4} {:>10.4} {:>10.4}",
                cell.dataset,
                cell.sweep_key,
                r.collaborate,
                r.period1_price,
                r.incumbent_price2,
                r.entrant_price2
            ),
            None => println!(
                "{:<10} {:<10} failed: {}",
                cell.dataset,
                cell.sweep_key,
                cell.error.as_deref().unwrap_or("unknown")
            ),
        }
    }
    let failed = report.cells.iter().filter(|c| c.error.is_some()).count();
    let unverified = report
        .cells
        .iter()
        .filter_map(|c| c.report.as_ref())
        .filter(|r| !r.oracle_verified)
        .count();
    if report.discrepancy_count > 0 {
        println!(
            "{} cell(s) contradict the expected collaboration table; see the \
             discrepancy blocks in sweep_report.json",
            report.discrepancy_count
        );
        for cell in &report.cells {
            if let Some(d) = &cell.discrepancy {
                println!(
                    "  {}/{}: expected {} computed {} | shared-model profits ({:.4}, {:.4}) vs local ({:.4}, {:.4}) | oracle tables attached",
                    d.dataset,
                    d.sweep_key,
                    d.expected_collaborate,
                    d.computed_collaborate,
                    d.federated_profits.0,
                    d.federated_profits.1,
                    d.standalone_profits.0,
                    d.standalone_profits.1,
                );
            }
        }
    }
    println!("reports written to {}", cli.out.display());

    if failed > 0 {
        Ok(ExitCode::from(2))
    } else if report.discrepancy_count > 0 || unverified > 0 {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn oracle_check(cli: &Cli, path: &Path) -> Result<ExitCode, Error> {
    let mut scenario = load_scenario(path)?;
    apply_overrides(cli, &mut scenario.settings)?;
    let grid_n = scenario.settings.oracle_grid_n;

    let solution = period1::optimize(
        &scenario.params,
        &scenario.distribution,
        &scenario.qualities,
        &scenario.settings,
    )?;
    let grid = oracle::grid_period1_optimum(
        &scenario.params,
        &scenario.distribution,
        &scenario.qualities,
        grid_n,
    )?;
    let gap = solution.total_profit - grid.total_profit;
    let federated_verified = solution.collaboration.federated.equilibrium.verified;
    let standalone_verified = solution.collaboration.standalone.equilibrium.verified;
    let agreement = gap.abs() <= 1e-3 || gap > 0.0;

    #[derive(serde::Serialize)]
    struct OracleCheckReport {
        solver_price: f64,
        solver_profit: f64,
        grid_price: f64,
        grid_profit: f64,
        profit_gap: f64,
        grid_n: usize,
        federated_verified: bool,
        standalone_verified: bool,
        agreement: bool,
    }
    let report = OracleCheckReport {
        solver_price: solution.price,
        solver_profit: solution.total_profit,
        grid_price: grid.price,
        grid_profit: grid.total_profit,
        profit_gap: gap,
        grid_n,
        federated_verified,
        standalone_verified,
        agreement,
    };
    write_json(&report, cli.out.join("oracle_check.json"))?;

    println!(
        "solver  price {:.6} profit {:.6}",
        solution.price, solution.total_profit
    );
    println!(
        "grid    price {:.6} profit {:.6}  (n = {})",
        grid.price, grid.total_profit, grid_n
    );
    println!("gap     {:+.3e}", gap);
    println!(
        "deviation verdicts: shared-model {}, local {}",
        if federated_verified { "pass" } else { "FAIL" },
        if standalone_verified { "pass" } else { "FAIL" }
    );

    if agreement && federated_verified && standalone_verified {
        println!("oracle check passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("oracle check FAILED");
        Ok(ExitCode::from(3))
    }
}

fn parse_descriptor(descriptor: &str) -> Result<PreferenceDistribution, Error> {
    let bad = |msg: &str| Error::validation("descriptor", msg.to_string());
    let (head, args) = match descriptor.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (descriptor, None),
    };
    let numbers = |args: Option<&str>, n: usize| -> Result<Vec<f64>, Error> {
        let raw = args.ok_or_else(|| bad("missing parameters"))?;
        let vals: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|_| bad("parameters must be numbers"))?;
        if vals.len() != n {
            return Err(bad("wrong parameter count"));
        }
        Ok(vals)
    };
    match head {
        "uniform" => Ok(PreferenceDistribution::uniform()),
        "gaussian" | "truncated-gaussian" => {
            let v = numbers(args, 2)?;
            PreferenceDistribution::truncated_gaussian(v[0], v[1])
        }
        "gamma" | "truncated-gamma" => {
            let v = numbers(args, 2)?;
            PreferenceDistribution::truncated_gamma(v[0], v[1])
        }
        "valley-mixture" => match args {
            None => Ok(PreferenceDistribution::valley_mixture()),
            Some(_) => {
                let v = numbers(args, 4)?;
                PreferenceDistribution::new(DistributionKind::ValleyMixture {
                    low_mean: v[0],
                    high_mean: v[1],
                    sd: v[2],
                    low_weight: v[3],
                })
            }
        },
        other => Err(bad(&format!(
            "unknown distribution `{other}` (expected uniform, gaussian, gamma, or valley-mixture)"
        ))),
    }
}

fn check_dist(cli: &Cli, descriptor: &str, points: usize) -> Result<ExitCode, Error> {
    let dist = parse_descriptor(descriptor)?;
    let report = dist.hazard_monotone_check(points)?;

    #[derive(serde::Serialize)]
    struct DistCheckReport<'a> {
        descriptor: &'a str,
        monotone_hazard: bool,
        first_violation: Option<f64>,
        violations: usize,
        nonfinite_points: usize,
        guard_band: f64,
        grid_points: usize,
    }
    write_json(
        &DistCheckReport {
            descriptor,
            monotone_hazard: report.monotone,
            first_violation: report.first_violation,
            violations: report.violations,
            nonfinite_points: report.nonfinite_points,
            guard_band: report.guard_band,
            grid_points: report.grid_points,
        },
        cli.out.join("distribution_check.json"),
    )?;

    if report.monotone {
        println!(
            "hazard rate is non-decreasing on [0, {}] ({} grid points)",
            1.0 - report.guard_band,
            report.grid_points
        );
        if report.nonfinite_points > 0 {
            println!(
                "note: {} grid point(s) near the guard band were non-finite",
                report.nonfinite_points
            );
        }
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "hazard rate DECREASES at location {:.6} ({} violation(s)): \
             regularity condition fails",
            report.first_violation.unwrap_or(f64::NAN),
            report.violations
        );
        Ok(ExitCode::from(1))
    }
}

fn fmt_pair(pair: Option<(f64, f64)>) -> String {
    match pair {
        Some((a, b)) => format!("({a:.6}, {b:.6})"),
        None => "-".into(),
    }
}

fn fmt_match(m: Option<bool>) -> &'static str {
    match m {
        Some(true) => "match",
        Some(false) => "MISMATCH (documented)",
        None => "-",
    }
}
