use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use irs_owc::config::{ConfigDocument, SweepSpec};
use irs_owc::error::{Error, Result};
use irs_owc::network::{
    build_default_scenario, evaluate_scenario, sweep_snr, sweep_users, Scenario, Variant,
};
use irs_owc::output::{write_csv, write_svg, PlotLabels, ResultRow, ResultTable};
use irs_owc::selftest::run_selftest;

#[derive(Parser)]
#[command(
    name = "irs-owc",
    version,
    about = "Sum-rate simulator for IRS-assisted laser optical wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON scenario file; missing keys take their defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// User placement seed, overriding `users.seed`
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = VariantArg::All)]
    variant: VariantArg,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured scenario once
    Simulate,
    /// Sum rate against transmit SNR
    SweepSnr,
    /// Sum rate against number of users
    SweepUsers,
    /// Run the built-in invariant checks
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    None,
    #[value(name = "5x5")]
    Five,
    #[value(name = "10x10")]
    Ten,
    All,
}

impl VariantArg {
    fn select(self, all: Vec<Variant>) -> Vec<Variant> {
        match self {
            VariantArg::All => all,
            VariantArg::None => vec![Variant::NoIrs],
            VariantArg::Five => vec![Variant::Irs(5)],
            VariantArg::Ten => vec![Variant::Irs(10)],
        }
    }
}

fn load(cli: &Cli) -> Result<(Scenario, SweepSpec)> {
    let mut doc = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            ConfigDocument::from_json(&text)?
        }
        None => ConfigDocument::default(),
    };
    if let Some(seed) = cli.seed {
        doc.users.seed = seed;
    }
    doc.sweep.validate()?;
    let scenario = build_default_scenario(&doc)?;
    Ok((scenario, doc.sweep))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Selftest = cli.command {
        let checks = run_selftest();
        for c in &checks {
            println!("{c}");
        }
        let failed = checks.iter().filter(|c| !c.passed).count();
        println!("{} passed, {failed} failed", checks.len() - failed);
        return if failed == 0 {
            Ok(())
        } else {
            Err(Error::Validation {
                path: "selftest".into(),
                message: format!("{failed} checks failed"),
            })
        };
    }

    let (scenario, sweep) = load(cli)?;
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::Io {
        path: cli.out.clone(),
        source: e,
    })?;
    write_text(
        &cli.out.join("effective_config.json"),
        &scenario.config().to_json(),
    )?;
    let out = &scenario.config().output;

    match cli.command {
        Command::Simulate => {
            let variants = match cli.variant {
                VariantArg::All => vec![if scenario.irs.is_some() {
                    Variant::Irs(scenario.config().irs.grid_m)
                } else {
                    Variant::NoIrs
                }],
                v => v.select(Vec::new()),
            };
            let mut table = ResultTable::default();
            for v in variants {
                let sc = scenario.with_variant(v)?;
                let (assignment, results) = evaluate_scenario(&sc)?;
                let rates: Vec<f64> = results.iter().map(|r| r.rate).collect();
                for (k, r) in results.iter().enumerate() {
                    println!(
                        "{} user {k}: q = {:.4e}, mirrors = {:?}, sinr = {:.4e}, rate = {:.4e} bit/s",
                        v.label(),
                        r.effective_gain,
                        assignment.per_user[k],
                        r.sinr,
                        r.rate
                    );
                }
                table.rows.push(ResultRow {
                    sweep_var: sc.p_tot,
                    variant: v.label(),
                    sum_rate_bps: rates.iter().sum(),
                    per_user_rates_bps: rates,
                });
            }
            table.sort();
            write_csv(&table, cli.out.join(&out.simulate_csv))?;
        }
        Command::SweepSnr => {
            let variants = cli.variant.select(Variant::snr_sweep_set());
            let table = sweep_snr(&scenario, &sweep.snr_db, sweep.drops, &variants)?;
            write_csv(&table, cli.out.join(&out.snr_csv))?;
            let labels = PlotLabels {
                title: format!(
                    "Sum rate against transmit SNR, K = {}",
                    scenario.users.len()
                ),
                x_label: "Transmit SNR (dB)".into(),
                y_label: "Sum rate (Gbit/s)".into(),
            };
            write_svg(&table, &labels, cli.out.join(&out.snr_svg))?;
            report_mid_sweep(&table, &sweep.snr_db);
        }
        Command::SweepUsers => {
            let variants = cli.variant.select(Variant::user_sweep_set(&scenario));
            let table = sweep_users(&scenario, &sweep.k_values, sweep.drops, &variants)?;
            write_csv(&table, cli.out.join(&out.users_csv))?;
            let labels = PlotLabels {
                title: format!(
                    "Sum rate against number of users, P_tot = {} W",
                    scenario.p_tot
                ),
                x_label: "Number of users K".into(),
                y_label: "Sum rate (Gbit/s)".into(),
            };
            write_svg(&table, &labels, cli.out.join(&out.users_svg))?;
        }
        Command::Selftest => unreachable!(),
    }
    Ok(())
}

fn report_mid_sweep(table: &ResultTable, points: &[f64]) {
    let mid = points[points.len() / 2];
    let at = |v: &str| {
        table
            .rows
            .iter()
            .find(|r| r.variant == v && r.sweep_var == mid)
            .map(|r| r.sum_rate_bps)
    };
    if let (Some(ten), Some(five), Some(none)) = (at("10x10"), at("5x5"), at("none")) {
        println!(
            "mid-sweep {mid} dB: 10x10 vs none {:+.1}%, 10x10 vs 5x5 {:+.1}%",
            100.0 * (ten / none - 1.0),
            100.0 * (ten / five - 1.0)
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
