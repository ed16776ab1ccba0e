//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure
//! (sampling violation, fit non-convergence with no valid rows).

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biphoton::{Domain, Result};
use biphoton_cli::csvout::{fmt_value, write_csv, write_json};
use biphoton_cli::runners;
use biphoton_cli::scenario::{Scenario, ScenarioFile};

#[derive(Parser)]
#[command(
    name = "biphoton",
    about = "Wave-optics simulation of SPDC biphoton transverse entanglement",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpDomain {
    Position,
    Momentum,
}

#[derive(Subcommand)]
enum Command {
    /// Fedorov ratio versus detection distance (CSV: z, widths, R)
    FedorovScan {
        #[arg(long)]
        config: PathBuf,
        /// Override the scenario's CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schmidt number versus detection distance, SVD and visibility estimators
    SchmidtScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Source Schmidt modes and eigenvalue spectrum
    Modes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        n_modes: usize,
    },
    /// Interferometer coincidence rate versus phase at one plane
    PhaseScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        n_thetas: usize,
        /// Detection distance from the lens (mm)
        #[arg(long, default_value_t = 1440.0)]
        z_mm: f64,
    },
    /// Joint intensity map at one plane, decimated to <= 256x256
    Amplitude {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        z_mm: f64,
        #[arg(long, value_enum, default_value_t = DumpDomain::Position)]
        domain: DumpDomain,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    runners::configure_workers();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(biphoton_cli::exit_code_for(&e) as u8)
        }
    }
}

fn load(config: &Path) -> Result<Scenario> {
    ScenarioFile::load(config)?.resolve()
}

fn resolved_paths(scenario: &Scenario, out: Option<PathBuf>) -> (PathBuf, PathBuf) {
    let csv = out.unwrap_or_else(|| PathBuf::from(&scenario.csv_path));
    let summary = PathBuf::from(&scenario.summary_path);
    (csv, summary)
}

fn summary_base(command: &str, scenario: &Scenario, warnings: &[String]) -> serde_json::Value {
    json!({
        "command": command,
        "scenario": scenario,
        "warnings": warnings,
    })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::FedorovScan { config, out } => {
            let scenario = load(&config)?;
            let (csv_path, summary_path) = resolved_paths(&scenario, out);
            let scan = runners::run_fedorov_scan(&scenario)?;
            let rows: Vec<Vec<String>> = scan
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_value(Some(r.z_m * 1e3)),
                        fmt_value(r.width_unconditional),
                        fmt_value(r.width_conditional),
                        fmt_value(r.ratio),
                    ]
                })
                .collect();
            write_csv(
                &csv_path,
                &["z_mm", "width_unconditional_m", "width_conditional_m", "fedorov_ratio"],
                &rows,
            )?;
            let summary = summary_base("fedorov-scan", &scenario, &scan.warnings);
            write_json(&summary_path, &summary)?;
            println!(
                "fedorov-scan: {} planes -> {} ({} warnings)",
                scan.rows.len(),
                csv_path.display(),
                scan.warnings.len()
            );
            Ok(())
        }
        Command::SchmidtScan { config, out } => {
            let scenario = load(&config)?;
            let (csv_path, summary_path) = resolved_paths(&scenario, out);
            let scan = runners::run_schmidt_scan(&scenario)?;
            let rows: Vec<Vec<String>> = scan
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_value(Some(r.z_m * 1e3)),
                        fmt_value(r.k_svd),
                        fmt_value(r.k_visibility),
                        fmt_value(r.p_plus),
                        fmt_value(r.p_minus),
                        fmt_value(r.geometric_alpha),
                    ]
                })
                .collect();
            write_csv(
                &csv_path,
                &["z_mm", "k_svd", "k_visibility", "p_plus", "p_minus", "geometric_alpha"],
                &rows,
            )?;
            let summary = summary_base("schmidt-scan", &scenario, &scan.warnings);
            write_json(&summary_path, &summary)?;
            println!(
                "schmidt-scan: {} planes -> {} ({} warnings)",
                scan.rows.len(),
                csv_path.display(),
                scan.warnings.len()
            );
            Ok(())
        }
        Command::Modes { config, out, n_modes } => {
            let scenario = load(&config)?;
            let (csv_path, summary_path) = resolved_paths(&scenario, out);
            let modes = runners::run_modes(&scenario, n_modes)?;

            let mut header: Vec<String> = vec!["x_m".into()];
            for k in 0..modes.modes.len() {
                header.push(format!("mode_{k}"));
            }
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let rows: Vec<Vec<String>> = modes
                .coordinates
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let mut row = vec![fmt_value(Some(*x))];
                    for m in &modes.modes {
                        row.push(fmt_value(Some(m[j])));
                    }
                    row
                })
                .collect();
            write_csv(&csv_path, &header_refs, &rows)?;

            let eigen_path = csv_path.with_extension("eigenvalues.csv");
            let eigen_rows: Vec<Vec<String>> = modes
                .eigenvalues
                .iter()
                .map(|(k, l, sign, score)| {
                    vec![
                        k.to_string(),
                        fmt_value(Some(*l)),
                        fmt_value(Some(*sign)),
                        fmt_value(Some(*score)),
                    ]
                })
                .collect();
            write_csv(&eigen_path, &["n", "lambda", "parity", "parity_score"], &eigen_rows)?;

            let mut summary = summary_base("modes", &scenario, &modes.warnings);
            summary["eigenvalues_csv"] = json!(eigen_path.display().to_string());
            summary["modes_written"] = json!(modes.modes.len());
            write_json(&summary_path, &summary)?;
            println!(
                "modes: {} modes -> {} and {}",
                modes.modes.len(),
                csv_path.display(),
                eigen_path.display()
            );
            Ok(())
        }
        Command::PhaseScan { config, out, n_thetas, z_mm } => {
            let scenario = load(&config)?;
            let (csv_path, summary_path) = resolved_paths(&scenario, out);
            let scan = runners::run_phase_scan(&scenario, z_mm * 1e-3, n_thetas)?;
            let rows: Vec<Vec<String>> = scan
                .thetas
                .iter()
                .zip(&scan.rates)
                .map(|(th, r)| vec![fmt_value(Some(*th)), fmt_value(Some(*r))])
                .collect();
            write_csv(&csv_path, &["theta_rad", "rate"], &rows)?;
            let mut summary = summary_base("phase-scan", &scenario, &[]);
            summary["z_mm"] = json!(z_mm);
            summary["visibility"] = json!(scan.visibility);
            summary["k_estimate"] = json!(scan.k_estimate);
            summary["saturated"] = json!(scan.saturated);
            write_json(&summary_path, &summary)?;
            println!(
                "phase-scan at z = {z_mm} mm: visibility {:.6}, K = {:.6} -> {}",
                scan.visibility,
                scan.k_estimate,
                csv_path.display()
            );
            Ok(())
        }
        Command::Amplitude { config, out, z_mm, domain } => {
            let scenario = load(&config)?;
            let (csv_path, summary_path) = resolved_paths(&scenario, out);
            let dom = match domain {
                DumpDomain::Position => Domain::Position,
                DumpDomain::Momentum => Domain::Momentum,
            };
            let dump = runners::run_amplitude_dump(&scenario, z_mm * 1e-3, dom)?;
            let header = match dump.domain {
                Domain::Position => ["x_signal_m", "x_idler_m", "intensity"],
                Domain::Momentum => ["p_signal_radpm", "p_idler_radpm", "intensity"],
            };
            let rows: Vec<Vec<String>> = dump
                .rows
                .iter()
                .map(|(a, b, v)| {
                    vec![fmt_value(Some(*a)), fmt_value(Some(*b)), fmt_value(Some(*v))]
                })
                .collect();
            write_csv(&csv_path, &header, &rows)?;
            let mut summary = summary_base("amplitude", &scenario, &[]);
            summary["z_mm"] = json!(z_mm);
            summary["domain"] = json!(match dump.domain {
                Domain::Position => "position",
                Domain::Momentum => "momentum",
            });
            summary["pearson_correlation"] = json!(dump.pearson);
            summary["decimation_stride"] = json!(dump.decimation);
            write_json(&summary_path, &summary)?;
            println!(
                "amplitude at z = {z_mm} mm ({}): pearson {:+.4} -> {}",
                match dump.domain {
                    Domain::Position => "position",
                    Domain::Momentum => "momentum",
                },
                dump.pearson,
                csv_path.display()
            );
            Ok(())
        }
    }
}

