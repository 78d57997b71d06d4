use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hetnet_rrm::net_model::{FIG2, FIG4};
use hetnet_rrm::sim::{run_simulation_traced, Algorithm, MetricsReport, ScenarioConfig};

#[derive(Parser)]
#[command(name = "hetnet", version, about = "Two-timescale ABRB control for two-tier cellular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scheme and write its metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "proposed")]
        algorithm: Algorithm,
        #[arg(long)]
        seed: Option<u64>,
        /// Horizon in subframes, rounded down to whole super-frames.
        #[arg(long)]
        subframes: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the per-subframe scheduling trace.
        #[arg(long)]
        trace: bool,
    },
    /// Write the bundled example topologies.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
    /// Run all schemes on a common seed and print a paired table.
    Compare {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        subframes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(config: Option<&Path>, seed: Option<u64>, subframes: Option<usize>) -> Result<ScenarioConfig> {
    let mut c = match config {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("--config {}", p.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        c.network.seed = s;
    }
    if let Some(n) = subframes {
        c.set_horizon_subframes(n).context("--subframes")?;
    }
    c.validate()?;
    Ok(c)
}

fn write_report(dir: &Path, report: &MetricsReport, prefix: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(format!("{prefix}metrics.jsonl")), report.to_jsonl())?;
    fs::write(dir.join(format!("{prefix}users.tsv")), report.users_tsv())?;
    Ok(())
}

fn compare_table(reports: &[MetricsReport]) -> String {
    let mut out = String::from("algorithm\tpf_utility\tcell_capacity_mbps\tmean_kbps\tworst10_kbps\tmacro_i_kbps\tpico_i_kbps\n");
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.1}"));
    for r in reports {
        let m = &r.summary;
        out.push_str(&format!(
            "{}\t{:.4}\t{:.3}\t{:.1}\t{:.1}\t{}\t{}\n",
            r.header.algorithm,
            m.pf_utility,
            m.cell_capacity_mbps,
            m.mean_kbps,
            m.worst10_kbps,
            opt(m.macro_i_kbps),
            opt(m.pico_i_kbps),
        ));
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            algorithm,
            seed,
            subframes,
            out,
            trace,
        } => {
            let c = load(Some(&config), seed, subframes)?;
            let result = run_simulation_traced(&c, algorithm, trace)?;
            write_report(&out, &result.report, "")?;
            if let Some(t) = result.trace {
                fs::write(out.join("trace.tsv"), t)?;
            }
        }
        Command::Fixtures { out } => {
            fs::create_dir_all(&out)?;
            fs::write(out.join("fig2.topo"), FIG2)?;
            fs::write(out.join("fig4.topo"), FIG4)?;
        }
        Command::Compare {
            seed,
            config,
            subframes,
            out,
        } => {
            let c = load(config.as_deref(), Some(seed), subframes)?;
            let reports = Algorithm::ALL
                .into_iter()
                .map(|a| Ok(run_simulation_traced(&c, a, false)?.report))
                .collect::<Result<Vec<_>>>()?;
            let table = compare_table(&reports);
            print!("{table}");
            if let Some(dir) = out {
                for r in &reports {
                    write_report(&dir, r, &format!("{}_", r.header.algorithm))?;
                }
                fs::write(dir.join("compare.tsv"), &table)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
