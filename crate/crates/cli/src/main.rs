use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use elastica_flow::elastica::{ShapeKind, Side};
use elastica_flow::runner::{self, exit_code, RunOutput, EXIT_USAGE};
use elastica_flow::Error;

#[derive(Parser)]
#[command(
    name = "elastica-flow",
    version,
    about = "Elastic flow of open planar curves with pinned ends"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the number of polyline segments.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(8..))]
    vertices: Option<u64>,
    /// Accepted for documentation: every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reproduce shipped examples (ex3_1 ... ex3_5, ex3_6a, ex3_6b, or `all`).
    Reproduce {
        #[arg(required = true)]
        ids: Vec<String>,
    },
    /// Write a critical shape of unit length as shape.csv and shape.json.
    Critical {
        #[arg(long, value_parser = ratio)]
        ratio: f64,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        fold: u32,
        #[arg(long, value_enum, default_value = "+", allow_hyphen_values = true)]
        sign: SignArg,
    },
    /// Tabulate arc and loop energies against the figure-eight threshold.
    EnergyTable {
        #[arg(long, default_value_t = 0.05, value_parser = ratio)]
        rmin: f64,
        #[arg(long, default_value_t = 0.95, value_parser = ratio)]
        rmax: f64,
        #[arg(long, default_value_t = 19)]
        steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Arc,
    Loop,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    #[value(name = "+")]
    Plus,
    #[value(name = "-")]
    Minus,
}

fn ratio(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(format!("ratio must lie strictly between 0 and 1, got {r}"))
    }
}

fn report(id: &str, dir: &std::path::Path, out: &RunOutput) -> i32 {
    let s = &out.summary;
    println!(
        "{id}: migrated={} t0={:?} t1={:?} limit={} (distance {:.3e}{}) steps={} -> {}",
        s.migrated,
        s.t0,
        s.t1,
        s.limit.kind,
        s.limit.distance,
        if s.limit.tentative { ", tentative" } else { "" },
        s.accepted_steps,
        dir.display()
    );
    for c in &s.outcome_checks {
        if !c.ok {
            println!(
                "  expected {} = {}, observed {}",
                c.name, c.expected, c.observed
            );
        }
    }
    for c in &s.soft_checks {
        if !c.within_tolerance {
            println!(
                "  soft: {:?} expected near {:e}, observed {:?}",
                c.event, c.expected, c.observed
            );
        }
    }
    for v in &s.invariant_violations {
        eprintln!(
            "  invariant violated at step {} (t = {:e}): {}",
            v.step, v.time, v.description
        );
    }
    s.exit_status()
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let vertices = cli.vertices.map(|n| n as usize);
    let out_root = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let code = match cli.command {
        Command::Run { config } => {
            match runner::run_config_file(&config, cli.out.as_deref(), vertices) {
                Ok((dir, out)) => report(&out.summary.id.clone(), &dir, &out),
                Err(e) => fail(&e),
            }
        }
        Command::Reproduce { ids } => {
            let ids: Vec<String> = if ids.iter().any(|i| i == "all") {
                runner::presets::PRESET_IDS
                    .iter()
                    .map(|s| s.to_string())
                    .collect()
            } else {
                ids
            };
            let mut worst = 0;
            for (id, res) in ids
                .iter()
                .zip(runner::reproduce_many(&ids, &out_root, vertices))
            {
                let code = match res {
                    Ok((dir, out)) => report(id, &dir, &out),
                    Err(e) => fail(&e),
                };
                worst = worst.max(code);
            }
            worst
        }
        Command::Critical {
            ratio,
            kind,
            fold,
            sign,
        } => {
            let kind = match kind {
                KindArg::Arc => ShapeKind::Arc,
                KindArg::Loop => ShapeKind::Loop,
            };
            let side = match sign {
                SignArg::Plus => Side::Upper,
                SignArg::Minus => Side::Lower,
            };
            let samples = vertices.unwrap_or(400).max(200);
            match runner::critical(ratio, kind, fold, side, samples, &out_root) {
                Ok(c) => {
                    println!(
                        "B = {:.12} (closed form {:.12}), lambda = {:.12}, halfplane = {}, wrote {}",
                        c.bending_energy,
                        c.shape.bending_energy_closed_form,
                        c.shape.lambda_exact,
                        c.halfplane.as_str(),
                        out_root.join("shape.csv").display()
                    );
                    0
                }
                Err(e) => fail(&e),
            }
        }
        Command::EnergyTable { rmin, rmax, steps } => {
            match runner::write_energy_table(rmin, rmax, steps, &out_root) {
                Ok(rows) => {
                    println!(
                        "r,b_arc,b_loop,arc_below_loop,loop_below_2varpi,fourfold_arc_above_loop"
                    );
                    for r in rows {
                        println!(
                            "{:.4},{:.6},{:.6},{},{},{}",
                            r.r,
                            r.b_arc,
                            r.b_loop,
                            r.arc_below_loop,
                            r.loop_below_2varpi,
                            r.fourfold_arc_above_loop
                        );
                    }
                    0
                }
                Err(e) => fail(&e),
            }
        }
    };
    if code == EXIT_USAGE {
        eprintln!("see --help for usage");
    }
    ExitCode::from(code.clamp(0, 255) as u8)
}
