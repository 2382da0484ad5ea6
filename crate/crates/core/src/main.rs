use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use strongstab::cli::{
    self, AnalyzeFlags, BenchFlags, RunConfig, StableHinfFlags, StrongStabFlags,
};

/// Strong stabilization and stable H-infinity controller synthesis.
#[derive(Parser)]
#[command(name = "strongstab", version, about)]
struct Cli {
    /// JSON config file with tolerances, brackets and grids.
    #[arg(long, global = true, env = "STRONGSTAB_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory for JSON/CSV reports (default: print to stdout).
    #[arg(long, global = true, env = "STRONGSTAB_OUT")]
    out: Option<PathBuf>,
    /// Seed recorded in reports and used by randomized checks.
    #[arg(long, global = true, env = "STRONGSTAB_SEED")]
    seed: Option<u64>,
    /// Chatty progress output on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parity check, H-infinity norm, transmission zeros and synthesis
    /// assumptions of a plant file.
    Analyze {
        plant: PathBuf,
        #[arg(long)]
        pip: bool,
        #[arg(long)]
        norm: bool,
        #[arg(long)]
        zeros: bool,
        #[arg(long)]
        assumptions: bool,
    },
    /// Stable stabilizing controller for the (A, B2, C2) channel.
    Strongstab {
        plant: PathBuf,
        /// Norm bound on the controller; omitted means minimize.
        #[arg(long)]
        gamma_k: Option<f64>,
        /// Bisect the smallest feasible bound.
        #[arg(long)]
        minimize: bool,
        /// Drop the norm bound (closed-loop stability only).
        #[arg(long)]
        stability_only: bool,
        /// Use the structured (frozen-Z) baseline design.
        #[arg(long)]
        structured: bool,
    },
    /// Stable H-infinity controller for a generalized plant.
    #[command(name = "stable-hinf")]
    StableHinf {
        plant: PathBuf,
        /// Performance level; omitted means minimize over the bracket.
        #[arg(long)]
        gamma: Option<f64>,
        /// Bisect the smallest feasible level.
        #[arg(long)]
        min_gamma: bool,
        /// Bisection bracket lo:hi.
        #[arg(long)]
        bracket: Option<String>,
        /// Relative bisection tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reference benchmark cases and sweeps.
    Bench {
        /// lee-soh | benchmark10 | siso-mixed | cc-pipeline | g1-sweep |
        /// g2-sweep | certificates | all
        case: String,
        /// Alpha grid lo:hi:n for the sweep cases.
        #[arg(long)]
        alpha: Option<String>,
        /// Comma-separated beta values for benchmark10.
        #[arg(long)]
        betas: Option<String>,
        /// Axis-shift epsilon for plants with imaginary-axis poles.
        #[arg(long)]
        axis_shift: Option<f64>,
        /// Run the weighted pipeline with its documented stand-in weights.
        #[arg(long)]
        cc_placeholder_weights: bool,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("expected lo:hi, got {s}"));
    }
    let lo = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:n, got {s}"));
    }
    Ok((
        parts[0].parse().map_err(|e| format!("bad lo: {e}"))?,
        parts[1].parse().map_err(|e| format!("bad hi: {e}"))?,
        parts[2].parse().map_err(|e| format!("bad n: {e}"))?,
    ))
}

fn run() -> Result<i32, String> {
    let args = Cli::parse();
    let mut cfg = RunConfig::load(args.config.as_deref()).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.verbose {
        eprintln!("config: {}", serde_json::to_string(&cfg).expect("config"));
    }
    let out = args.out.as_deref();
    let code = match &args.command {
        Command::Analyze {
            plant,
            pip,
            norm,
            zeros,
            assumptions,
        } => cli::cmd_analyze(
            plant,
            AnalyzeFlags {
                pip: *pip,
                norm: *norm,
                zeros: *zeros,
                assumptions: *assumptions,
            },
            &cfg,
            out,
        ),
        Command::Strongstab {
            plant,
            gamma_k,
            minimize,
            stability_only,
            structured,
        } => cli::cmd_strongstab(
            plant,
            StrongStabFlags {
                gamma_k: *gamma_k,
                minimize: *minimize,
                stability_only: *stability_only,
                structured: *structured,
                dump_lmis: args.verbose,
            },
            &cfg,
            out,
        ),
        Command::StableHinf {
            plant,
            gamma,
            min_gamma,
            bracket,
            tol,
        } => {
            let bracket = bracket
                .as_deref()
                .map(parse_pair)
                .transpose()
                .map_err(|e| format!("--bracket: {e}"))?;
            cli::cmd_stable_hinf(
                plant,
                StableHinfFlags {
                    gamma: *gamma,
                    min_gamma: *min_gamma,
                    bracket,
                    tol: *tol,
                },
                &cfg,
                out,
            )
        }
        Command::Bench {
            case,
            alpha,
            betas,
            axis_shift,
            cc_placeholder_weights,
        } => {
            if let Some(alpha) = alpha {
                let g = parse_grid(alpha).map_err(|e| format!("--alpha: {e}"))?;
                cfg.alpha_grid_g1 = g;
                cfg.alpha_grid_g2 = g;
            }
            if let Some(betas) = betas {
                cfg.betas = betas
                    .split(',')
                    .map(|b| b.trim().parse().map_err(|e| format!("--betas: {e}")))
                    .collect::<Result<Vec<f64>, String>>()?;
            }
            if let Some(eps) = axis_shift {
                cfg.axis_shift_eps = *eps;
            }
            cli::cmd_bench(
                &BenchFlags {
                    case: case.clone(),
                    cc_placeholder_weights: *cc_placeholder_weights,
                },
                &cfg,
                out,
            )
        }
    };
    code.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(cli::EXIT_ERROR as u8)
        }
    }
}
