use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qac_core::analysis::tables::{enumerate_code_states, render_table};
use qac_core::analysis::thermo::{log_grid, ThermoCurves};
use qac_core::analysis::{decodability_crossing, two_qubit_spectrum};
use qac_core::experiment::{
    emit_figure_data, read_bundle, run_experiment, write_analysis, ExperimentConfig, FIGURES, THERMO_BETA,
    THERMO_POINTS,
};
use qac_core::{CodeKind, QacError, Result};

#[derive(Parser)]
#[command(name = "qac-bench", version, about = "Quantum annealing correction benchmarks on Chimera graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment configuration and write its outputs.
    Run(RunArgs),
    /// Run the configuration and print the optimal penalty per cell.
    Sweep(RunArgs),
    /// Re-emit figure CSVs from a finished run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
        /// Single figure id; all supported figures when omitted.
        #[arg(long)]
        figure: Option<String>,
    },
    /// Thermal error model curves with per-point penalty optimization.
    Thermo {
        #[arg(long, default_value_t = THERMO_BETA)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-qubit Square414 spectrum and its decodability crossing.
    Spectrum {
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 0.3)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single encoded qubit state tables for both codes.
    Tables {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides (or supplies) the configuration's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)?;
    let Some(seed) = args.seed else {
        return ExperimentConfig::from_json(&text);
    };
    let mut doc: serde_json::Value = serde_json::from_str(&text)?;
    match doc.as_object_mut() {
        Some(obj) => {
            obj.insert("seed".into(), seed.into());
        }
        None => return Err(QacError::Validation { path: ".".into(), message: "config must be an object".into() }),
    }
    ExperimentConfig::from_json(&doc.to_string())
}

fn run(args: &RunArgs, print_sweep: bool) -> Result<()> {
    let cfg = load_config(args)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let bundle = run_experiment(&cfg, Some(&out))?;
    if print_sweep {
        println!("chain_length,alpha,strategy,gamma_opt");
        for s in &bundle.surfaces {
            println!("{},{},{},{}", s.chain_length, s.alpha, s.strategy, s.gamma_opt);
        }
    } else {
        println!("chain_length,alpha,gamma,strategy,mean,sem");
        for r in &bundle.records {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            println!("{},{},{},{},{},{}", r.chain_length, r.alpha, opt(r.gamma), r.strategy, r.mean, opt(r.sem));
        }
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn report(out: &Path, figure: Option<&str>) -> Result<()> {
    let bundle = read_bundle(out)?;
    let ids: Vec<&str> = match figure {
        Some(f) => vec![f],
        None => FIGURES.to_vec(),
    };
    for id in ids {
        match emit_figure_data(&bundle, id, out) {
            Ok(paths) => paths.iter().for_each(|p| println!("{}", p.display())),
            Err(QacError::Reporting(msg)) if figure.is_none() => eprintln!("skipped: {msg}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn thermo(beta: f64, out: Option<&Path>) -> Result<()> {
    let (lo, hi, n) = THERMO_POINTS;
    let c = ThermoCurves::compute(beta, &log_grid(lo, hi, n))?;
    println!("beta_h,p_err_313,p_err_414,p_err_313_scaled,gamma_opt_313,gamma_opt_414");
    for k in 0..n {
        println!(
            "{},{},{},{},{},{}",
            c.beta_h[k], c.equal_p313[k], c.equal_p414[k], c.scaled_p313[k], c.gamma_opt_313[k], c.gamma_opt_414[k]
        );
    }
    if let Some(dir) = out {
        if beta != THERMO_BETA {
            return Err(QacError::Input(format!("figure files use beta {THERMO_BETA}")));
        }
        for id in ["fig12a", "fig12b"] {
            eprintln!("wrote {}", write_analysis(id, dir)?.display());
        }
    }
    Ok(())
}

fn spectrum(alpha: f64, gamma: f64, out: Option<&Path>) -> Result<()> {
    println!("coupled,uncoupled,multiplicity,gap_formula,gap,decodable");
    for l in two_qubit_spectrum(alpha, gamma)? {
        println!(
            "{},{},{},{},{},{}",
            l.coupled_flips,
            l.uncoupled_flips,
            l.multiplicity,
            l.formula(),
            l.gap,
            l.decodable
        );
    }
    println!("gamma_cross,{}", decodability_crossing(alpha)?);
    if let Some(dir) = out {
        for id in ["fig13", "fig14a"] {
            eprintln!("wrote {}", write_analysis(id, dir)?.display());
        }
    }
    Ok(())
}

fn tables(out: Option<&Path>) -> Result<()> {
    for code in [CodeKind::Pudenz313, CodeKind::Square414] {
        print!("{}", render_table(code, &enumerate_code_states(code)));
    }
    if let Some(dir) = out {
        eprintln!("wrote {}", write_analysis("tables", dir)?.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a, false),
        Command::Sweep(a) => run(a, true),
        Command::Report { out, figure } => report(out, figure.as_deref()),
        Command::Thermo { beta, out } => thermo(*beta, out.as_deref()),
        Command::Spectrum { alpha, gamma, out } => spectrum(*alpha, *gamma, out.as_deref()),
        Command::Tables { out } => tables(out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
