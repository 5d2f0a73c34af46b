//! `nearcs` — dual-band near-field channel estimation simulator.
//!
//! `simulate` runs the Monte Carlo sweeps behind the study's figures,
//! `theory` validates the selection-statistic distribution theory, and
//! `rerun` reproduces a previous sweep byte-for-byte from its manifest.

mod presets;

use clap::{Args, Parser, Subcommand};
use nearcs::harness::{self, ExperimentConfig, SweepAxis};
use nearcs::sideinfo::{DMode, DParams};
use nearcs::theory::{self, Regime, SelectionDistParams};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nearcs", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment sweep.
    Simulate {
        #[command(subcommand)]
        figure: SimulateCmd,
    },
    /// Validate the selection-statistic distribution theory.
    Theory {
        #[command(subcommand)]
        check: TheoryCmd,
    },
    /// Re-run a sweep from its manifest; output is byte-identical.
    Rerun {
        /// Path to a run_manifest.cfg written by a previous sweep.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for the reproduced artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// NMSE versus SNR (on- or off-grid).
    NmseVsSnr(SimArgs),
    /// Support recovery accuracy versus SNR.
    SupportAccuracy(SimArgs),
    /// Probability of accurate estimation versus sparsity.
    SparsitySweep(SimArgs),
    /// Probability of accurate estimation versus compression rate M/N.
    CompressionSweep(SimArgs),
    /// NMSE versus the Sub-6GHz amplitude ratio C.
    PerturbationSweep(SimArgs),
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Config file overriding the figure preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// on | off grid channel structure.
    #[arg(long, value_parser = ["on", "off"])]
    grid: Option<String>,
    /// Trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed (highest priority; NEARCS_SEED is the fallback).
    #[arg(long)]
    seed: Option<u64>,
    /// SNR grid in dB, comma separated (snr sweeps only).
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    /// Pilot counts, comma separated (compression sweep) or a single fixed
    /// M override elsewhere.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Amplitude ratios, comma separated (perturbation sweep) or a single
    /// fixed C override elsewhere.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Nonzero block counts, comma separated (sparsity sweep).
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    /// Worker threads (0 = default).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TheoryCmd {
    /// KS distances of all selection-statistic families at one parameter
    /// set.
    ValidateDistributions(TheoryArgs),
    /// Theoretical vs empirical density table of the single-tap statistic
    /// difference.
    PdfT(TheoryArgs),
    /// Theoretical vs empirical density table of the block-statistic Gamma
    /// difference.
    GammaDiff(TheoryArgs),
    /// Grid-search validation of the optimal prior coefficient.
    OptimalPrior(TheoryOptArgs),
}

#[derive(Args, Clone)]
struct TheoryArgs {
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    s: usize,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional CSV output path (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TheoryOptArgs {
    /// theorem1 | theorem2.
    #[arg(long, default_value = "theorem1", value_parser = ["theorem1", "theorem2"])]
    regime: String,
    #[arg(long, default_value_t = 25)]
    m: usize,
    /// Total nonzero taps (defaults per regime: 5 for theorem1, 20 for
    /// theorem2).
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 32)]
    k: usize,
    /// Baseline probability of the pair (p, p+Δp).
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Δp values, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-2])]
    delta_p: Vec<f64>,
}

fn env_seed() -> Option<u64> {
    std::env::var("NEARCS_SEED").ok().and_then(|v| v.parse().ok())
}

fn resolve_sim_config(figure: &SimulateCmd) -> Result<ExperimentConfig, String> {
    let (args, mut cfg) = match figure {
        SimulateCmd::NmseVsSnr(a) => (a, presets::nmse_vs_snr()),
        SimulateCmd::SupportAccuracy(a) => (a, presets::support_accuracy()),
        SimulateCmd::SparsitySweep(a) => (a, presets::sparsity_sweep()),
        SimulateCmd::CompressionSweep(a) => (a, presets::compression_sweep()),
        SimulateCmd::PerturbationSweep(a) => (a, presets::perturbation_sweep()),
    };
    if let Some(path) = &args.config {
        cfg = harness::load_config(path).map_err(|e| e.to_string())?;
    }
    if let Some(grid) = &args.grid {
        cfg.base.grid_mode = if grid == "on" {
            nearcs::channel::GridMode::OnGrid
        } else {
            nearcs::channel::GridMode::OffGrid
        };
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.master_seed = args.seed.or_else(env_seed).unwrap_or(cfg.master_seed);
    if let Some(snr) = &args.snr {
        match &cfg.sweep {
            SweepAxis::Snr(_) => cfg.sweep = SweepAxis::Snr(snr.clone()),
            _ => {
                if snr.len() != 1 {
                    return Err("--snr must be a single value for non-SNR sweeps".into());
                }
                cfg.base.snr_db = snr[0];
            }
        }
    }
    if let Some(m) = &args.m {
        match &cfg.sweep {
            SweepAxis::CompressionM(_) => cfg.sweep = SweepAxis::CompressionM(m.clone()),
            _ => {
                if m.len() != 1 {
                    return Err("--m must be a single value for non-compression sweeps".into());
                }
                cfg.base.m = m[0];
            }
        }
    }
    if let Some(c) = &args.c {
        match &cfg.sweep {
            SweepAxis::AmplitudeRatioC(_) => {
                cfg.sweep = SweepAxis::AmplitudeRatioC(c.clone())
            }
            _ => {
                if c.len() != 1 {
                    return Err("--c must be a single value for non-perturbation sweeps".into());
                }
                cfg.base.c_ratio = c[0];
            }
        }
    }
    if let Some(blocks) = &args.blocks {
        match &cfg.sweep {
            SweepAxis::SparsityBlocks(_) => {
                cfg.sweep = SweepAxis::SparsityBlocks(blocks.clone())
            }
            _ => return Err("--blocks applies to the sparsity sweep only".into()),
        }
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn cmd_simulate(figure: SimulateCmd) -> Result<(), String> {
    let cfg = resolve_sim_config(&figure)?;
    let result = harness::run_sweep(&cfg).map_err(|e| e.to_string())?;
    println!(
        "{:<18} {:>10} {:<10} {:>7} {:>5} {:>12} {:>9} {:>9} {:>9} {:>8}",
        "sweep_axis", "value", "estimator", "trials", "fail", "nmse_mean", "nmse_db",
        "supp_acc", "prob_acc", "wall_s"
    );
    for r in &result.records {
        println!(
            "{:<18} {:>10} {:<10} {:>7} {:>5} {:>12.4e} {:>9.3} {:>9.4} {:>9.4} {:>8.2}",
            r.sweep_axis,
            r.sweep_value,
            r.estimator.name(),
            r.trials,
            r.failures,
            r.nmse_mean,
            r.nmse_db,
            r.support_accuracy,
            r.prob_accurate,
            r.wallclock_s,
        );
    }
    if let Some(p) = &result.csv_path {
        println!("wrote {}", p.display());
    }
    if let Some(p) = &result.manifest_path {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
                }
            }
            std::fs::write(p, content).map_err(|e| e.to_string())?;
            println!("wrote {}", p.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn density_table(
    args: &TheoryArgs,
    block: bool,
) -> Result<String, String> {
    let params = SelectionDistParams {
        m: args.m,
        g: args.g,
        sigma2: args.sigma2,
        s_taps: args.s,
        d: args.d,
        k: args.k,
    };
    let seed = args.seed.or_else(env_seed).unwrap_or(1);
    let mut rng = nearcs::RngStream::new(seed, 0).rng();
    let n = args.samples;
    let (lo, hi, cdf, mut samples): (f64, f64, theory::NumericCdf, Vec<f64>) = if block {
        let g1 = params.block_nonzero_gamma();
        let g2 = params.block_zero_gamma();
        let (lo, hi) = theory::gamma_diff_window(&g1, &g2, 45.0);
        let cdf = theory::NumericCdf::build(|t| theory::gamma_diff_pdf(t, &g1, &g2), lo, hi, 8192)
            .map_err(|e| e.to_string())?;
        let samples: Vec<f64> =
            (0..n).map(|_| theory::sample_gamma_diff(&g1, &g2, &mut rng)).collect();
        (lo, hi, cdf, samples)
    } else {
        let (lo, hi) = theory::t_single_window(&params, 45.0);
        let cdf = theory::NumericCdf::build(|t| Ok(theory::pdf_t_single(t, &params)), lo, hi, 8192)
            .map_err(|e| e.to_string())?;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                theory::sample_single_tap_statistic(true, &params, &mut rng)
                    - theory::sample_single_tap_statistic(false, &params, &mut rng)
            })
            .collect();
        (lo, hi, cdf, samples)
    };
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ks = theory::ks_distance_sorted(&samples, |x| cdf.eval(x), (n / 4096).max(1));

    // Histogram-based empirical density on a fixed grid.
    let bins = 160usize;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in &samples {
        if s >= lo && s < hi {
            counts[((s - lo) / width) as usize] += 1;
        }
    }
    let mut out = String::from("t,pdf_theoretical,pdf_empirical\n");
    for (i, &c) in counts.iter().enumerate() {
        let t = lo + (i as f64 + 0.5) * width;
        let pdf_th = if block {
            theory::gamma_diff_pdf(
                t,
                &params.block_nonzero_gamma(),
                &params.block_zero_gamma(),
            )
            .map_err(|e| e.to_string())?
        } else {
            theory::pdf_t_single(t, &params)
        };
        let pdf_emp = c as f64 / (n as f64 * width);
        out.push_str(&format!("{t},{pdf_th:e},{pdf_emp:e}\n"));
    }
    out.push_str(&format!("# ks = {ks}\n"));
    Ok(out)
}

fn cmd_theory(check: TheoryCmd) -> Result<(), String> {
    match check {
        TheoryCmd::ValidateDistributions(args) => {
            let params = SelectionDistParams {
                m: args.m,
                g: args.g,
                sigma2: args.sigma2,
                s_taps: args.s,
                d: args.d,
                k: args.k,
            };
            let seed = args.seed.or_else(env_seed).unwrap_or(1);
            let report = theory::validate_distributions(&params, args.samples, seed)
                .map_err(|e| e.to_string())?;
            let mut out = String::from("family,ks,samples\n");
            for e in &report.ks {
                out.push_str(&format!("{},{},{}\n", e.family, e.ks, e.samples));
            }
            out.push_str(&format!("# pdf_t_mass = {}\n", report.pdf_t_mass));
            out.push_str(&format!("# gamma_diff_mass = {}\n", report.gamma_diff_mass));
            out.push_str(&format!("# patnaik_sup_gap = {}\n", report.patnaik_sup_gap));
            out.push_str(&format!(
                "# patnaik_mean_residual = {}\n# patnaik_var_residual = {}\n",
                report.patnaik_mean_residual, report.patnaik_var_residual
            ));
            write_or_print(&args.out, &out)
        }
        TheoryCmd::PdfT(args) => {
            let table = density_table(&args, false)?;
            write_or_print(&args.out, &table)
        }
        TheoryCmd::GammaDiff(args) => {
            let table = density_table(&args, true)?;
            write_or_print(&args.out, &table)
        }
        TheoryCmd::OptimalPrior(args) => {
            let (regime, default_s) = match args.regime.as_str() {
                "theorem1" => (Regime::Theorem1, 5),
                _ => (Regime::Theorem2, 20),
            };
            let dparams = DParams {
                m: args.m,
                s_taps: args.s.unwrap_or(default_s),
                d: if regime == Regime::Theorem1 { 1 } else { args.d },
                k_eff: if regime == Regime::Theorem1 { 1 } else { args.k },
                g: args.g,
                sigma2: args.sigma2,
                mode: DMode::Exact,
            };
            let report = theory::validate_optimal_prior(regime, &dparams, args.p, &args.delta_p)
                .map_err(|e| e.to_string())?;
            println!("regime = {:?}, p = {}, D = {}", report.regime, report.p,
                report.entries.first().map_or(0.0, |e| e.d_coeff));
            println!(
                "{:>10} {:>14} {:>14} {:>14} {:>14} {:>12}",
                "delta_p", "dv_theory", "pe_theory", "dv_grid", "pe_grid", "rel_gap"
            );
            for e in &report.entries {
                println!(
                    "{:>10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.3e}",
                    e.delta_p, e.dv_theory, e.pe_theory, e.dv_grid, e.pe_grid, e.rel_gap
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { figure } => cmd_simulate(figure),
        Command::Theory { check } => cmd_theory(check),
        Command::Rerun { manifest, out } => harness::run_from_manifest(&manifest, out)
            .map(|r| {
                if let Some(p) = &r.csv_path {
                    println!("wrote {}", p.display());
                }
            })
            .map_err(|e| e.to_string()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
