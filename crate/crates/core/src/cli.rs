//! Command-line entry point: config loading, dispatch and dataset writing.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{apply_overrides, load_params_file, load_preset, Defaults, GridSpec};
use crate::dataset::{write_dataset, Dataset, Provenance};
use crate::error::{Error, Result};
use crate::experiments::{DetuningProtocol, SweepOptions};
use crate::figures::{self, Output, RunContext};
use crate::model::SiInputs;
use crate::observables::{Backend, Cutoff};
use crate::validate::validate;

pub const OUT_DIR_ENV: &str = "KERRPAIR_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "kerrpair", version, about = "Driven, lossy Kerr/linear resonator pair simulations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Units {
    Normalized,
    Si,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    Analytic,
    Lindblad,
    Both,
}

impl BackendChoice {
    fn list(self) -> Vec<Backend> {
        match self {
            BackendChoice::Analytic => vec![Backend::Analytic],
            BackendChoice::Lindblad => vec![Backend::Lindblad],
            BackendChoice::Both => vec![Backend::Analytic, Backend::Lindblad],
        }
    }

    fn single(self) -> Backend {
        match self {
            BackendChoice::Lindblad => Backend::Lindblad,
            _ => Backend::Analytic,
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Shipped parameter preset.
    #[arg(long, global = true, default_value = "paper_fig2")]
    preset: String,
    /// Parameter file (TOML, or JSON by extension); replaces the preset.
    #[arg(long, global = true, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Parameter override, applied after loading. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    out_dir: PathBuf,
    /// Per-mode Fock cutoff of the Lindblad backend.
    #[arg(long, global = true, default_value_t = 5)]
    cutoff: usize,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendChoice>,
    /// `track_upper_branch` or `fixed:<delta>`.
    #[arg(long, global = true)]
    protocol: Option<String>,
    /// γ_tip grid, `lo:hi:points` or a comma list.
    #[arg(long, global = true, value_name = "GRID")]
    gamma_tip: Option<GridSpec>,
    /// Detuning grid for spectra.
    #[arg(long, global = true, value_name = "GRID")]
    delta: Option<GridSpec>,

    #[arg(long, global = true, value_enum, default_value = "normalized")]
    units: Units,
    /// Wavelength in m (SI units).
    #[arg(long, global = true)]
    wavelength: Option<f64>,
    #[arg(long, global = true)]
    q_factor: Option<f64>,
    /// Effective mode volume in m³.
    #[arg(long, global = true)]
    v_eff: Option<f64>,
    /// χ⁽³⁾/ε_r² in m²/V².
    #[arg(long, global = true)]
    chi3: Option<f64>,
    /// Input power in W.
    #[arg(long, global = true)]
    p_in: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// N₁, g⁽²⁾, g⁽³⁾ along γ_tip.
    SweepLoss {
        #[arg(long, value_enum, default_value = "fig2ab")]
        dataset: SweepDataset,
    },
    /// S₁(Δ) at a few γ_tip values.
    Spectrum {
        #[arg(long, value_name = "LIST")]
        gamma_tips: Option<GridSpec>,
    },
    /// S₁ over the (γ_tip, Δ) plane with detected peaks.
    SpectrumMap,
    /// Non-Hermitian eigenvalues and eigenvector weights along γ_tip.
    Eigen,
    /// Liouvillian exceptional point scan.
    Lep {
        #[arg(long, default_value_t = 81)]
        points: usize,
        #[arg(long, value_name = "LO:HI")]
        range: Option<String>,
    },
    /// LEP versus the closed-form HEP over J.
    EpAgreement {
        #[arg(long, value_name = "LIST")]
        j_grid: Option<GridSpec>,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Sweep plus located critical points.
    CriticalPoints,
    /// Photon-number distributions against Poisson.
    Distribution {
        #[arg(long, value_name = "LIST")]
        gamma_tips: Option<GridSpec>,
    },
    /// Analytic-versus-numeric cross-check suite.
    Validate {
        #[arg(long, value_name = "LIST")]
        gamma_tips: Option<GridSpec>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepDataset {
    Fig2ab,
    Fig3a,
}

fn context(c: &Common) -> Result<RunContext> {
    let (mut params, defaults, preset): (_, Defaults, _) = match &c.params {
        Some(path) => {
            let (p, d) = load_params_file(path)?;
            (p, d, None)
        }
        None => {
            let p = load_preset(&c.preset)?;
            (p.params, p.defaults, Some(p.name))
        }
    };
    let mut si_gamma1_prime = None;
    if c.units == Units::Si {
        let (Some(wavelength), Some(q_factor), Some(v_eff), Some(chi3), Some(p_in)) =
            (c.wavelength, c.q_factor, c.v_eff, c.chi3, c.p_in)
        else {
            return Err(Error::Config(
                "--units si requires --wavelength, --q-factor, --v-eff, --chi3 and --p-in".into(),
            ));
        };
        let si = SiInputs {
            wavelength,
            q_factor,
            v_eff,
            chi3_over_eps_r2: chi3,
            p_in,
            ..SiInputs::reference_device()
        };
        let raw = si.to_params().map_err(|e| Error::Config(e.to_string()))?;
        si_gamma1_prime = Some(raw.gamma1_prime());
        let mut n = raw.normalized()?;
        n.gamma_tip = params.gamma_tip;
        n.delta = params.delta;
        params = n;
    } else if [c.wavelength, c.q_factor, c.v_eff, c.chi3, c.p_in].iter().any(Option::is_some) {
        return Err(Error::Config("device inputs need --units si".into()));
    }
    apply_overrides(&mut params, &c.overrides)?;
    if c.cutoff == 0 || (c.cutoff + 1) * (c.cutoff + 1) > crate::liouvillian::MAX_DIM {
        return Err(Error::Config(format!(
            "cutoff {} out of range (1..={})",
            c.cutoff,
            (crate::liouvillian::MAX_DIM as f64).sqrt() as usize - 1
        )));
    }
    Ok(RunContext {
        preset,
        params,
        defaults,
        overrides: c.overrides.clone(),
        cutoff: Cutoff(c.cutoff, c.cutoff),
        si_gamma1_prime,
    })
}

fn protocol(c: &Common, ctx: &RunContext) -> Result<DetuningProtocol> {
    match &c.protocol {
        Some(s) => s.parse().map_err(|e: Error| Error::Config(e.to_string())),
        None => ctx.defaults.protocol().map_err(|e| Error::Config(e.to_string())),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("bad range '{s}' (use lo:hi)"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn emit(out_dir: &std::path::Path, o: &Output) -> Result<()> {
    let path = write_dataset(out_dir, &o.dataset, &o.provenance)?;
    println!("{} -> {}", o.summary, path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    let ctx = context(c)?;
    let gamma_grid = c.gamma_tip.clone().unwrap_or_else(|| ctx.defaults.gamma_tip.clone()).values();
    let delta_grid = c.delta.clone().unwrap_or_else(|| ctx.defaults.delta.clone()).values();
    let backend = c.backend.unwrap_or(BackendChoice::Analytic);
    let sweep = |proto| SweepOptions {
        protocol: proto,
        backends: backend.list(),
        cutoff: ctx.cutoff,
    };
    let lep_range = (ctx.defaults.lep_range[0], ctx.defaults.lep_range[1]);

    match &cli.command {
        Command::SweepLoss { dataset } => {
            let opts = sweep(protocol(c, &ctx)?);
            let o = match dataset {
                SweepDataset::Fig2ab => figures::fig2ab(&ctx, &gamma_grid, &opts)?,
                SweepDataset::Fig3a => figures::fig3a(&ctx, &gamma_grid, &opts)?,
            };
            emit(&c.out_dir, &o)?;
        }
        Command::Spectrum { gamma_tips } => {
            let tips = gamma_tips.as_ref().map(GridSpec::values).unwrap_or_else(|| ctx.defaults.spectrum_gamma_tips.clone());
            emit(&c.out_dir, &figures::fig2c(&ctx, &tips, &delta_grid, backend.single())?)?;
        }
        Command::SpectrumMap => {
            emit(&c.out_dir, &figures::figs3(&ctx, &gamma_grid, &delta_grid, backend.single())?)?;
        }
        Command::Eigen => {
            emit(&c.out_dir, &figures::figs4(&ctx, &gamma_grid)?)?;
        }
        Command::Lep { points, range } => {
            let r = match range {
                Some(s) => parse_range(s)?,
                None => lep_range,
            };
            emit(&c.out_dir, &figures::lep_scan(&ctx, r, *points)?)?;
        }
        Command::EpAgreement { j_grid, points } => {
            let js = j_grid.as_ref().map(GridSpec::values).unwrap_or_else(|| ctx.defaults.j_grid.clone());
            emit(&c.out_dir, &figures::fig1b(&ctx, &js, *points)?)?;
        }
        Command::CriticalPoints => {
            let opts = sweep(protocol(c, &ctx)?);
            emit(&c.out_dir, &figures::fig1c(&ctx, &gamma_grid, &opts, lep_range)?)?;
        }
        Command::Distribution { gamma_tips } => {
            let tips = gamma_tips
                .as_ref()
                .map(GridSpec::values)
                .unwrap_or_else(|| ctx.defaults.distribution_gamma_tips.clone());
            let b = c.backend.map(BackendChoice::single).unwrap_or(Backend::Lindblad);
            emit(&c.out_dir, &figures::fig3b(&ctx, &tips, protocol(c, &ctx)?, b)?)?;
        }
        Command::Validate { gamma_tips } => {
            let tips = gamma_tips
                .as_ref()
                .map(GridSpec::values)
                .unwrap_or_else(|| vec![0.0, 1.8, 5.3, 6.0, 8.9, 12.0]);
            let report = validate(&ctx.params, &tips, ctx.cutoff);
            let mut d = Dataset::new("validate", &["check", "passed", "value", "threshold", "detail"]);
            d.meta("dataset", "validate");
            d.params_meta(&ctx.params);
            for k in &report.checks {
                d.push(vec![
                    k.name.clone().into(),
                    (if k.passed { "true" } else { "false" }).into(),
                    k.value.into(),
                    k.threshold.into(),
                    k.detail.clone().into(),
                ]);
                if !k.passed {
                    eprintln!("check failed: {} value={} threshold={} ({})", k.name, k.value, k.threshold, k.detail);
                }
            }
            let prov = Provenance::new("validate", ctx.preset.as_deref(), &ctx.params, &ctx.overrides)
                .with_details(serde_json::to_value(&report)?);
            let path = write_dataset(&c.out_dir, &d, &prov)?;
            let failed = report.checks.iter().filter(|k| !k.passed).count();
            println!(
                "validate: {}/{} checks passed, max analytic-vs-lindblad deviation {:.3}% -> {}",
                report.checks.len() - failed,
                report.checks.len(),
                100.0 * report.max_backend_deviation,
                path.display()
            );
            return Ok(report.passed());
        }
    }
    Ok(true)
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => 2,
                _ => 1,
            }
        }
    }
}
