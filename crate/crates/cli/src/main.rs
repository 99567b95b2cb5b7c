use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fessi_core::analysis::locality_check;
use fessi_core::scenario::{self, Scenario, PRESETS};
use fessi_core::Error;

const DEFAULT_WAVELENGTH_UM: f64 = 10.33;

#[derive(Parser)]
#[command(name = "fessi", version, about = "Free-electron spectral shearing interferometry simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a wavepacket and write its spectral and temporal form
    Synth(Common),
    /// Simulate the measurement and reconstruct the spectral phase
    Run {
        #[command(flatten)]
        common: Common,
        /// exit with status 3 when a constraint is violated or a warning is raised
        #[arg(long)]
        strict: bool,
    },
    /// Repeat `run` over the scenario's [sweep] axis
    Sweep(Common),
    /// Evaluate the pulse-duration diagram of a [diagram] section
    Diagram(Common),
    /// List built-in presets
    Presets,
}

#[derive(Args)]
struct Common {
    /// scenario file (TOML)
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// built-in scenario name
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Strict(Vec<String>),
    Reconstruction(String),
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::AcPeakNotFound { .. } | Error::Reconstruction(_) | Error::GridMismatch(_) => {
                Failure::Reconstruction(e.to_string())
            }
            Error::Io(_) => Failure::Other(e.into()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn load(common: &Common) -> Result<(Scenario, PathBuf), Failure> {
    let mut s = match (&common.config, &common.preset) {
        (Some(path), None) => Scenario::from_file(path)?,
        (None, Some(name)) => Scenario::preset(name)?,
        _ => return Err(Failure::Config("give exactly one of --config or --preset".into())),
    };
    if let Some(seed) = common.seed {
        s = s.with_seed(seed);
    }
    let out = common
        .out
        .clone()
        .or_else(|| s.out.clone())
        .unwrap_or_else(|| Path::new("out").join(&s.name));
    Ok((s, out))
}

fn print_timings(timings: &[(&str, f64)]) {
    for (stage, secs) in timings {
        println!("time {stage:<12} {secs:.3} s");
    }
}

fn synth(common: &Common) -> Result<(), Failure> {
    let (s, out) = load(common)?;
    let t0 = Instant::now();
    let result = scenario::synthesize(&s)?;
    scenario::write_synth_outputs(&out, &result)?;
    let m = &result.moments;
    println!("rms duration   {:.4} fs", m.rms);
    println!("fwhm duration  {:.4} fs", m.fwhm);
    if m.multimodal {
        println!("note: temporal profile is multimodal");
    }
    if let Some(pulse) = &s.pulse {
        let wavelength = s.raw.lem.as_ref().map_or(DEFAULT_WAVELENGTH_UM, |l| l.wavelength_um);
        let period = wavelength * 1000.0 / fessi_core::constants::C_NM_PER_FS;
        let model = fessi_core::analysis::DurationModel::from_spectral_width(
            pulse.sigma_e,
            pulse.phase.taylor(2),
            pulse.phase.taylor(3),
            period,
        )?;
        let report = locality_check(&model);
        println!("locality       sigma_t {:.3} fs vs T/4 {:.3} fs: {}", report.sigma_t, report.limit, pass(report.pass));
    }
    println!("wrote {}", out.display());
    print_timings(&[("total", t0.elapsed().as_secs_f64())]);
    Ok(())
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn run(common: &Common, strict: bool) -> Result<(), Failure> {
    let (s, out) = load(common)?;
    let result = scenario::run_scenario(&s)?;
    scenario::write_run_outputs(&out, &s, &result)?;
    let c = &result.constraints;
    println!("scenario       {} (seed {})", s.name, s.seed);
    match result.fidelity() {
        Some(f) => println!("fidelity       {f:.6}"),
        None => println!("fidelity       degenerate (phase is linear over the support)"),
    }
    println!("rms error      {:.4e} rad", result.comparison.fidelity.rms_error());
    println!("temporal dev   {:.4e}", result.comparison.temporal_max_deviation);
    println!(
        "duration       {:.4} fs fwhm original, {:.4} fs reconstructed",
        result.original_moments.fwhm, result.reconstructed_moments.fwhm
    );
    println!("tau window     [{:.4}, {:.4}] fs: {}", c.tau_min, c.tau_max, pass(c.tau_ok));
    println!("shear ratio    {:.4}: {}", c.shear_ratio, pass(c.shear_ok));
    println!("resolution     {}", pass(c.resolution_ok));
    for w in &result.warnings {
        println!("warning: {w}");
    }
    println!("wrote {}", out.display());
    print_timings(&result.timings);
    if strict && (!c.all_passed() || !result.warnings.is_empty()) {
        return Err(Failure::Strict(result.warnings.clone()));
    }
    Ok(())
}

fn sweep(common: &Common) -> Result<(), Failure> {
    let (s, out) = load(common)?;
    let spec = s
        .sweep
        .clone()
        .ok_or_else(|| Failure::Config(format!("scenario '{}' has no [sweep] section", s.name)))?;
    let t0 = Instant::now();
    let points = scenario::sweep(&s, &spec)?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("sweep.txt");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    scenario::write_sweep_table(&mut w, &spec, &points)?;
    let medians = scenario::median_fidelity(&points, &spec.values);
    for (v, m) in spec.values.iter().zip(medians) {
        let failed = points.iter().filter(|p| p.value == *v && p.error.is_some()).count();
        println!("{} = {v:<10} median fidelity {m:.6}  failed {failed}/{}", spec.parameter.name(), spec.replicates);
    }
    println!("wrote {}", path.display());
    print_timings(&[("total", t0.elapsed().as_secs_f64())]);
    Ok(())
}

fn diagram(common: &Common) -> Result<(), Failure> {
    let (s, out) = load(common)?;
    let spec = s
        .diagram
        .as_ref()
        .ok_or_else(|| Failure::Config(format!("scenario '{}' has no [diagram] section", s.name)))?;
    let t0 = Instant::now();
    let d = spec.evaluate()?;
    scenario::write_diagram_outputs(&out, &d)?;
    println!("level T/4      {:.4} fs", d.level);
    println!("contours       {}", d.contours.len());
    println!("wrote {}", out.display());
    print_timings(&[("total", t0.elapsed().as_secs_f64())]);
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("FESSI_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::Config(format!("FESSI_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::Synth(c) => synth(c),
        Command::Run { common, strict } => run(common, *strict),
        Command::Sweep(c) => sweep(c),
        Command::Diagram(c) => diagram(c),
        Command::Presets => {
            for p in PRESETS {
                println!("{:<18} {}", p.name, p.description);
            }
            Ok(())
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Strict(warnings)) => {
            eprintln!("error: strict mode: {} constraint violation(s) or warning(s)", warnings.len().max(1));
            ExitCode::from(3)
        }
        Err(Failure::Reconstruction(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
