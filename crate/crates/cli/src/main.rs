use clap::{Parser, ValueEnum};
use mechstate_cli::config::{parse_raw, read_raw, resolve, RawConfig};
use mechstate_cli::{run_pipeline, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Outcome {
    MostProbable,
    Sample,
    Explicit,
}

/// Conditional Wigner function of a measured oscillator after a single photon.
#[derive(Debug, Parser)]
#[command(name = "mechstate", version)]
struct Args {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// large_scale, small_scale or custom; overrides the file.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    grid_n: Option<usize>,
    /// Seed of the outcome sampler.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    outcome: Option<Outcome>,
    /// Explicit outcome `RE,IM`; implies `--outcome explicit`.
    #[arg(long, value_parser = parse_z, allow_hyphen_values = true)]
    z: Option<(f64, f64)>,
}

fn parse_z(s: &str) -> Result<(f64, f64), String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("RE: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("IM: {e}"))?;
    Ok((re, im))
}

fn merged(args: Args) -> Result<RawConfig, RunError> {
    let mut raw = match &args.config {
        Some(path) => read_raw(path)?,
        None if args.scenario.is_some() => parse_raw("{}")?,
        None => {
            return Err(RunError::Config(
                "give --config PATH or --scenario NAME".into(),
            ))
        }
    };
    if let Some(s) = args.scenario {
        raw.scenario = Some(s);
    }
    if let Some(d) = args.out_dir {
        raw.out_dir = Some(d);
    }
    if let Some(n) = args.grid_n {
        raw.grid_n = Some(n);
    }
    if let Some(seed) = args.seed {
        raw.seed = Some(seed);
    }
    if let Some((re, im)) = args.z {
        raw.z_re = Some(re);
        raw.z_im = Some(im);
        raw.outcome = Some("explicit".into());
    }
    if let Some(o) = args.outcome {
        raw.outcome = Some(
            match o {
                Outcome::MostProbable => "most_probable",
                Outcome::Sample => "sample",
                Outcome::Explicit => "explicit",
            }
            .into(),
        );
    }
    Ok(raw)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = merged(args).and_then(resolve).and_then(|cfg| {
        let report = run_pipeline(&cfg)?;
        Ok((cfg, report))
    });
    match result {
        Ok((cfg, report)) => {
            for w in &report.summary.warnings {
                eprintln!("mechstate: warning: {w}");
            }
            let w = report.summary.wigner.as_ref().expect("complete run");
            println!(
                "wrote {} (min W {:e}, negative volume {:e}, {:.2} s)",
                cfg.out_dir.display(),
                w.min_w,
                w.negative_volume,
                report.runtime_seconds
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mechstate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
