use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use spdc_core::config::{load_config, DeviceConfig};
use spdc_core::metrics::{schmidt_decompose, SourceReport};
use spdc_core::pipeline::{
    self, analyze, compute_jsa, compute_spectrum, fitted_cavity, jsa_axis, Device, FitReport, Spectrum, SweepOutput,
    SweepSpec, JSA_FILE, REPORT_JSON_FILE, RESONANCES_FILE, SPECTRUM_FILE,
};
use spdc_core::spdc::{JsaGrid, Provenance};
use spdc_core::Error;

#[derive(Parser)]
#[command(name = "cavspdc", version, about = "Cavity-enhanced SPDC source model")]
struct Cli {
    /// device configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSA points per axis, overriding the configuration
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// use the intracavity amplitude j/κ
    #[arg(long, global = true)]
    internal: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Circuit transmission spectrum to spectrum.csv
    Spectrum,
    /// Fit resonances in a spectrum CSV to resonances.json
    Fit {
        /// spectrum CSV; defaults to the one in --out
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Joint spectral amplitude to jsa.bin and jsa.csv
    Jsa {
        #[arg(long)]
        resonances: Option<PathBuf>,
    },
    /// Island metrics from a saved grid to report.json and report.txt
    Metrics {
        #[arg(long)]
        jsa: Option<PathBuf>,
        #[arg(long)]
        resonances: Option<PathBuf>,
    },
    /// Schmidt decomposition of a whole saved grid
    Schmidt {
        #[arg(long)]
        jsa: Option<PathBuf>,
    },
    /// Parameter sweep to a CSV table
    Sweep {
        /// dot-separated config key, or pump.detuning_fsr
        #[arg(long)]
        param: String,
        /// comma-separated values
        #[arg(long, value_delimiter = ',', conflicts_with = "range")]
        values: Option<Vec<f64>>,
        /// lo:hi:n, evenly spaced
        #[arg(long)]
        range: Option<String>,
        /// space the range logarithmically
        #[arg(long)]
        log: bool,
        #[arg(long, value_delimiter = ',', default_value = "q,fraction_outcoupled,pgr_relative")]
        outputs: Vec<String>,
    },
    /// Every stage in order
    Run,
    /// Print a saved report
    Report {
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Validation { .. } | Error::Parse(_) => 2,
        Error::Io(_) | Error::Container(_) => 4,
        _ => 3,
    }
}

fn config(cli: &Cli) -> Result<DeviceConfig, Error> {
    let path = cli.config.as_deref().ok_or_else(|| Error::Validation {
        key: "--config".into(),
        message: "this subcommand needs a device configuration".into(),
    })?;
    load_config(path)
}

fn read_resonances(path: &Path) -> Result<spdc_core::resonances::ResonanceSet, Error> {
    FitReport::from_json(&fs::read_to_string(path)?)?.to_set()
}

fn parse_range(s: &str, log: bool) -> Result<Vec<f64>, Error> {
    let bad = || Error::Validation { key: "--range".into(), message: format!("expected lo:hi:n, got `{s}`") };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n < 2 {
        return Ok(vec![lo; n]);
    }
    if log && !(lo > 0.0 && hi > 0.0) {
        return Err(Error::Validation { key: "--range".into(), message: "log spacing needs positive ends".into() });
    }
    Ok((0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            if log {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect())
}

fn emit(cli: &Cli, json: Value, text: String) {
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap_or_default()),
        Format::Text => print!("{text}"),
    }
}

fn report_value(r: &SourceReport) -> Value {
    serde_json::to_value(r).unwrap_or(Value::Null)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let out = &cli.out;
    match &cli.command {
        Command::Spectrum => {
            let dev = Device::build(&config(cli)?)?;
            fs::create_dir_all(out)?;
            let s = compute_spectrum(&dev)?;
            let p = pipeline::write_spectrum(out, &s)?;
            emit(
                cli,
                json!({"spectrum": p, "points": s.omega.len()}),
                format!("wrote {} ({} points)\n", p.display(), s.omega.len()),
            );
        }
        Command::Fit { spectrum } => {
            let dev = Device::build(&config(cli)?)?;
            let path = spectrum.clone().unwrap_or_else(|| out.join(SPECTRUM_FILE));
            let s = Spectrum::read_csv(&fs::read_to_string(&path)?)?;
            let set = pipeline::fit(&dev, &s)?;
            fs::create_dir_all(out)?;
            let p = pipeline::write_resonances(out, &set)?;
            let fsr = spdc_core::units::omega_to_ghz(set.fsr_mean());
            let fwhm = spdc_core::units::omega_to_ghz(set.mean_fwhm());
            emit(
                cli,
                json!({"resonances": set.len(), "fsr_mean_GHz": fsr, "mean_fwhm_GHz": fwhm, "mean_Q": set.mean_q()}),
                format!(
                    "wrote {}: {} resonances, mean FSR {fsr:.4} GHz, mean FWHM {fwhm:.4} GHz, mean Q {:.4e}\n",
                    p.display(),
                    set.len(),
                    set.mean_q()
                ),
            );
        }
        Command::Jsa { resonances } => {
            let cfg = config(cli)?;
            let dev = Device::build(&cfg)?;
            let set = read_resonances(&resonances.clone().unwrap_or_else(|| out.join(RESONANCES_FILE)))?;
            let cavity = fitted_cavity(&dev, &set)?;
            let grid = compute_jsa(&dev, &cavity, jsa_axis(&dev, &set, cli.grid_points)?, cli.internal)?;
            fs::create_dir_all(out)?;
            let (bin, csv) = pipeline::write_jsa(out, &grid, cfg.jsa.csv_stride)?;
            emit(
                cli,
                json!({"jsa": bin, "csv": csv, "points": grid.signal.len}),
                format!("wrote {} and {} ({}x{})\n", bin.display(), csv.display(), grid.signal.len, grid.idler.len),
            );
        }
        Command::Metrics { jsa, resonances } => {
            let dev = Device::build(&config(cli)?)?;
            let set = read_resonances(&resonances.clone().unwrap_or_else(|| out.join(RESONANCES_FILE)))?;
            let grid = JsaGrid::load(&jsa.clone().unwrap_or_else(|| out.join(JSA_FILE)), Provenance::CavityJ)?;
            let cavity = fitted_cavity(&dev, &set)?;
            let report = analyze(&dev, &set, &cavity, &grid)?;
            fs::create_dir_all(out)?;
            pipeline::write_report(out, &report)?;
            emit(cli, report_value(&report), report.to_text());
        }
        Command::Schmidt { jsa } => {
            let provenance = if cli.internal { Provenance::CavityInternalJ } else { Provenance::CavityJ };
            let grid = JsaGrid::load(&jsa.clone().unwrap_or_else(|| out.join(JSA_FILE)), provenance)?;
            let r = schmidt_decompose(&grid)?;
            emit(
                cli,
                json!({"schmidt_number": r.schmidt_number, "entropy_nats": r.entropy_nats, "purity": r.purity()}),
                format!(
                    "Schmidt number {:.4}, entropy {:.4} nats, purity {:.5} ({}x{} grid)\n",
                    r.schmidt_number,
                    r.entropy_nats,
                    r.purity(),
                    grid.signal.len,
                    grid.idler.len
                ),
            );
        }
        Command::Sweep { param, values, range, log, outputs } => {
            let cfg = config(cli)?;
            let values = match (values, range) {
                (Some(v), _) => v.clone(),
                (None, Some(r)) => parse_range(r, *log)?,
                (None, None) => {
                    return Err(Error::Validation { key: "--values".into(), message: "give --values or --range".into() })
                }
            };
            let outputs = outputs.iter().map(|o| SweepOutput::parse(o)).collect::<Result<Vec<_>, _>>()?;
            let table = pipeline::sweep(&cfg, &SweepSpec { parameter: param.clone(), values, outputs })?;
            fs::create_dir_all(out)?;
            let file = out.join(format!("sweep_{}.csv", param.replace('.', "_")));
            let csv = table.to_csv();
            fs::write(&file, &csv)?;
            emit(
                cli,
                json!({"sweep": file, "rows": table.rows.len()}),
                csv,
            );
        }
        Command::Run => {
            let cfg = config(cli)?;
            let run = pipeline::run_pipeline(&cfg, out, cli.grid_points)?;
            emit(cli, report_value(&run.report), run.report.to_text());
        }
        Command::Report { report } => {
            let path = report.clone().unwrap_or_else(|| out.join(REPORT_JSON_FILE));
            let r = SourceReport::from_json(&fs::read_to_string(&path)?)?;
            emit(cli, report_value(&r), r.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
