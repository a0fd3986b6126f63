//! Stage orchestration: circuit spectrum, resonance fit, joint spectral
//! amplitude and source metrics, each persisted as a file.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{CavityCoupling, Racetrack};
use crate::config::{DeviceConfig, PumpCenter};
use crate::dispersion::qpm_period_for;
use crate::error::{Error, Result};
use crate::metrics::{
    fold_mirrored, frequency_bin_schmidt, island_pgr, island_schmidt, partition_islands, total_probability, totals_and_brightness,
    IslandReport, IslandWindow, SchmidtResult, SourceReport, Stats,
};
use crate::resonances::{fit_spectrum, fwhm_of_product, Resonance, ResonanceSet};
use crate::spdc::{
    closed_form_pcav, jsa_grid, pump_buildup_sweep, Axis, CavityResponse, FittedCavity, JsaGrid, NonlinearSection,
    Provenance, PumpPulse,
};
use crate::units::{omega_to_ghz, omega_to_thz, thz_to_omega};

pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const RESONANCES_FILE: &str = "resonances.json";
pub const JSA_FILE: &str = "jsa.bin";
pub const JSA_CSV_FILE: &str = "jsa.csv";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";

/// Everything derived from a configuration before any spectrum is computed.
#[derive(Debug, Clone)]
pub struct Device {
    pub config: DeviceConfig,
    pub racetrack: Racetrack,
    pub section: NonlinearSection,
    pub pulse: PumpPulse,
    /// true only when the loop phase involves no approximate bend model
    pub phase_trusted: bool,
}

impl Device {
    pub fn build(config: &DeviceConfig) -> Result<Device> {
        let racetrack = config.racetrack()?;
        let phase_trusted = !racetrack
            .elements()
            .iter()
            .any(|e| matches!(e, crate::circuit::LoopElement::Bend { .. }));
        let omega_p = match config.pump_center() {
            PumpCenter::Omega(w) => w,
            PumpCenter::Auto => {
                let mid = thz_to_omega(0.5 * (config.spectrum.min_THz + config.spectrum.max_THz));
                racetrack.centered_pump(2.0 * mid)?
            }
        };
        let signal = config.model(&config.nonlinear.signal_model)?;
        let pump = config.model(&config.nonlinear.pump_model)?;
        let convention = config.nonlinear.qpm_order_convention.into();
        let period = match config.nonlinear.period_um {
            Some(p) => p * 1e-6,
            None => qpm_period_for(&pump, &signal, omega_p / 2.0, omega_p / 2.0, convention)
                .map_err(|e| Error::validation("nonlinear.period_um", format!("cannot phase match: {e}")))?,
        };
        let mut section =
            NonlinearSection::new(config.poled_length(), period, config.chi2(), config.overlap(), signal, pump)?;
        section.convention = convention;
        section.heisenberg_factor_two = config.nonlinear.heisenberg_factor_two;
        Ok(Device { config: config.clone(), racetrack, section, pulse: config.pulse(omega_p)?, phase_trusted })
    }

    pub fn half_pump(&self) -> f64 {
        self.pulse.omega0 / 2.0
    }

    /// Signal-arm κ² at the half-pump frequency.
    pub fn kappa2(&self) -> Result<f64> {
        self.racetrack.coupler().at(self.half_pump())
    }

    /// Coupling split into poled-section and remaining-loop survival.
    pub fn coupling_at(&self, omega: f64) -> Result<CavityCoupling> {
        let k2 = self.racetrack.coupler().at(omega)?;
        let eta_nl = self.racetrack.nonlinear_survival();
        CavityCoupling::new((1.0 - k2).sqrt(), eta_nl, self.racetrack.loop_survival() / eta_nl)
    }

    pub fn pump_eta(&self) -> f64 {
        self.config.racetrack.pump_eta.unwrap_or_else(|| self.racetrack.loop_survival())
    }
}

/// Power transmission sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "frequency_THz,power_transmission")?;
        for (o, p) in self.omega.iter().zip(&self.power) {
            writeln!(w, "{},{}", omega_to_thz(*o), p)?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Spectrum> {
        let mut omega = Vec::new();
        let mut power = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_alphabetic()) {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let mut next = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            omega.push(thz_to_omega(next()?));
            power.push(next()?);
        }
        Ok(Spectrum { omega, power })
    }
}

pub fn compute_spectrum(dev: &Device) -> Result<Spectrum> {
    let s = &dev.config.spectrum;
    let axis = Axis::spanning(thz_to_omega(s.min_THz), thz_to_omega(s.max_THz), s.points)?;
    let omega: Arc<[f64]> = axis.values().into();
    let power = dev.racetrack.transmission(omega.clone())?;
    Ok(Spectrum { omega: omega.to_vec(), power })
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub f0_THz: f64,
    pub fwhm_GHz: f64,
    pub Q: f64,
    pub depth: f64,
    pub residual: f64,
}

/// The on-disk form of a resonance fit.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub resonances: Vec<FitRow>,
    pub fsr_mean_GHz: Option<f64>,
}

impl FitReport {
    pub fn from_set(set: &ResonanceSet) -> Self {
        let fsr = set.fsr_mean();
        FitReport {
            resonances: set
                .resonances()
                .iter()
                .map(|r| FitRow {
                    f0_THz: omega_to_thz(r.omega0),
                    fwhm_GHz: omega_to_ghz(r.fwhm),
                    Q: r.q,
                    depth: r.depth,
                    residual: r.residual,
                })
                .collect(),
            fsr_mean_GHz: fsr.is_finite().then(|| omega_to_ghz(fsr)),
        }
    }

    pub fn to_set(&self) -> Result<ResonanceSet> {
        ResonanceSet::new(
            self.resonances
                .iter()
                .map(|r| Resonance::new(thz_to_omega(r.f0_THz), 2.0 * PI * r.fwhm_GHz * 1e9, r.depth, r.residual))
                .collect::<Result<_>>()?,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn fit(dev: &Device, spectrum: &Spectrum) -> Result<ResonanceSet> {
    fit_spectrum(&spectrum.omega, &spectrum.power, dev.config.spectrum.prominence)
}

/// Cavity rebuilt from the fitted resonances and the known coupler.
pub fn fitted_cavity(dev: &Device, set: &ResonanceSet) -> Result<FittedCavity> {
    FittedCavity::new(set, (1.0 - dev.kappa2()?).sqrt())
}

/// Square JSA axis from the configuration; `points` overrides the
/// configured count.
pub fn jsa_axis(dev: &Device, set: &ResonanceSet, points: Option<usize>) -> Result<Axis> {
    let j = &dev.config.jsa;
    let n = points.unwrap_or(j.points);
    match (j.span_fsr, j.min_THz, j.max_THz) {
        (Some(span), _, _) => {
            let fsr = set.fsr_mean();
            if !fsr.is_finite() {
                return Err(Error::validation("jsa.span_fsr", "needs at least two fitted resonances"));
            }
            let half = 0.5 * span * fsr;
            Axis::spanning(dev.half_pump() - half, dev.half_pump() + half, n)
        }
        (None, Some(lo), Some(hi)) => Axis::spanning(thz_to_omega(lo), thz_to_omega(hi), n),
        _ => Err(Error::validation("jsa.span_fsr", "no JSA band configured")),
    }
}

pub fn compute_jsa(dev: &Device, cavity: &dyn CavityResponse, axis: Axis, internal: bool) -> Result<JsaGrid> {
    let provenance = if internal { Provenance::CavityInternalJ } else { Provenance::CavityJ };
    jsa_grid(&dev.section, &dev.pulse, cavity, axis, axis, provenance)
}

struct IslandResult {
    p_internal: f64,
    p_external: f64,
    schmidt: Result<SchmidtResult>,
}

fn evaluate_island(dev: &Device, cavity: &dyn CavityResponse, w: &IslandWindow) -> Result<IslandResult> {
    let n = dev.config.jsa.island_points + 1;
    let sub = jsa_grid(
        &dev.section,
        &dev.pulse,
        cavity,
        Axis::spanning(w.signal_lo, w.signal_hi, n)?,
        Axis::spanning(w.idler_lo, w.idler_hi, n)?,
        Provenance::CavityJ,
    )?;
    let internal = sub.to_internal(cavity)?;
    Ok(IslandResult {
        p_internal: island_pgr(&internal, w, 1.0)?.probability,
        p_external: island_pgr(&sub, w, 1.0)?.probability,
        schmidt: island_schmidt(&sub, w),
    })
}

/// Source metrics from a full-band grid. Island figures come from each
/// island's own grid, evaluated afresh at `jsa.island_points` intervals per
/// axis. K counts one frequency-bin mode per island; the continuous K is the
/// union of the island decompositions.
pub fn analyze(dev: &Device, set: &ResonanceSet, cavity: &dyn CavityResponse, grid: &JsaGrid) -> Result<SourceReport> {
    let windows = partition_islands(grid, set, &dev.pulse);
    let results = windows
        .par_iter()
        .map(|w| evaluate_island(dev, cavity, w))
        .collect::<Result<Vec<_>>>()?;
    let rep = dev.pulse.rep_rate;
    let avg_mw = dev.pulse.average_power() * 1e3;
    let mut notes = Vec::new();
    let islands: Vec<IslandReport> = windows
        .iter()
        .zip(&results)
        .map(|(w, r)| IslandReport {
            index: w.index,
            signal_thz: omega_to_thz(w.signal_center),
            idler_thz: omega_to_thz(w.idler_center),
            probability_internal: r.p_internal,
            probability_external: r.p_external,
            pgr_internal_hz_per_mw: rep * r.p_internal / avg_mw,
            pgr_external_hz_per_mw: rep * r.p_external / avg_mw,
            purity: r.schmidt.as_ref().ok().map(SchmidtResult::purity),
        })
        .collect();
    let purities: Vec<f64> = islands.iter().filter_map(|i| i.purity).collect();
    let blocks: Vec<(f64, &SchmidtResult)> = results
        .iter()
        .filter_map(|r| r.schmidt.as_ref().ok().map(|s| (r.p_external, s)))
        .collect();
    let union = if windows.is_empty() {
        notes.push("no islands inside the JSA band".to_string());
        None
    } else {
        match SchmidtResult::from_blocks(&blocks) {
            Ok(u) => Some(u),
            Err(e) => {
                notes.push(format!("Schmidt decomposition unavailable: {e}"));
                None
            }
        }
    };
    let weights: Vec<f64> = results.iter().map(|r| r.p_internal).collect();
    let bins = if windows.is_empty() { None } else { frequency_bin_schmidt(&windows, &weights).ok() };
    let split = if windows.is_empty() {
        None
    } else {
        match fold_mirrored(&windows, &weights) {
            Ok(s) => Some(s),
            Err(e) => {
                notes.push(format!("wavelength split unavailable: {e}"));
                None
            }
        }
    };
    let total_ext = total_probability(grid);
    let in_islands: f64 = windows
        .iter()
        .map(|w| island_pgr(grid, w, 1.0).map(|p| p.probability))
        .sum::<Result<f64>>()?;
    if !dev.phase_trusted {
        notes.push("pump centering relies on the segmented bend phase, which is approximate".to_string());
    }
    let mean_fwhm_ghz = omega_to_ghz(set.mean_fwhm());
    let fsr = set.fsr_mean();
    Ok(SourceReport {
        device: dev.config.name.clone(),
        kappa2: dev.kappa2()?,
        pump_center_thz: omega_to_thz(dev.pulse.omega0),
        pump_centering_trusted: dev.phase_trusted,
        average_pump_power_mw: avg_mw,
        rep_rate_hz: rep,
        resonance_count: set.len(),
        fsr_mean_ghz: fsr.is_finite().then(|| omega_to_ghz(fsr)),
        mean_fwhm_ghz,
        mean_q: set.mean_q(),
        island_count: windows.len(),
        accessible_island_count: split.map_or(0, |s| s.accessible_count),
        totals: totals_and_brightness(&islands, mean_fwhm_ghz),
        islands,
        purity: Stats::of(&purities),
        schmidt_number: bins.as_ref().map(|b| b.schmidt_number),
        entropy_nats: bins.as_ref().map(|b| b.entropy_nats),
        k_split: split.filter(|s| s.k_split.is_finite() && s.accessible_count > 0).map(|s| s.k_split),
        schmidt_number_continuous: union.as_ref().map(|u| u.schmidt_number),
        entropy_nats_continuous: union.as_ref().map(|u| u.entropy_nats),
        total_probability_external: total_ext,
        residual_fraction: (total_ext > 0.0).then(|| (total_ext - in_islands) / total_ext),
        notes,
    })
}

/// In-memory results of a full run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub device: Device,
    pub spectrum: Spectrum,
    pub resonances: ResonanceSet,
    pub grid: JsaGrid,
    pub report: SourceReport,
}

/// All stages without touching the file system.
pub fn run_in_memory(config: &DeviceConfig, grid_points: Option<usize>) -> Result<RunOutput> {
    let device = Device::build(config).map_err(Error::at_stage("device"))?;
    let spectrum = compute_spectrum(&device).map_err(Error::at_stage("spectrum"))?;
    let resonances = fit(&device, &spectrum).map_err(Error::at_stage("fit"))?;
    let cavity = fitted_cavity(&device, &resonances).map_err(Error::at_stage("jsa"))?;
    let axis = jsa_axis(&device, &resonances, grid_points).map_err(Error::at_stage("jsa"))?;
    let grid = compute_jsa(&device, &cavity, axis, false).map_err(Error::at_stage("jsa"))?;
    let report = analyze(&device, &resonances, &cavity, &grid).map_err(Error::at_stage("metrics"))?;
    Ok(RunOutput { device, spectrum, resonances, grid, report })
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_spectrum(dir: &Path, s: &Spectrum) -> Result<PathBuf> {
    let p = dir.join(SPECTRUM_FILE);
    write_file(&p, |w| s.write_csv(w))?;
    Ok(p)
}

pub fn write_resonances(dir: &Path, set: &ResonanceSet) -> Result<PathBuf> {
    let p = dir.join(RESONANCES_FILE);
    fs::write(&p, FitReport::from_set(set).to_json()? + "\n")?;
    Ok(p)
}

pub fn write_jsa(dir: &Path, grid: &JsaGrid, csv_stride: usize) -> Result<(PathBuf, PathBuf)> {
    let bin = dir.join(JSA_FILE);
    grid.save(&bin)?;
    let csv = dir.join(JSA_CSV_FILE);
    write_file(&csv, |w| grid.write_csv(w, csv_stride))?;
    Ok((bin, csv))
}

pub fn write_report(dir: &Path, report: &SourceReport) -> Result<(PathBuf, PathBuf)> {
    let json = dir.join(REPORT_JSON_FILE);
    fs::write(&json, report.to_json()? + "\n")?;
    let text = dir.join(REPORT_TEXT_FILE);
    fs::write(&text, report.to_text())?;
    Ok((json, text))
}

/// Full pipeline, persisting every intermediate artifact under `out`.
pub fn run_pipeline(config: &DeviceConfig, out: &Path, grid_points: Option<usize>) -> Result<RunOutput> {
    fs::create_dir_all(out)?;
    let run = run_in_memory(config, grid_points)?;
    write_spectrum(out, &run.spectrum).map_err(Error::at_stage("spectrum"))?;
    write_resonances(out, &run.resonances).map_err(Error::at_stage("fit"))?;
    write_jsa(out, &run.grid, config.jsa.csv_stride).map_err(Error::at_stage("jsa"))?;
    write_report(out, &run.report).map_err(Error::at_stage("report"))?;
    Ok(run)
}

/// What a sweep row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    /// loaded Q of the resonance just above ω_p/2
    Q,
    /// `ln σ / ln(ση)`, the share of round-trip decay through the coupler
    FractionOutcoupled,
    /// closed-form external island probability relative to the unswept
    /// configuration
    PgrRelative,
    /// relative pair rate with the pump detuned by half a pump FSR
    PumpHalfFsr,
}

impl SweepOutput {
    pub fn name(self) -> &'static str {
        match self {
            SweepOutput::Q => "q",
            SweepOutput::FractionOutcoupled => "fraction_outcoupled",
            SweepOutput::PgrRelative => "pgr_relative",
            SweepOutput::PumpHalfFsr => "pump_half_fsr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "q" => SweepOutput::Q,
            "fraction_outcoupled" => SweepOutput::FractionOutcoupled,
            "pgr_relative" => SweepOutput::PgrRelative,
            "pump_half_fsr" => SweepOutput::PumpHalfFsr,
            other => return Err(Error::validation("outputs", format!("unknown sweep output `{other}`"))),
        })
    }
}

/// Parameter path as accepted by [`DeviceConfig::with_value`]; the special
/// path `pump.detuning_fsr` sweeps the pump detuning instead.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    pub outputs: Vec<SweepOutput>,
}

pub const PUMP_DETUNING_PATH: &str = "pump.detuning_fsr";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut o = self.header.join(",") + "\n";
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(o, "{}", cells.join(","));
        }
        o
    }
}

struct Operating {
    q: f64,
    fraction: f64,
    p_island: f64,
    pump_half: f64,
}

fn operating_point(dev: &Device) -> Result<Operating> {
    let omega_r = dev.racetrack.resonance_near(dev.half_pump() + 0.5 * PI / dev.racetrack.round_trip_time(dev.half_pump())?)?;
    let t = dev.racetrack.round_trip_time(omega_r)?;
    let c = dev.coupling_at(omega_r)?;
    let gamma = fwhm_of_product(c.product(), t)?;
    let j = dev.section.waveguide_j(&dev.pulse, omega_r, dev.pulse.omega0 - omega_r)?.norm();
    Ok(Operating {
        q: omega_r / gamma,
        fraction: c.sigma().ln() / c.product().ln(),
        p_island: closed_form_pcav(&c, t, j),
        pump_half: pump_buildup_sweep(dev.config.couplers.pump_kappa2, dev.pump_eta(), &[0.5])?.half_fsr_value,
    })
}

pub fn sweep(config: &DeviceConfig, spec: &SweepSpec) -> Result<SweepTable> {
    if spec.values.len() < 2 {
        return Err(Error::validation("values", "a sweep needs at least two points"));
    }
    if spec.parameter == PUMP_DETUNING_PATH {
        let dev = Device::build(config)?;
        let s = pump_buildup_sweep(config.couplers.pump_kappa2, dev.pump_eta(), &spec.values)?;
        return Ok(SweepTable {
            header: vec![spec.parameter.clone(), "relative_pgr".to_string()],
            rows: s.detuning_fsr.iter().zip(&s.relative_pgr).map(|(d, p)| vec![*d, *p]).collect(),
        });
    }
    if spec.outputs.is_empty() {
        return Err(Error::validation("outputs", "request at least one output"));
    }
    let base = operating_point(&Device::build(config)?)?;
    let rows = spec
        .values
        .par_iter()
        .map(|v| {
            let op = operating_point(&Device::build(&config.with_value(&spec.parameter, *v)?)?)?;
            let mut row = vec![*v];
            row.extend(spec.outputs.iter().map(|o| match o {
                SweepOutput::Q => op.q,
                SweepOutput::FractionOutcoupled => op.fraction,
                SweepOutput::PgrRelative => op.p_island / base.p_island,
                SweepOutput::PumpHalfFsr => op.pump_half,
            }));
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec![spec.parameter.clone()];
    header.extend(spec.outputs.iter().map(|o| o.name().to_string()));
    Ok(SweepTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DeviceConfig;

    const SMALL: &str = r#"
name = "small"

[dispersion.core]
band = "telecom"
model = "taylor"
center_THz = 193.4
n0 = 2.2
n1 = 0.02
min_THz = 185.0
max_THz = 202.0

[dispersion.pump]
band = "pump"
model = "taylor"
center_THz = 386.8
n0 = 2.28
min_THz = 360.0
max_THz = 410.0

[couplers]
signal_kappa2 = 0.05
pump_kappa2 = 0.2

[[racetrack.elements]]
kind = "waveguide"
name = "pp"
length_mm = 1.0
model = "core"
loss_dB_per_m = 30.0
poled = true

[[racetrack.elements]]
kind = "waveguide"
name = "back"
length_mm = 1.5
model = "core"
loss_dB_per_m = 30.0

[[racetrack.elements]]
kind = "lumped_loss"
name = "pulley"
loss_dB = 0.2

[nonlinear]
signal_model = "core"
pump_model = "pump"
chi2_pm_per_V = 50.0
overlap_per_um = 1.0

[pump]
center_auto = true
fwhm_GHz = 5.0
pulse_energy_pJ = 1.11
rep_rate_MHz = 900.0

[spectrum]
min_THz = 192.9
max_THz = 193.9
points = 20001

[jsa]
span_fsr = 6.0
points = 121
island_points = 48
csv_stride = 2
"#;

    fn small() -> DeviceConfig {
        DeviceConfig::from_toml_str(SMALL, Path::new(".")).unwrap()
    }

    #[test]
    fn small_run_counts_islands() {
        let run = run_in_memory(&small(), None).unwrap();
        let r = &run.report;
        assert_eq!(r.island_count, 6);
        assert_eq!(r.accessible_island_count, 3);
        let k2 = 0.05;
        for i in &r.islands {
            assert!((i.probability_external / i.probability_internal - k2).abs() < 1e-12);
            assert!(i.signal_thz != i.idler_thz);
        }
        assert!(r.residual_fraction.unwrap() < 0.2);
        let k = r.schmidt_number.unwrap();
        assert!((k - 6.0).abs() < 1e-3, "K = {k}");
        let kc = r.schmidt_number_continuous.unwrap();
        assert!(kc > 6.0 && kc < 8.0, "K = {kc}");
        assert!(r.pump_centering_trusted);
    }

    #[test]
    fn zero_chi2_reports_cleanly() {
        let cfg = small().with_value("nonlinear.chi2_pm_per_V", 0.0).unwrap();
        let run = run_in_memory(&cfg, Some(61)).unwrap();
        let r = &run.report;
        assert!(r.islands.iter().all(|i| i.pgr_internal_hz_per_mw == 0.0));
        assert!(r.schmidt_number.is_none());
        assert!(r.schmidt_number_continuous.is_none());
        assert!(r.notes.iter().any(|n| n.contains("Schmidt")));
        assert!(r.to_text().contains("n/a"));
    }

    #[test]
    fn lossless_device_fails_at_fit() {
        let mut cfg = small();
        for p in ["pp", "back"] {
            cfg = cfg.with_value(&format!("racetrack.elements.{p}.loss_dB_per_m"), 0.0).unwrap();
        }
        cfg = cfg.with_value("racetrack.elements.pulley.loss_dB", 0.0).unwrap();
        match run_in_memory(&cfg, None) {
            Err(Error::Stage { stage, source }) => {
                assert_eq!(stage, "fit");
                assert!(matches!(*source, Error::NoResonances));
            }
            other => panic!("{:?}", other.map(|r| r.report)),
        }
    }

    #[test]
    fn artifacts_reload() {
        let dir = tempfile::tempdir().unwrap();
        let run = run_pipeline(&small(), dir.path(), Some(61)).unwrap();
        let spec = Spectrum::read_csv(&fs::read_to_string(dir.path().join(SPECTRUM_FILE)).unwrap()).unwrap();
        assert_eq!(spec.omega.len(), run.spectrum.omega.len());
        let fit = FitReport::from_json(&fs::read_to_string(dir.path().join(RESONANCES_FILE)).unwrap()).unwrap();
        assert_eq!(fit.to_set().unwrap().len(), run.resonances.len());
        let g = JsaGrid::load(&dir.path().join(JSA_FILE), Provenance::CavityJ).unwrap();
        assert_eq!(g, run.grid);
        let text = fs::read_to_string(dir.path().join(REPORT_JSON_FILE)).unwrap();
        let back = SourceReport::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap() + "\n", text);
    }

    #[test]
    fn sweep_rules() {
        let cfg = small();
        let one = SweepSpec { parameter: "couplers.signal_kappa2".into(), values: vec![0.1], outputs: vec![SweepOutput::Q] };
        assert!(matches!(sweep(&cfg, &one), Err(Error::Validation { .. })));
        let spec = SweepSpec {
            parameter: "couplers.signal_kappa2".into(),
            values: vec![0.01, 0.05, 0.2],
            outputs: vec![SweepOutput::Q, SweepOutput::FractionOutcoupled, SweepOutput::PgrRelative],
        };
        let t = sweep(&cfg, &spec).unwrap();
        let q = t.column("q").unwrap();
        assert!(q[0] > q[1] && q[1] > q[2]);
        assert!((t.column("pgr_relative").unwrap()[1] - 1.0).abs() < 1e-12);
        let rev = SweepSpec { values: vec![0.2, 0.05, 0.01], ..spec };
        let r = sweep(&cfg, &rev).unwrap();
        assert_eq!(r.rows[0], t.rows[2]);
    }
}
