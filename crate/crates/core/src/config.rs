//! Device description read from a TOML document. Every physical quantity
//! carries its unit in the key name.

#![allow(non_snake_case)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{KappaCurve, LoopElement, Racetrack};
use crate::dispersion::{circular_bend_segments, Band, DispersionModel, QpmConvention};
use crate::error::{Error, Result};
use crate::spdc::{PumpPulse, C64};
use crate::units::{thz_to_omega, wavelength_to_omega};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub name: Option<String>,
    pub dispersion: BTreeMap<String, DispersionSpec>,
    pub couplers: CouplerSpec,
    pub racetrack: RacetrackSpec,
    pub nonlinear: NonlinearSpec,
    pub pump: PumpSpec,
    pub spectrum: SpectrumSpec,
    pub jsa: JsaSpec,
    /// directory relative paths are resolved against
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `n = n0 + n1·u + n2·u²`, `u = (f − f_c)/f_c`
    Taylor,
    /// two-column text file (frequency_THz, n_eff)
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSpec {
    pub band: Band,
    pub model: ModelKind,
    pub center_THz: Option<f64>,
    pub n0: Option<f64>,
    #[serde(default)]
    pub n1: f64,
    #[serde(default)]
    pub n2: f64,
    pub min_THz: Option<f64>,
    pub max_THz: Option<f64>,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerSpec {
    #[serde(default = "default_coupler_name")]
    pub name: String,
    pub signal_kappa2: Option<f64>,
    /// two-column text file (frequency_THz, kappa2)
    pub signal_kappa2_table: Option<String>,
    pub pump_kappa2: f64,
}

fn default_coupler_name() -> String {
    "coupler".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RacetrackSpec {
    pub elements: Vec<ElementSpec>,
    /// pump round-trip amplitude survival; the signal loop survival if absent
    pub pump_eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    Waveguide {
        name: String,
        length_mm: f64,
        model: String,
        loss_dB_per_m: f64,
        #[serde(default)]
        poled: bool,
    },
    Bend {
        name: String,
        radius_um: f64,
        sweep_deg: f64,
        #[serde(default)]
        start_deg: f64,
        segments: usize,
        ordinary_model: String,
        extraordinary_model: String,
        loss_dB_per_m: f64,
    },
    LumpedLoss {
        name: String,
        loss_dB: f64,
    },
}

impl ElementSpec {
    pub fn name(&self) -> &str {
        match self {
            ElementSpec::Waveguide { name, .. } | ElementSpec::Bend { name, .. } | ElementSpec::LumpedLoss { name, .. } => {
                name
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpmOrder {
    #[default]
    PiOverLambda,
    TwoPiOverLambda,
}

impl From<QpmOrder> for QpmConvention {
    fn from(q: QpmOrder) -> Self {
        match q {
            QpmOrder::PiOverLambda => QpmConvention::PiOverLambda,
            QpmOrder::TwoPiOverLambda => QpmConvention::TwoPiOverLambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearSpec {
    pub signal_model: String,
    pub pump_model: String,
    pub chi2_pm_per_V: f64,
    /// triple overlap of unit-normalized fields
    pub overlap_per_um: f64,
    /// computed for degenerate phase matching at the pump centre if absent
    pub period_um: Option<f64>,
    #[serde(default)]
    pub qpm_order_convention: QpmOrder,
    #[serde(default)]
    pub heisenberg_factor_two: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    /// place ω_p/2 halfway between two signal resonances
    #[serde(default)]
    pub center_auto: bool,
    pub center_THz: Option<f64>,
    pub center_nm: Option<f64>,
    pub fwhm_GHz: f64,
    pub pulse_energy_pJ: f64,
    pub rep_rate_MHz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub min_THz: f64,
    pub max_THz: f64,
    pub points: usize,
    #[serde(default = "default_prominence")]
    pub prominence: f64,
}

fn default_prominence() -> f64 {
    crate::resonances::DEFAULT_PROMINENCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsaSpec {
    /// full width of each axis in free spectral ranges, centred on ω_p/2
    pub span_fsr: Option<f64>,
    pub min_THz: Option<f64>,
    pub max_THz: Option<f64>,
    pub points: usize,
    /// intervals per axis of each island's own grid
    #[serde(default = "default_island_points")]
    pub island_points: usize,
    /// keep one CSV row in `csv_stride` along each axis
    #[serde(default = "default_csv_stride")]
    pub csv_stride: usize,
}

fn default_island_points() -> usize {
    256
}

fn default_csv_stride() -> usize {
    4
}

/// Where the pump centre comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpCenter {
    Auto,
    Omega(f64),
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("must be positive and finite, got {v}")))
    }
}

fn fraction(key: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(key, format!("must lie in [0, 1], got {v}")))
    }
}

fn parse_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or(rest);
        return Error::validation(key, format!("unknown key ({msg})"));
    }
    if let Some(rest) = msg.strip_prefix("missing field `") {
        let key = rest.split('`').next().unwrap_or(rest);
        return Error::validation(key, "required key is missing");
    }
    Error::Parse(e.to_string())
}

impl DeviceConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: DeviceConfig = toml::from_str(text).map_err(parse_error)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dispersion.is_empty() {
            return Err(Error::validation("dispersion", "at least one model is required"));
        }
        for (name, d) in &self.dispersion {
            let key = |f: &str| format!("dispersion.{name}.{f}");
            let need = |f: &str, v: Option<f64>| {
                let v = v.ok_or_else(|| Error::validation(key(f), "required for a taylor model"))?;
                positive(&key(f), v).map(|_| v)
            };
            match d.model {
                ModelKind::Taylor => {
                    need("center_THz", d.center_THz)?;
                    need("n0", d.n0)?;
                    let lo = need("min_THz", d.min_THz)?;
                    if !(need("max_THz", d.max_THz)? > lo) {
                        return Err(Error::validation(key("max_THz"), "must exceed min_THz"));
                    }
                    if d.path.is_some() {
                        return Err(Error::validation(key("path"), "only table models take a path"));
                    }
                }
                ModelKind::Table => {
                    if d.path.is_none() {
                        return Err(Error::validation(key("path"), "required for a table model"));
                    }
                }
            }
        }
        let model_ref = |key: String, name: &str| {
            if self.dispersion.contains_key(name) {
                Ok(())
            } else {
                Err(Error::validation(key, format!("no dispersion model named `{name}`")))
            }
        };
        let c = &self.couplers;
        match (c.signal_kappa2, &c.signal_kappa2_table) {
            (Some(k), None) => fraction("couplers.signal_kappa2", k)?,
            (None, Some(_)) => {}
            _ => {
                return Err(Error::validation(
                    "couplers.signal_kappa2",
                    "give exactly one of signal_kappa2 or signal_kappa2_table",
                ))
            }
        }
        fraction("couplers.pump_kappa2", c.pump_kappa2)?;
        if self.racetrack.elements.is_empty() {
            return Err(Error::validation("racetrack.elements", "the loop needs at least one element"));
        }
        let mut poled = 0;
        for (k, e) in self.racetrack.elements.iter().enumerate() {
            let key = |f: &str| format!("racetrack.elements[{k}].{f}");
            match e {
                ElementSpec::Waveguide { length_mm, model, loss_dB_per_m, poled: p, .. } => {
                    positive(&key("length_mm"), *length_mm)?;
                    model_ref(key("model"), model)?;
                    if *loss_dB_per_m < 0.0 {
                        return Err(Error::validation(key("loss_dB_per_m"), "must be non-negative"));
                    }
                    poled += *p as usize;
                }
                ElementSpec::Bend { radius_um, sweep_deg, segments, ordinary_model, extraordinary_model, loss_dB_per_m, .. } => {
                    positive(&key("radius_um"), *radius_um)?;
                    positive(&key("sweep_deg"), sweep_deg.abs())?;
                    if *segments == 0 {
                        return Err(Error::validation(key("segments"), "must be at least 1"));
                    }
                    model_ref(key("ordinary_model"), ordinary_model)?;
                    model_ref(key("extraordinary_model"), extraordinary_model)?;
                    if *loss_dB_per_m < 0.0 {
                        return Err(Error::validation(key("loss_dB_per_m"), "must be non-negative"));
                    }
                }
                ElementSpec::LumpedLoss { loss_dB, .. } => {
                    if *loss_dB < 0.0 {
                        return Err(Error::validation(key("loss_dB"), "must be non-negative"));
                    }
                }
            }
        }
        if poled != 1 {
            return Err(Error::validation("racetrack.elements", format!("exactly one poled waveguide is required, found {poled}")));
        }
        if let Some(e) = self.racetrack.pump_eta {
            fraction("racetrack.pump_eta", e)?;
        }
        let n = &self.nonlinear;
        model_ref("nonlinear.signal_model".into(), &n.signal_model)?;
        model_ref("nonlinear.pump_model".into(), &n.pump_model)?;
        if !(n.chi2_pm_per_V >= 0.0) {
            return Err(Error::validation("nonlinear.chi2_pm_per_V", "must be non-negative"));
        }
        if !n.overlap_per_um.is_finite() {
            return Err(Error::validation("nonlinear.overlap_per_um", "must be finite"));
        }
        if let Some(p) = n.period_um {
            positive("nonlinear.period_um", p)?;
        }
        let p = &self.pump;
        let centers = p.center_auto as usize + p.center_THz.is_some() as usize + p.center_nm.is_some() as usize;
        if centers != 1 {
            return Err(Error::validation(
                "pump.center_THz",
                format!("exactly one of center_auto, center_THz, center_nm is required, found {centers}"),
            ));
        }
        if let Some(v) = p.center_THz {
            positive("pump.center_THz", v)?;
        }
        if let Some(v) = p.center_nm {
            positive("pump.center_nm", v)?;
        }
        positive("pump.fwhm_GHz", p.fwhm_GHz)?;
        positive("pump.pulse_energy_pJ", p.pulse_energy_pJ)?;
        positive("pump.rep_rate_MHz", p.rep_rate_MHz)?;
        let s = &self.spectrum;
        positive("spectrum.min_THz", s.min_THz)?;
        if !(s.max_THz > s.min_THz) {
            return Err(Error::validation("spectrum.max_THz", "must exceed min_THz"));
        }
        if s.points < 16 {
            return Err(Error::validation("spectrum.points", "at least 16 points are required"));
        }
        fraction("spectrum.prominence", s.prominence)?;
        let j = &self.jsa;
        match (j.span_fsr, j.min_THz, j.max_THz) {
            (Some(span), None, None) => positive("jsa.span_fsr", span)?,
            (None, Some(lo), Some(hi)) => {
                positive("jsa.min_THz", lo)?;
                if !(hi > lo) {
                    return Err(Error::validation("jsa.max_THz", "must exceed min_THz"));
                }
            }
            _ => return Err(Error::validation("jsa.span_fsr", "give either span_fsr or both min_THz and max_THz")),
        }
        if j.points < 2 {
            return Err(Error::validation("jsa.points", "at least 2 points are required"));
        }
        if j.island_points < 2 {
            return Err(Error::validation("jsa.island_points", "at least 2 intervals are required"));
        }
        if j.csv_stride == 0 {
            return Err(Error::validation("jsa.csv_stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn model(&self, name: &str) -> Result<Arc<DispersionModel>> {
        let spec = self
            .dispersion
            .get(name)
            .ok_or_else(|| Error::validation(format!("dispersion.{name}"), "no such model"))?;
        let get = |v: Option<f64>| v.unwrap_or(f64::NAN);
        let m = match spec.model {
            ModelKind::Taylor => DispersionModel::taylor(
                spec.band,
                thz_to_omega(get(spec.center_THz)),
                get(spec.n0),
                spec.n1,
                spec.n2,
                (thz_to_omega(get(spec.min_THz)), thz_to_omega(get(spec.max_THz))),
            ),
            ModelKind::Table => {
                let text = std::fs::read_to_string(self.resolve(spec.path.as_deref().unwrap_or_default()))?;
                DispersionModel::from_table_text(spec.band, &text)
            }
        };
        m.map(Arc::new).map_err(|e| Error::validation(format!("dispersion.{name}"), e.to_string()))
    }

    pub fn kappa_curve(&self) -> Result<KappaCurve> {
        if let Some(k) = self.couplers.signal_kappa2 {
            return Ok(KappaCurve::Constant(k));
        }
        let path = self.couplers.signal_kappa2_table.as_deref().unwrap_or_default();
        let text = std::fs::read_to_string(self.resolve(path))?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("{path} line {}: {e}", lineno + 1)))?;
            if cols.len() != 2 {
                return Err(Error::Parse(format!("{path} line {}: expected (frequency_THz, kappa2)", lineno + 1)));
            }
            rows.push((thz_to_omega(cols[0]), cols[1]));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (omega, kappa2) = rows.into_iter().unzip();
        KappaCurve::table(omega, kappa2).map_err(|e| Error::validation("couplers.signal_kappa2_table", e.to_string()))
    }

    pub fn racetrack(&self) -> Result<Racetrack> {
        let elements = self
            .racetrack
            .elements
            .iter()
            .map(|e| {
                Ok(match e {
                    ElementSpec::Waveguide { name, length_mm, model, loss_dB_per_m, poled } => LoopElement::Waveguide {
                        name: name.clone(),
                        length: length_mm * 1e-3,
                        model: self.model(model)?,
                        loss_db_per_m: *loss_dB_per_m,
                        poled: *poled,
                    },
                    ElementSpec::Bend {
                        name,
                        radius_um,
                        sweep_deg,
                        start_deg,
                        segments,
                        ordinary_model,
                        extraordinary_model,
                        loss_dB_per_m,
                    } => LoopElement::Bend {
                        name: name.clone(),
                        segments: circular_bend_segments(
                            radius_um * 1e-6,
                            start_deg.to_radians(),
                            sweep_deg.to_radians(),
                            *segments,
                        )?,
                        ordinary: self.model(ordinary_model)?,
                        extraordinary: self.model(extraordinary_model)?,
                        loss_db_per_m: *loss_dB_per_m,
                    },
                    ElementSpec::LumpedLoss { name, loss_dB } => {
                        LoopElement::LumpedLoss { name: name.clone(), loss_db: *loss_dB }
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Racetrack::new(self.couplers.name.clone(), self.kappa_curve()?, elements)
            .map_err(|e| Error::validation("racetrack.elements", e.to_string()))
    }

    pub fn pump_center(&self) -> PumpCenter {
        match (self.pump.center_THz, self.pump.center_nm) {
            (Some(f), _) => PumpCenter::Omega(thz_to_omega(f)),
            (None, Some(nm)) => PumpCenter::Omega(wavelength_to_omega(nm * 1e-9)),
            (None, None) => PumpCenter::Auto,
        }
    }

    /// Pump pulse centred at `omega0`.
    pub fn pulse(&self, omega0: f64) -> Result<PumpPulse> {
        PumpPulse::new(
            omega0,
            self.pump.fwhm_GHz * 1e9,
            self.pump.pulse_energy_pJ * 1e-12,
            self.pump.rep_rate_MHz * 1e6,
        )
    }

    pub fn poled_length(&self) -> f64 {
        self.racetrack
            .elements
            .iter()
            .find_map(|e| match e {
                ElementSpec::Waveguide { length_mm, poled: true, .. } => Some(length_mm * 1e-3),
                _ => None,
            })
            .unwrap_or(0.0)
    }

    pub fn chi2(&self) -> f64 {
        self.nonlinear.chi2_pm_per_V * 1e-12
    }

    pub fn overlap(&self) -> C64 {
        C64::new(self.nonlinear.overlap_per_um * 1e6, 0.0)
    }

    /// Copy with one numeric key replaced. `path` is dot-separated; inside
    /// `racetrack.elements` an element is addressed by its name.
    pub fn with_value(&self, path: &str, value: f64) -> Result<DeviceConfig> {
        let mut doc = toml::Value::try_from(self).map_err(|e| Error::Parse(e.to_string()))?;
        let mut node = &mut doc;
        for part in path.split('.') {
            node = match node {
                toml::Value::Table(t) => t
                    .get_mut(part)
                    .ok_or_else(|| Error::validation(path, format!("no key `{part}`")))?,
                toml::Value::Array(items) => items
                    .iter_mut()
                    .find(|it| it.get("name").and_then(|n| n.as_str()) == Some(part))
                    .ok_or_else(|| Error::validation(path, format!("no element named `{part}`")))?,
                _ => return Err(Error::validation(path, "path descends into a value")),
            };
        }
        match node {
            toml::Value::Float(_) | toml::Value::Integer(_) => *node = toml::Value::Float(value),
            _ => return Err(Error::validation(path, "not a numeric key")),
        }
        let mut cfg: DeviceConfig = doc.try_into().map_err(parse_error)?;
        cfg.base_dir = self.base_dir.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> Result<DeviceConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    DeviceConfig::from_toml_str(&text, &base)
}
