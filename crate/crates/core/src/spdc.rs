//! Nonlinear coupling, pump amplitude, waveguide and cavity joint spectral
//! amplitudes, and the brightness-enhancement algebra.

use std::f64::consts::{LN_2, PI};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{buildup_at, CavityCoupling, Racetrack};
use crate::dispersion::{delta_beta, DispersionModel, QpmConvention};
use crate::error::{Error, Result};
use crate::resonances::{product_from_fwhm, ResonanceSet};
use crate::units::{dims::Dim, EPS0, HBAR};

pub type C64 = Complex64;

/// `sin(x)/x` with a series below |x| < 1e-4.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Transform-limited Gaussian pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpPulse {
    /// centre, rad/s
    pub omega0: f64,
    /// FWHM of the power spectrum, Hz
    pub fwhm_hz: f64,
    /// J
    pub energy: f64,
    /// Hz
    pub rep_rate: f64,
}

impl PumpPulse {
    pub fn new(omega0: f64, fwhm_hz: f64, energy: f64, rep_rate: f64) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("fwhm", fwhm_hz), ("rep_rate", rep_rate)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("pump {name} must be positive, got {v}")));
            }
        }
        if !(energy >= 0.0) {
            return Err(Error::Domain(format!("pump energy must be non-negative, got {energy}")));
        }
        Ok(PumpPulse { omega0, fwhm_hz, energy, rep_rate })
    }

    /// FWHM of the power spectrum in angular frequency.
    pub fn fwhm_omega(&self) -> f64 {
        2.0 * PI * self.fwhm_hz
    }

    /// Intensity FWHM in time, `2 ln2/(π Δf)`.
    pub fn duration(&self) -> f64 {
        2.0 * LN_2 / (PI * self.fwhm_hz)
    }

    pub fn average_power(&self) -> f64 {
        self.energy * self.rep_rate
    }

    /// Mean pump photon number per pulse at the centre frequency.
    pub fn photon_number(&self) -> f64 {
        self.energy / (HBAR * self.omega0)
    }

    /// Unit-area Gaussian power spectrum Γ(ω), 1/(rad/s).
    pub fn spectrum(&self, omega: f64) -> f64 {
        let w = self.fwhm_omega();
        let a = 4.0 * LN_2 / (w * w);
        (a / PI).sqrt() * (-a * (omega - self.omega0).powi(2)).exp()
    }

    /// Coherent amplitude `α_p = √(E_p Γ(ω)/(ħω))`, taken real and
    /// non-negative.
    pub fn amplitude(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        (self.energy * self.spectrum(omega) / (HBAR * omega)).sqrt()
    }
}

/// Transverse mode sampled on a rectangular grid, normalized so that
/// `∬ ρ|W|² dx dy = 1` with the band weight ρ (F/m).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    x: Vec<f64>,
    y: Vec<f64>,
    /// row-major over (x, y)
    field: Vec<C64>,
    weight: Vec<f64>,
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|k| {
            let left = if k > 0 { axis[k] - axis[k - 1] } else { 0.0 };
            let right = if k + 1 < n { axis[k + 1] - axis[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

impl ModeProfile {
    /// Builds a profile and rescales the field to unit weighted norm.
    pub fn normalized(x: Vec<f64>, y: Vec<f64>, field: Vec<C64>, weight: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.len() < 2 || field.len() != x.len() * y.len() || weight.len() != field.len() {
            return Err(Error::GridMismatch);
        }
        for axis in [&x, &y] {
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Domain("mode grid axes must increase".into()));
            }
        }
        if weight.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("mode weight must be positive".into()));
        }
        let mut p = ModeProfile { x, y, field, weight };
        let norm = p.weighted_norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroGrid);
        }
        let s = 1.0 / norm.sqrt();
        p.field.iter_mut().for_each(|f| *f *= s);
        Ok(p)
    }

    /// `∬ ρ|W|²` by the trapezoid rule.
    pub fn weighted_norm(&self) -> f64 {
        let (wx, wy) = (trapezoid_weights(&self.x), trapezoid_weights(&self.y));
        let ny = self.y.len();
        let mut acc = 0.0;
        for (i, ax) in wx.iter().enumerate() {
            for (j, ay) in wy.iter().enumerate() {
                let k = i * ny + j;
                acc += ax * ay * self.weight[k] * self.field[k].norm_sqr();
            }
        }
        acc
    }
}

/// Triple overlap `∫ W_s* W_i* W_p d²x` in m⁻¹.
///
/// Each field is first brought to unit L² norm by multiplying with √ρ, so the
/// result plugs straight into the coupling constant.
pub fn triple_overlap(signal: &ModeProfile, idler: &ModeProfile, pump: &ModeProfile) -> Result<C64> {
    for p in [idler, pump] {
        if p.x != signal.x || p.y != signal.y {
            return Err(Error::GridMismatch);
        }
    }
    let (wx, wy) = (trapezoid_weights(&signal.x), trapezoid_weights(&signal.y));
    let ny = signal.y.len();
    let mut acc = C64::new(0.0, 0.0);
    for (i, ax) in wx.iter().enumerate() {
        for (j, ay) in wy.iter().enumerate() {
            let k = i * ny + j;
            let s = signal.field[k] * signal.weight[k].sqrt();
            let d = idler.field[k] * idler.weight[k].sqrt();
            let p = pump.field[k] * pump.weight[k].sqrt();
            acc += ax * ay * s.conj() * d.conj() * p;
        }
    }
    Ok(acc)
}

/// The poled section that drives down-conversion.
#[derive(Debug, Clone)]
pub struct NonlinearSection {
    /// poled length, m
    pub length: f64,
    /// poling period, m
    pub period: f64,
    /// effective χ⁽²⁾, m/V
    pub chi2: f64,
    /// triple overlap, m⁻¹
    pub overlap: C64,
    pub signal: Arc<DispersionModel>,
    pub pump: Arc<DispersionModel>,
    pub convention: QpmConvention,
    /// Doubles J, the alternative normalisation of the interaction term.
    pub heisenberg_factor_two: bool,
}

impl NonlinearSection {
    pub fn new(
        length: f64,
        period: f64,
        chi2: f64,
        overlap: C64,
        signal: Arc<DispersionModel>,
        pump: Arc<DispersionModel>,
    ) -> Result<Self> {
        for (name, v) in [("length", length), ("period", period)] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("poled section {name} must be positive, got {v}")));
            }
        }
        if !(chi2 >= 0.0) {
            return Err(Error::Domain(format!("chi2 must be non-negative, got {chi2}")));
        }
        Ok(NonlinearSection {
            length,
            period,
            chi2,
            overlap,
            signal,
            pump,
            convention: QpmConvention::default(),
            heisenberg_factor_two: false,
        })
    }

    pub fn with_length(&self, length: f64) -> Self {
        NonlinearSection { length, ..self.clone() }
    }

    pub fn delta_beta(&self, omega: f64, omega_p: f64) -> Result<f64> {
        delta_beta(&self.pump, &self.signal, omega, omega_p, self.period, self.convention)
    }

    /// Nonlinear coupling G(ω, ω′, ω+ω′), J·s^{3/2}.
    pub fn coupling_g(&self, omega: f64, omega_p: f64) -> Result<C64> {
        let wp = omega + omega_p;
        let (n1, n2, np) = (self.signal.n_eff(omega)?, self.signal.n_eff(omega_p)?, self.pump.n_eff(wp)?);
        let (v1, v2, vp) = (
            self.signal.group_velocity(omega)?,
            self.signal.group_velocity(omega_p)?,
            self.pump.group_velocity(wp)?,
        );
        let db = self.delta_beta(omega, omega_p)?;
        let prefactor = 2f64.sqrt() * HBAR.powf(1.5) * self.length / (PI * EPS0.sqrt());
        let magnitude = prefactor * (omega * omega_p * wp / (v1 * v2 * vp)).sqrt() * self.chi2
            / (n1 * n1 * n2 * n2 * np * np)
            * sinc(db * self.length / 2.0);
        Ok(C64::new(0.0, magnitude) * self.overlap)
    }

    /// Straight-waveguide amplitude `J = (i/ħ) G α_p`, in seconds (a density
    /// per dω/2π on each axis).
    pub fn waveguide_j(&self, pulse: &PumpPulse, omega: f64, omega_p: f64) -> Result<C64> {
        let alpha = pulse.amplitude(omega + omega_p);
        if alpha == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let g = self.coupling_g(omega, omega_p)?;
        let factor = if self.heisenberg_factor_two { 2.0 } else { 1.0 };
        Ok(C64::new(0.0, factor / HBAR) * g * alpha)
    }
}

/// Dimensions of `J`, assembled from the coupling-constant factors with the
/// overlap in m⁻¹. Dividing by (rad/s)⁻¹ must leave nothing.
pub fn waveguide_j_dims() -> Dim {
    let hbar = Dim::joule() * Dim::S;
    let omega = Dim::NONE / Dim::S;
    let velocity = Dim::M / Dim::S;
    let g = hbar.pow_half(3) / Dim::farad_per_metre().pow_half(1)
        * Dim::M
        * (omega.powi(3) / velocity.powi(3)).pow_half(1)
        * (Dim::NONE / Dim::M)
        * (Dim::M / Dim::volt());
    let spectrum = Dim::NONE / omega;
    let alpha = (Dim::joule() * spectrum / (hbar * omega)).pow_half(1);
    g / hbar * alpha
}

/// Cavity quantities at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityPoint {
    pub sigma: f64,
    pub kappa: f64,
    pub eta: f64,
    /// round-trip phase βL
    pub phase: f64,
}

impl CavityPoint {
    pub fn from_coupling(c: &CavityCoupling, phase: f64) -> Self {
        CavityPoint { sigma: c.sigma(), kappa: c.kappa(), eta: c.eta(), phase }
    }

    /// `1/|1 − σηe^{iφ}|²`
    pub fn buildup(&self) -> f64 {
        1.0 / (1.0 - self.sigma * self.eta * C64::from_polar(1.0, self.phase)).norm_sqr()
    }
}

/// Anything that can report σ, κ, η and βL at a frequency.
pub trait CavityResponse: Sync {
    fn at(&self, omega: f64) -> Result<CavityPoint>;
}

/// Frequency-flat coupling with a linear round-trip phase `T(ω − ω_ref)`, so
/// resonances sit at `ω_ref + 2πm/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCavity {
    pub coupling: CavityCoupling,
    pub omega_ref: f64,
    pub round_trip_time: f64,
}

impl CavityResponse for UniformCavity {
    fn at(&self, omega: f64) -> Result<CavityPoint> {
        Ok(CavityPoint::from_coupling(&self.coupling, self.round_trip_time * (omega - self.omega_ref)))
    }
}

/// Response read directly off the circuit model.
#[derive(Debug, Clone)]
pub struct CircuitCavity {
    pub racetrack: Racetrack,
}

impl CavityResponse for CircuitCavity {
    fn at(&self, omega: f64) -> Result<CavityPoint> {
        let k2 = self.racetrack.coupler().at(omega)?;
        Ok(CavityPoint {
            sigma: (1.0 - k2).sqrt(),
            kappa: k2.sqrt(),
            eta: self.racetrack.loop_survival(),
            phase: self.racetrack.round_trip_phase(omega)?,
        })
    }
}

/// Response rebuilt from fitted resonances and a known coupler reflectivity.
///
/// Near resonance k the phase is `T_k(ω − ω₀k)` with `T_k` from the local
/// spacing, and η_k follows from inverting the fitted linewidth.
#[derive(Debug, Clone)]
pub struct FittedCavity {
    centres: Vec<f64>,
    times: Vec<f64>,
    etas: Vec<f64>,
    sigma: f64,
}

impl FittedCavity {
    pub fn new(set: &ResonanceSet, sigma: f64) -> Result<Self> {
        if set.len() < 2 {
            return Err(Error::Domain("need at least two resonances to rebuild the cavity".into()));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Domain(format!("sigma must lie in (0, 1), got {sigma}")));
        }
        let mut times = Vec::with_capacity(set.len());
        let mut etas = Vec::with_capacity(set.len());
        for (k, r) in set.resonances().iter().enumerate() {
            let t = 2.0 * PI / set.local_fsr(k);
            let x = product_from_fwhm(r.fwhm, t)?;
            if x > sigma {
                return Err(Error::Domain(format!(
                    "fitted round-trip product {x} exceeds the coupler reflectivity {sigma}"
                )));
            }
            times.push(t);
            etas.push(x / sigma);
        }
        Ok(FittedCavity {
            centres: set.resonances().iter().map(|r| r.omega0).collect(),
            times,
            etas,
            sigma,
        })
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    fn nearest(&self, omega: f64) -> usize {
        let k = self.centres.partition_point(|c| *c < omega);
        if k == 0 {
            0
        } else if k == self.centres.len() || omega - self.centres[k - 1] <= self.centres[k] - omega {
            k - 1
        } else {
            k
        }
    }
}

impl CavityResponse for FittedCavity {
    fn at(&self, omega: f64) -> Result<CavityPoint> {
        let k = self.nearest(omega);
        Ok(CavityPoint {
            sigma: self.sigma,
            kappa: (1.0 - self.sigma * self.sigma).sqrt(),
            eta: self.etas[k],
            phase: self.times[k] * (omega - self.centres[k]),
        })
    }
}

/// Cavity amplitude `κ(ω)κ(ω′)η(ω)J/((1 − σηe^{iφ(ω)})(1 − σ′η′e^{−iφ(ω′)}))`.
///
/// With frequency-flat coupling this is `κ²ηJ/(…)(…)`.
pub fn cavity_factor(s: &CavityPoint, i: &CavityPoint) -> C64 {
    let ds = 1.0 - s.sigma * s.eta * C64::from_polar(1.0, s.phase);
    let di = 1.0 - i.sigma * i.eta * C64::from_polar(1.0, -i.phase);
    s.kappa * i.kappa * s.eta / (ds * di)
}

/// Cavity JSA at one point for a frequency-flat coupling.
pub fn cavity_j(
    section: &NonlinearSection,
    pulse: &PumpPulse,
    coupling: &CavityCoupling,
    omega: f64,
    omega_p: f64,
    phase: f64,
    phase_p: f64,
) -> Result<C64> {
    let j = section.waveguide_j(pulse, omega, omega_p)?;
    Ok(j * cavity_factor(&CavityPoint::from_coupling(coupling, phase), &CavityPoint::from_coupling(coupling, phase_p)))
}

/// Which amplitude a grid holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    WaveguideJ,
    CavityJ,
    /// j/κ: pairs counted inside the cavity
    CavityInternalJ,
}

/// Uniform axis `start + k·step`, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if len == 0 || !(step > 0.0) || !start.is_finite() {
            return Err(Error::Domain(format!("bad axis: start={start}, step={step}, len={len}")));
        }
        Ok(Axis { start, step, len })
    }

    /// `len` points spanning `[lo, hi]` inclusive.
    pub fn spanning(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if len < 2 || !(hi > lo) {
            return Err(Error::Domain(format!("bad axis span [{lo}, {hi}] with {len} points")));
        }
        Axis::new(lo, (hi - lo) / (len - 1) as f64, len)
    }

    /// `len` cell-centred points tiling `[lo, hi)`; suited to periodic
    /// integrands.
    pub fn cells(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if len == 0 || !(hi > lo) {
            return Err(Error::Domain(format!("bad axis span [{lo}, {hi}] with {len} points")));
        }
        let step = (hi - lo) / len as f64;
        Axis::new(lo + 0.5 * step, step, len)
    }

    pub fn at(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.at(k)).collect()
    }

    /// Index of the first sample ≥ `omega` (clamped).
    pub fn index_at_or_after(&self, omega: f64) -> usize {
        (((omega - self.start) / self.step).ceil().max(0.0) as usize).min(self.len)
    }
}

/// Complex joint spectral amplitude on a uniform signal × idler grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    pub signal: Axis,
    pub idler: Axis,
    /// row-major: index `s * idler.len + i`
    pub values: Vec<C64>,
    pub provenance: Provenance,
}

const MAGIC: &[u8; 4] = b"JSAG";
const VERSION: u16 = 1;

impl JsaGrid {
    pub fn new(signal: Axis, idler: Axis, values: Vec<C64>, provenance: Provenance) -> Result<Self> {
        if values.len() != signal.len * idler.len {
            return Err(Error::GridMismatch);
        }
        Ok(JsaGrid { signal, idler, values, provenance })
    }

    pub fn zeros(signal: Axis, idler: Axis, provenance: Provenance) -> Self {
        JsaGrid { signal, idler, values: vec![C64::new(0.0, 0.0); signal.len * idler.len], provenance }
    }

    pub fn get(&self, s: usize, i: usize) -> C64 {
        self.values[s * self.idler.len + i]
    }

    pub fn row(&self, s: usize) -> &[C64] {
        &self.values[s * self.idler.len..(s + 1) * self.idler.len]
    }

    /// Multiply every value by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        JsaGrid { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// `∬ |j|² dω dω′/(2π)²` by the trapezoid rule.
    /// Divide each row by the signal-arm κ, turning a cavity j into j′.
    pub fn to_internal(&self, cavity: &dyn CavityResponse) -> Result<Self> {
        if self.provenance != Provenance::CavityJ {
            return Err(Error::Domain("only a cavity grid can be converted to its internal form".into()));
        }
        let mut values = self.values.clone();
        for s in 0..self.signal.len {
            let k = cavity.at(self.signal.at(s))?.kappa;
            for v in &mut values[s * self.idler.len..(s + 1) * self.idler.len] {
                *v /= k;
            }
        }
        JsaGrid::new(self.signal, self.idler, values, Provenance::CavityInternalJ)
    }

    pub fn integrated_intensity(&self) -> f64 {
        let ws = edge_weights(self.signal.len);
        let wi = edge_weights(self.idler.len);
        let cell = self.signal.step * self.idler.step / (4.0 * PI * PI);
        (0..self.signal.len)
            .into_par_iter()
            .map(|s| ws[s] * self.row(s).iter().zip(&wi).map(|(v, w)| w * v.norm_sqr()).sum::<f64>())
            .collect::<Vec<_>>()
            .iter()
            .sum::<f64>()
            * cell
    }

    /// Little-endian container: magic, version u16, counts u32×2, start/step
    /// f64 for each axis, then interleaved re/im f64 row-major.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for axis in [&self.signal, &self.idler] {
            let n = u32::try_from(axis.len).map_err(|_| Error::Container("axis too long".into()))?;
            w.write_all(&n.to_le_bytes())?;
        }
        for axis in [&self.signal, &self.idler] {
            w.write_all(&axis.start.to_le_bytes())?;
            w.write_all(&axis.step.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read, provenance: Provenance) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Container("bad magic bytes".into()));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != VERSION {
            return Err(Error::Container(format!("unsupported version {version}")));
        }
        let mut b4 = [0u8; 4];
        let mut counts = [0usize; 2];
        for c in &mut counts {
            r.read_exact(&mut b4)?;
            *c = u32::from_le_bytes(b4) as usize;
        }
        let mut b8 = [0u8; 8];
        let mut f = [0.0; 4];
        for v in &mut f {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        let signal = Axis::new(f[0], f[1], counts[0]).map_err(|e| Error::Container(e.to_string()))?;
        let idler = Axis::new(f[2], f[3], counts[1]).map_err(|e| Error::Container(e.to_string()))?;
        let n = counts[0] * counts[1];
        let mut raw = vec![0u8; n * 16];
        r.read_exact(&mut raw).map_err(|_| Error::Container("truncated value block".into()))?;
        let values = raw
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        JsaGrid::new(signal, idler, values, provenance)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path, provenance: Provenance) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_binary(&mut f, provenance)
    }

    /// Plot-ready CSV `signal_THz,idler_THz,abs2,re,im`, keeping every
    /// `stride`-th sample on each axis.
    pub fn write_csv(&self, w: &mut impl Write, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        writeln!(w, "signal_THz,idler_THz,abs2,re,im")?;
        for s in (0..self.signal.len).step_by(stride) {
            for i in (0..self.idler.len).step_by(stride) {
                let v = self.get(s, i);
                writeln!(
                    w,
                    "{:.9},{:.9},{:.9e},{:.9e},{:.9e}",
                    crate::units::omega_to_thz(self.signal.at(s)),
                    crate::units::omega_to_thz(self.idler.at(i)),
                    v.norm_sqr(),
                    v.re,
                    v.im
                )?;
            }
        }
        Ok(())
    }
}

/// Trapezoid end weights: ½ at both ends, 1 inside.
pub(crate) fn edge_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| if n > 1 && (k == 0 || k + 1 == n) { 0.5 } else { 1.0 })
        .collect()
}

/// Evaluate a JSA on the given axes. Rows are computed in parallel; the
/// result does not depend on the worker count.
pub fn jsa_grid(
    section: &NonlinearSection,
    pulse: &PumpPulse,
    cavity: &dyn CavityResponse,
    signal: Axis,
    idler: Axis,
    provenance: Provenance,
) -> Result<JsaGrid> {
    let sig_pts = (0..signal.len)
        .map(|k| cavity.at(signal.at(k)))
        .collect::<Result<Vec<_>>>()?;
    let idl_pts = (0..idler.len)
        .map(|k| cavity.at(idler.at(k)))
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..signal.len)
        .into_par_iter()
        .map(|s| {
            let ws = signal.at(s);
            (0..idler.len)
                .map(|i| {
                    let j = section.waveguide_j(pulse, ws, idler.at(i))?;
                    Ok(match provenance {
                        Provenance::WaveguideJ => j,
                        Provenance::CavityJ => j * cavity_factor(&sig_pts[s], &idl_pts[i]),
                        Provenance::CavityInternalJ => {
                            j * cavity_factor(&sig_pts[s], &idl_pts[i]) / sig_pts[s].kappa
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    JsaGrid::new(signal, idler, rows.concat(), provenance)
}

/// `η_cav²κ⁴/(1 − ησ)⁴`
pub fn ibef(c: &CavityCoupling) -> f64 {
    c.eta_cav().powi(2) * c.kappa2().powi(2) / (1.0 - c.product()).powi(4)
}

/// `η_cav²/(1 − η_cav²η_NL²)²`
pub fn ibef_max(eta_nl: f64, eta_cav: f64) -> f64 {
    let e2 = (eta_nl * eta_cav).powi(2);
    eta_cav * eta_cav / (1.0 - e2).powi(2)
}

/// Closed-form island probability in the cavity, `(κ²η/(T(1−σ²η²)))²|J|²/2`.
pub fn closed_form_pcav(c: &CavityCoupling, round_trip_time: f64, j_max: f64) -> f64 {
    let x = c.product();
    (c.kappa2() * c.eta() / (round_trip_time * (1.0 - x * x))).powi(2) * j_max * j_max / 2.0
}

/// Filtered-waveguide reference, `η_NL²(1−x)²/(T²(1+x)²)·|J|²/2`.
pub fn closed_form_pfwg(c: &CavityCoupling, round_trip_time: f64, j_max: f64) -> f64 {
    let x = c.product();
    c.eta_nl().powi(2) * (1.0 - x).powi(2) / (round_trip_time.powi(2) * (1.0 + x).powi(2)) * j_max * j_max / 2.0
}

/// Relative pair rate versus pump detuning, taken proportional to the
/// intracavity pump power `κ_p² f_pump(δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSweep {
    /// detuning in units of the pump FSR
    pub detuning_fsr: Vec<f64>,
    pub relative_pgr: Vec<f64>,
    /// value at the largest possible detuning, half an FSR
    pub half_fsr_value: f64,
}

pub fn pump_buildup_sweep(kappa_p2: f64, eta_p: f64, detuning_fsr: &[f64]) -> Result<PumpSweep> {
    let c = CavityCoupling::from_kappa2(kappa_p2, 1.0, eta_p)?;
    if !(c.product() < 1.0) {
        return Err(Error::Domain("pump cavity is lossless and closed; buildup diverges".into()));
    }
    let value = |d: f64| kappa_p2 * buildup_at(&c, 2.0 * PI * d);
    Ok(PumpSweep {
        detuning_fsr: detuning_fsr.to_vec(),
        relative_pgr: detuning_fsr.iter().map(|d| value(*d)).collect(),
        half_fsr_value: value(0.5),
    })
}
