//! Frequency-domain photonic circuit elements and the racetrack all-pass
//! response.
//!
//! The racetrack is reduced to three per-frequency quantities: the coupler
//! reflectivity σ, the round-trip amplitude survival η and the round-trip
//! phase βL. Everything downstream (fitting, JSA, buildup) consumes those.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::{angle_interpolated_index, BendSegment, DispersionModel};
use crate::error::{Error, Result};
use crate::units::C;

pub type C64 = Complex64;
type Mat2 = [[C64; 2]; 2];

const FLAG_TOL: f64 = 1e-10;

/// Frequency-sampled scattering matrix of a two-port element.
#[derive(Debug, Clone)]
pub struct SParamBlock {
    omega: Arc<[f64]>,
    s: Vec<Mat2>,
    reciprocal: bool,
    lossless: bool,
    phase_trusted: bool,
}

impl SParamBlock {
    /// Build a block, checking the grid and any declared symmetry flags.
    pub fn new(omega: Arc<[f64]>, s: Vec<Mat2>, reciprocal: bool, lossless: bool) -> Result<Self> {
        if omega.is_empty() || omega.len() != s.len() {
            return Err(Error::GridMismatch);
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("frequency grid must be strictly increasing".into()));
        }
        for (k, m) in s.iter().enumerate() {
            if reciprocal && (m[0][1] - m[1][0]).norm() > FLAG_TOL {
                return Err(Error::Domain(format!("block flagged reciprocal but S12 != S21 at index {k}")));
            }
            if lossless && unitarity_error(m) > FLAG_TOL {
                return Err(Error::Domain(format!("block flagged lossless but S is not unitary at index {k}")));
            }
        }
        Ok(SParamBlock {
            omega,
            s,
            reciprocal,
            lossless,
            phase_trusted: true,
        })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn grid(&self) -> Arc<[f64]> {
        self.omega.clone()
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn matrix(&self, k: usize) -> Mat2 {
        self.s[k]
    }

    pub fn s21(&self, k: usize) -> C64 {
        self.s[k][1][0]
    }

    pub fn s12(&self, k: usize) -> C64 {
        self.s[k][0][1]
    }

    pub fn s11(&self, k: usize) -> C64 {
        self.s[k][0][0]
    }

    pub fn is_reciprocal(&self) -> bool {
        self.reciprocal
    }

    pub fn is_lossless(&self) -> bool {
        self.lossless
    }

    /// False when the phase came from an approximation that is only trusted
    /// for amplitudes (segmented bends).
    pub fn phase_trusted(&self) -> bool {
        self.phase_trusted
    }

    fn with_phase_trusted(mut self, trusted: bool) -> Self {
        self.phase_trusted = trusted;
        self
    }

    /// Largest deviation of any column norm from one.
    pub fn max_column_norm_error(&self) -> f64 {
        self.s
            .iter()
            .flat_map(|m| {
                (0..2).map(move |j| ((m[0][j].norm_sqr() + m[1][j].norm_sqr()).sqrt() - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }
}

fn unitarity_error(m: &Mat2) -> f64 {
    let mut err: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let dot = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((dot - target).norm());
        }
    }
    err
}

/// Reflectionless two-port with through transmission `t` at each grid point.
fn through_block(omega: Arc<[f64]>, t: Vec<C64>, lossless: bool) -> Result<SParamBlock> {
    let s = t
        .into_iter()
        .map(|t| [[C64::new(0.0, 0.0), t], [t, C64::new(0.0, 0.0)]])
        .collect();
    SParamBlock::new(omega, s, true, lossless)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty frequency grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("frequency grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Directional coupler as a mode-mapping block: (bus_in, ring_in) →
/// (bus_out, ring_out) with `S = [[σ, iκ], [iκ, σ]]`.
pub fn coupler_block(kappa2: f64, grid: Arc<[f64]>) -> Result<SParamBlock> {
    coupler_block_with(&KappaCurve::Constant(kappa2), grid)
}

pub fn coupler_block_with(curve: &KappaCurve, grid: Arc<[f64]>) -> Result<SParamBlock> {
    check_grid(&grid)?;
    let s = grid
        .iter()
        .map(|&w| {
            let k2 = curve.at(w)?;
            let sigma = C64::new((1.0 - k2).sqrt(), 0.0);
            let cross = C64::new(0.0, k2.sqrt());
            Ok([[sigma, cross], [cross, sigma]])
        })
        .collect::<Result<Vec<_>>>()?;
    SParamBlock::new(grid, s, true, true)
}

/// Amplitude survival `10^(−α·L/20)` for a loss in dB/m over length `L`.
pub fn amplitude_survival(loss_db_per_m: f64, length: f64) -> f64 {
    10f64.powf(-loss_db_per_m * length / 20.0)
}

/// Straight waveguide section: through = `10^(−αL/20)·exp(iβ(ω)L)`.
pub fn waveguide_block(
    length: f64,
    model: &DispersionModel,
    loss_db_per_m: f64,
    grid: Arc<[f64]>,
) -> Result<SParamBlock> {
    if !(length > 0.0) {
        return Err(Error::Domain(format!("waveguide length must be positive, got {length}")));
    }
    if !(loss_db_per_m >= 0.0) {
        return Err(Error::Domain(format!("loss must be non-negative, got {loss_db_per_m}")));
    }
    check_grid(&grid)?;
    let amp = amplitude_survival(loss_db_per_m, length);
    let t = grid
        .iter()
        .map(|&w| Ok(C64::from_polar(amp, model.beta(w)? * length)))
        .collect::<Result<Vec<_>>>()?;
    through_block(grid, t, loss_db_per_m == 0.0)
}

/// Bend approximated by a chain of straight segments whose index follows the
/// local tangent angle. Amplitudes are reliable; the phase is flagged
/// untrusted.
pub fn segmented_bend_block(
    segments: &[BendSegment],
    ordinary: &DispersionModel,
    extraordinary: &DispersionModel,
    loss_db_per_m: f64,
    grid: Arc<[f64]>,
) -> Result<SParamBlock> {
    if segments.is_empty() {
        return Err(Error::Domain("segmented bend needs at least one segment".into()));
    }
    check_grid(&grid)?;
    let blocks = segments
        .iter()
        .map(|seg| {
            let amp = amplitude_survival(loss_db_per_m, seg.length);
            let t = grid
                .iter()
                .map(|&w| {
                    let n = angle_interpolated_index(ordinary.n_eff(w)?, extraordinary.n_eff(w)?, seg.tangent_angle);
                    Ok(C64::from_polar(amp, n * w * seg.length / C))
                })
                .collect::<Result<Vec<_>>>()?;
            through_block(grid.clone(), t, loss_db_per_m == 0.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cascade(&blocks)?.with_phase_trusted(false))
}

fn s_to_t(s: &Mat2, k: usize) -> Result<Mat2> {
    let [[s11, s12], [s21, s22]] = *s;
    if s21.norm() == 0.0 {
        return Err(Error::Singular(k));
    }
    let inv = s21.inv();
    Ok([[inv, -s22 * inv], [s11 * inv, (s12 * s21 - s11 * s22) * inv]])
}

fn t_to_s(t: &Mat2, k: usize) -> Result<Mat2> {
    let [[t11, t12], [t21, t22]] = *t;
    if t11.norm() == 0.0 {
        return Err(Error::Singular(k));
    }
    let inv = t11.inv();
    Ok([[t21 * inv, t22 - t21 * t12 * inv], [inv, -t12 * inv]])
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Chain two-ports port 2 → port 1 in list order via transfer matrices.
pub fn cascade(blocks: &[SParamBlock]) -> Result<SParamBlock> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::Domain("cannot cascade an empty block list".into()))?;
    if blocks.len() == 1 {
        return Ok(first.clone());
    }
    for b in &blocks[1..] {
        if b.omega.len() != first.omega.len()
            || !(Arc::ptr_eq(&b.omega, &first.omega) || *b.omega == *first.omega)
        {
            return Err(Error::GridMismatch);
        }
    }
    let s = (0..first.len())
        .map(|k| {
            let mut t = s_to_t(&blocks[0].s[k], k)?;
            for b in &blocks[1..] {
                t = mat_mul(&t, &s_to_t(&b.s[k], k)?);
            }
            t_to_s(&t, k)
        })
        .collect::<Result<Vec<_>>>()?;
    // Flags describe the physics, but the composed numbers carry rounding, so
    // skip re-validation at the 10⁻¹⁰ level by building the block directly.
    Ok(SParamBlock {
        omega: first.omega.clone(),
        s,
        reciprocal: blocks.iter().all(|b| b.reciprocal),
        lossless: blocks.iter().all(|b| b.lossless),
        phase_trusted: blocks.iter().all(|b| b.phase_trusted),
    })
}

/// Coupler reflectivity and round-trip survival of a single-bus cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityCoupling {
    sigma: f64,
    kappa: f64,
    eta_nl: f64,
    eta_cav: f64,
}

impl CavityCoupling {
    /// `sigma` is the amplitude reflectivity; `eta_nl` and `eta_cav` the
    /// amplitude survival of the nonlinear section and of the rest of the loop.
    pub fn new(sigma: f64, eta_nl: f64, eta_cav: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(Error::Domain(format!("sigma must lie in [0, 1], got {sigma}")));
        }
        for (name, v) in [("eta_nl", eta_nl), ("eta_cav", eta_cav)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(CavityCoupling {
            sigma,
            kappa: (1.0 - sigma * sigma).sqrt(),
            eta_nl,
            eta_cav,
        })
    }

    /// Coupling from the single-pass power cross-coupling κ².
    pub fn from_kappa2(kappa2: f64, eta_nl: f64, eta_cav: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa2) {
            return Err(Error::Domain(format!("kappa^2 must lie in [0, 1], got {kappa2}")));
        }
        Self::new((1.0 - kappa2).sqrt(), eta_nl, eta_cav)
    }

    /// Lumped round-trip survival with no nonlinear-section split.
    pub fn lumped(sigma: f64, eta: f64) -> Result<Self> {
        Self::new(sigma, 1.0, eta)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn kappa2(&self) -> f64 {
        self.kappa * self.kappa
    }
    pub fn eta_nl(&self) -> f64 {
        self.eta_nl
    }
    pub fn eta_cav(&self) -> f64 {
        self.eta_cav
    }
    pub fn eta(&self) -> f64 {
        self.eta_nl * self.eta_cav
    }
    /// Round-trip product ση.
    pub fn product(&self) -> f64 {
        self.sigma * self.eta()
    }
}

/// All-pass response `h = −e^{iφ}(η − σe^{−iφ})/(1 − σηe^{iφ})` at one phase.
pub fn h_at(c: &CavityCoupling, phase: f64) -> C64 {
    let e = C64::from_polar(1.0, phase);
    let (s, eta) = (c.sigma(), c.eta());
    -e * (eta - s * e.conj()) / (1.0 - s * eta * e)
}

pub fn racetrack_h(c: &CavityCoupling, phases: &[f64]) -> Vec<C64> {
    phases.iter().map(|&p| h_at(c, p)).collect()
}

/// Filter function `1/|1 − σηe^{iφ}|²`.
pub fn buildup_at(c: &CavityCoupling, phase: f64) -> f64 {
    1.0 / (1.0 - c.product() * C64::from_polar(1.0, phase)).norm_sqr()
}

/// The same filter written through the finesse:
/// `1/(1−ησ)² · 1/(1 + (2F/π)² sin²(φ/2))`.
pub fn buildup_airy_at(c: &CavityCoupling, phase: f64) -> f64 {
    let x = c.product();
    let f = crate::resonances::finesse_of_product(x);
    let s = (phase / 2.0).sin();
    1.0 / ((1.0 - x) * (1.0 - x)) / (1.0 + (2.0 * f / PI).powi(2) * s * s)
}

pub fn buildup_factor(c: &CavityCoupling, phases: &[f64]) -> Vec<f64> {
    phases.iter().map(|&p| buildup_at(c, p)).collect()
}

/// Power cross-coupling versus frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaCurve {
    Constant(f64),
    /// Linear interpolation between samples; no extrapolation.
    Table { omega: Vec<f64>, kappa2: Vec<f64> },
}

impl KappaCurve {
    pub fn table(omega: Vec<f64>, kappa2: Vec<f64>) -> Result<Self> {
        if omega.len() != kappa2.len() || omega.len() < 2 {
            return Err(Error::Domain("coupling table needs at least two matched samples".into()));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("coupling table frequencies must increase".into()));
        }
        if let Some(v) = kappa2.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("kappa^2 {v} outside [0, 1]")));
        }
        Ok(KappaCurve::Table { omega, kappa2 })
    }

    pub fn at(&self, omega: f64) -> Result<f64> {
        match self {
            KappaCurve::Constant(k2) => {
                if (0.0..=1.0).contains(k2) {
                    Ok(*k2)
                } else {
                    Err(Error::Domain(format!("kappa^2 must lie in [0, 1], got {k2}")))
                }
            }
            KappaCurve::Table { omega: xs, kappa2 } => {
                let (lo, hi) = (xs[0], *xs.last().unwrap());
                if omega < lo || omega > hi {
                    return Err(Error::OutOfRange { omega, min: lo, max: hi });
                }
                let k = xs.partition_point(|v| *v <= omega).clamp(1, xs.len() - 1);
                let t = (omega - xs[k - 1]) / (xs[k] - xs[k - 1]);
                Ok(kappa2[k - 1] + t * (kappa2[k] - kappa2[k - 1]))
            }
        }
    }
}

/// One element of the racetrack loop, in propagation order after the coupler.
#[derive(Debug, Clone)]
pub enum LoopElement {
    Waveguide {
        name: String,
        length: f64,
        model: Arc<DispersionModel>,
        loss_db_per_m: f64,
        /// The periodically poled section.
        poled: bool,
    },
    Bend {
        name: String,
        segments: Vec<BendSegment>,
        ordinary: Arc<DispersionModel>,
        extraordinary: Arc<DispersionModel>,
        loss_db_per_m: f64,
    },
    LumpedLoss {
        name: String,
        loss_db: f64,
    },
}

impl LoopElement {
    pub fn name(&self) -> &str {
        match self {
            LoopElement::Waveguide { name, .. }
            | LoopElement::Bend { name, .. }
            | LoopElement::LumpedLoss { name, .. } => name,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            LoopElement::Waveguide { length, .. } => *length,
            LoopElement::Bend { segments, .. } => segments.iter().map(|s| s.length).sum(),
            LoopElement::LumpedLoss { .. } => 0.0,
        }
    }

    fn block(&self, grid: Arc<[f64]>) -> Result<SParamBlock> {
        match self {
            LoopElement::Waveguide { length, model, loss_db_per_m, .. } => {
                waveguide_block(*length, model, *loss_db_per_m, grid)
            }
            LoopElement::Bend { segments, ordinary, extraordinary, loss_db_per_m, .. } => {
                segmented_bend_block(segments, ordinary, extraordinary, *loss_db_per_m, grid)
            }
            LoopElement::LumpedLoss { loss_db, .. } => {
                let amp = 10f64.powf(-loss_db / 20.0);
                let n = grid.len();
                through_block(grid, vec![C64::new(amp, 0.0); n], *loss_db == 0.0)
            }
        }
    }

    /// Unwrapped single-pass phase at `omega`.
    fn phase(&self, omega: f64) -> Result<f64> {
        match self {
            LoopElement::Waveguide { length, model, .. } => Ok(model.beta(omega)? * length),
            LoopElement::Bend { segments, ordinary, extraordinary, .. } => {
                let (n1, n2) = (ordinary.n_eff(omega)?, extraordinary.n_eff(omega)?);
                Ok(segments
                    .iter()
                    .map(|s| angle_interpolated_index(n1, n2, s.tangent_angle) * omega * s.length / C)
                    .sum())
            }
            LoopElement::LumpedLoss { .. } => Ok(0.0),
        }
    }

    fn survival(&self) -> f64 {
        match self {
            LoopElement::Waveguide { length, loss_db_per_m, .. } => amplitude_survival(*loss_db_per_m, *length),
            LoopElement::Bend { segments, loss_db_per_m, .. } => {
                amplitude_survival(*loss_db_per_m, segments.iter().map(|s| s.length).sum())
            }
            LoopElement::LumpedLoss { loss_db, .. } => 10f64.powf(-loss_db / 20.0),
        }
    }
}

/// σ, η and round-trip phase at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopResponse {
    pub sigma: f64,
    pub eta: f64,
    /// arg of the loop transmission, in (−π, π]
    pub phase: f64,
}

/// Single-bus racetrack: one coupler followed by the loop elements.
#[derive(Debug, Clone)]
pub struct Racetrack {
    coupler_name: String,
    coupler: KappaCurve,
    elements: Vec<LoopElement>,
}

impl Racetrack {
    pub fn new(coupler_name: impl Into<String>, coupler: KappaCurve, elements: Vec<LoopElement>) -> Result<Self> {
        let coupler_name = coupler_name.into();
        if elements.is_empty() {
            return Err(Error::MalformedNetlist("the loop has no elements after the coupler".into()));
        }
        let mut names = vec![coupler_name.as_str()];
        for e in &elements {
            if names.contains(&e.name()) {
                return Err(Error::MalformedNetlist(format!("duplicate component name `{}`", e.name())));
            }
            names.push(e.name());
        }
        let poled = elements
            .iter()
            .filter(|e| matches!(e, LoopElement::Waveguide { poled: true, .. }))
            .count();
        if poled > 1 {
            return Err(Error::MalformedNetlist("more than one poled section".into()));
        }
        if !(elements.iter().map(LoopElement::length).sum::<f64>() > 0.0) {
            return Err(Error::MalformedNetlist("the loop has zero length".into()));
        }
        Ok(Racetrack { coupler_name, coupler, elements })
    }

    pub fn coupler_name(&self) -> &str {
        &self.coupler_name
    }

    pub fn coupler(&self) -> &KappaCurve {
        &self.coupler
    }

    pub fn elements(&self) -> &[LoopElement] {
        &self.elements
    }

    pub fn with_coupler(&self, coupler: KappaCurve) -> Self {
        Racetrack { coupler, ..self.clone() }
    }

    pub fn round_trip_length(&self) -> f64 {
        self.elements.iter().map(LoopElement::length).sum()
    }

    pub fn poled_section(&self) -> Option<&LoopElement> {
        self.elements
            .iter()
            .find(|e| matches!(e, LoopElement::Waveguide { poled: true, .. }))
    }

    /// Amplitude survival of the poled section alone (1 if there is none).
    pub fn nonlinear_survival(&self) -> f64 {
        self.poled_section().map_or(1.0, LoopElement::survival)
    }

    /// Amplitude survival around the whole loop.
    pub fn loop_survival(&self) -> f64 {
        self.elements.iter().map(LoopElement::survival).product()
    }

    /// Loop transmission as a cascaded block.
    pub fn loop_block(&self, grid: Arc<[f64]>) -> Result<SParamBlock> {
        let blocks = self
            .elements
            .iter()
            .map(|e| e.block(grid.clone()))
            .collect::<Result<Vec<_>>>()?;
        cascade(&blocks)
    }

    pub fn response(&self, grid: Arc<[f64]>) -> Result<Vec<LoopResponse>> {
        let coupler = coupler_block_with(&self.coupler, grid.clone())?;
        let lp = self.loop_block(grid)?;
        Ok((0..lp.len())
            .map(|k| {
                let t = lp.s21(k);
                LoopResponse {
                    sigma: coupler.s11(k).re,
                    eta: t.norm(),
                    phase: t.arg(),
                }
            })
            .collect())
    }

    /// Unwrapped round-trip phase Σβ_iL_i at `omega`.
    pub fn round_trip_phase(&self, omega: f64) -> Result<f64> {
        self.elements.iter().map(|e| e.phase(omega)).sum()
    }

    /// Round-trip group delay dΦ/dω by centered difference.
    pub fn round_trip_time(&self, omega: f64) -> Result<f64> {
        let h = omega * 1e-7;
        Ok((self.round_trip_phase(omega + h)? - self.round_trip_phase(omega - h)?) / (2.0 * h))
    }

    /// Resonance nearest to `omega`: the solution of Φ(ω) = 2πm with m
    /// rounded from Φ(omega)/2π.
    pub fn resonance_near(&self, omega: f64) -> Result<f64> {
        let m = (self.round_trip_phase(omega)? / (2.0 * PI)).round();
        self.solve_phase(omega, 2.0 * PI * m)
    }

    /// All resonances in `[lo, hi]`, ascending.
    pub fn resonances_in(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let m_lo = (self.round_trip_phase(lo)? / (2.0 * PI)).ceil() as i64;
        let m_hi = (self.round_trip_phase(hi)? / (2.0 * PI)).floor() as i64;
        let mut guess = lo;
        let mut out = Vec::new();
        for m in m_lo..=m_hi {
            let w = self.solve_phase(guess, 2.0 * PI * m as f64)?;
            out.push(w);
            guess = w;
        }
        Ok(out)
    }

    /// Pump centre near `omega_guess` that puts ω_p/2 exactly halfway between
    /// two signal resonances (Φ(ω_p/2) = (2m+1)π).
    pub fn centered_pump(&self, omega_guess: f64) -> Result<f64> {
        let half = omega_guess / 2.0;
        let m = ((self.round_trip_phase(half)? / PI - 1.0) / 2.0).round();
        Ok(2.0 * self.solve_phase(half, (2.0 * m + 1.0) * PI)?)
    }

    fn solve_phase(&self, guess: f64, target: f64) -> Result<f64> {
        let mut w = guess;
        for _ in 0..50 {
            let f = self.round_trip_phase(w)? - target;
            let step = f / self.round_trip_time(w)?;
            w -= step;
            if step.abs() < 1e-13 * w {
                return Ok(w);
            }
        }
        Err(Error::NoSolution(format!("round-trip phase did not converge to {target}")))
    }

    /// |h(ω)|² across `grid`.
    pub fn transmission(&self, grid: Arc<[f64]>) -> Result<Vec<f64>> {
        let resp = self.response(grid)?;
        resp.par_iter()
            .map(|r| {
                let c = CavityCoupling::lumped(r.sigma, r.eta.min(1.0))?;
                Ok(h_at(&c, r.phase).norm_sqr())
            })
            .collect()
    }
}

/// Power transmission spectrum of a racetrack netlist.
pub fn transmission_spectrum(netlist: &Racetrack, grid: Arc<[f64]>) -> Result<Vec<f64>> {
    netlist.transmission(grid)
}
