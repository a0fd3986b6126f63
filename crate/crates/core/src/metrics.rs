//! Figures of merit computed from joint spectral amplitude grids: marginals,
//! island partition and pair probabilities, Schmidt decomposition, purity and
//! the wavelength-split mode count.

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonances::ResonanceSet;
use crate::spdc::{edge_weights, JsaGrid, PumpPulse, C64};

/// Pairs whose summed centre lies further than this many pump FWHMs from the
/// pump centre are not islands.
pub const PUMP_ENVELOPE_FWHMS: f64 = 4.0;

/// One doubly resonant FSR × FSR cell of the joint spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslandWindow {
    pub index: usize,
    /// resonance indices of the signal and idler centres
    pub signal_resonance: usize,
    pub idler_resonance: usize,
    pub signal_center: f64,
    pub idler_center: f64,
    pub signal_lo: f64,
    pub signal_hi: f64,
    pub idler_lo: f64,
    pub idler_hi: f64,
}

impl IslandWindow {
    pub fn signal_width(&self) -> f64 {
        self.signal_hi - self.signal_lo
    }
    pub fn idler_width(&self) -> f64 {
        self.idler_hi - self.idler_lo
    }
    pub fn is_diagonal(&self) -> bool {
        self.signal_resonance == self.idler_resonance
    }
}

/// Row-wise marginal `⟨n(ω)⟩ = ∫ dω′/2π |j(ω,ω′)|²`.
pub fn marginal_density(grid: &JsaGrid) -> (Vec<f64>, Vec<f64>) {
    let wi = edge_weights(grid.idler.len);
    let scale = grid.idler.step / (2.0 * PI);
    let density = (0..grid.signal.len)
        .into_par_iter()
        .map(|s| grid.row(s).iter().zip(&wi).map(|(v, w)| w * v.norm_sqr()).sum::<f64>() * scale)
        .collect();
    (grid.signal.values(), density)
}

/// `∫ dω/2π` of a density sampled on the signal axis.
pub fn integrate_marginal(grid: &JsaGrid, density: &[f64]) -> f64 {
    let ws = edge_weights(grid.signal.len);
    density.iter().zip(&ws).map(|(d, w)| d * w).sum::<f64>() * grid.signal.step / (2.0 * PI)
}

/// Boundaries halfway to each neighbour; the outermost resonances mirror
/// their inner gap.
fn resonance_cells(set: &ResonanceSet) -> Vec<(f64, f64)> {
    let c: Vec<f64> = set.resonances().iter().map(|r| r.omega0).collect();
    let n = c.len();
    (0..n)
        .map(|k| {
            let lo = if k > 0 { 0.5 * (c[k - 1] + c[k]) } else { c[k] - 0.5 * set.local_fsr(k) };
            let hi = if k + 1 < n { 0.5 * (c[k] + c[k + 1]) } else { c[k] + 0.5 * set.local_fsr(k) };
            (lo, hi)
        })
        .collect()
}

/// Islands fully inside the grid whose signal + idler resonance sum lies
/// within four pump FWHMs of the pump centre.
pub fn partition_islands(grid: &JsaGrid, set: &ResonanceSet, pump: &PumpPulse) -> Vec<IslandWindow> {
    if set.len() < 2 {
        return Vec::new();
    }
    let cells = resonance_cells(set);
    let centres: Vec<f64> = set.resonances().iter().map(|r| r.omega0).collect();
    let reach = PUMP_ENVELOPE_FWHMS * pump.fwhm_omega();
    let inside = |lo: f64, hi: f64, axis: &crate::spdc::Axis| {
        let tol = 0.5 * axis.step;
        lo >= axis.start - tol && hi <= axis.end() + tol
    };
    let mut out = Vec::new();
    for (s, &(slo, shi)) in cells.iter().enumerate() {
        if !inside(slo, shi, &grid.signal) {
            continue;
        }
        for (i, &(ilo, ihi)) in cells.iter().enumerate() {
            if (centres[s] + centres[i] - pump.omega0).abs() > reach || !inside(ilo, ihi, &grid.idler) {
                continue;
            }
            out.push(IslandWindow {
                index: out.len(),
                signal_resonance: s,
                idler_resonance: i,
                signal_center: centres[s],
                idler_center: centres[i],
                signal_lo: slo,
                signal_hi: shi,
                idler_lo: ilo,
                idler_hi: ihi,
            });
        }
    }
    out
}

/// Half-open index range of axis samples inside `[lo, hi)`; the final grid
/// sample is kept when it sits on `hi`.
fn axis_range(axis: &crate::spdc::Axis, lo: f64, hi: f64) -> (usize, usize) {
    let tol = 1e-6 * axis.step;
    let a = (((lo - tol - axis.start) / axis.step).ceil().max(0.0) as usize).min(axis.len);
    let mut b = (((hi - tol - axis.start) / axis.step).ceil().max(0.0) as usize).min(axis.len);
    if b == axis.len - 1 && (axis.end() - hi).abs() <= tol {
        b = axis.len;
    }
    (a, b.max(a))
}

fn window_ranges(grid: &JsaGrid, w: &IslandWindow) -> Result<((usize, usize), (usize, usize))> {
    let (s, i) = (&grid.signal, &grid.idler);
    let ok = |lo: f64, hi: f64, a: &crate::spdc::Axis| lo >= a.start - 0.5 * a.step && hi <= a.end() + 0.5 * a.step;
    if !ok(w.signal_lo, w.signal_hi, s) || !ok(w.idler_lo, w.idler_hi, i) {
        return Err(Error::WindowOutOfGrid(w.index));
    }
    Ok((axis_range(s, w.signal_lo, w.signal_hi), axis_range(i, w.idler_lo, w.idler_hi)))
}

/// Pair probability per pulse and the corresponding rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslandPgr {
    pub probability: f64,
    /// Hz
    pub rate: f64,
}

/// `∬ dω dω′/(2π)² |j|²/2` over the window, trapezoid weights of the grid.
pub fn island_pgr(grid: &JsaGrid, window: &IslandWindow, rep_rate: f64) -> Result<IslandPgr> {
    let ((s0, s1), (i0, i1)) = window_ranges(grid, window)?;
    let p = weighted_sum(grid, s0, s1, i0, i1) / 2.0;
    Ok(IslandPgr { probability: p, rate: rep_rate * p })
}

fn weighted_sum(grid: &JsaGrid, s0: usize, s1: usize, i0: usize, i1: usize) -> f64 {
    let ws = edge_weights(grid.signal.len);
    let wi = edge_weights(grid.idler.len);
    let cell = grid.signal.step * grid.idler.step / (4.0 * PI * PI);
    (s0..s1)
        .map(|s| ws[s] * grid.row(s)[i0..i1].iter().zip(&wi[i0..i1]).map(|(v, w)| w * v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        * cell
}

/// Total pair probability `∬ |j|²/2`.
pub fn total_probability(grid: &JsaGrid) -> f64 {
    grid.integrated_intensity() / 2.0
}

/// mean, population standard deviation, min and max
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stats {
            mean,
            stddev: var.sqrt(),
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Per-island figures for the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandReport {
    pub index: usize,
    pub signal_thz: f64,
    pub idler_thz: f64,
    pub probability_internal: f64,
    pub probability_external: f64,
    pub pgr_internal_hz_per_mw: f64,
    pub pgr_external_hz_per_mw: f64,
    pub purity: Option<f64>,
}

/// Sums and brightness over a set of islands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub pgr_internal_hz_per_mw: f64,
    pub pgr_external_hz_per_mw: f64,
    pub per_island_internal: Stats,
    pub per_island_external: Stats,
    /// mean per-island internal rate per GHz of mean linewidth
    pub brightness_per_island_hz_per_mw_per_ghz: f64,
    /// total internal rate per GHz of mean linewidth
    pub brightness_total_hz_per_mw_per_ghz: f64,
}

/// `mean_fwhm_ghz` is the mean resonance FWHM in GHz.
pub fn totals_and_brightness(islands: &[IslandReport], mean_fwhm_ghz: f64) -> Option<Totals> {
    let int: Vec<f64> = islands.iter().map(|i| i.pgr_internal_hz_per_mw).collect();
    let ext: Vec<f64> = islands.iter().map(|i| i.pgr_external_hz_per_mw).collect();
    let per_int = Stats::of(&int)?;
    let per_ext = Stats::of(&ext)?;
    let total_int: f64 = int.iter().sum();
    Some(Totals {
        pgr_internal_hz_per_mw: total_int,
        pgr_external_hz_per_mw: ext.iter().sum(),
        per_island_internal: per_int,
        per_island_external: per_ext,
        brightness_per_island_hz_per_mw_per_ghz: per_int.mean / mean_fwhm_ghz,
        brightness_total_hz_per_mw_per_ghz: total_int / mean_fwhm_ghz,
    })
}

/// Schmidt decomposition of a two-photon amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtResult {
    /// descending, of the quadrature-weighted amplitude
    pub singular_values: Vec<f64>,
    /// normalized weights λ_n
    pub coefficients: Vec<f64>,
    pub schmidt_number: f64,
    pub entropy_nats: f64,
    /// leading signal/idler mode pairs (columns sampled on the grid axes)
    #[serde(skip)]
    pub modes: Vec<(Vec<C64>, Vec<C64>)>,
}

impl SchmidtResult {
    fn from_singular_values(singular_values: Vec<f64>, modes: Vec<(Vec<C64>, Vec<C64>)>) -> Result<Self> {
        let total: f64 = singular_values.iter().map(|s| s * s).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroGrid);
        }
        let coefficients: Vec<f64> = singular_values.iter().map(|s| s * s / total).collect();
        Ok(SchmidtResult {
            schmidt_number: schmidt_number(&coefficients),
            entropy_nats: entropy_nats(&coefficients),
            singular_values,
            coefficients,
            modes,
        })
    }

    pub fn purity(&self) -> f64 {
        1.0 / self.schmidt_number
    }

    pub fn entropy_bits(&self) -> f64 {
        self.entropy_nats / std::f64::consts::LN_2
    }

    /// Decomposition of a state made of disjoint blocks with the given
    /// probability weights: the coefficients are the weighted union.
    pub fn from_blocks(blocks: &[(f64, &SchmidtResult)]) -> Result<Self> {
        let total: f64 = blocks.iter().map(|b| b.0).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroGrid);
        }
        let mut sv: Vec<f64> = blocks
            .iter()
            .flat_map(|(w, r)| r.coefficients.iter().map(move |l| (w / total * l).sqrt()))
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Self::from_singular_values(sv, Vec::new())
    }
}

/// `1/Σλ²`
pub fn schmidt_number(coefficients: &[f64]) -> f64 {
    1.0 / coefficients.iter().map(|l| l * l).sum::<f64>()
}

/// `−Σλ ln λ`
pub fn entropy_nats(coefficients: &[f64]) -> f64 {
    -coefficients.iter().filter(|l| **l > 0.0).map(|l| l * l.ln()).sum::<f64>()
}

fn weighted_matrix(grid: &JsaGrid, s0: usize, s1: usize, i0: usize, i1: usize) -> Mat<C64> {
    let ws = edge_weights(grid.signal.len);
    let wi = edge_weights(grid.idler.len);
    let base = (grid.signal.step * grid.idler.step).sqrt() / (2.0 * PI);
    Mat::from_fn(s1 - s0, i1 - i0, |r, c| {
        let (s, i) = (s0 + r, i0 + c);
        grid.get(s, i) * (base * (ws[s] * wi[i]).sqrt())
    })
}

fn decompose(m: Mat<C64>, n_modes: usize) -> Result<SchmidtResult> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::ZeroGrid);
    }
    if !m.col_iter().any(|c| c.iter().any(|v| v.norm_sqr() > 0.0)) {
        return Err(Error::ZeroGrid);
    }
    if n_modes == 0 {
        let mut sv = m.singular_values().map_err(|_| Error::Svd)?;
        sv.sort_by(|a, b| b.total_cmp(a));
        return SchmidtResult::from_singular_values(sv, Vec::new());
    }
    let svd = m.thin_svd().map_err(|_| Error::Svd)?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = s.dim();
    let sv: Vec<f64> = (0..k).map(|j| s[j].re).collect();
    let modes = (0..n_modes.min(k))
        .map(|j| {
            let a: Vec<C64> = u.col(j).iter().copied().collect();
            let b: Vec<C64> = v.col(j).iter().map(|z| z.conj()).collect();
            (a, b)
        })
        .collect();
    SchmidtResult::from_singular_values(sv, modes)
}

/// SVD of the whole grid with quadrature weights folded into each cell.
pub fn schmidt_decompose(grid: &JsaGrid) -> Result<SchmidtResult> {
    decompose(weighted_matrix(grid, 0, grid.signal.len, 0, grid.idler.len), 0)
}

/// As [`schmidt_decompose`], also returning the leading `n_modes` mode pairs.
pub fn schmidt_decompose_with_modes(grid: &JsaGrid, n_modes: usize) -> Result<SchmidtResult> {
    decompose(weighted_matrix(grid, 0, grid.signal.len, 0, grid.idler.len), n_modes.max(1))
}

/// Decomposition of the island-binned amplitude: one row per signal
/// resonance, one column per idler resonance, entry `√P` of the island.
pub fn frequency_bin_schmidt(windows: &[IslandWindow], weights: &[f64]) -> Result<SchmidtResult> {
    if windows.len() != weights.len() {
        return Err(Error::GridMismatch);
    }
    let mut rows: Vec<usize> = windows.iter().map(|w| w.signal_resonance).collect();
    let mut cols: Vec<usize> = windows.iter().map(|w| w.idler_resonance).collect();
    rows.sort_unstable();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();
    let mut m = Mat::<C64>::zeros(rows.len(), cols.len());
    for (w, p) in windows.iter().zip(weights) {
        let r = rows.binary_search(&w.signal_resonance).unwrap_or_default();
        let c = cols.binary_search(&w.idler_resonance).unwrap_or_default();
        m[(r, c)] = C64::new(p.max(0.0).sqrt(), 0.0);
    }
    decompose(m, 0)
}

/// Schmidt decomposition of the sub-grid inside `window`.
pub fn island_schmidt(grid: &JsaGrid, window: &IslandWindow) -> Result<SchmidtResult> {
    let ((s0, s1), (i0, i1)) = window_ranges(grid, window)?;
    decompose(weighted_matrix(grid, s0, s1, i0, i1), 0)
}

/// `Σλ²` of the decomposition restricted to `window`.
pub fn island_purity(grid: &JsaGrid, window: &IslandWindow) -> Result<f64> {
    Ok(island_schmidt(grid, window)?.purity())
}

/// Headline figures for one source configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReport {
    pub device: Option<String>,
    pub kappa2: f64,
    pub pump_center_thz: f64,
    /// false when the loop phase comes from an approximate bend model
    pub pump_centering_trusted: bool,
    pub average_pump_power_mw: f64,
    pub rep_rate_hz: f64,
    pub resonance_count: usize,
    pub fsr_mean_ghz: Option<f64>,
    pub mean_fwhm_ghz: f64,
    pub mean_q: f64,
    pub island_count: usize,
    pub accessible_island_count: usize,
    pub islands: Vec<IslandReport>,
    pub totals: Option<Totals>,
    pub purity: Option<Stats>,
    /// frequency-bin Schmidt number, one mode per island
    pub schmidt_number: Option<f64>,
    pub entropy_nats: Option<f64>,
    pub k_split: Option<f64>,
    /// union of the resolved intra-island decompositions
    pub schmidt_number_continuous: Option<f64>,
    pub entropy_nats_continuous: Option<f64>,
    /// external pair probability per pulse on the full grid
    pub total_probability_external: f64,
    /// share of the full-grid probability outside every island
    pub residual_fraction: Option<f64>,
    pub notes: Vec<String>,
}

impl SourceReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Plain-text summary with units.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let opt = |v: Option<f64>, prec: usize| v.map_or("n/a".to_string(), |v| format!("{v:.prec$}"));
        let mut o = String::new();
        let _ = writeln!(o, "device: {}", self.device.as_deref().unwrap_or("(unnamed)"));
        let _ = writeln!(o, "coupler kappa^2: {}", self.kappa2);
        let _ = writeln!(
            o,
            "pump: {:.6} THz, {:.4} mW average, {:.1} MHz repetition{}",
            self.pump_center_thz,
            self.average_pump_power_mw,
            self.rep_rate_hz / 1e6,
            if self.pump_centering_trusted { "" } else { " (centering from approximate bend phase)" }
        );
        let _ = writeln!(
            o,
            "resonances: {}, mean FSR {} GHz, mean FWHM {:.4} GHz, mean Q {:.4e}",
            self.resonance_count,
            opt(self.fsr_mean_ghz, 4),
            self.mean_fwhm_ghz,
            self.mean_q
        );
        let _ = writeln!(o, "islands: {} ({} accessible after wavelength split)", self.island_count, self.accessible_island_count);
        if let Some(t) = &self.totals {
            let _ = writeln!(
                o,
                "total pair rate: {:.4} MHz/mW internal, {:.4} MHz/mW external",
                t.pgr_internal_hz_per_mw / 1e6,
                t.pgr_external_hz_per_mw / 1e6
            );
            let _ = writeln!(
                o,
                "per-island internal rate: mean {:.4} MHz/mW, std {:.4} MHz/mW, min {:.4}, max {:.4}",
                t.per_island_internal.mean / 1e6,
                t.per_island_internal.stddev / 1e6,
                t.per_island_internal.min / 1e6,
                t.per_island_internal.max / 1e6
            );
            let _ = writeln!(
                o,
                "per-island external rate: mean {:.4} MHz/mW, std {:.4} MHz/mW",
                t.per_island_external.mean / 1e6,
                t.per_island_external.stddev / 1e6
            );
            let _ = writeln!(
                o,
                "brightness: {:.4} MHz/mW/GHz per island, {:.4} MHz/mW/GHz over all islands",
                t.brightness_per_island_hz_per_mw_per_ghz / 1e6,
                t.brightness_total_hz_per_mw_per_ghz / 1e6
            );
        }
        if let Some(p) = &self.purity {
            let _ = writeln!(o, "island purity: mean {:.5}, std {:.3e}", p.mean, p.stddev);
        }
        let _ = writeln!(
            o,
            "frequency-bin Schmidt number K: {}, entropy {} nats, K after wavelength split: {}",
            opt(self.schmidt_number, 3),
            opt(self.entropy_nats, 4),
            opt(self.k_split, 3)
        );
        let _ = writeln!(
            o,
            "continuous Schmidt number (islands resolved): {}, entropy {} nats",
            opt(self.schmidt_number_continuous, 3),
            opt(self.entropy_nats_continuous, 4)
        );
        let _ = writeln!(
            o,
            "pair probability per pulse (external, full grid): {:.5e}, outside islands: {}",
            self.total_probability_external,
            opt(self.residual_fraction.map(|r| 100.0 * r), 3) + " %"
        );
        for n in &self.notes {
            let _ = writeln!(o, "note: {n}");
        }
        o
    }
}

/// Mode count after treating mirrored islands as one logical pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub accessible_count: usize,
    pub k_split: f64,
}

/// Fold each island onto its mirror about ω_s = ω_i, summing their
/// probability weights, and recompute K over the folded weights.
pub fn fold_mirrored(windows: &[IslandWindow], weights: &[f64]) -> Result<SplitMetrics> {
    if windows.len() != weights.len() {
        return Err(Error::GridMismatch);
    }
    let mut used = vec![false; windows.len()];
    let mut folded = Vec::new();
    for (k, w) in windows.iter().enumerate() {
        if used[k] {
            continue;
        }
        let mirror = windows
            .iter()
            .position(|m| m.signal_resonance == w.idler_resonance && m.idler_resonance == w.signal_resonance)
            .ok_or(Error::AsymmetricWindows(w.index))?;
        used[k] = true;
        let mut weight = weights[k];
        if mirror != k {
            used[mirror] = true;
            weight += weights[mirror];
        }
        folded.push(weight);
    }
    if folded.is_empty() {
        return Ok(SplitMetrics { accessible_count: 0, k_split: 0.0 });
    }
    let total: f64 = folded.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroGrid);
    }
    let lambdas: Vec<f64> = folded.iter().map(|w| w / total).collect();
    Ok(SplitMetrics { accessible_count: folded.len(), k_split: schmidt_number(&lambdas) })
}

/// [`fold_mirrored`] with island weights integrated from `grid`.
pub fn wavelength_split_metrics(grid: &JsaGrid, windows: &[IslandWindow]) -> Result<SplitMetrics> {
    let weights = windows
        .iter()
        .map(|w| island_pgr(grid, w, 1.0).map(|p| p.probability))
        .collect::<Result<Vec<_>>>()?;
    fold_mirrored(windows, &weights)
}
