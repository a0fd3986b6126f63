//! Resonance detection, Lorentzian fitting and the analytic linewidth and
//! finesse relations of a single-bus cavity.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::CavityCoupling;
use crate::error::{Error, Result};

/// Default detection threshold, as a fraction of full-scale transmission.
pub const DEFAULT_PROMINENCE: f64 = 1e-3;
const MAX_ITER: usize = 200;
const STEP_TOL: f64 = 1e-10;
const RESIDUAL_WARN: f64 = 1e-2;
const WINDOW_HALF_FSR: f64 = 0.4;
/// Dips this close to full extinction are treated as critically coupled.
const CRITICAL_DEPTH_TOL: f64 = 1e-3;

/// One fitted Lorentzian dip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    /// centre, rad/s
    pub omega0: f64,
    /// full width at half depth, rad/s
    pub fwhm: f64,
    pub q: f64,
    /// fractional extinction on resonance
    pub depth: f64,
    /// rms misfit over the fit window
    pub residual: f64,
}

impl Resonance {
    pub fn new(omega0: f64, fwhm: f64, depth: f64, residual: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !(omega0 > 0.0) {
            return Err(Error::Domain(format!("resonance needs positive centre and width, got {omega0}, {fwhm}")));
        }
        Ok(Resonance {
            omega0,
            fwhm,
            q: omega0 / fwhm,
            depth: depth.clamp(0.0, 1.0),
            residual,
        })
    }
}

/// Resonances ordered by centre frequency plus FSR statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    resonances: Vec<Resonance>,
    fsr_list: Vec<f64>,
    fsr_mean: f64,
}

impl ResonanceSet {
    pub fn new(mut resonances: Vec<Resonance>) -> Result<Self> {
        if resonances.is_empty() {
            return Err(Error::NoResonances);
        }
        resonances.sort_by(|a, b| a.omega0.total_cmp(&b.omega0));
        let fsr_list: Vec<f64> = resonances.windows(2).map(|w| w[1].omega0 - w[0].omega0).collect();
        if fsr_list.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Domain("duplicate resonance centres".into()));
        }
        let fsr_mean = if fsr_list.is_empty() {
            f64::NAN
        } else {
            fsr_list.iter().sum::<f64>() / fsr_list.len() as f64
        };
        Ok(ResonanceSet { resonances, fsr_list, fsr_mean })
    }

    pub fn resonances(&self) -> &[Resonance] {
        &self.resonances
    }
    pub fn len(&self) -> usize {
        self.resonances.len()
    }
    pub fn is_empty(&self) -> bool {
        self.resonances.is_empty()
    }
    pub fn fsr_list(&self) -> &[f64] {
        &self.fsr_list
    }
    /// Mean spacing, rad/s. NaN for a single resonance.
    pub fn fsr_mean(&self) -> f64 {
        self.fsr_mean
    }

    pub fn mean_fwhm(&self) -> f64 {
        self.resonances.iter().map(|r| r.fwhm).sum::<f64>() / self.len() as f64
    }

    pub fn mean_q(&self) -> f64 {
        self.resonances.iter().map(|r| r.q).sum::<f64>() / self.len() as f64
    }

    /// Local spacing around resonance `k`: mean of the adjacent gaps.
    pub fn local_fsr(&self, k: usize) -> f64 {
        let n = self.fsr_list.len();
        match (k.checked_sub(1).map(|j| self.fsr_list[j]), self.fsr_list.get(k)) {
            (Some(a), Some(b)) if k < n => 0.5 * (a + b),
            (Some(a), _) => a,
            (None, Some(b)) => *b,
            (None, None) => f64::NAN,
        }
    }

    /// Index of the resonance closest to `omega`.
    pub fn nearest(&self, omega: f64) -> usize {
        let k = self.resonances.partition_point(|r| r.omega0 < omega);
        if k == 0 {
            0
        } else if k == self.len() || omega - self.resonances[k - 1].omega0 <= self.resonances[k].omega0 - omega {
            k - 1
        } else {
            k
        }
    }
}

/// Seed for one dip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub omega: f64,
    pub depth: f64,
    /// half-max full width estimate, rad/s
    pub width: f64,
}

/// Local minima deeper than `prominence` below unity, with a half-max width
/// estimate. Minima inside the half-max span of a deeper one are merged.
/// An empty list is a valid outcome.
pub fn detect_resonances(omega: &[f64], power: &[f64], prominence: f64) -> Result<Vec<Candidate>> {
    if omega.len() != power.len() {
        return Err(Error::GridMismatch);
    }
    if omega.len() < 16 {
        return Err(Error::Domain(format!("need at least 16 spectrum samples, got {}", omega.len())));
    }
    if omega.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("spectrum frequencies must increase".into()));
    }
    if let Some(p) = power.iter().find(|p| !(**p >= 0.0 && **p <= 1.0 + 1e-6)) {
        return Err(Error::Domain(format!("power transmission {p} outside [0, 1]")));
    }
    let n = power.len();
    let floor = 1.0 - prominence;
    let mut raw = Vec::new();
    for k in 0..n {
        let p = power[k];
        if p >= floor {
            continue;
        }
        let left_ok = k == 0 || power[k - 1] > p;
        let right_ok = k + 1 == n || power[k + 1] >= p;
        if left_ok && right_ok {
            let half = 0.5 * (1.0 + p);
            let mut lo = k;
            while lo > 0 && power[lo] < half {
                lo -= 1;
            }
            let mut hi = k;
            while hi + 1 < n && power[hi] < half {
                hi += 1;
            }
            let width = (crossing(omega, power, hi, half) - crossing(omega, power, lo, half)).abs();
            let width = if width > 0.0 { width } else { omega[(k + 1).min(n - 1)] - omega[k.saturating_sub(1)] };
            raw.push((Candidate { index: k, omega: omega[k], depth: 1.0 - p, width }, lo, hi));
        }
    }
    raw.sort_by(|a, b| b.0.depth.total_cmp(&a.0.depth).then(a.0.index.cmp(&b.0.index)));
    let mut kept: Vec<(Candidate, usize, usize)> = Vec::new();
    for c in raw {
        if kept.iter().all(|k| c.0.index < k.1 || c.0.index > k.2) {
            kept.push(c);
        }
    }
    let mut out: Vec<Candidate> = kept.into_iter().map(|c| c.0).collect();
    out.sort_by_key(|c| c.index);
    Ok(out)
}

/// Linear crossing of `level` between sample `k` and its inner neighbour.
fn crossing(omega: &[f64], power: &[f64], k: usize, level: f64) -> f64 {
    let neighbours = [k.wrapping_sub(1), k + 1];
    for j in neighbours {
        if j < power.len() && (power[j] - level) * (power[k] - level) <= 0.0 && power[j] != power[k] {
            let t = (level - power[k]) / (power[j] - power[k]);
            return omega[k] + t * (omega[j] - omega[k]);
        }
    }
    omega[k]
}

/// Lorentzian dip model `1 − Σ d·(Γ/2)²/((ω−ω₀)² + (Γ/2)²)`.
pub fn lorentzian_comb(omega: f64, dips: &[Resonance]) -> f64 {
    1.0 - dips
        .iter()
        .map(|r| {
            let h2 = 0.25 * r.fwhm * r.fwhm;
            r.depth * h2 / ((omega - r.omega0).powi(2) + h2)
        })
        .sum::<f64>()
}

/// Windowed damped least-squares fit of Lorentzian dips.
///
/// Candidates whose ±0.4·FSR windows overlap are fitted jointly. Diverged
/// fits are dropped with a warning.
pub fn fit_lorentzians(omega: &[f64], power: &[f64], candidates: &[Candidate]) -> Result<ResonanceSet> {
    if candidates.is_empty() {
        return Err(Error::NoResonances);
    }
    if omega.len() != power.len() {
        return Err(Error::GridMismatch);
    }
    let half_window = window_half_width(candidates);
    let mut groups: Vec<Vec<Candidate>> = Vec::new();
    for c in candidates {
        match groups.last_mut() {
            Some(g) if c.omega - g.last().unwrap().omega < 2.0 * half_window => g.push(*c),
            _ => groups.push(vec![*c]),
        }
    }
    let fitted: Vec<Option<Vec<Resonance>>> = groups
        .par_iter()
        .map(|g| {
            let lo = omega.partition_point(|w| *w < g[0].omega - half_window);
            let hi = omega.partition_point(|w| *w <= g.last().unwrap().omega + half_window);
            match fit_group(&omega[lo..hi], &power[lo..hi], g) {
                Ok(r) => Some(r),
                Err(e) => {
                    warn!("dropping resonance fit near {:.6e} rad/s: {e}", g[0].omega);
                    None
                }
            }
        })
        .collect();
    let resonances: Vec<Resonance> = fitted.into_iter().flatten().flatten().collect();
    if resonances.is_empty() {
        return Err(Error::AllFitsDiverged);
    }
    for r in &resonances {
        if r.residual > RESIDUAL_WARN {
            warn!("resonance at {:.6e} rad/s fits poorly (rms residual {:.3e})", r.omega0, r.residual);
        }
    }
    ResonanceSet::new(resonances)
}

fn window_half_width(candidates: &[Candidate]) -> f64 {
    if candidates.len() >= 2 {
        let mut gaps: Vec<f64> = candidates.windows(2).map(|w| w[1].omega - w[0].omega).collect();
        gaps.sort_by(f64::total_cmp);
        WINDOW_HALF_FSR * gaps[gaps.len() / 2]
    } else {
        25.0 * candidates[0].width
    }
}

/// Parameters per dip are scaled as (offset/w, Γ/w, depth) with w the seed
/// width, so every entry is of order one.
fn fit_group(omega: &[f64], power: &[f64], seeds: &[Candidate]) -> Result<Vec<Resonance>> {
    let m = seeds.len();
    let np = 3 * m;
    if omega.len() < np + 1 {
        return Err(Error::NoSolution("fit window has too few samples".into()));
    }
    let scale = seeds[0].width;
    let origin = seeds[0].omega;
    let x: Vec<f64> = omega.iter().map(|w| (w - origin) / scale).collect();
    let mut theta: Vec<f64> = seeds
        .iter()
        .flat_map(|s| [(s.omega - origin) / scale, s.width / scale, s.depth])
        .collect();
    let (xmin, xmax) = (x[0], *x.last().unwrap());

    let model = |theta: &[f64], xi: f64| -> f64 {
        1.0 - theta
            .chunks(3)
            .map(|p| {
                let h2 = 0.25 * p[1] * p[1];
                p[2] * h2 / ((xi - p[0]).powi(2) + h2)
            })
            .sum::<f64>()
    };
    let cost = |theta: &[f64]| -> f64 { x.iter().zip(power).map(|(xi, p)| (p - model(theta, *xi)).powi(2)).sum() };

    let mut lambda = 1e-3;
    let mut c0 = cost(&theta);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut jtj = vec![0.0; np * np];
        let mut jtr = vec![0.0; np];
        let mut row = vec![0.0; np];
        for (xi, p) in x.iter().zip(power) {
            let r = p - model(&theta, *xi);
            for (k, par) in theta.chunks(3).enumerate() {
                let (d0, g, d) = (xi - par[0], par[1], par[2]);
                let den = d0 * d0 + 0.25 * g * g;
                let den2 = den * den;
                row[3 * k] = -d * g * g * d0 / (2.0 * den2);
                row[3 * k + 1] = -d * g * d0 * d0 / (2.0 * den2);
                row[3 * k + 2] = -0.25 * g * g / den;
            }
            for a in 0..np {
                jtr[a] += row[a] * r;
                for b in a..np {
                    jtj[a * np + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[a * np + b] = jtj[b * np + a];
            }
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let a = Mat::<f64>::from_fn(np, np, |i, j| {
                jtj[i * np + j] + if i == j { lambda * jtj[i * np + i].max(1e-30) } else { 0.0 }
            });
            let rhs = Mat::<f64>::from_fn(np, 1, |i, _| jtr[i]);
            let step = a.partial_piv_lu().solve(&rhs);
            let trial: Vec<f64> = theta.iter().enumerate().map(|(i, t)| t + step[(i, 0)]).collect();
            let valid = trial.chunks(3).all(|p| p[1] > 0.0 && p[0].is_finite() && p[2].is_finite());
            let c1 = if valid { cost(&trial) } else { f64::INFINITY };
            if c1 <= c0 {
                let step_norm = (0..np).map(|i| step[(i, 0)].powi(2)).sum::<f64>().sqrt();
                let theta_norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
                theta = trial;
                c0 = c1;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if step_norm <= STEP_TOL * theta_norm.max(1e-300) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step exists at any damping: a stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        warn!("resonance fit near {origin:.6e} rad/s hit the iteration limit");
    }
    let rms = (c0 / x.len() as f64).sqrt();
    theta
        .chunks(3)
        .map(|p| {
            if !(p[0] >= xmin && p[0] <= xmax) || !(p[1] > 0.0) || !(p[2] > 0.0) || !p.iter().all(|v| v.is_finite()) {
                return Err(Error::NoSolution("fit diverged".into()));
            }
            Resonance::new(origin + p[0] * scale, p[1] * scale, p[2], rms)
        })
        .collect()
}

/// Detection followed by fitting.
pub fn fit_spectrum(omega: &[f64], power: &[f64], prominence: f64) -> Result<ResonanceSet> {
    let candidates = detect_resonances(omega, power, prominence)?;
    fit_lorentzians(omega, power, &candidates)
}

/// Finesse `π√x/(1 − x)` for round-trip product x = ησ.
pub fn finesse_of_product(x: f64) -> f64 {
    PI * x.sqrt() / (1.0 - x)
}

pub fn finesse(c: &CavityCoupling) -> f64 {
    finesse_of_product(c.product())
}

/// Linewidth `(4/T)·arcsin((1 − x)/(2√x))`, rad/s.
pub fn fwhm_of_product(x: f64, round_trip_time: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("round-trip product must lie in (0, 1), got {x}")));
    }
    if !(round_trip_time > 0.0) {
        return Err(Error::Domain(format!("round-trip time must be positive, got {round_trip_time}")));
    }
    let arg = (1.0 - x) / (2.0 * x.sqrt());
    if arg > 1.0 {
        return Err(Error::Domain(format!("overdamped cavity: arcsin argument {arg} exceeds 1")));
    }
    Ok(4.0 / round_trip_time * arg.asin())
}

pub fn analytic_fwhm(c: &CavityCoupling, round_trip_time: f64) -> Result<f64> {
    fwhm_of_product(c.product(), round_trip_time)
}

/// Inverse of [`fwhm_of_product`]: the product ησ giving linewidth `fwhm`.
pub fn product_from_fwhm(fwhm: f64, round_trip_time: f64) -> Result<f64> {
    let s = (fwhm * round_trip_time / 4.0).sin();
    if !(fwhm > 0.0) || !(fwhm * round_trip_time / 4.0 <= PI / 2.0) {
        return Err(Error::Domain(format!("linewidth {fwhm} is not attainable with round-trip time {round_trip_time}")));
    }
    Ok(((s * s + 1.0).sqrt() - s).powi(2))
}

/// The externally known factor used to split the fitted ησ product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnownFactor {
    /// round-trip amplitude survival
    Eta(f64),
    /// coupler amplitude reflectivity
    Sigma(f64),
}

/// Per-resonance coupling from linewidth, spacing and one known factor.
///
/// Without a known factor the depth and width fix only the pair {σ, η};
/// that is reported as `Ambiguous` unless the dip is critically coupled.
pub fn extract_coupling(set: &ResonanceSet, known: Option<KnownFactor>) -> Result<Vec<CavityCoupling>> {
    if set.len() < 2 {
        return Err(Error::Domain("need at least two resonances to measure the round-trip time".into()));
    }
    (0..set.len())
        .map(|k| {
            let r = set.resonances()[k];
            let t = 2.0 * PI / set.local_fsr(k);
            let x = product_from_fwhm(r.fwhm, t)?;
            match known {
                Some(KnownFactor::Eta(eta)) => split_product(x, eta, "eta").and_then(|s| CavityCoupling::lumped(s, eta)),
                Some(KnownFactor::Sigma(sigma)) => {
                    split_product(x, sigma, "sigma").and_then(|e| CavityCoupling::lumped(sigma, e))
                }
                None => {
                    let diff = (1.0 - x) * (1.0 - r.depth).max(0.0).sqrt();
                    let sum = (diff * diff + 4.0 * x).sqrt();
                    let (big, small) = (0.5 * (sum + diff), 0.5 * (sum - diff));
                    if r.depth >= 1.0 - CRITICAL_DEPTH_TOL {
                        return CavityCoupling::lumped(x.sqrt(), x.sqrt());
                    }
                    Err(Error::Ambiguous {
                        under_sigma: big,
                        under_eta: small,
                        over_sigma: small,
                        over_eta: big,
                    })
                }
            }
        })
        .collect()
}

fn split_product(x: f64, known: f64, name: &str) -> Result<f64> {
    if !(known > 0.0 && known <= 1.0) {
        return Err(Error::Domain(format!("known {name} must lie in (0, 1], got {known}")));
    }
    if known < x {
        return Err(Error::Domain(format!(
            "known {name} = {known} is below the fitted round-trip product {x}; the other factor would exceed 1"
        )));
    }
    Ok(x / known)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::h_at;

    /// |h|² sampled on a uniform grid around `n` resonances of a cavity with
    /// round-trip time `t` (phase = ω·T).
    fn synth(c: &CavityCoupling, t: f64, w_lo: f64, w_hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let omega: Vec<f64> = (0..n).map(|k| w_lo + (w_hi - w_lo) * k as f64 / (n - 1) as f64).collect();
        let power = omega.iter().map(|w| h_at(c, w * t).norm_sqr()).collect();
        (omega, power)
    }

    #[test]
    fn flat_spectrum_has_no_candidates() {
        let omega: Vec<f64> = (0..100).map(|k| 1e15 + k as f64 * 1e9).collect();
        let power = vec![1.0; 100];
        assert!(detect_resonances(&omega, &power, DEFAULT_PROMINENCE).unwrap().is_empty());
        assert!(matches!(fit_lorentzians(&omega, &power, &[]), Err(Error::NoResonances)));
    }

    #[test]
    fn single_lorentzian_recovered() {
        let gamma = 2.0 * PI * 1.08e9;
        let w0 = 1.2e15;
        let truth = Resonance::new(w0, gamma, 0.9, 0.0).unwrap();
        let omega: Vec<f64> = (0..4001).map(|k| w0 + (k as f64 - 2000.0) * gamma / 100.0).collect();
        let power: Vec<f64> = omega.iter().map(|w| lorentzian_comb(*w, &[truth])).collect();
        let cands = detect_resonances(&omega, &power, DEFAULT_PROMINENCE).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].index, 2000);
        let set = fit_lorentzians(&omega, &power, &cands).unwrap();
        let r = set.resonances()[0];
        assert!(((r.fwhm - gamma) / gamma).abs() < 1e-3);
        assert!((r.omega0 - w0).abs() < gamma * 1e-6);
        assert!((r.q - r.omega0 / r.fwhm).abs() / r.q < 1e-9);
    }

    #[test]
    fn airy_comb_round_trip() {
        let c = CavityCoupling::lumped(0.97, 0.985).unwrap();
        let t = 1.0 / 51.9e9;
        let fsr = 2.0 * PI / t;
        let gamma = analytic_fwhm(&c, t).unwrap();
        let m0 = 23_000.0;
        let (omega, power) = synth(&c, t, (m0 + 0.5) * fsr, (m0 + 10.5) * fsr, 10 * 4000);
        let set = fit_spectrum(&omega, &power, DEFAULT_PROMINENCE).unwrap();
        assert_eq!(set.len(), 10);
        for (k, r) in set.resonances().iter().enumerate() {
            let w0 = (m0 + 1.0 + k as f64) * fsr;
            assert!((r.omega0 - w0).abs() < gamma * 1e-3);
            assert!(((r.fwhm - gamma) / gamma).abs() < 1e-2, "{} vs {}", r.fwhm, gamma);
        }
        assert!(((set.fsr_mean() - fsr) / fsr).abs() < 1e-4);
    }

    #[test]
    fn fitting_is_deterministic() {
        let c = CavityCoupling::lumped(0.96, 0.99).unwrap();
        let t = 2e-11;
        let fsr = 2.0 * PI / t;
        let (omega, power) = synth(&c, t, 4000.5 * fsr, 4006.5 * fsr, 12_000);
        let a = fit_spectrum(&omega, &power, DEFAULT_PROMINENCE).unwrap();
        let b = fit_spectrum(&omega, &power, DEFAULT_PROMINENCE).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finesse_values() {
        assert!((finesse_of_product(0.99) - 312.58).abs() < 0.01);
        assert!(finesse_of_product(1e-12) < 1e-5);
    }

    #[test]
    fn fwhm_large_finesse_limit() {
        let c = CavityCoupling::lumped(0.999, 0.999).unwrap();
        let t = 10e-12;
        let g = analytic_fwhm(&c, t).unwrap();
        let f = finesse(&c);
        assert!(f > 100.0);
        assert!((g * t * f / (2.0 * PI) - 1.0).abs() < 1e-2);
        assert!(((2.0 * PI / t) / g / f - 1.0).abs() < 1e-2);
    }

    #[test]
    fn fwhm_shrinks_towards_unity_product() {
        let t = 1e-11;
        let mut prev = f64::INFINITY;
        for x in [0.5, 0.8, 0.9, 0.99, 0.999, 0.99999] {
            let g = fwhm_of_product(x, t).unwrap();
            assert!(g < prev);
            prev = g;
        }
        assert!(fwhm_of_product(0.1, t).is_err());
    }

    #[test]
    fn fwhm_inverts() {
        for x in [0.3, 0.9, 0.936_738_7, 0.9999] {
            let g = fwhm_of_product(x, 1.9e-11).unwrap();
            assert!((product_from_fwhm(g, 1.9e-11).unwrap() - x).abs() < 1e-12);
        }
    }

    #[test]
    fn fwhm_matches_numeric_dip_width() {
        let c = CavityCoupling::lumped(0.999, 0.999).unwrap();
        let t = 10e-12;
        let g = analytic_fwhm(&c, t).unwrap();
        let fsr = 2.0 * PI / t;
        let w0 = 1000.0 * fsr;
        let n = 20001;
        let omega: Vec<f64> = (0..n).map(|k| w0 + (k as f64 - 10000.0) * g / 500.0).collect();
        let p: Vec<f64> = omega.iter().map(|w| h_at(&c, w * t).norm_sqr()).collect();
        // critically coupled: the dip reaches zero, half depth is 0.5
        let below: Vec<&f64> = omega.iter().zip(&p).filter(|(_, p)| **p < 0.5).map(|(w, _)| w).collect();
        let width = *below.last().unwrap() - *below[0];
        assert!(((width - g) / g).abs() < 5e-3);
    }

    fn set_from(c: &CavityCoupling, t: f64) -> ResonanceSet {
        let fsr = 2.0 * PI / t;
        let (omega, power) = synth(c, t, 9000.5 * fsr, 9005.5 * fsr, 5 * 6000);
        fit_spectrum(&omega, &power, DEFAULT_PROMINENCE).unwrap()
    }

    #[test]
    fn extract_with_known_eta() {
        let c = CavityCoupling::lumped(0.9737, 0.9990).unwrap();
        let set = set_from(&c, 1.0 / 51.9e9);
        let got = extract_coupling(&set, Some(KnownFactor::Eta(0.9990))).unwrap();
        for g in got {
            assert!(((g.sigma() - 0.9737) / 0.9737).abs() < 5e-3);
        }
        assert!(matches!(extract_coupling(&set, None), Err(Error::Ambiguous { .. })));
        assert!(extract_coupling(&set, Some(KnownFactor::Eta(0.9))).is_err());
    }

    #[test]
    fn extract_critical_without_known() {
        let c = CavityCoupling::lumped(0.98, 0.98).unwrap();
        let set = set_from(&c, 1.0 / 51.9e9);
        let got = extract_coupling(&set, None).unwrap();
        for g in got {
            assert!((g.sigma() - g.eta()).abs() < 1e-12);
            assert!((g.sigma() - 0.98).abs() < 2e-3);
        }
    }
}
