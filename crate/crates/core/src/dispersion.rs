//! Frequency-dependent waveguide quantities: effective index, propagation
//! constant, group velocity, quasi-phase-matching mismatch and the in-plane
//! index of an anisotropic bend.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Telecom,
    Pump,
}

/// Sign convention for the poling term subtracted from the wavevector mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpmConvention {
    /// `Δβ = β_p − β − β′ − π/Λ`
    #[default]
    PiOverLambda,
    /// `Δβ = β_p − β − β′ − 2π/Λ`, the usual first-order grating vector.
    TwoPiOverLambda,
}

impl QpmConvention {
    fn grating_numerator(self) -> f64 {
        match self {
            QpmConvention::PiOverLambda => PI,
            QpmConvention::TwoPiOverLambda => 2.0 * PI,
        }
    }

    /// Grating wavevector for period `period` (m).
    pub fn grating_wavevector(self, period: f64) -> f64 {
        self.grating_numerator() / period
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `n(ω) = n0 + n1·u + n2·u²` with `u = (ω − ω_c)/ω_c`.
    Taylor {
        center: f64,
        n0: f64,
        n1: f64,
        n2: f64,
    },
    /// Monotone cubic (Fritsch–Carlson) interpolant through the samples.
    Table {
        omega: Vec<f64>,
        n: Vec<f64>,
        slopes: Vec<f64>,
    },
}

/// Effective index of one waveguide band.
///
/// Immutable once built; evaluation never extrapolates past `valid_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    band: Band,
    repr: Repr,
    valid_min: f64,
    valid_max: f64,
}

impl DispersionModel {
    /// Taylor model about `center` (rad/s), valid on `[min, max]`.
    pub fn taylor(
        band: Band,
        center: f64,
        n0: f64,
        n1: f64,
        n2: f64,
        (min, max): (f64, f64),
    ) -> Result<Self> {
        if !(center > 0.0) || !(min > 0.0) || !(max > min) {
            return Err(Error::InvalidModel(format!(
                "need 0 < min < max and center > 0, got center={center}, range=[{min}, {max}]"
            )));
        }
        let model = DispersionModel {
            band,
            repr: Repr::Taylor { center, n0, n1, n2 },
            valid_min: min,
            valid_max: max,
        };
        // n is quadratic in ω, so positivity on the range is decided by the
        // endpoints and the vertex.
        let mut probes = vec![min, max];
        if n2 != 0.0 {
            let u_vertex = -n1 / (2.0 * n2);
            let w = center * (1.0 + u_vertex);
            if w > min && w < max {
                probes.push(w);
            }
        }
        for w in probes {
            let n = model.n_eff(w)?;
            if !(n > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "effective index {n} is not positive at {w:.6e} rad/s"
                )));
            }
        }
        Ok(model)
    }

    /// Constant-index model, mostly useful in tests and for dispersionless bands.
    pub fn constant(band: Band, n: f64, range: (f64, f64)) -> Result<Self> {
        let center = 0.5 * (range.0 + range.1);
        Self::taylor(band, center, n, 0.0, 0.0, range)
    }

    /// Tabulated samples `(ω_k, n_k)`; the valid range is the sample span.
    pub fn tabulated(band: Band, omega: Vec<f64>, n: Vec<f64>) -> Result<Self> {
        if omega.len() != n.len() {
            return Err(Error::InvalidModel("frequency and index columns differ in length".into()));
        }
        if omega.len() < 2 {
            return Err(Error::InvalidModel("a table needs at least two samples".into()));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel("table frequencies must be strictly increasing".into()));
        }
        if let Some(bad) = n.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::InvalidModel(format!("non-positive index {bad} in table")));
        }
        let slopes = pchip_slopes(&omega, &n);
        let (valid_min, valid_max) = (omega[0], *omega.last().unwrap());
        Ok(DispersionModel {
            band,
            repr: Repr::Table { omega, n, slopes },
            valid_min,
            valid_max,
        })
    }

    /// Parse a two-column text table `(frequency_THz, n_eff)`. Blank lines and
    /// `#` comments are ignored; columns may be separated by commas or spaces.
    /// Rows may come in any frequency order.
    pub fn from_table_text(band: Band, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected two columns (frequency_THz, n_eff)",
                    lineno + 1
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            rows.push((crate::units::thz_to_omega(parse(cols[0])?), parse(cols[1])?));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (omega, n) = rows.into_iter().unzip();
        Self::tabulated(band, omega, n)
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn valid_range(&self) -> (f64, f64) {
        (self.valid_min, self.valid_max)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.valid_min && omega <= self.valid_max
    }

    fn check(&self, omega: f64) -> Result<()> {
        if self.contains(omega) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                omega,
                min: self.valid_min,
                max: self.valid_max,
            })
        }
    }

    pub fn n_eff(&self, omega: f64) -> Result<f64> {
        self.check(omega)?;
        Ok(match &self.repr {
            Repr::Taylor { center, n0, n1, n2 } => {
                let u = (omega - center) / center;
                n0 + n1 * u + n2 * u * u
            }
            Repr::Table { omega: xs, n, slopes } => pchip_eval(xs, n, slopes, omega),
        })
    }

    /// dn/dω. Analytic for Taylor models; centered difference for tables with
    /// a step of 10⁻⁴ of the local sample spacing.
    pub fn dn_domega(&self, omega: f64) -> Result<f64> {
        self.check(omega)?;
        match &self.repr {
            Repr::Taylor { center, n1, n2, .. } => {
                let u = (omega - center) / center;
                Ok((n1 + 2.0 * n2 * u) / center)
            }
            Repr::Table { omega: xs, .. } => {
                let k = segment_index(xs, omega);
                let h = 1e-4 * (xs[k + 1] - xs[k]);
                let hi = self.n_eff(omega + h)?;
                let lo = self.n_eff(omega - h)?;
                Ok((hi - lo) / (2.0 * h))
            }
        }
    }

    /// Propagation constant β = n_eff·ω/c, rad/m.
    pub fn beta(&self, omega: f64) -> Result<f64> {
        Ok(self.n_eff(omega)? * omega / C)
    }

    /// Group index n + ω·dn/dω.
    pub fn group_index(&self, omega: f64) -> Result<f64> {
        Ok(self.n_eff(omega)? + omega * self.dn_domega(omega)?)
    }

    /// Group velocity (dβ/dω)⁻¹, m/s.
    pub fn group_velocity(&self, omega: f64) -> Result<f64> {
        Ok(C / self.group_index(omega)?)
    }
}

/// Wavevector mismatch `β_p(ω+ω′) − β(ω) − β(ω′) − K_Λ`, rad/m.
pub fn delta_beta(
    pump: &DispersionModel,
    signal: &DispersionModel,
    omega: f64,
    omega_prime: f64,
    period: f64,
    convention: QpmConvention,
) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::Domain(format!("poling period must be positive, got {period}")));
    }
    Ok(material_mismatch(pump, signal, omega, omega_prime)? - convention.grating_wavevector(period))
}

fn material_mismatch(
    pump: &DispersionModel,
    signal: &DispersionModel,
    omega: f64,
    omega_prime: f64,
) -> Result<f64> {
    let bs = signal.beta(omega)?;
    let bi = signal.beta(omega_prime)?;
    let bp = pump.beta(omega + omega_prime)?;
    // Sum the two signal terms first so the result is exactly symmetric.
    Ok(bp - (bs + bi))
}

/// Poling period that zeroes the mismatch at `(ω_s, ω_i)`.
pub fn qpm_period_for(
    pump: &DispersionModel,
    signal: &DispersionModel,
    omega_s: f64,
    omega_i: f64,
    convention: QpmConvention,
) -> Result<f64> {
    let diff = material_mismatch(pump, signal, omega_s, omega_i)?;
    if !(diff > 0.0) {
        return Err(Error::NoSolution(format!(
            "wavevector difference {diff:.6e} rad/m is not positive; no poling period phase-matches"
        )));
    }
    Ok(convention.grating_numerator() / diff)
}

/// In-plane index `n1·n2/√(n1²cos²φ + n2²sin²φ)` for a propagation direction
/// at angle `phi` to the ordinary axis. Note the endpoints: φ = 0 gives `n2`
/// and φ = π/2 gives `n1`.
pub fn angle_interpolated_index(n1: f64, n2: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    n1 * n2 / (n1 * n1 * c * c + n2 * n2 * s * s).sqrt()
}

/// One straight piece of a discretized bend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendSegment {
    /// m
    pub length: f64,
    /// m; `f64::INFINITY` for a straight piece
    pub bend_radius: f64,
    /// Tangent angle to the ordinary axis, rad in [0, 2π).
    pub tangent_angle: f64,
}

impl BendSegment {
    pub fn new(length: f64, bend_radius: f64, tangent_angle: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::Domain(format!("segment length must be positive, got {length}")));
        }
        if !(bend_radius > 0.0) {
            return Err(Error::Domain(format!("bend radius must be positive, got {bend_radius}")));
        }
        Ok(BendSegment {
            length,
            bend_radius,
            tangent_angle: tangent_angle.rem_euclid(2.0 * PI),
        })
    }
}

/// Split a circular arc of `radius` sweeping `sweep` radians, starting at
/// tangent angle `start_angle`, into `n` equal segments. Each segment takes
/// the tangent angle at its midpoint.
pub fn circular_bend_segments(
    radius: f64,
    start_angle: f64,
    sweep: f64,
    n: usize,
) -> Result<Vec<BendSegment>> {
    if n == 0 {
        return Err(Error::Domain("a bend needs at least one segment".into()));
    }
    if !(sweep.abs() > 0.0) {
        return Err(Error::Domain("bend sweep angle must be non-zero".into()));
    }
    let dtheta = sweep / n as f64;
    (0..n)
        .map(|k| {
            let mid = start_angle + (k as f64 + 0.5) * dtheta;
            BendSegment::new(radius * dtheta.abs(), radius, mid)
        })
        .collect()
}

fn segment_index(xs: &[f64], x: f64) -> usize {
    // Index k with xs[k] <= x <= xs[k+1]; callers have range-checked x.
    let k = xs.partition_point(|v| *v <= x);
    k.saturating_sub(1).min(xs.len() - 2)
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![d[0], d[0]];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if d[k - 1] * d[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    m[0] = pchip_edge(h[0], h[1], d[0], d[1]);
    m[n - 1] = pchip_edge(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn pchip_edge(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

fn pchip_eval(x: &[f64], y: &[f64], m: &[f64], t: f64) -> f64 {
    let k = segment_index(x, t);
    let h = x[k + 1] - x[k];
    let s = (t - x[k]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y[k] + h10 * h * m[k] + h01 * y[k + 1] + h11 * h * m[k + 1]
}
