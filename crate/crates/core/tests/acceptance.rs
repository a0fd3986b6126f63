use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdc_core::circuit::{buildup_at, h_at, segmented_bend_block, CavityCoupling};
use spdc_core::config::load_config;
use spdc_core::dispersion::{angle_interpolated_index, circular_bend_segments, Band, DispersionModel};
use spdc_core::metrics::schmidt_decompose;
use spdc_core::pipeline::{run_in_memory, sweep, RunOutput, SweepOutput, SweepSpec, PUMP_DETUNING_PATH};
use spdc_core::resonances::{analytic_fwhm, fit_spectrum, fwhm_of_product};
use spdc_core::spdc::{
    closed_form_pcav, closed_form_pfwg, ibef, ibef_max, jsa_grid, Axis, JsaGrid, NonlinearSection, Provenance,
    PumpPulse, UniformCavity, C64,
};
use spdc_core::units::{ghz_to_omega, thz_to_omega};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within_time(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s, format!("runtime {:.2} s exceeds {limit_s} s", elapsed.as_secs_f64()))
}

struct Example {
    run: RunOutput,
    elapsed: Duration,
}

fn example() -> Result<&'static Example, String> {
    static EXAMPLE: OnceLock<Result<Example, String>> = OnceLock::new();
    EXAMPLE
        .get_or_init(|| {
            let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example_device.toml");
            let cfg = load_config(&path).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let run = run_in_memory(&cfg, None).map_err(|e| e.to_string())?;
            Ok(Example { run, elapsed: start.elapsed() })
        })
        .as_ref()
        .map_err(|e| e.clone())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let pulse = PumpPulse::new(thz_to_omega(386.89), 5e9, 1.11e-12, 900e6).map_err(|e| e.to_string())?;
    let power_mw = pulse.average_power() * 1e3;
    check((power_mw - 0.999).abs() < 1e-12, format!("average power {power_mw} mW"))?;
    let per_pulse = 12.9e6 / pulse.rep_rate;
    check(rel(per_pulse, 1.432e-2) < 5e-3, format!("12.9 MHz / 900 MHz = {per_pulse:.5e}"))?;
    within_time(start.elapsed(), 1.0)?;
    Ok(format!(
        "average power {power_mw:.4} mW, 12.9 MHz/900 MHz = {per_pulse:.4e} vs 1.432e-2 ({:.3}%)",
        100.0 * rel(per_pulse, 1.432e-2)
    ))
}

fn criterion_2() -> Outcome {
    let ex = example()?;
    let r = &ex.run.report;
    for i in &r.islands {
        let ratio = i.pgr_external_hz_per_mw / i.pgr_internal_hz_per_mw;
        check((ratio - r.kappa2).abs() < 1e-10, format!("island {} ratio {ratio:.12}", i.index))?;
        let p = i.probability_external / i.probability_internal;
        check((p - 0.052).abs() < 1e-10, format!("island {} probability ratio {p:.12}", i.index))?;
    }
    let t = r.totals.as_ref().ok_or("no island totals")?;
    let (ext, int) = (t.pgr_external_hz_per_mw / 1e6, t.pgr_internal_hz_per_mw / 1e9);
    check(rel(ext, 60.4) < 0.01, format!("external total {ext:.3} MHz/mW"))?;
    check(rel(int, 1.16) < 0.01, format!("internal total {int:.4} GHz/mW"))?;
    let mean_p = t.per_island_internal.mean / 1e6 * r.average_pump_power_mw / (r.rep_rate_hz / 1e6);
    check(rel(mean_p, 1.432e-2) < 5e-3, format!("mean per-island internal probability {mean_p:.5e}"))?;
    within_time(ex.elapsed, 300.0)?;
    Ok(format!(
        "ext/int = κ² over {} islands, external {ext:.2} MHz/mW, internal {int:.4} GHz/mW, \
         per-island internal probability {mean_p:.4e}, full {}² run {:.1} s",
        r.islands.len(),
        ex.run.grid.signal.len,
        ex.elapsed.as_secs_f64()
    ))
}

fn criterion_3() -> Outcome {
    let ex = example()?;
    let r = &ex.run.report;
    check(r.island_count.abs_diff(90) <= 1, format!("{} islands", r.island_count))?;
    for i in &r.islands {
        for f in [i.signal_thz, i.idler_thz] {
            check((190.95..=195.94).contains(&f), format!("island {} centre {f:.3} THz outside band", i.index))?;
        }
    }
    let k = r.schmidt_number.ok_or("no Schmidt number")?;
    let s = r.entropy_nats.ok_or("no entropy")?;
    let ks = r.k_split.ok_or("no K_split")?;
    let purity = r.purity.ok_or("no purity")?.mean;
    check((88.0..=90.0).contains(&k), format!("K = {k:.4}"))?;
    check((s - 4.50).abs() <= 0.05, format!("entropy {s:.4} nats"))?;
    check((44.0..=45.5).contains(&ks), format!("K_split = {ks:.4}"))?;
    check((purity - 0.960).abs() <= 0.02, format!("mean purity {purity:.5}"))?;
    within_time(ex.elapsed, 600.0)?;
    Ok(format!(
        "{} islands, K = {k:.3}, entropy {s:.4} nats, K_split = {ks:.3}, mean purity {purity:.4} \
         (continuous K = {:.3}, entropy {:.4})",
        r.island_count,
        r.schmidt_number_continuous.unwrap_or(f64::NAN),
        r.entropy_nats_continuous.unwrap_or(f64::NAN)
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let omega_ref = thz_to_omega(193.4);
    let mut worst_q: f64 = 0.0;
    let mut worst_fsr: f64 = 0.0;
    let mut draws = 0;
    while draws < 50 {
        let sigma = rng.gen_range(0.90..0.995);
        let eta = rng.gen_range(0.95..0.9995);
        let t = rng.gen_range(10e-12..40e-12);
        let c = CavityCoupling::lumped(sigma, eta).map_err(|e| e.to_string())?;
        let finesse = PI * c.product().sqrt() / (1.0 - c.product());
        if finesse <= 50.0 {
            continue;
        }
        draws += 1;
        let fsr = 2.0 * PI / t;
        let fwhm = fwhm_of_product(c.product(), t).map_err(|e| e.to_string())?;
        let dips = 6;
        let n = (dips as f64 * fsr / fwhm * 24.0) as usize;
        let lo = omega_ref + 0.5 * fsr;
        let step = dips as f64 * fsr / (n - 1) as f64;
        let omega: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();
        let power: Vec<f64> = omega.iter().map(|w| h_at(&c, t * (w - omega_ref)).norm_sqr()).collect();
        let set = fit_spectrum(&omega, &power, 1e-3).map_err(|e| e.to_string())?;
        check(set.len() == dips, format!("draw {draws}: {} of {dips} resonances found", set.len()))?;
        for r in set.resonances() {
            worst_q = worst_q.max(rel(r.q, r.omega0 / fwhm));
        }
        for f in set.fsr_list() {
            worst_fsr = worst_fsr.max(rel(*f, fsr));
        }
    }
    check(worst_q < 0.01, format!("worst Q error {:.3}%", 100.0 * worst_q))?;
    check(worst_fsr < 1e-3, format!("worst FSR error {:.4}%", 100.0 * worst_fsr))?;
    within_time(start.elapsed(), 30.0)?;

    let r = &example()?.run.report;
    let fsr = r.fsr_mean_ghz.ok_or("example has a single resonance")?;
    check(rel(r.mean_fwhm_ghz, 1.08) < 0.02, format!("example mean FWHM {:.4} GHz", r.mean_fwhm_ghz))?;
    check(rel(fsr, 51.9) < 0.02, format!("example FSR {fsr:.4} GHz"))?;
    Ok(format!(
        "50 synthetic combs: worst Q error {:.3}%, worst FSR error {:.4}%; example FWHM {:.4} GHz, FSR {fsr:.3} GHz",
        100.0 * worst_q,
        100.0 * worst_fsr,
        r.mean_fwhm_ghz
    ))
}

/// Full width at half depth of the dip in |h|², by bisection on the phase.
fn numeric_dip_width(c: &CavityCoupling, t: f64) -> f64 {
    let depth = |phi: f64| 1.0 - h_at(c, phi).norm_sqr();
    let half = depth(0.0) / 2.0;
    let (mut a, mut b) = (0.0, PI);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if depth(m) > half {
            a = m;
        } else {
            b = m;
        }
    }
    2.0 * 0.5 * (a + b) / t
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-13 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let err = |e: spdc_core::Error| e.to_string();
    let t = 1.0 / 51.9e9;
    let mut worst_fwhm: f64 = 0.0;
    for (sigma, eta) in [(0.99, 0.995), (0.995, 0.999), (0.985, 0.999), (0.999, 0.9995)] {
        let c = CavityCoupling::lumped(sigma, eta).map_err(err)?;
        check(PI * c.product().sqrt() / (1.0 - c.product()) > 100.0, "finesse not above 100")?;
        worst_fwhm = worst_fwhm.max(rel(numeric_dip_width(&c, t), analytic_fwhm(&c, t).map_err(err)?));
    }
    check(worst_fwhm < 5e-3, format!("FWHM error {:.4}%", 100.0 * worst_fwhm))?;

    let mut worst_arg: f64 = 0.0;
    let mut worst_max: f64 = 0.0;
    for (eta_nl, eta_cav) in [(0.99999, 0.999), (0.9999, 0.99), (0.999, 0.95), (1.0, 0.98)] {
        let value = |s: f64| ibef(&CavityCoupling::new(s, eta_nl, eta_cav).unwrap());
        let arg = golden_max(value, 0.0, 1.0);
        worst_arg = worst_arg.max((arg - eta_nl * eta_cav).abs());
        worst_max = worst_max.max(rel(value(arg), ibef_max(eta_nl, eta_cav)));
    }
    check(worst_arg < 1e-4, format!("IBEF argmax off by {worst_arg:.2e}"))?;
    check(worst_max < 1e-6, format!("IBEF maximum off by {worst_max:.2e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..1000 {
        let c = CavityCoupling::new(rng.gen_range(0.0..0.999), rng.gen_range(0.9..1.0), rng.gen_range(0.5..1.0))
            .map_err(err)?;
        let (t, j) = (rng.gen_range(5e-12..50e-12), rng.gen_range(0.1..10.0));
        let r = closed_form_pcav(&c, t, j) / closed_form_pfwg(&c, t, j);
        worst_ratio = worst_ratio.max(rel(r, ibef(&c)));
    }
    check(worst_ratio < 1e-12, format!("P_cav/P_fwg off IBEF by {worst_ratio:.2e}"))?;

    let mut gains = Vec::new();
    for loss in [0.05, 0.02, 0.01] {
        let gain = ibef_max(0.99999, 1.0 - loss / 10.0) / ibef_max(0.99999, 1.0 - loss);
        check((gain / 100.0 - 1.0).abs() <= 0.10, format!("1−η_cav {loss} → {}: gain {gain:.2}", loss / 10.0))?;
        gains.push(format!("{gain:.1}"));
    }
    within_time(start.elapsed(), 10.0)?;
    Ok(format!(
        "FWHM error {:.2e}, argmax error {worst_arg:.1e}, max error {worst_max:.1e}, P_cav/P_fwg error {worst_ratio:.1e}, \
         10× gains {}",
        worst_fwhm,
        gains.join("/")
    ))
}

/// Section with equal constant indices and a grating so long that ΔβL is
/// numerically zero, making J exactly proportional to L.
fn flat_section(length: f64) -> Result<NonlinearSection, String> {
    let sig = DispersionModel::constant(Band::Telecom, 2.2, (thz_to_omega(180.0), thz_to_omega(206.0)))
        .map_err(|e| e.to_string())?;
    let pump = DispersionModel::constant(Band::Pump, 2.2, (thz_to_omega(360.0), thz_to_omega(412.0)))
        .map_err(|e| e.to_string())?;
    NonlinearSection::new(length, 1e6, 5e-11, C64::new(7.6e6, 0.0), Arc::new(sig), Arc::new(pump))
        .map_err(|e| e.to_string())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let err = |e: spdc_core::Error| e.to_string();
    let n = 512;
    let w0 = thz_to_omega(193.4);
    let axis = Axis::spanning(w0 - ghz_to_omega(20.0), w0 + ghz_to_omega(20.0), n).map_err(err)?;
    let section = flat_section(1e-3)?;
    let pulse = PumpPulse::new(2.0 * w0, 5e9, 1.11e-12, 900e6).map_err(err)?;
    let t = 1.0 / 51.9e9;
    let bare = |c: CavityCoupling| UniformCavity { coupling: c, omega_ref: w0, round_trip_time: t };
    let wg = jsa_grid(&section, &pulse, &bare(CavityCoupling::lumped(0.9, 0.9).map_err(err)?), axis, axis, Provenance::WaveguideJ)
        .map_err(err)?;

    let open = CavityCoupling::new(0.0, 0.999, 0.98).map_err(err)?;
    let cj = jsa_grid(&section, &pulse, &bare(open), axis, axis, Provenance::CavityJ).map_err(err)?;
    let no_cavity = wg.values.iter().zip(&cj.values).map(|(j, c)| (c - j * open.eta()).norm()).fold(0.0, f64::max);
    let peak = wg.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    check(no_cavity <= 4.0 * f64::EPSILON * peak, format!("no-cavity deviation {:.2e}", no_cavity / peak))?;

    let c = CavityCoupling::new(0.97, 0.9999, 0.98).map_err(err)?;
    let cav = jsa_grid(&section, &pulse, &bare(c), axis, axis, Provenance::CavityJ).map_err(err)?;
    let mut sym: f64 = 0.0;
    let mut fact: f64 = 0.0;
    let floor = 1e-30 * peak * peak;
    for s in 0..n {
        for i in 0..n {
            let (a, b) = (cav.get(s, i).norm(), cav.get(i, s).norm());
            if a > 0.0 {
                sym = sym.max((a - b).abs() / a);
            }
            let expect = c.kappa2().powi(2)
                * c.eta().powi(2)
                * buildup_at(&c, t * (axis.at(s) - w0))
                * buildup_at(&c, t * (axis.at(i) - w0))
                * wg.get(s, i).norm_sqr();
            if expect > floor {
                fact = fact.max(rel(cav.get(s, i).norm_sqr(), expect));
            }
        }
    }
    check(sym < 1e-12, format!("exchange asymmetry {sym:.2e}"))?;
    check(fact < 1e-10, format!("factorisation error {fact:.2e}"))?;

    let mut p4 = pulse;
    p4.energy *= 4.0;
    let wg4 = jsa_grid(&section, &p4, &bare(c), axis, axis, Provenance::WaveguideJ).map_err(err)?;
    let wg2l = jsa_grid(&section.with_length(2e-3), &pulse, &bare(c), axis, axis, Provenance::WaveguideJ).map_err(err)?;
    let ratio_err = |other: &JsaGrid, want: f64| {
        wg.values
            .iter()
            .zip(&other.values)
            .filter(|(a, _)| a.norm_sqr() > floor)
            .map(|(a, b)| (b / a - want).norm() / want)
            .fold(0.0, f64::max)
    };
    let (e_energy, e_length) = (ratio_err(&wg4, 2.0), ratio_err(&wg2l, 2.0));
    check(e_energy < 1e-8, format!("√E scaling error {e_energy:.2e}"))?;
    check(e_length < 1e-8, format!("L scaling error {e_length:.2e}"))?;
    within_time(start.elapsed(), 30.0)?;
    Ok(format!(
        "{n}² grids: no-cavity {:.1e}, symmetry {sym:.1e}, factorisation {fact:.1e}, √E {e_energy:.1e}, L {e_length:.1e}",
        no_cavity / peak
    ))
}

/// `n` disjoint equal b×b blocks on the diagonal, inside a zero border so the
/// trapezoid end weights do not touch any block.
fn blocks(n: usize, b: usize) -> JsaGrid {
    let len = n * b + 2;
    let axis = Axis::new(1.2e15, 1e9, len).unwrap();
    let mut g = JsaGrid::zeros(axis, axis, Provenance::CavityJ);
    for k in 0..n {
        for s in 0..b {
            for i in 0..b {
                g.values[(1 + k * b + s) * len + 1 + k * b + i] = C64::new(1.0, 0.0);
            }
        }
    }
    g
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let err = |e: spdc_core::Error| e.to_string();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let len = 64;
    let axis = Axis::new(1.2e15, 1e9, len).unwrap();
    let u: Vec<C64> = (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let v: Vec<C64> = (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let outer: Vec<C64> = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    let rank1 = schmidt_decompose(&JsaGrid::new(axis, axis, outer, Provenance::CavityJ).map_err(err)?).map_err(err)?;
    check((rank1.schmidt_number - 1.0).abs() < 1e-9, format!("rank-1 K = {}", rank1.schmidt_number))?;

    let mut ks = Vec::new();
    for n in [2, 5, 10, 90] {
        let r = schmidt_decompose(&blocks(n, 4)).map_err(err)?;
        check((r.schmidt_number - n as f64).abs() < 1e-6, format!("{n} blocks: K = {}", r.schmidt_number))?;
        if n == 90 {
            check((r.entropy_nats - 90f64.ln()).abs() < 1e-4, format!("uniform-90 entropy {}", r.entropy_nats))?;
            check((r.entropy_nats - 4.4998).abs() < 1e-4, format!("uniform-90 entropy {}", r.entropy_nats))?;
        }
        ks.push(format!("{:.6}", r.schmidt_number));
    }

    let vals: Vec<C64> = (0..len * len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let g = JsaGrid::new(axis, axis, vals, Provenance::CavityJ).map_err(err)?;
    let base = schmidt_decompose(&g).map_err(err)?;
    let mut worst: f64 = 0.0;
    for c in [1e-9, 3.7, 1e7] {
        let r = schmidt_decompose(&g.scaled(c)).map_err(err)?;
        worst = worst
            .max(rel(r.schmidt_number, base.schmidt_number))
            .max(rel(r.entropy_nats, base.entropy_nats))
            .max(rel(r.purity(), base.purity()));
    }
    check(worst < 1e-12, format!("scale invariance error {worst:.2e}"))?;
    within_time(start.elapsed(), 120.0)?;
    Ok(format!("rank-1 K = {:.12}, block K = {}, scale error {worst:.1e}", rank1.schmidt_number, ks.join("/")))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let err = |e: spdc_core::Error| e.to_string();
    let grid: Arc<[f64]> = (0..33).map(|k| thz_to_omega(191.0 + 0.15 * k as f64)).collect::<Vec<_>>().into();
    let range = (thz_to_omega(180.0), thz_to_omega(206.0));
    let ordinary = DispersionModel::taylor(Band::Telecom, thz_to_omega(193.4), 2.21, 0.03, 0.0, range).map_err(err)?;
    let extraordinary = DispersionModel::taylor(Band::Telecom, thz_to_omega(193.4), 2.14, 0.02, 0.0, range).map_err(err)?;
    let bend = |n: usize| -> Result<Vec<f64>, String> {
        let segs = circular_bend_segments(95.5e-6, 0.3, PI, n).map_err(err)?;
        let b = segmented_bend_block(&segs, &ordinary, &extraordinary, 386.745, grid.clone()).map_err(err)?;
        Ok((0..grid.len()).map(|k| b.s21(k).norm()).collect())
    };
    let mut prev = bend(16)?;
    let coarse = prev.clone();
    let mut worst: f64 = 0.0;
    for n in [32, 64, 128, 256] {
        let next = bend(n)?;
        for (a, b) in prev.iter().zip(&next) {
            worst = worst.max(rel(*a, *b));
        }
        prev = next;
    }
    let overall = coarse.iter().zip(&prev).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    check(worst < 0.01 && overall < 0.01, format!("|S21| change {worst:.2e} per doubling, {overall:.2e} overall"))?;

    let mut ends: f64 = 0.0;
    for (n1, n2) in [(2.21, 2.14), (1.9, 2.3), (2.0, 2.0)] {
        ends = ends
            .max(rel(angle_interpolated_index(n1, n2, 0.0), n2))
            .max(rel(angle_interpolated_index(n1, n2, PI / 2.0), n1))
            .max(rel(angle_interpolated_index(n1, n2, PI), n2));
    }
    check(ends <= 2.0 * f64::EPSILON, format!("endpoint error {ends:.2e}"))?;
    within_time(start.elapsed(), 10.0)?;
    Ok(format!("|S21| 16→256 change {overall:.2e} (max per doubling {worst:.2e}), endpoint error {ends:.1e}"))
}

fn monotone(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let err = |e: spdc_core::Error| e.to_string();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example_device.toml");
    let cfg = load_config(&path).map_err(err)?;
    let kappas = vec![0.01, 0.02, 0.035, 0.052, 0.08, 0.12, 0.2];
    let table = sweep(
        &cfg,
        &SweepSpec {
            parameter: "couplers.signal_kappa2".into(),
            values: kappas.clone(),
            outputs: vec![SweepOutput::Q, SweepOutput::FractionOutcoupled],
        },
    )
    .map_err(err)?;
    let q = table.column("q").ok_or("no q column")?;
    let frac = table.column("fraction_outcoupled").ok_or("no fraction column")?;
    check(monotone(&q, false), format!("Q not decreasing: {q:?}"))?;
    check(monotone(&frac, true), format!("fraction not increasing: {frac:?}"))?;
    let q_example = q[3];
    check(rel(q_example, 1.78e5) < 0.05, format!("Q at κ² = 0.052 is {q_example:.4e}"))?;

    let pump_kappas = vec![0.05, 0.1, 0.21, 0.4, 0.7];
    let half = sweep(
        &cfg,
        &SweepSpec {
            parameter: "couplers.pump_kappa2".into(),
            values: pump_kappas.clone(),
            outputs: vec![SweepOutput::PumpHalfFsr],
        },
    )
    .map_err(err)?
    .column("pump_half_fsr")
    .ok_or("no pump column")?;
    check(monotone(&half, true), format!("half-FSR value not increasing with κ_p²: {half:?}"))?;

    let detuning: Vec<f64> = (0..=20).map(|k| -0.5 + k as f64 / 20.0).collect();
    let mut at_half = Vec::new();
    for kp in [0.1, 0.21, 0.5] {
        let c = cfg.with_value("couplers.pump_kappa2", kp).map_err(err)?;
        let t = sweep(&c, &SweepSpec { parameter: PUMP_DETUNING_PATH.into(), values: detuning.clone(), outputs: vec![] })
            .map_err(err)?;
        let pgr = t.column("relative_pgr").ok_or("no relative_pgr column")?;
        at_half.push(pgr[20]);
    }
    check(monotone(&at_half, true), format!("PGR at half-FSR detuning not increasing: {at_half:?}"))?;
    within_time(start.elapsed(), 30.0)?;
    Ok(format!(
        "Q {:.3e} → {:.3e}, fraction {:.3} → {:.3} over κ² {}–{}; Q(0.052) = {q_example:.4e}; \
         half-FSR PGR {:.3e} → {:.3e} over κ_p² {}–{}",
        q[0],
        q[q.len() - 1],
        frac[0],
        frac[frac.len() - 1],
        kappas[0],
        kappas[kappas.len() - 1],
        half[0],
        half[half.len() - 1],
        pump_kappas[0],
        pump_kappas[pump_kappas.len() - 1]
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("self-consistency triple", criterion_1),
        ("internal/external ratio and totals", criterion_2),
        ("island census and Schmidt metrics", criterion_3),
        ("resonance fitting round trip", criterion_4),
        ("cavity enhancement algebra", criterion_5),
        ("quantum-core limits", criterion_6),
        ("Schmidt oracles", criterion_7),
        ("bend self-convergence", criterion_8),
        ("sweep trends", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.2} s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.2} s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
