//! End-to-end acceptance checks. Each test prints one `[acceptance]` line
//! with the measured numbers and its verdict before asserting.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use ferriswheel::atom_light::raman_nath_report;
use ferriswheel::diffraction::{
    decompose_orders, ferris_density, ferris_density_from_orders, initial_packet, phase_imprint,
};
use ferriswheel::grid::{
    azimuthal_spectrum, count_azimuthal_peaks, ring_argmax_angle, ring_sample_count,
    sample_polar_function,
};
use ferriswheel::optics::{interference_intensity, mask_intensity, IntensityUnits};
use ferriswheel::propagation::{find_focus, predicted_focal_length, rms_radius, PropagationPlan, Propagator};
use ferriswheel::special::bessel_j_orders;
use ferriswheel::{Complex64, GridSpec, RealField2D};
use ferriswheel_cli::commands::Output;
use ferriswheel_cli::config::RunConfig;
use ferriswheel_cli::presets::{Figure, Preset};
use ferriswheel_cli::{execute, Command};

fn preset(p: Preset) -> RunConfig {
    RunConfig::from_ini(p.text(), p.name()).unwrap()
}

fn with(mut cfg: RunConfig, overrides: &[(&str, &str, &str)]) -> RunConfig {
    for (s, k, v) in overrides {
        cfg.set(s, k, v).unwrap();
    }
    cfg
}

fn verdict(id: &str, ok: bool, detail: String) {
    println!("[acceptance] {id}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
}

fn max_abs_diff(a: &RealField2D, b: &RealField2D) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Ordinary least squares `y = a + b x`; returns `(b, R²)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}

#[test]
fn criterion_01_spiral_mask_two_maxima_on_quadratic_locus() {
    let start = Instant::now();
    let cfg = with(preset(Preset::Fig1), &[("grid", "nx", "512")]);
    let spec = cfg.grid().unwrap();
    let mask = cfg.mask().unwrap();
    let intensity = mask_intensity(&mask, spec, 0.0, IntensityUnits::WattsPerSquareMetre).unwrap();

    let w0: f64 = cfg.require("lg", "w0").unwrap();
    let f: f64 = cfg.require("lens", "f").unwrap();
    let ell: i32 = cfg.require("lg", "ell").unwrap();
    let k = mask.wavenumber();
    let expected_slope = k / (2.0 * f * ell as f64);

    let n_r = 200;
    let (r_lo, r_hi) = (0.1 * w0, 1.5 * w0);
    let mut bad_rings = Vec::new();
    let mut r2 = Vec::with_capacity(n_r);
    let mut phi: Vec<f64> = Vec::with_capacity(n_r);
    let period = 2.0 * PI / ell as f64;
    for i in 0..n_r {
        let r = r_lo + (r_hi - r_lo) * i as f64 / (n_r - 1) as f64;
        let ring = intensity.ring(r, ring_sample_count(&spec, r)).unwrap();
        if count_azimuthal_peaks(&intensity, r).ok() != Some(ell as usize) {
            bad_rings.push(r);
        }
        let raw = ring_argmax_angle(&ring).rem_euclid(period);
        // unwrap onto the branch closest to the previous radius
        let value = match phi.last() {
            None => raw,
            Some(&prev) => raw + period * ((prev - raw) / period).round(),
        };
        r2.push(r * r);
        phi.push(value);
    }
    let (slope, r_squared) = linear_fit(&r2, &phi);
    let elapsed = start.elapsed().as_secs_f64();
    let slope_err = (slope - expected_slope).abs() / expected_slope;
    let ok = bad_rings.is_empty() && r_squared > 0.999 && slope_err < 1e-2 && elapsed < 5.0;
    verdict(
        "1 spiral mask",
        ok,
        format!(
            "rings without exactly {ell} maxima: {}, slope {slope:.6e} vs {expected_slope:.6e} (rel {slope_err:.2e}), R^2 {r_squared:.8}, {elapsed:.2} s",
            bad_rings.len()
        ),
    );
    assert!(bad_rings.is_empty(), "radii without {ell} maxima: {bad_rings:?}");
    assert!(r_squared > 0.999);
    assert!(slope_err < 1e-2);
    assert!(elapsed < 5.0);
}

#[test]
fn criterion_02_field_sum_matches_interference_law() {
    let cfg = preset(Preset::Fig1);
    let spec = cfg.grid().unwrap();
    let mask = cfg.mask().unwrap();
    let a = mask_intensity(&mask, spec, 0.0, IntensityUnits::WattsPerSquareMetre).unwrap();
    let b = interference_intensity(&mask, spec, 0.0, IntensityUnits::WattsPerSquareMetre).unwrap();
    let worst = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()))
        .fold(0.0, f64::max);
    let ok = worst < 1e-12;
    verdict("2 field sum vs interference law", ok, format!("max pointwise relative difference {worst:.3e}"));
    assert!(ok);
}

#[test]
fn criterion_03_imprint_is_unitary() {
    let cfg = preset(Preset::Fig3);
    let spec = cfg.grid().unwrap();
    let psi0 = initial_packet(&cfg.packet().unwrap(), spec).unwrap();
    let psi = phase_imprint(&psi0, &cfg.rabi().unwrap(), cfg.tau().unwrap());
    let drift = (psi.norm() - psi0.norm()).abs();
    let ok = drift < 1e-12;
    verdict("3 imprint unitarity", ok, format!("|norm after - norm before| = {drift:.3e}"));
    assert!(ok);
}

#[test]
fn criterion_04_orders_reconstruct_and_bessel_sum_rule() {
    let cfg = preset(Preset::Fig3);
    let spec = cfg.grid().unwrap();
    let params = cfg.imprint().unwrap();
    let psi0 = initial_packet(&cfg.packet().unwrap(), spec).unwrap();
    let set = decompose_orders(&psi0, &params, None).unwrap();
    let direct = phase_imprint(&psi0, params.rabi(), params.tau());
    let rel = set.reconstruct().sub(&direct).unwrap().norm() / direct.norm();

    let w0 = params.rabi().w0;
    let worst_sum = (0..100)
        .map(|i| {
            let r = 3.0 * w0 * i as f64 / 99.0;
            let x = params.profiles(r).e_tau;
            let js = bessel_j_orders(set.m_max() + 30, x);
            let s = js[0] * js[0] + 2.0 * js[1..].iter().map(|v| v * v).sum::<f64>();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let ok = rel < 1e-10 && worst_sum < 1e-12;
    verdict(
        "4 order reconstruction",
        ok,
        format!("m_max {}, relative L2 error {rel:.3e}, worst Bessel sum-rule error {worst_sum:.3e}", set.m_max()),
    );
    assert!(rel < 1e-10);
    assert!(worst_sum < 1e-12);
}

#[test]
fn criterion_05_ring_spectrum_on_helicity_harmonics() {
    let cfg = with(preset(Preset::Fig3), &[("grid", "nx", "1024")]);
    let spec = cfg.grid().unwrap();
    let params = cfg.imprint().unwrap();
    let ell = params.rabi().ell as i64;
    let psi0 = initial_packet(&cfg.packet().unwrap(), spec).unwrap();
    let psi = phase_imprint(&psi0, params.rabi(), params.tau());

    let (r_peak, x_peak) = params.max_e_tau();
    let spectrum = azimuthal_spectrum(&psi, r_peak, 1024).unwrap();
    let total = spectrum.power();
    let off: f64 = spectrum
        .iter()
        .filter(|(q, _)| q.rem_euclid(ell) != 0)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    let leakage = off / total;
    let ratio = spectrum.coeff(ell).norm() / spectrum.coeff(0).norm();
    let js = bessel_j_orders(1, x_peak);
    let oracle = js[1] / js[0];

    let ok_leak = leakage < 1e-6;
    let ok_x = (x_peak - 0.5203).abs() <= 1e-3;
    let ok_ratio = (ratio - 0.2701).abs() <= 1e-3;
    let ok_oracle = (ratio - oracle).abs() <= 1e-3;
    verdict(
        "5 order helicity",
        ok_leak && ok_x && ok_ratio && ok_oracle,
        format!(
            "leakage {leakage:.3e}, max E tau {x_peak:.6} at r {r_peak:.4e} m, |c_l|/|c_0| {ratio:.5} (Bessel ratio {oracle:.5})"
        ),
    );
    assert!(ok_leak);
    assert!(ok_x);
    assert!(ok_ratio);
    assert!(ok_oracle);
}

fn petals_and_agreement(p: Preset) -> (usize, usize, f64) {
    let cfg = preset(p);
    let spec = cfg.grid().unwrap();
    let params = cfg.imprint().unwrap();
    let packet = cfg.packet().unwrap();
    let m = cfg.ferris_order().unwrap();
    let closed = ferris_density(&packet, &params, m, spec).unwrap();
    let psi0 = initial_packet(&packet, spec).unwrap();
    let set = decompose_orders(&psi0, &params, None).unwrap();
    let built = ferris_density_from_orders(&set, m, params.quadratic_coefficient()).unwrap();
    let (x, y) = spec.xy(closed.argmax());
    let petals = count_azimuthal_peaks(&closed, x.hypot(y)).unwrap();
    let expected = (2 * m.abs() * params.rabi().ell.abs()) as usize;
    (petals, expected, max_abs_diff(&closed, &built) / closed.max())
}

#[test]
fn criterion_06_ferris_wheel_petals() {
    let (p3, e3, d3) = petals_and_agreement(Preset::Fig3);
    let (p4, e4, d4) = petals_and_agreement(Preset::Fig4);
    let ok = p3 == 4 && e3 == 4 && p4 == 8 && e4 == 8 && d3 < 1e-9 && d4 < 1e-9;
    verdict(
        "6 ferris wheel densities",
        ok,
        format!("m=1: {p3} petals, m=2: {p4} petals, closed vs two-path (rel. to peak) {d3:.2e} / {d4:.2e}"),
    );
    assert_eq!((p3, p4), (4, 8));
    assert_eq!((e3, e4), (4, 8));
    assert!(d3 < 1e-9 && d4 < 1e-9);
}

fn raman_nath() -> ferriswheel::RamanNathReport {
    let cfg = preset(Preset::Fig3);
    raman_nath_report(
        &cfg.rabi().unwrap(),
        &cfg.atom().unwrap(),
        &cfg.packet().unwrap(),
        cfg.grid().unwrap(),
    )
    .unwrap()
}

#[test]
fn criterion_07i_packet_wider_than_spiral_region() {
    let report = raman_nath();
    let w0 = 180e-6;
    let ok = report.spiral_region_radius <= 0.5 * w0 && report.width_criterion_passes;
    verdict(
        "7(i) Raman-Nath width",
        ok,
        format!(
            "sigma {:.3e} m, spiral region radius {:.4e} m (limit {:.3e} m)",
            report.packet_fwhm,
            report.spiral_region_radius,
            0.5 * w0
        ),
    );
    assert!(report.spiral_region_radius <= 0.5 * w0);
    assert!(report.width_criterion_passes);
}

#[test]
fn criterion_07ii_kinetic_energy_below_potential() {
    let report = raman_nath();
    let e_ok = (1e-36..=1e-34).contains(&report.kinetic_energy);
    let u_ok = (1e-27..=1e-25).contains(&report.max_abs_potential);
    let ok = e_ok && u_ok && report.energy_criterion_passes;
    verdict(
        "7(ii) Raman-Nath energy",
        ok,
        format!(
            "E_kin {:.3e} J, max|U| {:.3e} J, depth {:.3e} J",
            report.kinetic_energy, report.max_abs_potential, report.potential_depth
        ),
    );
    assert!(e_ok);
    assert!(u_ok);
    assert!(report.energy_criterion_passes);
}

fn gaussian(spec: GridSpec, w: f64, k_carrier: f64, focal: f64) -> ferriswheel::ComplexField2D {
    sample_polar_function(spec, |r, _| {
        let curvature = if focal.is_finite() { -k_carrier * r * r / (2.0 * focal) } else { 0.0 };
        Complex64::from_polar((-(r * r) / (w * w)).exp(), curvature)
    })
    .unwrap()
}

/// High-Fresnel-number variant of the reference configuration used for the
/// per-order focal law: same beams and atom, `f = 1 mm`, finer grid.
fn focusing_config() -> RunConfig {
    with(
        preset(Preset::Propagate),
        &[
            ("lens", "f", "1e-3"),
            ("grid", "nx", "1024"),
            ("grid", "half_extent", "2.048e-4"),
            ("propagation", "z_start", "0.02"),
            ("propagation", "z_end", "0.4"),
            ("propagation", "n_planes", "39"),
        ],
    )
}

#[test]
fn criterion_08_propagation_engine() {
    let k = 1e7;

    // analytic spreading of a free Gaussian
    let spec = GridSpec::square(256, 600e-6).unwrap();
    let w = 60e-6;
    let zr = k * w * w / 2.0;
    let g = gaussian(spec, w, k, f64::INFINITY);
    let spread_err = [0.5 * zr, zr, 2.0 * zr]
        .iter()
        .map(|&z| {
            let out = Propagator::new(spec).propagate(&g, k, z).unwrap();
            let expected = w * (1.0 + (z / zr).powi(2)).sqrt() / SQRT_2;
            (rms_radius(&out) - expected).abs() / expected
        })
        .fold(0.0, f64::max);

    // pure lens phase
    let spec = GridSpec::square(256, 300e-6).unwrap();
    let (wl, fl) = (100e-6, 5e-3);
    let zrl = k * wl * wl / 2.0;
    let plan = PropagationPlan::new(k, 0.0, 2.0 * fl, 41).unwrap();
    let lens_focus = find_focus(&gaussian(spec, wl, k, fl), &plan).unwrap().z;
    let lens_expected = fl / (1.0 + (fl / zrl).powi(2));
    let lens_err = (lens_focus - lens_expected).abs() / lens_expected;

    // norm drift over 100 steps
    let g = gaussian(spec, 50e-6, k, 8e-3);
    let prop = Propagator::new(spec);
    let mut psi = g.clone();
    for _ in 0..100 {
        psi = prop.propagate(&psi, k, 4e-5).unwrap();
    }
    let drift = (psi.norm() - g.norm()).abs() / g.norm();

    // per-order focal law
    let cfg = focusing_config();
    let fspec = cfg.grid().unwrap();
    let params = cfg.imprint().unwrap();
    let plan = cfg.propagation_plan().unwrap();
    let psi0 = initial_packet(&cfg.packet().unwrap(), fspec).unwrap();
    let set = decompose_orders(&psi0, &params, None).unwrap();
    let a = params.quadratic_coefficient();
    let mut focus = Vec::new();
    for m in [1, 2] {
        let z = find_focus(&set.get(m).unwrap().field, &plan).unwrap().z;
        focus.push((z, predicted_focal_length(plan.k_carrier, m, a)));
    }
    let order_err = focus
        .iter()
        .map(|(z, p)| (z - p).abs() / p)
        .fold(0.0, f64::max);
    let ratio = focus[1].0 / focus[0].0;

    let ok_spread = spread_err < 1e-6;
    let ok_lens = lens_err < 0.01;
    let ok_order = order_err < 0.05;
    let ok_ratio = (ratio - 0.5).abs() / 0.5 < 0.02;
    let ok_drift = drift < 1e-9;
    verdict(
        "8 propagation",
        ok_spread && ok_lens && ok_order && ok_ratio && ok_drift,
        format!(
            "spreading {spread_err:.2e}, lens focus {lens_err:.2e}, order focus m=1 {:.4e}/{:.4e} m m=2 {:.4e}/{:.4e} m (worst {order_err:.3e}), ratio {ratio:.4}, drift {drift:.2e}",
            focus[0].0, focus[0].1, focus[1].0, focus[1].1
        ),
    );
    assert!(ok_spread);
    assert!(ok_lens);
    assert!(ok_order);
    assert!(ok_ratio);
    assert!(ok_drift);
}

fn run_preset(command: &Command, p: Preset) -> Output {
    execute(command, &preset(p)).unwrap()
}

fn file_bytes(out: &Output) -> Vec<(String, Vec<u8>)> {
    out.files.clone()
}

#[test]
fn criterion_09_outputs_are_deterministic() {
    let cases = [
        (Command::Figure { name: Figure::Fig1 }, Preset::Fig1),
        (Command::Figure { name: Figure::Fig3 }, Preset::Fig3),
        (Command::Figure { name: Figure::Fig4 }, Preset::Fig4),
    ];
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for (command, p) in &cases {
        let first = file_bytes(&run_preset(command, *p));
        let second = file_bytes(&run_preset(command, *p));
        let single = serial.install(|| file_bytes(&run_preset(command, *p)));
        for (name, bytes) in &first {
            checked += 1;
            let same = |other: &Vec<(String, Vec<u8>)>| other.iter().any(|(n, b)| n == name && b == bytes);
            if !same(&second) || !same(&single) {
                mismatches.push(format!("{}:{name}", p.name()));
            }
        }
        assert!(first.iter().any(|(n, _)| n.ends_with(".csv")));
        assert!(first.iter().any(|(n, _)| n.ends_with(".pgm")));
    }
    let ok = mismatches.is_empty();
    verdict(
        "9 determinism",
        ok,
        format!("{checked} files compared across repeated and single-threaded runs, mismatches {mismatches:?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_10_preset_suite_runtime() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let jobs: [(Command, Preset); 5] = [
        (Command::Figure { name: Figure::Fig1 }, Preset::Fig1),
        (Command::Figure { name: Figure::Fig3 }, Preset::Fig3),
        (Command::Figure { name: Figure::Fig4 }, Preset::Fig4),
        (Command::Validate, Preset::Fig3),
        (Command::Propagate, Preset::Propagate),
    ];
    for (i, (command, p)) in jobs.iter().enumerate() {
        let cfg = with(preset(*p), &[("grid", "nx", "256")]);
        let out = execute(command, &cfg).unwrap();
        out.write_to(&dir.path().join(i.to_string())).unwrap();
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = elapsed < 120.0;
    verdict("10 preset suite runtime", ok, format!("{elapsed:.2} s"));
    assert!(ok);
}
