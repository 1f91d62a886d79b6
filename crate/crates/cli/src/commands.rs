//! One function per CLI verb. Each computes everything in memory first and
//! returns the files to write, so a failing run leaves nothing behind.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ferriswheel::atom_light::{potential_field, raman_nath_report};
use ferriswheel::diffraction::{
    decompose_orders, ferris_density, ferris_density_from_orders, initial_packet, max_imprint_phase, order_weights,
    phase_imprint,
};
use ferriswheel::grid::count_azimuthal_peaks;
use ferriswheel::optics::{mask_intensity, IntensityUnits};
use ferriswheel::propagation::{find_focus, predicted_focal_length};
use ferriswheel::{Error, RealField2D};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::field_io::{field_to_bytes, FieldData};
use crate::image::{encode_pgm, encode_png, levels};

/// Files and a human-readable report produced by one command.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, Vec<u8>)>,
    pub report: String,
}

impl Output {
    fn field(&mut self, cfg: &RunConfig, name: &str, quantity: &str, units: &str, data: FieldData) {
        let params = header_params(cfg);
        self.files
            .push((format!("{name}.csv"), field_to_bytes(quantity, units, &params, &data)));
    }

    fn image(&mut self, cfg: &RunConfig, name: &str, field: &RealField2D) -> Result<()> {
        let format = cfg.output_format()?;
        if !format.pgm() {
            return Ok(());
        }
        let l = levels(field, cfg.gamma()?);
        self.files.push((format!("{name}.pgm"), encode_pgm(&l)));
        if format.png() {
            self.files.push((format!("{name}.png"), encode_png(&l, cfg.colormap()?)));
        }
        Ok(())
    }

    fn text(&mut self, name: &str) {
        self.files.push((name.to_string(), self.report.clone().into_bytes()));
    }

    /// Writes every file into `dir` through a temporary file and a rename.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
            tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
            tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
            tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}

/// Configuration echo for file headers. Output settings are left out so that
/// the same physics produces the same bytes wherever it is written.
fn header_params(cfg: &RunConfig) -> Vec<(String, String)> {
    cfg.echo().into_iter().filter(|(k, _)| !k.starts_with("output.")).collect()
}

pub fn mask(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.grid()?;
    let mask = cfg.mask()?;
    let units = cfg.intensity_units()?;
    let z = cfg.mask_plane()?;
    let intensity = mask_intensity(&mask, spec, z, units)?;
    let unit_name = match units {
        IntensityUnits::WattsPerSquareMetre => "W/m^2",
        IntensityUnits::Saturation(_) => "I_S",
    };

    let mut out = Output::default();
    let _ = writeln!(out.report, "mask intensity at z = {z:e} m on {}x{} grid", spec.nx(), spec.ny());
    let _ = writeln!(out.report, "  min = {:.6e} {unit_name}", intensity.min());
    let _ = writeln!(out.report, "  max = {:.6e} {unit_name}", intensity.max());
    out.field(cfg, "mask_intensity", "intensity", unit_name, FieldData::Real(intensity.clone()));
    out.image(cfg, "mask_intensity", &intensity)?;
    Ok(out)
}

pub fn potential(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.grid()?;
    let rabi = cfg.rabi()?;
    let u = potential_field(&rabi, spec)?;

    let mut out = Output::default();
    let _ = writeln!(out.report, "dipole potential on {}x{} grid", spec.nx(), spec.ny());
    let _ = writeln!(out.report, "  min U   = {:.6e} J", u.min());
    let _ = writeln!(out.report, "  max U   = {:.6e} J", u.max());
    let _ = writeln!(out.report, "  max |U| = {:.6e} J", u.min().abs().max(u.max().abs()));
    out.field(cfg, "potential", "dipole_potential", "J", FieldData::Real(u.clone()));
    out.image(cfg, "potential", &u)?;
    Ok(out)
}

pub fn imprint(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.grid()?;
    let rabi = cfg.rabi()?;
    let tau = cfg.tau()?;
    let psi0 = initial_packet(&cfg.packet()?, spec)?;
    let psi = phase_imprint(&psi0, &rabi, tau);
    let phase = RealField2D::from_values(spec, psi.values().iter().map(|v| v.arg()).collect())?;

    let mut out = Output::default();
    let _ = writeln!(out.report, "phase imprint on {}x{} grid", spec.nx(), spec.ny());
    let _ = writeln!(out.report, "  norm before     = {:.15}", psi0.norm());
    let _ = writeln!(out.report, "  norm after      = {:.15}", psi.norm());
    let _ = writeln!(out.report, "  max phase depth = {:.6e} rad", max_imprint_phase(&rabi, tau, &spec));
    out.field(cfg, "imprint", "wavefunction", "1/m", FieldData::Complex(psi));
    out.image(cfg, "imprint_phase", &phase)?;
    Ok(out)
}

fn order_file_name(m: i32) -> String {
    format!("order_{m:+}")
}

pub fn orders(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.grid()?;
    let params = cfg.imprint()?;
    let psi0 = initial_packet(&cfg.packet()?, spec)?;
    let set = decompose_orders(&psi0, &params, cfg.m_max()?)?;
    let max_files = cfg.max_order_files()? as i32;

    let mut out = Output::default();
    let (r_peak, x_peak) = params.max_e_tau();
    let _ = writeln!(out.report, "diffraction orders, m_max = {}", set.m_max());
    let _ = writeln!(out.report, "  max E tau = {x_peak:.9} at r = {r_peak:.6e} m");
    let _ = writeln!(out.report, "  truncation residual = {:.3e}", set.truncation_residual());
    let _ = writeln!(out.report, "{:>5} {:>9} {:>24}", "m", "helicity", "population");
    let mut total = 0.0;
    for o in set.orders() {
        let p = order_weights(&psi0, &params, o.m);
        total += p;
        let _ = writeln!(out.report, "{:>5} {:>9} {:>24.16e}", o.m, o.helicity, p);
    }
    let _ = writeln!(out.report, "{:>5} {:>9} {:>24.16e}", "sum", "", total);
    for o in set.orders().iter().filter(|o| o.m.abs() <= max_files) {
        out.field(cfg, &order_file_name(o.m), &format!("order_{}", o.m), "1/m", FieldData::Complex(o.field.clone()));
    }
    out.text("populations.txt");
    Ok(out)
}

pub fn ferris(cfg: &RunConfig, m_flag: Option<i32>) -> Result<Output> {
    let spec = cfg.grid()?;
    let params = cfg.imprint()?;
    let packet = cfg.packet()?;
    let m = match m_flag {
        Some(m) => m,
        None => cfg.ferris_order()?,
    };
    let density = ferris_density(&packet, &params, m, spec)?;

    let psi0 = initial_packet(&packet, spec)?;
    let set = decompose_orders(&psi0, &params, cfg.m_max()?)?;
    let two_path = ferris_density_from_orders(&set, m, params.quadratic_coefficient())?;
    let diff = density
        .values()
        .iter()
        .zip(two_path.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let r_peak = {
        let (x, y) = spec.xy(density.argmax());
        x.hypot(y)
    };
    let petals = count_azimuthal_peaks(&density, r_peak)?;

    let mut out = Output::default();
    let _ = writeln!(out.report, "ferris wheel density, m = +/-{}", m.abs());
    let _ = writeln!(out.report, "  peak ring radius          = {r_peak:.6e} m");
    let _ = writeln!(out.report, "  petals on that ring       = {petals}");
    let _ = writeln!(out.report, "  expected petals 2|m|ell   = {}", 2 * m.abs() * params.rabi().ell.abs());
    let _ = writeln!(out.report, "  max |closed - two-path|   = {diff:.3e} (peak {:.6e})", density.max());
    let name = format!("ferris_m{}", m.abs());
    out.field(cfg, &name, "probability_density", "1/m^2", FieldData::Real(density.clone()));
    out.image(cfg, &name, &density)?;
    Ok(out)
}

pub fn propagate(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.grid()?;
    let params = cfg.imprint()?;
    let plan = cfg.propagation_plan()?;
    let wanted = cfg.propagation_orders()?;
    let psi0 = initial_packet(&cfg.packet()?, spec)?;
    let set = decompose_orders(&psi0, &params, cfg.m_max()?)?;
    let a = params.quadratic_coefficient();

    let mut out = Output::default();
    let mut scan_csv = String::from("# columns=m,z,rms_radius\n");
    let _ = writeln!(
        out.report,
        "focal scan over [{:e}, {:e}] m, {} planes, K = {:e} 1/m",
        plan.z_start, plan.z_end, plan.n_planes, plan.k_carrier
    );
    let _ = writeln!(out.report, "{:>4} {:>16} {:>16} {:>10} {:>16}", "m", "predicted (m)", "found (m)", "ratio", "rms at focus (m)");
    let mut found = Vec::new();
    for &m in &wanted {
        let order = set.get(m).ok_or(Error::MissingOrder(m))?;
        if m <= 0 || a == 0.0 {
            let _ = writeln!(out.report, "{m:>4} {:>16} (no converging quadratic phase)", "-");
            continue;
        }
        let predicted = predicted_focal_length(plan.k_carrier, m, a);
        let focus = find_focus(&order.field, &plan)?;
        for (z, rms) in &focus.scan {
            let _ = writeln!(scan_csv, "{m},{z:.16e},{rms:.16e}");
        }
        let _ = writeln!(
            out.report,
            "{m:>4} {predicted:>16.6e} {:>16.6e} {:>10.4} {:>16.6e}",
            focus.z,
            focus.z / predicted,
            focus.rms_radius
        );
        found.push((m, focus.z));
    }
    if let (Some(&(1, z1)), Some(&(2, z2))) = (found.iter().find(|f| f.0 == 1), found.iter().find(|f| f.0 == 2)) {
        let _ = writeln!(out.report, "  z(m=2) / z(m=1) = {:.4}", z2 / z1);
    }
    out.files.push(("focal_scan.csv".to_string(), scan_csv.into_bytes()));
    out.text("focal_report.txt");
    Ok(out)
}

pub fn validate(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.grid()?;
    let report = raman_nath_report(&cfg.rabi()?, &cfg.atom()?, &cfg.packet()?, spec)?;
    let mut out = Output::default();
    let _ = write!(out.report, "{report}");
    let _ = writeln!(out.report, "overall: {}", if report.passes() { "PASS" } else { "FAIL" });
    out.text("raman_nath.txt");
    Ok(out)
}
