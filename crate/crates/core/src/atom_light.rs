//! Two-level atom coupled to the spiral mask: Rabi frequencies, the optical
//! dipole potential `U = −2ħ|Ω|²/Δ`, and the Raman-Nath validity report.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::diffraction::{initial_packet, WavePacket};
use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, sample_polar_real, GridSpec, RealField2D};
use crate::optics::ThinLens;
use crate::special::{assoc_laguerre, lg_norm_factor};

/// Atomic species data. All values are caller-supplied physical constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelAtom {
    transition_wavelength: f64,
    linewidth: f64,
    mass: f64,
    saturation_intensity: f64,
}

impl TwoLevelAtom {
    pub fn new(transition_wavelength: f64, linewidth: f64, mass: f64, saturation_intensity: f64) -> Result<Self> {
        for (name, v) in [
            ("transition_wavelength", transition_wavelength),
            ("linewidth", linewidth),
            ("mass", mass),
            ("saturation_intensity", saturation_intensity),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param("atom_light", name, format!("{v} must be finite and > 0")));
            }
        }
        Ok(Self {
            transition_wavelength,
            linewidth,
            mass,
            saturation_intensity,
        })
    }

    pub fn transition_wavelength(&self) -> f64 {
        self.transition_wavelength
    }

    /// `ω0 = 2πc/λ0`, rad/s.
    pub fn transition_frequency(&self) -> f64 {
        TAU * SPEED_OF_LIGHT / self.transition_wavelength
    }

    /// Natural linewidth `Γ`, rad/s.
    pub fn linewidth(&self) -> f64 {
        self.linewidth
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn saturation_intensity(&self) -> f64 {
        self.saturation_intensity
    }
}

/// Rabi amplitudes, detuning and mask geometry seen by the atom.
/// Frequencies are in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiConfig {
    pub omega_g0: f64,
    pub omega_gl0: f64,
    pub detuning: f64,
    pub ell: i32,
    pub p: u32,
    pub w0: f64,
    pub wavelength: f64,
    pub lens: ThinLens,
}

/// Above this `max|Ω|/|Δ|` the leading-order dipole potential is suspect.
pub const WEAK_SATURATION_LIMIT: f64 = 0.5;

impl RabiConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega_g0: f64,
        omega_gl0: f64,
        detuning: f64,
        ell: i32,
        p: u32,
        w0: f64,
        wavelength: f64,
        lens: ThinLens,
    ) -> Result<Self> {
        if detuning == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        for (name, v) in [("omega_g0", omega_g0), ("omega_gl0", omega_gl0), ("detuning", detuning)] {
            if !v.is_finite() {
                return Err(Error::param("atom_light", name, format!("{v} must be finite")));
            }
        }
        for (name, v) in [("w0", w0), ("wavelength", wavelength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param("atom_light", name, format!("{v} must be > 0")));
            }
        }
        let cfg = Self {
            omega_g0,
            omega_gl0,
            detuning,
            ell,
            p,
            w0,
            wavelength,
            lens,
        };
        let s = cfg.saturation_ratio();
        if s > WEAK_SATURATION_LIMIT {
            log::warn!("atom_light: max|Ω|/|Δ| = {s:.3} exceeds {WEAK_SATURATION_LIMIT}; weak-saturation form is inaccurate");
        }
        Ok(cfg)
    }

    /// Same as [`RabiConfig::new`] with frequencies given in units of `Γ`.
    #[allow(clippy::too_many_arguments)]
    pub fn in_linewidths(
        gamma: f64,
        omega_g0: f64,
        omega_gl0: f64,
        detuning: f64,
        ell: i32,
        p: u32,
        w0: f64,
        wavelength: f64,
        lens: ThinLens,
    ) -> Result<Self> {
        Self::new(omega_g0 * gamma, omega_gl0 * gamma, detuning * gamma, ell, p, w0, wavelength, lens)
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Spiral phase `ℓφ + knd − kr²/2f` (with `knd` reduced mod 2π).
    pub fn spiral_angle(&self, r: f64, phi: f64) -> f64 {
        let quad = if self.lens.f().is_infinite() {
            0.0
        } else {
            self.lens.quadratic_coefficient(self.wavelength) * r * r
        };
        self.ell as f64 * phi + self.lens.knd_reduced(self.wavelength) - quad
    }

    /// `max_r |Ω(r)| / |Δ|` bounded by `max_r (Ω_G + |Ω_LG|)`.
    pub fn saturation_ratio(&self) -> f64 {
        let n = 2000;
        let peak = (0..=n)
            .map(|k| {
                let r = 4.0 * self.w0 * k as f64 / n as f64;
                rabi_gaussian(self, r).abs() + rabi_lg(self, r).abs()
            })
            .fold(0.0, f64::max);
        peak / self.detuning.abs()
    }
}

/// `Ω_G(r) = Ω_G,0 exp(−r²/w0²)`.
pub fn rabi_gaussian(cfg: &RabiConfig, r: f64) -> f64 {
    cfg.omega_g0 * (-(r * r) / (cfg.w0 * cfg.w0)).exp()
}

/// `Ω_{|ℓ|,p}(r) = Ω_GL,0 sqrt(p!/(p+|ℓ|)!) (r√2/w0)^|ℓ| exp(−r²/w0²) L_p^|ℓ|(2r²/w0²)`.
pub fn rabi_lg(cfg: &RabiConfig, r: f64) -> f64 {
    let abs_ell = cfg.ell.unsigned_abs();
    let u = r * SQRT_2 / cfg.w0;
    cfg.omega_gl0
        * lg_norm_factor(cfg.p, abs_ell)
        * u.powi(abs_ell as i32)
        * (-(r * r) / (cfg.w0 * cfg.w0)).exp()
        * assoc_laguerre(cfg.p, abs_ell as f64, u * u)
}

/// Interference cross term `2 Ω_G Ω_LG` (rad²/s²).
pub fn cross_term(cfg: &RabiConfig, r: f64) -> f64 {
    2.0 * rabi_gaussian(cfg, r) * rabi_lg(cfg, r)
}

/// `|Ω|² = Ω_G² + Ω_LG² + 2 Ω_G Ω_LG cos(ℓφ + knd − kr²/2f)`.
pub fn rabi_sq_total(cfg: &RabiConfig, r: f64, phi: f64) -> f64 {
    let g = rabi_gaussian(cfg, r);
    let l = rabi_lg(cfg, r);
    g * g + l * l + 2.0 * g * l * cfg.spiral_angle(r, phi).cos()
}

/// Optical dipole potential `U = −2ħ|Ω|²/Δ` in joules.
pub fn dipole_potential(cfg: &RabiConfig, r: f64, phi: f64) -> f64 {
    -2.0 * HBAR * rabi_sq_total(cfg, r, phi) / cfg.detuning
}

pub fn potential_field(cfg: &RabiConfig, spec: GridSpec) -> Result<RealField2D> {
    sample_polar_real(spec, |r, phi| dipole_potential(cfg, r, phi))
}

/// Radius enclosing `fraction` of the area-integrated cross-term magnitude
/// `∫ |2 Ω_G Ω_LG| 2πr dr`.
pub fn spiral_region_radius(cfg: &RabiConfig, fraction: f64) -> f64 {
    let r_max = 8.0 * cfg.w0;
    let n = 20_000;
    let h = r_max / n as f64;
    let integrand = |k: usize| {
        let r = k as f64 * h;
        cross_term(cfg, r).abs() * TAU * r
    };
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    let mut prev = integrand(0);
    for k in 1..=n {
        let cur = integrand(k);
        acc += 0.5 * h * (prev + cur);
        cumulative.push(acc);
        prev = cur;
    }
    if acc == 0.0 {
        return 0.0;
    }
    let target = fraction * acc;
    let k = cumulative.partition_point(|&c| c < target);
    if k == 0 {
        return 0.0;
    }
    let (c0, c1) = (cumulative[k - 1], cumulative[k]);
    let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
    (k as f64 - 1.0 + t) * h
}

/// Fraction of the cross term used to size the spiral region.
pub const SPIRAL_REGION_FRACTION: f64 = 0.95;

/// Outcome of the two Raman-Nath validity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanNathReport {
    /// Packet amplitude FWHM `σ`, m.
    pub packet_fwhm: f64,
    /// Radius enclosing 95% of the cross-term magnitude, m.
    pub spiral_region_radius: f64,
    pub width_criterion_passes: bool,
    /// Position standard deviation of `|Ψ|²` per axis, m.
    pub position_std: f64,
    /// `ħ / (2 σ_x)`, kg·m/s.
    pub momentum_spread: f64,
    /// Transverse kinetic energy per axis, J.
    pub kinetic_energy: f64,
    /// `max |U|` over the grid, J.
    pub max_abs_potential: f64,
    /// `max U − min U` over the grid, J.
    pub potential_depth: f64,
    pub energy_criterion_passes: bool,
}

impl RamanNathReport {
    pub fn passes(&self) -> bool {
        self.width_criterion_passes && self.energy_criterion_passes
    }
}

impl fmt::Display for RamanNathReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        writeln!(f, "criterion (i): packet wider than the spiral region")?;
        writeln!(f, "  packet FWHM sigma          = {:.6e} m", self.packet_fwhm)?;
        writeln!(f, "  spiral region radius (95%) = {:.6e} m", self.spiral_region_radius)?;
        writeln!(f, "  result                     = {}", verdict(self.width_criterion_passes))?;
        writeln!(f, "criterion (ii): transverse kinetic energy below interaction energy")?;
        writeln!(f, "  position std sigma_x       = {:.6e} m", self.position_std)?;
        writeln!(f, "  momentum spread            = {:.6e} kg m/s", self.momentum_spread)?;
        writeln!(f, "  kinetic energy per axis    = {:.6e} J", self.kinetic_energy)?;
        writeln!(f, "  max |U|                    = {:.6e} J", self.max_abs_potential)?;
        writeln!(f, "  potential depth (max-min)  = {:.6e} J", self.potential_depth)?;
        writeln!(f, "  result                     = {}", verdict(self.energy_criterion_passes))
    }
}

/// Evaluates both Raman-Nath criteria on `spec`.
pub fn raman_nath_report(
    cfg: &RabiConfig,
    atom: &TwoLevelAtom,
    packet: &WavePacket,
    spec: GridSpec,
) -> Result<RamanNathReport> {
    let region = spiral_region_radius(cfg, SPIRAL_REGION_FRACTION);

    let psi = initial_packet(packet, spec)?;
    let density = psi.norm_sqr_field();
    let position_std = position_std_x(&density);
    let momentum_spread = HBAR / (2.0 * position_std);
    let kinetic_energy = momentum_spread * momentum_spread / (2.0 * atom.mass());

    let u = potential_field(cfg, spec)?;
    let (u_min, u_max) = (u.min(), u.max());
    let max_abs_potential = u_min.abs().max(u_max.abs());

    Ok(RamanNathReport {
        packet_fwhm: packet.fwhm(),
        spiral_region_radius: region,
        width_criterion_passes: packet.fwhm() > region,
        position_std,
        momentum_spread,
        kinetic_energy,
        max_abs_potential,
        potential_depth: u_max - u_min,
        energy_criterion_passes: kinetic_energy < max_abs_potential,
    })
}

fn position_std_x(density: &RealField2D) -> f64 {
    let spec = density.spec();
    let w = density.values();
    let xs: Vec<f64> = (0..w.len()).map(|idx| spec.xy(idx).0 * w[idx]).collect();
    let x2s: Vec<f64> = (0..w.len()).map(|idx| spec.xy(idx).0.powi(2) * w[idx]).collect();
    let total = pairwise_sum(w);
    let mean = pairwise_sum(&xs) / total;
    (pairwise_sum(&x2s) / total - mean * mean).sqrt()
}

/// Analytic `σ_x` of `|N exp(−4 ln2 r²/σ²)|²`: `σ / (4 sqrt(ln 2))`.
pub fn gaussian_packet_position_std(fwhm: f64) -> f64 {
    fwhm / (4.0 * (2f64.ln()).sqrt())
}
