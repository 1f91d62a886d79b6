//! Closed-form paraxial optical fields: the Laguerre-Gaussian beam, the
//! reference Gaussian beam, the thin lens, and their interference pattern
//! (the spiral light mask).
//!
//! Both beams co-propagate along `+z` and share the carrier `e^{ikz}`, which
//! is never stored in transverse fields. Field amplitudes carry the factor
//! `1/2` of the closed forms, so intensity is `(c ε0 / 2)·|E|²` of the total
//! transverse field.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::constants::{EPSILON_0, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::grid::{sample_polar_function, sample_polar_real, ComplexField2D, GridSpec, RealField2D};
use crate::special::{assoc_laguerre, lg_norm_factor};

/// How a beam's field strength is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamStrength {
    /// Total power through the `z = 0` plane, W.
    Power(f64),
    /// Peak amplitude `E_0` of the closed-form field, V/m.
    Amplitude(f64),
}

impl BeamStrength {
    fn validate(self, module: &'static str) -> Result<()> {
        let (name, v) = match self {
            BeamStrength::Power(p) => ("power", p),
            BeamStrength::Amplitude(a) => ("amplitude", a),
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::param(module, name, format!("{v} must be finite and >= 0")));
        }
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::param("optics", name, format!("{v} must be finite and > 0")));
    }
    Ok(())
}

/// Laguerre-Gaussian beam `LG_p^ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgBeam {
    ell: i32,
    p: u32,
    w0: f64,
    wavelength: f64,
    strength: BeamStrength,
}

impl LgBeam {
    pub fn new(ell: i32, p: u32, w0: f64, wavelength: f64, strength: BeamStrength) -> Result<Self> {
        positive("w0", w0)?;
        positive("wavelength", wavelength)?;
        strength.validate("optics")?;
        Ok(Self {
            ell,
            p,
            w0,
            wavelength,
            strength,
        })
    }

    pub fn ell(&self) -> i32 {
        self.ell
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn strength(&self) -> BeamStrength {
        self.strength
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    pub fn rayleigh_range(&self) -> f64 {
        rayleigh_range(self.w0, self.wavelength)
    }

    /// `E_GL,0` in V/m.
    pub fn amplitude(&self) -> f64 {
        match self.strength {
            BeamStrength::Amplitude(a) => a,
            BeamStrength::Power(p) => amplitude_from_power(p, self.w0),
        }
    }
}

/// Fundamental Gaussian reference beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    w0: f64,
    wavelength: f64,
    strength: BeamStrength,
}

impl GaussianBeam {
    pub fn new(w0: f64, wavelength: f64, strength: BeamStrength) -> Result<Self> {
        positive("w0", w0)?;
        positive("wavelength", wavelength)?;
        strength.validate("optics")?;
        Ok(Self {
            w0,
            wavelength,
            strength,
        })
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn strength(&self) -> BeamStrength {
        self.strength
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    pub fn rayleigh_range(&self) -> f64 {
        rayleigh_range(self.w0, self.wavelength)
    }

    /// `E_G,0` in V/m.
    pub fn amplitude(&self) -> f64 {
        match self.strength {
            BeamStrength::Amplitude(a) => a,
            BeamStrength::Power(p) => amplitude_from_power(p, self.w0),
        }
    }
}

/// Thin lens of refractive index `n`, thickness `d` and focal length `f`.
/// An infinite focal length is allowed and means a flat plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinLens {
    n: f64,
    d: f64,
    f: f64,
}

impl ThinLens {
    pub fn new(n: f64, d: f64, f: f64) -> Result<Self> {
        if !(n.is_finite() && n > 1.0) {
            return Err(Error::param("optics", "n", format!("{n} must be > 1")));
        }
        positive("d", d)?;
        if f == 0.0 || f.is_nan() {
            return Err(Error::param("optics", "f", format!("{f} must be nonzero")));
        }
        Ok(Self { n, d, f })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    /// Full-precision plate phase `k n d` for the given wavelength.
    pub fn knd(&self, wavelength: f64) -> f64 {
        TAU * self.n * self.d / wavelength
    }

    /// `k n d mod 2π`, reduced in cycles before multiplying by 2π so the
    /// ~1e5 rad total loses no petal-phase accuracy.
    pub fn knd_reduced(&self, wavelength: f64) -> f64 {
        let cycles = self.n * self.d / wavelength;
        TAU * cycles.fract()
    }

    /// Quadratic lens coefficient `a = k / 2f` (m⁻²).
    pub fn quadratic_coefficient(&self, wavelength: f64) -> f64 {
        TAU / wavelength / (2.0 * self.f)
    }
}

/// `z_R = π w0² / λ`.
pub fn rayleigh_range(w0: f64, wavelength: f64) -> f64 {
    PI * w0 * w0 / wavelength
}

/// `w(z) = w0 sqrt(1 + z²/z_R²)`.
pub fn beam_width(w0: f64, wavelength: f64, z: f64) -> f64 {
    let zr = rayleigh_range(w0, wavelength);
    w0 * (1.0 + (z / zr).powi(2)).sqrt()
}

/// `E_0` for which `∫ (c ε0/2)|E(r,φ,0)|² dA = power`, given the `1/2`
/// inside the closed-form amplitude. The same value holds for every LG mode
/// because the `sqrt(p!/(p+|ℓ|)!)` factor normalizes the radial integral.
pub fn amplitude_from_power(power: f64, w0: f64) -> f64 {
    (16.0 * power / (PI * w0 * w0 * SPEED_OF_LIGHT * EPSILON_0)).sqrt()
}

/// Intensity in W/m² of a transverse field amplitude.
#[inline]
pub fn intensity_from_field(e_sq: f64) -> f64 {
    0.5 * SPEED_OF_LIGHT * EPSILON_0 * e_sq
}

/// Real LG envelope `E_{|ℓ|,p}(r, z)`. Can be negative where the Laguerre
/// polynomial is.
pub fn lg_envelope(beam: &LgBeam, r: f64, z: f64) -> f64 {
    let zr = beam.rayleigh_range();
    let stretch = (1.0 + (z / zr).powi(2)).sqrt();
    let w = beam.w0 * stretch;
    let abs_ell = beam.ell.unsigned_abs();
    let u = r * std::f64::consts::SQRT_2 / w;
    0.5 * lg_norm_factor(beam.p, abs_ell) * beam.amplitude() / stretch
        * u.powi(abs_ell as i32)
        * (-(r * r) / (w * w)).exp()
        * assoc_laguerre(beam.p, abs_ell as f64, u * u)
}

/// LG phase `Θ = ℓφ − (2p+|ℓ|+1)·atan(z/z_R) + k z r² / (2(z² + z_R²))`.
pub fn lg_phase(beam: &LgBeam, r: f64, phi: f64, z: f64) -> f64 {
    let zr = beam.rayleigh_range();
    let gouy_order = (2 * beam.p + beam.ell.unsigned_abs() + 1) as f64;
    beam.ell as f64 * phi - gouy_order * (z / zr).atan()
        + beam.wavenumber() * z * r * r / (2.0 * (z * z + zr * zr))
}

/// Complex transverse LG field.
pub fn lg_field(beam: &LgBeam, r: f64, phi: f64, z: f64) -> Complex64 {
    Complex64::from_polar(lg_envelope(beam, r, z), lg_phase(beam, r, phi, z))
}

/// Gaussian amplitude and phase `(E_G(r,z), Θ_G(r,z))`.
pub fn gaussian_field(beam: &GaussianBeam, r: f64, z: f64) -> (f64, f64) {
    let zr = beam.rayleigh_range();
    let stretch2 = 1.0 + (z / zr).powi(2);
    let w2 = beam.w0 * beam.w0 * stretch2;
    let amp = 0.5 * beam.amplitude() / stretch2.sqrt() * (-(r * r) / w2).exp();
    let phase = beam.wavenumber() * z * r * r / (2.0 * (z * z + zr * zr)) - (z / zr).atan();
    (amp, phase)
}

/// Lens phase `−knd + k r² / 2f`, with `knd` reduced mod 2π.
fn lens_phase(lens: &ThinLens, wavelength: f64, r: f64) -> f64 {
    let k = TAU / wavelength;
    let quad = if lens.f.is_infinite() { 0.0 } else { k * r * r / (2.0 * lens.f) };
    quad - lens.knd_reduced(wavelength)
}

/// Gaussian beam after the thin lens: `E_G e^{iΘ_G} e^{−iknd} e^{ikr²/2f}`.
pub fn lensed_gaussian(beam: &GaussianBeam, lens: &ThinLens, r: f64, z: f64) -> Complex64 {
    let (amp, phase) = gaussian_field(beam, r, z);
    Complex64::from_polar(amp, phase + lens_phase(lens, beam.wavelength, r))
}

/// The LG beam, the lensed reference beam and the lens that together form
/// the spiral light mask. Both beams share one wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralMask {
    pub lg: LgBeam,
    pub gaussian: GaussianBeam,
    pub lens: ThinLens,
}

impl SpiralMask {
    pub fn new(lg: LgBeam, gaussian: GaussianBeam, lens: ThinLens) -> Result<Self> {
        if lg.wavelength != gaussian.wavelength {
            return Err(Error::WavelengthMismatch {
                lg: lg.wavelength,
                gaussian: gaussian.wavelength,
            });
        }
        Ok(Self { lg, gaussian, lens })
    }

    pub fn wavelength(&self) -> f64 {
        self.lg.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        self.lg.wavenumber()
    }

    /// Total transverse field at one point.
    pub fn field_at(&self, r: f64, phi: f64, z: f64) -> Complex64 {
        lg_field(&self.lg, r, phi, z) + lensed_gaussian(&self.gaussian, &self.lens, r, z)
    }

    /// `|E|²` from the closed-form interference law: the two envelopes
    /// squared plus the cross term `2 E_LG E_G cos(ℓφ − (2p+|ℓ|) atan(z/z_R)
    /// + knd − kr²/2f)`.
    pub fn interference_sq_at(&self, r: f64, phi: f64, z: f64) -> f64 {
        let e_lg = lg_envelope(&self.lg, r, z);
        let (e_g, _) = gaussian_field(&self.gaussian, r, z);
        let zr = self.lg.rayleigh_range();
        let gouy = (2 * self.lg.p + self.lg.ell.unsigned_abs()) as f64 * (z / zr).atan();
        let arg = self.lg.ell as f64 * phi - gouy - lens_phase(&self.lens, self.wavelength(), r);
        e_lg * e_lg + e_g * e_g + 2.0 * e_lg * e_g * arg.cos()
    }

    /// Angle `φ ∈ [0, 2π/|ℓ|)` of the cross-term maximum on the ring of
    /// radius `r` at `z = 0` (assuming `E_LG E_G > 0`).
    pub fn spiral_arm_angle(&self, r: f64) -> f64 {
        if self.lg.ell == 0 {
            return 0.0;
        }
        let ell = self.lg.ell as f64;
        let period = TAU / ell.abs();
        (lens_phase(&self.lens, self.wavelength(), r) / ell).rem_euclid(period)
    }
}

/// Unit convention for [`mask_intensity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityUnits {
    WattsPerSquareMetre,
    /// Divided by the saturation intensity `I_S` (W/m²).
    Saturation(f64),
}

impl IntensityUnits {
    fn divisor(self) -> Result<f64> {
        match self {
            IntensityUnits::WattsPerSquareMetre => Ok(1.0),
            IntensityUnits::Saturation(i_s) if i_s.is_finite() && i_s > 0.0 => Ok(i_s),
            IntensityUnits::Saturation(i_s) => {
                Err(Error::param("optics", "saturation_intensity", format!("{i_s} must be > 0")))
            }
        }
    }
}

/// Total transverse mask field on the grid at plane `z`.
pub fn mask_field(mask: &SpiralMask, spec: GridSpec, z: f64) -> Result<ComplexField2D> {
    sample_polar_function(spec, |r, phi| mask.field_at(r, phi, z))
}

/// Mask intensity `(c ε0/2)|E|²`, optionally in saturation units.
pub fn mask_intensity(mask: &SpiralMask, spec: GridSpec, z: f64, units: IntensityUnits) -> Result<RealField2D> {
    let div = units.divisor()?;
    sample_polar_real(spec, |r, phi| intensity_from_field(mask.field_at(r, phi, z).norm_sqr()) / div)
}

/// Same intensity evaluated through the closed-form interference law
/// instead of the complex field sum.
pub fn interference_intensity(
    mask: &SpiralMask,
    spec: GridSpec,
    z: f64,
    units: IntensityUnits,
) -> Result<RealField2D> {
    let div = units.divisor()?;
    sample_polar_real(spec, |r, phi| intensity_from_field(mask.interference_sq_at(r, phi, z)) / div)
}
