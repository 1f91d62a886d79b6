//! Paraxial free-space propagation of transverse matter-wave fields by the
//! angular-spectrum method, and focal-plane search by RMS radius.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, ComplexField2D, GridSpec};

/// Fraction of the Nyquist frequency above which spectral content counts as
/// near-aliased.
pub const NYQUIST_BAND: f64 = 0.9;

/// Largest tolerated spectral energy fraction in the near-Nyquist band.
pub const NYQUIST_ENERGY_TOLERANCE: f64 = 1e-6;

/// Cached FFT plans and spatial-frequency axes for one grid.
pub struct Propagator {
    spec: GridSpec,
    kx: Vec<f64>,
    ky: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator").field("spec", &self.spec).finish()
    }
}

fn frequency_axis(n: usize, d: f64) -> Vec<f64> {
    let dk = TAU / (n as f64 * d);
    (0..n)
        .map(|i| if i < n / 2 { i as f64 * dk } else { (i as f64 - n as f64) * dk })
        .collect()
}

impl Propagator {
    pub fn new(spec: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            spec,
            kx: frequency_axis(spec.nx(), spec.dx()),
            ky: frequency_axis(spec.ny(), spec.dy()),
            fwd_x: planner.plan_fft_forward(spec.nx()),
            inv_x: planner.plan_fft_inverse(spec.nx()),
            fwd_y: planner.plan_fft_forward(spec.ny()),
            inv_y: planner.plan_fft_inverse(spec.ny()),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nyquist_x(&self) -> f64 {
        PI / self.spec.dx()
    }

    pub fn nyquist_y(&self) -> f64 {
        PI / self.spec.dy()
    }

    fn fft2(&self, data: &mut [Complex64], forward: bool) {
        let (nx, ny) = (self.spec.nx(), self.spec.ny());
        let (row_fft, col_fft) = if forward {
            (&self.fwd_x, &self.fwd_y)
        } else {
            (&self.inv_x, &self.inv_y)
        };
        data.par_chunks_mut(nx).for_each(|row| row_fft.process(row));
        let mut transposed = transpose(data, nx, ny);
        transposed.par_chunks_mut(ny).for_each(|col| col_fft.process(col));
        let back = transpose(&transposed, ny, nx);
        data.copy_from_slice(&back);
        if !forward {
            let s = 1.0 / (nx * ny) as f64;
            data.par_iter_mut().for_each(|v| *v *= s);
        }
    }

    /// Unnormalized 2-D DFT of the field samples.
    pub fn spectrum(&self, psi: &ComplexField2D) -> Vec<Complex64> {
        let mut data = psi.values().to_vec();
        self.fft2(&mut data, true);
        data
    }

    /// Fraction of spectral energy with `|k_x|` or `|k_y|` above
    /// `NYQUIST_BAND` of the Nyquist frequency.
    pub fn near_nyquist_fraction(&self, spectrum: &[Complex64]) -> f64 {
        let (nx, kx_lim, ky_lim) = (self.spec.nx(), NYQUIST_BAND * self.nyquist_x(), NYQUIST_BAND * self.nyquist_y());
        let mut band = Vec::new();
        let mut all = Vec::with_capacity(spectrum.len());
        for (idx, v) in spectrum.iter().enumerate() {
            let e = v.norm_sqr();
            all.push(e);
            if self.kx[idx % nx].abs() > kx_lim || self.ky[idx / nx].abs() > ky_lim {
                band.push(e);
            }
        }
        let total = pairwise_sum(&all);
        if total == 0.0 {
            0.0
        } else {
            pairwise_sum(&band) / total
        }
    }

    /// Errors if the field has appreciable energy near the grid Nyquist limit.
    pub fn check_nyquist(&self, spectrum: &[Complex64]) -> Result<()> {
        let fraction = self.near_nyquist_fraction(spectrum);
        if fraction > NYQUIST_ENERGY_TOLERANCE {
            let nyquist = self.nyquist_x().min(self.nyquist_y());
            return Err(Error::Nyquist {
                fraction,
                band_start: NYQUIST_BAND * nyquist,
                nyquist,
            });
        }
        Ok(())
    }

    /// Applies the free-space kernel `exp(−i(k_x² + k_y²) dz / 2K)` to a
    /// spectrum and transforms back.
    pub fn propagate_spectrum(&self, spectrum: &[Complex64], k_carrier: f64, dz: f64) -> ComplexField2D {
        let nx = self.spec.nx();
        let mut data: Vec<Complex64> = spectrum
            .par_iter()
            .enumerate()
            .map(|(idx, v)| {
                let k2 = self.kx[idx % nx].powi(2) + self.ky[idx / nx].powi(2);
                v * Complex64::from_polar(1.0, -k2 * dz / (2.0 * k_carrier))
            })
            .collect();
        self.fft2(&mut data, false);
        ComplexField2D::from_values(self.spec, data).expect("unitary step keeps samples finite")
    }

    /// One propagation step of length `dz` (which may be negative).
    pub fn propagate(&self, psi: &ComplexField2D, k_carrier: f64, dz: f64) -> Result<ComplexField2D> {
        check_carrier(k_carrier)?;
        if !dz.is_finite() {
            return Err(Error::param("propagation", "dz", format!("{dz} must be finite")));
        }
        if psi.spec() != &self.spec {
            return Err(Error::InvalidGrid("field and propagator grids differ".into()));
        }
        let spectrum = self.spectrum(psi);
        self.check_nyquist(&spectrum)?;
        if dz == 0.0 {
            return Ok(psi.clone());
        }
        Ok(self.propagate_spectrum(&spectrum, k_carrier, dz))
    }
}

fn transpose(data: &[Complex64], rows_len: usize, n_rows: usize) -> Vec<Complex64> {
    // data is n_rows rows of rows_len; output is rows_len rows of n_rows.
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(n_rows).enumerate().for_each(|(c, col)| {
        for (r, v) in col.iter_mut().enumerate() {
            *v = data[r * rows_len + c];
        }
    });
    out
}

fn check_carrier(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::param("propagation", "k_carrier", format!("{k} must be > 0")));
    }
    Ok(())
}

/// Single paraxial step; see [`Propagator::propagate`].
pub fn propagate(psi: &ComplexField2D, k_carrier: f64, dz: f64) -> Result<ComplexField2D> {
    Propagator::new(*psi.spec()).propagate(psi, k_carrier, dz)
}

/// `sqrt(⟨r²⟩)` of `|ψ|²` about the beam axis.
pub fn rms_radius(psi: &ComplexField2D) -> f64 {
    let spec = psi.spec();
    let w: Vec<f64> = psi.values().iter().map(|v| v.norm_sqr()).collect();
    let r2w: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            let (x, y) = spec.xy(idx);
            (x * x + y * y) * p
        })
        .collect();
    (pairwise_sum(&r2w) / pairwise_sum(&w)).sqrt()
}

/// Raised-cosine taper over the outer `margin` fraction of each axis.
pub fn apodize(psi: &ComplexField2D, margin: f64) -> ComplexField2D {
    let spec = *psi.spec();
    if margin <= 0.0 {
        return psi.clone();
    }
    let taper = |u: f64| {
        // u = |coordinate| / half_extent in [0, 1]
        let edge = 1.0 - margin;
        if u <= edge {
            1.0
        } else {
            let t = ((u - edge) / margin).min(1.0);
            0.5 * (1.0 + (PI * t).cos())
        }
    };
    psi.map_indexed(|idx, v| {
        let (x, y) = spec.xy(idx);
        v * (taper(x.abs() / spec.half_extent_x()) * taper(y.abs() / spec.half_extent_y()))
    })
}

/// Scan settings for [`find_focus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub k_carrier: f64,
    pub z_start: f64,
    pub z_end: f64,
    pub n_planes: usize,
    /// Fraction of each axis tapered by the raised-cosine window.
    pub apodization: f64,
}

/// Default edge taper fraction.
pub const DEFAULT_APODIZATION: f64 = 0.1;

impl PropagationPlan {
    pub fn new(k_carrier: f64, z_start: f64, z_end: f64, n_planes: usize) -> Result<Self> {
        let plan = Self {
            k_carrier,
            z_start,
            z_end,
            n_planes,
            apodization: DEFAULT_APODIZATION,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_apodization(mut self, margin: f64) -> Result<Self> {
        self.apodization = margin;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_carrier(self.k_carrier)?;
        if !(self.z_start.is_finite() && self.z_end.is_finite() && self.z_end > self.z_start) {
            return Err(Error::param(
                "propagation",
                "z_end",
                format!("need z_end > z_start, got [{}, {}]", self.z_start, self.z_end),
            ));
        }
        if self.n_planes < 2 {
            return Err(Error::param("propagation", "n_planes", "must be >= 2"));
        }
        if !(0.0..0.5).contains(&self.apodization) {
            return Err(Error::param("propagation", "apodization", "must lie in [0, 0.5)"));
        }
        Ok(())
    }

    pub fn planes(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.z_end - self.z_start) / (self.n_planes - 1) as f64;
        (0..self.n_planes).map(move |i| self.z_start + i as f64 * step)
    }
}

/// Result of a focal scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Focus {
    pub z: f64,
    pub rms_radius: f64,
    /// `(z, rms radius)` of every scanned plane.
    pub scan: Vec<(f64, f64)>,
}

/// Locates the plane of smallest RMS radius: a uniform scan followed by
/// golden-section refinement to `1e-4·(z_end − z_start)`.
pub fn find_focus(psi: &ComplexField2D, plan: &PropagationPlan) -> Result<Focus> {
    plan.validate()?;
    let prop = Propagator::new(*psi.spec());
    let tapered = apodize(psi, plan.apodization);
    let spectrum = prop.spectrum(&tapered);
    prop.check_nyquist(&spectrum)?;
    let rms_at = |z: f64| rms_radius(&prop.propagate_spectrum(&spectrum, plan.k_carrier, z));

    let zs: Vec<f64> = plan.planes().collect();
    let scan: Vec<(f64, f64)> = zs.iter().map(|&z| (z, rms_at(z))).collect();
    let best = scan
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if s.1 < scan[b].1 { i } else { b });
    if best == 0 || best == scan.len() - 1 {
        return Err(Error::MonotoneInRange {
            z_start: plan.z_start,
            z_end: plan.z_end,
        });
    }

    let tol = 1e-4 * (plan.z_end - plan.z_start);
    let (mut lo, mut hi) = (zs[best - 1], zs[best + 1]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (rms_at(c), rms_at(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = rms_at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = rms_at(d);
        }
    }
    let z = 0.5 * (lo + hi);
    Ok(Focus {
        z,
        rms_radius: rms_at(z),
        scan,
    })
}

/// Matter-wave focal length of an order with quadratic phase `−m a r²`:
/// equating `m a r²` with `K r² / 2F` gives `F = K / (2 m a) = (K/k)·f/m`.
pub fn predicted_focal_length(k_carrier: f64, m: i32, a: f64) -> f64 {
    k_carrier / (2.0 * m as f64 * a)
}
