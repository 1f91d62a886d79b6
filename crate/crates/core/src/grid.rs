//! Uniform 2-D transverse grids with physical coordinates, sampled fields and
//! the ring utilities (azimuthal spectra, peak counting) built on them.
//!
//! Sample `(i, j)` sits at `x = (i - nx/2)·dx`, `y = (j - ny/2)·dy`, so the
//! beam axis `(0, 0)` is always a grid point. Values are stored row-major
//! with `y` as the slow index: `values[j * nx + i]`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Sample counts and physical half extents of a centered grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    half_extent_x: f64,
    half_extent_y: f64,
}

impl GridSpec {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(nx: usize, ny: usize, half_extent_x: f64, half_extent_y: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < Self::MIN_SAMPLES || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "{name}={n} must be a power of two >= {}",
                    Self::MIN_SAMPLES
                )));
            }
        }
        for (name, h) in [("half_extent_x", half_extent_x), ("half_extent_y", half_extent_y)] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidGrid(format!("{name}={h} must be finite and > 0")));
            }
        }
        Ok(Self {
            nx,
            ny,
            half_extent_x,
            half_extent_y,
        })
    }

    pub fn square(n: usize, half_extent: f64) -> Result<Self> {
        Self::new(n, n, half_extent, half_extent)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn half_extent_x(&self) -> f64 {
        self.half_extent_x
    }

    pub fn half_extent_y(&self) -> f64 {
        self.half_extent_y
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent_x / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_extent_y / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.dx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny / 2) as f64) * self.dy()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn xy(&self, idx: usize) -> (f64, f64) {
        (self.x(idx % self.nx), self.y(idx / self.nx))
    }

    /// Polar coordinates of a flat index, `phi` in `[0, 2π)`.
    #[inline]
    pub fn polar(&self, idx: usize) -> (f64, f64) {
        let (x, y) = self.xy(idx);
        polar_of(x, y)
    }

    /// Largest radius for which ring extraction stays clear of the edges.
    pub fn safe_ring_radius(&self) -> f64 {
        self.half_extent_x.min(self.half_extent_y) / std::f64::consts::SQRT_2
    }

    /// Same grid with both sample counts doubled.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.nx * 2, self.ny * 2, self.half_extent_x, self.half_extent_y)
    }
}

#[inline]
pub(crate) fn polar_of(x: f64, y: f64) -> (f64, f64) {
    let r = x.hypot(y);
    let mut phi = y.atan2(x);
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi -= TAU;
    }
    (r, phi)
}

/// Complex scalar field on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    spec: GridSpec,
    values: Vec<Complex64>,
}

/// Real scalar field (intensities, densities, potentials) on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField2D {
    spec: GridSpec,
    values: Vec<f64>,
}

macro_rules! field_common {
    ($ty:ident, $elem:ty) => {
        impl $ty {
            pub fn from_values(spec: GridSpec, values: Vec<$elem>) -> Result<Self> {
                if values.len() != spec.len() {
                    return Err(Error::InvalidGrid(format!(
                        "expected {} values, got {}",
                        spec.len(),
                        values.len()
                    )));
                }
                let field = Self { spec, values };
                field.check_finite()?;
                Ok(field)
            }

            pub fn zeros(spec: GridSpec) -> Self {
                Self {
                    spec,
                    values: vec![<$elem>::default(); spec.len()],
                }
            }

            pub fn spec(&self) -> &GridSpec {
                &self.spec
            }

            pub fn values(&self) -> &[$elem] {
                &self.values
            }

            pub fn into_values(self) -> Vec<$elem> {
                self.values
            }

            #[inline]
            pub fn at(&self, i: usize, j: usize) -> $elem {
                self.values[self.spec.index(i, j)]
            }

            /// Value at the beam axis sample.
            pub fn center(&self) -> $elem {
                self.at(self.spec.nx / 2, self.spec.ny / 2)
            }

            /// Bilinear interpolation at a physical point strictly inside the grid.
            pub fn interpolate(&self, x: f64, y: f64) -> $elem {
                bilinear(&self.spec, &self.values, x, y)
            }

            /// Catmull-Rom bicubic interpolation at a physical point.
            pub fn interpolate_cubic(&self, x: f64, y: f64) -> $elem {
                bicubic(&self.spec, &self.values, x, y)
            }

            /// `n_phi` equally spaced samples on the ring of radius `r`,
            /// starting at `phi = 0`.
            pub fn ring(&self, r: f64, n_phi: usize) -> Result<Vec<$elem>> {
                check_ring_radius(&self.spec, r)?;
                Ok((0..n_phi)
                    .map(|k| {
                        let phi = TAU * k as f64 / n_phi as f64;
                        self.interpolate(r * phi.cos(), r * phi.sin())
                    })
                    .collect())
            }

            /// New field from `f(flat_index, value)`, evaluated in parallel.
            pub fn map_indexed<F>(&self, f: F) -> Self
            where
                F: Fn(usize, $elem) -> $elem + Sync,
            {
                let values = self
                    .values
                    .par_iter()
                    .enumerate()
                    .map(|(idx, &v)| f(idx, v))
                    .collect();
                Self {
                    spec: self.spec,
                    values,
                }
            }
        }
    };
}

field_common!(ComplexField2D, Complex64);
field_common!(RealField2D, f64);

impl ComplexField2D {
    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            None => Ok(()),
            Some(idx) => {
                let (x, y) = self.spec.xy(idx);
                Err(Error::NonFiniteSample {
                    x,
                    y,
                    value: self.values[idx].to_string(),
                })
            }
        }
    }

    /// L² norm `sqrt(Σ|F|² dx dy)`.
    pub fn norm(&self) -> f64 {
        field_norm(self)
    }

    pub fn norm_sqr_field(&self) -> RealField2D {
        RealField2D {
            spec: self.spec,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Pointwise product with a same-grid field.
    pub fn mul_pointwise(&self, other: &ComplexField2D) -> Result<Self> {
        self.same_grid(other.spec())?;
        Ok(Self {
            spec: self.spec,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn add(&self, other: &ComplexField2D) -> Result<Self> {
        self.same_grid(other.spec())?;
        Ok(Self {
            spec: self.spec,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ComplexField2D) -> Result<Self> {
        self.same_grid(other.spec())?;
        Ok(Self {
            spec: self.spec,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Inner product `Σ conj(self)·other dx dy`.
    pub fn inner(&self, other: &ComplexField2D) -> Result<Complex64> {
        self.same_grid(other.spec())?;
        let re: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a.conj() * b).re).collect();
        let im: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a.conj() * b).im).collect();
        let da = self.spec.cell_area();
        Ok(Complex64::new(pairwise_sum(&re) * da, pairwise_sum(&im) * da))
    }

    fn same_grid(&self, other: &GridSpec) -> Result<()> {
        if &self.spec != other {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        Ok(())
    }
}

impl RealField2D {
    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(idx) => {
                let (x, y) = self.spec.xy(idx);
                Err(Error::NonFiniteSample {
                    x,
                    y,
                    value: self.values[idx].to_string(),
                })
            }
        }
    }

    /// `Σ F dx dy`.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.spec.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Flat index of the largest sample (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (idx, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = idx;
            }
        }
        best
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Rescaled so that the plane integral is one. A zero field is returned unchanged.
    pub fn normalized(&self) -> Self {
        let total = self.integral();
        if total == 0.0 {
            return self.clone();
        }
        self.scale(1.0 / total)
    }
}

/// Evaluates `f(r, phi)` at every sample.
pub fn sample_polar_function<F>(spec: GridSpec, f: F) -> Result<ComplexField2D>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let values: Vec<Complex64> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let (r, phi) = spec.polar(idx);
            f(r, phi)
        })
        .collect();
    ComplexField2D::from_values(spec, values)
}

/// Real-valued counterpart of [`sample_polar_function`].
pub fn sample_polar_real<F>(spec: GridSpec, f: F) -> Result<RealField2D>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let values: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let (r, phi) = spec.polar(idx);
            f(r, phi)
        })
        .collect();
    RealField2D::from_values(spec, values)
}

/// L² norm with a fixed summation tree, bit-reproducible across runs.
pub fn field_norm(field: &ComplexField2D) -> f64 {
    let sq: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    (pairwise_sum(&sq) * field.spec.cell_area()).sqrt()
}

/// Pairwise summation with a fixed split (halves, 32-element leaves).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn check_ring_radius(spec: &GridSpec, r: f64) -> Result<()> {
    let limit = spec.safe_ring_radius();
    if !(r > 0.0 && r < limit) {
        return Err(Error::RingOutsideGrid { radius: r, limit });
    }
    Ok(())
}

fn bilinear<T>(spec: &GridSpec, values: &[T], x: f64, y: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let fi = x / spec.dx() + (spec.nx / 2) as f64;
    let fj = y / spec.dy() + (spec.ny / 2) as f64;
    let i0 = (fi.floor() as isize).clamp(0, spec.nx as isize - 2) as usize;
    let j0 = (fj.floor() as isize).clamp(0, spec.ny as isize - 2) as usize;
    let tx = fi - i0 as f64;
    let ty = fj - j0 as f64;
    let v00 = values[spec.index(i0, j0)];
    let v10 = values[spec.index(i0 + 1, j0)];
    let v01 = values[spec.index(i0, j0 + 1)];
    let v11 = values[spec.index(i0 + 1, j0 + 1)];
    v00 * ((1.0 - tx) * (1.0 - ty)) + v10 * (tx * (1.0 - ty)) + v01 * ((1.0 - tx) * ty) + v11 * (tx * ty)
}

fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Catmull-Rom bicubic interpolation; indices past the edge are clamped.
fn bicubic<T>(spec: &GridSpec, values: &[T], x: f64, y: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let fi = x / spec.dx() + (spec.nx / 2) as f64;
    let fj = y / spec.dy() + (spec.ny / 2) as f64;
    let i0 = (fi.floor() as isize).clamp(0, spec.nx as isize - 2);
    let j0 = (fj.floor() as isize).clamp(0, spec.ny as isize - 2);
    let wx = catmull_rom(fi - i0 as f64);
    let wy = catmull_rom(fj - j0 as f64);
    let at = |i: isize, j: isize| {
        let i = i.clamp(0, spec.nx as isize - 1) as usize;
        let j = j.clamp(0, spec.ny as isize - 1) as usize;
        values[spec.index(i, j)]
    };
    let row = |j: isize| {
        at(i0 - 1, j) * wx[0] + at(i0, j) * wx[1] + at(i0 + 1, j) * wx[2] + at(i0 + 2, j) * wx[3]
    };
    row(j0 - 1) * wy[0] + row(j0) * wy[1] + row(j0 + 1) * wy[2] + row(j0 + 2) * wy[3]
}

/// Azimuthal Fourier coefficients of a field on one ring.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthalSpectrum {
    radius: f64,
    /// Coefficients ordered by harmonic `q = -n/2 .. n/2 - 1`.
    coeffs: Vec<Complex64>,
}

impl AzimuthalSpectrum {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_phi(&self) -> usize {
        self.coeffs.len()
    }

    pub fn q_range(&self) -> std::ops::Range<i64> {
        let half = (self.coeffs.len() / 2) as i64;
        -half..half
    }

    /// Coefficient of harmonic `q`; zero outside the resolved band.
    pub fn coeff(&self, q: i64) -> Complex64 {
        let half = (self.coeffs.len() / 2) as i64;
        if q < -half || q >= half {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(q + half) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.q_range().zip(self.coeffs.iter().copied())
    }

    /// `Σ_q |c_q|²`.
    pub fn power(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&sq)
    }
}

/// `c_q = (1/n) Σ_k F(r, φ_k) e^{-i q φ_k}` with `F` sampled by bicubic interpolation.
pub fn azimuthal_spectrum(field: &ComplexField2D, r: f64, n_phi: usize) -> Result<AzimuthalSpectrum> {
    if n_phi < 64 || !n_phi.is_power_of_two() {
        return Err(Error::param("grid", "n_phi", format!("{n_phi} must be a power of two >= 64")));
    }
    check_ring_radius(field.spec(), r)?;
    let mut buf: Vec<Complex64> = (0..n_phi)
        .map(|k| {
            let phi = TAU * k as f64 / n_phi as f64;
            field.interpolate_cubic(r * phi.cos(), r * phi.sin())
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n_phi);
    fft.process(&mut buf);
    let inv_n = 1.0 / n_phi as f64;
    let half = n_phi / 2;
    // Reorder from FFT bins (0..n) to q = -n/2 .. n/2-1.
    let coeffs = (0..n_phi)
        .map(|k| buf[(k + half) % n_phi] * inv_n)
        .collect();
    Ok(AzimuthalSpectrum { radius: r, coeffs })
}

/// Minimum rise (relative to the ring's max-min range) a local maximum needs
/// over its neighbouring minima to be counted. Filters the small ripples that
/// bilinear interpolation leaves near nulls.
pub const PEAK_PROMINENCE: f64 = 1e-3;

/// Ties within this fraction of the ring maximum are treated as equal.
pub const PEAK_TIE_TOLERANCE: f64 = 1e-9;

/// Number of distinct maxima of `density` around the ring of radius `r`.
///
/// A maximum must rise above its neighbouring minima by at least
/// [`PEAK_PROMINENCE`] of the ring range and by twice the bilinear
/// interpolation error bound along the ring.
pub fn count_azimuthal_peaks(density: &RealField2D, r: f64) -> Result<usize> {
    let n_phi = ring_sample_count(density.spec(), r);
    let ring = density.ring(r, n_phi)?;
    let max = ring.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ring.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    let mut prominence = PEAK_PROMINENCE;
    if range > 0.0 {
        let floor = 2.0 * ring_interpolation_bound(density, r, n_phi) / range;
        prominence = prominence.max(floor);
    }
    count_circular_peaks(&ring, prominence).ok_or(Error::DegenerateRing { radius: r })
}

/// Upper estimate of the bilinear interpolation error on the ring of radius
/// `r`: the largest `(|Δxx| + |Δyy|) / 8` over the grid cells the ring
/// crosses, with second differences taken on the grid samples.
pub fn ring_interpolation_bound(field: &RealField2D, r: f64, n_phi: usize) -> f64 {
    let spec = field.spec();
    let (nx, ny) = (spec.nx(), spec.ny());
    let second = |i: usize, j: usize| -> f64 {
        let i = i.clamp(1, nx - 2);
        let j = j.clamp(1, ny - 2);
        let c = 2.0 * field.at(i, j);
        (field.at(i + 1, j) - c + field.at(i - 1, j)).abs() + (field.at(i, j + 1) - c + field.at(i, j - 1)).abs()
    };
    let mut bound: f64 = 0.0;
    for k in 0..n_phi {
        let phi = TAU * k as f64 / n_phi as f64;
        let fi = r * phi.cos() / spec.dx() + (nx / 2) as f64;
        let fj = r * phi.sin() / spec.dy() + (ny / 2) as f64;
        let (i0, j0) = (fi.floor().max(0.0) as usize, fj.floor().max(0.0) as usize);
        for (i, j) in [(i0, j0), (i0 + 1, j0), (i0, j0 + 1), (i0 + 1, j0 + 1)] {
            bound = bound.max(second(i.min(nx - 1), j.min(ny - 1)));
        }
    }
    bound / 8.0
}

/// Ring sample count giving roughly four samples per grid cell of arc.
pub fn ring_sample_count(spec: &GridSpec, r: f64) -> usize {
    let h = spec.dx().min(spec.dy());
    let n = (4.0 * TAU * r / h).ceil().max(256.0) as usize;
    n.next_power_of_two()
}

/// Hysteresis peak count on a periodic sequence. Returns `None` for an
/// all-zero ring.
pub fn count_circular_peaks(ring: &[f64], prominence: f64) -> Option<usize> {
    let max = ring.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ring.iter().copied().fold(f64::INFINITY, f64::min);
    if ring.is_empty() || ring.iter().all(|&v| v == 0.0) {
        return None;
    }
    let tie = PEAK_TIE_TOLERANCE * max.abs();
    let threshold = tie.max(prominence * (max - min));
    if max - min <= tie {
        return Some(0);
    }

    let n = ring.len();
    let start = ring
        .iter()
        .enumerate()
        .fold(0, |best, (k, &v)| if v < ring[best] { k } else { best });

    let mut count = 0;
    let mut rising = true;
    let mut valley = ring[start];
    let mut crest = ring[start];
    for step in 1..=n {
        let v = ring[(start + step) % n];
        if rising {
            if v > crest {
                crest = v;
            } else if crest - v > threshold && crest - valley > threshold {
                count += 1;
                rising = false;
                valley = v;
            }
        } else if v < valley {
            valley = v;
        } else if v - valley > threshold {
            rising = true;
            crest = v;
        }
    }
    Some(count)
}

/// Angle of the largest sample on a ring, refined by a parabola through the
/// neighbouring samples.
pub fn ring_argmax_angle(ring: &[f64]) -> f64 {
    let n = ring.len();
    let k = ring
        .iter()
        .enumerate()
        .fold(0, |best, (k, &v)| if v > ring[best] { k } else { best });
    let prev = ring[(k + n - 1) % n];
    let next = ring[(k + 1) % n];
    let denom = prev - 2.0 * ring[k] + next;
    let shift = if denom != 0.0 { 0.5 * (prev - next) / denom } else { 0.0 };
    (TAU * (k as f64 + shift) / n as f64).rem_euclid(TAU)
}

/// Radians wrapped into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}
