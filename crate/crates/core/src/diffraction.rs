//! Matter-wave side of the pipeline: the initial Gaussian packet, the thin
//! mask phase imprint, its Jacobi-Anger split into atom-vortex orders, the
//! order-selective second imprint, and the Ferris wheel density.
//!
//! With `θ(r, φ) = ℓφ + knd − a r²` and `a = k/2f`, the imprint phase
//! `−2τ|Ω|²/Δ = −(B + C)τ − Eτ cos θ` expands as
//!
//! ```text
//! Ψ(r,φ,0) = Ψ0 e^{−i(B+C)τ} Σ_m i^{−m} J_m(E(r)τ) e^{imθ}
//! ```
//!
//! so order `m` winds as `e^{imℓφ}` and carries the quadratic phase `−m a r²`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::atom_light::{rabi_gaussian, rabi_lg, rabi_sq_total, RabiConfig, TwoLevelAtom};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, sample_polar_function, ComplexField2D, GridSpec, RealField2D};
use crate::special::{bessel_j_orders, bessel_tail_bound};

/// Initial transverse Gaussian packet `N exp(−4 ln2 r²/σ²)`; `σ` is the
/// FWHM of the amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    fwhm: f64,
    k_db: f64,
}

impl WavePacket {
    pub fn new(fwhm: f64, k_db: f64) -> Result<Self> {
        if !(fwhm.is_finite() && fwhm > 0.0) {
            return Err(Error::param("diffraction", "sigma", format!("{fwhm} must be > 0")));
        }
        if !(k_db.is_finite() && k_db > 0.0) {
            return Err(Error::param("diffraction", "k_db", format!("{k_db} must be > 0")));
        }
        Ok(Self { fwhm, k_db })
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    /// Axial de Broglie wavenumber `K_dB` (m⁻¹), carried as metadata.
    pub fn k_db(&self) -> f64 {
        self.k_db
    }

    /// Unnormalized amplitude profile `exp(−4 ln2 r²/σ²)`.
    pub fn profile(&self, r: f64) -> f64 {
        (-4.0 * LN_2 * r * r / (self.fwhm * self.fwhm)).exp()
    }

    /// Continuum normalization `sqrt(8 ln2 / (π σ²))`.
    pub fn analytic_norm(&self) -> f64 {
        (8.0 * LN_2 / (PI * self.fwhm * self.fwhm)).sqrt()
    }
}

/// `Ψ(r, −τ)` on the grid, normalized so that `‖Ψ‖ = 1` on that grid.
pub fn initial_packet(packet: &WavePacket, spec: GridSpec) -> Result<ComplexField2D> {
    if spec.half_extent_x().min(spec.half_extent_y()) < 2.0 * packet.fwhm {
        log::warn!(
            "diffraction: grid half extent below 2 sigma ({:.3e} m); packet is truncated",
            2.0 * packet.fwhm
        );
    }
    let raw = sample_polar_function(spec, |r, _| Complex64::new(packet.profile(r), 0.0))?;
    let norm = raw.norm();
    if norm == 0.0 {
        return Err(Error::param("diffraction", "sigma", "packet underflows on this grid"));
    }
    Ok(raw.scale(1.0 / norm))
}

/// Radial imprint phases `(Bτ, Cτ, Eτ)` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprintProfile {
    pub b_tau: f64,
    pub c_tau: f64,
    pub e_tau: f64,
}

/// `B = 2Ω_LG²/Δ`, `C = 2Ω_G²/Δ`, `E = 4Ω_GΩ_LG/Δ`, each times `τ`.
pub fn imprint_profiles(cfg: &RabiConfig, tau: f64, r: f64) -> ImprintProfile {
    let g = rabi_gaussian(cfg, r);
    let l = rabi_lg(cfg, r);
    let s = tau / cfg.detuning;
    ImprintProfile {
        b_tau: 2.0 * l * l * s,
        c_tau: 2.0 * g * g * s,
        e_tau: 4.0 * g * l * s,
    }
}

/// Everything the thin-mask imprint needs: the coupling and the duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprintParams {
    rabi: RabiConfig,
    tau: f64,
}

impl ImprintParams {
    pub fn new(rabi: RabiConfig, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::param("diffraction", "tau", format!("{tau} must be >= 0")));
        }
        Ok(Self { rabi, tau })
    }

    pub fn rabi(&self) -> &RabiConfig {
        &self.rabi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `a = k/2f` (m⁻²); zero for an infinite focal length.
    pub fn quadratic_coefficient(&self) -> f64 {
        if self.rabi.lens.f().is_infinite() {
            0.0
        } else {
            self.rabi.lens.quadratic_coefficient(self.rabi.wavelength)
        }
    }

    /// Full-precision `knd`.
    pub fn knd(&self) -> f64 {
        self.rabi.lens.knd(self.rabi.wavelength)
    }

    pub fn profiles(&self, r: f64) -> ImprintProfile {
        imprint_profiles(&self.rabi, self.tau, r)
    }

    /// `max_r |E(r)τ|` by a dense scan refined with golden-section search.
    pub fn max_e_tau(&self) -> (f64, f64) {
        let w0 = self.rabi.w0;
        let f = |r: f64| self.profiles(r).e_tau.abs();
        let n = 4000;
        let h = 4.0 * w0 / n as f64;
        let k = (0..=n)
            .map(|k| (k, f(k as f64 * h)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        let lo = (k as f64 - 1.0).max(0.0) * h;
        let hi = (k as f64 + 1.0) * h;
        let r = golden_max(f, lo, hi, 1e-12 * w0);
        (r, f(r))
    }

    /// Smallest `m` with `(x/2)^m / m! < 1e-12` at `x = max_r |E τ|`.
    pub fn auto_m_max(&self) -> u32 {
        auto_m_max_for(self.max_e_tau().1)
    }
}

/// Target bound on the first neglected Bessel order.
pub const TRUNCATION_TOLERANCE: f64 = 1e-12;

fn auto_m_max_for(x: f64) -> u32 {
    (1..).find(|&m| bessel_tail_bound(m, x) < TRUNCATION_TOLERANCE).unwrap_or(1)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Thin-mask imprint `Ψ(r,0) = Ψ0 exp(−2iτ|Ω(r,φ)|²/Δ)`.
pub fn phase_imprint(psi: &ComplexField2D, cfg: &RabiConfig, tau: f64) -> ComplexField2D {
    let spec = *psi.spec();
    let s = -2.0 * tau / cfg.detuning;
    psi.map_indexed(|idx, v| {
        let (r, phi) = spec.polar(idx);
        v * Complex64::from_polar(1.0, s * rabi_sq_total(cfg, r, phi))
    })
}

/// One Jacobi-Anger diffraction order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionOrder {
    pub m: i32,
    /// Azimuthal winding `m ℓ` of the order.
    pub helicity: i64,
    /// Coefficient of `r²` in the order's phase, `−m a` (m⁻²), updated by
    /// second imprints.
    pub quad_phase: f64,
    /// `m k n d` at full precision (rad).
    pub extra_phase: f64,
    pub field: ComplexField2D,
}

/// All orders `−m_max ..= m_max` of one decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSet {
    orders: Vec<DiffractionOrder>,
    m_max: u32,
    /// `Σ_{|m| > m_max} J_m²` at the largest grid argument.
    truncation_residual: f64,
}

impl OrderSet {
    pub fn orders(&self) -> &[DiffractionOrder] {
        &self.orders
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn truncation_residual(&self) -> f64 {
        self.truncation_residual
    }

    pub fn get(&self, m: i32) -> Option<&DiffractionOrder> {
        if m.unsigned_abs() > self.m_max {
            return None;
        }
        self.orders.get((m + self.m_max as i32) as usize)
    }

    fn get_mut(&mut self, m: i32) -> Option<&mut DiffractionOrder> {
        if m.unsigned_abs() > self.m_max {
            return None;
        }
        self.orders.get_mut((m + self.m_max as i32) as usize)
    }

    /// Pointwise sum of all orders. Orders are added from the highest `|m|`
    /// down so the small tails are accumulated first.
    pub fn reconstruct(&self) -> ComplexField2D {
        let spec = *self.orders[0].field.spec();
        let mut sequence: Vec<&DiffractionOrder> = self.orders.iter().collect();
        sequence.sort_by_key(|o| (std::cmp::Reverse(o.m.unsigned_abs()), o.m));
        let values: Vec<Complex64> = (0..spec.len())
            .into_par_iter()
            .map(|idx| sequence.iter().fold(Complex64::new(0.0, 0.0), |acc, o| acc + o.field.values()[idx]))
            .collect();
        ComplexField2D::from_values(spec, values).expect("finite sum of finite orders")
    }

    /// `|order(+m) + order(−m)|²`.
    pub fn pair_density(&self, m: i32) -> Result<RealField2D> {
        let plus = self.get(m.abs()).ok_or(Error::MissingOrder(m.abs()))?;
        let minus = self.get(-m.abs()).ok_or(Error::MissingOrder(-m.abs()))?;
        Ok(plus.field.add(&minus.field)?.norm_sqr_field())
    }
}

/// Splits the imprinted packet into orders `|m| <= m_max`. With `None`, the
/// truncation is sized from the Bessel tail bound.
pub fn decompose_orders(psi0: &ComplexField2D, params: &ImprintParams, m_max: Option<u32>) -> Result<OrderSet> {
    let spec = *psi0.spec();
    let ell = params.rabi.ell;
    let a = params.quadratic_coefficient();
    let knd_red = params.rabi.lens.knd_reduced(params.rabi.wavelength);
    let knd = params.knd();

    // Per-sample radial data: common phase and the Bessel ladder.
    let x_grid_max = (0..spec.len())
        .map(|idx| params.profiles(spec.polar(idx).0).e_tau.abs())
        .fold(0.0, f64::max);
    let m_max = match m_max {
        Some(m) => {
            let edge = bessel_j_orders(m, x_grid_max)[m as usize].abs();
            if edge >= TRUNCATION_TOLERANCE {
                let residual = tail_power(m, x_grid_max);
                return Err(Error::TruncationTooSmall { m_max: m, residual });
            }
            m
        }
        None => auto_m_max_for(x_grid_max),
    };
    let truncation_residual = tail_power(m_max, x_grid_max);

    let ladders: Vec<(Vec<f64>, Complex64)> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let (r, _) = spec.polar(idx);
            let prof = params.profiles(r);
            let common = psi0.values()[idx] * Complex64::from_polar(1.0, -(prof.b_tau + prof.c_tau));
            (bessel_j_orders(m_max, prof.e_tau), common)
        })
        .collect();

    let orders = (-(m_max as i32)..=m_max as i32)
        .map(|m| {
            let values: Vec<Complex64> = (0..spec.len())
                .into_par_iter()
                .map(|idx| {
                    let (r, phi) = spec.polar(idx);
                    let (js, common) = &ladders[idx];
                    let j = signed_bessel(js, m);
                    let theta = ell as f64 * phi + knd_red - a * r * r;
                    let phase = m as f64 * (theta - FRAC_PI_2);
                    common * Complex64::from_polar(j, phase)
                })
                .collect();
            DiffractionOrder {
                m,
                helicity: m as i64 * ell as i64,
                quad_phase: -(m as f64) * a,
                extra_phase: m as f64 * knd,
                field: ComplexField2D::from_values(spec, values).expect("finite order"),
            }
        })
        .collect();

    Ok(OrderSet {
        orders,
        m_max,
        truncation_residual,
    })
}

fn signed_bessel(js: &[f64], m: i32) -> f64 {
    let v = js[m.unsigned_abs() as usize];
    if m < 0 && m % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `Σ_{|m| > m_max} J_m(x)²`, summed explicitly from the ladder.
fn tail_power(m_max: u32, x: f64) -> f64 {
    let extra = m_max + 40 + x.abs().ceil() as u32;
    let js = bessel_j_orders(extra, x);
    2.0 * js[m_max as usize + 1..].iter().rev().map(|v| v * v).sum::<f64>()
}

/// Population `P_m = ∫ |Ψ0|² J_m²(E(r)τ) dA` for a packet normalized to one.
pub fn order_weights(psi0: &ComplexField2D, params: &ImprintParams, m: i32) -> f64 {
    let spec = *psi0.spec();
    let order = m.unsigned_abs();
    let terms: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let (r, _) = spec.polar(idx);
            let j = bessel_j_orders(order, params.profiles(r).e_tau)[order as usize];
            psi0.values()[idx].norm_sqr() * j * j
        })
        .collect();
    pairwise_sum(&terms) * spec.cell_area()
}

/// Ideal second imprint: multiplies only order `+|m_target|` by
/// `exp(+2i|m_target| a r²)`, so orders `±m_target` share the factor
/// `exp(+i|m_target| a r²)`. `m_target = 0` is a no-op.
pub fn second_imprint_ideal(orders: &OrderSet, m_target: i32, a: f64) -> Result<OrderSet> {
    let mut out = orders.clone();
    if m_target == 0 {
        return Ok(out);
    }
    let m = m_target.abs();
    if orders.get(-m).is_none() {
        return Err(Error::MissingOrder(-m));
    }
    let target = out.get_mut(m).ok_or(Error::MissingOrder(m))?;
    let k = 2.0 * m as f64 * a;
    let spec = *target.field.spec();
    target.field = target.field.map_indexed(|idx, v| {
        let (x, y) = spec.xy(idx);
        v * Complex64::from_polar(1.0, k * (x * x + y * y))
    });
    target.quad_phase += k;
    Ok(out)
}

/// Parameters of the physical (detuning-selective) second imprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondImprint {
    /// OAM index `s` of the imprinting field.
    pub s: i32,
    /// Doppler-corrected detuning `Δ0 = ω − ω0 − k V_z` (rad/s).
    pub delta0: f64,
    /// Rabi frequency `Ω'` of the imprinting field, uniform over the packet (rad/s).
    pub omega_prime0: f64,
    /// Interaction time (s).
    pub dt: f64,
    /// Core radius regularizing the `1/r²` azimuthal Doppler shift (m).
    pub r_core: f64,
}

impl SecondImprint {
    /// Order-dependent detuning `Δ_m(r) = Δ0 − s m ħ / (M max(r, r_core)²)`.
    pub fn detuning(&self, m: i32, r: f64, atom: &TwoLevelAtom) -> f64 {
        let rr = r.max(self.r_core);
        self.delta0 - self.s as f64 * m as f64 * HBAR / (atom.mass() * rr * rr)
    }

    /// Imprint phase `Ω'² dt / Δ_m(r)` from `exp(−iU'dt/ħ)`, `U' = −ħΩ'²/Δ_m`.
    pub fn phase(&self, m: i32, r: f64, atom: &TwoLevelAtom) -> f64 {
        self.omega_prime0 * self.omega_prime0 * self.dt / self.detuning(m, r, atom)
    }

    fn check_resonance(&self, m: i32, spec: &GridSpec, atom: &TwoLevelAtom) -> Result<()> {
        let r_far = spec.half_extent_x().hypot(spec.half_extent_y());
        let near = self.detuning(m, self.r_core, atom);
        let far = self.detuning(m, r_far, atom);
        if near == 0.0 || far == 0.0 || near.signum() != far.signum() {
            // Δ_m(r) = 0 at r² = s m ħ / (M Δ0).
            let r2 = self.s as f64 * m as f64 * HBAR / (atom.mass() * self.delta0);
            let radius = if r2 > 0.0 { r2.sqrt() } else { self.r_core };
            return Err(Error::ResonanceCrossing { m, radius });
        }
        Ok(())
    }
}

/// Applies `exp(+iΩ'² dt / Δ_m(r))` to every order.
pub fn second_imprint_physical(orders: &OrderSet, imprint: &SecondImprint, atom: &TwoLevelAtom) -> Result<OrderSet> {
    if !(imprint.r_core.is_finite() && imprint.r_core > 0.0) {
        return Err(Error::param("diffraction", "r_core", format!("{} must be > 0", imprint.r_core)));
    }
    let mut out = orders.clone();
    for order in out.orders.iter_mut() {
        let spec = *order.field.spec();
        imprint.check_resonance(order.m, &spec, atom)?;
        let m = order.m;
        order.field = order.field.map_indexed(|idx, v| {
            let (x, y) = spec.xy(idx);
            v * Complex64::from_polar(1.0, imprint.phase(m, x.hypot(y), atom))
        });
    }
    Ok(out)
}

/// Closed-form Ferris wheel density `4|Ψ0(r)|² J_m²(E(r)τ) cos²(mℓφ + m knd)`,
/// normalized to unit integral.
pub fn ferris_density(packet: &WavePacket, params: &ImprintParams, m: i32, spec: GridSpec) -> Result<RealField2D> {
    if m == 0 {
        return Err(Error::param("diffraction", "m", "Ferris wheel needs m != 0"));
    }
    let psi0 = initial_packet(packet, spec)?;
    let order = m.unsigned_abs();
    let ell = params.rabi.ell as f64;
    let mf = m as f64;
    let knd_red = params.rabi.lens.knd_reduced(params.rabi.wavelength);
    let values: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let (r, phi) = spec.polar(idx);
            let j = bessel_j_orders(order, params.profiles(r).e_tau)[order as usize];
            let c = (mf * (ell * phi + knd_red)).cos();
            4.0 * psi0.values()[idx].norm_sqr() * j * j * c * c
        })
        .collect();
    Ok(RealField2D::from_values(spec, values)?.normalized())
}

/// The same density built from the decomposed orders after the ideal second
/// imprint: `|order(+m) + order(−m)|²`, normalized to unit integral.
pub fn ferris_density_from_orders(orders: &OrderSet, m: i32, a: f64) -> Result<RealField2D> {
    let imprinted = second_imprint_ideal(orders, m, a)?;
    Ok(imprinted.pair_density(m)?.normalized())
}

/// Largest total imprint phase `2τ|Ω|²/|Δ|` over the grid (rad).
pub fn max_imprint_phase(cfg: &RabiConfig, tau: f64, spec: &GridSpec) -> f64 {
    let s = 2.0 * tau / cfg.detuning.abs();
    (0..spec.len())
        .map(|idx| {
            let (r, phi) = spec.polar(idx);
            s * rabi_sq_total(cfg, r, phi)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::azimuthal_spectrum;
    use crate::optics::ThinLens;
    use std::f64::consts::{SQRT_2, TAU};

    const GAMMA: f64 = TAU * 5.22e6;
    const W0: f64 = 180e-6;
    const LAMBDA: f64 = 589.16e-9;

    fn rabi(ell: i32) -> RabiConfig {
        let lens = ThinLens::new(1.5, 0.008, 0.008).unwrap();
        RabiConfig::in_linewidths(GAMMA, 10.0, 10.0, 100.0, ell, 0, W0, LAMBDA, lens).unwrap()
    }

    fn params(ell: i32, tau_gamma: f64) -> ImprintParams {
        ImprintParams::new(rabi(ell), tau_gamma / GAMMA).unwrap()
    }

    fn sodium() -> TwoLevelAtom {
        TwoLevelAtom::new(LAMBDA, GAMMA, 3.8175e-26, 63.0).unwrap()
    }

    fn packet_on(n: usize) -> ComplexField2D {
        let spec = GridSpec::square(n, 400e-6).unwrap();
        initial_packet(&WavePacket::new(100e-6, 2.0e9).unwrap(), spec).unwrap()
    }

    #[test]
    fn packet_is_unit_norm() {
        let psi = packet_on(128);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let p = WavePacket::new(100e-6, 2.0e9).unwrap();
        assert!((p.profile(50e-6) - 0.5).abs() < 1e-12);
        assert!(WavePacket::new(0.0, 1.0).is_err());
    }

    #[test]
    fn max_e_tau_location_and_value() {
        let (r, x) = params(2, 0.5).max_e_tau();
        assert!((r - W0 / SQRT_2).abs() < 1e-9);
        assert!((x - 0.520260095).abs() < 1e-8);
        // closed form 2 e^{-1} √2 Ω²τ/Δ in units of Γ
        let closed = 4.0 * 10.0 * 10.0 * (-1f64).exp() / SQRT_2 / 100.0 * 0.5;
        assert!((x - closed).abs() < 1e-12);
    }

    #[test]
    fn imprint_is_unitary() {
        let psi = packet_on(128);
        let out = phase_imprint(&psi, &rabi(2), 0.5 / GAMMA);
        assert!((out.norm() - psi.norm()).abs() < 1e-12);
    }

    #[test]
    fn orders_reconstruct_the_imprint() {
        let psi = packet_on(128);
        let p = params(2, 0.5);
        let orders = decompose_orders(&psi, &p, None).unwrap();
        let direct = phase_imprint(&psi, p.rabi(), p.tau());
        let err = orders.reconstruct().sub(&direct).unwrap().norm();
        assert!(err < 1e-10, "{err}");
        assert!(orders.truncation_residual() < 1e-20);
    }

    #[test]
    fn explicit_truncation_checked() {
        let psi = packet_on(64);
        let p = params(2, 0.5);
        assert!(matches!(
            decompose_orders(&psi, &p, Some(2)),
            Err(Error::TruncationTooSmall { m_max: 2, .. })
        ));
        let set = decompose_orders(&psi, &p, Some(14)).unwrap();
        assert_eq!(set.m_max(), 14);
        assert_eq!(set.orders().len(), 29);
    }

    #[test]
    fn order_helicity_is_m_ell() {
        let psi = packet_on(512);
        let p = params(2, 0.5);
        let orders = decompose_orders(&psi, &p, None).unwrap();
        for m in [-2, -1, 1, 2] {
            let o = orders.get(m).unwrap();
            assert_eq!(o.helicity, 2 * m as i64);
            let spec = azimuthal_spectrum(&o.field, W0 / SQRT_2, 256).unwrap();
            let total = spec.power();
            let on = spec.coeff(2 * m as i64).norm_sqr();
            assert!(on / total > 0.999, "m {m}: {}", on / total);
        }
    }

    #[test]
    fn opposite_orders_have_equal_magnitude() {
        let psi = packet_on(128);
        let orders = decompose_orders(&psi, &params(3, 0.7), None).unwrap();
        for m in 1..=3 {
            let a = orders.get(m).unwrap().field.values();
            let b = orders.get(-m).unwrap().field.values();
            for (u, v) in a.iter().zip(b) {
                assert!((u.norm() - v.norm()).abs() <= 1e-14 * u.norm());
            }
        }
    }

    #[test]
    fn populations_sum_to_one() {
        let psi = packet_on(128);
        let p = params(2, 0.5);
        let m_max = p.auto_m_max() as i32;
        let total: f64 = (-m_max..=m_max).map(|m| order_weights(&psi, &p, m)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((order_weights(&psi, &p, 1) - order_weights(&psi, &p, -1)).abs() < 1e-15);

        let still = params(2, 0.0);
        assert!((order_weights(&psi, &still, 0) - 1.0).abs() < 1e-12);
        assert_eq!(order_weights(&psi, &still, 1), 0.0);
    }

    #[test]
    fn ferris_density_two_paths_agree() {
        let spec = GridSpec::square(128, 400e-6).unwrap();
        let packet = WavePacket::new(100e-6, 2.0e9).unwrap();
        let p = params(2, 0.5);
        let psi = initial_packet(&packet, spec).unwrap();
        let orders = decompose_orders(&psi, &p, None).unwrap();
        for m in [1, 2, 3] {
            let closed = ferris_density(&packet, &p, m, spec).unwrap();
            let built = ferris_density_from_orders(&orders, m, p.quadratic_coefficient()).unwrap();
            let diff = closed
                .values()
                .iter()
                .zip(built.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-9 * closed.max(), "m {m}: {diff}");
        }
        assert!(ferris_density(&packet, &p, 0, spec).is_err());
    }

    #[test]
    fn ideal_imprint_properties() {
        let psi = packet_on(64);
        let p = params(2, 0.5);
        let a = p.quadratic_coefficient();
        let orders = decompose_orders(&psi, &p, None).unwrap();
        assert_eq!(second_imprint_ideal(&orders, 0, a).unwrap(), orders);

        let once = second_imprint_ideal(&orders, 1, a).unwrap();
        assert_eq!(once.get(1).unwrap().quad_phase, a);
        assert_eq!(once.get(-1).unwrap().quad_phase, a);
        assert_eq!(once.get(2), orders.get(2));
        let twice = second_imprint_ideal(&once, 1, a).unwrap();
        assert_ne!(twice.get(1).unwrap().field, once.get(1).unwrap().field);
        assert_eq!(twice.get(1).unwrap().quad_phase, 3.0 * a);

        assert!(matches!(second_imprint_ideal(&orders, 40, a), Err(Error::MissingOrder(_))));
    }

    #[test]
    fn physical_imprint_detuning_selectivity() {
        let atom = sodium();
        let im = SecondImprint {
            s: 1,
            delta0: 2.0 * GAMMA,
            omega_prime0: 0.5 * GAMMA,
            dt: 1e-6,
            r_core: 5e-6,
        };
        assert_eq!(im.detuning(0, 30e-6, &atom), im.delta0);
        let shift = HBAR / (atom.mass() * 30e-6 * 30e-6);
        assert!((im.detuning(2, 30e-6, &atom) - (im.delta0 - 2.0 * shift)).abs() < 1e-6);
        assert_eq!(im.detuning(1, 1e-6, &atom), im.detuning(1, 5e-6, &atom));
        let ratio = im.phase(1, 30e-6, &atom) / im.phase(0, 30e-6, &atom);
        assert!((ratio - im.delta0 / (im.delta0 - shift)).abs() < 1e-12);

        let flat = SecondImprint { s: 0, ..im };
        for m in [-3, 0, 3] {
            assert_eq!(flat.phase(m, 20e-6, &atom), flat.phase(0, 20e-6, &atom));
        }
    }

    #[test]
    fn physical_imprint_applies_phase_and_detects_resonance() {
        let atom = sodium();
        let psi = packet_on(64);
        let orders = decompose_orders(&psi, &params(2, 0.5), None).unwrap();
        let im = SecondImprint {
            s: 0,
            delta0: 2.0 * GAMMA,
            omega_prime0: 0.5 * GAMMA,
            dt: 1e-6,
            r_core: 5e-6,
        };
        let out = second_imprint_physical(&orders, &im, &atom).unwrap();
        let expected = Complex64::from_polar(1.0, im.phase(0, 0.0, &atom));
        for (a, b) in out.get(1).unwrap().field.values().iter().zip(orders.get(1).unwrap().field.values()) {
            assert!((a - b * expected).norm() < 1e-15);
        }

        // Δ_m(r) changes sign inside the grid for this tiny Δ0.
        let shift_at_core = HBAR / (atom.mass() * 5e-6 * 5e-6);
        let crossing = SecondImprint {
            s: 1,
            delta0: 0.5 * shift_at_core,
            ..im
        };
        assert!(matches!(
            second_imprint_physical(&orders, &crossing, &atom),
            Err(Error::ResonanceCrossing { .. })
        ));
    }

    #[test]
    fn max_phase_bounded_by_peak_coupling() {
        let spec = GridSpec::square(64, 400e-6).unwrap();
        let cfg = rabi(2);
        let tau = 0.5 / GAMMA;
        let peak = max_imprint_phase(&cfg, tau, &spec);
        assert!(peak > 0.0);
        // |Ω|² <= (Ω_G + |Ω_LG|)² <= (2 · 10Γ)²
        assert!(peak <= 2.0 * tau * 400.0 * GAMMA * GAMMA / (100.0 * GAMMA));
    }
}
