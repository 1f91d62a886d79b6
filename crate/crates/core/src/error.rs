use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulation pipeline. Each variant names the stage
/// that rejected its input so callers can attribute failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid: {0}")]
    InvalidGrid(String),

    #[error("grid: non-finite sample {value} at x={x:e} m, y={y:e} m")]
    NonFiniteSample { x: f64, y: f64, value: String },

    #[error("grid: ring radius {radius:e} m outside the safe interpolation disc (limit {limit:e} m)")]
    RingOutsideGrid { radius: f64, limit: f64 },

    #[error("grid: degenerate ring at r={radius:e} m (all samples zero)")]
    DegenerateRing { radius: f64 },

    #[error("{module}: invalid parameter {name}: {reason}")]
    InvalidParameter {
        module: &'static str,
        name: &'static str,
        reason: String,
    },

    #[error("optics: wavelength mismatch between LG ({lg:e} m) and Gaussian ({gaussian:e} m) beams")]
    WavelengthMismatch { lg: f64, gaussian: f64 },

    #[error("atom_light: detuning must be nonzero")]
    ZeroDetuning,

    #[error("diffraction: order m={0} not present")]
    MissingOrder(i32),

    #[error("diffraction: m_max={m_max} too small, achieved residual {residual:e}")]
    TruncationTooSmall { m_max: u32, residual: f64 },

    #[error("diffraction: resonance crossing for order m={m} at r={radius:e} m")]
    ResonanceCrossing { m: i32, radius: f64 },

    #[error(
        "propagation: Nyquist violation, {fraction:e} of the spectral energy lies in the band \
         |k| > {band_start:e} rad/m (Nyquist {nyquist:e} rad/m)"
    )]
    Nyquist {
        fraction: f64,
        band_start: f64,
        nyquist: f64,
    },

    #[error("propagation: RMS radius monotone in range [{z_start:e}, {z_end:e}] m")]
    MonotoneInRange { z_start: f64, z_end: f64 },
}

impl Error {
    pub(crate) fn param(module: &'static str, name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            module,
            name,
            reason: reason.into(),
        }
    }

    /// True for errors that come from numerical validity checks rather than
    /// bad configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Nyquist { .. }
                | Error::MonotoneInRange { .. }
                | Error::TruncationTooSmall { .. }
                | Error::ResonanceCrossing { .. }
                | Error::NonFiniteSample { .. }
                | Error::DegenerateRing { .. }
        )
    }
}
