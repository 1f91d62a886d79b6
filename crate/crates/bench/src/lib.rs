//! Fixtures shared by the benchmarks.

use std::f64::consts::TAU;

use ferriswheel::{
    BeamStrength, GaussianBeam, GridSpec, ImprintParams, LgBeam, RabiConfig, SpiralMask, ThinLens, WavePacket,
};

pub const W0: f64 = 180e-6;
pub const WAVELENGTH: f64 = 589.16e-9;
pub const HALF_EXTENT: f64 = 4.5e-4;
pub const K_DB: f64 = 2.0927e9;

pub fn grid(n: usize) -> GridSpec {
    GridSpec::square(n, HALF_EXTENT).expect("valid grid")
}

pub fn lens() -> ThinLens {
    ThinLens::new(1.5, 0.008, 0.008).expect("valid lens")
}

pub fn spiral_mask() -> SpiralMask {
    let lg = LgBeam::new(2, 0, W0, WAVELENGTH, BeamStrength::Power(2.8e-3)).expect("valid LG beam");
    let g = GaussianBeam::new(W0, WAVELENGTH, BeamStrength::Power(2.8e-3)).expect("valid Gaussian beam");
    SpiralMask::new(lg, g, lens()).expect("matching beams")
}

pub fn imprint_params() -> ImprintParams {
    let gamma = TAU * 5.22e6;
    let rabi = RabiConfig::in_linewidths(gamma, 10.0, 10.0, 100.0, 2, 0, W0, WAVELENGTH, lens()).expect("valid Rabi");
    ImprintParams::new(rabi, 0.5 / gamma).expect("valid imprint")
}

pub fn packet() -> WavePacket {
    WavePacket::new(100e-6, K_DB).expect("valid packet")
}
