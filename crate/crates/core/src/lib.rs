//! Simulation of atomic Ferris wheel beams.
//!
//! A Laguerre-Gaussian beam interfering with a lensed Gaussian beam forms a
//! spiral light mask. A two-level atom crossing it in the thin-mask limit
//! picks up a phase that splits its wave packet into atom-vortex orders;
//! an order-selective second imprint lets the `±m` orders interfere into a
//! petal-shaped (Ferris wheel) probability density.
//!
//! Modules follow the pipeline:
//! [`grid`] → [`optics`] → [`atom_light`] → [`diffraction`] → [`propagation`].

pub mod atom_light;
pub mod constants;
pub mod diffraction;
pub mod error;
pub mod grid;
pub mod optics;
pub mod propagation;
pub mod special;

pub use atom_light::{RabiConfig, RamanNathReport, TwoLevelAtom};
pub use diffraction::{DiffractionOrder, ImprintParams, OrderSet, SecondImprint, WavePacket};
pub use error::{Error, Result};
pub use grid::{AzimuthalSpectrum, ComplexField2D, GridSpec, RealField2D};
pub use optics::{BeamStrength, GaussianBeam, IntensityUnits, LgBeam, SpiralMask, ThinLens};
pub use propagation::{Focus, PropagationPlan, Propagator};

pub use num_complex::Complex64;
