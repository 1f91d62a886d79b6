//! INI run configuration: flat `[section] key = value` pairs merged from a
//! file or preset, `FERRIS__SECTION__KEY` environment variables and
//! command-line flags, in that order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ferriswheel::optics::IntensityUnits;
use ferriswheel::{
    BeamStrength, GaussianBeam, GridSpec, ImprintParams, LgBeam, PropagationPlan, RabiConfig, SpiralMask, ThinLens,
    TwoLevelAtom, WavePacket,
};

use crate::error::{CliError, Result};
use crate::image::Colormap;

/// Prefix of environment overrides, e.g. `FERRIS__GRID__NX=512`.
pub const ENV_PREFIX: &str = "FERRIS__";

/// Every accepted `(section, keys)`. Anything else is rejected.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("grid", &["nx", "half_extent"]),
    ("lg", &["ell", "p", "w0", "wavelength", "power", "amplitude"]),
    ("gaussian", &["w0", "wavelength", "power", "amplitude"]),
    ("lens", &["n", "d", "f"]),
    ("mask", &["z", "units"]),
    ("atom", &["transition_wavelength", "linewidth", "mass", "saturation_intensity"]),
    ("rabi", &["omega_g0", "omega_gl0", "detuning"]),
    ("packet", &["sigma", "k_db"]),
    ("imprint", &["tau", "m_max"]),
    ("ferris", &["m"]),
    ("propagation", &["z_start", "z_end", "n_planes", "apodization", "orders"]),
    ("output", &["dir", "format", "colormap", "gamma", "max_order_files"]),
];

fn known(section: &str, key: &str) -> bool {
    SCHEMA
        .iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

/// Which files a command emits next to its CSV data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    CsvPgm,
    CsvPng,
}

impl OutputFormat {
    pub fn pgm(self) -> bool {
        !matches!(self, OutputFormat::Csv)
    }

    pub fn png(self) -> bool {
        matches!(self, OutputFormat::CsvPng)
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "csv+pgm" => Ok(OutputFormat::CsvPgm),
            "csv+png" => Ok(OutputFormat::CsvPng),
            other => Err(format!("unknown format '{other}' (csv, csv+pgm, csv+png)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::CsvPgm => "csv+pgm",
            OutputFormat::CsvPng => "csv+png",
        })
    }
}

/// Validated key/value configuration with typed accessors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<(String, String), String>,
}

impl RunConfig {
    /// Parses INI text. `origin` names the source in error messages.
    pub fn from_ini(text: &str, origin: &str) -> Result<Self> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| CliError::config(format!("{origin}: {e}")))?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(CliError::config(format!("{origin}: key '{k}' outside of a section")));
                }
                continue;
            };
            for (key, value) in props.iter() {
                let slot = (section.to_string(), key.to_string());
                if cfg.values.contains_key(&slot) {
                    return Err(CliError::config(format!("{origin}: duplicate key {section}.{key}")));
                }
                cfg.set(section, key, value)
                    .map_err(|e| CliError::config(format!("{origin}: {e}")))?;
            }
        }
        Ok(cfg)
    }

    /// Sets one value, rejecting keys outside [`SCHEMA`].
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        if !known(section, key) {
            return Err(CliError::config(format!("unknown key {section}.{key}")));
        }
        self.values
            .insert((section.to_string(), key.to_string()), value.trim().to_string());
        Ok(())
    }

    /// Applies `FERRIS__SECTION__KEY=value` pairs.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        for (name, value) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let (section, key) = rest
                .split_once("__")
                .ok_or_else(|| CliError::config(format!("environment override {name} needs SECTION__KEY")))?;
            self.set(&section.to_lowercase(), &key.to_lowercase(), &value)
                .map_err(|e| CliError::config(format!("{name}: {e}")))?;
        }
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.get(section, key).is_some()
    }

    pub fn parse_opt<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::config(format!("{section}.{key} = '{raw}': {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.parse_opt(section, key)?
            .ok_or_else(|| CliError::config(format!("missing required key {section}.{key}")))
    }

    /// `section.key=value` lines in sorted order, echoed into file headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.values
            .iter()
            .map(|((s, k), v)| (format!("{s}.{k}"), v.clone()))
            .collect()
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let nx: usize = self.require("grid", "nx")?;
        let half: f64 = self.require("grid", "half_extent")?;
        Ok(GridSpec::square(nx, half)?)
    }

    fn strength(&self, section: &str) -> Result<BeamStrength> {
        match (self.parse_opt(section, "power")?, self.parse_opt(section, "amplitude")?) {
            (Some(p), None) => Ok(BeamStrength::Power(p)),
            (None, Some(a)) => Ok(BeamStrength::Amplitude(a)),
            _ => Err(CliError::config(format!(
                "{section}: exactly one of {section}.power and {section}.amplitude must be set"
            ))),
        }
    }

    pub fn lg_beam(&self) -> Result<LgBeam> {
        Ok(LgBeam::new(
            self.require("lg", "ell")?,
            self.parse_opt("lg", "p")?.unwrap_or(0),
            self.require("lg", "w0")?,
            self.require("lg", "wavelength")?,
            self.strength("lg")?,
        )?)
    }

    pub fn gaussian_beam(&self) -> Result<GaussianBeam> {
        Ok(GaussianBeam::new(
            self.require("gaussian", "w0")?,
            self.require("gaussian", "wavelength")?,
            self.strength("gaussian")?,
        )?)
    }

    pub fn lens(&self) -> Result<ThinLens> {
        Ok(ThinLens::new(
            self.require("lens", "n")?,
            self.require("lens", "d")?,
            self.require("lens", "f")?,
        )?)
    }

    pub fn mask(&self) -> Result<SpiralMask> {
        Ok(SpiralMask::new(self.lg_beam()?, self.gaussian_beam()?, self.lens()?)?)
    }

    pub fn mask_plane(&self) -> Result<f64> {
        Ok(self.parse_opt("mask", "z")?.unwrap_or(0.0))
    }

    pub fn intensity_units(&self) -> Result<IntensityUnits> {
        match self.get("mask", "units").unwrap_or("si") {
            "si" => Ok(IntensityUnits::WattsPerSquareMetre),
            "saturation" => Ok(IntensityUnits::Saturation(self.require("atom", "saturation_intensity")?)),
            other => Err(CliError::config(format!("mask.units = '{other}' (si, saturation)"))),
        }
    }

    pub fn atom(&self) -> Result<TwoLevelAtom> {
        Ok(TwoLevelAtom::new(
            self.require("atom", "transition_wavelength")?,
            self.require("atom", "linewidth")?,
            self.require("atom", "mass")?,
            self.require("atom", "saturation_intensity")?,
        )?)
    }

    /// Rabi coupling with frequencies read in units of the atomic linewidth.
    pub fn rabi(&self) -> Result<RabiConfig> {
        let lg = self.lg_beam()?;
        let g = self.gaussian_beam()?;
        if lg.w0() != g.w0() {
            return Err(CliError::config(format!(
                "atom-light coupling needs equal waists, got lg.w0 = {} and gaussian.w0 = {}",
                lg.w0(),
                g.w0()
            )));
        }
        if lg.wavelength() != g.wavelength() {
            return Err(ferriswheel::Error::WavelengthMismatch {
                lg: lg.wavelength(),
                gaussian: g.wavelength(),
            }
            .into());
        }
        let gamma: f64 = self.require("atom", "linewidth")?;
        Ok(RabiConfig::in_linewidths(
            gamma,
            self.require("rabi", "omega_g0")?,
            self.require("rabi", "omega_gl0")?,
            self.require("rabi", "detuning")?,
            lg.ell(),
            lg.p(),
            lg.w0(),
            lg.wavelength(),
            self.lens()?,
        )?)
    }

    /// Imprint duration in seconds (`imprint.tau` is given in units of 1/Γ).
    pub fn tau(&self) -> Result<f64> {
        let tau: f64 = self.require("imprint", "tau")?;
        let gamma: f64 = self.require("atom", "linewidth")?;
        Ok(tau / gamma)
    }

    pub fn imprint(&self) -> Result<ImprintParams> {
        Ok(ImprintParams::new(self.rabi()?, self.tau()?)?)
    }

    pub fn m_max(&self) -> Result<Option<u32>> {
        self.parse_opt("imprint", "m_max")
    }

    pub fn packet(&self) -> Result<WavePacket> {
        Ok(WavePacket::new(self.require("packet", "sigma")?, self.require("packet", "k_db")?)?)
    }

    pub fn ferris_order(&self) -> Result<i32> {
        self.require("ferris", "m")
    }

    pub fn propagation_plan(&self) -> Result<PropagationPlan> {
        let plan = PropagationPlan::new(
            self.require("packet", "k_db")?,
            self.require("propagation", "z_start")?,
            self.require("propagation", "z_end")?,
            self.require("propagation", "n_planes")?,
        )?;
        match self.parse_opt("propagation", "apodization")? {
            Some(margin) => Ok(plan.with_apodization(margin)?),
            None => Ok(plan),
        }
    }

    pub fn propagation_orders(&self) -> Result<Vec<i32>> {
        let raw = self.get("propagation", "orders").unwrap_or("1");
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<i32>()
                    .map_err(|e| CliError::config(format!("propagation.orders = '{raw}': {e}")))
            })
            .collect()
    }

    pub fn output_dir(&self) -> String {
        self.get("output", "dir").unwrap_or("out").to_string()
    }

    pub fn output_format(&self) -> Result<OutputFormat> {
        Ok(self.parse_opt("output", "format")?.unwrap_or(OutputFormat::Csv))
    }

    pub fn colormap(&self) -> Result<Colormap> {
        Ok(self.parse_opt("output", "colormap")?.unwrap_or(Colormap::Inferno))
    }

    pub fn gamma(&self) -> Result<f64> {
        let g: f64 = self.parse_opt("output", "gamma")?.unwrap_or(1.0);
        if !(g.is_finite() && g > 0.0) {
            return Err(CliError::config(format!("output.gamma = {g} must be > 0")));
        }
        Ok(g)
    }

    pub fn max_order_files(&self) -> Result<u32> {
        Ok(self.parse_opt("output", "max_order_files")?.unwrap_or(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let cfg = RunConfig::from_ini("[grid]\nnx = 64\nhalf_extent = 1e-3\n", "t").unwrap();
        assert_eq!(cfg.grid().unwrap().nx(), 64);
        let err = RunConfig::from_ini("[grid]\nnxx = 64\n", "t").unwrap_err();
        assert!(err.to_string().contains("grid.nxx"));
        assert!(RunConfig::from_ini("[gird]\nnx = 64\n", "t").is_err());
        assert!(RunConfig::from_ini("nx = 64\n", "t").is_err());
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(RunConfig::from_ini("[grid]\nnx = 64\nnx = 128\n", "t").is_err());
    }

    #[test]
    fn env_overrides_and_prefix_filtering() {
        let mut cfg = RunConfig::from_ini("[grid]\nnx = 64\n", "t").unwrap();
        cfg.apply_env([
            ("FERRIS__GRID__NX".to_string(), "128".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ])
        .unwrap();
        assert_eq!(cfg.get("grid", "nx"), Some("128"));
        assert!(cfg
            .apply_env([("FERRIS__GRID__BOGUS".to_string(), "1".to_string())])
            .is_err());
        assert!(cfg.apply_env([("FERRIS__GRID".to_string(), "1".to_string())]).is_err());
    }

    #[test]
    fn missing_and_malformed_values() {
        let cfg = RunConfig::from_ini("[grid]\nnx = sixty\n", "t").unwrap();
        let msg = cfg.grid().unwrap_err().to_string();
        assert!(msg.contains("grid.nx"), "{msg}");
        let msg = RunConfig::default().grid().unwrap_err().to_string();
        assert!(msg.contains("missing required key grid.nx"), "{msg}");
    }

    #[test]
    fn beam_strength_needs_exactly_one() {
        let both = "[gaussian]\nw0 = 1e-4\nwavelength = 5e-7\npower = 1e-3\namplitude = 3\n";
        assert!(RunConfig::from_ini(both, "t").unwrap().gaussian_beam().is_err());
        let none = "[gaussian]\nw0 = 1e-4\nwavelength = 5e-7\n";
        assert!(RunConfig::from_ini(none, "t").unwrap().gaussian_beam().is_err());
    }

    #[test]
    fn format_names() {
        for f in [OutputFormat::Csv, OutputFormat::CsvPgm, OutputFormat::CsvPng] {
            assert_eq!(f.to_string().parse::<OutputFormat>().unwrap(), f);
        }
        assert!("pdf".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn infinite_focal_length_accepted() {
        let cfg = RunConfig::from_ini("[lens]\nn = 1.5\nd = 0.008\nf = inf\n", "t").unwrap();
        assert!(cfg.lens().unwrap().f().is_infinite());
    }
}
