use clap::ValueEnum;

/// Built-in configurations shipped with the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig3,
    Fig4,
    Propagate,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig1, Preset::Fig3, Preset::Fig4, Preset::Propagate];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Propagate => "propagate",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            Preset::Fig1 => include_str!("../presets/fig1.ini"),
            Preset::Fig3 => include_str!("../presets/fig3.ini"),
            Preset::Fig4 => include_str!("../presets/fig4.ini"),
            Preset::Propagate => include_str!("../presets/propagate.ini"),
        }
    }
}

/// Figures reproducible with `figure <name>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig3,
    Fig4,
}

impl Figure {
    pub fn preset(self) -> Preset {
        match self {
            Figure::Fig1 => Preset::Fig1,
            Figure::Fig3 => Preset::Fig3,
            Figure::Fig4 => Preset::Fig4,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn every_preset_parses_and_validates() {
        for p in Preset::ALL {
            let cfg = RunConfig::from_ini(p.text(), p.name()).unwrap();
            cfg.grid().unwrap();
            cfg.mask().unwrap();
            cfg.atom().unwrap();
            if p != Preset::Fig1 {
                cfg.imprint().unwrap();
                cfg.packet().unwrap();
            }
        }
        let prop = RunConfig::from_ini(Preset::Propagate.text(), "propagate").unwrap();
        prop.propagation_plan().unwrap();
        assert_eq!(prop.propagation_orders().unwrap(), vec![1, 2]);
    }
}
