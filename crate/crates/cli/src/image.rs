//! Image rendering of real fields: 16-bit PGM and colormapped 8-bit PNG.
//! Values are min-max normalized, then raised to `gamma`. The top image
//! row is the largest `y`.

use std::fmt;
use std::str::FromStr;

use ferriswheel::RealField2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    Gray,
    Inferno,
}

impl FromStr for Colormap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gray" => Ok(Colormap::Gray),
            "inferno" => Ok(Colormap::Inferno),
            other => Err(format!("unknown colormap '{other}' (gray, inferno)")),
        }
    }
}

impl fmt::Display for Colormap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colormap::Gray => "gray",
            Colormap::Inferno => "inferno",
        })
    }
}

const INFERNO: [[u8; 3]; 9] = [
    [0, 0, 4],
    [31, 12, 72],
    [85, 15, 109],
    [136, 34, 106],
    [186, 54, 85],
    [227, 89, 51],
    [249, 140, 10],
    [249, 201, 50],
    [252, 255, 164],
];

impl Colormap {
    /// RGB for a level in `0..=65535`.
    pub fn rgb(self, level: u16) -> [u8; 3] {
        match self {
            Colormap::Gray => {
                let v = (level >> 8) as u8;
                [v, v, v]
            }
            Colormap::Inferno => {
                let t = level as f64 / 65535.0 * (INFERNO.len() - 1) as f64;
                let i = (t.floor() as usize).min(INFERNO.len() - 2);
                let frac = t - i as f64;
                let mut out = [0u8; 3];
                for (c, o) in out.iter_mut().enumerate() {
                    let a = INFERNO[i][c] as f64;
                    let b = INFERNO[i + 1][c] as f64;
                    *o = (a + (b - a) * frac).round() as u8;
                }
                out
            }
        }
    }
}

/// 16-bit levels in image order plus a flag for a constant input.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u16>,
    pub degenerate: bool,
}

pub fn levels(field: &RealField2D, gamma: f64) -> Levels {
    let spec = field.spec();
    let (nx, ny) = (spec.nx(), spec.ny());
    let (lo, hi) = (field.min(), field.max());
    let degenerate = hi <= lo;
    if degenerate {
        log::warn!("image: field is constant ({lo:e}); rendering uniform mid-gray");
    }
    let mut data = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            let level = if degenerate {
                32768
            } else {
                let t = ((field.at(i, j) - lo) / (hi - lo)).clamp(0.0, 1.0);
                (t.powf(gamma) * 65535.0).round() as u16
            };
            data.push(level);
        }
    }
    Levels {
        width: nx,
        height: ny,
        data,
        degenerate,
    }
}

/// Binary `P5` PGM with `maxval = 65535` (big-endian samples).
pub fn encode_pgm(levels: &Levels) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", levels.width, levels.height).into_bytes();
    out.reserve(levels.data.len() * 2);
    for v in &levels.data {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

/// 8-bit RGB PNG through `colormap`.
pub fn encode_png(levels: &Levels, colormap: Colormap) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, levels.width as u32, levels.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().expect("in-memory PNG header");
        let pixels: Vec<u8> = levels.data.iter().flat_map(|&l| colormap.rgb(l)).collect();
        writer.write_image_data(&pixels).expect("in-memory PNG data");
    }
    out
}
