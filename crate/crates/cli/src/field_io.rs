//! Text field files: `#`-prefixed `key=value` header lines followed by one
//! row per grid sample (`x,y,re,im` or `x,y,value`), y outer and x inner.
//! Numbers carry 17 significant digits so reading back is bit exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use ferriswheel::{Complex64, ComplexField2D, GridSpec, RealField2D};
use thiserror::Error;

pub const SCHEMA: &str = "ferriswheel-field/1";

#[derive(Debug, Error, PartialEq)]
#[error("field file line {line}: {message}")]
pub struct FieldIoError {
    pub line: usize,
    pub message: String,
}

impl FieldIoError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Complex,
    Real,
}

impl FieldKind {
    fn name(self) -> &'static str {
        match self {
            FieldKind::Complex => "complex",
            FieldKind::Real => "real",
        }
    }

    fn columns(self) -> &'static str {
        match self {
            FieldKind::Complex => "x,y,re,im",
            FieldKind::Real => "x,y,value",
        }
    }
}

/// Everything needed to interpret the payload rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFileHeader {
    pub kind: FieldKind,
    pub nx: usize,
    pub ny: usize,
    pub half_extent_x: f64,
    pub half_extent_y: f64,
    pub quantity: String,
    pub units: String,
    /// Echo of the generating configuration, `section.key` → value.
    pub params: Vec<(String, String)>,
}

impl FieldFileHeader {
    pub fn new(kind: FieldKind, spec: &GridSpec, quantity: &str, units: &str, params: Vec<(String, String)>) -> Self {
        Self {
            kind,
            nx: spec.nx(),
            ny: spec.ny(),
            half_extent_x: spec.half_extent_x(),
            half_extent_y: spec.half_extent_y(),
            quantity: quantity.to_string(),
            units: units.to_string(),
            params,
        }
    }

    pub fn spec(&self) -> ferriswheel::Result<GridSpec> {
        GridSpec::new(self.nx, self.ny, self.half_extent_x, self.half_extent_y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Complex(ComplexField2D),
    Real(RealField2D),
}

impl FieldData {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldData::Complex(_) => FieldKind::Complex,
            FieldData::Real(_) => FieldKind::Real,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        match self {
            FieldData::Complex(f) => f.spec(),
            FieldData::Real(f) => f.spec(),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a field to the text format.
pub fn write_field<W: Write>(out: &mut W, quantity: &str, units: &str, params: &[(String, String)], data: &FieldData) -> std::io::Result<()> {
    let spec = *data.spec();
    let header = FieldFileHeader::new(data.kind(), &spec, quantity, units, params.to_vec());
    let mut text = String::with_capacity(spec.len() * 100 + 1024);
    let _ = writeln!(text, "# schema={SCHEMA}");
    let _ = writeln!(text, "# kind={}", header.kind.name());
    let _ = writeln!(text, "# nx={}", header.nx);
    let _ = writeln!(text, "# ny={}", header.ny);
    let _ = writeln!(text, "# half_extent_x={}", num(header.half_extent_x));
    let _ = writeln!(text, "# half_extent_y={}", num(header.half_extent_y));
    let _ = writeln!(text, "# quantity={}", header.quantity);
    let _ = writeln!(text, "# units={}", header.units);
    let _ = writeln!(text, "# columns={}", header.kind.columns());
    for (k, v) in &header.params {
        let _ = writeln!(text, "# param.{k}={v}");
    }
    for idx in 0..spec.len() {
        let (x, y) = spec.xy(idx);
        match data {
            FieldData::Complex(f) => {
                let v = f.values()[idx];
                let _ = writeln!(text, "{},{},{},{}", num(x), num(y), num(v.re), num(v.im));
            }
            FieldData::Real(f) => {
                let _ = writeln!(text, "{},{},{}", num(x), num(y), num(f.values()[idx]));
            }
        }
    }
    out.write_all(text.as_bytes())
}

pub fn field_to_bytes(quantity: &str, units: &str, params: &[(String, String)], data: &FieldData) -> Vec<u8> {
    let mut buf = Vec::new();
    write_field(&mut buf, quantity, units, params, data).expect("writing to memory");
    buf
}

fn parse_f64(line: usize, what: &str, raw: &str) -> Result<f64, FieldIoError> {
    raw.trim()
        .parse::<f64>()
        .map_err(|e| FieldIoError::new(line, format!("{what} '{raw}': {e}")))
}

/// Parses a field file written by [`write_field`].
pub fn read_field<R: BufRead>(input: R) -> Result<(FieldFileHeader, FieldData), FieldIoError> {
    let mut kind = None;
    let mut nx = None;
    let mut ny = None;
    let mut hx = None;
    let mut hy = None;
    let mut quantity = None;
    let mut units = None;
    let mut params = Vec::new();
    let mut schema_seen = false;

    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut first_row = None;
    for (n, line) in lines.by_ref() {
        let line = line.map_err(|e| FieldIoError::new(n, e.to_string()))?;
        let Some(body) = line.strip_prefix('#') else {
            first_row = Some((n, line));
            break;
        };
        let (key, value) = body
            .trim()
            .split_once('=')
            .ok_or_else(|| FieldIoError::new(n, format!("header line without '=': {line}")))?;
        match key {
            "schema" if value == SCHEMA => schema_seen = true,
            "schema" => return Err(FieldIoError::new(n, format!("unsupported schema '{value}'"))),
            "kind" => {
                kind = Some(match value {
                    "complex" => FieldKind::Complex,
                    "real" => FieldKind::Real,
                    other => return Err(FieldIoError::new(n, format!("unknown kind '{other}'"))),
                })
            }
            "nx" => nx = Some(value.parse::<usize>().map_err(|e| FieldIoError::new(n, format!("nx: {e}")))?),
            "ny" => ny = Some(value.parse::<usize>().map_err(|e| FieldIoError::new(n, format!("ny: {e}")))?),
            "half_extent_x" => hx = Some(parse_f64(n, "half_extent_x", value)?),
            "half_extent_y" => hy = Some(parse_f64(n, "half_extent_y", value)?),
            "quantity" => quantity = Some(value.to_string()),
            "units" => units = Some(value.to_string()),
            "columns" => {}
            k => match k.strip_prefix("param.") {
                Some(p) => params.push((p.to_string(), value.to_string())),
                None => return Err(FieldIoError::new(n, format!("unknown header key '{k}'"))),
            },
        }
    }
    let missing = |what: &str| FieldIoError::new(0, format!("header is missing '{what}'"));
    if !schema_seen {
        return Err(missing("schema"));
    }
    let header = FieldFileHeader {
        kind: kind.ok_or_else(|| missing("kind"))?,
        nx: nx.ok_or_else(|| missing("nx"))?,
        ny: ny.ok_or_else(|| missing("ny"))?,
        half_extent_x: hx.ok_or_else(|| missing("half_extent_x"))?,
        half_extent_y: hy.ok_or_else(|| missing("half_extent_y"))?,
        quantity: quantity.ok_or_else(|| missing("quantity"))?,
        units: units.ok_or_else(|| missing("units"))?,
        params,
    };
    let spec = header.spec().map_err(|e| FieldIoError::new(0, e.to_string()))?;
    let width = match header.kind {
        FieldKind::Complex => 4,
        FieldKind::Real => 3,
    };

    let mut complex = Vec::new();
    let mut real = Vec::new();
    let mut idx = 0;
    let rows = first_row.into_iter().map(Ok).chain(lines.map(|(n, l)| l.map(|l| (n, l)).map_err(|e| (n, e))));
    for row in rows {
        let (n, line) = row.map_err(|(n, e)| FieldIoError::new(n, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        if idx >= spec.len() {
            return Err(FieldIoError::new(n, format!("more than {} data rows", spec.len())));
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != width {
            return Err(FieldIoError::new(n, format!("expected {width} columns, found {}", cols.len())));
        }
        let x = parse_f64(n, "x", cols[0])?;
        let y = parse_f64(n, "y", cols[1])?;
        let (ex, ey) = spec.xy(idx);
        if x.to_bits() != ex.to_bits() || y.to_bits() != ey.to_bits() {
            return Err(FieldIoError::new(n, format!("coordinates ({x}, {y}) do not match grid sample ({ex}, {ey})")));
        }
        match header.kind {
            FieldKind::Complex => complex.push(Complex64::new(parse_f64(n, "re", cols[2])?, parse_f64(n, "im", cols[3])?)),
            FieldKind::Real => real.push(parse_f64(n, "value", cols[2])?),
        }
        idx += 1;
    }
    if idx != spec.len() {
        return Err(FieldIoError::new(0, format!("expected {} data rows, found {idx}", spec.len())));
    }
    let data = match header.kind {
        FieldKind::Complex => FieldData::Complex(ComplexField2D::from_values(spec, complex).map_err(|e| FieldIoError::new(0, e.to_string()))?),
        FieldKind::Real => FieldData::Real(RealField2D::from_values(spec, real).map_err(|e| FieldIoError::new(0, e.to_string()))?),
    };
    Ok((header, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ferriswheel::grid::sample_polar_function;

    fn sample() -> ComplexField2D {
        let spec = GridSpec::new(32, 16, 1e-3, 5e-4).unwrap();
        sample_polar_function(spec, |r, phi| Complex64::from_polar((-r * r / 1e-7).exp() / 3.0, 2.0 * phi + 0.1)).unwrap()
    }

    #[test]
    fn complex_round_trip_is_bitwise() {
        let f = sample();
        let params = vec![("lg.ell".to_string(), "2".to_string())];
        let bytes = field_to_bytes("imprint", "1/m", &params, &FieldData::Complex(f.clone()));
        let (header, data) = read_field(bytes.as_slice()).unwrap();
        assert_eq!(header.params, params);
        assert_eq!((header.nx, header.ny), (32, 16));
        assert_eq!(header.half_extent_x.to_bits(), 1e-3f64.to_bits());
        let FieldData::Complex(g) = data else { panic!("kind") };
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn real_round_trip_and_row_count() {
        let spec = GridSpec::square(16, 2e-4).unwrap();
        let values: Vec<f64> = (0..spec.len()).map(|i| (i as f64).sqrt() * 1e-7 - 3e-8).collect();
        let f = RealField2D::from_values(spec, values).unwrap();
        let bytes = field_to_bytes("density", "1/m^2", &[], &FieldData::Real(f.clone()));
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 256);
        let (_, data) = read_field(bytes.as_slice()).unwrap();
        assert_eq!(data, FieldData::Real(f));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let f = sample();
        let text = String::from_utf8(field_to_bytes("q", "u", &[], &FieldData::Complex(f))).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let header_len = lines.iter().take_while(|l| l.starts_with('#')).count();
        lines[header_len + 3] = "1,2,3".to_string();
        let err = read_field(lines.join("\n").as_bytes()).unwrap_err();
        assert_eq!(err.line, header_len + 4);

        lines[header_len + 3] = "a,b,c,d".to_string();
        assert_eq!(read_field(lines.join("\n").as_bytes()).unwrap_err().line, header_len + 4);

        let truncated = lines[..lines.len() - 1].join("\n");
        assert!(read_field(truncated.as_bytes()).is_err());
    }

    #[test]
    fn header_errors() {
        assert!(read_field("# schema=other/9\n".as_bytes()).is_err());
        let err = read_field("# schema=ferriswheel-field/1\n# bogus=1\n".as_bytes()).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(read_field("# schema=ferriswheel-field/1\n# kind=real\n".as_bytes()).is_err());
    }
}
