//! CSV and JSON codecs for the artifacts exchanged between runs.
//!
//! CSV files carry an explicit header and floats with 17 significant digits,
//! so a write/read round trip reproduces every value bit for bit.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{SampledFunction1D, UniformGrid};
use crate::radon::{RadialProfile, Sinogram2D};
use crate::reconstruct::{ExperimentConfig, PhantomSpec};

/// Header of a Hankel data file.
pub const DATA_HEADER: [&str; 3] = ["t", "re", "im"];
/// Header of a function on [0, σ].
pub const FUNCTION_HEADER: [&str; 3] = ["s", "re", "im"];
/// Header of a residual curve.
pub const CURVE_HEADER: [&str; 3] = ["m", "residual", "naive"];
/// Header of a sinogram.
pub const SINOGRAM_HEADER: [&str; 4] = ["theta", "y", "re", "im"];

/// Version tag of the JSON sidecars.
pub const SIDECAR_SCHEMA_VERSION: u32 = 1;

/// Relative tolerance when recognizing a uniform grid in a file.
const GRID_TOLERANCE: f64 = 1e-9;

/// 17 significant digits: enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => parse_error(line, format!("{kind:?}")),
    }
}

/// Reads a numeric CSV with the given header into rows of floats, each
/// tagged with its line number.
fn read_table<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if found != header {
        return Err(parse_error(1, format!("expected header {}, found {}", header.join(","), found.join(","))));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_error(line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let values = record
            .iter()
            .map(|field| {
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_error(line, format!("'{field}' is not a number")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_error(line, format!("non-finite value '{field}'")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn write_table<W: Write>(writer: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header).map_err(csv_error)?;
    for row in rows {
        wtr.write_record(&row).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Recovers the uniform grid behind a column of abscissae.
fn uniform_grid_of(xs: &[(usize, f64)]) -> Result<UniformGrid> {
    if xs.len() < 2 {
        return Err(parse_error(xs.first().map_or(1, |x| x.0), "need at least 2 rows"));
    }
    let grid = UniformGrid::new(xs[0].1, xs[xs.len() - 1].1, xs.len())
        .map_err(|e| parse_error(xs[0].0, e.to_string()))?;
    let tol = GRID_TOLERANCE * (grid.b - grid.a).abs().max(grid.a.abs()).max(grid.b.abs());
    for (k, &(line, x)) in xs.iter().enumerate() {
        if (x - grid.node(k)).abs() > tol {
            return Err(parse_error(line, format!("abscissa {x} breaks the uniform grid (expected {})", grid.node(k))));
        }
    }
    Ok(grid)
}

fn read_sampled<R: Read>(reader: R, header: &[&str]) -> Result<SampledFunction1D> {
    let rows = read_table(reader, header)?;
    let xs: Vec<(usize, f64)> = rows.iter().map(|(l, v)| (*l, v[0])).collect();
    let grid = uniform_grid_of(&xs)?;
    let values = rows.iter().map(|(_, v)| Complex64::new(v[1], v[2])).collect();
    SampledFunction1D::new(grid, values)
}

fn write_sampled<W: Write>(writer: W, header: &[&str], f: &SampledFunction1D) -> Result<()> {
    let rows = (0..f.len()).map(|k| {
        vec![
            format_float(f.grid.node(k)),
            format_float(f.values[k].re),
            format_float(f.values[k].im),
        ]
    });
    write_table(writer, header, rows)
}

/// Hankel data as `t,re,im` on a uniform grid.
pub fn read_data_csv<R: Read>(reader: R) -> Result<SampledFunction1D> {
    read_sampled(reader, &DATA_HEADER)
}

pub fn write_data_csv<W: Write>(writer: W, h: &SampledFunction1D) -> Result<()> {
    write_sampled(writer, &DATA_HEADER, h)
}

/// A function of s as `s,re,im` on a uniform grid.
pub fn read_function_csv<R: Read>(reader: R) -> Result<SampledFunction1D> {
    read_sampled(reader, &FUNCTION_HEADER)
}

pub fn write_function_csv<W: Write>(writer: W, f: &SampledFunction1D) -> Result<()> {
    write_sampled(writer, &FUNCTION_HEADER, f)
}

/// A radial profile as `s,re,im` on strictly increasing positive nodes,
/// not necessarily uniform.
pub fn read_profile_csv<R: Read>(reader: R, n: i32) -> Result<RadialProfile> {
    let rows = read_table(reader, &FUNCTION_HEADER)?;
    if rows.is_empty() {
        return Err(parse_error(1, "profile has no rows"));
    }
    let nodes = rows.iter().map(|(_, v)| v[0]).collect();
    let values = rows.iter().map(|(_, v)| Complex64::new(v[1], v[2])).collect();
    RadialProfile::new(n, nodes, values)
}

pub fn write_profile_csv<W: Write>(writer: W, p: &RadialProfile) -> Result<()> {
    let rows = p
        .nodes
        .iter()
        .zip(&p.values)
        .map(|(s, v)| vec![format_float(*s), format_float(v.re), format_float(v.im)]);
    write_table(writer, &FUNCTION_HEADER, rows)
}

/// A residual curve with the naive baseline repeated on every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCurve {
    pub m: Vec<usize>,
    pub residual: Vec<f64>,
    pub naive: f64,
}

pub fn write_curve_csv<W: Write>(writer: W, curve: &ResidualCurve) -> Result<()> {
    if curve.m.len() != curve.residual.len() {
        return invalid("curve columns differ in length");
    }
    let rows = curve
        .m
        .iter()
        .zip(&curve.residual)
        .map(|(m, r)| vec![m.to_string(), format_float(*r), format_float(curve.naive)]);
    write_table(writer, &CURVE_HEADER, rows)
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<ResidualCurve> {
    let rows = read_table(reader, &CURVE_HEADER)?;
    let Some((_, first)) = rows.first() else {
        return Err(parse_error(1, "curve has no rows"));
    };
    let naive = first[2];
    let mut m = Vec::with_capacity(rows.len());
    let mut residual = Vec::with_capacity(rows.len());
    for (line, v) in &rows {
        if v[0] < 0.0 || v[0].fract() != 0.0 || v[0] > u32::MAX as f64 {
            return Err(parse_error(*line, format!("m = {} is not a valid index", v[0])));
        }
        if v[2] != naive {
            return Err(parse_error(*line, "naive baseline differs between rows"));
        }
        m.push(v[0] as usize);
        residual.push(v[1]);
    }
    Ok(ResidualCurve { m, residual, naive })
}

/// A sinogram as `theta,y,re,im`, angle-major: all y for the first angle,
/// then the next angle.
pub fn write_sinogram_csv<W: Write>(writer: W, sino: &Sinogram2D) -> Result<()> {
    let ys = sino.y_grid.nodes();
    let rows = sino.thetas.iter().zip(&sino.values).flat_map(|(th, row)| {
        ys.iter().zip(row).map(move |(y, v)| {
            vec![format_float(*th), format_float(*y), format_float(v.re), format_float(v.im)]
        })
    });
    write_table(writer, &SINOGRAM_HEADER, rows)
}

pub fn read_sinogram_csv<R: Read>(reader: R) -> Result<Sinogram2D> {
    let rows = read_table(reader, &SINOGRAM_HEADER)?;
    let Some((_, first)) = rows.first() else {
        return Err(parse_error(1, "sinogram has no rows"));
    };
    let theta0 = first[0];
    let n_y = rows.iter().take_while(|(_, v)| v[0] == theta0).count();
    if rows.len() % n_y != 0 {
        return Err(parse_error(rows[rows.len() - 1].0, "rows do not form complete projections"));
    }
    let ys: Vec<(usize, f64)> = rows[..n_y].iter().map(|(l, v)| (*l, v[1])).collect();
    let y_grid = uniform_grid_of(&ys)?;
    let mut thetas = Vec::new();
    let mut values = Vec::new();
    for chunk in rows.chunks(n_y) {
        let theta = chunk[0].1[0];
        let mut row = Vec::with_capacity(n_y);
        for (k, (line, v)) in chunk.iter().enumerate() {
            if v[0] != theta {
                return Err(parse_error(*line, "angle changes inside a projection"));
            }
            if v[1] != ys[k].1 {
                return Err(parse_error(*line, "radial samples differ between projections"));
            }
            row.push(Complex64::new(v[2], v[3]));
        }
        thetas.push(theta);
        values.push(row);
    }
    Sinogram2D::new(y_grid, thetas, values)
}

/// Metadata written next to simulated Hankel data. It holds everything
/// needed to regenerate the data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSidecar {
    pub schema_version: u32,
    pub nu: f64,
    pub r: f64,
    pub sigma: f64,
    pub n_samples: usize,
    /// Grid size on [0, σ] the phantom was sampled on.
    pub n_phantom: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phantom: Option<PhantomSpec>,
    pub noise_level: f64,
    pub seed: u64,
}

impl DataSidecar {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SIDECAR_SCHEMA_VERSION {
            return invalid(format!("unsupported sidecar schema version {}", self.schema_version));
        }
        crate::hankel::HankelOrder::from_nu(self.nu)?;
        if !(self.r > 0.0 && self.r.is_finite() && self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid("r and σ must be positive");
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return invalid("noise level must be non-negative");
        }
        if let Some(p) = &self.phantom {
            p.validate(self.sigma)?;
        }
        Ok(())
    }
}

pub fn read_sidecar(bytes: &[u8]) -> Result<DataSidecar> {
    let meta: DataSidecar = serde_json::from_slice(bytes)?;
    meta.validate()?;
    Ok(meta)
}

/// Parses and validates an experiment config.
pub fn read_config(bytes: &[u8]) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_slice(bytes)?;
    config.validate()?;
    Ok(config)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.0, -0.0, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let back: f64 = format_float(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x}");
        }
    }

    #[test]
    fn header_mismatch_is_reported() {
        let err = read_data_csv("s,re,im\n0,1,0\n1,1,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn bad_rows_carry_line_numbers() {
        let err = read_data_csv("t,re,im\n0,1,0\n0.5,x,0\n1,1,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_data_csv("t,re,im\n0,1,0\n0.7,1,0\n1,1,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(read_data_csv("t,re,im\n0,1,0\n1,NaN,0\n".as_bytes()).is_err());
        assert!(read_data_csv("t,re,im\n0,1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn whitespace_is_tolerated() {
        let f = read_function_csv("s, re, im\n 0, 1, 0\n0.5 ,2,0\n1,3, -1\n".as_bytes()).unwrap();
        assert_eq!(f.values[2], Complex64::new(3.0, -1.0));
    }
}
