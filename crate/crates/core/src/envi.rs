//! ENVI-format cube I/O: an ASCII `key = value` header file beside a raw
//! binary data file.
//!
//! Supported: data types 2 (signed 16-bit) and 4 (32-bit float),
//! interleaves bsq/bil/bip, both byte orders. Cubes are normalized to the
//! internal band-sequential float layout on read; float32 round trips are
//! bit-exact.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::cube::{HsiCube, LabelRaster};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleave {
    Bsq,
    Bil,
    Bip,
}

impl FromStr for Interleave {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bsq" => Ok(Interleave::Bsq),
            "bil" => Ok(Interleave::Bil),
            "bip" => Ok(Interleave::Bip),
            other => Err(Error::parse(format!("unsupported interleave '{other}'"))),
        }
    }
}

impl fmt::Display for Interleave {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Interleave::Bsq => "bsq",
            Interleave::Bil => "bil",
            Interleave::Bip => "bip",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnviDataType {
    /// ENVI code 2.
    I16,
    /// ENVI code 4.
    F32,
}

impl EnviDataType {
    fn code(self) -> u8 {
        match self {
            EnviDataType::I16 => 2,
            EnviDataType::F32 => 4,
        }
    }

    fn bytes(self) -> usize {
        match self {
            EnviDataType::I16 => 2,
            EnviDataType::F32 => 4,
        }
    }

    fn from_code(code: i64) -> Result<Self> {
        match code {
            2 => Ok(EnviDataType::I16),
            4 => Ok(EnviDataType::F32),
            other => Err(Error::parse(format!("unsupported data type {other}"))),
        }
    }
}

/// Parse an ENVI header into a key -> value map; `{ ... }` blocks may span
/// lines and are kept as their inner text.
fn parse_header(text: &str) -> HashMap<String, String> {
    let mut map = HashMap::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next() {
        let line = line.trim();
        if line.is_empty() || line.eq_ignore_ascii_case("envi") {
            continue;
        }
        let Some(eq) = line.find('=') else { continue };
        let key = line[..eq].trim().to_ascii_lowercase();
        let mut value = line[eq + 1..].trim().to_string();
        if value.starts_with('{') && !value.contains('}') {
            for cont in lines.by_ref() {
                value.push(' ');
                value.push_str(cont.trim());
                if cont.contains('}') {
                    break;
                }
            }
        }
        if value.starts_with('{') {
            value = value
                .trim_start_matches('{')
                .trim_end_matches('}')
                .trim()
                .to_string();
        }
        map.insert(key, value);
    }
    map
}

fn required<'m>(map: &'m HashMap<String, String>, key: &str) -> Result<&'m str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::parse(format!("missing required header key '{key}'")))
}

fn parse_count(map: &HashMap<String, String>, key: &str) -> Result<usize> {
    required(map, key)?
        .parse::<usize>()
        .map_err(|_| Error::parse(format!("header key '{key}' is not a count")))
}

/// Offset of sample `(row, col, band)` in file order, in elements.
fn element_offset(
    interleave: Interleave,
    rows: usize,
    cols: usize,
    bands: usize,
    r: usize,
    c: usize,
    b: usize,
) -> usize {
    match interleave {
        Interleave::Bsq => b * rows * cols + r * cols + c,
        Interleave::Bil => r * bands * cols + b * cols + c,
        Interleave::Bip => r * cols * bands + c * bands + b,
    }
}

/// Read a cube from a header/data file pair, normalizing to the internal
/// band-sequential layout. Integer samples are cast exactly.
pub fn read_envi(header_path: &Path, data_path: &Path) -> Result<HsiCube> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let map = parse_header(&text);

    let cols = parse_count(&map, "samples")?;
    let rows = parse_count(&map, "lines")?;
    let bands = parse_count(&map, "bands")?;
    let dtype = EnviDataType::from_code(
        required(&map, "data type")?
            .parse::<i64>()
            .map_err(|_| Error::parse("data type is not an integer"))?,
    )?;
    let interleave: Interleave = required(&map, "interleave")?.parse()?;
    let big_endian = match required(&map, "byte order")? {
        "0" => false,
        "1" => true,
        other => return Err(Error::parse(format!("unsupported byte order '{other}'"))),
    };
    let wavelengths = match map.get("wavelength") {
        Some(block) => {
            let vals: std::result::Result<Vec<f64>, _> = block
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse::<f64>)
                .collect();
            let vals = vals.map_err(|_| Error::parse("malformed wavelength block"))?;
            if vals.len() != bands {
                return Err(Error::parse(format!(
                    "wavelength block has {} values for {bands} bands",
                    vals.len()
                )));
            }
            Some(vals)
        }
        None => None,
    };

    let raw = fs::read(data_path).map_err(|e| Error::io(data_path, e))?;
    let expected = rows * cols * bands * dtype.bytes();
    if raw.len() != expected {
        return Err(Error::parse(format!(
            "data file {} is {} bytes, expected {expected} ({rows}x{cols}x{bands} of {} bytes)",
            data_path.display(),
            raw.len(),
            dtype.bytes()
        )));
    }

    let read_at = |offset: usize| -> f64 {
        match dtype {
            EnviDataType::I16 => {
                let b = [raw[2 * offset], raw[2 * offset + 1]];
                let v = if big_endian { i16::from_be_bytes(b) } else { i16::from_le_bytes(b) };
                f64::from(v)
            }
            EnviDataType::F32 => {
                let b = [
                    raw[4 * offset],
                    raw[4 * offset + 1],
                    raw[4 * offset + 2],
                    raw[4 * offset + 3],
                ];
                let v = if big_endian { f32::from_be_bytes(b) } else { f32::from_le_bytes(b) };
                f64::from(v)
            }
        }
    };

    let mut data = vec![0.0f64; rows * cols * bands];
    for b in 0..bands {
        for r in 0..rows {
            for c in 0..cols {
                let src = element_offset(interleave, rows, cols, bands, r, c, b);
                data[b * rows * cols + r * cols + c] = read_at(src);
            }
        }
    }
    HsiCube::new(rows, cols, bands, data, wavelengths)
}

/// Write a cube as a header/data file pair. The header carries the byte
/// order actually written (little-endian).
pub fn write_envi(
    cube: &HsiCube,
    header_path: &Path,
    data_path: &Path,
    interleave: Interleave,
    dtype: EnviDataType,
) -> Result<()> {
    let (rows, cols, bands) = (cube.rows(), cube.cols(), cube.bands());
    let mut header = String::new();
    header.push_str("ENVI\n");
    header.push_str(&format!("samples = {cols}\n"));
    header.push_str(&format!("lines = {rows}\n"));
    header.push_str(&format!("bands = {bands}\n"));
    header.push_str("header offset = 0\n");
    header.push_str("file type = ENVI Standard\n");
    header.push_str(&format!("data type = {}\n", dtype.code()));
    header.push_str(&format!("interleave = {interleave}\n"));
    header.push_str("byte order = 0\n");
    if let Some(w) = cube.wavelengths() {
        let joined: Vec<String> = w.iter().map(|v| format!("{v}")).collect();
        header.push_str(&format!("wavelength = {{ {} }}\n", joined.join(", ")));
    }
    fs::write(header_path, header).map_err(|e| Error::io(header_path, e))?;

    let mut raw = Vec::with_capacity(rows * cols * bands * dtype.bytes());
    // File order: iterate the destination layout directly.
    let push = |raw: &mut Vec<u8>, v: f64| match dtype {
        EnviDataType::I16 => raw.extend_from_slice(&(v.round() as i16).to_le_bytes()),
        EnviDataType::F32 => raw.extend_from_slice(&(v as f32).to_le_bytes()),
    };
    match interleave {
        Interleave::Bsq => {
            for b in 0..bands {
                for r in 0..rows {
                    for c in 0..cols {
                        push(&mut raw, cube.get(r, c, b));
                    }
                }
            }
        }
        Interleave::Bil => {
            for r in 0..rows {
                for b in 0..bands {
                    for c in 0..cols {
                        push(&mut raw, cube.get(r, c, b));
                    }
                }
            }
        }
        Interleave::Bip => {
            for r in 0..rows {
                for c in 0..cols {
                    for b in 0..bands {
                        push(&mut raw, cube.get(r, c, b));
                    }
                }
            }
        }
    }
    fs::write(data_path, raw).map_err(|e| Error::io(data_path, e))
}

/// Read a label raster stored as a single-band signed 16-bit ENVI file.
pub fn read_label_raster(header_path: &Path, data_path: &Path) -> Result<LabelRaster> {
    let cube = read_envi(header_path, data_path)?;
    if cube.bands() != 1 {
        return Err(Error::parse(format!(
            "label raster must be single band, got {}",
            cube.bands()
        )));
    }
    let labels: Result<Vec<usize>> = cube
        .data()
        .iter()
        .map(|&v| {
            if v < 0.0 || v.fract() != 0.0 {
                Err(Error::domain(format!("label value {v} is not a nonnegative integer")))
            } else {
                Ok(v as usize)
            }
        })
        .collect();
    LabelRaster::new(cube.rows(), cube.cols(), labels?)
}

/// Write a label raster as a single-band signed 16-bit ENVI file.
pub fn write_label_raster(
    raster: &LabelRaster,
    header_path: &Path,
    data_path: &Path,
) -> Result<()> {
    let data: Vec<f64> = raster.labels().iter().map(|&l| l as f64).collect();
    let cube = HsiCube::new(raster.rows(), raster.cols(), 1, data, None)?;
    write_envi(&cube, header_path, data_path, Interleave::Bsq, EnviDataType::I16)
}
