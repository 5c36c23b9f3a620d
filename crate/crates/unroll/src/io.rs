// Copyright 2026 The unroll authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Regularizer and signal file formats, and shortest round-trip float output.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use unroll_core::linalg::Matrix;
use unroll_core::train::{FrameDataset, FrameSource};
use unroll_core::Regularizer;

/// Magic bytes opening a binary regularizer file.
pub const REGULARIZER_MAGIC: &[u8; 4] = b"URL1";
/// Magic, `u16` rows, `u16` columns and four reserved zero bytes.
pub const REGULARIZER_HEADER_LEN: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] unroll_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Shortest decimal text that parses back to exactly `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// One CSV line of shortest round-trip floats.
pub fn csv_floats(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

/// On-disk encoding, chosen from the file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Csv,
    /// Little-endian `f64`.
    Binary,
}

impl Encoding {
    /// `.bin`, `.f64` and `.raw` are binary; anything else is text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin" | "f64" | "raw" | "url") => Encoding::Binary,
            _ => Encoding::Csv,
        }
    }
}

fn parse_float(path: &Path, line: usize, field: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("{:?} is not a number ({e})", field.trim()),
    })
}

/// Writes `R` row by row as comma-separated values.
pub fn write_regularizer_csv(reg: &Regularizer, path: &Path) -> Result<()> {
    let m = reg.matrix();
    let mut out = String::new();
    for i in 0..m.rows() {
        out.push_str(&csv_floats(m.row(i)));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_regularizer_csv(path: &Path) -> Result<Regularizer> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| parse_float(path, idx + 1, f))
            .collect::<Result<Vec<_>>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("expected {c} values, found {}", row.len()),
                })
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| format_err(path, "no matrix rows"))?;
    Ok(Regularizer::new(Matrix::from_row_major(rows, cols, data))?)
}

pub fn encode_regularizer(reg: &Regularizer) -> std::result::Result<Vec<u8>, String> {
    let (k, n) = (reg.k(), reg.n());
    let k16 = u16::try_from(k).map_err(|_| format!("k = {k} does not fit the header"))?;
    let n16 = u16::try_from(n).map_err(|_| format!("n = {n} does not fit the header"))?;
    let mut bytes = Vec::with_capacity(REGULARIZER_HEADER_LEN + 8 * k * n);
    bytes.extend_from_slice(REGULARIZER_MAGIC);
    bytes.extend_from_slice(&k16.to_le_bytes());
    bytes.extend_from_slice(&n16.to_le_bytes());
    bytes.extend_from_slice(&[0; 4]);
    for v in reg.matrix().as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Ok(bytes)
}

pub fn decode_regularizer(bytes: &[u8]) -> std::result::Result<Regularizer, String> {
    if bytes.len() < REGULARIZER_HEADER_LEN || &bytes[..4] != REGULARIZER_MAGIC {
        return Err("missing URL1 header".into());
    }
    let k = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
    let n = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    if bytes[8..REGULARIZER_HEADER_LEN].iter().any(|&b| b != 0) {
        return Err("reserved header bytes must be zero".into());
    }
    let body = &bytes[REGULARIZER_HEADER_LEN..];
    if body.len() != 8 * k * n {
        return Err(format!("header says {k}x{n} but payload holds {} bytes", body.len()));
    }
    let data = le_f64s(body);
    Regularizer::new(Matrix::from_row_major(k, n, data)).map_err(|e| e.to_string())
}

fn le_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect()
}

pub fn write_regularizer_bin(reg: &Regularizer, path: &Path) -> Result<()> {
    let bytes = encode_regularizer(reg).map_err(|m| format_err(path, m))?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_regularizer_bin(path: &Path) -> Result<Regularizer> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_regularizer(&bytes).map_err(|m| format_err(path, m))
}

/// Reads a regularizer in the encoding implied by the extension.
pub fn read_regularizer(path: &Path) -> Result<Regularizer> {
    match Encoding::from_path(path) {
        Encoding::Csv => read_regularizer_csv(path),
        Encoding::Binary => read_regularizer_bin(path),
    }
}

pub fn write_regularizer(reg: &Regularizer, path: &Path) -> Result<()> {
    match Encoding::from_path(path) {
        Encoding::Csv => write_regularizer_csv(reg, path),
        Encoding::Binary => write_regularizer_bin(reg, path),
    }
}

/// Samples of a signal file: one number per line, or raw little-endian `f64`.
pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    match Encoding::from_path(path) {
        Encoding::Binary => {
            let bytes = fs::read(path).map_err(io_err(path))?;
            if bytes.len() % 8 != 0 {
                return Err(format_err(path, "length is not a multiple of 8 bytes"));
            }
            Ok(le_f64s(&bytes))
        }
        Encoding::Csv => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| parse_float(path, i + 1, l))
                .collect()
        }
    }
}

/// Cuts a signal file into consecutive non-overlapping frames of length `n`.
///
/// Samples are scaled so that the largest magnitude in the file is one. At
/// most `limit` frames are kept; a trailing partial frame is dropped.
pub fn ingest_frames(path: &Path, n: usize, limit: Option<usize>, noise_sigma: f64) -> Result<FrameDataset> {
    if n == 0 {
        return Err(format_err(path, "frame length must be positive"));
    }
    let samples = read_signal(path)?;
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(format_err(path, "signal contains non-finite samples"));
    }
    if samples.len() < n {
        return Err(format_err(
            path,
            format!("{} samples are fewer than one frame of {n}", samples.len()),
        ));
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let mut frames = samples.len() / n;
    if let Some(l) = limit {
        frames = frames.min(l);
    }
    let data = samples[..frames * n].iter().map(|v| v * scale).collect();
    Ok(FrameDataset {
        frames: Matrix::from_row_major(frames, n, data),
        source: FrameSource::File(path.display().to_string()),
        noise_sigma,
    })
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(io_err(p)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 1e-30, 6.02e23, -0.0, 2.5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn header_is_twelve_bytes() {
        let reg = Regularizer::new(Matrix::from_row_major(1, 2, vec![0.5, -1.25])).unwrap();
        let bytes = encode_regularizer(&reg).unwrap();
        assert_eq!(bytes.len(), REGULARIZER_HEADER_LEN + 16);
        assert_eq!(&bytes[..4], b"URL1");
        assert_eq!(decode_regularizer(&bytes).unwrap(), reg);
        assert!(decode_regularizer(&bytes[..20]).is_err());
        let mut dirty = bytes.clone();
        dirty[9] = 1;
        assert!(decode_regularizer(&dirty).is_err());
    }
}
