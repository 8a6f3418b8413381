use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Largest signal dimension for which all `2^d` vertices are enumerated.
pub const MAX_DIM: usize = 10;

/// Payment table on the vertices of `{0,1}^d`. Vertex `x` is stored at the
/// bitmask whose bit `i` equals `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularContract {
    d: usize,
    payments: Vec<f64>,
}

/// Coordinates of vertex `mask` in `{0,1}^d`.
pub fn vertex(d: usize, mask: usize) -> Vec<f64> {
    (0..d).map(|i| ((mask >> i) & 1) as f64).collect()
}

impl TabularContract {
    pub fn new(d: usize, payments: Vec<f64>) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidParameter(format!("signal dimension {d} must lie in 1..={MAX_DIM}")));
        }
        if payments.len() != 1 << d {
            return Err(Error::DimensionMismatch { expected: 1 << d, got: payments.len() });
        }
        if let Some((mask, p)) = payments.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "payment {p} at vertex {} violates limited liability",
                bitstring(d, mask)
            )));
        }
        Ok(Self { d, payments })
    }

    /// `w(x) = ⟨slope, x⟩ + intercept`.
    pub fn affine(slope: &[f64], intercept: f64) -> Result<Self> {
        let d = slope.len();
        let payments = (0..1usize << d.min(MAX_DIM + 1))
            .map(|m| vertex(d, m).iter().zip(slope).map(|(x, s)| x * s).sum::<f64>() + intercept)
            .collect();
        Self::new(d, payments)
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(d, vec![0.0; 1 << d.min(MAX_DIM + 1)])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn payments(&self) -> &[f64] {
        &self.payments
    }

    pub fn payment(&self, mask: usize) -> f64 {
        self.payments[mask]
    }

    pub fn num_vertices(&self) -> usize {
        self.payments.len()
    }

    /// Reads rows `vertex,payment` where `vertex` is a bitstring whose `i`-th
    /// character is `x_i`. A header row is optional; every vertex must appear
    /// exactly once.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut entries: Vec<(String, f64)> = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Schema { row: row + 1, msg: format!("expected 2 fields, found {}", rec.len()) });
            }
            if row == 0 && rec[0].eq_ignore_ascii_case("vertex") {
                continue;
            }
            let bits = rec[0].to_string();
            if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::Schema { row: row + 1, msg: format!("vertex {bits:?} is not a bitstring") });
            }
            let value: f64 = rec[1]
                .parse()
                .map_err(|_| Error::Schema { row: row + 1, msg: format!("payment {:?} is not a number", &rec[1]) })?;
            entries.push((bits, value));
        }
        let d = entries.first().map(|(b, _)| b.len()).ok_or(Error::Schema { row: 0, msg: "no rows".into() })?;
        if d > MAX_DIM {
            return Err(Error::InvalidParameter(format!("signal dimension {d} exceeds {MAX_DIM}")));
        }
        let mut payments = vec![f64::NAN; 1 << d];
        for (row, (bits, value)) in entries.iter().enumerate() {
            if bits.len() != d {
                return Err(Error::Schema {
                    row: row + 1,
                    msg: format!("vertex {bits} has length {}, expected {d}", bits.len()),
                });
            }
            let mask = bits.chars().enumerate().fold(0usize, |m, (i, c)| m | (((c == '1') as usize) << i));
            if !payments[mask].is_nan() {
                return Err(Error::Schema { row: row + 1, msg: format!("vertex {bits} listed twice") });
            }
            payments[mask] = *value;
        }
        if let Some(mask) = payments.iter().position(|p| p.is_nan()) {
            return Err(Error::Schema { row: entries.len(), msg: format!("vertex {} missing", bitstring(d, mask)) });
        }
        Self::new(d, payments)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["vertex", "payment"])?;
        for (mask, p) in self.payments.iter().enumerate() {
            w.write_record([bitstring(self.d, mask), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.to_csv_writer(std::fs::File::create(path)?)
    }
}

pub fn bitstring(d: usize, mask: usize) -> String {
    (0..d).map(|i| if (mask >> i) & 1 == 1 { '1' } else { '0' }).collect()
}
