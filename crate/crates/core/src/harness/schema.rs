//! Result rows and their CSV form.
//!
//! Columns, in order: `preset, seed, T, method, error, cum_proxy,
//! cum_utility_regret, min_singular, wall_time_ms, status, value`. Fields
//! that do not apply to a row are left empty. Files may start with `#`
//! comment lines recording the run settings.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 11] = [
    "preset",
    "seed",
    "T",
    "method",
    "error",
    "cum_proxy",
    "cum_utility_regret",
    "min_singular",
    "wall_time_ms",
    "status",
    "value",
];

pub const STATUS_OK: &str = "ok";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub preset: String,
    pub seed: u64,
    pub horizon: Option<usize>,
    pub method: String,
    pub error: Option<f64>,
    pub cum_proxy: Option<f64>,
    pub cum_utility_regret: Option<f64>,
    pub min_singular: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub status: String,
    /// Method-specific extra statistic (error bound, per-epoch product,
    /// worst-case payoff, ...).
    pub value: Option<f64>,
}

impl ResultRow {
    pub fn new(preset: &str, seed: u64, horizon: Option<usize>, method: &str) -> Self {
        Self {
            preset: preset.to_string(),
            seed,
            horizon,
            method: method.to_string(),
            error: None,
            cum_proxy: None,
            cum_utility_regret: None,
            min_singular: None,
            wall_time_ms: None,
            status: STATUS_OK.to_string(),
            value: None,
        }
    }

    pub fn failure(preset: &str, seed: u64, horizon: Option<usize>, method: &str, msg: &str) -> Self {
        let mut row = Self::new(preset, seed, horizon, method);
        row.status = format!("failed: {msg}");
        row
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    fn fields(&self) -> [String; 11] {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.preset.clone(),
            self.seed.to_string(),
            self.horizon.map(|t| t.to_string()).unwrap_or_default(),
            self.method.clone(),
            num(self.error),
            num(self.cum_proxy),
            num(self.cum_utility_regret),
            num(self.min_singular),
            num(self.wall_time_ms),
            self.status.clone(),
            num(self.value),
        ]
    }

    fn parse(record: &csv::StringRecord, row: usize) -> Result<Self> {
        if record.len() != COLUMNS.len() {
            return Err(Error::Schema {
                row,
                msg: format!("expected {} fields, found {}", COLUMNS.len(), record.len()),
            });
        }
        let num = |i: usize| -> Result<Option<f64>> {
            let s = record[i].trim();
            if s.is_empty() {
                return Ok(None);
            }
            let v: f64 =
                s.parse().map_err(|_| Error::Schema { row, msg: format!("{} = {s:?} is not a number", COLUMNS[i]) })?;
            if !v.is_finite() {
                return Err(Error::Schema { row, msg: format!("{} = {s} is not finite", COLUMNS[i]) });
            }
            Ok(Some(v))
        };
        let seed = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::Schema { row, msg: format!("seed {:?} is not an integer", &record[1]) })?;
        let horizon = match record[2].trim() {
            "" => None,
            s => Some(s.parse().map_err(|_| Error::Schema { row, msg: format!("T {s:?} is not an integer") })?),
        };
        if record[0].trim().is_empty() || record[3].trim().is_empty() || record[9].trim().is_empty() {
            return Err(Error::Schema { row, msg: "preset, method and status are required".into() });
        }
        Ok(Self {
            preset: record[0].to_string(),
            seed,
            horizon,
            method: record[3].to_string(),
            error: num(4)?,
            cum_proxy: num(5)?,
            cum_utility_regret: num(6)?,
            min_singular: num(7)?,
            wall_time_ms: num(8)?,
            status: record[9].to_string(),
            value: num(10)?,
        })
    }
}

/// Writes `# key: value` comment lines, the header and all rows.
pub fn write_rows<W: Write>(mut out: W, comments: &[(String, String)], rows: &[ResultRow]) -> Result<()> {
    for (k, v) in comments {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows back, validating the header and every field. Row numbers in
/// errors count data rows from 1.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).flexible(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(COLUMNS.iter().copied()) {
        return Err(Error::Schema { row: 0, msg: format!("header {:?} does not match {:?}", header, COLUMNS) });
    }
    rdr.records().enumerate().map(|(i, rec)| ResultRow::parse(&rec?, i + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut row = ResultRow::new("etc-regret", 3, Some(100), "etc");
        row.cum_proxy = Some(1.5);
        row.error = Some(0.25);
        let fail = ResultRow::failure("etc-regret", 4, Some(100), "etc", "cell exceeded budget");
        let mut buf = Vec::new();
        write_rows(&mut buf, &[("sigma0".into(), "1".into())], &[row.clone(), fail.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# sigma0: 1\npreset,seed,T,method,"));
        assert!(text.contains("etc-regret,3,100,etc,0.25,1.5,,,,ok,\n"));
        assert_eq!(read_rows(buf.as_slice()).unwrap(), vec![row, fail]);
    }

    #[test]
    fn malformed_rows_are_named() {
        let text = "preset,seed,T,method,error,cum_proxy,cum_utility_regret,min_singular,wall_time_ms,status,value\n\
                    p,0,10,m,1,,,,,ok,\n\
                    p,x,10,m,1,,,,,ok,\n";
        assert!(matches!(read_rows(text.as_bytes()), Err(Error::Schema { row: 2, .. })));
        let short =
            "preset,seed,T,method,error,cum_proxy,cum_utility_regret,min_singular,wall_time_ms,status,value\np,0,10\n";
        assert!(matches!(read_rows(short.as_bytes()), Err(Error::Schema { row: 1, .. })));
        assert!(matches!(read_rows("a,b\n".as_bytes()), Err(Error::Schema { row: 0, .. })));
    }
}
