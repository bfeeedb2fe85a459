use std::fmt::Write as _;
use std::path::Path;

use crate::error::{ErknError, Result};

/// Signed energy errors `value(t) - value(0)` at sampled times.
///
/// Columns follow `t,err_H,err_I,err_I1,..,err_Il,err_Imu_<label>..,err_Hstar,err_Istar_<label>..`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    /// Column names after `t`.
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl EnergySeries {
    /// Builds errors from raw observable rows, relative to the first row.
    pub fn from_values(columns: Vec<String>, times: Vec<f64>, values: Vec<Vec<f64>>) -> Self {
        let rows = match values.first() {
            Some(first) => {
                let first = first.clone();
                values
                    .into_iter()
                    .map(|r| r.iter().zip(&first).map(|(v, v0)| v - v0).collect())
                    .collect()
            }
            None => Vec::new(),
        };
        Self {
            columns,
            times,
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// `max |column|` over samples with `t` in `[t0, t1]`.
    pub fn max_abs(&self, name: &str, t0: f64, t1: f64) -> Result<f64> {
        let col = self
            .column(name)
            .ok_or_else(|| ErknError::InvalidArgument(format!("no column `{name}`")))?;
        Ok(self
            .times
            .iter()
            .zip(col)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs())))
    }

    /// `max |column|` over the whole series.
    pub fn max_abs_all(&self, name: &str) -> Result<f64> {
        self.max_abs(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Header plus one line per row; numbers in shortest round-trip form,
    /// lines terminated by `\n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 16 * (self.columns.len() + 1));
        out.push('t');
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows) {
            write!(out, "{t}").expect("writing to String");
            for v in row {
                write!(out, ",{v}").expect("writing to String");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv())
            .map_err(|e| ErknError::Io(format!("{}: {e}", path.display())))
    }

    /// Parses the CSV produced by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| ErknError::InvalidArgument("empty CSV".into()))?;
        let mut names = header.split(',');
        if names.next() != Some("t") {
            return Err(ErknError::InvalidArgument(
                "CSV must start with a `t` column".into(),
            ));
        }
        let columns: Vec<String> = names.map(str::to_string).collect();
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| ErknError::InvalidArgument(format!("row {}: {e}", i + 1)))?;
            if vals.len() != columns.len() + 1 {
                return Err(ErknError::InvalidArgument(format!(
                    "row {} has {} fields",
                    i + 1,
                    vals.len()
                )));
            }
            times.push(vals[0]);
            rows.push(vals[1..].to_vec());
        }
        Ok(Self {
            columns,
            times,
            rows,
        })
    }
}
