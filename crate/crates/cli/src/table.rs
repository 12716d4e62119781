//! Reading the `t,x[,y]` data files.

use crate::{CliError, CliResult};

pub struct DataTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn data(msg: String) -> CliError {
    CliError::Data(msg)
}

impl DataTable {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers: Vec<String> =
            reader.headers().map_err(|e| data(format!("header: {e}")))?.iter().map(str::to_string).collect();
        if headers.iter().all(|h| h.is_empty()) {
            return Err(data("missing header row".into()));
        }
        let rows = reader
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(|e| data(e.to_string()))?;
        if rows.is_empty() {
            return Err(data("no data rows".into()));
        }
        Ok(Self { headers, rows })
    }

    fn index(&self, name: &str) -> CliResult<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data(format!("missing column '{name}' (have: {})", self.headers.join(","))))
    }

    pub fn column(&self, name: &str) -> CliResult<Vec<f64>> {
        let i = self.index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(line, row)| {
                let v: f64 = row[i]
                    .parse()
                    .map_err(|_| data(format!("row {}: '{}' in column {name} is not a number", line + 1, row[i])))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(data(format!("row {}: non-finite value in column {name}", line + 1)))
                }
            })
            .collect()
    }

    /// The `t` column as positive integers.
    pub fn time_index(&self) -> CliResult<Vec<u64>> {
        let i = self.index("t")?;
        self.rows
            .iter()
            .enumerate()
            .map(|(line, row)| match row[i].parse::<u64>() {
                Ok(t) if t >= 1 => Ok(t),
                _ => Err(data(format!("row {}: t must be a positive integer, got '{}'", line + 1, row[i]))),
            })
            .collect()
    }

    pub fn require_increasing_t(&self) -> CliResult<()> {
        if self.headers.iter().any(|h| h == "t") {
            let t = self.time_index()?;
            if let Some(w) = t.windows(2).position(|w| w[1] <= w[0]) {
                return Err(data(format!("row {}: t is not increasing", w + 2)));
            }
        }
        Ok(())
    }

    /// Phases are assigned by position, so `t` (when present) must be 1..n.
    pub fn require_unit_t(&self) -> CliResult<()> {
        if self.headers.iter().any(|h| h == "t") {
            for (i, t) in self.time_index()?.into_iter().enumerate() {
                if t != i as u64 + 1 {
                    return Err(data(format!("row {}: expected t = {}, got {t}", i + 1, i + 1)));
                }
            }
        }
        Ok(())
    }
}
