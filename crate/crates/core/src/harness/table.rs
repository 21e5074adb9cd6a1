use std::path::Path;

use crate::error::{Error, Result};

/// Numeric CSV table. Values are written with 10 significant digits, so
/// reading a written table back gives each value rounded to that precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// The decimal rendering used for every number in emitted CSV files.
pub fn format_value(x: f64) -> String {
    format!("{x:.9e}")
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::io(Path::new("<csv>"), e);
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_value(x))).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(Path::new("<csv>"), e))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv_str(text: &str) -> Result<Table> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r
            .headers()
            .map_err(|e| Error::io(Path::new("<csv>"), e))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut table = Table::new(columns);
        for record in r.records() {
            let record = record.map_err(|e| Error::io(Path::new("<csv>"), e))?;
            let row = record
                .iter()
                .map(|field| {
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::io(Path::new("<csv>"), format!("{field:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            table.push(row);
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    /// The table as it reads back after a write.
    pub fn rounded(&self) -> Table {
        Table {
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&x| format_value(x).parse().unwrap()).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(format_value(5.474e-3), "5.474000000e-3");
        assert_eq!(format_value(0.0), "0.000000000e0");
        assert_eq!(format_value(f64::NAN), "NaN");
    }

    #[test]
    fn round_trip() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        t.push(vec![std::f64::consts::PI, 1.0 / 3.0]);
        t.push(vec![f64::NAN, -2.5e-300]);
        let back = Table::from_csv_str(&t.to_csv_string().unwrap()).unwrap();
        assert_eq!(back.columns, t.columns);
        let r = t.rounded();
        assert_eq!(back.rows[0], r.rows[0]);
        assert!(back.rows[1][0].is_nan());
        assert_eq!(back.rows[1][1], r.rows[1][1]);
        assert_eq!(back.to_csv_string().unwrap(), t.to_csv_string().unwrap());
    }
}
