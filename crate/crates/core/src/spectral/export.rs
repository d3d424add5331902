use std::io::Write;

use crate::{Error, Result};

use super::FeatureTimeSeries;

/// Formats like C's `%.9g`: nine significant digits, trailing zeros dropped.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

/// Column-oriented CSV table keyed by frame time. Missing values serialize as
/// empty fields.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    frame_times: Vec<f64>,
    columns: Vec<(String, Vec<Option<f64>>)>,
}

impl FeatureTable {
    pub fn new(frame_times: Vec<f64>) -> Self {
        Self {
            frame_times,
            columns: Vec::new(),
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.frame_times.len() {
            return Err(Error::ShapeMismatch {
                expected: self.frame_times.len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Adds one column per feature dimension (`name` or `name_0`, `name_1`, ...).
    pub fn add_series(&mut self, series: &FeatureTimeSeries) -> Result<&mut Self> {
        self.check_len(series.frames())?;
        for d in 0..series.dims() {
            let name = if series.dims() == 1 {
                series.name.clone()
            } else {
                format!("{}_{d}", series.name)
            };
            self.columns
                .push((name, series.values.row(d).map(|&v| Some(v)).collect()));
        }
        Ok(self)
    }

    pub fn add_optional(&mut self, name: &str, values: &[Option<f64>]) -> Result<&mut Self> {
        self.check_len(values.len())?;
        self.columns.push((name.to_string(), values.to_vec()));
        Ok(self)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "time_s")?;
        for (name, _) in &self.columns {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (m, t) in self.frame_times.iter().enumerate() {
            write!(out, "{}", format_sig9(*t))?;
            for (_, col) in &self.columns {
                match col[m] {
                    Some(v) => write!(out, ",{}", format_sig9(v))?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1001.3671875), "1001.36719");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(-2.0), "-2");
        assert_eq!(format_sig9(123456789.0), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e+09");
        assert_eq!(format_sig9(0.000012345), "1.2345e-05");
        assert_eq!(format_sig9(0.023219954648526078), "0.0232199546");
    }

    #[test]
    fn csv_layout() {
        let mut table = FeatureTable::new(vec![0.0, 0.5]);
        table
            .add_series(&FeatureTimeSeries::scalar(
                "centroid",
                vec![0.0, 0.5],
                vec![1.0, 2.5],
            ))
            .unwrap()
            .add_optional("pitch_hz", &[Some(440.0), None])
            .unwrap();
        let mut out = Vec::new();
        table.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "time_s,centroid,pitch_hz\n0,1,440\n0.5,2.5,\n"
        );
    }
}
