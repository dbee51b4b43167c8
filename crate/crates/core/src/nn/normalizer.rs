use serde::{Deserialize, Serialize};

use crate::num::Float;
use crate::{Error, Result};

/// Per-column scaling of the metadata vector: selected count columns are
/// compressed with a signed `ln(1 + |x|)`, then every column is z-scored
/// with statistics of the training split. A constant column gets unit
/// scale, so its training values map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Normalizer {
    pub log_columns: Vec<usize>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

fn slog(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

impl Normalizer {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R], log_columns: &[usize]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("cannot fit a normalizer on zero rows"))?;
        let d = first.as_ref().len();
        if let Some(&bad) = log_columns.iter().find(|&&c| c >= d) {
            return Err(Error::invalid(format!("log column {bad} out of range")));
        }
        let mut log = vec![false; d];
        log_columns.iter().for_each(|&c| log[c] = true);
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::Shape("metadata rows differ in width".into()));
            }
            for j in 0..d {
                if !r[j].is_finite() {
                    return Err(Error::Numeric("non-finite metadata value".into()));
                }
                means[j] += if log[j] { slog(r[j]) } else { r[j] };
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        for r in rows {
            let r = r.as_ref();
            for j in 0..d {
                let v = if log[j] { slog(r[j]) } else { r[j] } - means[j];
                sq[j] += v * v;
            }
        }
        let stds = sq
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        let mut log_columns = log_columns.to_vec();
        log_columns.sort_unstable();
        log_columns.dedup();
        Ok(Self {
            log_columns,
            means,
            stds,
        })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_f64(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::Shape(format!(
                "expected {} metadata values, got {}",
                self.dim(),
                row.len()
            )));
        }
        let mut out: Vec<f64> = row.to_vec();
        for &c in &self.log_columns {
            out[c] = slog(out[c]);
        }
        for (j, v) in out.iter_mut().enumerate() {
            *v = (*v - self.means[j]) / self.stds[j];
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite normalized metadata".into()));
        }
        Ok(out)
    }

    pub fn transform<F: Float>(&self, row: &[f64]) -> Result<Vec<F>> {
        Ok(self.transform_f64(row)?.into_iter().map(F::lit).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zscores_training_rows() {
        let rows = vec![vec![1.0, 10.0, 5.0], vec![3.0, 100.0, 5.0]];
        let n = Normalizer::fit(&rows, &[1]).unwrap();
        let a = n.transform_f64(&rows[0]).unwrap();
        let b = n.transform_f64(&rows[1]).unwrap();
        assert!((a[0] + 1.0).abs() < 1e-12 && (b[0] - 1.0).abs() < 1e-12);
        assert!((a[1] + 1.0).abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12);
        assert_eq!(a[2], 0.0);
        assert!(n.transform_f64(&[1.0]).is_err());
    }

    #[test]
    fn json_roundtrip_bit_exact() {
        let rows = vec![vec![0.1, 1.0 / 3.0], vec![2.7, 1e-300]];
        let n = Normalizer::fit(&rows, &[0]).unwrap();
        let s = serde_json::to_string(&n).unwrap();
        let back: Normalizer = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
    }
}
