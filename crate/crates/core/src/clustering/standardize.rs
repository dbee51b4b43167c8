use crate::num::{Float, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Standardized<F> {
    pub matrix: Matrix<F>,
    pub means: Vec<F>,
    pub stds: Vec<F>,
}

/// Column-wise z-scores with the population standard deviation. A constant
/// column maps to zeros and records a standard deviation of 1.
pub fn standardize<F: Float>(m: &Matrix<F>) -> Result<Standardized<F>> {
    let n = m.rows();
    if n < 2 {
        return Err(Error::invalid(format!(
            "standardize needs at least 2 rows, got {n}"
        )));
    }
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite value in feature matrix".into()));
    }
    let d = m.cols();
    let nf = F::from_usize_lossy(n);
    let mut means = vec![F::zero(); d];
    for row in m.iter_rows() {
        for (mu, &v) in means.iter_mut().zip(row) {
            *mu += v;
        }
    }
    for mu in &mut means {
        *mu /= nf;
    }
    let mut stds = vec![F::zero(); d];
    for row in m.iter_rows() {
        for j in 0..d {
            let dv = row[j] - means[j];
            stds[j] += dv * dv;
        }
    }
    let mut constant = vec![false; d];
    for (j, s) in stds.iter_mut().enumerate() {
        *s = (*s / nf).sqrt();
        let scale = means[j].abs().max(F::one());
        if *s <= F::epsilon() * scale {
            log::warn!("feature column {j} is constant; using std = 1");
            *s = F::one();
            constant[j] = true;
        }
    }
    let mut out = Matrix::zeros(n, d);
    for i in 0..n {
        let src = m.row(i);
        let dst = out.row_mut(i);
        for j in 0..d {
            dst[j] = if constant[j] {
                F::zero()
            } else {
                (src[j] - means[j]) / stds[j]
            };
        }
    }
    Ok(Standardized {
        matrix: out,
        means,
        stds,
    })
}

/// Applies stored standardization parameters to one row.
pub fn apply_standardization<F: Float>(row: &[F], means: &[F], stds: &[F]) -> Vec<F> {
    row.iter()
        .zip(means.iter().zip(stds))
        .map(|(&v, (&mu, &sd))| (v - mu) / sd)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_column() {
        let m = Matrix::from_rows(&[vec![0.0f64], vec![2.0]]).unwrap();
        let s = standardize(&m).unwrap();
        assert_eq!(s.matrix.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn constant_column() {
        let m = Matrix::from_rows(&[vec![5.0f64], vec![5.0], vec![5.0]]).unwrap();
        let s = standardize(&m).unwrap();
        assert_eq!(s.matrix.as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(s.stds, vec![1.0]);
    }

    #[test]
    fn needs_two_rows() {
        let m = Matrix::from_rows(&[vec![1.0f64]]).unwrap();
        assert!(standardize(&m).is_err());
    }

    #[test]
    fn random_matrix_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|_| rng.gen_range(-50.0..50.0)).collect())
            .collect();
        let s = standardize(&Matrix::from_rows(&rows).unwrap()).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = (0..10).map(|i| s.matrix.get(i, j)).collect();
            let mean = col.iter().sum::<f64>() / 10.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 10.0;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
    }
}
