//! Choice of the cluster count at the knee of the WCSS-versus-k curve.

use std::ops::RangeInclusive;

use super::kmeans::{assign, kmeans_best_of, lloyd, KMeansFit, KMeansParams};
use crate::num::{Float, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ElbowCurve<F> {
    pub ks: Vec<usize>,
    pub wcss: Vec<F>,
    /// Normalized distance of each point from the end-to-end chord.
    pub chord_distance: Vec<f64>,
    pub k_star: usize,
}

impl<F: Float> ElbowCurve<F> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,wcss,chord_distance\n");
        for i in 0..self.ks.len() {
            s.push_str(&format!(
                "{},{:?},{:?}\n",
                self.ks[i],
                self.wcss[i].as_f64(),
                self.chord_distance[i]
            ));
        }
        s
    }
}

/// Starting centroids for k+1 clusters: the k-cluster solution plus the
/// point farthest from its centroid. Lloyd from here cannot end above the
/// k-cluster WCSS, which keeps the curve monotone.
fn warm_start<F: Float>(m: &Matrix<F>, prev: &KMeansFit<F>) -> Matrix<F> {
    let (_, dists) = assign(m, &prev.centroids);
    let far = dists
        .iter()
        .enumerate()
        .fold(
            (0, F::neg_infinity()),
            |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
        )
        .0;
    let mut init = Matrix::zeros(prev.k + 1, m.cols());
    for c in 0..prev.k {
        init.row_mut(c).copy_from_slice(prev.centroids.row(c));
    }
    init.row_mut(prev.k).copy_from_slice(m.row(far));
    init
}

/// Index of the interior point with the largest perpendicular distance from
/// the chord joining the first and last points, both axes scaled to [0, 1].
/// Ties resolve to the smaller k.
pub fn knee_index(ks: &[usize], wcss: &[f64]) -> (usize, Vec<f64>) {
    let n = ks.len();
    let (k0, k1) = (ks[0] as f64, ks[n - 1] as f64);
    let lo = wcss.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = wcss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(wcss)
        .map(|(&k, &w)| {
            let x = (k as f64 - k0) / (k1 - k0);
            let y = if span > 0.0 { (w - lo) / span } else { 0.0 };
            (x, y)
        })
        .collect();
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[n - 1];
    let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    let dist: Vec<f64> = pts
        .iter()
        .map(|&(x, y)| {
            if len == 0.0 {
                0.0
            } else {
                ((x1 - x0) * (y0 - y) - (x0 - x) * (y1 - y0)).abs() / len
            }
        })
        .collect();
    let mut best = 1;
    for i in 2..n - 1 {
        if dist[i] > dist[best] {
            best = i;
        }
    }
    (best, dist)
}

pub fn elbow_select<F: Float>(
    m: &Matrix<F>,
    k_range: RangeInclusive<usize>,
    seed: u64,
    restarts: usize,
    params: KMeansParams,
) -> Result<ElbowCurve<F>> {
    let ks: Vec<usize> = k_range.clone().collect();
    if ks.len() < 3 {
        return Err(Error::invalid(
            "elbow selection needs at least 3 values of k",
        ));
    }
    if ks[0] == 0 {
        return Err(Error::invalid("k range must start at 1 or above"));
    }
    if *k_range.end() > m.rows() {
        return Err(Error::invalid(format!(
            "largest k = {} exceeds {} points",
            k_range.end(),
            m.rows()
        )));
    }
    let mut wcss = Vec::with_capacity(ks.len());
    let mut prev: Option<KMeansFit<F>> = None;
    for &k in &ks {
        let mut best = kmeans_best_of(m, k, seed.wrapping_add(k as u64), restarts, params)?;
        if let Some(p) = prev.as_ref().filter(|p| p.k + 1 == k) {
            let warm = lloyd(m, warm_start(m, p), params)?;
            if warm.wcss < best.wcss {
                best = warm;
            }
        }
        wcss.push(best.wcss);
        prev = Some(best);
    }
    let as_f64: Vec<f64> = wcss.iter().map(|w| w.as_f64()).collect();
    let (idx, chord_distance) = knee_index(&ks, &as_f64);
    Ok(ElbowCurve {
        k_star: ks[idx],
        ks,
        wcss,
        chord_distance,
    })
}
