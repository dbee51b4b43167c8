//! Lloyd's algorithm with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::num::{squared_distance, Float, Matrix};
use crate::{Error, Result};

pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit<F> {
    pub k: usize,
    pub centroids: Matrix<F>,
    pub assignments: Vec<usize>,
    /// Squared distance of each point to its centroid.
    pub sq_distances: Vec<F>,
    pub wcss: F,
    /// WCSS after every assignment step, final assignment included.
    pub wcss_history: Vec<F>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct KMeansParams {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }
}

fn validate<F: Float>(m: &Matrix<F>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > m.rows() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds {} points",
            m.rows()
        )));
    }
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite value in k-means input".into()));
    }
    Ok(())
}

/// k-means++ seeding: first centroid uniform, each next one drawn with
/// probability proportional to the squared distance to the nearest chosen
/// centroid.
pub fn kmeans_plus_plus<F: Float>(m: &Matrix<F>, k: usize, rng: &mut impl Rng) -> Matrix<F> {
    let n = m.rows();
    let mut centroids = Matrix::zeros(k, m.cols());
    let first = rng.gen_range(0..n);
    centroids.row_mut(0).copy_from_slice(m.row(first));
    let mut nearest: Vec<F> = (0..n)
        .map(|i| squared_distance(m.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: F = nearest.iter().copied().sum();
        let pick = if total > F::zero() {
            let target = F::lit(rng.gen::<f64>()) * total;
            let mut acc = F::zero();
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(m.row(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            let nd = squared_distance(m.row(i), centroids.row(c));
            if nd < *d {
                *d = nd;
            }
        }
    }
    centroids
}

/// Nearest centroid per point; ties go to the lowest centroid index.
pub fn assign<F: Float>(m: &Matrix<F>, centroids: &Matrix<F>) -> (Vec<usize>, Vec<F>) {
    let mut labels = Vec::with_capacity(m.rows());
    let mut dists = Vec::with_capacity(m.rows());
    for row in m.iter_rows() {
        let mut best = 0;
        let mut best_d = squared_distance(row, centroids.row(0));
        for c in 1..centroids.rows() {
            let d = squared_distance(row, centroids.row(c));
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        labels.push(best);
        dists.push(best_d);
    }
    (labels, dists)
}

/// Runs Lloyd iterations from the given starting centroids.
pub fn lloyd<F: Float>(
    m: &Matrix<F>,
    init: Matrix<F>,
    params: KMeansParams,
) -> Result<KMeansFit<F>> {
    let k = init.rows();
    validate(m, k)?;
    let d = m.cols();
    let tol = F::lit(params.tol);
    let mut centroids = init;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (labels, dists) = assign(m, &centroids);
        history.push(dists.iter().copied().sum::<F>());
        iterations += 1;

        let mut sums = Matrix::<F>::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, &v) in sums.row_mut(c).iter_mut().zip(m.row(i)) {
                *s += v;
            }
        }
        let mut next = sums;
        for c in 0..k {
            if counts[c] > 0 {
                let inv = F::one() / F::from_usize_lossy(counts[c]);
                for v in next.row_mut(c) {
                    *v *= inv;
                }
            }
        }
        reseed_empty(m, &mut next, &labels, &dists, &mut counts);

        let shift = (0..k)
            .map(|c| squared_distance(centroids.row(c), next.row(c)).sqrt())
            .fold(F::zero(), F::max);
        centroids = next;
        if shift < tol || iterations >= params.max_iters {
            break;
        }
    }
    let (assignments, sq_distances) = assign(m, &centroids);
    let wcss: F = sq_distances.iter().copied().sum();
    history.push(wcss);
    Ok(KMeansFit {
        k,
        centroids,
        assignments,
        sq_distances,
        wcss,
        wcss_history: history,
        iterations,
    })
}

/// Moves each empty centroid onto the point farthest from its own centroid,
/// taken from a cluster with more than one member.
fn reseed_empty<F: Float>(
    m: &Matrix<F>,
    centroids: &mut Matrix<F>,
    labels: &[usize],
    dists: &[F],
    counts: &mut [usize],
) {
    let mut taken = vec![false; labels.len()];
    for c in 0..counts.len() {
        if counts[c] > 0 {
            continue;
        }
        let mut far: Option<(usize, F)> = None;
        for (i, &di) in dists.iter().enumerate() {
            if taken[i] || counts[labels[i]] <= 1 {
                continue;
            }
            if far.is_none_or(|(_, fd)| di > fd) {
                far = Some((i, di));
            }
        }
        if let Some((i, _)) = far {
            taken[i] = true;
            counts[labels[i]] -= 1;
            counts[c] = 1;
            centroids.row_mut(c).copy_from_slice(m.row(i));
        }
    }
}

pub fn kmeans<F: Float>(
    m: &Matrix<F>,
    k: usize,
    seed: u64,
    params: KMeansParams,
) -> Result<KMeansFit<F>> {
    validate(m, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = kmeans_plus_plus(m, k, &mut rng);
    lloyd(m, init, params)
}

/// Seed of restart `r` derived from a base seed.
pub fn restart_seed(seed: u64, r: usize) -> u64 {
    seed ^ (r as u64)
        .wrapping_add(1)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Best (lowest WCSS) of `restarts` seeded runs. Ties keep the earliest run.
pub fn kmeans_best_of<F: Float>(
    m: &Matrix<F>,
    k: usize,
    seed: u64,
    restarts: usize,
    params: KMeansParams,
) -> Result<KMeansFit<F>> {
    let mut best: Option<KMeansFit<F>> = None;
    for r in 0..restarts.max(1) {
        let fit = kmeans(m, k, restart_seed(seed, r), params)?;
        if best.as_ref().is_none_or(|b| fit.wcss < b.wcss) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}
