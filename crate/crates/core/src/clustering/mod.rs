//! Unsupervised split of identified impersonators into bots and fans.
//!
//! Features are z-scored, clustered with K-means (k-means++ seeding, best of
//! several restarts), and the two clusters are named from their centroids:
//! the cluster with more followers, more photo similarity and more username
//! similarity holds the fans.

mod elbow;
mod features;
mod kmeans;
mod standardize;

pub use elbow::{elbow_select, knee_index, ElbowCurve};
pub use features::{
    build_cluster_features, compress_counts, ClusterFeatureVector, COUNT_FEATURES, FEATURE_NAMES,
    FOLLOWER_COUNT, SIM_PHOTO, SIM_USERNAME,
};
pub use kmeans::{
    assign, kmeans, kmeans_best_of, kmeans_plus_plus, lloyd, restart_seed, KMeansFit, KMeansParams,
    DEFAULT_MAX_ITERS, DEFAULT_RESTARTS, DEFAULT_TOL,
};
pub use standardize::{apply_standardization, standardize, Standardized};

use serde::{Deserialize, Serialize};

use crate::num::{Float, Matrix};
use crate::record::Class;
use crate::{Error, Result};

/// Points farther than this multiple of their cluster's median distance are
/// flagged as outliers.
pub const OUTLIER_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<F> {
    pub k: usize,
    /// Centroids in standardized space.
    pub centroids: Matrix<F>,
    pub feature_means: Vec<F>,
    pub feature_stds: Vec<F>,
    /// Cluster index to class, set by [`label_clusters`].
    pub labels: Option<Vec<Class>>,
    pub assignments: Vec<usize>,
    /// Euclidean distance of each point to its centroid (standardized space).
    pub distances: Vec<F>,
    pub wcss: F,
}

impl<F: Float> ClusterModel<F> {
    /// Standardizes `raw` and keeps the best of `restarts` K-means runs.
    pub fn fit(
        raw: &Matrix<F>,
        k: usize,
        seed: u64,
        restarts: usize,
        params: KMeansParams,
    ) -> Result<Self> {
        let z = standardize(raw)?;
        let fit = kmeans_best_of(&z.matrix, k, seed, restarts, params)?;
        Ok(Self {
            k,
            centroids: fit.centroids,
            feature_means: z.means,
            feature_stds: z.stds,
            labels: None,
            assignments: fit.assignments,
            distances: fit.sq_distances.iter().map(|d| d.sqrt()).collect(),
            wcss: fit.wcss,
        })
    }

    pub fn label_of(&self, cluster: usize) -> Option<Class> {
        self.labels.as_ref().and_then(|l| l.get(cluster).copied())
    }

    /// Cluster of a raw (unstandardized) feature row.
    pub fn predict(&self, raw_row: &[F]) -> usize {
        let z = apply_standardization(raw_row, &self.feature_means, &self.feature_stds);
        let single = Matrix::from_vec(1, z.len(), z).expect("row shape");
        assign(&single, &self.centroids).0[0]
    }

    /// Outlier flag per fitted point.
    pub fn outliers(&self) -> Vec<bool> {
        let mut medians = vec![F::zero(); self.k];
        for (c, median) in medians.iter_mut().enumerate() {
            let mut d: Vec<F> = self
                .assignments
                .iter()
                .zip(&self.distances)
                .filter(|(&a, _)| a == c)
                .map(|(_, &d)| d)
                .collect();
            if d.is_empty() {
                continue;
            }
            d.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            let mid = d.len() / 2;
            *median = if d.len().is_multiple_of(2) {
                (d[mid - 1] + d[mid]) / F::lit(2.0)
            } else {
                d[mid]
            };
        }
        let factor = F::lit(OUTLIER_FACTOR);
        self.assignments
            .iter()
            .zip(&self.distances)
            .map(|(&a, &d)| medians[a] > F::zero() && d > factor * medians[a])
            .collect()
    }
}

/// Composite score used to tell fans from bots: standardized followers plus
/// photo similarity plus username similarity.
pub fn fan_score<F: Float>(centroid: &[F]) -> F {
    centroid[FOLLOWER_COUNT] + centroid[SIM_PHOTO] + centroid[SIM_USERNAME]
}

/// Names the two clusters. The centroid with the higher [`fan_score`] is
/// the fan cluster; on an exact tie the lower index is.
pub fn label_clusters<F: Float>(mut model: ClusterModel<F>) -> Result<ClusterModel<F>> {
    if model.k != 2 {
        return Err(Error::invalid("labeling defined for two clusters"));
    }
    if model.centroids.cols() != FEATURE_NAMES.len() {
        return Err(Error::Shape(format!(
            "centroids have {} features, expected {}",
            model.centroids.cols(),
            FEATURE_NAMES.len()
        )));
    }
    let s0 = fan_score(model.centroids.row(0));
    let s1 = fan_score(model.centroids.row(1));
    model.labels = Some(if s1 > s0 {
        vec![Class::Bot, Class::Fan]
    } else {
        vec![Class::Fan, Class::Bot]
    });
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub profile_id: String,
    pub cluster: usize,
    pub label: Class,
    pub distance: f64,
    pub outlier_flag: bool,
}

pub fn assignments<F: Float>(model: &ClusterModel<F>, ids: &[String]) -> Result<Vec<Assignment>> {
    if ids.len() != model.assignments.len() {
        return Err(Error::Shape(format!(
            "{} ids for {} clustered points",
            ids.len(),
            model.assignments.len()
        )));
    }
    let outliers = model.outliers();
    ids.iter()
        .enumerate()
        .map(|(i, id)| {
            let cluster = model.assignments[i];
            let label = model
                .label_of(cluster)
                .ok_or_else(|| Error::invalid("clusters are not labeled"))?;
            Ok(Assignment {
                profile_id: id.clone(),
                cluster,
                label,
                distance: model.distances[i].as_f64(),
                outlier_flag: outliers[i],
            })
        })
        .collect()
}

pub const ASSIGNMENT_HEADER: &str = "profile_id,cluster,label,distance,outlier_flag";

pub fn assignments_to_csv(rows: &[Assignment]) -> String {
    let mut s = format!("{ASSIGNMENT_HEADER}\n");
    for a in rows {
        s.push_str(&format!(
            "{},{},{},{:?},{}\n",
            a.profile_id,
            a.cluster,
            a.label,
            a.distance,
            u8::from(a.outlier_flag)
        ));
    }
    s
}

pub fn assignments_from_csv(text: &str) -> Result<Vec<Assignment>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Parse {
            line: i + 1,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad("expected 5 columns"));
        }
        out.push(Assignment {
            profile_id: f[0].to_string(),
            cluster: f[1].parse().map_err(|_| bad("bad cluster"))?,
            label: f[2].parse().map_err(|_| bad("bad label"))?,
            distance: f[3].parse().map_err(|_| bad("bad distance"))?,
            outlier_flag: match f[4] {
                "1" => true,
                "0" => false,
                _ => return Err(bad("bad outlier flag")),
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_with(c0: Vec<f64>, c1: Vec<f64>) -> ClusterModel<f64> {
        ClusterModel {
            k: 2,
            centroids: Matrix::from_rows(&[c0, c1]).unwrap(),
            feature_means: vec![0.0; 17],
            feature_stds: vec![1.0; 17],
            labels: None,
            assignments: vec![0, 1],
            distances: vec![0.0, 0.0],
            wcss: 0.0,
        }
    }

    #[test]
    fn higher_followers_is_fan() {
        let mut a = vec![0.0; 17];
        let mut b = vec![0.0; 17];
        a[FOLLOWER_COUNT] = -0.8;
        b[FOLLOWER_COUNT] = 1.2;
        let m = label_clusters(model_with(a, b)).unwrap();
        assert_eq!(m.labels.unwrap(), vec![Class::Bot, Class::Fan]);
    }

    #[test]
    fn higher_photo_similarity_is_fan() {
        let mut a = vec![0.0; 17];
        let mut b = vec![0.0; 17];
        a[SIM_PHOTO] = 0.71;
        b[SIM_PHOTO] = 0.17;
        let m = label_clusters(model_with(a, b)).unwrap();
        assert_eq!(m.labels.unwrap(), vec![Class::Fan, Class::Bot]);
    }

    #[test]
    fn labels_follow_centroids() {
        let mut a = vec![0.0; 17];
        a[FOLLOWER_COUNT] = 2.0;
        let b = vec![0.0; 17];
        let m1 = label_clusters(model_with(a.clone(), b.clone())).unwrap();
        let m2 = label_clusters(model_with(b, a)).unwrap();
        assert_eq!(m1.label_of(0), m2.label_of(1));
        assert_eq!(m1.label_of(1), m2.label_of(0));
    }

    #[test]
    fn labeling_requires_two_clusters() {
        let mut m = model_with(vec![0.0; 17], vec![0.0; 17]);
        m.k = 3;
        assert!(label_clusters(m).is_err());
    }

    #[test]
    fn assignment_csv_roundtrip() {
        let rows = vec![Assignment {
            profile_id: "a".into(),
            cluster: 1,
            label: Class::Fan,
            distance: 0.125,
            outlier_flag: true,
        }];
        assert_eq!(
            assignments_from_csv(&assignments_to_csv(&rows)).unwrap(),
            rows
        );
    }

    #[test]
    fn far_point_flagged() {
        let mut m = model_with(vec![0.0; 17], vec![0.0; 17]);
        m.assignments = vec![0, 0, 0, 0, 1];
        m.distances = vec![1.0, 1.0, 1.1, 5.0, 0.5];
        assert_eq!(m.outliers(), vec![false, false, false, true, false]);
    }
}
