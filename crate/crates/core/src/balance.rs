//! Class balancing: SMOTE over-sampling of small classes and random
//! under-sampling of large ones, meeting at the median class count.
//!
//! SMOTE interpolates in the numeric feature space only. A synthetic
//! example copies the token sequence of the real point it was grown from.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::num::{squared_distance, Float};
use crate::record::Class;
use crate::{Error, Result};

pub const DEFAULT_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample<F> {
    pub tokens: Vec<u32>,
    pub features: Vec<F>,
    pub label: Class,
    pub origin: Origin,
    /// Index, in the input set, of the real example this one derives from.
    pub source: usize,
}

impl<F> LabeledExample<F> {
    pub fn real(tokens: Vec<u32>, features: Vec<F>, label: Class, index: usize) -> Self {
        Self {
            tokens,
            features,
            label,
            origin: Origin::Real,
            source: index,
        }
    }
}

pub fn class_counts<F>(examples: &[LabeledExample<F>]) -> [usize; Class::COUNT] {
    let mut c = [0; Class::COUNT];
    for e in examples {
        c[e.label.index()] += 1;
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteSample<F> {
    pub values: Vec<F>,
    /// Minority point the sample was grown from.
    pub base: usize,
    /// Neighbor it was interpolated towards.
    pub neighbor: usize,
    pub u: F,
}

/// Indices of the `k` nearest other points of `i` (ties by lower index).
pub fn nearest_neighbors<F: Float>(points: &[Vec<F>], i: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(F, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| (squared_distance(&points[i], p), j))
        .collect();
    d.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite features")
            .then(a.1.cmp(&b.1))
    });
    d.truncate(k);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Emits `max(0, target_count - minority.len())` synthetic points, each
/// `x + u * (x_nn - x)` for a random minority point `x`, one of its `k`
/// nearest minority neighbors `x_nn` and `u ~ U(0, 1)`.
pub fn smote<F: Float, R: Rng>(
    minority: &[Vec<F>],
    target_count: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<SmoteSample<F>>> {
    if minority.len() < 2 {
        return Err(Error::invalid("SMOTE needs >= 2 samples"));
    }
    let dim = minority[0].len();
    if minority.iter().any(|p| p.len() != dim) {
        return Err(Error::Shape("minority vectors differ in dimension".into()));
    }
    if minority.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in SMOTE input".into()));
    }
    let need = target_count.saturating_sub(minority.len());
    if need == 0 {
        return Ok(Vec::new());
    }
    let k = k.clamp(1, minority.len() - 1);
    let neighbors: Vec<Vec<usize>> = (0..minority.len())
        .map(|i| nearest_neighbors(minority, i, k))
        .collect();
    let mut out = Vec::with_capacity(need);
    for _ in 0..need {
        let base = rng.gen_range(0..minority.len());
        let neighbor = neighbors[base][rng.gen_range(0..neighbors[base].len())];
        let u = F::lit(rng.gen::<f64>());
        let x = &minority[base];
        let nn = &minority[neighbor];
        let values = x.iter().zip(nn).map(|(&a, &b)| a + u * (b - a)).collect();
        out.push(SmoteSample {
            values,
            base,
            neighbor,
            u,
        });
    }
    Ok(out)
}

/// Uniform sample of `target_count` distinct indices into `0..len`,
/// returned in ascending order.
pub fn random_undersample<R: Rng>(
    len: usize,
    target_count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if target_count > len {
        return Err(Error::invalid(format!(
            "cannot keep {target_count} of {len} samples"
        )));
    }
    let mut idx = index::sample(rng, len, target_count).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

fn class_rng(seed: u64, class: Class) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(class.index() as u64 + 1))
}

/// Equalizes the three classes at the median class count. Real examples keep
/// their relative order; synthetic ones follow, grouped by class.
pub fn balance<F: Float>(
    examples: &[LabeledExample<F>],
    seed: u64,
) -> Result<Vec<LabeledExample<F>>> {
    let counts = class_counts(examples);
    if let Some(c) = Class::ALL.iter().find(|c| counts[c.index()] < 2) {
        return Err(Error::invalid(format!(
            "class {c} has {} examples; balancing needs at least 2 per class",
            counts[c.index()]
        )));
    }
    let mut sorted = counts;
    sorted.sort_unstable();
    let target = sorted[1];

    let mut keep = vec![false; examples.len()];
    let mut synthetic = Vec::new();
    for class in Class::ALL {
        let members: Vec<usize> = (0..examples.len())
            .filter(|&i| examples[i].label == class)
            .collect();
        let mut rng = class_rng(seed, class);
        if members.len() > target {
            for j in random_undersample(members.len(), target, &mut rng)? {
                keep[members[j]] = true;
            }
            continue;
        }
        for &i in &members {
            keep[i] = true;
        }
        let points: Vec<Vec<F>> = members
            .iter()
            .map(|&i| examples[i].features.clone())
            .collect();
        for s in smote(&points, target, DEFAULT_NEIGHBORS, &mut rng)? {
            let src = &examples[members[s.base]];
            synthetic.push(LabeledExample {
                tokens: src.tokens.clone(),
                features: s.values,
                label: class,
                origin: Origin::Synthetic,
                source: src.source,
            });
        }
    }
    let mut out: Vec<LabeledExample<F>> = examples
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(e, _)| e.clone())
        .collect();
    out.extend(synthetic);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(label: Class, x: f64, i: usize) -> LabeledExample<f64> {
        LabeledExample::real(vec![i as u32], vec![x, -x], label, i)
    }

    fn dataset(counts: [usize; 3]) -> Vec<LabeledExample<f64>> {
        let mut v = Vec::new();
        for (c, &n) in Class::ALL.iter().zip(&counts) {
            for _ in 0..n {
                let i = v.len();
                v.push(ex(*c, i as f64 * 0.37 + c.index() as f64 * 100.0, i));
            }
        }
        v
    }

    #[test]
    fn identical_points_give_identical_synthetics() {
        let pts = vec![vec![1.5f64, 2.5]; 2];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = smote(&pts, 12, 5, &mut rng).unwrap();
        assert_eq!(out.len(), 10);
        assert!(out.iter().all(|s| s.values == vec![1.5, 2.5]));
    }

    #[test]
    fn two_point_minority_is_collinear() {
        let pts = vec![vec![0.0f64, 0.0], vec![1.0, 1.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = smote(&pts, 3, 5, &mut rng).unwrap();
        assert_eq!(out.len(), 1);
        let v = &out[0].values;
        assert_eq!(v[0], v[1]);
        assert!((0.0..=1.0).contains(&v[0]));
    }

    #[test]
    fn smote_needs_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(smote(&[vec![1.0f64]], 5, 5, &mut rng).is_err());
    }

    #[test]
    fn no_synthetics_when_target_met() {
        let pts = vec![vec![0.0f64], vec![1.0], vec![2.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(smote(&pts, 2, 5, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn undersample_full_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            random_undersample(10, 10, &mut rng).unwrap(),
            (0..10).collect::<Vec<_>>()
        );
        let a = random_undersample(10, 3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = random_undersample(10, 3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(random_undersample(3, 4, &mut rng).is_err());
    }

    #[test]
    fn undersample_is_uniform() {
        // Monte-Carlo: 100 draws of 500 from 1000, inclusion rate per item.
        let mut hits = vec![0usize; 1000];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            for i in random_undersample(1000, 500, &mut rng).unwrap() {
                hits[i] += 1;
            }
        }
        for h in hits {
            let f = h as f64 / 100.0;
            assert!((0.3..=0.7).contains(&f), "inclusion {f}");
        }
        // Aggregate rate is tight.
    }

    #[test]
    fn balanced_input_unchanged() {
        let d = dataset([100, 100, 100]);
        let out = balance(&d, 1).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn median_target() {
        let d = dataset([50, 100, 150]);
        let out = balance(&d, 1).unwrap();
        assert_eq!(class_counts(&out), [100, 100, 100]);
        let synth_bots = out
            .iter()
            .filter(|e| e.label == Class::Bot && e.origin == Origin::Synthetic)
            .count();
        assert_eq!(synth_bots, 50);
        assert!(out
            .iter()
            .filter(|e| e.label == Class::Genuine)
            .all(|e| e.origin == Origin::Real));
    }

    #[test]
    fn skewed_priors() {
        let d = dataset([31 * 4, 45 * 4, 34 * 4]);
        let out = balance(&d, 9).unwrap();
        assert_eq!(class_counts(&out), [136, 136, 136]);
    }

    #[test]
    fn too_small_class_rejected() {
        assert!(balance(&dataset([1, 5, 5]), 0).is_err());
    }

    #[test]
    fn deterministic_and_no_duplicates() {
        let d = dataset([20, 40, 60]);
        let a = balance(&d, 77).unwrap();
        let b = balance(&d, 77).unwrap();
        assert_eq!(a, b);
        let mut real: Vec<usize> = a
            .iter()
            .filter(|e| e.origin == Origin::Real)
            .map(|e| e.source)
            .collect();
        let n = real.len();
        real.dedup();
        assert_eq!(real.len(), n);
    }
}
