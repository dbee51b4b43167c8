//! Random forest of CART trees (Gini impurity, bootstrap rows, random
//! feature subsets per split).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::num::{Float, Matrix};
use crate::record::Class;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<F> {
    Leaf(Class),
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree<F> {
    pub nodes: Vec<Node<F>>,
    /// Bootstrap sample (row indices, with repeats) the tree was grown on.
    pub bootstrap: Vec<usize>,
}

impl<F: Float> Tree<F> {
    pub fn predict_one(&self, x: &[F]) -> Class {
        let mut n = 0;
        loop {
            match &self.nodes[n] {
                Node::Leaf(c) => return *c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    n = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<F> {
    pub trees: Vec<Tree<F>>,
    pub n_features: usize,
}

fn counts(y: &[Class], idx: &[usize]) -> [usize; 3] {
    let mut c = [0; 3];
    for &i in idx {
        c[y[i].index()] += 1;
    }
    c
}

fn majority(c: &[usize; 3]) -> Class {
    let mut best = 0;
    for k in 1..3 {
        if c[k] > c[best] {
            best = k;
        }
    }
    Class::ALL[best]
}

fn gini_sum(c: &[usize; 3], n: usize) -> f64 {
    // n * gini = n - sum(c^2) / n
    if n == 0 {
        return 0.0;
    }
    let sq: usize = c.iter().map(|v| v * v).sum();
    n as f64 - sq as f64 / n as f64
}

struct Best<F> {
    feature: usize,
    threshold: F,
    score: f64,
}

fn best_split_on<F: Float>(
    x: &Matrix<F>,
    y: &[Class],
    idx: &[usize],
    feature: usize,
    buf: &mut Vec<(F, u8)>,
) -> Option<(F, f64)> {
    buf.clear();
    buf.extend(idx.iter().map(|&i| (x.get(i, feature), y[i].index() as u8)));
    buf.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
    if buf[0].0 == buf[buf.len() - 1].0 {
        return None;
    }
    let n = buf.len();
    let mut total = [0usize; 3];
    buf.iter().for_each(|&(_, c)| total[c as usize] += 1);
    let mut left = [0usize; 3];
    let mut best: Option<(F, f64)> = None;
    for k in 0..n - 1 {
        left[buf[k].1 as usize] += 1;
        if buf[k].0 == buf[k + 1].0 {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1], total[2] - left[2]];
        let score = gini_sum(&left, k + 1) + gini_sum(&right, n - k - 1);
        if best.is_none_or(|(_, s)| score < s) {
            let (a, b) = (buf[k].0, buf[k + 1].0);
            let mut t = (a + b) / F::lit(2.0);
            if t >= b {
                t = a;
            }
            best = Some((t, score));
        }
    }
    best
}

fn grow<F: Float>(
    x: &Matrix<F>,
    y: &[Class],
    rows: Vec<usize>,
    params: &ForestParams,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Node<F>> {
    let d = x.cols();
    let mut nodes: Vec<Node<F>> = Vec::new();
    // (node slot, rows, depth)
    let mut stack = vec![(0usize, rows, 0usize)];
    nodes.push(Node::Leaf(Class::Bot));
    let mut features: Vec<usize> = (0..d).collect();
    let mut buf = Vec::new();
    while let Some((slot, idx, depth)) = stack.pop() {
        let c = counts(y, &idx);
        let pure = c.iter().filter(|&&v| v > 0).count() <= 1;
        let depth_done = params.max_depth.is_some_and(|md| depth >= md);
        if pure || idx.len() < params.min_samples_split || depth_done {
            nodes[slot] = Node::Leaf(majority(&c));
            continue;
        }
        features.shuffle(rng);
        let mut best: Option<Best<F>> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= m && best.is_some() {
                break;
            }
            if let Some((t, s)) = best_split_on(x, y, &idx, f, &mut buf) {
                if best.as_ref().is_none_or(|b| s < b.score) {
                    best = Some(Best {
                        feature: f,
                        threshold: t,
                        score: s,
                    });
                }
            }
        }
        let Some(b) = best else {
            nodes[slot] = Node::Leaf(majority(&c));
            continue;
        };
        let (li, ri): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| x.get(i, b.feature) <= b.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf(Class::Bot));
        let right = nodes.len();
        nodes.push(Node::Leaf(Class::Bot));
        nodes[slot] = Node::Split {
            feature: b.feature,
            threshold: b.threshold,
            left,
            right,
        };
        stack.push((right, ri, depth + 1));
        stack.push((left, li, depth + 1));
    }
    nodes
}

fn tree_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(t as u64 + 1);
    r
}

pub fn forest_train<F: Float>(
    x: &Matrix<F>,
    y: &[Class],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel<F>> {
    if x.rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows for {} labels",
            x.rows(),
            y.len()
        )));
    }
    if y.is_empty() || x.cols() == 0 {
        return Err(Error::invalid(
            "forest needs at least one row and one feature",
        ));
    }
    if params.n_trees == 0 {
        return Err(Error::invalid("forest needs at least one tree"));
    }
    if !x.is_finite() {
        return Err(Error::Numeric("non-finite forest feature".into()));
    }
    if counts(y, &(0..y.len()).collect::<Vec<_>>())
        .iter()
        .filter(|&&c| c > 0)
        .count()
        < 2
    {
        log::warn!("training labels hold a single class; the forest is constant");
    }
    let d = x.cols();
    let m = params
        .max_features
        .unwrap_or(((d as f64).sqrt().floor() as usize).max(1))
        .clamp(1, d);
    let n = y.len();
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let nodes = grow(x, y, bootstrap.clone(), params, m, &mut rng);
            Tree { nodes, bootstrap }
        })
        .collect();
    Ok(ForestModel {
        trees,
        n_features: d,
    })
}

impl<F: Float> ForestModel<F> {
    /// Majority vote over trees; ties go to the lowest class index.
    pub fn predict_one(&self, x: &[F]) -> Class {
        let mut votes = [0usize; 3];
        for t in &self.trees {
            votes[t.predict_one(x).index()] += 1;
        }
        majority(&votes)
    }

    pub fn predict(&self, x: &Matrix<F>) -> Result<Vec<Class>> {
        if x.cols() != self.n_features {
            return Err(Error::Shape(format!(
                "forest expects {} features, got {}",
                self.n_features,
                x.cols()
            )));
        }
        Ok(x.iter_rows().map(|r| self.predict_one(r)).collect())
    }
}

pub fn forest_predict<F: Float>(model: &ForestModel<F>, x: &Matrix<F>) -> Result<Vec<Class>> {
    model.predict(x)
}
