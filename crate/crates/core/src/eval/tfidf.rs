use std::collections::HashMap;

use crate::num::{Float, Matrix};
use crate::{Error, Result};

pub const DEFAULT_TFIDF_CAP: usize = 1000;

/// Term weighting fitted on a training corpus: `tf = count / length`,
/// `idf = ln((1 + N) / (1 + df)) + 1`, rows L2-normalized. Terms are kept
/// by descending corpus count, ties by first occurrence, up to the cap.
#[derive(Debug, Clone, PartialEq)]
pub struct Tfidf {
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    index: HashMap<String, usize>,
}

impl Tfidf {
    pub fn fit<S: AsRef<str>>(docs: &[Vec<S>], cap: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::invalid("cannot fit TF-IDF on an empty corpus"));
        }
        let mut stats: HashMap<&str, (usize, usize, usize)> = HashMap::new(); // count, df, first
        let mut pos = 0;
        for d in docs {
            let mut seen = std::collections::HashSet::new();
            for t in d {
                let t = t.as_ref();
                let e = stats.entry(t).or_insert((0, 0, pos));
                e.0 += 1;
                if seen.insert(t) {
                    e.1 += 1;
                }
                pos += 1;
            }
        }
        let mut ranked: Vec<(&str, (usize, usize, usize))> = stats.into_iter().collect();
        ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .2.cmp(&b.1 .2)));
        ranked.truncate(cap);
        let n = docs.len() as f64;
        let terms: Vec<String> = ranked.iter().map(|(t, _)| t.to_string()).collect();
        let idf = ranked
            .iter()
            .map(|(_, (_, df, _))| ((1.0 + n) / (1.0 + *df as f64)).ln() + 1.0)
            .collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self { terms, idf, index })
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn transform_one<F: Float, S: AsRef<str>>(&self, doc: &[S]) -> Vec<F> {
        let mut row = vec![0.0f64; self.dim()];
        if doc.is_empty() {
            return vec![F::zero(); self.dim()];
        }
        for t in doc {
            if let Some(&j) = self.index.get(t.as_ref()) {
                row[j] += 1.0;
            }
        }
        let len = doc.len() as f64;
        for (v, idf) in row.iter_mut().zip(&self.idf) {
            *v = *v / len * idf;
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
        row.into_iter().map(F::lit).collect()
    }

    pub fn transform<F: Float, S: AsRef<str>>(&self, docs: &[Vec<S>]) -> Matrix<F> {
        let mut data = Vec::with_capacity(docs.len() * self.dim());
        for d in docs {
            data.extend(self.transform_one::<F, S>(d));
        }
        Matrix::from_vec(docs.len(), self.dim(), data).expect("row width matches")
    }
}
