use serde::{Deserialize, Serialize};

use crate::record::Class;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    pub support: [usize; 3],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// `confusion[true][predicted]`
    pub confusion: [[usize; 3]; 3],
}

/// Confusion-matrix metrics. F1 is `2 tp / (2 tp + fp + fn)`, which equals
/// the harmonic mean of precision and recall and is 0 when both are.
/// Macro scores average the three classes with equal weight.
pub fn metrics(predictions: &[Class], labels: &[Class]) -> Result<MetricsReport> {
    if predictions.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("no predictions to score"));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (p, t) in predictions.iter().zip(labels) {
        confusion[t.index()][p.index()] += 1;
    }
    let mut precision = [0.0; 3];
    let mut recall = [0.0; 3];
    let mut f1 = [0.0; 3];
    let mut support = [0; 3];
    for c in 0..3 {
        let tp = confusion[c][c];
        let row: usize = confusion[c].iter().sum();
        let col: usize = (0..3).map(|r| confusion[r][c]).sum();
        support[c] = row;
        if row == 0 {
            log::warn!("class {} has no support; its scores are 0", Class::ALL[c]);
        }
        if col > 0 {
            precision[c] = tp as f64 / col as f64;
        }
        if row > 0 {
            recall[c] = tp as f64 / row as f64;
        }
        let denom = 2 * tp + (col - tp) + (row - tp);
        if denom > 0 {
            f1[c] = (2 * tp) as f64 / denom as f64;
        }
    }
    let trace: usize = (0..3).map(|c| confusion[c][c]).sum();
    let mean = |v: &[f64; 3]| v.iter().sum::<f64>() / 3.0;
    Ok(MetricsReport {
        accuracy: trace as f64 / labels.len() as f64,
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        precision,
        recall,
        f1,
        support,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Class::{Bot as B, Fan as F, Genuine as G};

    #[test]
    fn perfect() {
        let l = [B, F, G, G];
        let m = metrics(&l, &l).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
        assert_eq!(m.f1, [1.0; 3]);
    }

    #[test]
    fn constant_prediction_on_balanced() {
        let l = [B, F, G, B, F, G];
        let m = metrics(&[F; 6], &l).unwrap();
        assert!((m.accuracy - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.precision[0], 0.0);
        assert_eq!(m.recall[1], 1.0);
    }

    #[test]
    fn twenty_sample_fixture() {
        // true:  7 bot, 7 fan, 6 genuine
        // rows:  bot [5 1 1], fan [2 4 1], genuine [0 1 5]
        let truth = [B, B, B, B, B, B, B, F, F, F, F, F, F, F, G, G, G, G, G, G];
        let pred = [B, B, B, B, B, F, G, B, B, F, F, F, F, G, F, G, G, G, G, G];
        let m = metrics(&pred, &truth).unwrap();
        assert_eq!(m.confusion, [[5, 1, 1], [2, 4, 1], [0, 1, 5]]);
        assert_eq!(m.support, [7, 7, 6]);
        assert_eq!(m.accuracy, 0.7);
        assert_eq!(m.precision, [5.0 / 7.0, 4.0 / 6.0, 5.0 / 7.0]);
        assert_eq!(m.recall, [5.0 / 7.0, 4.0 / 7.0, 5.0 / 6.0]);
        assert_eq!(m.f1, [5.0 / 7.0, 8.0 / 13.0, 10.0 / 13.0]);
        assert!((m.macro_precision - 44.0 / 63.0).abs() < 1e-15);
        assert!((m.macro_recall - 89.0 / 126.0).abs() < 1e-15);
        assert!((m.macro_f1 - 191.0 / 273.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(metrics(&[B], &[B, F]).is_err());
        assert!(metrics(&[], &[]).is_err());
    }

    fn class() -> impl Strategy<Value = Class> {
        (0usize..3).prop_map(|i| Class::from_index(i).unwrap())
    }

    proptest! {
        #[test]
        fn invariants(pairs in prop::collection::vec((class(), class()), 1..80)) {
            let (p, t): (Vec<Class>, Vec<Class>) = pairs.into_iter().unzip();
            let m = metrics(&p, &t).unwrap();
            let trace: usize = (0..3).map(|c| m.confusion[c][c]).sum();
            prop_assert_eq!(m.accuracy, trace as f64 / t.len() as f64);
            // micro recall equals accuracy
            let micro: usize = (0..3).map(|c| m.confusion[c][c]).sum::<usize>();
            prop_assert_eq!(micro as f64 / m.support.iter().sum::<usize>() as f64, m.accuracy);
            for c in 0..3 {
                prop_assert_eq!(m.confusion[c].iter().sum::<usize>(), m.support[c]);
                for v in [m.precision[c], m.recall[c], m.f1[c]] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                let (pr, rc) = (m.precision[c], m.recall[c]);
                let hm = if pr + rc == 0.0 { 0.0 } else { 2.0 * pr * rc / (pr + rc) };
                prop_assert!((m.f1[c] - hm).abs() < 1e-12);
            }
        }
    }
}
