use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::record::Class;
use crate::{Error, Result};

fn by_class(labels: &[Class], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); Class::COUNT];
    for (i, c) in labels.iter().enumerate() {
        groups[c.index()].push(i);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    groups
}

/// Stratified train/test partition. Class `c` with `n_c` members puts
/// `floor(train_frac * n_c)` or one more in training: the extra slots go to
/// the largest fractional remainders (ties to the lower class) so the total
/// is `round(train_frac * n)`. Every class keeps at least one member on each
/// side. Index lists are returned sorted.
pub fn split(labels: &[Class], train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.len() < 4 {
        return Err(Error::invalid("splitting needs at least 4 examples"));
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid("train fraction must be in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = by_class(labels, &mut rng);
    if let Some(ci) = groups.iter().position(|g| g.len() == 1) {
        return Err(Error::invalid(format!(
            "class {} has a single example; stratified split needs 2",
            Class::ALL[ci]
        )));
    }
    let exact: Vec<f64> = groups.iter().map(|g| train_frac * g.len() as f64).collect();
    let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let target = (train_frac * labels.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..groups.len())
        .filter(|&c| !groups[c].is_empty())
        .collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    let mut extra = target.saturating_sub(take.iter().sum());
    for &c in &order {
        if extra == 0 {
            break;
        }
        if exact[c] > exact[c].floor() {
            take[c] += 1;
            extra -= 1;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (g, &n_train) in groups.iter().zip(&take) {
        if g.is_empty() {
            continue;
        }
        let n_train = n_train.clamp(1, g.len() - 1);
        train.extend_from_slice(&g[..n_train]);
        test.extend_from_slice(&g[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified k folds: class members are shuffled, the class lists are
/// concatenated and position `i` goes to fold `i mod k`. Returns
/// `(train, validation)` index lists per fold, sorted.
pub fn kfold(labels: &[Class], k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::invalid("k-fold needs k >= 2"));
    }
    if labels.len() < k {
        return Err(Error::invalid(format!(
            "{} examples cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    for (pos, i) in by_class(labels, &mut rng).into_iter().flatten().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok((0..k)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| fold_of[i] == f);
            (train, val)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(counts: [usize; 3]) -> Vec<Class> {
        Class::ALL
            .iter()
            .zip(counts)
            .flat_map(|(c, n)| std::iter::repeat_n(*c, n))
            .collect()
    }

    #[test]
    fn split_75_25() {
        let l = labels([34, 33, 33]);
        let (tr, te) = split(&l, 0.75, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (75, 25));
        assert_eq!(split(&l, 0.75, 1).unwrap(), (tr, te));
    }

    #[test]
    fn split_errors() {
        assert!(split(&labels([1, 5, 5]), 0.75, 0).is_err());
        assert!(split(&labels([2, 1, 0]), 0.75, 0).is_err());
        assert!(split(&labels([3, 3, 3]), 1.0, 0).is_err());
    }

    #[test]
    fn folds_of_two() {
        let f = kfold(&labels([7, 7, 6]), 10, 0).unwrap();
        assert!(f.iter().all(|(_, v)| v.len() == 2));
        let f = kfold(&labels([8, 8, 7]), 10, 0).unwrap();
        assert!(f.iter().all(|(_, v)| v.len() == 2 || v.len() == 3));
        assert!(kfold(&labels([3, 3, 3]), 10, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions(a in 2usize..40, b in 2usize..40, c in 0usize..40, seed in any::<u64>()) {
            prop_assume!(c != 1);
            let l = labels([a, b, c]);
            let (tr, te) = split(&l, 0.75, seed).unwrap();
            let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
            let mut clamped = false;
            for (cls, n) in Class::ALL.iter().zip([a, b, c]) {
                if n == 0 { continue; }
                let k = tr.iter().filter(|&&i| l[i] == *cls).count();
                let share = 0.75 * n as f64;
                prop_assert!(k == share.floor() as usize || k == share.ceil() as usize || k == 1 || k == n - 1);
                prop_assert!(k >= 1 && k < n);
                clamped |= share.floor() < 1.0 || share.ceil() as usize >= n;
            }
            if !clamped {
                prop_assert_eq!(tr.len(), (0.75 * l.len() as f64).round() as usize);
            }
        }

        #[test]
        fn kfold_partitions(a in 0usize..30, b in 0usize..30, c in 0usize..30, k in 2usize..11, seed in any::<u64>()) {
            let l = labels([a, b, c]);
            prop_assume!(l.len() >= k);
            let folds = kfold(&l, k, seed).unwrap();
            prop_assert_eq!(folds.len(), k);
            let mut seen = vec![0; l.len()];
            let sizes: Vec<usize> = folds.iter().map(|(_, v)| v.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for (tr, va) in &folds {
                prop_assert_eq!(tr.len() + va.len(), l.len());
                for &i in va { seen[i] += 1; }
                prop_assert!(tr.iter().all(|i| !va.contains(i)));
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
        }
    }
}
