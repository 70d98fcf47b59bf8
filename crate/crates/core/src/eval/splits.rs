use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AmlpError, Result};
use crate::graph::LabelVector;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSet {
    pub ratios: [f64; 3],
    pub splits: Vec<Split>,
}

impl SplitSet {
    /// Disjointness and label checks against `labels`.
    pub fn validate(&self, labels: &LabelVector) -> Result<()> {
        let mut seen = vec![false; labels.len()];
        for (s, split) in self.splits.iter().enumerate() {
            seen.iter_mut().for_each(|x| *x = false);
            for &i in split.train.iter().chain(&split.val).chain(&split.test) {
                if i >= labels.len() || labels.get(i).is_none() {
                    return Err(AmlpError::invalid(format!("split {s}: node {i} is not labeled")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(AmlpError::invalid(format!("split {s}: node {i} used twice")));
                }
            }
        }
        Ok(())
    }
}

/// Per-class counts for (train, val, test). Rounding errors are carried from
/// class to class so every per-class count is the floor or ceiling of its
/// quota and every global total stays within one node of its target.
fn apportion(class_sizes: &[usize], ratios: [f64; 3]) -> Vec<[usize; 3]> {
    let mut carry = [0.0f64; 3];
    let mut out = Vec::with_capacity(class_sizes.len());
    for &n_c in class_sizes {
        let quota = ratios.map(|r| r * n_c as f64);
        let mut counts = quota.map(|q| q.floor() as usize);
        let short = n_c - counts.iter().sum::<usize>().min(n_c);
        let mut order = [0usize, 1, 2];
        let pressure: Vec<f64> = (0..3).map(|t| carry[t] + quota[t] - counts[t] as f64).collect();
        order.sort_by(|&a, &b| pressure[b].total_cmp(&pressure[a]).then(a.cmp(&b)));
        for &t in order.iter().take(short) {
            counts[t] += 1;
        }
        if counts[0] == 0 && n_c > 0 {
            let donor = if counts[2] > 0 { 2 } else { 1 };
            counts[donor] -= 1;
            counts[0] += 1;
        }
        for t in 0..3 {
            carry[t] += quota[t] - counts[t] as f64;
        }
        out.push(counts);
    }
    out
}

/// `n_splits` stratified random partitions of the labeled nodes. Split `s`
/// shuffles with stream `s` of a generator seeded by `seed`.
pub fn make_splits(
    labels: &LabelVector,
    ratios: [f64; 3],
    n_splits: usize,
    seed: u64,
) -> Result<SplitSet> {
    if ratios.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
        return Err(AmlpError::invalid(format!("split ratios {ratios:?} out of [0, 1]")));
    }
    if (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(AmlpError::invalid(format!("split ratios {ratios:?} do not sum to 1")));
    }
    let n_classes = labels.n_classes();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for i in labels.labeled_indices() {
        members[labels.get(i).unwrap()].push(i);
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let counts = apportion(&sizes, ratios);

    let mut splits = Vec::with_capacity(n_splits);
    for s in 0..n_splits {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let mut split = Split {
            train: Vec::new(),
            val: Vec::new(),
            test: Vec::new(),
        };
        for (class, nodes) in members.iter().enumerate() {
            let mut nodes = nodes.clone();
            nodes.shuffle(&mut rng);
            let [tr, va, _] = counts[class];
            split.train.extend_from_slice(&nodes[..tr]);
            split.val.extend_from_slice(&nodes[tr..tr + va]);
            split.test.extend_from_slice(&nodes[tr + va..]);
        }
        split.train.sort_unstable();
        split.val.sort_unstable();
        split.test.sort_unstable();
        splits.push(split);
    }
    Ok(SplitSet { ratios, splits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn global_sizes() {
        let labels = LabelVector::new((0..100).map(|i| i % 3).collect()).unwrap();
        let set = make_splits(&labels, [0.48, 0.32, 0.20], 10, 1).unwrap();
        set.validate(&labels).unwrap();
        for s in &set.splits {
            assert!((s.train.len() as i64 - 48).abs() <= 1);
            assert!((s.val.len() as i64 - 32).abs() <= 1);
            assert!((s.test.len() as i64 - 20).abs() <= 1);
            assert_eq!(s.train.len() + s.val.len() + s.test.len(), 100);
        }
    }

    #[test]
    fn deterministic_and_distinct() {
        let labels = LabelVector::new((0..60).map(|i| i % 4).collect()).unwrap();
        let a = make_splits(&labels, [0.1, 0.1, 0.8], 3, 5).unwrap();
        let b = make_splits(&labels, [0.1, 0.1, 0.8], 3, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.splits[0], a.splits[1]);
    }

    #[test]
    fn skips_unlabeled_nodes() {
        let labels = LabelVector::new(vec![0, -1, 1, 0, 1, -1, 0, 1]).unwrap();
        let set = make_splits(&labels, [0.5, 0.25, 0.25], 2, 0).unwrap();
        for s in &set.splits {
            assert!(!s.train.contains(&1) && !s.val.contains(&5) && !s.test.contains(&5));
        }
    }

    #[test]
    fn tiny_class_keeps_a_train_node() {
        let labels = LabelVector::new(vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1]).unwrap();
        let set = make_splits(&labels, [0.1, 0.1, 0.8], 1, 0).unwrap();
        assert!(set.splits[0].train.contains(&9));
    }

    #[test]
    fn ratio_validation() {
        let labels = LabelVector::new(vec![0, 1]).unwrap();
        assert!(make_splits(&labels, [0.5, 0.5, 0.5], 1, 0).is_err());
    }

    #[test]
    fn per_class_and_global_within_one_node() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let n = rng.random_range(20..400);
            let c = rng.random_range(2..9);
            let labels: Vec<i64> = (0..n).map(|_| rng.random_range(-1..c as i64)).collect();
            let labels = LabelVector::new(labels).unwrap();
            let ratios = if rng.random_bool(0.5) { [0.48, 0.32, 0.20] } else { [0.1, 0.1, 0.8] };
            let set = make_splits(&labels, ratios, 1, rng.random()).unwrap();
            set.validate(&labels).unwrap();
            let s = &set.splits[0];
            let n_lab = labels.labeled_indices().len() as f64;
            let parts = [&s.train, &s.val, &s.test];
            let tiny = (0..c).any(|k| {
                let size = labels.as_slice().iter().filter(|&&l| l == k as i64).count() as f64;
                size > 0.0 && (ratios[0] * size).floor() == 0.0
            });
            for t in 0..3 {
                if !tiny {
                    assert!((parts[t].len() as f64 - ratios[t] * n_lab).abs() < 1.0 + 1e-9);
                }
                for k in 0..c as i64 {
                    let size = labels.as_slice().iter().filter(|&&l| l == k).count() as f64;
                    let got = parts[t].iter().filter(|&&i| labels.as_slice()[i] == k).count() as f64;
                    let slack = if size > 0.0 && (ratios[0] * size).floor() == 0.0 { 2.0 } else { 1.0 };
                    assert!((got - ratios[t] * size).abs() < slack + 1e-9);
                }
            }
        }
    }
}
