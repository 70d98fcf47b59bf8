mod common;

use amlp::eval::{
    evaluate_clustering, hungarian_acc, kmeans, linear_assignment, make_splits, nmi, high_order_dissimilarity,
};
use amlp::graph::{FeatureMatrix, LabelVector, SparseGraph};
use common::rng;
use ndarray::array;
use rand::Rng;

fn labels(v: &[i64]) -> LabelVector {
    LabelVector::new(v.to_vec()).unwrap()
}

/// All permutations of 0..m.
fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// Best matched count over every injective cluster-to-class mapping.
fn brute_force_acc(pred: &[i64], truth: &[i64]) -> f64 {
    let kp = *pred.iter().max().unwrap() as usize + 1;
    let kt = *truth.iter().max().unwrap() as usize + 1;
    let m = kp.max(kt);
    let best = permutations(m)
        .iter()
        .map(|perm| pred.iter().zip(truth).filter(|(&p, &t)| perm[p as usize] == t as usize).count())
        .max()
        .unwrap();
    best as f64 / pred.len() as f64
}

#[test]
fn hungarian_matches_brute_force() {
    let mut r = rng(4);
    for trial in 0..200 {
        let n = r.random_range(1..=40);
        let kp = r.random_range(1..=5);
        let kt = r.random_range(1..=5);
        let pred: Vec<i64> = (0..n).map(|_| r.random_range(0..kp)).collect();
        let truth: Vec<i64> = (0..n).map(|_| r.random_range(0..kt)).collect();
        let got = hungarian_acc(&labels(&pred), &labels(&truth)).unwrap();
        assert_eq!(got, brute_force_acc(&pred, &truth), "trial {trial}: {pred:?} {truth:?}");
    }
}

#[test]
fn hungarian_small_cases() {
    assert_eq!(hungarian_acc(&labels(&[0, 0, 1, 1]), &labels(&[0, 1, 1, 1])).unwrap(), 0.75);
    assert_eq!(hungarian_acc(&labels(&[2, 2, 0, 1]), &labels(&[0, 0, 1, 2])).unwrap(), 1.0);
    assert!(hungarian_acc(&labels(&[]), &labels(&[])).is_err());
}

#[test]
fn linear_assignment_rectangular() {
    let cost = vec![vec![4, 1, 9], vec![2, 0, 5]];
    let cols = linear_assignment(&cost);
    assert_eq!(cols, vec![1, 0]);
}

#[test]
fn nmi_examples() {
    let a = labels(&[0, 0, 1, 1, 2, 2]);
    let b = labels(&[5, 5, 3, 3, 0, 0]);
    assert!((nmi(&a, &b).unwrap() - 1.0).abs() <= 1e-12);
    assert!(nmi(&labels(&[0, 0, 1, 1]), &labels(&[0, 1, 0, 1])).unwrap().abs() <= 1e-12);
    assert_eq!(nmi(&labels(&[0, 0, 0, 0]), &labels(&[0, 1, 0, 1])).unwrap(), 0.0);
}

#[test]
fn nmi_matches_direct_formula() {
    // pred = [0,0,1,1,1], truth = [0,0,0,1,1]; counts n00=2, n10=1, n11=2.
    let n = 5.0f64;
    let mi = 2.0 / n * (n * 2.0 / (2.0 * 3.0)).ln()
        + 1.0 / n * (n * 1.0 / (3.0 * 3.0)).ln()
        + 2.0 / n * (n * 2.0 / (3.0 * 2.0)).ln();
    let h = -(0.4f64 * 0.4f64.ln() + 0.6 * 0.6f64.ln());
    let want = mi / h;
    let got = nmi(&labels(&[0, 0, 1, 1, 1]), &labels(&[0, 0, 0, 1, 1])).unwrap();
    assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
}

#[test]
fn scores_are_relabel_invariant() {
    let mut r = rng(8);
    for _ in 0..20 {
        let pred: Vec<i64> = (0..30).map(|_| r.random_range(0..4)).collect();
        let truth: Vec<i64> = (0..30).map(|_| r.random_range(0..3)).collect();
        let relabeled: Vec<i64> = pred.iter().map(|&p| (p + 1) % 4).collect();
        let (p, t, q) = (labels(&pred), labels(&truth), labels(&relabeled));
        assert_eq!(hungarian_acc(&p, &t).unwrap(), hungarian_acc(&q, &t).unwrap());
        assert!((nmi(&p, &t).unwrap() - nmi(&q, &t).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn kmeans_recovers_separated_blobs() {
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    let mut r = rng(1);
    for (c, center) in [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]].iter().enumerate() {
        for _ in 0..20 {
            rows.push(vec![center[0] + r.random_range(-1.0..1.0), center[1] + r.random_range(-1.0..1.0)]);
            truth.push(c as i64);
        }
    }
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let rec = evaluate_clustering(&x, &labels(&truth), 3, &[0, 1, 2], 5, 100).unwrap();
    assert_eq!(rec.acc, 1.0);
    assert!((rec.nmi - 1.0).abs() <= 1e-12);
    assert_eq!(rec.per_seed.len(), 3);
}

#[test]
fn kmeans_is_deterministic_and_checks_k() {
    let mut r = rng(2);
    let x = common::random_features(&mut r, 50, 4);
    let a = kmeans(&x, 4, 7, 5, 100).unwrap();
    let b = kmeans(&x, 4, 7, 5, 100).unwrap();
    assert_eq!(a, b);
    assert!(kmeans(&x, 0, 7, 5, 100).is_err());
    assert!(kmeans(&x, 51, 7, 5, 100).is_err());
}

#[test]
fn splits_have_requested_sizes() {
    let truth: Vec<i64> = (0..100).map(|i| i % 4).collect();
    let set = make_splits(&labels(&truth), [0.48, 0.32, 0.20], 10, 3).unwrap();
    assert_eq!(set.splits.len(), 10);
    for s in &set.splits {
        assert!((s.train.len() as i64 - 48).abs() <= 1);
        assert!((s.val.len() as i64 - 32).abs() <= 1);
        assert!((s.test.len() as i64 - 20).abs() <= 1);
        assert_eq!(s.train.len() + s.val.len() + s.test.len(), 100);
    }
    set.validate(&labels(&truth)).unwrap();
    assert_eq!(set, make_splits(&labels(&truth), [0.48, 0.32, 0.20], 10, 3).unwrap());
    assert!(make_splits(&labels(&truth), [0.5, 0.5, 0.5], 1, 0).is_err());
}

#[test]
fn tiny_class_keeps_a_train_node() {
    let truth = [0, 0, 0, 0, 0, 0, 0, 0, 0, 1];
    let set = make_splits(&labels(&truth), [0.1, 0.1, 0.8], 5, 0).unwrap();
    for s in &set.splits {
        assert!(s.train.contains(&9));
    }
}

#[test]
fn dissimilarity_cycle_example() {
    let g = SparseGraph::from_edges(&[(0, 1), (0, 3), (1, 2), (2, 3)], 4).unwrap();
    let x = FeatureMatrix::new(array![[1.0, 1.0, -1.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
    let (m, n) = high_order_dissimilarity(&x, &g, 0, 2).unwrap();
    assert_eq!(n, 0.0);
    assert!(m > 0.0);
    assert!(high_order_dissimilarity(&x, &g, 0, 4).is_err());
}
