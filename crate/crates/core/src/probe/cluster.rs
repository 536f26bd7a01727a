use std::collections::BTreeMap;

use kodama::{linkage, Method};
use nalgebra::DMatrix;

use super::dataset::FeatureDataset;
use crate::error::{Error, Result};

/// Ward agglomerative clustering of the rows of `x` into `k` clusters.
///
/// Cluster ids are numbered by the lowest sample index they contain.
pub fn ward_clusters(x: &DMatrix<f64>, k: usize) -> Result<Vec<usize>> {
    let n = x.nrows();
    if n < 2 || k == 0 || k > n {
        return Err(Error::DegenerateData(format!(
            "cannot form {k} clusters from {n} samples"
        )));
    }
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            condensed.push((x.row(i) - x.row(j)).norm());
        }
    }
    let dendrogram = linkage(&mut condensed, n, Method::Ward);

    // Replay the first n - k merges; step s creates cluster label n + s.
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (s, step) in dendrogram.steps().iter().take(n - k).enumerate() {
        let merged = n + s;
        let a = find(&mut parent, step.cluster1);
        let b = find(&mut parent, step.cluster2);
        parent[a] = merged;
        parent[b] = merged;
    }
    let mut ids = BTreeMap::new();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let root = find(&mut parent, i);
        let next = ids.len();
        out.push(*ids.entry(root).or_insert(next));
    }
    Ok(out)
}

/// Fraction of samples whose cluster's majority label equals their own.
/// Majority ties go to the smallest label.
pub fn majority_purity(assignments: &[usize], labels: &[u32]) -> f64 {
    assert_eq!(assignments.len(), labels.len());
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<usize, BTreeMap<u32, usize>> = BTreeMap::new();
    for (&c, &l) in assignments.iter().zip(labels) {
        *counts.entry(c).or_default().entry(l).or_default() += 1;
    }
    let correct: usize = counts
        .values()
        .map(|per_label| {
            per_label
                .iter()
                .fold(
                    (0, u32::MAX),
                    |(best, lab), (&l, &n)| if n > best { (n, l) } else { (best, lab) },
                )
                .0
        })
        .sum();
    correct as f64 / labels.len() as f64
}

/// Ward clustering into `k` clusters scored by majority-label purity.
pub fn cluster_and_score(ds: &FeatureDataset, k: usize) -> Result<f64> {
    let classes = ds.classes().len();
    if k != classes {
        return Err(Error::InvalidArgument(format!(
            "k = {k} but the dataset has {classes} labels"
        )));
    }
    let assignments = ward_clusters(&ds.features, k)?;
    Ok(majority_purity(&assignments, &ds.labels))
}
