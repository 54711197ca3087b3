//! Clustering diagnostics pairing depth patches with their tactile readings.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;

use crate::dataset::TouchSample;
use crate::rng;
use crate::tactile::SIGNAL_DIM;
use crate::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    /// Inertia after each assignment step.
    pub inertia: Vec<f64>,
    pub iterations: usize,
    /// Stopped because assignments stopped changing.
    pub converged: bool,
}

impl KMeans {
    pub fn final_inertia(&self) -> f64 {
        self.inertia.last().copied().unwrap_or(0.0)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], means: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in means.iter().enumerate() {
        let d = sq_dist(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd iterations from `k` distinct seeded points. An emptied cluster is
/// moved onto the point farthest from its assigned mean.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::TooManyClusters { k, n: points.len() });
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: p.len() });
    }
    let mut init = index::sample(&mut rng::seeded(seed), points.len(), k).into_vec();
    init.sort_unstable();
    let mut means: Vec<Vec<f64>> = init.iter().map(|&i| points[i].clone()).collect();
    let mut assignments = vec![usize::MAX; points.len()];
    let mut inertia = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        let mut total = 0.0;
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let (c, d) = nearest(p, &means);
            changed |= *a != c;
            *a = c;
            total += d;
        }
        inertia.push(total);
        if !changed {
            converged = true;
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            sums[a].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                means[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &means[assignments[a]])
                            .total_cmp(&sq_dist(&points[b], &means[assignments[b]]))
                            .then(b.cmp(&a))
                    })
                    .expect("non-empty");
                means[c] = points[far].clone();
                assignments[far] = c;
            }
        }
    }
    Ok(KMeans { assignments, means, inertia, iterations, converged })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub size: usize,
    pub mean_patch: Vec<f64>,
    pub mean_signal: [f64; SIGNAL_DIM],
}

/// Cluster flattened depth patches and average the patches and raw signals per cluster.
pub fn cluster_report(samples: &[TouchSample], k: usize, seed: u64) -> Result<(KMeans, Vec<Cluster>)> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let points: Vec<Vec<f64>> = samples.iter().map(|s| s.patch.values.clone()).collect();
    let km = kmeans(&points, k, seed, DEFAULT_MAX_ITER)?;
    let dim = points[0].len();
    let mut clusters: Vec<Cluster> =
        (0..k).map(|_| Cluster { size: 0, mean_patch: vec![0.0; dim], mean_signal: [0.0; SIGNAL_DIM] }).collect();
    for (s, &a) in samples.iter().zip(&km.assignments) {
        let c = &mut clusters[a];
        c.size += 1;
        c.mean_patch.iter_mut().zip(&s.patch.values).for_each(|(m, v)| *m += v);
        c.mean_signal.iter_mut().zip(&s.signal_raw.values).for_each(|(m, v)| *m += v);
    }
    for c in clusters.iter_mut().filter(|c| c.size > 0) {
        let n = c.size as f64;
        c.mean_patch.iter_mut().for_each(|m| *m /= n);
        c.mean_signal.iter_mut().for_each(|m| *m /= n);
    }
    Ok((km, clusters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[[f64; 2]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn single_cluster_is_centroid() {
        let p = pts(&[[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]]);
        let km = kmeans(&p, 1, 0, DEFAULT_MAX_ITER).unwrap();
        assert!((km.means[0][0] - 1.0).abs() < 1e-15 && (km.means[0][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn separated_pairs() {
        let p = pts(&[[0.0, 0.0], [0.0, 0.1], [10.0, 10.0], [10.1, 10.0]]);
        for seed in 0..20 {
            let km = kmeans(&p, 2, seed, DEFAULT_MAX_ITER).unwrap();
            let mut m = km.means.clone();
            m.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert!((m[0][1] - 0.05).abs() < 1e-12 && (m[1][0] - 10.05).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn too_many_clusters() {
        assert_eq!(kmeans(&pts(&[[0.0, 0.0]]), 2, 0, 10), Err(Error::TooManyClusters { k: 2, n: 1 }));
    }

    /// Best inertia over all 2-partitions.
    fn exhaustive_two_means(p: &[Vec<f64>]) -> f64 {
        let n = p.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut total = 0.0;
            for side in [true, false] {
                let members: Vec<&Vec<f64>> = (0..n).filter(|i| (mask >> i & 1 == 1) == side).map(|i| &p[i]).collect();
                let dim = p[0].len();
                let mean: Vec<f64> =
                    (0..dim).map(|d| members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64).collect();
                total += members.iter().map(|m| sq_dist(m, &mean)).sum::<f64>();
            }
            best = best.min(total);
        }
        best
    }

    #[test]
    fn five_points_match_exhaustive_partition() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.2], [0.4, 0.9], [6.0, 5.0], [7.0, 6.5]]);
        let km = kmeans(&p, 2, 3, DEFAULT_MAX_ITER).unwrap();
        assert!((km.final_inertia() - exhaustive_two_means(&p)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn lloyd_is_monotone_and_stops_at_fixpoint(
            raw in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30),
            k in 1usize..4,
            seed in 0u64..1000,
        ) {
            let p: Vec<Vec<f64>> = raw.iter().map(|(x, y)| vec![*x, *y]).collect();
            prop_assume!(k <= p.len());
            let km = kmeans(&p, k, seed, DEFAULT_MAX_ITER).unwrap();
            for w in km.inertia.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
            if km.converged {
                for (q, &a) in p.iter().zip(&km.assignments) {
                    prop_assert!(sq_dist(q, &km.means[a]) <= nearest(q, &km.means).1 + 1e-12);
                }
            }
        }
    }
}
