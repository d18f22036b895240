use serde::{Deserialize, Serialize};

use crate::error::{Result, SdrError};

/// Partition of the observations into clusters, each carrying one distinct
/// mean value.
///
/// Cluster ids are dense: `0..num_clusters()`. Ties among the observation
/// means are represented structurally (shared cluster id), never by comparing
/// floating-point values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterState {
    assignments: Vec<usize>,
    values: Vec<f64>,
    sizes: Vec<usize>,
}

impl ClusterState {
    /// Every observation in one cluster with mean `value`. `n = 0` gives the
    /// empty partition.
    pub fn single(n: usize, value: f64) -> Self {
        if n == 0 {
            return ClusterState { assignments: Vec::new(), values: Vec::new(), sizes: Vec::new() };
        }
        ClusterState {
            assignments: vec![0; n],
            values: vec![value],
            sizes: vec![n],
        }
    }

    /// Build from explicit assignments and per-cluster values.
    pub fn from_parts(assignments: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let mut sizes = vec![0usize; values.len()];
        for &c in &assignments {
            match sizes.get_mut(c) {
                Some(s) => *s += 1,
                None => {
                    return Err(SdrError::InvalidArgument(format!(
                        "cluster id {c} has no value (only {} clusters)",
                        values.len()
                    )))
                }
            }
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(SdrError::InvalidArgument(format!("cluster {empty} has no members")));
        }
        Ok(ClusterState { assignments, values, sizes })
    }

    /// Collapse a vector of means into a partition. Two means share a cluster
    /// iff they are bitwise identical.
    pub fn from_means(means: &[f64]) -> Self {
        let mut index = std::collections::HashMap::new();
        let mut values = Vec::new();
        let mut sizes = Vec::new();
        let assignments = means
            .iter()
            .map(|&mu| {
                let id = *index.entry(mu.to_bits()).or_insert_with(|| {
                    values.push(mu);
                    sizes.push(0);
                    values.len() - 1
                });
                sizes[id] += 1;
                id
            })
            .collect();
        ClusterState { assignments, values, sizes }
    }

    /// Expand to one mean per observation.
    pub fn means(&self) -> Vec<f64> {
        self.assignments.iter().map(|&c| self.values[c]).collect()
    }

    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.values.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn mean_of(&self, i: usize) -> f64 {
        self.values[self.assignments[i]]
    }

    pub fn set_value(&mut self, cluster: usize, value: f64) {
        self.values[cluster] = value;
    }

    /// `sum_i (x_i - mu_i)^2`.
    pub fn residual_ss(&self, data: &[f64]) -> f64 {
        data.iter()
            .zip(&self.assignments)
            .map(|(x, &c)| (x - self.values[c]).powi(2))
            .sum()
    }

    /// Per-cluster sums of the data assigned to each cluster.
    pub fn cluster_sums(&self, data: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.values.len()];
        for (x, &c) in data.iter().zip(&self.assignments) {
            sums[c] += x;
        }
        sums
    }

    /// Detach observation `i` from its cluster, deleting the cluster if it
    /// becomes empty. The observation keeps a stale id until it is reattached
    /// with [`ClusterState::attach`] or [`ClusterState::open`].
    pub(crate) fn detach(&mut self, i: usize) {
        let c = self.assignments[i];
        self.sizes[c] -= 1;
        if self.sizes[c] == 0 {
            let last = self.values.len() - 1;
            self.values.swap_remove(c);
            self.sizes.swap_remove(c);
            if c != last {
                for a in self.assignments.iter_mut() {
                    if *a == last {
                        *a = c;
                    }
                }
            }
            self.assignments[i] = usize::MAX;
        }
    }

    pub(crate) fn attach(&mut self, i: usize, cluster: usize) {
        self.assignments[i] = cluster;
        self.sizes[cluster] += 1;
    }

    pub(crate) fn open(&mut self, i: usize, value: f64) {
        self.values.push(value);
        self.sizes.push(1);
        self.assignments[i] = self.values.len() - 1;
    }

    /// Check the bookkeeping invariants: dense ids, no empty clusters, sizes
    /// consistent with assignments, and `1 <= d <= n` whenever `n > 0`.
    pub fn check(&self) -> Result<()> {
        let d = self.values.len();
        if self.sizes.len() != d {
            return Err(SdrError::Domain("sizes and values disagree in length".into()));
        }
        let mut counts = vec![0usize; d];
        for (i, &c) in self.assignments.iter().enumerate() {
            if c >= d {
                return Err(SdrError::Domain(format!("observation {i} points at missing cluster {c}")));
            }
            counts[c] += 1;
        }
        if counts != self.sizes {
            return Err(SdrError::Domain("cluster sizes out of sync".into()));
        }
        if counts.contains(&0) {
            return Err(SdrError::Domain("empty cluster".into()));
        }
        let n = self.n();
        if d > n || (n > 0 && d == 0) {
            return Err(SdrError::Domain(format!("{d} clusters for {n} observations")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn detach_removes_empty_and_relabels() {
        let mut c = ClusterState::from_parts(vec![0, 1, 2, 1], vec![1.0, 2.0, 3.0]).unwrap();
        c.detach(0);
        // cluster 2 moved into slot 0
        assert_eq!(c.num_clusters(), 2);
        assert_eq!(c.values(), &[3.0, 2.0]);
        assert_eq!(c.assignments()[2], 0);
        c.open(0, 9.0);
        c.check().unwrap();
        assert_eq!(c.means(), vec![9.0, 2.0, 3.0, 2.0]);
    }

    #[test]
    fn from_parts_rejects_bad_input() {
        assert!(ClusterState::from_parts(vec![0, 2], vec![1.0, 2.0]).is_err());
        assert!(ClusterState::from_parts(vec![0, 0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn ties_are_structural() {
        let c = ClusterState::from_means(&[0.1 + 0.2, 0.3, 0.3]);
        // 0.1 + 0.2 != 0.3 in binary, so two clusters
        assert_eq!(c.num_clusters(), 2);
        assert_eq!(c.sizes(), &[1, 2]);
    }

    proptest! {
        #[test]
        fn means_round_trip(
            pool in prop::collection::vec(-10.0f64..10.0, 1..6),
            picks in prop::collection::vec(0usize..6, 1..40),
        ) {
            let means: Vec<f64> = picks.iter().map(|&p| pool[p % pool.len()]).collect();
            let c = ClusterState::from_means(&means);
            c.check().unwrap();
            prop_assert_eq!(c.means(), means.clone());
            let distinct: std::collections::HashSet<u64> = means.iter().map(|m| m.to_bits()).collect();
            prop_assert_eq!(c.num_clusters(), distinct.len());
        }
    }
}
