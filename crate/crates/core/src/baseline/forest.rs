//! A from-scratch random forest over sparse TF-IDF vectors: bootstrap
//! resampling per tree, random feature subsets per node, Gini-impurity
//! splits at midpoint thresholds, and probability prediction by averaging
//! leaf positive-class fractions.

use alloc::string::String;
use alloc::vec::Vec;

use rand::RngExt;
use rand_pcg::Pcg64;

use super::{feature_value, BaselineError, SparseVec};
use crate::math;
use crate::rng;

const BOOTSTRAP_TAG: u64 = 0;
const SPLIT_TAG: u64 = 1;

/// How many candidate features each node considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSubset {
    /// Ceiling of the square root of the feature count.
    Sqrt,
    /// Every feature, scanned in index order.
    All,
    /// A fixed count, capped at the feature count.
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RfConfig {
    pub n_trees: usize,
    /// `None` grows trees until nodes are pure or unsplittable.
    pub max_depth: Option<usize>,
    /// Minimum training samples on each side of a split.
    pub min_leaf: usize,
    pub features_per_split: FeatureSubset,
    /// When false every tree trains on the full sample, for exact
    /// comparisons against a single-tree oracle.
    pub bootstrap: bool,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: FeatureSubset::Sqrt,
            bootstrap: true,
        }
    }
}

/// One tree node; children are indices into the tree's node array and
/// always point past their parent.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: u32,
        /// Values `<= threshold` descend left.
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        neg: u32,
        pos: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Validates and adopts a stored node array: children must point
    /// forward and stay in bounds, thresholds must be finite, and leaves
    /// must hold at least one sample.
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<DecisionTree, BaselineError> {
        if nodes.is_empty() {
            return Err(BaselineError::InvalidArgument(String::from(
                "a decision tree needs at least one node",
            )));
        }
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                TreeNode::Internal {
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if !threshold.is_finite() {
                        return Err(BaselineError::InvalidArgument(String::from(
                            "tree threshold is not finite",
                        )));
                    }
                    for child in [left, right] {
                        if child as usize <= i || child as usize >= nodes.len() {
                            return Err(BaselineError::InvalidArgument(String::from(
                                "tree child index does not point forward in bounds",
                            )));
                        }
                    }
                }
                TreeNode::Leaf { neg, pos } => {
                    if neg + pos == 0 {
                        return Err(BaselineError::InvalidArgument(String::from(
                            "tree leaf holds no samples",
                        )));
                    }
                }
            }
        }
        Ok(DecisionTree { nodes })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Fraction of positive training samples in the leaf this vector
    /// lands in.
    pub fn predict(&self, vector: &SparseVec) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { neg, pos } => {
                    return pos as f64 / (neg + pos) as f64;
                }
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if feature_value(vector, feature) <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_features: usize,
    config: RfConfig,
    seed: u64,
}

impl RandomForest {
    /// Rebuilds a forest from stored trees, checking split features
    /// against the feature count.
    pub fn from_parts(
        trees: Vec<DecisionTree>,
        n_features: usize,
        config: RfConfig,
        seed: u64,
    ) -> Result<RandomForest, BaselineError> {
        if trees.is_empty() {
            return Err(BaselineError::InvalidArgument(String::from(
                "a forest needs at least one tree",
            )));
        }
        for tree in &trees {
            for node in tree.nodes() {
                if let TreeNode::Internal { feature, .. } = node {
                    if *feature as usize >= n_features {
                        return Err(BaselineError::Dimension(String::from(
                            "tree splits on a feature outside the model",
                        )));
                    }
                }
            }
        }
        Ok(RandomForest {
            trees,
            n_features,
            config,
            seed,
        })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn config(&self) -> &RfConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// The seeded bootstrap draw (size n, with replacement) used for one tree,
/// exposed so training subsets can be reproduced exactly.
pub fn bootstrap_indices(seed: u64, tree_index: u64, n: usize) -> Vec<usize> {
    let mut rng = rng::substream2(seed, BOOTSTRAP_TAG, tree_index);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn gini(pos: usize, neg: usize) -> f64 {
    let n = (pos + neg) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = pos as f64 / n;
    let q = neg as f64 / n;
    1.0 - p * p - q * q
}

struct TreeBuilder<'a> {
    vectors: &'a [SparseVec],
    labels: &'a [bool],
    n_features: usize,
    k_candidates: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
    nodes: Vec<TreeNode>,
}

struct Split {
    feature: u32,
    threshold: f64,
    decrease: f64,
}

impl TreeBuilder<'_> {
    fn leaf_of(&self, idx: &[usize]) -> TreeNode {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        TreeNode::Leaf {
            neg: (idx.len() - pos) as u32,
            pos: pos as u32,
        }
    }

    /// Best Gini-decrease split of this node among `candidates`, scanning
    /// thresholds at midpoints between consecutive distinct values.
    /// Strictly-better comparisons keep the earliest candidate and lowest
    /// threshold on ties.
    fn best_split(&self, idx: &[usize], candidates: &[usize]) -> Option<Split> {
        let total_pos = idx.iter().filter(|&&i| self.labels[i]).count();
        let total_neg = idx.len() - total_pos;
        let parent = gini(total_pos, total_neg);
        let n = idx.len() as f64;

        let mut best: Option<Split> = None;
        let mut values: Vec<(f64, bool)> = Vec::with_capacity(idx.len());
        for &feature in candidates {
            values.clear();
            values.extend(
                idx.iter()
                    .map(|&i| (feature_value(&self.vectors[i], feature as u32), self.labels[i])),
            );
            values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_pos = 0usize;
            let mut left_neg = 0usize;
            for i in 1..values.len() {
                let (prev_value, prev_label) = values[i - 1];
                if prev_label {
                    left_pos += 1;
                } else {
                    left_neg += 1;
                }
                if values[i].0 == prev_value {
                    continue;
                }
                let left_total = left_pos + left_neg;
                let right_total = idx.len() - left_total;
                if left_total < self.min_leaf || right_total < self.min_leaf {
                    continue;
                }
                let right_pos = total_pos - left_pos;
                let right_neg = total_neg - left_neg;
                let weighted = (left_total as f64 / n) * gini(left_pos, left_neg)
                    + (right_total as f64 / n) * gini(right_pos, right_neg);
                let decrease = parent - weighted;
                if decrease > best.as_ref().map_or(0.0, |b| b.decrease) {
                    best = Some(Split {
                        feature: feature as u32,
                        threshold: (prev_value + values[i].0) / 2.0,
                        decrease,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, idx: &[usize], depth: usize, rng: &mut Pcg64) -> u32 {
        let node_index = self.nodes.len() as u32;
        self.nodes.push(self.leaf_of(idx));

        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        let pure = pos == 0 || pos == idx.len();
        let depth_allows = self.max_depth.map_or(true, |d| depth < d);
        if pure || !depth_allows || idx.len() < 2 * self.min_leaf {
            return node_index;
        }

        let candidates: Vec<usize> = if self.k_candidates >= self.n_features {
            (0..self.n_features).collect()
        } else {
            rand::seq::index::sample(rng, self.n_features, self.k_candidates).into_vec()
        };
        let split = match self.best_split(idx, &candidates) {
            Some(s) => s,
            None => return node_index,
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| {
            feature_value(&self.vectors[i], split.feature) <= split.threshold
        });
        let left = self.build(&left_idx, depth + 1, rng);
        let right = self.build(&right_idx, depth + 1, rng);
        self.nodes[node_index as usize] = TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        node_index
    }
}

fn validate_training_data(
    vectors: &[SparseVec],
    labels: &[bool],
    n_features: usize,
) -> Result<(), BaselineError> {
    if vectors.len() != labels.len() {
        return Err(BaselineError::InvalidArgument(String::from(
            "vectors and labels differ in length",
        )));
    }
    if vectors.len() < 2 {
        return Err(BaselineError::InvalidArgument(String::from(
            "forest training needs at least two samples",
        )));
    }
    if n_features == 0 {
        return Err(BaselineError::InvalidArgument(String::from(
            "forest training needs at least one feature",
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(BaselineError::InvalidArgument(String::from(
            "forest training needs both classes present",
        )));
    }
    for vector in vectors {
        for pair in vector.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(BaselineError::InvalidArgument(String::from(
                    "sparse vector columns must be strictly increasing",
                )));
            }
        }
        if let Some(&(last, _)) = vector.last() {
            if last as usize >= n_features {
                return Err(BaselineError::Dimension(String::from(
                    "sparse vector column outside the feature space",
                )));
            }
        }
        if vector.iter().any(|&(_, w)| !w.is_finite()) {
            return Err(BaselineError::InvalidArgument(String::from(
                "sparse vector weight is not finite",
            )));
        }
    }
    Ok(())
}

/// Trains a seeded forest. Tree `t` bootstraps its sample (unless
/// disabled) and samples split candidates from streams derived from
/// `(seed, t)`, so results are identical however trees are scheduled.
pub fn rf_train(
    vectors: &[SparseVec],
    labels: &[bool],
    n_features: usize,
    config: &RfConfig,
    seed: u64,
) -> Result<RandomForest, BaselineError> {
    validate_training_data(vectors, labels, n_features)?;
    if config.n_trees == 0 {
        return Err(BaselineError::InvalidArgument(String::from(
            "forest needs at least one tree",
        )));
    }
    if config.min_leaf == 0 {
        return Err(BaselineError::InvalidArgument(String::from(
            "minimum leaf size must be positive",
        )));
    }
    let k_candidates = match config.features_per_split {
        FeatureSubset::Sqrt => (math::ceil(math::sqrt(n_features as f64)) as usize)
            .clamp(1, n_features),
        FeatureSubset::All => n_features,
        FeatureSubset::Fixed(0) => {
            return Err(BaselineError::InvalidArgument(String::from(
                "fixed feature subset must be positive",
            )))
        }
        FeatureSubset::Fixed(k) => k.min(n_features),
    };

    let mut trees = Vec::with_capacity(config.n_trees);
    for t in 0..config.n_trees {
        let idx: Vec<usize> = if config.bootstrap {
            bootstrap_indices(seed, t as u64, vectors.len())
        } else {
            (0..vectors.len()).collect()
        };
        let mut builder = TreeBuilder {
            vectors,
            labels,
            n_features,
            k_candidates,
            min_leaf: config.min_leaf,
            max_depth: config.max_depth,
            nodes: Vec::new(),
        };
        let mut split_rng = rng::substream2(seed, SPLIT_TAG, t as u64);
        builder.build(&idx, 0, &mut split_rng);
        trees.push(DecisionTree {
            nodes: builder.nodes,
        });
    }
    Ok(RandomForest {
        trees,
        n_features,
        config: config.clone(),
        seed,
    })
}

/// Scores vectors: probability is the mean over trees of the landing
/// leaf's positive fraction; the label is positive when it exceeds 0.5.
pub fn rf_predict(vectors: &[SparseVec], forest: &RandomForest) -> Vec<(f64, bool)> {
    vectors
        .iter()
        .map(|v| {
            let sum: f64 = forest.trees.iter().map(|t| t.predict(v)).sum();
            let prob = sum / forest.trees.len() as f64;
            (prob, prob > 0.5)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dense1(x: f64) -> SparseVec {
        vec![(0, x)]
    }

    fn dense2(x: f64, y: f64) -> SparseVec {
        vec![(0, x), (1, y)]
    }

    fn single_tree_config() -> RfConfig {
        RfConfig {
            n_trees: 1,
            features_per_split: FeatureSubset::All,
            bootstrap: false,
            ..RfConfig::default()
        }
    }

    /// Independently written exhaustive tree for cross-checking: scans
    /// every (feature, threshold) pair and counts each side from scratch.
    enum OracleNode {
        Leaf(u32, u32),
        Internal(u32, f64, alloc::boxed::Box<OracleNode>, alloc::boxed::Box<OracleNode>),
    }

    fn oracle_build(vectors: &[SparseVec], labels: &[bool], idx: &[usize], n_features: usize) -> OracleNode {
        let pos = idx.iter().filter(|&&i| labels[i]).count();
        let neg = idx.len() - pos;
        let parent = gini(pos, neg);
        if pos == 0 || neg == 0 {
            return OracleNode::Leaf(neg as u32, pos as u32);
        }

        let mut best: Option<(u32, f64, f64)> = None;
        for feature in 0..n_features as u32 {
            let mut distinct: Vec<f64> = idx
                .iter()
                .map(|&i| feature_value(&vectors[i], feature))
                .collect();
            distinct.sort_unstable_by(f64::total_cmp);
            distinct.dedup();
            for pair in distinct.windows(2) {
                let threshold = (pair[0] + pair[1]) / 2.0;
                let mut lp = 0;
                let mut ln_ = 0;
                for &i in idx {
                    if feature_value(&vectors[i], feature) <= threshold {
                        if labels[i] {
                            lp += 1;
                        } else {
                            ln_ += 1;
                        }
                    }
                }
                let (rp, rn) = (pos - lp, neg - ln_);
                if lp + ln_ == 0 || rp + rn == 0 {
                    continue;
                }
                let n = idx.len() as f64;
                let weighted = ((lp + ln_) as f64 / n) * gini(lp, ln_)
                    + ((rp + rn) as f64 / n) * gini(rp, rn);
                let decrease = parent - weighted;
                if decrease > best.map_or(0.0, |b| b.2) {
                    best = Some((feature, threshold, decrease));
                }
            }
        }
        match best {
            None => OracleNode::Leaf(neg as u32, pos as u32),
            Some((feature, threshold, _)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx
                    .iter()
                    .partition(|&&i| feature_value(&vectors[i], feature) <= threshold);
                OracleNode::Internal(
                    feature,
                    threshold,
                    alloc::boxed::Box::new(oracle_build(vectors, labels, &l, n_features)),
                    alloc::boxed::Box::new(oracle_build(vectors, labels, &r, n_features)),
                )
            }
        }
    }

    fn oracle_predict(node: &OracleNode, v: &SparseVec) -> f64 {
        match node {
            OracleNode::Leaf(neg, pos) => *pos as f64 / (*neg + *pos) as f64,
            OracleNode::Internal(feature, threshold, l, r) => {
                if feature_value(v, *feature) <= *threshold {
                    oracle_predict(l, v)
                } else {
                    oracle_predict(r, v)
                }
            }
        }
    }

    fn noisy_2d(n: usize, seed: u64, flip_every: usize) -> (Vec<SparseVec>, Vec<bool>) {
        let mut rng = rng::stream(seed);
        let mut vectors = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            // Coarse grid so duplicate values and ties actually occur.
            let x = rng.random_range(-5i32..=5) as f64 / 5.0;
            let y = rng.random_range(-5i32..=5) as f64 / 5.0;
            let mut label = x + y > 0.0;
            if flip_every > 0 && i % flip_every == 0 {
                label = !label;
            }
            vectors.push(dense2(x, y));
            labels.push(label);
        }
        if labels.iter().all(|&l| l) {
            labels[0] = false;
        }
        if labels.iter().all(|&l| !l) {
            labels[0] = true;
        }
        (vectors, labels)
    }

    #[test]
    fn single_tree_separates_1d_data_perfectly() {
        let vectors: Vec<SparseVec> = [-2.0, -1.5, -0.5, 0.5, 1.0, 2.5]
            .iter()
            .map(|&x| dense1(x))
            .collect();
        let labels = vec![false, false, false, true, true, true];
        let forest = rf_train(&vectors, &labels, 1, &single_tree_config(), 0).unwrap();
        let predictions = rf_predict(&vectors, &forest);
        for ((prob, label), expected) in predictions.iter().zip(&labels) {
            assert_eq!(label, expected);
            assert_eq!(*prob, if *expected { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn bootstrap_can_collapse_a_tree_to_one_leaf() {
        let vectors = vec![dense1(0.0), dense1(1.0)];
        let labels = vec![false, true];
        let config = RfConfig {
            n_trees: 1,
            ..RfConfig::default()
        };
        let found = (0..64).any(|seed| {
            let forest = rf_train(&vectors, &labels, 1, &config, seed).unwrap();
            let nodes = forest.trees()[0].nodes();
            nodes.len() == 1 && matches!(nodes[0], TreeNode::Leaf { .. })
        });
        assert!(found, "no seed in 0..64 drew a single-class bootstrap");
    }

    #[test]
    fn conflicting_duplicates_make_a_fractional_leaf() {
        let vectors = vec![dense1(1.0), dense1(1.0), dense1(1.0)];
        let labels = vec![true, true, false];
        let forest = rf_train(&vectors, &labels, 1, &single_tree_config(), 0).unwrap();
        assert_eq!(forest.trees()[0].nodes().len(), 1);
        let predictions = rf_predict(&vectors, &forest);
        assert_eq!(predictions[0].0, 2.0 / 3.0);
        assert!(predictions[0].1);
    }

    #[test]
    fn tree_matches_exhaustive_oracle() {
        let (vectors, labels) = noisy_2d(60, 42, 7);
        let forest = rf_train(&vectors, &labels, 2, &single_tree_config(), 9).unwrap();
        let oracle = oracle_build(&vectors, &labels, &(0..vectors.len()).collect::<Vec<_>>(), 2);

        let mut probes = vectors.clone();
        for i in 0..20 {
            probes.push(dense2(-1.1 + 0.1 * i as f64, 1.05 - 0.1 * i as f64));
        }
        for v in &probes {
            let ours = forest.trees()[0].predict(v);
            let reference = oracle_predict(&oracle, v);
            assert_eq!(ours, reference);
        }
    }

    #[test]
    fn forest_probability_is_mean_of_leaf_fractions() {
        let vectors: Vec<SparseVec> = (0..20)
            .map(|i| dense1(if i < 10 { -1.0 - i as f64 } else { i as f64 }))
            .collect();
        let labels: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let config = RfConfig {
            n_trees: 15,
            ..RfConfig::default()
        };
        let forest = rf_train(&vectors, &labels, 1, &config, 3).unwrap();
        // Far outside the training range every tree lands in a pure
        // positive leaf.
        let predictions = rf_predict(&[dense1(100.0)], &forest);
        assert_eq!(predictions[0], (1.0, true));
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (vectors, labels) = noisy_2d(50, 5, 9);
        let config = RfConfig {
            n_trees: 10,
            ..RfConfig::default()
        };
        let a = rf_train(&vectors, &labels, 2, &config, 77).unwrap();
        let b = rf_train(&vectors, &labels, 2, &config, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(rf_predict(&vectors, &a), rf_predict(&vectors, &b));
    }

    #[test]
    fn probabilities_stay_in_unit_interval() {
        let (vectors, labels) = noisy_2d(80, 11, 5);
        let config = RfConfig {
            n_trees: 12,
            ..RfConfig::default()
        };
        let forest = rf_train(&vectors, &labels, 2, &config, 1).unwrap();
        for (prob, _) in rf_predict(&vectors, &forest) {
            assert!((0.0..=1.0).contains(&prob));
        }
    }

    /// Routes `idx` down the tree, checking the chosen split never raises
    /// weighted Gini impurity, and returns leaf occupancy counts.
    fn check_gini_and_occupancy(
        tree: &DecisionTree,
        vectors: &[SparseVec],
        labels: &[bool],
        node: usize,
        idx: &[usize],
        leaf_sizes: &mut Vec<usize>,
    ) {
        let pos = idx.iter().filter(|&&i| labels[i]).count();
        let neg = idx.len() - pos;
        match tree.nodes()[node] {
            TreeNode::Leaf { .. } => leaf_sizes.push(idx.len()),
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx
                    .iter()
                    .partition(|&&i| feature_value(&vectors[i], feature) <= threshold);
                let lp = l.iter().filter(|&&i| labels[i]).count();
                let rp = r.iter().filter(|&&i| labels[i]).count();
                let n = idx.len() as f64;
                let weighted = (l.len() as f64 / n) * gini(lp, l.len() - lp)
                    + (r.len() as f64 / n) * gini(rp, r.len() - rp);
                assert!(weighted <= gini(pos, neg) + 1e-12);
                check_gini_and_occupancy(tree, vectors, labels, left as usize, &l, leaf_sizes);
                check_gini_and_occupancy(tree, vectors, labels, right as usize, &r, leaf_sizes);
            }
        }
    }

    #[test]
    fn chosen_splits_never_raise_weighted_impurity() {
        let (vectors, labels) = noisy_2d(70, 23, 6);
        let forest = rf_train(&vectors, &labels, 2, &single_tree_config(), 4).unwrap();
        let mut leaf_sizes = Vec::new();
        check_gini_and_occupancy(
            &forest.trees()[0],
            &vectors,
            &labels,
            0,
            &(0..vectors.len()).collect::<Vec<_>>(),
            &mut leaf_sizes,
        );
        assert!(!leaf_sizes.is_empty());
    }

    #[test]
    fn min_leaf_bounds_every_leaf() {
        let (vectors, labels) = noisy_2d(60, 31, 4);
        let config = RfConfig {
            min_leaf: 5,
            ..single_tree_config()
        };
        let forest = rf_train(&vectors, &labels, 2, &config, 2).unwrap();
        let mut leaf_sizes = Vec::new();
        check_gini_and_occupancy(
            &forest.trees()[0],
            &vectors,
            &labels,
            0,
            &(0..vectors.len()).collect::<Vec<_>>(),
            &mut leaf_sizes,
        );
        assert!(leaf_sizes.iter().all(|&s| s >= 5));
    }

    #[test]
    fn max_depth_limits_the_tree() {
        let (vectors, labels) = noisy_2d(60, 13, 4);
        let config = RfConfig {
            max_depth: Some(1),
            ..single_tree_config()
        };
        let forest = rf_train(&vectors, &labels, 2, &config, 2).unwrap();
        let nodes = forest.trees()[0].nodes();
        assert!(nodes.len() <= 3);
        if let TreeNode::Internal { left, right, .. } = nodes[0] {
            assert!(matches!(nodes[left as usize], TreeNode::Leaf { .. }));
            assert!(matches!(nodes[right as usize], TreeNode::Leaf { .. }));
        }
    }

    #[test]
    fn each_tree_beats_majority_on_its_bootstrap_sample() {
        let (vectors, labels) = noisy_2d(50, 19, 3);
        let config = RfConfig {
            n_trees: 10,
            ..RfConfig::default()
        };
        let seed = 15;
        let forest = rf_train(&vectors, &labels, 2, &config, seed).unwrap();
        for (t, tree) in forest.trees().iter().enumerate() {
            let idx = bootstrap_indices(seed, t as u64, vectors.len());
            let pos = idx.iter().filter(|&&i| labels[i]).count();
            let majority = pos.max(idx.len() - pos) as f64 / idx.len() as f64;
            let correct = idx
                .iter()
                .filter(|&&i| (tree.predict(&vectors[i]) > 0.5) == labels[i])
                .count();
            let accuracy = correct as f64 / idx.len() as f64;
            assert!(
                accuracy + 1e-12 >= majority,
                "tree {t}: accuracy {accuracy} below majority baseline {majority}"
            );
        }
    }

    #[test]
    fn averaging_many_trees_is_no_worse_than_one() {
        let mut acc_single = 0.0;
        let mut acc_forest = 0.0;
        for seed in 0..20 {
            let (train_v, train_l) = noisy_2d(150, 100 + seed, 10);
            let (test_v, test_l) = noisy_2d(100, 200 + seed, 0);
            let accuracy = |n_trees: usize| {
                let config = RfConfig {
                    n_trees,
                    ..RfConfig::default()
                };
                let forest = rf_train(&train_v, &train_l, 2, &config, seed).unwrap();
                let hits = rf_predict(&test_v, &forest)
                    .iter()
                    .zip(&test_l)
                    .filter(|((_, p), l)| p == *l)
                    .count();
                hits as f64 / test_l.len() as f64
            };
            acc_single += accuracy(1);
            acc_forest += accuracy(50);
        }
        assert!(
            acc_forest + 1e-9 >= acc_single,
            "mean accuracy of 50-tree forests ({acc_forest}) fell below single trees ({acc_single})"
        );
    }

    #[test]
    fn training_rejects_degenerate_inputs() {
        let vectors = vec![dense1(0.0), dense1(1.0)];
        assert!(rf_train(&vectors, &[true, true], 1, &RfConfig::default(), 0).is_err());
        assert!(rf_train(&vectors, &[true], 1, &RfConfig::default(), 0).is_err());
        assert!(rf_train(&vectors[..1], &[true], 1, &RfConfig::default(), 0).is_err());
        assert!(rf_train(&vectors, &[true, false], 0, &RfConfig::default(), 0).is_err());

        let unsorted: Vec<SparseVec> = vec![vec![(1, 0.5), (0, 0.5)], dense2(0.0, 0.0)];
        assert!(rf_train(&unsorted, &[true, false], 2, &RfConfig::default(), 0).is_err());

        let out_of_range = vec![vec![(5, 0.5)], dense1(0.0)];
        assert!(rf_train(&out_of_range, &[true, false], 2, &RfConfig::default(), 0).is_err());

        let no_trees = RfConfig {
            n_trees: 0,
            ..RfConfig::default()
        };
        assert!(rf_train(&vectors, &[true, false], 1, &no_trees, 0).is_err());

        let zero_subset = RfConfig {
            features_per_split: FeatureSubset::Fixed(0),
            ..RfConfig::default()
        };
        assert!(rf_train(&vectors, &[true, false], 1, &zero_subset, 0).is_err());
    }

    #[test]
    fn stored_trees_are_validated() {
        assert!(DecisionTree::from_nodes(vec![]).is_err());
        assert!(DecisionTree::from_nodes(vec![TreeNode::Leaf { neg: 0, pos: 0 }]).is_err());
        // Child pointing at itself or backwards is rejected.
        let cyclic = vec![
            TreeNode::Internal {
                feature: 0,
                threshold: 0.5,
                left: 0,
                right: 1,
            },
            TreeNode::Leaf { neg: 1, pos: 0 },
        ];
        assert!(DecisionTree::from_nodes(cyclic).is_err());

        let valid = DecisionTree::from_nodes(vec![
            TreeNode::Internal {
                feature: 1,
                threshold: 0.5,
                left: 1,
                right: 2,
            },
            TreeNode::Leaf { neg: 2, pos: 0 },
            TreeNode::Leaf { neg: 0, pos: 3 },
        ])
        .unwrap();
        assert!(RandomForest::from_parts(vec![valid.clone()], 2, RfConfig::default(), 0).is_ok());
        assert!(RandomForest::from_parts(vec![valid], 1, RfConfig::default(), 0).is_err());
    }
}
