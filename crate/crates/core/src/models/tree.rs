//! CART classification trees with Gini impurity.
//!
//! Continuous features split on `x <= threshold`; categorical features split
//! one category against the rest (`x == c`). Sample weights are supported so
//! the same builder serves bootstrap ensembles and boosting.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTest {
    LessEq(f64),
    Equals(u32),
}

impl SplitTest {
    #[inline]
    fn goes_left(&self, value: f64) -> bool {
        match *self {
            SplitTest::LessEq(t) => value <= t,
            SplitTest::Equals(c) => value == c as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Weighted fraction of class 1 among the training samples reaching the leaf.
    Leaf { p: f64 },
    Split {
        feature: usize,
        test: SplitTest,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p } => return *p,
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                } => {
                    at = if test.goes_left(row[*feature]) {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Feature indices used by any split.
    pub fn used_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// A single leaf; used for hand-built fixtures.
    pub fn constant(p: f64) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { p }],
        }
    }

    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        DecisionTree { nodes }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Number of features examined per split; `None` examines all.
    pub max_features: Option<usize>,
}

struct Candidate {
    feature: usize,
    test: SplitTest,
    score: f64,
}

pub(crate) struct TreeGrower<'a> {
    data: &'a Dataset,
    features: &'a [usize],
    weights: &'a [f64],
    params: GrowParams,
    buffer: Vec<(f64, f64, u8)>,
}

impl<'a> TreeGrower<'a> {
    /// `weights[i] == 0` excludes row `i`.
    pub fn new(data: &'a Dataset, features: &'a [usize], weights: &'a [f64], params: GrowParams) -> Self {
        TreeGrower {
            data,
            features,
            weights,
            params,
            buffer: Vec::new(),
        }
    }

    pub fn grow(mut self, rng: &mut Rng) -> DecisionTree {
        let samples: Vec<usize> = (0..self.data.n_rows()).filter(|&i| self.weights[i] > 0.0).collect();
        let mut nodes = vec![Node::Leaf { p: 0.5 }];
        let mut stack = vec![(0usize, samples, 0usize)];
        let mut order: Vec<usize> = self.features.to_vec();
        while let Some((id, samples, depth)) = stack.pop() {
            let (w0, w1) = self.class_weights(&samples);
            let total = w0 + w1;
            let p = if total > 0.0 { w1 / total } else { 0.5 };
            nodes[id] = Node::Leaf { p };
            let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
            if w0 == 0.0 || w1 == 0.0 || samples.len() < self.params.min_samples_split || depth_capped {
                continue;
            }
            let Some(best) = self.best_split(&samples, &mut order, rng) else {
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&i| best.test.goes_left(self.data.row(i)[best.feature]));
            let left_id = nodes.len();
            nodes.push(Node::Leaf { p });
            nodes.push(Node::Leaf { p });
            nodes[id] = Node::Split {
                feature: best.feature,
                test: best.test,
                left: left_id as u32,
                right: (left_id + 1) as u32,
            };
            stack.push((left_id + 1, right, depth + 1));
            stack.push((left_id, left, depth + 1));
        }
        DecisionTree { nodes }
    }

    fn class_weights(&self, samples: &[usize]) -> (f64, f64) {
        samples.iter().fold((0.0, 0.0), |(a, b), &i| {
            let w = self.weights[i];
            if self.data.label(i) == 1 {
                (a, b + w)
            } else {
                (a + w, b)
            }
        })
    }

    /// Examines features in random order when subsampling, continuing past
    /// constant features until `max_features` informative ones were seen.
    fn best_split(&mut self, samples: &[usize], order: &mut [usize], rng: &mut Rng) -> Option<Candidate> {
        let quota = match self.params.max_features {
            Some(m) if m < order.len() => {
                order.shuffle(rng);
                m
            }
            _ => order.len(),
        };
        let mut best: Option<Candidate> = None;
        let mut informative = 0;
        for &feature in order.iter() {
            if informative >= quota {
                break;
            }
            let found = if self.data.schema()[feature].is_categorical() {
                self.best_categorical(samples, feature)
            } else {
                self.best_threshold(samples, feature)
            };
            if let Some(candidate) = found {
                informative += 1;
                if best.as_ref().is_none_or(|b| candidate.score > b.score) {
                    best = Some(candidate);
                }
            }
        }
        best
    }

    // Split score is sum over children of (w0^2 + w1^2) / W, which is the
    // weighted Gini impurity decrease up to a constant.
    fn best_threshold(&mut self, samples: &[usize], feature: usize) -> Option<Candidate> {
        self.buffer.clear();
        for &i in samples {
            self.buffer.push((self.data.row(i)[feature], self.weights[i], self.data.label(i)));
        }
        self.buffer.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let first = self.buffer.first()?.0;
        let last = self.buffer.last()?.0;
        if first == last {
            return None;
        }
        let (mut t0, mut t1) = (0.0, 0.0);
        for &(_, w, y) in &self.buffer {
            if y == 1 {
                t1 += w;
            } else {
                t0 += w;
            }
        }
        let (mut l0, mut l1) = (0.0, 0.0);
        let mut best: Option<(f64, f64)> = None;
        for k in 0..self.buffer.len() - 1 {
            let (x, w, y) = self.buffer[k];
            if y == 1 {
                l1 += w;
            } else {
                l0 += w;
            }
            let next = self.buffer[k + 1].0;
            if next == x {
                continue;
            }
            let score = purity(l0, l1) + purity(t0 - l0, t1 - l1);
            if best.is_none_or(|(s, _)| score > s) {
                let mid = x + (next - x) / 2.0;
                let threshold = if mid < next { mid } else { x };
                best = Some((score, threshold));
            }
        }
        best.map(|(score, threshold)| Candidate {
            feature,
            test: SplitTest::LessEq(threshold),
            score,
        })
    }

    fn best_categorical(&mut self, samples: &[usize], feature: usize) -> Option<Candidate> {
        let n_cat = self.data.schema()[feature].categories.len();
        let mut counts = vec![(0.0f64, 0.0f64); n_cat];
        let mut present = vec![false; n_cat];
        for &i in samples {
            let c = self.data.row(i)[feature] as usize;
            present[c] = true;
            if self.data.label(i) == 1 {
                counts[c].1 += self.weights[i];
            } else {
                counts[c].0 += self.weights[i];
            }
        }
        if present.iter().filter(|&&p| p).count() < 2 {
            return None;
        }
        let (t0, t1) = counts.iter().fold((0.0, 0.0), |(a, b), c| (a + c.0, b + c.1));
        let mut best: Option<Candidate> = None;
        for (c, &(c0, c1)) in counts.iter().enumerate() {
            if !present[c] {
                continue;
            }
            let score = purity(c0, c1) + purity(t0 - c0, t1 - c1);
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(Candidate {
                    feature,
                    test: SplitTest::Equals(c as u32),
                    score,
                });
            }
        }
        best
    }
}

#[inline]
fn purity(w0: f64, w1: f64) -> f64 {
    let w = w0 + w1;
    if w > 0.0 {
        (w0 * w0 + w1 * w1) / w
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;
    use crate::rng;

    fn grow_all(d: &Dataset, params: GrowParams) -> DecisionTree {
        let features: Vec<usize> = (0..d.n_features()).collect();
        let weights = vec![1.0; d.n_rows()];
        TreeGrower::new(d, &features, &weights, params).grow(&mut rng::seeded(0))
    }

    const UNBOUNDED: GrowParams = GrowParams {
        max_depth: None,
        min_samples_split: 2,
        max_features: None,
    };

    #[test]
    fn xor_needs_depth_two() {
        let d = Dataset::from_rows(
            vec![FeatureSchema::continuous("a"), FeatureSchema::continuous("b")],
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![0, 1, 1, 0],
        )
        .unwrap();
        let tree = grow_all(&d, UNBOUNDED);
        for i in 0..4 {
            assert_eq!(tree.predict(d.row(i)), d.label(i) as f64);
        }
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn categorical_one_vs_rest() {
        let d = Dataset::from_rows(
            vec![FeatureSchema::categorical("c", ["r", "g", "b"])],
            vec![vec![0.0], vec![1.0], vec![2.0], vec![1.0]],
            vec![0, 1, 0, 1],
        )
        .unwrap();
        let tree = grow_all(&d, UNBOUNDED);
        assert_eq!(tree.nodes().len(), 3);
        assert!(matches!(
            tree.nodes()[0],
            Node::Split {
                test: SplitTest::Equals(1),
                ..
            }
        ));
    }

    #[test]
    fn stump_has_depth_one_and_weighted_leaves() {
        let d = Dataset::from_rows(
            vec![FeatureSchema::continuous("x")],
            (0..6).map(|i| vec![i as f64]).collect(),
            vec![0, 0, 1, 0, 1, 1],
        )
        .unwrap();
        let tree = grow_all(
            &d,
            GrowParams {
                max_depth: Some(1),
                ..UNBOUNDED
            },
        );
        assert_eq!(tree.depth(), 1);
        let p = tree.predict(&[0.0]);
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let d = Dataset::from_rows(
            vec![FeatureSchema::continuous("x")],
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0, 1, 1],
        )
        .unwrap();
        let weights = [1.0, 0.0, 1.0];
        let tree = TreeGrower::new(&d, &[0], &weights, UNBOUNDED).grow(&mut rng::seeded(0));
        match tree.nodes()[0] {
            Node::Split {
                test: SplitTest::LessEq(t),
                ..
            } => assert_eq!(t, 1.0),
            ref other => panic!("{other:?}"),
        }
    }
}
