use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::sigmoid;

/// Boosting settings for the expert classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf values.
    pub l2: f64,
    pub min_leaf: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            rounds: 200,
            max_depth: 4,
            learning_rate: 0.1,
            l2: 1.0,
            min_leaf: 1,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_leaf == 0 {
            return Err(Error::invalid("tree depth and leaf size must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid("learning rate must lie in (0, 1]"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::invalid("leaf L2 penalty must be non-negative"));
        }
        Ok(())
    }
}

/// Tree node. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Regression tree stored in preorder with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Checks that child links point forward and every node is reachable once.
    pub fn from_nodes(nodes: Vec<Node>, feature_count: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("tree has no nodes"));
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if core::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid("tree node is shared"));
            }
            match nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= feature_count || threshold.is_nan() {
                        return Err(Error::invalid("tree split is invalid"));
                    }
                    for c in [left, right] {
                        if c <= i || c >= nodes.len() {
                            return Err(Error::invalid("tree child index out of order"));
                        }
                        stack.push(c);
                    }
                }
                Node::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::invalid("tree leaf value is not finite"));
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("tree has unreachable nodes"));
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
                Node::Leaf { value } => return value,
            }
        }
    }
}

/// Boosted trees on the log-odds scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertModel {
    base_score: f64,
    learning_rate: f64,
    feature_count: usize,
    trees: Vec<Tree>,
}

impl ExpertModel {
    pub fn new(base_score: f64, learning_rate: f64, feature_count: usize, trees: Vec<Tree>) -> Result<Self> {
        if !base_score.is_finite() || !(learning_rate > 0.0 && learning_rate.is_finite()) || feature_count == 0 {
            return Err(Error::invalid("invalid expert model header"));
        }
        Ok(ExpertModel {
            base_score,
            learning_rate,
            feature_count,
            trees,
        })
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Log-odds using the first `rounds` trees.
    pub fn raw_score_staged(&self, x: &[f64], rounds: usize) -> f64 {
        self.base_score
            + self.learning_rate * self.trees.iter().take(rounds).map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn raw_score(&self, x: &[f64]) -> f64 {
        self.raw_score_staged(x, self.trees.len())
    }

    /// Mean log loss on `(features, labels)` after each round, starting with
    /// the base score alone.
    pub fn staged_log_loss(&self, features: &Matrix, labels: &[u8]) -> Result<Vec<f64>> {
        check_inputs(features, labels, self.feature_count)?;
        let n = features.rows();
        let mut scores = vec![self.base_score; n];
        let mut out = Vec::with_capacity(self.trees.len() + 1);
        out.push(log_loss(&scores, labels));
        for t in &self.trees {
            for (i, s) in scores.iter_mut().enumerate() {
                *s += self.learning_rate * t.eval(features.row(i));
            }
            out.push(log_loss(&scores, labels));
        }
        Ok(out)
    }
}

fn log_loss(scores: &[f64], labels: &[u8]) -> f64 {
    // log(1 + e^s) − y·s, evaluated stably
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let softplus = if s > 0.0 {
                s + libm::log1p(libm::exp(-s))
            } else {
                libm::log1p(libm::exp(s))
            };
            softplus - f64::from(y) * s
        })
        .sum();
    total / scores.len() as f64
}

fn check_inputs(features: &Matrix, labels: &[u8], feature_count: usize) -> Result<()> {
    if features.cols() != feature_count {
        return Err(Error::DimensionMismatch {
            expected: feature_count,
            found: features.cols(),
        });
    }
    if labels.len() != features.rows() {
        return Err(Error::DimensionMismatch {
            expected: features.rows(),
            found: labels.len(),
        });
    }
    Ok(())
}

/// Gradient boosting with logistic loss.
///
/// Trees are grown greedily to `max_depth` on the negative gradient `y − p`
/// with exact squared-error splits at midpoints between distinct values.
/// Leaves take the Newton step `−Σg / (Σh + l2)`. The first split with the
/// largest positive gain wins, scanning features in order.
pub fn train_expert(features: &Matrix, labels: &[u8], params: &BoostParams) -> Result<ExpertModel> {
    params.validate()?;
    check_inputs(features, labels, features.cols())?;
    if features.rows() < 10 || features.cols() == 0 {
        return Err(Error::invalid("expert training needs at least 10 rows and one feature"));
    }
    if !features.is_finite() {
        return Err(Error::invalid("expert features must be finite"));
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    let n = features.rows();
    let p = features.cols();
    let pos = labels.iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == n {
        return Err(Error::SingleClass);
    }
    let rate = pos as f64 / n as f64;
    let base_score = libm::log(rate / (1.0 - rate));

    let orders: Vec<Vec<usize>> = (0..p)
        .map(|j| {
            let mut o: Vec<usize> = (0..n).collect();
            o.sort_by(|&a, &b| features.get(a, j).total_cmp(&features.get(b, j)).then(a.cmp(&b)));
            o
        })
        .collect();

    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut grower = Grower {
        features,
        orders: &orders,
        grad: vec![0.0; n],
        hess: vec![0.0; n],
        params,
        member: vec![false; n],
        nodes: Vec::new(),
    };
    for _ in 0..params.rounds {
        for i in 0..n {
            let prob = sigmoid(scores[i]);
            grower.grad[i] = prob - f64::from(labels[i]);
            grower.hess[i] = prob * (1.0 - prob);
        }
        let rows: Vec<usize> = (0..n).collect();
        grower.grow(&rows, 0);
        let tree = Tree {
            nodes: core::mem::take(&mut grower.nodes),
        };
        for (i, s) in scores.iter_mut().enumerate() {
            *s += params.learning_rate * tree.eval(features.row(i));
        }
        trees.push(tree);
    }
    ExpertModel::new(base_score, params.learning_rate, p, trees)
}

struct Grower<'a> {
    features: &'a Matrix,
    orders: &'a [Vec<usize>],
    grad: Vec<f64>,
    hess: Vec<f64>,
    params: &'a BoostParams,
    member: Vec<bool>,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.params.max_depth && rows.len() >= 2 * self.params.min_leaf {
            self.best_split(rows)
        } else {
            None
        };
        match split {
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.features.get(i, feature) <= threshold);
                let left = self.grow(&l, depth + 1);
                let right = self.grow(&r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
            None => {
                let g: f64 = rows.iter().map(|&i| self.grad[i]).sum();
                let h: f64 = rows.iter().map(|&i| self.hess[i]).sum();
                let denom = h + self.params.l2;
                let value = if denom > 0.0 { -g / denom } else { 0.0 };
                self.nodes[id] = Node::Leaf { value };
            }
        }
        id
    }

    /// Split maximising the reduction in squared error of `−g`.
    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        for &i in rows {
            self.member[i] = true;
        }
        let m = rows.len();
        let total: f64 = rows.iter().map(|&i| -self.grad[i]).sum();
        let parent = total * total / m as f64;
        let min_leaf = self.params.min_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        for (j, order) in self.orders.iter().enumerate() {
            let mut left_sum = 0.0;
            let mut left_n = 0usize;
            let mut prev: Option<f64> = None;
            for &i in order.iter().filter(|&&i| self.member[i]) {
                let x = self.features.get(i, j);
                if let Some(px) = prev {
                    if x > px && left_n >= min_leaf && m - left_n >= min_leaf {
                        let right_sum = total - left_sum;
                        let gain = left_sum * left_sum / left_n as f64
                            + right_sum * right_sum / (m - left_n) as f64
                            - parent;
                        if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                            let mut threshold = 0.5 * (px + x);
                            if !(threshold < x) {
                                threshold = px;
                            }
                            best = Some((gain, j, threshold));
                        }
                    }
                }
                left_sum -= self.grad[i];
                left_n += 1;
                prev = Some(x);
            }
        }
        for &i in rows {
            self.member[i] = false;
        }
        best.map(|(_, j, t)| (j, t))
    }
}

/// Predicted probabilities for each row of `features`.
pub fn expert_probabilities(model: &ExpertModel, features: &Matrix) -> Result<Vec<f64>> {
    if features.cols() != model.feature_count {
        return Err(Error::DimensionMismatch {
            expected: model.feature_count,
            found: features.cols(),
        });
    }
    Ok((0..features.rows()).map(|i| sigmoid(model.raw_score(features.row(i)))).collect())
}
