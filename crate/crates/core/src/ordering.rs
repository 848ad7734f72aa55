//! Variable ordering from hierarchical clustering of correlations.
//!
//! Assets are clustered with Ward linkage on the distance
//! `arccos(corr)/π`, and the dendrogram's leaves are laid out so that every
//! cluster is contiguous while neighbouring clusters face each other with
//! their closest ends.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `arccos(corr)/π`, mapping correlation 1 → 0, 0 → 0.5 and −1 → 1.
/// Overshoot up to `1e-9` beyond ±1 is clamped; anything larger is an error.
pub fn correlation_distance(corr: f64) -> Result<f64> {
    if !(corr.abs() <= 1.0 + 1e-9) {
        return Err(Error::invalid(format!("correlation {corr} outside [-1, 1]")));
    }
    Ok(corr.clamp(-1.0, 1.0).acos() / std::f64::consts::PI)
}

/// Elementwise [`correlation_distance`] with an exact zero diagonal.
pub fn distance_matrix(corr: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = corr.nrows();
    if corr.ncols() != n {
        return Err(Error::invalid("correlation matrix must be square"));
    }
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[(i, j)] = correlation_distance(corr[(i, j)])?;
            }
        }
    }
    Ok(d)
}

/// One agglomeration step. Nodes `0..n` are leaves and merge `k` creates
/// node `n + k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkageTree {
    n_leaves: usize,
    merges: Vec<Merge>,
}

impl LinkageTree {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Leaves under `node`, left subtree first.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            if v < self.n_leaves {
                out.push(v);
            } else {
                let m = &self.merges[v - self.n_leaves];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    fn root(&self) -> usize {
        if self.merges.is_empty() {
            0
        } else {
            self.n_leaves + self.merges.len() - 1
        }
    }
}

fn check_distances(dist: &DMatrix<f64>) -> Result<usize> {
    let n = dist.nrows();
    if n == 0 || dist.ncols() != n {
        return Err(Error::invalid("distance matrix must be square and nonempty"));
    }
    for i in 0..n {
        if dist[(i, i)] != 0.0 {
            return Err(Error::invalid("distance matrix needs a zero diagonal"));
        }
        for j in 0..i {
            let (a, b) = (dist[(i, j)], dist[(j, i)]);
            if !(a >= 0.0) || !a.is_finite() || (a - b).abs() > 1e-12 {
                return Err(Error::invalid(format!("bad distance at ({i}, {j})")));
            }
        }
    }
    Ok(n)
}

/// Ward agglomerative clustering using the Lance–Williams update
///
/// `d(k, i∪j)² = ((n_k+n_i) d(k,i)² + (n_k+n_j) d(k,j)² − n_k d(i,j)²) / (n_i+n_j+n_k)`.
///
/// The closest pair is merged first; ties go to the lowest pair of cluster
/// slots, where a merged cluster takes the lower slot of its two parts.
pub fn ward_linkage(dist: &DMatrix<f64>) -> Result<LinkageTree> {
    let n = check_distances(dist)?;
    let mut d = dist.clone();
    let mut active = vec![true; n];
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                if best.is_none_or(|(_, _, b)| d[(i, j)] < b) {
                    best = Some((i, j, d[(i, j)]));
                }
            }
        }
        let (i, j, h) = best.expect("two active clusters remain");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in (0..n).filter(|&k| active[k] && k != i && k != j) {
            let nk = size[k] as f64;
            let v = ((nk + ni) * d[(k, i)].powi(2) + (nk + nj) * d[(k, j)].powi(2) - nk * h * h) / (ni + nj + nk);
            let v = v.max(0.0).sqrt();
            d[(k, i)] = v;
            d[(i, k)] = v;
        }
        merges.push(Merge {
            left: node[i],
            right: node[j],
            height: h,
            size: size[i] + size[j],
        });
        active[j] = false;
        size[i] += size[j];
        node[i] = n + step;
    }
    Ok(LinkageTree { n_leaves: n, merges })
}

/// Plain left-to-right traversal of the dendrogram.
pub fn unoriented_order(tree: &LinkageTree) -> Vec<usize> {
    tree.leaves(tree.root())
}

/// Sum of distances between neighbours in `order`.
pub fn adjacent_distance_sum(order: &[usize], dist: &DMatrix<f64>) -> f64 {
    order.windows(2).map(|w| dist[(w[0], w[1])]).sum()
}

/// Leaf order with every cluster contiguous. Bottom-up, each merge picks
/// whichever of the four child orientations puts the closest pair of ends
/// next to each other (first found wins ties). If the result is longer than
/// the plain traversal, the plain traversal is returned instead.
pub fn leaf_order(tree: &LinkageTree, dist: &DMatrix<f64>) -> Vec<usize> {
    let n = tree.n_leaves;
    let mut orders: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for m in &tree.merges {
        let a = std::mem::take(&mut orders[m.left]);
        let b = std::mem::take(&mut orders[m.right]);
        let ends = |v: &[usize]| (v[0], v[v.len() - 1]);
        let ((a0, a1), (b0, b1)) = (ends(&a), ends(&b));
        // (reverse a, reverse b) for each orientation, with the facing ends.
        let options = [(false, false, a1, b0), (true, false, a0, b0), (false, true, a1, b1), (true, true, a0, b1)];
        let mut pick = options[0];
        for o in &options[1..] {
            if dist[(o.2, o.3)] < dist[(pick.2, pick.3)] {
                pick = *o;
            }
        }
        let mut merged = a;
        if pick.0 {
            merged.reverse();
        }
        let mut tail = b;
        if pick.1 {
            tail.reverse();
        }
        merged.extend(tail);
        orders.push(merged);
    }
    let greedy = orders.pop().unwrap_or_default();
    let plain = unoriented_order(tree);
    if adjacent_distance_sum(&greedy, dist) <= adjacent_distance_sum(&plain, dist) {
        greedy
    } else {
        plain
    }
}

/// Ordering for an asset correlation matrix: position `k` of the MPS holds
/// asset `order[k]`.
pub fn correlation_ordering(corr: &DMatrix<f64>) -> Result<Vec<usize>> {
    let d = distance_matrix(corr)?;
    let tree = ward_linkage(&d)?;
    Ok(leaf_order(&tree, &d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_endpoints() {
        assert_eq!(correlation_distance(1.0).unwrap(), 0.0);
        assert_eq!(correlation_distance(0.0).unwrap(), 0.5);
        assert_eq!(correlation_distance(-1.0).unwrap(), 1.0);
        assert_eq!(correlation_distance(1.0 + 1e-12).unwrap(), 0.0);
        assert!(correlation_distance(1.01).is_err());
        assert!(correlation_distance(f64::NAN).is_err());
    }

    #[test]
    fn two_points() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]);
        let t = ward_linkage(&d).unwrap();
        assert_eq!(t.merges(), &[Merge { left: 0, right: 1, height: 0.3, size: 2 }]);
        let order = leaf_order(&t, &d);
        assert_eq!(order.len(), 2);
    }

    #[test]
    fn tight_pair_first() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 0.9, 0.1, 0.9, 0.0, 0.8, 0.1, 0.8, 0.0]);
        let t = ward_linkage(&d).unwrap();
        assert_eq!((t.merges()[0].left, t.merges()[0].right), (0, 2));
        assert!(t.merges()[1].height >= t.merges()[0].height);
    }

    #[test]
    fn single_leaf() {
        let d = DMatrix::zeros(1, 1);
        let t = ward_linkage(&d).unwrap();
        assert_eq!(leaf_order(&t, &d), vec![0]);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(ward_linkage(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0])).is_err());
        assert!(ward_linkage(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0])).is_err());
        assert!(ward_linkage(&DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0])).is_err());
    }
}
