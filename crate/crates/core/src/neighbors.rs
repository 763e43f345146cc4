//! Exact nearest-neighbour distances over a quadtree.
//!
//! Each query walks the tree nearest box first and discards a box once the
//! distance to its tight bounding box exceeds the best distance found. All
//! distances are `(a - b).norm()`, the same expression the brute-force scan
//! uses, so both return identical bits.

use num_complex::Complex64;

use crate::cauchyfield::find_duplicate;
use crate::par;
use crate::quadtree::QuadTree;
use crate::Error;

const LEAF_CAP: usize = 16;

fn check(points: &[Complex64]) -> Result<(), Error> {
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "nearest neighbours need at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(i) = points.iter().position(|z| !z.is_finite()) {
        return Err(Error::Validation(format!("point {i} is not finite")));
    }
    if let Some((first, second)) = find_duplicate(points) {
        return Err(Error::DuplicatePoints { first, second });
    }
    Ok(())
}

/// For each point, `(index, distance)` of its nearest other point. Ties go to
/// the smaller index.
pub fn nearest_neighbors(points: &[Complex64]) -> Result<Vec<(usize, f64)>, Error> {
    check(points)?;
    let tree = QuadTree::build(points, LEAF_CAP);
    Ok(par::range_collect(points.len(), |i| query(&tree, points, i)))
}

pub fn all_nearest_distances(points: &[Complex64]) -> Result<Vec<f64>, Error> {
    Ok(nearest_neighbors(points)?.into_iter().map(|(_, d)| d).collect())
}

fn query(tree: &QuadTree, points: &[Complex64], i: usize) -> (usize, f64) {
    let z = points[i];
    let mut best = f64::INFINITY;
    let mut best_j = usize::MAX;
    // rounding in the box distance is far below this slack
    let slack = 1.0 - 4.0 * f64::EPSILON;
    let mut stack: Vec<(usize, f64)> = vec![(0, 0.0)];
    let mut kids: Vec<(usize, f64)> = Vec::with_capacity(4);
    while let Some((id, lb)) = stack.pop() {
        if lb * slack > best {
            continue;
        }
        let node = &tree.nodes[id];
        if node.is_leaf() {
            for &j in tree.points_of(id) {
                if j == i {
                    continue;
                }
                let d = (z - points[j]).norm();
                if d < best || (d == best && j < best_j) {
                    best = d;
                    best_j = j;
                }
            }
        } else {
            kids.clear();
            kids.extend(node.children().map(|c| (c, tree.nodes[c].box_distance(z))));
            // farthest pushed first so the nearest is popped next
            kids.sort_by(|a, b| b.1.total_cmp(&a.1));
            stack.extend_from_slice(&kids);
        }
    }
    (best_j, best)
}

/// `O(n^2)` reference scan.
pub fn nearest_neighbors_brute(points: &[Complex64]) -> Result<Vec<(usize, f64)>, Error> {
    check(points)?;
    Ok(par::range_collect(points.len(), |i| {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, &zj) in points.iter().enumerate() {
            if j != i {
                let d = (points[i] - zj).norm();
                if d < best.1 {
                    best = (j, d);
                }
            }
        }
        best
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub sep: f64,
    /// Lexicographically smallest minimizing pair, `pair.0 < pair.1`.
    pub pair: (usize, usize),
}

pub fn separation(points: &[Complex64]) -> Result<Separation, Error> {
    let nn = nearest_neighbors(points)?;
    Ok(separation_from(&nn))
}

pub fn separation_from(nn: &[(usize, f64)]) -> Separation {
    let mut best = Separation {
        sep: f64::INFINITY,
        pair: (usize::MAX, usize::MAX),
    };
    for (i, &(j, d)) in nn.iter().enumerate() {
        if d < best.sep {
            best = Separation { sep: d, pair: (i.min(j), i.max(j)) };
        }
    }
    best
}

/// Which modulus of a pair divides the distance in the relative separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsepDenominator {
    /// `|x_i - x_j| / max(|x_i|, |x_j|)`.
    Larger,
    /// `|x_i - x_j| / min(|x_i|, |x_j|)`.
    Smaller,
}

/// Relative separation over nearest-neighbour pairs. Points at the origin
/// are skipped.
pub fn rsep_from(points: &[Complex64], nn: &[(usize, f64)], denom: RsepDenominator) -> f64 {
    nn.iter()
        .enumerate()
        .filter_map(|(i, &(j, d))| {
            let (a, b) = (points[i].norm(), points[j].norm());
            let m = match denom {
                RsepDenominator::Larger => a.max(b),
                RsepDenominator::Smaller => a.min(b),
            };
            (m > 0.0).then(|| d / m)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn rsep(points: &[Complex64], denom: RsepDenominator) -> Result<f64, Error> {
    let nn = nearest_neighbors(points)?;
    Ok(rsep_from(points, &nn, denom))
}
