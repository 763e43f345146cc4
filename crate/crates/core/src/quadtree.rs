//! Adaptive quadtree over points in the complex plane.
//!
//! Nodes are stored in a flat vector; the children of a node are contiguous
//! and only non-empty quadrants get a node. Each node owns a contiguous range
//! of [`QuadTree::perm`], so the points of a subtree are a slice.

use num_complex::Complex64;

/// Depth at which splitting stops regardless of occupancy. Boxes at this
/// depth are ~2^-50 of the root and cannot be split meaningfully in f64.
pub const MAX_DEPTH: u32 = 50;

#[derive(Debug, Clone)]
pub struct QuadNode {
    pub center: Complex64,
    pub half_width: f64,
    pub level: u32,
    /// Range into `perm`.
    pub start: usize,
    pub end: usize,
    pub first_child: usize,
    pub n_children: usize,
    /// Tight bounding box of the points below this node.
    pub lo: Complex64,
    pub hi: Complex64,
    /// Largest distance from `center` to a point below this node.
    pub radius: f64,
}

impl QuadNode {
    pub fn is_leaf(&self) -> bool {
        self.n_children == 0
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn children(&self) -> std::ops::Range<usize> {
        self.first_child..self.first_child + self.n_children
    }

    /// Distance from `z` to the bounding box (0 inside).
    pub fn box_distance(&self, z: Complex64) -> f64 {
        let dx = (self.lo.re - z.re).max(0.0).max(z.re - self.hi.re);
        let dy = (self.lo.im - z.im).max(0.0).max(z.im - self.hi.im);
        dx.hypot(dy)
    }
}

#[derive(Debug, Clone)]
pub struct QuadTree {
    pub nodes: Vec<QuadNode>,
    /// Point indices ordered so that every node covers a contiguous range.
    pub perm: Vec<usize>,
    /// Node ids grouped by depth, root level first.
    pub levels: Vec<Vec<usize>>,
}

impl QuadTree {
    pub fn build(points: &[Complex64], leaf_cap: usize) -> Self {
        let leaf_cap = leaf_cap.max(1);
        let n = points.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if n == 0 {
            return Self {
                nodes,
                perm,
                levels: Vec::new(),
            };
        }
        let (lo, hi) = bbox(points, &perm);
        let center = Complex64::new(0.5 * (lo.re + hi.re), 0.5 * (lo.im + hi.im));
        let mut half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im);
        if half <= 0.0 {
            half = 1.0;
        }
        nodes.push(make_node(points, &perm, center, half, 0, 0, n));

        let mut scratch = vec![0usize; n];
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &nodes[id];
            if node.len() <= leaf_cap || node.level >= MAX_DEPTH {
                continue;
            }
            let (start, end, c, h, level) = (node.start, node.end, node.center, node.half_width, node.level);
            let quad = |i: usize| -> usize {
                let z = points[i];
                usize::from(z.re >= c.re) | (usize::from(z.im >= c.im) << 1)
            };
            let mut counts = [0usize; 4];
            for &i in &perm[start..end] {
                counts[quad(i)] += 1;
            }
            let mut offs = [0usize; 4];
            for q in 1..4 {
                offs[q] = offs[q - 1] + counts[q - 1];
            }
            let mut fill = offs;
            for &i in &perm[start..end] {
                let q = quad(i);
                scratch[start + fill[q]] = i;
                fill[q] += 1;
            }
            perm[start..end].copy_from_slice(&scratch[start..end]);

            let first = nodes.len();
            let hh = 0.5 * h;
            for q in 0..4 {
                if counts[q] == 0 {
                    continue;
                }
                let cc = Complex64::new(
                    c.re + if q & 1 == 1 { hh } else { -hh },
                    c.im + if q & 2 == 2 { hh } else { -hh },
                );
                let s = start + offs[q];
                nodes.push(make_node(points, &perm, cc, hh, level + 1, s, s + counts[q]));
            }
            let made = nodes.len() - first;
            nodes[id].first_child = first;
            nodes[id].n_children = made;
            stack.extend(first..first + made);
        }

        let depth = nodes.iter().map(|n| n.level).max().unwrap_or(0) as usize;
        let mut levels = vec![Vec::new(); depth + 1];
        for (id, node) in nodes.iter().enumerate() {
            levels[node.level as usize].push(id);
        }
        Self { nodes, perm, levels }
    }

    pub fn root(&self) -> Option<&QuadNode> {
        self.nodes.first()
    }

    pub fn points_of(&self, id: usize) -> &[usize] {
        let n = &self.nodes[id];
        &self.perm[n.start..n.end]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf())
    }
}

fn bbox(points: &[Complex64], idx: &[usize]) -> (Complex64, Complex64) {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &i in idx {
        let z = points[i];
        lo.re = lo.re.min(z.re);
        lo.im = lo.im.min(z.im);
        hi.re = hi.re.max(z.re);
        hi.im = hi.im.max(z.im);
    }
    (lo, hi)
}

fn make_node(
    points: &[Complex64],
    perm: &[usize],
    center: Complex64,
    half_width: f64,
    level: u32,
    start: usize,
    end: usize,
) -> QuadNode {
    let idx = &perm[start..end];
    let (lo, hi) = bbox(points, idx);
    let radius = idx
        .iter()
        .map(|&i| (points[i] - center).norm())
        .fold(0.0, f64::max);
    QuadNode {
        center,
        half_width,
        level,
        start,
        end,
        first_child: 0,
        n_children: 0,
        lo,
        hi,
        radius,
    }
}
