//! Aberth corrections `a_i = Σ_{j≠i} 1/(x_i - x_j)`, i.e. the Cauchy
//! matrix-vector product with unit charges.
//!
//! [`aberth_direct`] is the `O(n^2)` reference. [`aberth_fmm`] is a
//! fast multipole evaluation over an adaptive quadtree:
//!
//! * multipole coefficients `a_m = Σ_j ((z_j - c)/h)^m` about each box centre
//!   `c`, scaled by the box half-width `h` to keep them O(count);
//! * a dual-tree traversal that converts a source box into a local (Taylor)
//!   expansion of a target box when `r_A + r_B ≤ θ |c_A - c_B|`, with `r` the
//!   actual radius of the points around the centre, and sums directly when two
//!   leaves are too close;
//! * locals pushed down to the leaves and evaluated there.
//!
//! Truncating at order `p` then costs at most `θ^p / (1 - θ)` of each far
//! contribution.

use num_complex::Complex64;

use crate::par;
use crate::quadtree::QuadTree;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    /// Expansion order `p`.
    pub order: usize,
    pub leaf_cap: usize,
    /// Acceptance ratio `θ` in (0, 1).
    pub theta: f64,
    /// Target accuracy `ε_fmm`.
    pub eps: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self::for_accuracy(1e-12)
    }
}

impl FieldConfig {
    /// Smallest order meeting `θ^p ≤ eps` for `θ = 0.5`, with leaf size 64.
    pub fn for_accuracy(eps: f64) -> Self {
        let theta = 0.5;
        Self {
            order: Self::required_order(eps, theta),
            leaf_cap: 64,
            theta,
            eps,
        }
    }

    pub fn required_order(eps: f64, theta: f64) -> usize {
        ((1.0 / eps).ln() / (1.0 / theta).ln()).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Validation(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Validation(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.leaf_cap == 0 {
            return Err(Error::Validation("leaf_cap must be positive".into()));
        }
        let need = Self::required_order(self.eps, self.theta);
        if self.order < need {
            return Err(Error::Validation(format!(
                "order {} too low for eps {:e} at theta {} (needs {need})",
                self.order, self.eps, self.theta
            )));
        }
        Ok(())
    }
}

/// Returns the first exactly coincident pair `(i, j)`, `i < j`, if any.
pub fn find_duplicate(points: &[Complex64]) -> Option<(usize, usize)> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (points[a], points[b]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)).then(a.cmp(&b))
    });
    let mut best: Option<(usize, usize)> = None;
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        // -0.0 and 0.0 compare equal as values but not under total_cmp
        if points[a] == points[b] {
            let pair = (a.min(b), a.max(b));
            best = Some(best.map_or(pair, |p| p.min(pair)));
        }
    }
    if best.is_none() {
        best = signed_zero_duplicate(points);
    }
    best
}

fn signed_zero_duplicate(points: &[Complex64]) -> Option<(usize, usize)> {
    let canon = |z: Complex64| Complex64::new(z.re + 0.0, z.im + 0.0);
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (canon(points[a]), canon(points[b]));
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)).then(a.cmp(&b))
    });
    idx.windows(2)
        .filter(|w| points[w[0]] == points[w[1]])
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .min()
}

fn check_points(points: &[Complex64]) -> Result<(), Error> {
    if let Some(i) = points.iter().position(|z| !z.is_finite()) {
        return Err(Error::Validation(format!("point {i} is not finite")));
    }
    if let Some((first, second)) = find_duplicate(points) {
        return Err(Error::DuplicatePoints { first, second });
    }
    Ok(())
}

#[inline]
fn recip(d: Complex64) -> Complex64 {
    let s = d.norm_sqr();
    Complex64::new(d.re / s, -d.im / s)
}

/// Direct summation in index order.
pub fn aberth_direct(points: &[Complex64]) -> Result<Vec<Complex64>, Error> {
    check_points(points)?;
    Ok(par::range_collect(points.len(), |i| {
        let zi = points[i];
        let mut s = Complex64::new(0.0, 0.0);
        for (j, &zj) in points.iter().enumerate() {
            if j != i {
                s += recip(zi - zj);
            }
        }
        s
    }))
}

pub fn aberth_fmm(points: &[Complex64], cfg: &FieldConfig) -> Result<Vec<Complex64>, Error> {
    cfg.validate()?;
    check_points(points)?;
    Ok(fmm_core(points, None, None, cfg))
}

/// Corrections for the points flagged in `targets` only, with every point
/// acting as a source; entries of non-targets are zero.
pub fn aberth_fmm_targets(
    points: &[Complex64],
    targets: &[bool],
    cfg: &FieldConfig,
) -> Result<Vec<Complex64>, Error> {
    cfg.validate()?;
    check_points(points)?;
    if targets.len() != points.len() {
        return Err(Error::Validation("target mask length differs from point count".into()));
    }
    Ok(fmm_core(points, None, Some(targets), cfg))
}

/// Splits the indices into `q` contiguous groups, the first `q - 1` of size
/// `floor(n / q)` and the last taking the remainder, and accumulates the
/// `q^2` block products one at a time so only one block's tree is alive.
pub fn aberth_blocked(points: &[Complex64], cfg: &FieldConfig, q: usize) -> Result<Vec<Complex64>, Error> {
    cfg.validate()?;
    check_points(points)?;
    let all = vec![true; points.len()];
    blocked_core(points, &all, cfg, q)
}

/// Blocked evaluation restricted to `targets`.
pub fn aberth_blocked_targets(
    points: &[Complex64],
    targets: &[bool],
    cfg: &FieldConfig,
    q: usize,
) -> Result<Vec<Complex64>, Error> {
    cfg.validate()?;
    check_points(points)?;
    if targets.len() != points.len() {
        return Err(Error::Validation("target mask length differs from point count".into()));
    }
    blocked_core(points, targets, cfg, q)
}

pub fn block_ranges(n: usize, q: usize) -> Vec<std::ops::Range<usize>> {
    let m = n / q;
    (0..q)
        .map(|g| {
            let end = if g + 1 == q { n } else { (g + 1) * m };
            g * m..end
        })
        .collect()
}

fn blocked_core(
    points: &[Complex64],
    targets: &[bool],
    cfg: &FieldConfig,
    q: usize,
) -> Result<Vec<Complex64>, Error> {
    let n = points.len();
    if q == 0 || q > n.max(1) {
        return Err(Error::Validation(format!("split factor q = {q} must lie in 1..={n}")));
    }
    if q == 1 {
        let all_targets = targets.iter().all(|&t| t);
        return Ok(fmm_core(points, None, if all_targets { None } else { Some(targets) }, cfg));
    }
    let groups = block_ranges(n, q);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for gi in &groups {
        if !targets[gi.clone()].iter().any(|&t| t) {
            continue;
        }
        for gj in &groups {
            if gi == gj {
                let pts = &points[gi.clone()];
                let r = fmm_core(pts, None, Some(&targets[gi.clone()]), cfg);
                for (o, v) in out[gi.clone()].iter_mut().zip(r) {
                    *o += v;
                }
            } else {
                let mut pts = Vec::with_capacity(gi.len() + gj.len());
                pts.extend_from_slice(&points[gi.clone()]);
                pts.extend_from_slice(&points[gj.clone()]);
                let mut src = vec![false; pts.len()];
                src[gi.len()..].fill(true);
                let mut tgt = vec![false; pts.len()];
                tgt[..gi.len()].copy_from_slice(&targets[gi.clone()]);
                let r = fmm_core(&pts, Some(&src), Some(&tgt), cfg);
                for (o, v) in out[gi.clone()].iter_mut().zip(&r[..gi.len()]) {
                    *o += *v;
                }
            }
        }
    }
    Ok(out)
}

struct Plan {
    m2l: Vec<Vec<usize>>,
    p2p: Vec<Vec<usize>>,
}

/// Per-node source / target counts.
fn counts(tree: &QuadTree, flags: Option<&[bool]>) -> Vec<usize> {
    tree.nodes
        .iter()
        .map(|nd| match flags {
            None => nd.len(),
            Some(f) => tree.perm[nd.start..nd.end].iter().filter(|&&i| f[i]).count(),
        })
        .collect()
}

fn plan(tree: &QuadTree, n_src: &[usize], n_tgt: &[usize], cfg: &FieldConfig) -> Plan {
    let nn = tree.nodes.len();
    let mut m2l = vec![Vec::new(); nn];
    let mut p2p = vec![Vec::new(); nn];
    let p2 = (cfg.order * cfg.order) as f64;
    let mut stack = vec![(0usize, 0usize)];
    while let Some((a, b)) = stack.pop() {
        if n_tgt[a] == 0 || n_src[b] == 0 {
            continue;
        }
        let (na, nb) = (&tree.nodes[a], &tree.nodes[b]);
        let dist = (na.center - nb.center).norm();
        if a != b && na.radius + nb.radius <= cfg.theta * dist {
            if na.is_leaf() && (n_tgt[a] as f64) * (n_src[b] as f64) < p2 {
                p2p[a].push(b);
            } else {
                m2l[a].push(b);
            }
            continue;
        }
        match (na.is_leaf(), nb.is_leaf()) {
            (true, true) => p2p[a].push(b),
            (true, false) => push_rev(&mut stack, nb.children().map(|c| (a, c))),
            (false, true) => push_rev(&mut stack, na.children().map(|c| (c, b))),
            (false, false) => {
                if na.half_width >= nb.half_width {
                    push_rev(&mut stack, na.children().map(|c| (c, b)));
                } else {
                    push_rev(&mut stack, nb.children().map(|c| (a, c)));
                }
            }
        }
    }
    Plan { m2l, p2p }
}

// keeps list order equal to a depth-first left-to-right traversal
fn push_rev(stack: &mut Vec<(usize, usize)>, it: impl DoubleEndedIterator<Item = (usize, usize)>) {
    stack.extend(it.rev());
}

struct Binomials {
    n: usize,
    table: Vec<f64>,
}

impl Binomials {
    fn new(n: usize) -> Self {
        let mut table = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..=n {
            table[i * (n + 1)] = 1.0;
            for j in 1..=i {
                table[i * (n + 1) + j] = table[(i - 1) * (n + 1) + j - 1] + table[(i - 1) * (n + 1) + j];
            }
        }
        Self { n, table }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.table[i * (self.n + 1) + j]
    }
}

fn fmm_core(
    points: &[Complex64],
    sources: Option<&[bool]>,
    targets: Option<&[bool]>,
    cfg: &FieldConfig,
) -> Vec<Complex64> {
    let n = points.len();
    let zero = Complex64::new(0.0, 0.0);
    if n <= 1 {
        return vec![zero; n];
    }
    let tree = QuadTree::build(points, cfg.leaf_cap);
    let n_src = counts(&tree, sources);
    let n_tgt = counts(&tree, targets);
    let plan = plan(&tree, &n_src, &n_tgt, cfg);
    let p = cfg.order;
    let w = p + 1;
    let binom = Binomials::new(2 * p + 1);
    let is_src = |i: usize| sources.is_none_or(|s| s[i]);
    let is_tgt = |i: usize| targets.is_none_or(|t| t[i]);

    // upward pass, deepest level first
    let mut mpole = vec![zero; tree.nodes.len() * w];
    for level in tree.levels.iter().rev() {
        let computed = par::map_collect(level, |_, &id| {
            let nd = &tree.nodes[id];
            let mut a = vec![zero; w];
            if n_src[id] == 0 {
                return a;
            }
            if nd.is_leaf() {
                let inv_h = 1.0 / nd.half_width;
                for &j in tree.points_of(id) {
                    if !is_src(j) {
                        continue;
                    }
                    let u = (points[j] - nd.center) * inv_h;
                    let mut pw = Complex64::new(1.0, 0.0);
                    for am in a.iter_mut() {
                        *am += pw;
                        pw *= u;
                    }
                }
            } else {
                for c in nd.children() {
                    if n_src[c] == 0 {
                        continue;
                    }
                    let ch = &tree.nodes[c];
                    let ratio = ch.half_width / nd.half_width;
                    let delta = (ch.center - nd.center) / nd.half_width;
                    let ac = &mpole[c * w..(c + 1) * w];
                    // â_m(P) = Σ_l C(m,l) â_l(C) ratio^l delta^(m-l)
                    let mut scaled = vec![zero; w];
                    let mut rl = 1.0;
                    for l in 0..w {
                        scaled[l] = ac[l] * rl;
                        rl *= ratio;
                    }
                    let mut dpow = vec![Complex64::new(1.0, 0.0); w];
                    for k in 1..w {
                        dpow[k] = dpow[k - 1] * delta;
                    }
                    for m in 0..w {
                        let mut s = zero;
                        for l in 0..=m {
                            s += scaled[l] * dpow[m - l] * binom.get(m, l);
                        }
                        a[m] += s;
                    }
                }
            }
            a
        });
        for (&id, a) in level.iter().zip(computed) {
            mpole[id * w..(id + 1) * w].copy_from_slice(&a);
        }
    }

    // far field into locals
    let mut local = vec![zero; tree.nodes.len() * w];
    let ids: Vec<usize> = (0..tree.nodes.len()).filter(|&i| !plan.m2l[i].is_empty()).collect();
    let computed = par::map_collect(&ids, |_, &a| {
        let na = &tree.nodes[a];
        let mut b = vec![zero; w];
        let mut s = vec![zero; w];
        for &src in &plan.m2l[a] {
            let nb = &tree.nodes[src];
            let t = na.center - nb.center;
            let inv_t = recip(t);
            let rho_b = inv_t * nb.half_width;
            let rho_a = -(inv_t * na.half_width);
            let am = &mpole[src * w..(src + 1) * w];
            let mut pw = Complex64::new(1.0, 0.0);
            for m in 0..w {
                s[m] = am[m] * pw;
                pw *= rho_b;
            }
            let mut pa = inv_t;
            for (l, bl) in b.iter_mut().enumerate() {
                let mut acc = zero;
                for (m, sm) in s.iter().enumerate() {
                    acc += sm * binom.get(m + l, l);
                }
                *bl += acc * pa;
                pa *= rho_a;
            }
        }
        b
    });
    for (&id, b) in ids.iter().zip(computed) {
        local[id * w..(id + 1) * w].copy_from_slice(&b);
    }

    // push locals down, shallowest level first
    for level in tree.levels.iter() {
        let parents: Vec<usize> = level
            .iter()
            .copied()
            .filter(|&id| !tree.nodes[id].is_leaf() && n_tgt[id] > 0)
            .collect();
        let computed = par::map_collect(&parents, |_, &id| {
            let nd = &tree.nodes[id];
            let bp = &local[id * w..(id + 1) * w];
            if bp.iter().all(|c| *c == zero) {
                return Vec::new();
            }
            let mut out = Vec::with_capacity(nd.n_children);
            for c in nd.children() {
                if n_tgt[c] == 0 {
                    continue;
                }
                let ch = &tree.nodes[c];
                let ratio = ch.half_width / nd.half_width;
                let delta = (ch.center - nd.center) / nd.half_width;
                let mut dpow = vec![Complex64::new(1.0, 0.0); w];
                for k in 1..w {
                    dpow[k] = dpow[k - 1] * delta;
                }
                // b̂'_m = ratio^m Σ_{l≥m} b̂_l C(l,m) delta^(l-m)
                let mut bc = vec![zero; w];
                let mut rm = 1.0;
                for (m, bm) in bc.iter_mut().enumerate() {
                    let mut s = zero;
                    for l in m..w {
                        s += bp[l] * dpow[l - m] * binom.get(l, m);
                    }
                    *bm = s * rm;
                    rm *= ratio;
                }
                out.push((c, bc));
            }
            out
        });
        for list in computed {
            for (c, bc) in list {
                for (dst, v) in local[c * w..(c + 1) * w].iter_mut().zip(bc) {
                    *dst += v;
                }
            }
        }
    }

    // evaluate at targets
    let leaves: Vec<usize> = tree.leaves().filter(|&l| n_tgt[l] > 0).collect();
    let per_leaf = par::map_collect(&leaves, |_, &leaf| {
        let nd = &tree.nodes[leaf];
        let b = &local[leaf * w..(leaf + 1) * w];
        let has_local = b.iter().any(|c| *c != zero);
        let inv_h = 1.0 / nd.half_width;
        let mut vals = Vec::with_capacity(n_tgt[leaf]);
        for &i in tree.points_of(leaf) {
            if !is_tgt(i) {
                continue;
            }
            let zi = points[i];
            let mut acc = zero;
            if has_local {
                let u = (zi - nd.center) * inv_h;
                for bl in b.iter().rev() {
                    acc = acc * u + bl;
                }
            }
            for &src in &plan.p2p[leaf] {
                for &j in tree.points_of(src) {
                    if j != i && is_src(j) {
                        acc += recip(zi - points[j]);
                    }
                }
            }
            vals.push((i, acc));
        }
        vals
    });
    let mut out = vec![zero; n];
    for vals in per_leaf {
        for (i, v) in vals {
            out[i] = v;
        }
    }
    out
}
