//! Skyline canonical rectangles and the canonical rectangle set.
//!
//! A skyline rectangle has its bottom edge on a horizontal line. Its point
//! set is determined by its highest point `p` and by how many of the points
//! below `p` it takes on each side, nearest first. That triple names the
//! canonical rectangle.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SkylineRect<T> {
    pub apex: usize,
    pub left: usize,
    pub right: usize,
    /// Sorted point indices.
    pub members: Vec<usize>,
    pub rect: Rect<T>,
}

/// Per-apex neighbour lists of one side of a line, nearest first, truncated
/// to `k` entries.
#[derive(Clone, Debug)]
struct Skyline {
    apexes: Vec<usize>,
    slot: HashMap<usize, usize>,
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
}

fn cmp<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("finite coordinates")
}

impl Skyline {
    /// `height` measures distance from the line; points below an apex are
    /// those with smaller height.
    fn build<T: Scalar>(points: &[Point2<T>], ids: &[usize], height: impl Fn(usize) -> T, k: usize) -> Self {
        let mut by_height = ids.to_vec();
        by_height.sort_by(|&a, &b| cmp(&height(a), &height(b)));
        let mut left = Vec::with_capacity(ids.len());
        let mut right = Vec::with_capacity(ids.len());
        for (t, &a) in by_height.iter().enumerate() {
            let ax = points[a].x;
            let mut l: Vec<usize> = by_height[..t].iter().copied().filter(|&q| points[q].x < ax).collect();
            let mut r: Vec<usize> = by_height[..t].iter().copied().filter(|&q| points[q].x > ax).collect();
            l.sort_by(|&a, &b| cmp(&points[b].x, &points[a].x));
            r.sort_by(|&a, &b| cmp(&points[a].x, &points[b].x));
            l.truncate(k);
            r.truncate(k);
            left.push(l);
            right.push(r);
        }
        let slot = by_height.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        Skyline { apexes: by_height, slot, left, right }
    }

    fn members(&self, s: usize, i: usize, j: usize) -> Vec<usize> {
        let mut m: Vec<usize> = std::iter::once(self.apexes[s])
            .chain(self.left[s][..i].iter().copied())
            .chain(self.right[s][..j].iter().copied())
            .collect();
        m.sort_unstable();
        m
    }

    /// Every `(slot, i, j)` allowed by `keep(i, j)`.
    fn triples(&self, keep: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.apexes.len() {
            for i in 0..=self.left[s].len() {
                for j in 0..=self.right[s].len() {
                    if keep(i, j) {
                        out.push((s, i, j));
                    }
                }
            }
        }
        out
    }

    /// Names the canonical rectangle whose point set is `piece`.
    fn identify<T: Scalar>(&self, points: &[Point2<T>], piece: &[usize], height: impl Fn(usize) -> T) -> Option<(usize, usize, usize)> {
        let apex = *piece.iter().max_by(|&&a, &&b| cmp(&height(a), &height(b)))?;
        let s = self.slot[&apex];
        let i = piece.iter().filter(|&&q| points[q].x < points[apex].x).count();
        let j = piece.iter().filter(|&&q| points[q].x > points[apex].x).count();
        if i > self.left[s].len() || j > self.right[s].len() {
            return None;
        }
        let mut sorted = piece.to_vec();
        sorted.sort_unstable();
        (self.members(s, i, j) == sorted).then_some((s, i, j))
    }
}

fn x_span<T: Scalar>(points: &[Point2<T>], members: &[usize]) -> (T, T) {
    let xs = members.iter().map(|&q| points[q].x);
    (xs.clone().fold(T::infinity(), T::min), xs.fold(T::neg_infinity(), T::max))
}

fn check_general_position<T: Scalar>(points: &[Point2<T>]) -> Result<()> {
    for axis in [0, 1] {
        let mut c: Vec<T> = points.iter().map(|p| if axis == 0 { p.x } else { p.y }).collect();
        c.sort_by(cmp);
        if c.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance("points share a coordinate; jitter them into general position".into()));
        }
    }
    Ok(())
}

/// All canonical skyline rectangles of points above the x axis with at most
/// `k` points on each side of the apex.
pub fn skyline_canonical_rects<T: Scalar>(points: &[Point2<T>], k: usize) -> Result<Vec<SkylineRect<T>>> {
    if points.iter().any(|p| !(p.y > T::zero())) {
        return Err(Error::InvalidInstance("skyline points must lie strictly above the x axis".into()));
    }
    let ids: Vec<usize> = (0..points.len()).collect();
    let sky = Skyline::build(points, &ids, |q| points[q].y, k);
    Ok(sky
        .triples(|_, _| true)
        .into_iter()
        .map(|(s, i, j)| {
            let members = sky.members(s, i, j);
            let apex = sky.apexes[s];
            let (x0, x1) = x_span(points, &members);
            let rect = Rect { min: Point2::new(x0, T::zero()), max: Point2::new(x1, points[apex].y) };
            SkylineRect { apex, left: i, right: j, members, rect }
        })
        .collect())
}

#[derive(Clone, Debug)]
struct Node<T> {
    split: T,
    /// Points above the split line, and points on or below it.
    above: Skyline,
    below: Skyline,
    above_child: Option<usize>,
    below_child: Option<usize>,
}

/// A canonical rectangle of [`CanonicalRectSet`]: a skyline rectangle on one
/// side of a node's split line.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalRect<T> {
    pub node: usize,
    pub above: bool,
    pub apex: usize,
    pub left: usize,
    pub right: usize,
    pub members: Vec<usize>,
    /// A rectangle whose intersection with the point set is `members`.
    pub rect: Rect<T>,
}

/// Canonical rectangles for all point sets of at most `k` points cut out by
/// axis-parallel rectangles. Built by recursive median splits on y; any
/// such query splits at the first median line it crosses into two skyline
/// pieces, one on each side.
#[derive(Clone, Debug)]
pub struct CanonicalRectSet<T> {
    points: Vec<Point2<T>>,
    k: usize,
    nodes: Vec<Node<T>>,
    root: Option<usize>,
}

impl<T: Scalar> CanonicalRectSet<T> {
    pub fn new(points: Vec<Point2<T>>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("canonical set needs k >= 1".into()));
        }
        check_general_position(&points)?;
        let mut set = CanonicalRectSet { points, k, nodes: Vec::new(), root: None };
        let mut ids: Vec<usize> = (0..set.points.len()).collect();
        ids.sort_by(|&a, &b| cmp(&set.points[a].y, &set.points[b].y));
        set.root = set.build(&ids);
        Ok(set)
    }

    fn build(&mut self, sorted: &[usize]) -> Option<usize> {
        if sorted.is_empty() {
            return None;
        }
        let mid = (sorted.len() - 1) / 2;
        let split = self.points[sorted[mid]].y;
        let pts = &self.points;
        // A piece holds at most k points, so k - 1 neighbours per side suffice.
        let above = Skyline::build(pts, &sorted[mid + 1..], |q| pts[q].y - split, self.k - 1);
        let below = Skyline::build(pts, &sorted[..=mid], |q| split - pts[q].y, self.k - 1);
        let id = self.nodes.len();
        self.nodes.push(Node { split, above, below, above_child: None, below_child: None });
        let a = self.build(&sorted[mid + 1..]);
        let b = self.build(&sorted[..mid]);
        self.nodes[id].above_child = a;
        self.nodes[id].below_child = b;
        Some(id)
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn height(&self, node: usize, above: bool) -> impl Fn(usize) -> T + '_ {
        let split = self.nodes[node].split;
        move |q| if above { self.points[q].y - split } else { split - self.points[q].y }
    }

    fn make(&self, node: usize, above: bool, (s, i, j): (usize, usize, usize)) -> CanonicalRect<T> {
        let n = &self.nodes[node];
        let sky = if above { &n.above } else { &n.below };
        let members = sky.members(s, i, j);
        let apex = sky.apexes[s];
        let (x0, x1) = x_span(&self.points, &members);
        // The side's extreme y keeps the rectangle inside the node's slab.
        let side_y = sky.apexes.iter().map(|&q| self.points[q].y);
        let (y0, y1) = if above {
            (side_y.fold(T::infinity(), T::min), self.points[apex].y)
        } else {
            (self.points[apex].y, n.split)
        };
        CanonicalRect { node, above, apex, left: i, right: j, members, rect: Rect { min: Point2::new(x0, y0), max: Point2::new(x1, y1) } }
    }

    /// Every canonical rectangle with at most `k` points.
    pub fn canonical(&self) -> Vec<CanonicalRect<T>> {
        let mut out = Vec::new();
        for (id, n) in self.nodes.iter().enumerate() {
            for (above, sky) in [(true, &n.above), (false, &n.below)] {
                for t in sky.triples(|i, j| i + j < self.k) {
                    out.push(self.make(id, above, t));
                }
            }
        }
        out
    }

    /// Indices of the points inside `q`.
    pub fn points_in(&self, q: &Rect<T>) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| q.contains(&self.points[i])).collect()
    }

    /// At most two canonical rectangles whose members together are exactly
    /// the points inside `q`.
    pub fn cover(&self, q: &Rect<T>) -> Result<Vec<CanonicalRect<T>>> {
        let inside = self.points_in(q).len();
        if inside > self.k {
            return Err(Error::TooLarge(format!("query holds {inside} points, more than k = {}", self.k)));
        }
        let mut cur = self.root;
        while let Some(id) = cur {
            let n = &self.nodes[id];
            if q.min.y > n.split {
                cur = n.above_child;
            } else if q.max.y < n.split {
                cur = n.below_child;
            } else {
                let in_x = |p: &usize| q.min.x <= self.points[*p].x && self.points[*p].x <= q.max.x;
                let up: Vec<usize> = n.above.apexes.iter().copied().filter(|p| in_x(p) && self.points[*p].y <= q.max.y).collect();
                let down: Vec<usize> = n.below.apexes.iter().copied().filter(|p| in_x(p) && self.points[*p].y >= q.min.y).collect();
                let mut out = Vec::new();
                for (above, piece, sky) in [(true, up, &n.above), (false, down, &n.below)] {
                    if piece.is_empty() {
                        continue;
                    }
                    let t = sky
                        .identify(&self.points, &piece, self.height(id, above))
                        .ok_or_else(|| Error::Infeasible("query piece is not canonical".into()))?;
                    out.push(self.make(id, above, t));
                }
                return Ok(out);
            }
        }
        Ok(Vec::new())
    }

    /// Pairs of points that share some canonical rectangle.
    pub fn conflict_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for n in &self.nodes {
            for sky in [&n.above, &n.below] {
                // Only the maximal rectangles matter; smaller ones are subsets.
                let maximal = |s: usize, i: usize, j: usize| {
                    let full = i + j + 1 == self.k;
                    (full || i == sky.left[s].len()) && (full || j == sky.right[s].len())
                };
                for (s, i, j) in sky.triples(|i, j| i + j < self.k) {
                    if !maximal(s, i, j) {
                        continue;
                    }
                    let m = sky.members(s, i, j);
                    for (a, &p) in m.iter().enumerate() {
                        for &q in &m[a + 1..] {
                            edges.insert((p, q));
                        }
                    }
                }
            }
        }
        edges
    }
}
