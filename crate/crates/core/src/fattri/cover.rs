//! Covering a triangle by similar copies of bounded mass.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Triangle};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct CoverPiece<T> {
    #[serde(skip)]
    pub triangle: Triangle<T>,
    /// Edge length ratio to the source triangle.
    pub scale: T,
    /// Rotated by 180 degrees relative to the source.
    pub reflected: bool,
}

#[derive(Clone, Debug)]
pub struct TriangleCover<T> {
    pub source: Triangle<T>,
    pub k: usize,
    pub pieces: Vec<CoverPiece<T>>,
}

/// Deepest allowed subdivision; distinct f64 atoms separate long before.
pub const MAX_DEPTH: usize = 200;

#[derive(Clone, Debug)]
struct Cell<T> {
    tri: [Point2<T>; 3],
    parent: Option<usize>,
    depth: usize,
    reflected: bool,
    scale: T,
    children: Option<[usize; 4]>,
    /// Atoms assigned to this cell when it is a leaf.
    atoms: Vec<usize>,
}

fn mid<T: Scalar>(a: &Point2<T>, b: &Point2<T>) -> Point2<T> {
    let two = T::from_float(2.0);
    Point2::new((a.x + b.x) / two, (a.y + b.y) / two)
}

/// Corner children keep the parent's orientation; the last child is the
/// middle one, whose vertex `i` faces the parent's vertex `i`.
fn split<T: Scalar>([a, b, c]: &[Point2<T>; 3]) -> [[Point2<T>; 3]; 4] {
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    [
        [a.clone(), ab.clone(), ca.clone()],
        [ab.clone(), b.clone(), bc.clone()],
        [ca.clone(), bc.clone(), c.clone()],
        [bc, ca, ab],
    ]
}

fn contains<T: Scalar>(tri: &[Point2<T>; 3], p: &Point2<T>) -> bool {
    Triangle { v: tri.clone() }.contains(p)
}

/// Barycentric coordinates of `p` with respect to `tri`.
fn barycentric<T: Scalar>([a, b, c]: &[Point2<T>; 3], p: &Point2<T>) -> [T; 3] {
    let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let lb = ((p.x - a.x) * (c.y - a.y) - (p.y - a.y) * (c.x - a.x)) / det;
    let lc = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / det;
    [T::one() - lb - lc, lb, lc]
}

struct Builder<'a, T> {
    cells: Vec<Cell<T>>,
    atoms: &'a [(Point2<T>, T)],
    limit: T,
}

impl<T: Scalar> Builder<'_, T> {
    fn grow(&mut self, id: usize, atoms: Vec<usize>) -> Result<()> {
        let mass: T = atoms.iter().map(|&i| self.atoms[i].1).sum();
        if mass <= self.limit || atoms.len() <= 1 {
            self.cells[id].atoms = atoms;
            return Ok(());
        }
        if self.cells[id].depth >= MAX_DEPTH {
            return Err(Error::TooLarge("measure cover recursion too deep".into()));
        }
        let parts = split(&self.cells[id].tri);
        let mut buckets: [Vec<usize>; 4] = Default::default();
        for i in atoms {
            let slot = (0..4).find(|&c| contains(&parts[c], &self.atoms[i].0)).unwrap_or(3);
            buckets[slot].push(i);
        }
        let mut ids = [0; 4];
        let (depth, reflected, scale) = (self.cells[id].depth, self.cells[id].reflected, self.cells[id].scale);
        for (c, tri) in parts.into_iter().enumerate() {
            ids[c] = self.cells.len();
            self.cells.push(Cell {
                tri,
                parent: Some(id),
                depth: depth + 1,
                reflected: reflected ^ (c == 3),
                scale: scale / T::from_float(2.0),
                children: None,
                atoms: Vec::new(),
            });
        }
        self.cells[id].children = Some(ids);
        for (c, bucket) in buckets.into_iter().enumerate() {
            self.grow(ids[c], bucket)?;
        }
        Ok(())
    }
}

/// Covers `t` by at most `18 k` similar triangles, each of mass at most
/// `mu(t) / k`. Only the mass inside `t` counts; coincident atoms merge,
/// and an atom heavier than `mu(t) / k` is an error.
pub fn cover_triangle_by_measure<T: Scalar>(t: &Triangle<T>, mass: &[(Point2<T>, T)], k: usize) -> Result<TriangleCover<T>> {
    if k == 0 {
        return Err(Error::InvalidConfig("cover needs k >= 1".into()));
    }
    let whole = || TriangleCover {
        source: t.clone(),
        k,
        pieces: vec![CoverPiece { triangle: t.clone(), scale: T::one(), reflected: false }],
    };
    let mut atoms: Vec<(Point2<T>, T)> = Vec::new();
    for (p, m) in mass {
        if !(m.is_finite() && *m >= T::zero()) {
            return Err(Error::InvalidInstance("masses must be finite and nonnegative".into()));
        }
        if *m > T::zero() && t.contains(p) {
            atoms.push((p.clone(), *m));
        }
    }
    atoms.sort_by(|a, b| (a.0.x, a.0.y).partial_cmp(&(b.0.x, b.0.y)).expect("finite coordinates"));
    atoms.dedup_by(|a, b| {
        let same = a.0 == b.0;
        if same {
            b.1 = b.1 + a.1;
        }
        same
    });
    let mu: T = atoms.iter().map(|a| a.1).sum();
    if k == 1 || mu <= T::zero() {
        return Ok(whole());
    }
    let limit = mu / T::from_float(k as f64);
    let slack = limit * T::from_float(1e-12);
    if let Some(a) = atoms.iter().find(|a| a.1 > limit + slack) {
        return Err(Error::AtomicMass { mass: a.1.as_f64(), limit: limit.as_f64() });
    }
    let root = Cell { tri: t.v.clone(), parent: None, depth: 0, reflected: false, scale: T::one(), children: None, atoms: Vec::new() };
    let mut b = Builder { cells: vec![root], atoms: &atoms, limit: limit + slack };
    b.grow(0, (0..atoms.len()).collect())?;
    let cells = b.cells;

    let selected = select(&cells, &atoms, limit - slack);
    let closed = lca_closure(&cells, &selected);
    let pieces = faces(&cells, &closed);
    debug_assert!(pieces.len() <= 18 * k);
    Ok(TriangleCover { source: t.clone(), k, pieces })
}

fn subtree_mass<T: Scalar>(cells: &[Cell<T>], atoms: &[(Point2<T>, T)], alive: &[bool]) -> Vec<T> {
    let mut m = vec![T::zero(); cells.len()];
    // Children always come after their parent.
    for id in (0..cells.len()).rev() {
        m[id] = match cells[id].children {
            Some(ch) => ch.iter().map(|&c| m[c]).sum(),
            None => cells[id].atoms.iter().filter(|&&i| alive[i]).map(|&i| atoms[i].1).sum(),
        };
    }
    m
}

fn leaf_atoms<T>(cells: &[Cell<T>], id: usize, out: &mut Vec<usize>) {
    match cells[id].children {
        Some(ch) => ch.iter().for_each(|&c| leaf_atoms(cells, c, out)),
        None => out.extend(&cells[id].atoms),
    }
}

/// Repeatedly takes the deepest cell holding at least `threshold` of the
/// remaining mass and clears it; then the lowest cell holding what is left,
/// and the root.
fn select<T: Scalar>(cells: &[Cell<T>], atoms: &[(Point2<T>, T)], threshold: T) -> Vec<usize> {
    let mut alive = vec![true; atoms.len()];
    let mut chosen = Vec::new();
    loop {
        let m = subtree_mass(cells, atoms, &alive);
        if m[0] < threshold {
            if m[0] > T::zero() {
                let mut id = 0;
                while let Some(ch) = cells[id].children {
                    match ch.iter().filter(|&&c| m[c] > T::zero()).collect::<Vec<_>>().as_slice() {
                        [&only] => id = only,
                        _ => break,
                    }
                }
                chosen.push(id);
            }
            break;
        }
        let pick = (0..cells.len())
            .filter(|&id| m[id] >= threshold)
            .max_by_key(|&id| (cells[id].depth, usize::MAX - id))
            .expect("root qualifies");
        chosen.push(pick);
        let mut gone = Vec::new();
        leaf_atoms(cells, pick, &mut gone);
        gone.into_iter().for_each(|i| alive[i] = false);
    }
    chosen.push(0);
    chosen.sort_unstable();
    chosen.dedup();
    chosen
}

fn ancestors<T>(cells: &[Cell<T>], mut id: usize) -> Vec<usize> {
    let mut out = vec![id];
    while let Some(p) = cells[id].parent {
        out.push(p);
        id = p;
    }
    out
}

fn lca<T>(cells: &[Cell<T>], a: usize, b: usize) -> usize {
    let up = ancestors(cells, a);
    ancestors(cells, b).into_iter().find(|x| up.contains(x)).expect("common root")
}

fn lca_closure<T>(cells: &[Cell<T>], set: &[usize]) -> Vec<usize> {
    let mut out = set.to_vec();
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            out.push(lca(cells, a, b));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn piece<T: Scalar>(tri: [Point2<T>; 3], scale: T, reflected: bool) -> Option<CoverPiece<T>> {
    Triangle::new(tri[0].clone(), tri[1].clone(), tri[2].clone())
        .ok()
        .map(|triangle| CoverPiece { triangle, scale, reflected })
}

/// Corner homothets of `outer` cut off by the edges of `hole`, a triangle
/// rotated by 180 degrees relative to `outer`. They cover `outer` minus `hole`.
fn corners<T: Scalar>(outer: &[Point2<T>; 3], scale: T, reflected: bool, hole: &[Point2<T>; 3], out: &mut Vec<CoverPiece<T>>) {
    let bary: Vec<[T; 3]> = hole.iter().map(|p| barycentric(outer, p)).collect();
    for i in 0..3 {
        let reach = bary.iter().map(|l| l[i]).fold(T::neg_infinity(), T::max);
        let s = T::one() - reach;
        if s <= T::zero() {
            continue;
        }
        let s = s.min(T::one());
        let apex = &outer[i];
        let tri = std::array::from_fn(|j| {
            let p = &outer[j];
            Point2::new(apex.x + s * (p.x - apex.x), apex.y + s * (p.y - apex.y))
        });
        out.extend(piece(tri, scale * s, reflected));
    }
}

fn centroid<T: Scalar>(tri: &[Point2<T>; 3]) -> Point2<T> {
    let three = T::from_float(3.0);
    Point2::new((tri[0].x + tri[1].x + tri[2].x) / three, (tri[0].y + tri[1].y + tri[2].y) / three)
}

/// Pieces for every face of the arrangement of the children of `closed`.
fn faces<T: Scalar>(cells: &[Cell<T>], closed: &[usize]) -> Vec<CoverPiece<T>> {
    let mut out = Vec::new();
    for &s in closed {
        let kids: Vec<(Option<usize>, [Point2<T>; 3], bool)> = match cells[s].children {
            Some(ch) => ch.iter().map(|&c| (Some(c), cells[c].tri.clone(), cells[c].reflected)).collect(),
            None => split(&cells[s].tri)
                .into_iter()
                .enumerate()
                .map(|(c, tri)| (None, tri, cells[s].reflected ^ (c == 3)))
                .collect(),
        };
        let half = cells[s].scale / T::from_float(2.0);
        for (id, tri, reflected) in kids {
            if id.is_some_and(|c| closed.contains(&c)) {
                continue;
            }
            // The highest selected cell strictly inside this child; the
            // closure under LCA makes it unique.
            let hole = id.and_then(|c| {
                closed
                    .iter()
                    .copied()
                    .filter(|&x| x != c && ancestors(cells, x).contains(&c))
                    .min_by_key(|&x| cells[x].depth)
            });
            let Some(w) = hole else {
                out.extend(piece(tri, half, reflected));
                continue;
            };
            let wt = &cells[w].tri;
            if cells[w].reflected != reflected {
                corners(&tri, half, reflected, wt, &mut out);
            } else {
                // Rotate the hole about each edge midpoint; the three copies
                // and the hole tile a reflected triangle of twice its size.
                let [p, q, r] = wt;
                let flip = |a: &Point2<T>, b: &Point2<T>, c: &Point2<T>| Point2::new(a.x + b.x - c.x, a.y + b.y - c.y);
                let big = [flip(q, r, p), flip(p, r, q), flip(p, q, r)];
                let wscale = cells[w].scale;
                let copies = [
                    [q.clone(), r.clone(), big[0].clone()],
                    [p.clone(), r.clone(), big[1].clone()],
                    [p.clone(), q.clone(), big[2].clone()],
                ];
                for c in copies {
                    if contains(&tri, &centroid(&c)) {
                        out.extend(piece(c, wscale, !reflected));
                    }
                }
                corners(&tri, half, reflected, &big, &mut out);
            }
        }
    }
    out
}
