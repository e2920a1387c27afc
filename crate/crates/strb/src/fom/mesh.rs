//! Conforming triangulations of two model geometries: a straight channel and
//! a symmetric T-junction, both meshed by splitting structured rectangular
//! cells along the lower-left to upper-right diagonal. The mesh also owns the
//! quadratic (midpoint) node numbering of the Taylor–Hood velocity space:
//! scalar nodes are the vertices followed by every edge midpoint, numbered in
//! first-encounter order over the triangle list so construction is
//! deterministic.
//!
//! Every boundary edge is stored with the domain on its left, which makes the
//! inward normal a 90-degree counterclockwise rotation of the edge direction.

use super::{FomError, Result};
use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

/// Boundary classification. `In(k)` boundaries carry weakly imposed Dirichlet
/// data through multipliers, `Wall` is strongly imposed no-slip, `Out` is the
/// homogeneous natural (do-nothing) boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    In(u8),
    Out,
    Wall,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::In(k) => write!(f, "IN_{k}"),
            BoundaryTag::Out => write!(f, "OUT"),
            BoundaryTag::Wall => write!(f, "WALL"),
        }
    }
}

impl FromStr for BoundaryTag {
    type Err = FomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OUT" => Ok(BoundaryTag::Out),
            "WALL" => Ok(BoundaryTag::Wall),
            _ => {
                let k = s
                    .strip_prefix("IN_")
                    .and_then(|t| t.parse::<u8>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| FomError::Format(format!("unknown boundary tag {s}")))?;
                Ok(BoundaryTag::In(k))
            }
        }
    }
}

/// One tagged boundary edge, directed so the domain lies on its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    /// Scalar node id of the edge midpoint.
    pub mid: usize,
    pub tag: BoundaryTag,
}

/// Triangulation with quadratic node bookkeeping and tagged boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    midpoints: Vec<[f64; 2]>,
    /// Per triangle: its 3 vertices, then the midpoints of edges
    /// (0,1), (1,2), (2,0), all in scalar node numbering.
    tri_nodes: Vec<[usize; 6]>,
    boundary: Vec<BoundaryEdge>,
    n_dirichlet: u8,
}

fn signed_area(v: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [a, b, c] = [v[t[0]], v[t[1]], v[t[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh2D {
    /// Validates raw vertex/triangle/tag lists and derives the quadratic
    /// nodes and directed boundary. This is the single construction path;
    /// the generators and the text reader both end here.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tagged: Vec<(usize, usize, BoundaryTag)>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(FomError::Format(format!("triangle {i} references a missing vertex")));
            }
            let area = signed_area(&vertices, *t);
            if area <= 1e-14 {
                return Err(FomError::DegenerateTriangle { index: i, area });
            }
        }

        // Undirected edge bookkeeping: incidence count plus the direction the
        // edge has in its first (for boundary edges: only) triangle.
        let mut edges: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
        for t in &triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let e = edges.entry(edge_key(a, b)).or_insert((0, (a, b)));
                e.0 += 1;
            }
        }
        for t in &triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let count = edges[&edge_key(a, b)].0;
                if count > 2 {
                    return Err(FomError::NonConforming { a, b, count });
                }
            }
        }

        let mut tag_of: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
        for &(a, b, tag) in &tagged {
            let key = edge_key(a, b);
            match edges.get(&key) {
                Some(&(1, _)) => {}
                _ => return Err(FomError::NotABoundaryEdge { a, b }),
            }
            if tag_of.insert(key, tag).is_some() {
                return Err(FomError::DuplicateTag { a, b });
            }
        }
        // Scan in triangle order so the reported edge is deterministic.
        for t in &triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = edge_key(a, b);
                if edges[&key].0 == 1 && !tag_of.contains_key(&key) {
                    return Err(FomError::UntaggedBoundaryEdge { a, b });
                }
            }
        }

        // Midpoint numbering by first encounter over the triangle list.
        let mut mid_id: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoints = Vec::new();
        let mut tri_nodes = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let mut nodes = [t[0], t[1], t[2], 0, 0, 0];
            for (slot, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])].into_iter().enumerate()
            {
                let key = edge_key(a, b);
                let id = *mid_id.entry(key).or_insert_with(|| {
                    midpoints.push([
                        0.5 * (vertices[a][0] + vertices[b][0]),
                        0.5 * (vertices[a][1] + vertices[b][1]),
                    ]);
                    nv + midpoints.len() - 1
                });
                nodes[3 + slot] = id;
            }
            tri_nodes.push(nodes);
        }

        // Boundary records in the input tag order, re-directed to keep the
        // domain on the left (the orientation the edge has in its triangle).
        let mut boundary = Vec::with_capacity(tagged.len());
        for &(a, b, tag) in &tagged {
            let key = edge_key(a, b);
            let (_, directed) = edges[&key];
            boundary.push(BoundaryEdge { a: directed.0, b: directed.1, mid: mid_id[&key], tag });
        }

        let mut ks: Vec<u8> = boundary
            .iter()
            .filter_map(|e| match e.tag {
                BoundaryTag::In(k) => Some(k),
                _ => None,
            })
            .collect();
        ks.sort_unstable();
        ks.dedup();
        for (i, &k) in ks.iter().enumerate() {
            if k as usize != i + 1 {
                return Err(FomError::BoundaryNumbering { found: k });
            }
        }
        let n_dirichlet = ks.last().copied().unwrap_or(0);

        Ok(Mesh2D { vertices, triangles, midpoints, tri_nodes, boundary, n_dirichlet })
    }

    /// Structured channel [0, length] × [0, height] with `nx` × `ny` cells,
    /// each split along its lower-left to upper-right diagonal. Inflow IN_1
    /// at x = 0, outflow at x = length, walls at y = 0 and y = height.
    pub fn channel(nx: usize, ny: usize, length: f64, height: f64) -> Result<Self> {
        if nx < 1 || ny < 1 || length <= 0.0 || height <= 0.0 {
            return Err(FomError::BadParameter("channel needs nx, ny >= 1 and positive size".into()));
        }
        let (vertices, triangles) =
            grid_cells(nx, ny, length / nx as f64, height / ny as f64, |_, _| true);
        let tol = 1e-9 * (length / nx as f64);
        let tagged = tag_boundary(&vertices, &triangles, |mid| {
            if mid[0] < tol {
                BoundaryTag::In(1)
            } else if mid[0] > length - tol {
                BoundaryTag::Out
            } else {
                BoundaryTag::Wall
            }
        });
        Self::from_parts(vertices, triangles, tagged)
    }

    /// Symmetric T-junction: the channel of [`Mesh2D::channel`] plus a branch
    /// of `nbx` × `nby` cells centered on top (so `nx - nbx` must be even).
    /// IN_1 is the left edge, IN_2 the top of the branch, outflow the right
    /// edge; every remaining boundary edge is a wall.
    pub fn tee(nx: usize, ny: usize, nbx: usize, nby: usize, length: f64, height: f64) -> Result<Self> {
        if nx < 1 || ny < 1 || nbx < 1 || nby < 1 || length <= 0.0 || height <= 0.0 {
            return Err(FomError::BadParameter("tee needs positive cell counts and size".into()));
        }
        if nbx > nx || (nx - nbx) % 2 != 0 {
            return Err(FomError::BadParameter(
                "tee branch must be narrower than the channel and centered (nx - nbx even)".into(),
            ));
        }
        let dx = length / nx as f64;
        let dy = height / ny as f64;
        let i0 = (nx - nbx) / 2;
        let (vertices, triangles) =
            grid_cells(nx, ny + nby, dx, dy, |ci, cj| cj < ny || (ci >= i0 && ci < i0 + nbx));
        let tol = 1e-9 * dx;
        let top = (ny + nby) as f64 * dy;
        let tagged = tag_boundary(&vertices, &triangles, |mid| {
            if mid[0] < tol {
                BoundaryTag::In(1)
            } else if mid[1] > top - tol {
                BoundaryTag::In(2)
            } else if mid[0] > length - tol {
                BoundaryTag::Out
            } else {
                BoundaryTag::Wall
            }
        });
        Self::from_parts(vertices, triangles, tagged)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Scalar node count of the quadratic space: vertices plus midpoints.
    pub fn n_scalar_nodes(&self) -> usize {
        self.vertices.len() + self.midpoints.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertex(&self, i: usize) -> [f64; 2] {
        self.vertices[i]
    }

    /// Coordinates of a scalar node (vertex or midpoint).
    pub fn scalar_coord(&self, i: usize) -> [f64; 2] {
        if i < self.vertices.len() {
            self.vertices[i]
        } else {
            self.midpoints[i - self.vertices.len()]
        }
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// The six scalar nodes of a triangle: vertices, then midpoints of
    /// edges (0,1), (1,2), (2,0).
    pub fn tri_scalar(&self, t: usize) -> [usize; 6] {
        self.tri_nodes[t]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[t])
    }

    pub fn domain_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Number of weakly constrained boundaries (IN_1 … IN_{count}).
    pub fn dirichlet_count(&self) -> u8 {
        self.n_dirichlet
    }

    pub fn boundary_edges_of(&self, k: u8) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary.iter().filter(move |e| e.tag == BoundaryTag::In(k))
    }

    /// Sorted scalar node ids lying on wall edges (endpoints and midpoints).
    /// A corner shared with an inflow boundary counts as a wall node.
    pub fn wall_scalar_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .boundary
            .iter()
            .filter(|e| e.tag == BoundaryTag::Wall)
            .flat_map(|e| [e.a, e.b, e.mid])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Plain-text serialization: vertex coordinates, triangle vertex triples,
    /// and tagged boundary edges, each section introduced by a count line.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# 2D triangulation, quadratic nodes derived on load")?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(w, "{:e} {:e}", v[0], v[1])?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "boundary {}", self.boundary.len())?;
        for e in &self.boundary {
            writeln!(w, "{} {} {}", e.a, e.b, e.tag)?;
        }
        Ok(())
    }

    /// Reads the format written by [`Mesh2D::write_text`]. Comment lines
    /// start with `#`; blank lines are ignored.
    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut lines = r
            .lines()
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty() && !l.starts_with('#'));

        fn section(lines: &mut impl Iterator<Item = String>, name: &str) -> Result<usize> {
            let line = lines
                .next()
                .ok_or_else(|| FomError::Format(format!("missing section {name}")))?;
            let (head, count) = line
                .split_once(' ')
                .ok_or_else(|| FomError::Format(format!("bad section line: {line}")))?;
            if head != name {
                return Err(FomError::Format(format!("expected section {name}, found {head}")));
            }
            count
                .trim()
                .parse()
                .map_err(|_| FomError::Format(format!("bad count in section line: {line}")))
        }

        let nv = section(&mut lines, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| FomError::Format("truncated vertex section".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(FomError::Format(format!("bad vertex line: {line}")));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| FomError::Format(format!("bad coordinate in: {line}")))
            };
            vertices.push([parse(toks[0])?, parse(toks[1])?]);
        }

        let nt = section(&mut lines, "triangles")?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let line = lines.next().ok_or_else(|| FomError::Format("truncated triangle section".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(FomError::Format(format!("bad triangle line: {line}")));
            }
            let mut t = [0usize; 3];
            for (slot, tok) in t.iter_mut().zip(&toks) {
                *slot = tok
                    .parse()
                    .map_err(|_| FomError::Format(format!("bad vertex id in: {line}")))?;
            }
            triangles.push(t);
        }

        let nb = section(&mut lines, "boundary")?;
        let mut tagged = Vec::with_capacity(nb);
        for _ in 0..nb {
            let line = lines.next().ok_or_else(|| FomError::Format("truncated boundary section".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(FomError::Format(format!("bad boundary line: {line}")));
            }
            let a = toks[0].parse().map_err(|_| FomError::Format(format!("bad vertex id in: {line}")))?;
            let b = toks[1].parse().map_err(|_| FomError::Format(format!("bad vertex id in: {line}")))?;
            tagged.push((a, b, toks[2].parse::<BoundaryTag>()?));
        }

        Self::from_parts(vertices, triangles, tagged)
    }
}

/// Builds vertices and triangles over the cells of a structured grid for
/// which `include` holds. Vertex ids follow cell scan order (rows bottom-up),
/// each cell contributing its two diagonal-split triangles counterclockwise.
fn grid_cells(
    ncx: usize,
    ncy: usize,
    dx: f64,
    dy: f64,
    include: impl Fn(usize, usize) -> bool,
) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for cj in 0..ncy {
        for ci in 0..ncx {
            if !include(ci, cj) {
                continue;
            }
            let corners = [(ci, cj), (ci + 1, cj), (ci + 1, cj + 1), (ci, cj + 1)];
            let mut v = [0usize; 4];
            for (slot, &(i, j)) in v.iter_mut().zip(&corners) {
                *slot = *ids.entry((i, j)).or_insert_with(|| {
                    vertices.push([i as f64 * dx, j as f64 * dy]);
                    vertices.len() - 1
                });
            }
            triangles.push([v[0], v[1], v[2]]);
            triangles.push([v[0], v[2], v[3]]);
        }
    }
    (vertices, triangles)
}

/// Tags every topological boundary edge by its midpoint position, in
/// triangle scan order.
fn tag_boundary(
    vertices: &[[f64; 2]],
    triangles: &[[usize; 3]],
    tag: impl Fn([f64; 2]) -> BoundaryTag,
) -> Vec<(usize, usize, BoundaryTag)> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *count.entry(edge_key(a, b)).or_insert(0) += 1;
        }
    }
    let mut seen: Vec<(usize, usize)> = Vec::new();
    let mut tagged = Vec::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let key = edge_key(a, b);
            if count[&key] == 1 && !seen.contains(&key) {
                seen.push(key);
                let mid = [
                    0.5 * (vertices[a][0] + vertices[b][0]),
                    0.5 * (vertices[a][1] + vertices[b][1]),
                ];
                tagged.push((a, b, tag(mid)));
            }
        }
    }
    tagged
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn channel_counts_and_area() {
        let m = Mesh2D::channel(4, 3, 2.0, 1.0).unwrap();
        assert_eq!(m.n_vertices(), 5 * 4);
        assert_eq!(m.n_triangles(), 24);
        assert_eq!(m.n_scalar_nodes(), 9 * 7);
        assert_eq!(m.boundary().len(), 2 * (4 + 3));
        assert_relative_eq!(m.domain_area(), 2.0, epsilon = 1e-14);
        for t in 0..m.n_triangles() {
            assert!(m.triangle_area(t) > 0.0);
        }
    }

    #[test]
    fn channel_boundary_tags_by_side() {
        let m = Mesh2D::channel(4, 3, 2.0, 1.0).unwrap();
        let count = |tag| m.boundary().iter().filter(|e| e.tag == tag).count();
        assert_eq!(count(BoundaryTag::In(1)), 3);
        assert_eq!(count(BoundaryTag::Out), 3);
        assert_eq!(count(BoundaryTag::Wall), 8);
        assert_eq!(m.dirichlet_count(), 1);
    }

    #[test]
    fn boundary_edges_keep_domain_on_left() {
        let m = Mesh2D::channel(3, 2, 2.0, 1.0).unwrap();
        for e in m.boundary() {
            let (a, b) = (m.vertex(e.a), m.vertex(e.b));
            let inward = [-(b[1] - a[1]), b[0] - a[0]];
            let mid = m.scalar_coord(e.mid);
            // A short step along the inward normal must stay inside [0,2]x[0,1].
            let probe = [mid[0] + 1e-3 * inward[0], mid[1] + 1e-3 * inward[1]];
            assert!(probe[0] > 0.0 && probe[0] < 2.0 && probe[1] > 0.0 && probe[1] < 1.0);
        }
    }

    #[test]
    fn tee_counts_and_tags() {
        let m = Mesh2D::tee(8, 4, 2, 2, 2.0, 1.0).unwrap();
        assert_relative_eq!(m.domain_area(), 2.0 + 0.5 * 0.5, epsilon = 1e-14);
        assert_eq!(m.dirichlet_count(), 2);
        assert_eq!(m.boundary_edges_of(1).count(), 4);
        assert_eq!(m.boundary_edges_of(2).count(), 2);
        let walls = m.boundary().iter().filter(|e| e.tag == BoundaryTag::Wall).count();
        // Bottom 8, two top runs of 3, two branch sides of 2 each.
        assert_eq!(walls, 8 + 3 + 3 + 2 + 2);
    }

    #[test]
    fn wall_nodes_include_shared_corners_and_midpoints() {
        let m = Mesh2D::channel(2, 1, 2.0, 1.0).unwrap();
        let walls = m.wall_scalar_nodes();
        // Inlet corners sit on wall edges, so they are wall nodes.
        for target in [[0.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 1.0]] {
            assert!(
                walls.iter().any(|&n| {
                    let c = m.scalar_coord(n);
                    (c[0] - target[0]).abs() < 1e-12 && (c[1] - target[1]).abs() < 1e-12
                }),
                "missing wall node at {target:?}"
            );
        }
    }

    #[test]
    fn clockwise_triangle_is_rejected() {
        let err = Mesh2D::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 2, 1]],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, FomError::DegenerateTriangle { index: 0, .. }));
    }

    #[test]
    fn untagged_and_duplicate_edges_are_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let t = vec![[0usize, 1, 2]];
        let err = Mesh2D::from_parts(
            v.clone(),
            t.clone(),
            vec![(0, 1, BoundaryTag::Wall), (1, 2, BoundaryTag::Out)],
        )
        .unwrap_err();
        assert!(matches!(err, FomError::UntaggedBoundaryEdge { .. }));

        let err = Mesh2D::from_parts(
            v,
            t,
            vec![
                (0, 1, BoundaryTag::Wall),
                (1, 0, BoundaryTag::Wall),
                (1, 2, BoundaryTag::Out),
                (2, 0, BoundaryTag::In(1)),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, FomError::DuplicateTag { .. }));
    }

    #[test]
    fn inflow_numbering_must_be_consecutive() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh2D::from_parts(
            v,
            vec![[0, 1, 2]],
            vec![
                (0, 1, BoundaryTag::Wall),
                (1, 2, BoundaryTag::Out),
                (2, 0, BoundaryTag::In(2)),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, FomError::BoundaryNumbering { found: 2 }));
    }

    #[test]
    fn text_round_trip_preserves_everything() {
        let m = Mesh2D::tee(4, 2, 2, 1, 2.0, 1.0).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = Mesh2D::read_text(&mut buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn midpoint_numbering_is_shared_between_triangles() {
        let m = Mesh2D::channel(1, 1, 1.0, 1.0).unwrap();
        // Two triangles share the diagonal, so 2 triangles x 3 midpoints
        // minus 1 shared = 5 midpoints.
        assert_eq!(m.n_scalar_nodes(), 4 + 5);
        let t0 = m.tri_scalar(0);
        let t1 = m.tri_scalar(1);
        let shared: Vec<_> = t0[3..].iter().filter(|n| t1[3..].contains(n)).collect();
        assert_eq!(shared.len(), 1);
    }
}
