use serde::{Deserialize, Serialize};

use super::param::{BoundaryParam, Corner, Piece, PieceKind};
use super::vec2::Vec2;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of the edge leaving a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EdgeShape<T> {
    Line,
    /// Minor circular arc with signed radius (positive bulges outwards).
    Arc {
        radius: T,
    },
}

/// Simple closed curvilinear polygon, counterclockwise, with at least one
/// corner.
#[derive(Clone, Debug)]
pub struct CurvilinearPolygon<T> {
    vertices: Vec<Vec2<T>>,
    edges: Vec<EdgeShape<T>>,
    pieces: Vec<Piece<T>>,
    corners: Vec<Corner<T>>,
    perimeter: T,
}

const JUNCTION_TOL: f64 = 1e-9;

impl<T: Real> CurvilinearPolygon<T> {
    /// Edge `k` joins vertex `k` to vertex `k+1` (cyclically).
    pub fn new(vertices: Vec<Vec2<T>>, edges: Vec<EdgeShape<T>>) -> Result<Self> {
        let n = vertices.len();
        if n < 2 || edges.len() != n {
            return Err(Error::Geometry(format!(
                "need at least two vertices and one edge per vertex, got {n} vertices and {} edges",
                edges.len()
            )));
        }
        let mut pieces = Vec::with_capacity(n);
        let mut sigma = T::zero();
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            if (b - a).norm() <= T::epsilon() {
                return Err(Error::Geometry(format!("edge {k} has zero length")));
            }
            let piece = match edges[k] {
                EdgeShape::Line => Piece::line(a, b, sigma),
                EdgeShape::Arc { radius } => Piece::arc(a, b, radius, sigma)
                    .ok_or_else(|| Error::Geometry(format!("arc {k}: chord longer than its diameter")))?,
            };
            sigma = sigma + piece.length;
            pieces.push(piece);
        }
        let perimeter = sigma;

        let mut corners = Vec::new();
        for k in 0..n {
            let incoming = &pieces[(k + n - 1) % n];
            let t_in = incoming.tangent(incoming.length);
            let t_out = pieces[k].tangent(T::zero());
            let turn = t_in.cross(t_out).atan2(t_in.dot(t_out));
            if (T::PI() - turn.abs()).abs() < T::lit(JUNCTION_TOL) {
                return Err(Error::Geometry(format!("cusp at vertex {k}")));
            }
            if turn.abs() > T::lit(JUNCTION_TOL) {
                corners.push(Corner {
                    vertex: k,
                    sigma: pieces[k].sigma0,
                    angle: T::PI() - turn,
                    point: vertices[k],
                });
            }
        }
        if corners.is_empty() {
            return Err(Error::Geometry("boundary has no corners".into()));
        }

        let poly = Self {
            vertices,
            edges,
            pieces,
            corners,
            perimeter,
        };
        if poly.signed_area() <= T::zero() {
            return Err(Error::Geometry("boundary is not counterclockwise".into()));
        }
        poly.check_simple()?;
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeShape<T>] {
        &self.edges
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn corners(&self) -> &[Corner<T>] {
        &self.corners
    }

    pub fn perimeter(&self) -> T {
        self.perimeter
    }

    pub fn build_boundary_param(&self) -> BoundaryParam<T> {
        BoundaryParam::build(self)
    }

    /// Unit square `[0,1]²`.
    pub fn unit_square() -> Self {
        Self::polygon(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).expect("valid square")
    }

    /// L-shaped hexomino domain with its reflex corner at `(1,1)`.
    pub fn l_shape() -> Self {
        Self::polygon(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]).expect("valid L shape")
    }

    /// Unit square whose corner at `(1,1)` is rounded with radius `r`.
    pub fn rounded_square(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Geometry(format!("rounding radius must lie in (0,1), got {r}")));
        }
        let v = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0 - r), (1.0 - r, 1.0), (0.0, 1.0)];
        let vertices = v.iter().map(|&(x, y)| Vec2::from_f64(x, y)).collect();
        let mut edges = vec![EdgeShape::Line; 5];
        edges[2] = EdgeShape::Arc { radius: T::lit(r) };
        Self::new(vertices, edges)
    }

    /// Straight-edged polygon from coordinate pairs.
    pub fn polygon(points: &[(f64, f64)]) -> Result<Self> {
        let vertices = points.iter().map(|&(x, y)| Vec2::from_f64(x, y)).collect();
        Self::new(vertices, vec![EdgeShape::Line; points.len()])
    }

    /// Named test domains: `square`, `L`, `rounded-square`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "square" => Ok(Self::unit_square()),
            "L" | "l" | "l-shape" => Ok(Self::l_shape()),
            "rounded-square" => Self::rounded_square(0.25),
            other => Err(Error::InvalidInput(format!("unknown domain '{other}'"))),
        }
    }

    /// Area of the circular segment between an arc and its chord.
    fn segment_area(piece: &Piece<T>) -> T {
        match piece.kind {
            PieceKind::Line { .. } => T::zero(),
            PieceKind::Arc { radius, .. } => {
                let r = radius.abs();
                let span = piece.length / r;
                T::lit(0.5) * r * r * (span - span.sin()) * radius.signum()
            }
        }
    }

    pub fn signed_area(&self) -> T {
        let n = self.vertices.len();
        let mut a = T::zero();
        for k in 0..n {
            a = a + self.vertices[k].cross(self.vertices[(k + 1) % n]);
        }
        T::lit(0.5) * a + self.pieces.iter().map(Self::segment_area).sum::<T>()
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Vec2<T> {
        let n = self.vertices.len();
        let mut cx = T::zero();
        let mut cy = T::zero();
        let mut a2 = T::zero();
        for k in 0..n {
            let p = self.vertices[k];
            let q = self.vertices[(k + 1) % n];
            let c = p.cross(q);
            a2 = a2 + c;
            cx = cx + (p.x + q.x) * c;
            cy = cy + (p.y + q.y) * c;
        }
        let poly_area = T::lit(0.5) * a2;
        let mut mx = cx / T::lit(6.0);
        let mut my = cy / T::lit(6.0);
        let mut total = poly_area;
        for piece in &self.pieces {
            if let PieceKind::Arc { center, radius, .. } = piece.kind {
                let r = radius.abs();
                let span = piece.length / r;
                let seg = Self::segment_area(piece);
                let dist = T::lit(4.0) * r * (T::lit(0.5) * span).sin().powi(3) / (T::lit(3.0) * (span - span.sin()));
                let mid = piece.point(T::lit(0.5) * piece.length);
                let dir = (mid - center).unit();
                let c = center + dir.scale(dist);
                mx = mx + c.x * seg;
                my = my + c.y * seg;
                total = total + seg;
            }
        }
        Vec2::new(mx / total, my / total)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Vec2<T>, Vec2<T>) {
        let mut lo = Vec2::new(T::infinity(), T::infinity());
        let mut hi = Vec2::new(T::neg_infinity(), T::neg_infinity());
        for piece in &self.pieces {
            for p in self.sample_piece(piece, 64) {
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        (lo, hi)
    }

    fn sample_piece(&self, piece: &Piece<T>, m: usize) -> Vec<Vec2<T>> {
        match piece.kind {
            PieceKind::Line { .. } => vec![piece.start, piece.end],
            PieceKind::Arc { .. } => (0..=m)
                .map(|i| piece.point(piece.length * T::from_usize_lossy(i) / T::from_usize_lossy(m)))
                .collect(),
        }
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.pieces.len();
        let polylines: Vec<Vec<Vec2<T>>> = self.pieces.iter().map(|p| self.sample_piece(p, 64)).collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                for (a, sa) in polylines[i].windows(2).enumerate() {
                    for (b, sb) in polylines[j].windows(2).enumerate() {
                        // Skip the shared vertex of adjacent pieces.
                        if adjacent {
                            let last_a = a + 2 == polylines[i].len();
                            let last_b = b + 2 == polylines[j].len();
                            if (j == i + 1 && last_a && b == 0) || (i == 0 && j == n - 1 && a == 0 && last_b) {
                                continue;
                            }
                        }
                        if segments_intersect(sa[0], sa[1], sb[0], sb[1]) {
                            return Err(Error::Geometry(format!("edges {i} and {j} intersect")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Winding number of the boundary around `p`: chord polygon plus the
    /// circular segments cut off by each arc.
    pub fn winding(&self, p: Vec2<T>) -> i32 {
        let n = self.vertices.len();
        let mut total = T::zero();
        for k in 0..n {
            let a = self.vertices[k] - p;
            let b = self.vertices[(k + 1) % n] - p;
            total = total + a.cross(b).atan2(a.dot(b));
        }
        let mut w = (total / (T::PI() + T::PI())).round().to_i32().unwrap_or(0);
        for piece in &self.pieces {
            if let PieceKind::Arc { center, radius, .. } = piece.kind {
                let chord = piece.end - piece.start;
                let inside_circle = (p - center).norm() < radius.abs();
                // Convex arcs bulge to the right of the chord, concave ones to the left.
                let side = chord.cross(p - piece.start);
                let beyond_chord = if radius > T::zero() {
                    side < T::zero()
                } else {
                    side > T::zero()
                };
                if inside_circle && beyond_chord {
                    w += if radius > T::zero() { 1 } else { -1 };
                }
            }
        }
        w
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        self.winding(p) != 0
    }
}

fn segments_intersect<T: Real>(p1: Vec2<T>, p2: Vec2<T>, q1: Vec2<T>, q2: Vec2<T>) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if ((d1 > T::zero() && d2 < T::zero()) || (d1 < T::zero() && d2 > T::zero()))
        && ((d3 > T::zero() && d4 < T::zero()) || (d3 < T::zero() && d4 > T::zero()))
    {
        return true;
    }
    let on = |a: Vec2<T>, b: Vec2<T>, c: Vec2<T>, d: T| {
        d == T::zero() && c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4)
}

/// Euclidean distance from `p` to the boundary.
pub fn dist_to_boundary<T: Real>(domain: &CurvilinearPolygon<T>, p: Vec2<T>) -> T {
    domain
        .pieces
        .iter()
        .fold(T::infinity(), |m, piece| m.min(piece.nearest(p).1))
}

/// Distance to the boundary, positive inside.
pub fn signed_distance<T: Real>(domain: &CurvilinearPolygon<T>, p: Vec2<T>) -> T {
    let d = dist_to_boundary(domain, p);
    if domain.contains(p) {
        d
    } else {
        -d
    }
}
