use super::layer::LayerSpec;
use super::polygon::CurvilinearPolygon;
use super::vec2::Vec2;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PieceKind<T> {
    Line {
        dir: Vec2<T>,
    },
    /// Signed radius: positive when the centre lies inside the domain (the
    /// arc bulges outwards), negative for a concave arc.
    Arc {
        center: Vec2<T>,
        radius: T,
        theta0: T,
    },
}

/// One smooth piece of the boundary, traversed counterclockwise and
/// parametrized by arc length from `sigma0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece<T> {
    pub kind: PieceKind<T>,
    pub start: Vec2<T>,
    pub end: Vec2<T>,
    pub length: T,
    pub sigma0: T,
}

/// Closest boundary point to a query point.
#[derive(Clone, Copy, Debug)]
pub struct Nearest<T> {
    pub piece: usize,
    /// Global arc length of the closest point.
    pub sigma: T,
    pub dist: T,
    /// The closest point is an endpoint of its piece.
    pub at_end: bool,
}

impl<T: Real> Piece<T> {
    pub(crate) fn line(start: Vec2<T>, end: Vec2<T>, sigma0: T) -> Self {
        let d = end - start;
        let length = d.norm();
        Self {
            kind: PieceKind::Line {
                dir: d.scale(T::one() / length),
            },
            start,
            end,
            length,
            sigma0,
        }
    }

    /// Minor arc from `start` to `end`; `None` if the chord exceeds the diameter.
    pub(crate) fn arc(start: Vec2<T>, end: Vec2<T>, radius: T, sigma0: T) -> Option<Self> {
        let chord = end - start;
        let d = chord.norm();
        let r = radius.abs();
        if !(d > T::zero()) || d > T::lit(2.0) * r {
            return None;
        }
        let mid = (start + end).scale(T::lit(0.5));
        let left = chord.perp().unit();
        let off = (r * r - T::lit(0.25) * d * d).max(T::zero()).sqrt();
        let center = if radius > T::zero() {
            mid + left.scale(off)
        } else {
            mid - left.scale(off)
        };
        let span = T::lit(2.0) * (d / (T::lit(2.0) * r)).min(T::one()).asin();
        let theta0 = (start - center).angle();
        Some(Self {
            kind: PieceKind::Arc { center, radius, theta0 },
            start,
            end,
            length: r * span,
            sigma0,
        })
    }

    pub fn curvature(&self) -> T {
        match self.kind {
            PieceKind::Line { .. } => T::zero(),
            PieceKind::Arc { radius, .. } => T::one() / radius,
        }
    }

    /// Point at local arc length `u ∈ [0, length]`.
    pub fn point(&self, u: T) -> Vec2<T> {
        match self.kind {
            PieceKind::Line { dir } => self.start + dir.scale(u),
            PieceKind::Arc { center, radius, theta0 } => {
                center + Vec2::from_angle(theta0 + u / radius).scale(radius.abs())
            }
        }
    }

    pub fn tangent(&self, u: T) -> Vec2<T> {
        match self.kind {
            PieceKind::Line { dir } => dir,
            PieceKind::Arc { radius, theta0, .. } => {
                Vec2::from_angle(theta0 + u / radius).perp().scale(radius.signum())
            }
        }
    }

    /// Inward unit normal (left of the tangent).
    pub fn normal(&self, u: T) -> Vec2<T> {
        self.tangent(u).perp()
    }

    /// Local arc length and distance of the closest point of this piece.
    pub fn nearest(&self, p: Vec2<T>) -> (T, T, bool) {
        match self.kind {
            PieceKind::Line { dir } => {
                let lam = (p - self.start).dot(dir);
                if lam <= T::zero() {
                    (T::zero(), (p - self.start).norm(), true)
                } else if lam >= self.length {
                    (self.length, (p - self.end).norm(), true)
                } else {
                    (lam, (p - self.start).cross(dir).abs(), false)
                }
            }
            PieceKind::Arc { center, radius, theta0 } => {
                let r = radius.abs();
                let q = p - center;
                let rho = q.norm();
                if rho > T::zero() {
                    let two_pi = T::PI() + T::PI();
                    let mut u = (q.angle() - theta0) * radius.signum();
                    u = u - two_pi * (u / two_pi).floor();
                    let arc_u = u * r;
                    if arc_u <= self.length {
                        return (arc_u, (rho - r).abs(), false);
                    }
                }
                let d0 = (p - self.start).norm();
                let d1 = (p - self.end).norm();
                if d0 <= d1 {
                    (T::zero(), d0, true)
                } else {
                    (self.length, d1, true)
                }
            }
        }
    }
}

/// A corner of the boundary: a junction where the tangent jumps.
#[derive(Clone, Copy, Debug)]
pub struct Corner<T> {
    pub vertex: usize,
    pub sigma: T,
    /// Interior opening angle `α_j ∈ (0, 2π) ∖ {π}`.
    pub angle: T,
    pub point: Vec2<T>,
}

impl<T: Real> Corner<T> {
    pub fn is_reflex(&self) -> bool {
        self.angle > T::PI()
    }
}

/// Arc-length parametrization of the boundary.
#[derive(Clone, Debug)]
pub struct BoundaryParam<T> {
    pub total_length: T,
    pub pieces: Vec<Piece<T>>,
    pub corners: Vec<Corner<T>>,
}

impl<T: Real> BoundaryParam<T> {
    pub fn build(domain: &CurvilinearPolygon<T>) -> Self {
        Self {
            total_length: domain.perimeter(),
            pieces: domain.pieces().to_vec(),
            corners: domain.corners().to_vec(),
        }
    }

    pub fn wrap(&self, sigma: T) -> T {
        let l = self.total_length;
        let w = sigma - l * (sigma / l).floor();
        if w >= l {
            T::zero()
        } else {
            w
        }
    }

    /// Index of the piece containing `σ`, right-continuous at junctions.
    pub fn piece_at(&self, sigma: T) -> usize {
        let s = self.wrap(sigma);
        match self.pieces.iter().rposition(|p| p.sigma0 <= s) {
            Some(k) => k,
            None => 0,
        }
    }

    fn local(&self, sigma: T) -> (&Piece<T>, T) {
        let k = self.piece_at(sigma);
        let p = &self.pieces[k];
        (p, (self.wrap(sigma) - p.sigma0).min(p.length))
    }

    pub fn gamma(&self, sigma: T) -> Vec2<T> {
        let (p, u) = self.local(sigma);
        p.point(u)
    }

    /// Unit tangent; at a corner the limit from the right.
    pub fn tangent(&self, sigma: T) -> Vec2<T> {
        let (p, u) = self.local(sigma);
        p.tangent(u)
    }

    pub fn normal(&self, sigma: T) -> Vec2<T> {
        let (p, u) = self.local(sigma);
        p.normal(u)
    }

    /// Signed curvature, positive where the domain is locally convex.
    pub fn curvature(&self, sigma: T) -> T {
        self.local(sigma).0.curvature()
    }

    pub fn curvature_sup(&self) -> T {
        self.pieces.iter().fold(T::zero(), |m, p| m.max(p.curvature().abs()))
    }

    /// `γ(σ) + τ ν(σ)`.
    pub fn point_at(&self, sigma: T, tau: T) -> Vec2<T> {
        let (p, u) = self.local(sigma);
        p.point(u) + p.normal(u).scale(tau)
    }

    /// Periodic distance in `σ` to the nearest corner.
    pub fn corner_distance(&self, sigma: T) -> T {
        let s = self.wrap(sigma);
        let l = self.total_length;
        self.corners.iter().fold(T::infinity(), |m, c| {
            let d = (s - c.sigma).abs();
            m.min(d.min(l - d))
        })
    }

    pub fn nearest(&self, p: Vec2<T>) -> Nearest<T> {
        let mut best = Nearest {
            piece: 0,
            sigma: T::zero(),
            dist: T::infinity(),
            at_end: false,
        };
        for (k, piece) in self.pieces.iter().enumerate() {
            let (u, d, at_end) = piece.nearest(p);
            if d < best.dist {
                best = Nearest {
                    piece: k,
                    sigma: self.wrap(piece.sigma0 + u),
                    dist: d,
                    at_end,
                };
            }
        }
        best
    }

    /// `(σ, τ)` of a point in the cut layer: nearest point unique-enough and
    /// on a smooth piece, depth at most `τ_layer`, away from every corner by
    /// at least the cell half-width. The caller guarantees `p ∈ Ω`.
    pub fn cut_coords_unscaled(&self, p: Vec2<T>, spec: &LayerSpec<T>) -> Option<(T, T)> {
        let n = self.nearest(p);
        if n.dist > spec.layer_depth() {
            return None;
        }
        if self.corner_distance(n.sigma) < spec.cell_halfwidth() {
            return None;
        }
        Some((n.sigma, n.dist))
    }

    /// Arc-length intervals `[σ_j + w, σ_{j+1} − w]` between consecutive
    /// corners, `w` the cell half-width. The last one may run past
    /// `total_length`; evaluation wraps.
    pub fn cut_intervals(&self, spec: &LayerSpec<T>) -> Vec<(T, T)> {
        let w = spec.cell_halfwidth();
        let n = self.corners.len();
        (0..n)
            .filter_map(|j| {
                let a = self.corners[j].sigma + w;
                let next = if j + 1 < n {
                    self.corners[j + 1].sigma
                } else {
                    self.corners[0].sigma + self.total_length
                };
                let b = next - w;
                (b > a).then_some((a, b))
            })
            .collect()
    }

    pub fn cut_coords(&self, p: Vec2<T>, spec: &LayerSpec<T>) -> Option<(T, T)> {
        self.cut_coords_unscaled(p, spec)
            .map(|(s, t)| (s / spec.epsilon, t / spec.epsilon))
    }
}
