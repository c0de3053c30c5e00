//! Corner domains, arc-length boundary coordinates, the boundary layer and
//! its corner cells.
//!
//! Near a smooth piece of the boundary a point is written `γ(σ) + τ ν(σ)`
//! with `ν` the inward normal; the rescaled coordinates are `s = σ/ε`,
//! `t = τ/ε`. Within `c₁ε|log ε|` (in `σ`) of a corner those coordinates are
//! not used; that neighbourhood, cut to depth `c₀ε|log ε|`, is the corner cell.

mod layer;
mod param;
mod polygon;
mod vec2;

pub use layer::{
    classify_regions, cutoff_chi, cutoff_chi_derivative, LayerSpec, Raster, Region, RegionMask, RegionStats,
};
pub use param::{BoundaryParam, Corner, Nearest, Piece, PieceKind};
pub use polygon::{dist_to_boundary, signed_distance, CurvilinearPolygon, EdgeShape};
pub use vec2::Vec2;

use crate::scalar::Real;

/// Rescaled boundary coordinates `(s, t) = (σ/ε, τ/ε)` of a point in the cut
/// layer, or `None` anywhere else (corner cells, bulk, outside `Ω`).
pub fn boundary_coords<T: Real>(
    domain: &CurvilinearPolygon<T>,
    param: &BoundaryParam<T>,
    point: Vec2<T>,
    spec: &LayerSpec<T>,
) -> Option<(T, T)> {
    if !domain.contains(point) {
        return None;
    }
    param.cut_coords(point, spec)
}
