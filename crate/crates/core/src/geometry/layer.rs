use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::param::BoundaryParam;
use super::polygon::CurvilinearPolygon;
use super::vec2::Vec2;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Boundary-layer constants: depth `c₀ε|log ε|`, corner-cell half-width
/// `c₁ε|log ε|` in arc length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec<T> {
    pub epsilon: T,
    pub c0: T,
    pub c1: T,
}

impl<T: Real> LayerSpec<T> {
    pub fn new(epsilon: T, c0: T, c1: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(Error::Parameter(format!("epsilon must lie in (0,1), got {epsilon}")));
        }
        if !(c0 > T::zero()) || !(c1 > T::zero()) {
            return Err(Error::Parameter(format!("c0 and c1 must be positive, got {c0}, {c1}")));
        }
        Ok(Self { epsilon, c0, c1 })
    }

    /// `|log ε|`.
    pub fn log_factor(&self) -> T {
        self.epsilon.ln().abs()
    }

    /// `τ_layer = c₀ε|log ε|`.
    pub fn layer_depth(&self) -> T {
        self.c0 * self.epsilon * self.log_factor()
    }

    /// `c₁ε|log ε|`.
    pub fn cell_halfwidth(&self) -> T {
        self.c1 * self.epsilon * self.log_factor()
    }

    /// `|∂Ω_cut| = |∂Ω| − 2Nc₁ε|log ε|`.
    pub fn cut_perimeter(&self, param: &BoundaryParam<T>) -> T {
        param.total_length - T::lit(2.0) * T::from_usize_lossy(param.corners.len()) * self.cell_halfwidth()
    }

    /// Checks that boundary coordinates are a diffeomorphism on the cut
    /// layer: cells cover the corner wedges, cells do not overlap, and normal
    /// fibres of length `τ_layer` stay closest to their foot point.
    pub fn validate(&self, domain: &CurvilinearPolygon<T>, param: &BoundaryParam<T>) -> Result<()> {
        let tau = self.layer_depth();
        let w = self.cell_halfwidth();
        for c in &param.corners {
            if !c.is_reflex() {
                let need = self.c0 / (T::lit(0.5) * c.angle).tan();
                if self.c1 < need * (T::one() - T::lit(1e-12)) {
                    return Err(Error::Geometry(format!(
                        "c1 = {} is below c0·cot(α/2) = {need} at corner {}",
                        self.c1, c.vertex
                    )));
                }
            }
        }
        let k = param.corners.len();
        for i in 0..k {
            let a = param.corners[i].sigma;
            let b = if i + 1 < k {
                param.corners[i + 1].sigma
            } else {
                param.corners[0].sigma + param.total_length
            };
            if b - a <= T::lit(2.0) * w {
                return Err(Error::Resolution(format!(
                    "corner cells overlap: corners {} and {} are {} apart, cells need {}",
                    param.corners[i].vertex,
                    param.corners[(i + 1) % k].vertex,
                    b - a,
                    T::lit(2.0) * w
                )));
            }
        }
        for p in &param.pieces {
            if p.curvature() < T::zero() && T::one() / p.curvature().abs() <= tau {
                return Err(Error::Resolution("concave arc radius below the layer depth".into()));
            }
        }
        let samples = 4096;
        for i in 0..samples {
            let sigma = param.total_length * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
            if param.corner_distance(sigma) < w {
                continue;
            }
            let q = param.point_at(sigma, tau);
            let d = super::polygon::dist_to_boundary(domain, q);
            if !domain.contains(q) || d < tau * (T::one() - T::lit(1e-9)) {
                return Err(Error::Resolution(format!(
                    "boundary layers overlap: the normal fibre at σ = {sigma} meets another part of the boundary before depth {tau}"
                )));
            }
        }
        Ok(())
    }
}

/// Cell-centred uniform raster over a box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Raster<T> {
    pub origin: Vec2<T>,
    pub nx: usize,
    pub ny: usize,
    pub hx: T,
    pub hy: T,
}

impl<T: Real> Raster<T> {
    pub fn new(lo: Vec2<T>, hi: Vec2<T>, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 || !(hi.x > lo.x) || !(hi.y > lo.y) {
            return Err(Error::InvalidInput(
                "raster needs a nondegenerate box and at least 2×2 cells".into(),
            ));
        }
        Ok(Self {
            origin: lo,
            nx,
            ny,
            hx: (hi.x - lo.x) / T::from_usize_lossy(nx),
            hy: (hi.y - lo.y) / T::from_usize_lossy(ny),
        })
    }

    /// Raster on the bounding box of `domain` with `n` cells along its longer
    /// side and square cells.
    pub fn covering(domain: &CurvilinearPolygon<T>, n: usize) -> Result<Self> {
        let (lo, hi) = domain.bbox();
        let w = hi.x - lo.x;
        let h = hi.y - lo.y;
        let (nx, ny) = if w >= h {
            (
                n,
                (T::from_usize_lossy(n) * h / w).round().to_usize().unwrap_or(2).max(2),
            )
        } else {
            (
                (T::from_usize_lossy(n) * w / h).round().to_usize().unwrap_or(2).max(2),
                n,
            )
        };
        Self::new(lo, hi, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2<T> {
        Vec2::new(
            self.origin.x + (T::from_usize_lossy(i) + T::lit(0.5)) * self.hx,
            self.origin.y + (T::from_usize_lossy(j) + T::lit(0.5)) * self.hy,
        )
    }

    pub fn cell_area(&self) -> T {
        self.hx * self.hy
    }

    pub fn upper(&self) -> Vec2<T> {
        Vec2::new(
            self.origin.x + T::from_usize_lossy(self.nx) * self.hx,
            self.origin.y + T::from_usize_lossy(self.ny) * self.hy,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Outside,
    Bulk,
    /// Boundary layer minus the corner cells.
    Cut,
    /// Corner cell of corner `j` (index into `BoundaryParam::corners`).
    Corner(usize),
}

impl Region {
    /// Integer code for CSV export: 0 outside, 1 bulk, 2 cut, 3 + j corner j.
    pub fn code(self) -> i64 {
        match self {
            Region::Outside => 0,
            Region::Bulk => 1,
            Region::Cut => 2,
            Region::Corner(j) => 3 + j as i64,
        }
    }

    pub fn is_inside(self) -> bool {
        self != Region::Outside
    }

    pub fn in_layer(self) -> bool {
        matches!(self, Region::Cut | Region::Corner(_))
    }
}

#[derive(Clone, Debug)]
pub struct RegionStats<T> {
    pub domain_area: T,
    pub bulk_area: T,
    /// `|A_ε|`.
    pub layer_area: T,
    /// `|A_cut|`.
    pub cut_area: T,
    /// `|C_j|` per corner.
    pub corner_areas: Vec<T>,
    /// `4c₀c₁Nε²|log ε|²`.
    pub corner_area_bound: T,
}

impl<T: Real> RegionStats<T> {
    pub fn corner_total(&self) -> T {
        self.corner_areas.iter().copied().sum()
    }

    /// `Σ|C_j| / (ε²|log ε|²)`, bounded along an ε-sweep.
    pub fn corner_area_ratio(&self, spec: &LayerSpec<T>) -> T {
        let l = spec.epsilon * spec.log_factor();
        self.corner_total() / (l * l)
    }
}

/// Per-cell partition of a raster into outside, bulk, cut layer and corner
/// cells.
#[derive(Clone, Debug)]
pub struct RegionMask<T> {
    pub raster: Raster<T>,
    pub regions: Vec<Region>,
    /// Distance to the boundary, positive inside.
    pub signed_dist: Vec<T>,
    /// Arc length of the nearest boundary point.
    pub sigma: Vec<T>,
    pub stats: RegionStats<T>,
}

impl<T: Real> RegionMask<T> {
    pub fn region(&self, i: usize, j: usize) -> Region {
        self.regions[self.raster.idx(i, j)]
    }

    /// Integer-coded CSV with one line per raster row, bottom row first.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.raster.ny {
            let row: Vec<String> = (0..self.raster.nx)
                .map(|i| self.region(i, j).code().to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn classify_regions<T: Real>(
    domain: &CurvilinearPolygon<T>,
    raster: &Raster<T>,
    spec: &LayerSpec<T>,
) -> Result<RegionMask<T>> {
    let param = domain.build_boundary_param();
    let tau = spec.layer_depth();
    let cells_across = tau / raster.hx.max(raster.hy);
    if cells_across < T::lit(8.0) {
        return Err(Error::Resolution(format!(
            "only {cells_across} cells across the layer depth {tau}; need at least 8"
        )));
    }
    spec.validate(domain, &param)?;
    let w = spec.cell_halfwidth();
    let per_row: Vec<Vec<(Region, T, T)>> = (0..raster.ny)
        .into_par_iter()
        .map(|j| {
            (0..raster.nx)
                .map(|i| {
                    let p = raster.center(i, j);
                    let near = param.nearest(p);
                    if !domain.contains(p) {
                        return (Region::Outside, -near.dist, near.sigma);
                    }
                    let region = if near.dist > tau {
                        Region::Bulk
                    } else if param.corner_distance(near.sigma) < w {
                        Region::Corner(nearest_corner(&param, near.sigma))
                    } else {
                        Region::Cut
                    };
                    (region, near.dist, near.sigma)
                })
                .collect()
        })
        .collect();

    let n = raster.len();
    let mut regions = Vec::with_capacity(n);
    let mut signed_dist = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for row in per_row {
        for (r, d, s) in row {
            regions.push(r);
            signed_dist.push(d);
            sigma.push(s);
        }
    }

    let da = raster.cell_area();
    let count = |pred: &dyn Fn(Region) -> bool| T::from_usize_lossy(regions.iter().filter(|&&r| pred(r)).count()) * da;
    let corner_areas: Vec<T> = (0..param.corners.len())
        .map(|j| count(&|r| r == Region::Corner(j)))
        .collect();
    let l = spec.epsilon * spec.log_factor();
    let stats = RegionStats {
        domain_area: count(&|r| r.is_inside()),
        bulk_area: count(&|r| r == Region::Bulk),
        layer_area: count(&|r| r.in_layer()),
        cut_area: count(&|r| r == Region::Cut),
        corner_areas,
        corner_area_bound: T::lit(4.0) * spec.c0 * spec.c1 * T::from_usize_lossy(param.corners.len()) * l * l,
    };
    if stats.corner_total() > stats.corner_area_bound {
        return Err(Error::Geometry(format!(
            "corner cells cover {} which exceeds 4c0c1Nε²|log ε|² = {}",
            stats.corner_total(),
            stats.corner_area_bound
        )));
    }
    Ok(RegionMask {
        raster: *raster,
        regions,
        signed_dist,
        sigma,
        stats,
    })
}

fn nearest_corner<T: Real>(param: &BoundaryParam<T>, sigma: T) -> usize {
    let l = param.total_length;
    let mut best = (0, T::infinity());
    for (j, c) in param.corners.iter().enumerate() {
        let d = (sigma - c.sigma).abs();
        let d = d.min(l - d);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Smoothstep ramp position in `[0,1]` and the sign of `d(dist)/ds`.
fn ramp<T: Real>(param: &BoundaryParam<T>, spec: &LayerSpec<T>, s: T) -> (T, T, T) {
    let eps = spec.epsilon;
    let width = spec.c1 * spec.log_factor();
    let sigma = param.wrap(s * eps);
    let l = param.total_length;
    let mut best = (T::infinity(), T::one());
    for c in &param.corners {
        let raw = sigma - c.sigma;
        let (d, sign) = if raw.abs() <= l - raw.abs() {
            (raw.abs(), raw.signum())
        } else {
            (l - raw.abs(), -raw.signum())
        };
        if d < best.0 {
            best = (d, sign);
        }
    }
    let dist = best.0 / eps;
    let x = ((dist - width) / width).max(T::zero()).min(T::one());
    (x, best.1, width)
}

/// Cut-off `χ(s)`: 0 within `c₁|log ε|` of a corner (rescaled arc length),
/// 1 beyond `2c₁|log ε|`, a smoothstep in between.
pub fn cutoff_chi<T: Real>(param: &BoundaryParam<T>, spec: &LayerSpec<T>, s: T) -> T {
    let (x, _, _) = ramp(param, spec, s);
    x * x * (T::lit(3.0) - T::lit(2.0) * x)
}

/// `dχ/ds`.
pub fn cutoff_chi_derivative<T: Real>(param: &BoundaryParam<T>, spec: &LayerSpec<T>, s: T) -> T {
    let (x, sign, width) = ramp(param, spec, s);
    T::lit(6.0) * x * (T::one() - x) / width * sign
}
