use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{
    classify_regions, BoundaryParam, CurvilinearPolygon, LayerSpec, Raster, Region, RegionMask, Vec2,
};
use crate::scalar::Real;

/// Cell-centred grid over the bounding box of a domain with the geometric
/// data the solver and the diagnostics need per cell.
#[derive(Clone, Debug)]
pub struct Grid2D<T> {
    pub raster: Raster<T>,
    pub domain: CurvilinearPolygon<T>,
    pub param: BoundaryParam<T>,
    pub spec: LayerSpec<T>,
    pub centroid: Vec2<T>,
    /// Cell centre inside `Ω`.
    pub active: Vec<bool>,
    pub regions: Vec<Region>,
    /// Signed distance to `∂Ω`, positive inside.
    pub dist: Vec<T>,
    /// Arc length of the nearest boundary point.
    pub sigma: Vec<T>,
}

impl<T: Real> Grid2D<T> {
    /// `n` cells along the longer side of the bounding box; fails unless the
    /// layer spec is admissible and at least 8 cells span the layer depth.
    pub fn new(domain: &CurvilinearPolygon<T>, n: usize, spec: LayerSpec<T>) -> Result<Self> {
        let raster = Raster::covering(domain, n)?;
        let mask = classify_regions(domain, &raster, &spec)?;
        Ok(Self::from_mask(domain, mask, spec))
    }

    pub fn from_mask(domain: &CurvilinearPolygon<T>, mask: RegionMask<T>, spec: LayerSpec<T>) -> Self {
        let active = mask.regions.iter().map(|r| r.is_inside()).collect();
        Self {
            raster: mask.raster,
            domain: domain.clone(),
            param: domain.build_boundary_param(),
            spec,
            centroid: domain.centroid(),
            active,
            regions: mask.regions,
            dist: mask.signed_dist,
            sigma: mask.sigma,
        }
    }

    pub fn nx(&self) -> usize {
        self.raster.nx
    }

    pub fn ny(&self) -> usize {
        self.raster.ny
    }

    pub fn len(&self) -> usize {
        self.raster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raster.is_empty()
    }

    pub fn cell_area(&self) -> T {
        self.raster.cell_area()
    }

    pub fn center(&self, k: usize) -> Vec2<T> {
        self.raster.center(k % self.raster.nx, k / self.raster.nx)
    }

    /// Largest spacing.
    pub fn h(&self) -> T {
        self.raster.hx.max(self.raster.hy)
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Horizontal link from cell `k` to `k + 1` with both ends active.
    #[inline]
    pub fn has_xlink(&self, k: usize) -> bool {
        (k % self.raster.nx) + 1 < self.raster.nx && self.active[k] && self.active[k + 1]
    }

    /// Vertical link from cell `k` to `k + nx` with both ends active.
    #[inline]
    pub fn has_ylink(&self, k: usize) -> bool {
        k + self.raster.nx < self.len() && self.active[k] && self.active[k + self.raster.nx]
    }
}

/// Complex field on a [`Grid2D`]; entries outside `Ω` are kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField2D<T> {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField2D<T> {
    pub fn zeros(grid: &Grid2D<T>) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            values: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn constant(grid: &Grid2D<T>, value: Complex<T>) -> Self {
        Self::from_fn(grid, |_, _| value)
    }

    /// Samples `f(k, centre)` on active cells.
    pub fn from_fn(grid: &Grid2D<T>, mut f: impl FnMut(usize, Vec2<T>) -> Complex<T>) -> Self {
        let mut out = Self::zeros(grid);
        for k in 0..grid.len() {
            if grid.active[k] {
                out.values[k] = f(k, grid.center(k));
            }
        }
        out
    }

    pub fn check_grid(&self, grid: &Grid2D<T>) -> Result<()> {
        if self.nx != grid.nx() || self.ny != grid.ny() || self.values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field is {}×{}, grid is {}×{}",
                self.nx,
                self.ny,
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn sup_modulus(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Interleaved `(re, im)` copy.
    pub(crate) fn to_interleaved(&self) -> Vec<T> {
        self.values.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub(crate) fn from_interleaved(nx: usize, ny: usize, x: &[T]) -> Self {
        Self {
            nx,
            ny,
            values: x.chunks_exact(2).map(|c| Complex::new(c[0], c[1])).collect(),
        }
    }
}

/// Staggered vector potential: `ax[k]` is the mean of `A_x` along the link
/// from cell `k` to `k + 1`, `ay[k]` the mean of `A_y` from `k` to `k + nx`.
/// Entries on the last column (`ax`) and last row (`ay`) are unused.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPotential2D<T> {
    pub raster: Raster<T>,
    pub ax: Vec<T>,
    pub ay: Vec<T>,
    /// Set while the potential is exactly `½(−(y − y_c), x − x_c)`.
    pub reference_center: Option<Vec2<T>>,
}

/// `F(x, y) = ½(−(y − y_c), x − x_c)` about the domain centroid.
pub fn make_reference_potential<T: Real>(grid: &Grid2D<T>) -> VectorPotential2D<T> {
    VectorPotential2D::symmetric(&grid.raster, grid.centroid)
}

#[inline]
fn symmetric_at<T: Real>(c: Vec2<T>, p: Vec2<T>) -> Vec2<T> {
    let half = T::lit(0.5);
    Vec2::new(-(p.y - c.y) * half, (p.x - c.x) * half)
}

impl<T: Real> VectorPotential2D<T> {
    /// Symmetric-gauge potential of a unit field about `center`. Both
    /// components are linear, so the link means are midpoint values.
    pub fn symmetric(raster: &Raster<T>, center: Vec2<T>) -> Self {
        let n = raster.len();
        let mut ax = vec![T::zero(); n];
        let mut ay = vec![T::zero(); n];
        let half = T::lit(0.5);
        for j in 0..raster.ny {
            for i in 0..raster.nx {
                let k = raster.idx(i, j);
                let p = raster.center(i, j);
                ax[k] = symmetric_at(center, p + Vec2::new(half * raster.hx, T::zero())).x;
                ay[k] = symmetric_at(center, p + Vec2::new(T::zero(), half * raster.hy)).y;
            }
        }
        Self {
            raster: *raster,
            ax,
            ay,
            reference_center: Some(center),
        }
    }

    pub fn check_grid(&self, grid: &Grid2D<T>) -> Result<()> {
        if self.raster.nx != grid.nx() || self.raster.ny != grid.ny() || self.ax.len() != grid.len() {
            return Err(Error::GridMismatch("vector potential and grid differ".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.ax.iter().chain(self.ay.iter()).all(|v| v.is_finite())
    }

    /// `A → A + ∇g` with the discrete gradient of a cell function, which
    /// shifts each link phase by `(g_j − g_i)/ε²`.
    pub fn add_gradient(&mut self, g: &[T]) {
        let r = self.raster;
        for j in 0..r.ny {
            for i in 0..r.nx {
                let k = r.idx(i, j);
                if i + 1 < r.nx {
                    self.ax[k] = self.ax[k] + (g[k + 1] - g[k]) / r.hx;
                }
                if j + 1 < r.ny {
                    self.ay[k] = self.ay[k] + (g[k + r.nx] - g[k]) / r.hy;
                }
            }
        }
        self.reference_center = None;
    }

    /// Circulation per unit area around the plaquette with lower-left
    /// cell `(i, j)`, `i < nx − 1`, `j < ny − 1`.
    pub fn curl(&self, i: usize, j: usize) -> T {
        let r = &self.raster;
        let k = r.idx(i, j);
        let circ = r.hx * self.ax[k] + r.hy * self.ay[k + 1] - r.hx * self.ax[k + r.nx] - r.hy * self.ay[k];
        circ / (r.hx * r.hy)
    }

    /// Discrete divergence at interior cell `(i, j)`.
    pub fn divergence(&self, i: usize, j: usize) -> T {
        let r = &self.raster;
        let k = r.idx(i, j);
        (self.ax[k] - self.ax[k - 1]) / r.hx + (self.ay[k] - self.ay[k - r.nx]) / r.hy
    }

    pub fn max_curl_defect(&self) -> T {
        let r = &self.raster;
        let mut m = T::zero();
        for j in 0..r.ny - 1 {
            for i in 0..r.nx - 1 {
                m = m.max((self.curl(i, j) - T::one()).abs());
            }
        }
        m
    }

    pub fn max_divergence(&self) -> T {
        let r = &self.raster;
        let mut m = T::zero();
        for j in 1..r.ny - 1 {
            for i in 1..r.nx - 1 {
                m = m.max(self.divergence(i, j).abs());
            }
        }
        m
    }

    /// Point value: exact for the reference potential, otherwise bilinear
    /// interpolation of each staggered component (clamped to the raster).
    pub fn value_at(&self, p: Vec2<T>) -> Vec2<T> {
        if let Some(c) = self.reference_center {
            return symmetric_at(c, p);
        }
        let half = T::lit(0.5);
        let r = &self.raster;
        let ox = Vec2::new(r.origin.x + r.hx, r.origin.y + half * r.hy);
        let oy = Vec2::new(r.origin.x + half * r.hx, r.origin.y + r.hy);
        Vec2::new(
            bilinear(&self.ax, r, ox, r.nx - 1, r.ny, p).0,
            bilinear(&self.ay, r, oy, r.nx, r.ny - 1, p).0,
        )
    }

    /// `∂A_i/∂x_j` as `[[∂xAx, ∂yAx], [∂xAy, ∂yAy]]`.
    pub fn jacobian(&self, p: Vec2<T>) -> [[T; 2]; 2] {
        if self.reference_center.is_some() {
            let half = T::lit(0.5);
            return [[T::zero(), -half], [half, T::zero()]];
        }
        let half = T::lit(0.5);
        let r = &self.raster;
        let ox = Vec2::new(r.origin.x + r.hx, r.origin.y + half * r.hy);
        let oy = Vec2::new(r.origin.x + half * r.hx, r.origin.y + r.hy);
        let (_, dxx, dyx) = bilinear(&self.ax, r, ox, r.nx - 1, r.ny, p);
        let (_, dxy, dyy) = bilinear(&self.ay, r, oy, r.nx, r.ny - 1, p);
        [[dxx, dyx], [dxy, dyy]]
    }
}

/// Bilinear interpolant (value, ∂x, ∂y) of samples stored with the raster
/// stride at nodes `o + (i hx, j hy)`, `i < mx`, `j < my`.
fn bilinear<T: Real>(data: &[T], r: &Raster<T>, o: Vec2<T>, mx: usize, my: usize, p: Vec2<T>) -> (T, T, T) {
    let fx = ((p.x - o.x) / r.hx).max(T::zero()).min(T::from_usize_lossy(mx - 1));
    let fy = ((p.y - o.y) / r.hy).max(T::zero()).min(T::from_usize_lossy(my - 1));
    let i = fx.floor().to_usize().unwrap_or(0).min(mx - 2);
    let j = fy.floor().to_usize().unwrap_or(0).min(my - 2);
    let u = fx - T::from_usize_lossy(i);
    let v = fy - T::from_usize_lossy(j);
    let at = |a: usize, b: usize| data[r.idx(a, b)];
    let (f00, f10, f01, f11) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1));
    let one = T::one();
    let val = f00 * (one - u) * (one - v) + f10 * u * (one - v) + f01 * (one - u) * v + f11 * u * v;
    let dx = ((f10 - f00) * (one - v) + (f11 - f01) * v) / r.hx;
    let dy = ((f01 - f00) * (one - u) + (f11 - f10) * u) / r.hy;
    (val, dx, dy)
}
