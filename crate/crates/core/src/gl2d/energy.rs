use num_complex::Complex;
use rayon::prelude::*;

use super::grid::{ComplexField2D, Grid2D, VectorPotential2D};
use super::{FieldMode, GLConfig};
use crate::error::Result;
use crate::scalar::Real;

/// Terms of the discrete functional
///
/// `Σ_links (area/h²)|ψ_j e^{iθ_ij} − ψ_i|² − Σ_cells area·(2|ψ|² − |ψ|⁴)/(2bε²)
///  + ε⁻⁴ Σ_plaquettes area·(curl A − 1)²`,
///
/// with `θ_ij = ∫_i^j A·dl / ε²`. Only links between two active cells enter,
/// which is the natural (Neumann) boundary condition.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyParts<T> {
    pub kinetic: T,
    pub potential: T,
    pub field: T,
    pub total: T,
}

/// Link factors `e^{iθ}` for one potential and `ε`.
#[derive(Clone, Debug)]
pub(crate) struct Links<T> {
    pub ux: Vec<Complex<T>>,
    pub uy: Vec<Complex<T>>,
    pub wx: T,
    pub wy: T,
    pub area: T,
    /// `1/(2bε²)`.
    pub coef: T,
}

impl<T: Real> Links<T> {
    pub fn new(grid: &Grid2D<T>, a: &VectorPotential2D<T>, b: T, eps: T) -> Self {
        let r = &grid.raster;
        let e2 = eps * eps;
        let phase = |t: T| Complex::new(t.cos(), t.sin());
        Self {
            ux: a.ax.iter().map(|&v| phase(r.hx * v / e2)).collect(),
            uy: a.ay.iter().map(|&v| phase(r.hy * v / e2)).collect(),
            wx: r.hy / r.hx,
            wy: r.hx / r.hy,
            area: r.cell_area(),
            coef: T::one() / (T::lit(2.0) * b * e2),
        }
    }
}

#[inline]
pub(crate) fn at<T: Real>(x: &[T], k: usize) -> Complex<T> {
    Complex::new(x[2 * k], x[2 * k + 1])
}

/// Kinetic and potential sums over the cells and links selected by
/// `subset` (all active cells when `None`).
pub(crate) fn psi_energy<T: Real>(grid: &Grid2D<T>, links: &Links<T>, x: &[T], subset: Option<&[bool]>) -> (T, T) {
    let nx = grid.nx();
    let keep = |k: usize| grid.active[k] && subset.map_or(true, |s| s[k]);
    let rows: Vec<(T, T)> = (0..grid.ny())
        .into_par_iter()
        .map(|j| {
            let mut kin = T::zero();
            let mut pot = T::zero();
            for i in 0..nx {
                let k = j * nx + i;
                if !keep(k) {
                    continue;
                }
                let p = at(x, k);
                if i + 1 < nx && keep(k + 1) {
                    kin = kin + links.wx * (at(x, k + 1) * links.ux[k] - p).norm_sqr();
                }
                if k + nx < grid.len() && keep(k + nx) {
                    kin = kin + links.wy * (at(x, k + nx) * links.uy[k] - p).norm_sqr();
                }
                let rho = p.norm_sqr();
                pot = pot + rho * (rho - T::lit(2.0));
            }
            (kin, pot * links.area * links.coef)
        })
        .collect();
    rows.into_iter()
        .fold((T::zero(), T::zero()), |(a, b), (c, d)| (a + c, b + d))
}

/// Gradient `(∂E/∂Re ψ_k, ∂E/∂Im ψ_k)` interleaved, zero on inactive cells.
pub(crate) fn psi_gradient<T: Real>(grid: &Grid2D<T>, links: &Links<T>, x: &[T], g: &mut [T]) {
    let nx = grid.nx();
    let two = T::lit(2.0);
    let four_ac = T::lit(4.0) * links.area * links.coef;
    g.par_chunks_mut(2 * nx).enumerate().for_each(|(j, row)| {
        for i in 0..nx {
            let k = j * nx + i;
            let mut gk = Complex::new(T::zero(), T::zero());
            if grid.active[k] {
                let p = at(x, k);
                if grid.has_xlink(k) {
                    gk = gk - (at(x, k + 1) * links.ux[k] - p) * (two * links.wx);
                }
                if i > 0 && grid.has_xlink(k - 1) {
                    gk = gk + (p - at(x, k - 1) * links.ux[k - 1].conj()) * (two * links.wx);
                }
                if grid.has_ylink(k) {
                    gk = gk - (at(x, k + nx) * links.uy[k] - p) * (two * links.wy);
                }
                if k >= nx && grid.has_ylink(k - nx) {
                    gk = gk + (p - at(x, k - nx) * links.uy[k - nx].conj()) * (two * links.wy);
                }
                gk = gk + p * (four_ac * (p.norm_sqr() - T::one()));
            }
            row[2 * i] = gk.re;
            row[2 * i + 1] = gk.im;
        }
    });
}

/// Coefficients `c[0..5]` with `E(x + s d) − E(x) = Σ_{m≥1} c[m] s^m` for the
/// ψ-dependent part (exact: the functional is quartic in ψ).
pub(crate) fn psi_line_polynomial<T: Real>(grid: &Grid2D<T>, links: &Links<T>, x: &[T], d: &[T]) -> [T; 5] {
    let nx = grid.nx();
    let two = T::lit(2.0);
    let rows: Vec<[T; 5]> = (0..grid.ny())
        .into_par_iter()
        .map(|j| {
            let mut c = [T::zero(); 5];
            let mut q = [T::zero(); 5];
            for i in 0..nx {
                let k = j * nx + i;
                if !grid.active[k] {
                    continue;
                }
                let (p, dp) = (at(x, k), at(d, k));
                let mut link = |w: T, zx: Complex<T>, zd: Complex<T>| {
                    c[1] = c[1] + w * two * (zx.conj() * zd).re;
                    c[2] = c[2] + w * zd.norm_sqr();
                };
                if grid.has_xlink(k) {
                    let u = links.ux[k];
                    link(links.wx, at(x, k + 1) * u - p, at(d, k + 1) * u - dp);
                }
                if grid.has_ylink(k) {
                    let u = links.uy[k];
                    link(links.wy, at(x, k + nx) * u - p, at(d, k + nx) * u - dp);
                }
                // ρ(s) = p0 + p1 s + p2 s², V ∝ ρ² − 2ρ.
                let p0 = p.norm_sqr();
                let p1 = two * (p.conj() * dp).re;
                let p2 = dp.norm_sqr();
                q[1] = q[1] + two * p0 * p1 - two * p1;
                q[2] = q[2] + p1 * p1 + two * p0 * p2 - two * p2;
                q[3] = q[3] + two * p1 * p2;
                q[4] = q[4] + p2 * p2;
            }
            let s = links.area * links.coef;
            for m in 1..5 {
                c[m] = c[m] + q[m] * s;
            }
            c
        })
        .collect();
    rows.into_iter().fold([T::zero(); 5], |mut acc, c| {
        for m in 0..5 {
            acc[m] = acc[m] + c[m];
        }
        acc
    })
}

/// `ε⁻⁴ Σ area·(curl A − 1)²` over all plaquettes of the raster.
pub fn field_energy<T: Real>(a: &VectorPotential2D<T>, eps: T) -> T {
    let r = &a.raster;
    let mut s = T::zero();
    for j in 0..r.ny - 1 {
        for i in 0..r.nx - 1 {
            let c = a.curl(i, j) - T::one();
            s = s + c * c;
        }
    }
    s * r.cell_area() / eps.powi(4)
}

pub fn eval_gl_energy_parts<T: Real>(
    psi: &ComplexField2D<T>,
    a: &VectorPotential2D<T>,
    cfg: &GLConfig<T>,
    grid: &Grid2D<T>,
) -> Result<EnergyParts<T>> {
    psi.check_grid(grid)?;
    a.check_grid(grid)?;
    let links = Links::new(grid, a, cfg.b, cfg.epsilon);
    let (kinetic, potential) = psi_energy(grid, &links, &psi.to_interleaved(), None);
    let field = match cfg.field_mode {
        FieldMode::Frozen => T::zero(),
        FieldMode::Alternating => field_energy(a, cfg.epsilon),
    };
    Ok(EnergyParts {
        kinetic,
        potential,
        field,
        total: kinetic + potential + field,
    })
}

/// Discrete GL energy; the field term is dropped in frozen mode.
pub fn eval_gl_energy<T: Real>(
    psi: &ComplexField2D<T>,
    a: &VectorPotential2D<T>,
    cfg: &GLConfig<T>,
    grid: &Grid2D<T>,
) -> Result<T> {
    Ok(eval_gl_energy_parts(psi, a, cfg, grid)?.total)
}

/// Energy of the cells where `subset` holds and the links joining two of
/// them, plus the field term as in [`eval_gl_energy`].
pub fn eval_gl_energy_restricted<T: Real>(
    psi: &ComplexField2D<T>,
    a: &VectorPotential2D<T>,
    cfg: &GLConfig<T>,
    grid: &Grid2D<T>,
    subset: &[bool],
) -> Result<T> {
    psi.check_grid(grid)?;
    a.check_grid(grid)?;
    let links = Links::new(grid, a, cfg.b, cfg.epsilon);
    let (kin, pot) = psi_energy(grid, &links, &psi.to_interleaved(), Some(subset));
    let field = match cfg.field_mode {
        FieldMode::Frozen => T::zero(),
        FieldMode::Alternating => field_energy(a, cfg.epsilon),
    };
    Ok(kin + pot + field)
}

/// Exact gradient of [`eval_gl_energy`] with respect to ψ: the real part
/// holds `∂E/∂Re ψ`, the imaginary part `∂E/∂Im ψ`.
pub fn gl_gradient<T: Real>(
    psi: &ComplexField2D<T>,
    a: &VectorPotential2D<T>,
    cfg: &GLConfig<T>,
    grid: &Grid2D<T>,
) -> Result<ComplexField2D<T>> {
    psi.check_grid(grid)?;
    a.check_grid(grid)?;
    let links = Links::new(grid, a, cfg.b, cfg.epsilon);
    let x = psi.to_interleaved();
    let mut g = vec![T::zero(); x.len()];
    psi_gradient(grid, &links, &x, &mut g);
    Ok(ComplexField2D::from_interleaved(psi.nx, psi.ny, &g))
}

/// Scale turning a gradient entry into the ε²-scaled Euler-Lagrange
/// residual `−ε²Δ_A ψ − (1 − |ψ|²)ψ/b` at that cell.
pub(crate) fn residual_scale<T: Real>(grid: &Grid2D<T>, eps: T) -> T {
    eps * eps / (T::lit(2.0) * grid.cell_area())
}

/// Sup norm of the scaled Euler-Lagrange residual.
pub fn gl_residual<T: Real>(
    psi: &ComplexField2D<T>,
    a: &VectorPotential2D<T>,
    cfg: &GLConfig<T>,
    grid: &Grid2D<T>,
) -> Result<T> {
    let g = gl_gradient(psi, a, cfg, grid)?;
    Ok(g.sup_modulus() * residual_scale(grid, cfg.epsilon))
}

/// Link currents `j = Im(ψ̄ (∇ + iA/ε²)ψ)`, i.e.
/// `(i/2)[ψ(∇ − iA/ε²)ψ̄ − ψ̄(∇ + iA/ε²)ψ]`, on the staggered links.
#[derive(Clone, Debug)]
pub struct Current<T> {
    pub nx: usize,
    pub ny: usize,
    pub hx: T,
    pub hy: T,
    pub jx: Vec<T>,
    pub jy: Vec<T>,
}

impl<T: Real> Current<T> {
    /// Discrete divergence at each cell, missing links counting as zero flux.
    pub fn divergence(&self) -> Vec<T> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = vec![T::zero(); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let west = if i > 0 { self.jx[k - 1] } else { T::zero() };
                let south = if j > 0 { self.jy[k - nx] } else { T::zero() };
                out[k] = (self.jx[k] - west) / self.hx + (self.jy[k] - south) / self.hy;
            }
        }
        out
    }

    /// Cell-centred vector field: mean of the two adjacent links per axis.
    pub fn at_cells(&self) -> Vec<(T, T)> {
        let (nx, ny) = (self.nx, self.ny);
        let half = T::lit(0.5);
        (0..nx * ny)
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                let west = if i > 0 { self.jx[k - 1] } else { T::zero() };
                let south = if j > 0 { self.jy[k - nx] } else { T::zero() };
                ((self.jx[k] + west) * half, (self.jy[k] + south) * half)
            })
            .collect()
    }
}

pub fn superconducting_current<T: Real>(
    psi: &ComplexField2D<T>,
    a: &VectorPotential2D<T>,
    cfg: &GLConfig<T>,
    grid: &Grid2D<T>,
) -> Result<Current<T>> {
    psi.check_grid(grid)?;
    a.check_grid(grid)?;
    let links = Links::new(grid, a, cfg.b, cfg.epsilon);
    let (nx, r) = (grid.nx(), &grid.raster);
    let v = &psi.values;
    let mut jx = vec![T::zero(); grid.len()];
    let mut jy = vec![T::zero(); grid.len()];
    for k in 0..grid.len() {
        if grid.has_xlink(k) {
            jx[k] = (v[k].conj() * v[k + 1] * links.ux[k]).im / r.hx;
        }
        if grid.has_ylink(k) {
            jy[k] = (v[k].conj() * v[k + nx] * links.uy[k]).im / r.hy;
        }
    }
    Ok(Current {
        nx,
        ny: grid.ny(),
        hx: r.hx,
        hy: r.hy,
        jx,
        jy,
    })
}
