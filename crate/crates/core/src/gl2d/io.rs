use std::io::{Read, Write};

use super::grid::{ComplexField2D, Grid2D};
use crate::error::{Error, Result};
use crate::geometry::{Raster, Vec2};
use crate::scalar::Real;

const MAGIC: &[u8; 4] = b"SGLR";
const VERSION: u32 = 1;

/// `x,y,re,im,abs2` for each active cell, 17 significant digits.
pub fn write_csv<T: Real, W: Write>(mut w: W, grid: &Grid2D<T>, psi: &ComplexField2D<T>) -> Result<()> {
    psi.check_grid(grid)?;
    writeln!(w, "x,y,re,im,abs2")?;
    for k in 0..grid.len() {
        if !grid.active[k] {
            continue;
        }
        let c = grid.center(k);
        let z = psi.values[k];
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.x.to_f64_lossy(),
            c.y.to_f64_lossy(),
            z.re.to_f64_lossy(),
            z.im.to_f64_lossy(),
            z.norm_sqr().to_f64_lossy()
        )?;
    }
    Ok(())
}

/// Binary raster: magic `SGLR`, version (u32), `nx`, `ny` (u64), bounding
/// box `x0 y0 x1 y1` (f64), then `(re, im)` per cell in row-major order
/// (`x` fastest). Everything little-endian.
pub fn write_raster<T: Real, W: Write>(mut w: W, grid: &Grid2D<T>, psi: &ComplexField2D<T>) -> Result<()> {
    psi.check_grid(grid)?;
    let r = &grid.raster;
    let hi = r.upper();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(r.nx as u64).to_le_bytes())?;
    w.write_all(&(r.ny as u64).to_le_bytes())?;
    for v in [r.origin.x, r.origin.y, hi.x, hi.y] {
        w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    for z in &psi.values {
        w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
        w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_raster<R: Read>(mut r: R) -> Result<(Raster<f64>, ComplexField2D<f64>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a raster file".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != VERSION {
        return Err(Error::Format("unsupported raster version".into()));
    }
    let mut b8 = [0u8; 8];
    let mut next_u64 = |r: &mut R| -> Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let nx = next_u64(&mut r)? as usize;
    let ny = next_u64(&mut r)? as usize;
    let mut f = [0.0f64; 4];
    for v in f.iter_mut() {
        *v = f64::from_bits(next_u64(&mut r)?);
    }
    let raster = Raster::new(Vec2::new(f[0], f[1]), Vec2::new(f[2], f[3]), nx, ny)?;
    let mut data = vec![0.0f64; 2 * nx * ny];
    for v in data.iter_mut() {
        *v = f64::from_bits(next_u64(&mut r)?);
    }
    Ok((raster, ComplexField2D::from_interleaved(nx, ny, &data)))
}
