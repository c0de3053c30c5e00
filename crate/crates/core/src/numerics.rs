//! Small numerical building blocks shared by the solvers.

use crate::scalar::Real;

/// Result of a bracketed one-dimensional minimization.
#[derive(Clone, Copy, Debug)]
pub struct Minimum1D<T> {
    pub x: T,
    pub value: T,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `tol`.
pub fn golden_section<T: Real, F>(mut f: F, lo: T, hi: T, tol: T) -> Minimum1D<T>
where
    F: FnMut(T) -> T,
{
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    while b - a > tol && evaluations < 400 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        evaluations += 1;
    }
    if f1 <= f2 {
        Minimum1D {
            x: x1,
            value: f1,
            evaluations,
        }
    } else {
        Minimum1D {
            x: x2,
            value: f2,
            evaluations,
        }
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`. Returns `None` when the
/// endpoints do not bracket a root.
pub fn bisect_root<T: Real, F>(mut f: F, lo: T, hi: T, tol: T, max_iter: usize) -> Option<T>
where
    F: FnMut(T) -> T,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Some(a);
    }
    if fb == T::zero() {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let m = T::lit(0.5) * (a + b);
        if (b - a).abs() <= tol {
            return Some(m);
        }
        let fm = f(m);
        if fm == T::zero() {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(T::lit(0.5) * (a + b))
}

/// Symmetric tridiagonal matrix stored by its diagonal and first
/// off-diagonal.
#[derive(Clone, Debug)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solves `M x = rhs` by LDLᵀ elimination. Returns `None` if a pivot is
    /// not strictly positive, i.e. the matrix is not positive definite.
    pub fn solve_spd(&self, rhs: &[T]) -> Option<Vec<T>> {
        let n = self.len();
        let mut d = vec![T::zero(); n];
        let mut l = vec![T::zero(); n.saturating_sub(1)];
        let mut y = vec![T::zero(); n];
        d[0] = self.diag[0];
        if !(d[0] > T::zero()) {
            return None;
        }
        y[0] = rhs[0];
        for i in 1..n {
            l[i - 1] = self.off[i - 1] / d[i - 1];
            d[i] = self.diag[i] - l[i - 1] * self.off[i - 1];
            if !(d[i] > T::zero()) || !d[i].is_finite() {
                return None;
            }
            y[i] = rhs[i] - l[i - 1] * y[i - 1];
        }
        let mut x = vec![T::zero(); n];
        x[n - 1] = y[n - 1] / d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = y[i] / d[i] - l[i] * x[i + 1];
        }
        Some(x)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.len() {
            let denom = if q.abs() < tiny { tiny.copysign(q) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval enclosing the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Smallest eigenvalue by Sturm bisection.
    pub fn lowest_eigenvalue(&self, rel_tol: T) -> T {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if hi - lo <= rel_tol * (T::one() + mid.abs()) {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        T::lit(0.5) * (lo + hi)
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Option<(T, T)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = T::from_usize_lossy(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Nodes and weights of the 5-point Gauss-Legendre rule on `[-1, 1]`.
pub(crate) const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Composite 5-point Gauss-Legendre quadrature of `f` on `[a, b]` with
/// `pieces` equal panels.
pub fn gauss_legendre<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, pieces: usize) -> T {
    let pieces = pieces.max(1);
    let w = (b - a) / T::from_usize_lossy(pieces);
    let half = T::lit(0.5) * w;
    let mut total = T::zero();
    for k in 0..pieces {
        let mid = a + (T::from_usize_lossy(k) + T::lit(0.5)) * w;
        for &(node, weight) in GAUSS5.iter() {
            total = total + T::lit(weight) * f(mid + half * T::lit(node));
        }
    }
    total * half
}
