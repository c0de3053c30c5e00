use super::{EffectiveSolution, Grid1D, Profile1D};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Potential function `F(t) = 2∫₀ᵗ (ξ+α★) f★²(ξ) dξ` and cost function
/// `K = f★² + F` on the profile grid.
#[derive(Clone, Debug)]
pub struct CostTable<T> {
    pub grid: Grid1D<T>,
    /// `F(t_i)`.
    pub potential: Vec<T>,
    /// `K(t_i)`.
    pub cost: Vec<T>,
}

impl<T: Real> CostTable<T> {
    pub fn potential_at_end(&self) -> T {
        self.potential[self.potential.len() - 1]
    }

    pub fn min_potential(&self) -> T {
        self.potential.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn min_cost(&self) -> T {
        self.cost.iter().copied().fold(T::infinity(), T::min)
    }
}

pub fn compute_cost_table<T: Real>(sol: &EffectiveSolution<T>) -> Result<CostTable<T>> {
    if sol.is_trivial() {
        return Err(Error::NotApplicable("cost table of a trivial profile".into()));
    }
    Ok(cost_table_of(&sol.f_star, sol.alpha_star))
}

/// Cumulative trapezoid of `2(t+α) f²`; `F(0)` is exactly zero.
pub(crate) fn cost_table_of<T: Real>(f: &Profile1D<T>, alpha: T) -> CostTable<T> {
    let g = f.grid;
    let h = g.h();
    let integrand: Vec<T> = (0..g.n())
        .map(|i| T::lit(2.0) * (g.point(i) + alpha) * f.values[i] * f.values[i])
        .collect();
    let mut potential = Vec::with_capacity(g.n());
    potential.push(T::zero());
    // Kahan-compensated running sum keeps F(t_max) at rounding level.
    let mut acc = T::zero();
    let mut comp = T::zero();
    for w in integrand.windows(2) {
        let y = T::lit(0.5) * h * (w[0] + w[1]) - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        potential.push(acc);
    }
    let cost = f.values.iter().zip(&potential).map(|(&v, &p)| v * v + p).collect();
    CostTable {
        grid: g,
        potential,
        cost,
    }
}

/// Two-sided Gaussian envelope fitted to a profile.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit<T> {
    /// Largest `c` with `c·e^{−(t+√2)²/2} ≤ f`.
    pub c_lower: T,
    /// Smallest `C` with `f ≤ C·e^{−(t+α)²/2}`.
    pub c_upper: T,
    /// Largest value of `f` on `t ≥ t_max − 2`.
    pub tail_max: T,
    pub ok: bool,
}

/// Fits the envelope constants with `α = α★` in the upper bound.
pub fn check_decay<T: Real>(sol: &EffectiveSolution<T>) -> Result<DecayFit<T>> {
    check_decay_profile(&sol.f_star, sol.alpha_star)
}

pub fn check_decay_profile<T: Real>(f: &Profile1D<T>, alpha: T) -> Result<DecayFit<T>> {
    let support = T::lit(1e-12);
    if f.sup_norm() <= support {
        return Err(Error::NotApplicable("decay fit of a trivial profile".into()));
    }
    let g = f.grid;
    let sqrt2 = T::SQRT_2();
    let half = T::lit(0.5);
    let mut c_lower = T::infinity();
    let mut c_upper = T::zero();
    let mut tail_max = T::zero();
    let tail_start = g.t_max() - T::lit(2.0);
    for (i, &v) in f.values.iter().enumerate() {
        let t = g.point(i);
        if t >= tail_start {
            tail_max = tail_max.max(v.abs());
        }
        if v <= support {
            continue;
        }
        // Ratios in log form to survive large exponents.
        let lo = (v.ln() + half * (t + sqrt2) * (t + sqrt2)).exp();
        let hi = (v.ln() + half * (t + alpha) * (t + alpha)).exp();
        c_lower = c_lower.min(lo);
        c_upper = c_upper.max(hi);
    }
    // The two envelopes have different centers, so no ordering between c and
    // C is implied; only positivity and finiteness are.
    let ok = c_lower > T::zero() && c_upper.is_finite() && tail_max <= T::lit(1e-10);
    Ok(DecayFit {
        c_lower,
        c_upper,
        tail_max,
        ok,
    })
}
