//! One-dimensional KdV support: the flow the planar equation collapses to on
//! `x2`-independent mean-zero data.
//!
//! Convention: `du/dt = 6 u u' - u'''`, whose right-moving soliton is
//! `u(x, t) = -2 kappa^2 / cosh^2(kappa (x - 4 kappa^2 t - phase))`.
//! The reduction map onto the planar flow at energy `E` is
//! `v(x, t) = u(x + 6 E t, -2 t)`, giving `dv/dt = 2 v''' - 12 v v' + 6 E v'`.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::kdv_soliton_profile;
use crate::scalar::{rl, Real};

/// Periodic grid on `[-L/2, L/2)` with `N` nodes, mirroring the 2D
/// conventions (node `x = h (i - N/2)`, FFT-ordered frequencies).
#[derive(Clone)]
pub struct Grid1D<S: Real> {
    l: S,
    n: usize,
    h: S,
    fwd: Arc<dyn Fft<S>>,
    inv: Arc<dyn Fft<S>>,
}

impl<S: Real> std::fmt::Debug for Grid1D<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid1D")
            .field("l", &self.l)
            .field("n", &self.n)
            .finish()
    }
}

pub fn make_grid_1d<S: Real>(l: S, n: usize) -> Result<Grid1D<S>> {
    if !(l > S::zero()) || !l.is_finite() {
        return Err(Error::InvalidInput(format!(
            "interval length must be positive and finite, got {l}"
        )));
    }
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "node count must be even and at least 8, got {n}"
        )));
    }
    let mut planner = FftPlanner::new();
    Ok(Grid1D {
        l,
        n,
        h: l / rl::<S>(n as f64),
        fwd: planner.plan_fft_forward(n),
        inv: planner.plan_fft_inverse(n),
    })
}

impl<S: Real> Grid1D<S> {
    pub fn side_length(&self) -> S {
        self.l
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> S {
        self.h
    }

    pub fn coord(&self, i: usize) -> S {
        self.h * (rl::<S>(i as f64) - rl::<S>((self.n / 2) as f64))
    }

    /// FFT-ordered frequency with the Nyquist mode sent to zero, as in the
    /// 2D derivative calculus.
    pub fn freq_eff(&self, i: usize) -> S {
        if i == self.n / 2 {
            return S::zero();
        }
        let m = if i <= self.n / 2 {
            i as f64
        } else {
            i as f64 - self.n as f64
        };
        rl::<S>(2.0) * S::PI() * rl::<S>(m) / self.l
    }
}

/// Real samples of a profile on a [`Grid1D`].
#[derive(Clone, Debug)]
pub struct KdVProfile<S: Real> {
    grid: Grid1D<S>,
    values: Vec<S>,
}

impl<S: Real> KdVProfile<S> {
    pub fn new(grid: &Grid1D<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidInput(format!(
                "profile has {} samples, grid wants {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile contains non-finite samples".into()));
        }
        Ok(KdVProfile {
            grid: grid.clone(),
            values,
        })
    }

    pub fn sample(grid: &Grid1D<S>, f: impl Fn(S) -> S) -> Result<Self> {
        let values = (0..grid.n).map(|i| f(grid.coord(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D<S> {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn sup_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    /// Localization gate: both interval ends must sit below `1e-10` of the
    /// amplitude, otherwise the periodic wrap contaminates derivatives.
    pub fn check_localized(&self) -> Result<()> {
        let sup = self.sup_norm();
        let ends = self.values[0].abs().max(self.values[self.grid.n - 1].abs());
        if ends > rl::<S>(1e-10) * sup {
            return Err(Error::BoundaryLeak(format!(
                "profile ends at {ends:e} against amplitude {sup:e}"
            )));
        }
        Ok(())
    }

    /// Spectral `d^j/dx^j`, `j <= 3`, odd orders with the Nyquist mode
    /// zeroed.
    pub fn deriv(&self, j: u32) -> Result<KdVProfile<S>> {
        if j > 3 {
            return Err(Error::InvalidInput(format!(
                "derivative order {j} exceeds the supported maximum 3"
            )));
        }
        let n = self.grid.n;
        let mut buf: Vec<Complex<S>> = self
            .values
            .iter()
            .map(|&v| Complex::new(v, S::zero()))
            .collect();
        self.grid.fwd.process(&mut buf);
        for (i, z) in buf.iter_mut().enumerate() {
            let k = if j % 2 == 1 {
                self.grid.freq_eff(i)
            } else if i == n / 2 {
                -S::PI() * rl::<S>(n as f64) / self.grid.l
            } else {
                self.grid.freq_eff(i)
            };
            *z = *z * Complex::new(S::zero(), k).powu(j);
        }
        self.grid.inv.process(&mut buf);
        let scale = S::one() / rl::<S>(n as f64);
        let values = buf.iter().map(|z| z.re * scale).collect();
        Ok(KdVProfile {
            grid: self.grid.clone(),
            values,
        })
    }
}

/// `6 u u' - u'''`.
pub fn kdv_rhs<S: Real>(u: &KdVProfile<S>) -> Result<KdVProfile<S>> {
    let u1 = u.deriv(1)?;
    let u3 = u.deriv(3)?;
    let six = rl::<S>(6.0);
    let values = (0..u.values.len())
        .map(|i| six * u.values[i] * u1.values[i] - u3.values[i])
        .collect();
    Ok(KdVProfile {
        grid: u.grid.clone(),
        values,
    })
}

/// Sup-norm defect of the one-soliton as a traveling wave:
/// `|| -4 kappa^2 u' - 6 u u' + u''' ||_inf` on the given grid. The floor is
/// set by the periodization of `sech^2` and then by rounding in the spectral
/// third derivative.
pub fn kdv_residual_soliton<S: Real>(kappa: S, phase: S, grid: &Grid1D<S>) -> Result<S> {
    if !(kappa > S::zero()) {
        return Err(Error::InvalidInput(format!(
            "soliton parameter must be positive, got {kappa}"
        )));
    }
    let u = KdVProfile::sample(grid, |x| kdv_soliton_profile(kappa, phase, x))?;
    u.check_localized()?;
    let rhs = kdv_rhs(&u)?;
    let u1 = u.deriv(1)?;
    let c = rl::<S>(4.0) * kappa * kappa;
    let defect = (0..u.values.len())
        .map(|i| (-c * u1.values[i] - rhs.values[i]).abs())
        .fold(S::zero(), S::max);
    Ok(defect)
}

/// Check the reduction `v(x, t) = u(x + 6 E t, -2 t)` against the planar
/// right-hand side `2 v''' - 12 v v' + 6 E v'`.
///
/// `u(x, t)` must be an exact solution of `du/dt = 6 u u' - u'''` (as a
/// closure); the time derivative of the mapped field is formed with a
/// five-point stencil of width `dt_fd` around `t0` and compared in sup norm
/// with the spectral right-hand side. Works at any energy, including zero.
pub fn kdv_reduction_map_check<S: Real, F>(
    u: F,
    e: S,
    grid: &Grid1D<S>,
    t0: S,
    dt_fd: S,
) -> Result<S>
where
    F: Fn(S, S) -> S,
{
    if !(dt_fd > S::zero()) || !dt_fd.is_finite() {
        return Err(Error::InvalidInput(format!(
            "stencil width must be positive, got {dt_fd}"
        )));
    }
    if !e.is_finite() || !t0.is_finite() {
        return Err(Error::InvalidInput("energy and time must be finite".into()));
    }
    let six_e = rl::<S>(6.0) * e;
    let v_at = |t: S| -> Result<KdVProfile<S>> {
        KdVProfile::sample(grid, |x| u(x + six_e * t, rl::<S>(-2.0) * t))
    };
    let v = v_at(t0)?;
    let v1 = v.deriv(1)?;
    let v3 = v.deriv(3)?;
    let rhs: Vec<S> = (0..grid.points())
        .map(|i| {
            rl::<S>(2.0) * v3.values[i] - rl::<S>(12.0) * v.values[i] * v1.values[i]
                + six_e * v1.values[i]
        })
        .collect();

    let vm2 = v_at(t0 - dt_fd - dt_fd)?;
    let vm1 = v_at(t0 - dt_fd)?;
    let vp1 = v_at(t0 + dt_fd)?;
    let vp2 = v_at(t0 + dt_fd + dt_fd)?;
    let denom = rl::<S>(12.0) * dt_fd;
    let eight = rl::<S>(8.0);
    let mut worst = S::zero();
    for i in 0..grid.points() {
        let fd =
            (-vp2.values[i] + eight * vp1.values[i] - eight * vm1.values[i] + vm2.values[i])
                / denom;
        worst = worst.max((fd - rhs[i]).abs());
    }
    Ok(worst)
}
