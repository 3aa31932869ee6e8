//! Order-zero Bessel/Hankel evaluation and the outgoing 2D Helmholtz kernel.
//!
//! `H0^(1)(x) = J0(x) + i Y0(x)` is evaluated by the ascending power series
//! for `x < 8` and by the large-argument expansion
//!
//! ```text
//! H0^(1)(x) ~ sqrt(2/(pi x)) e^{i(x - pi/4)} sum_k i^k a_k / x^k,
//! a_0 = 1,  a_k = a_{k-1} * (-(2k-1)^2) / (8k)
//! ```
//!
//! truncated at the smallest term. The crossover at `x = 8` balances series
//! cancellation (about three digits lost there) against the asymptotic
//! truncation floor (about `2e-8` relative at 8, shrinking fast with `x`).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{rl, Real, EULER_GAMMA};

/// Series/asymptotic crossover for the order-zero evaluations.
pub const HANKEL_CROSSOVER: f64 = 8.0;

/// Both ascending series at once: returns `(J0(x), Y0(x))` for `0 < x < 8`.
fn series_j0_y0<S: Real>(x: S) -> (S, S) {
    let q = x * x * rl::<S>(0.25);
    let mut term = S::one(); // (-1)^m q^m / (m!)^2
    let mut j0 = S::one();
    let mut y_sum = S::zero(); // sum (-1)^{m+1} H_m q^m / (m!)^2
    let mut harmonic = S::zero();
    let eps = S::epsilon() * rl::<S>(0.25);
    for m in 1..300 {
        let mf = rl::<S>(m as f64);
        term = -term * q / (mf * mf);
        harmonic += S::one() / mf;
        j0 += term;
        y_sum -= term * harmonic;
        if term.abs() < eps {
            break;
        }
    }
    let two_over_pi = rl::<S>(2.0) / S::PI();
    let y0 = two_over_pi * (((x * rl::<S>(0.5)).ln() + rl::<S>(EULER_GAMMA)) * j0 + y_sum);
    (j0, y0)
}

/// Large-argument expansion of `H0^(1)` with optimal truncation; `x >= 8`.
fn asymptotic_h0<S: Real>(x: S) -> Complex<S> {
    let mut sum = Complex::new(S::one(), S::zero());
    let mut a = S::one();
    let mut phase = Complex::new(S::zero(), S::one()); // i^k
    let mut xp = S::one(); // x^k
    let mut prev = S::infinity();
    for k in 1..40 {
        let kf = rl::<S>(k as f64);
        let odd = rl::<S>(2.0) * kf - S::one();
        a = -a * odd * odd / (rl::<S>(8.0) * kf);
        xp = xp * x;
        let mag = a.abs() / xp;
        if mag >= prev || mag < S::epsilon() {
            break; // divergent tail reached, or converged
        }
        sum += phase.scale(a / xp);
        phase *= Complex::new(S::zero(), S::one());
        prev = mag;
    }
    let amp = (rl::<S>(2.0) / (S::PI() * x)).sqrt();
    let chi = x - S::FRAC_PI_4();
    Complex::new(S::zero(), chi).exp().scale(amp) * sum
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0<S: Real>(x: S) -> S {
    let x = x.abs();
    if x < rl::<S>(HANKEL_CROSSOVER) {
        series_j0_y0(x).0
    } else {
        asymptotic_h0(x).re
    }
}

/// Bessel function of the second kind, order zero. Requires `x > 0`.
pub fn bessel_y0<S: Real>(x: S) -> S {
    assert!(x > S::zero(), "Y0 needs a positive argument");
    if x < rl::<S>(HANKEL_CROSSOVER) {
        series_j0_y0(x).1
    } else {
        asymptotic_h0(x).im
    }
}

/// Hankel function of the first kind, order zero. Requires `x > 0`.
pub fn hankel0_first<S: Real>(x: S) -> Complex<S> {
    assert!(x > S::zero(), "H0^(1) needs a positive argument");
    if x < rl::<S>(HANKEL_CROSSOVER) {
        let (j0, y0) = series_j0_y0(x);
        Complex::new(j0, y0)
    } else {
        asymptotic_h0(x)
    }
}

/// Outgoing Helmholtz kernel at energy `e > 0`:
/// `-(i/4) H0^(1)(sqrt(e) r)` for `r > 0`.
///
/// The kernel is singular at `r = 0`; quadrature code must use
/// [`greens_cell_integral`] for the self cell instead of evaluating here.
pub fn greens_kernel<S: Real>(e: S, r: S) -> Result<Complex<S>> {
    if !(e > S::zero()) {
        return Err(Error::InvalidInput(format!(
            "outgoing kernel needs positive energy, got {e}"
        )));
    }
    if !(r > S::zero()) {
        return Err(Error::InvalidInput(format!(
            "outgoing kernel is singular at r = 0 (got r = {r}); use the cell integral"
        )));
    }
    let h = hankel0_first(e.sqrt() * r);
    Ok(Complex::new(S::zero(), rl::<S>(-0.25)) * h)
}

/// Exact integral of the small-argument kernel over one `h x h` grid cell
/// centered at the singularity:
///
/// ```text
/// int_cell -(i/4) [1 + (2i/pi)(ln(sqrt(e) r / 2) + gamma)] dA
///   = -(i/4) h^2 [1 + (2i/pi)(ln(sqrt(e) h / 2) + gamma + C0)],
/// C0 = pi/4 - 3/2 - ln(2)/2
/// ```
///
/// `C0` comes from the closed form `int_{[0,1]^2} ln(x^2+y^2) dx dy =
/// ln 2 + pi/2 - 3`. The neglected `O(r^2 ln r)` part of the kernel
/// contributes `O(h^2 ln h)` relative error, which is the quadrature's
/// overall accuracy anyway.
pub fn greens_cell_integral<S: Real>(e: S, h: S) -> Result<Complex<S>> {
    if !(e > S::zero()) {
        return Err(Error::InvalidInput(format!(
            "cell integral needs positive energy, got {e}"
        )));
    }
    if !(h > S::zero()) {
        return Err(Error::InvalidInput(format!(
            "cell integral needs a positive cell size, got {h}"
        )));
    }
    let c0 = S::FRAC_PI_4() - rl::<S>(1.5) - rl::<S>(0.5) * S::LN_2();
    let log_part = (e.sqrt() * h * rl::<S>(0.5)).ln() + rl::<S>(EULER_GAMMA) + c0;
    let inner = Complex::new(S::one(), S::zero())
        + Complex::new(S::zero(), rl::<S>(2.0) / S::PI()).scale(log_part);
    Ok(Complex::new(S::zero(), rl::<S>(-0.25)).scale(h * h) * inner)
}
