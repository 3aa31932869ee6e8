//! Square periodic grids and spectral calculus.
//!
//! Conventions, fixed here once and relied on by every other module:
//!
//! * The domain is the square `[-L/2, L/2)^2` sampled at `N` points per axis,
//!   spacing `h = L/N`. Node `i` of an axis sits at `x = h*(i - N/2)`, so the
//!   origin is a grid node (`N` is required to be even).
//! * Field storage is row-major with `x1` as the slow axis:
//!   `values[i1 * N + i2]` holds the sample at `(x1(i1), x2(i2))`.
//! * The frequency attached to index `j` is `2*pi*m/L` with `m = j` for
//!   `j < N/2` and `m = j - N` otherwise, i.e. the set `{2*pi*m/L : m = -N/2
//!   .. N/2-1}` in FFT order.
//! * Odd-order derivative multipliers zero the unmatched `m = -N/2` mode;
//!   this is what keeps derivatives of real fields real. Even orders use the
//!   true Nyquist frequency. The `dz`/`dzbar` pair is built from first-order
//!   multipliers and therefore always uses the zeroed convention.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{rl, Real};

pub struct Grid2D<S: Real> {
    l: S,
    n: usize,
    h: S,
    freqs: Arc<Vec<S>>,
    fwd: Arc<dyn Fft<S>>,
    inv: Arc<dyn Fft<S>>,
}

impl<S: Real> Clone for Grid2D<S> {
    fn clone(&self) -> Self {
        Grid2D {
            l: self.l,
            n: self.n,
            h: self.h,
            freqs: self.freqs.clone(),
            fwd: self.fwd.clone(),
            inv: self.inv.clone(),
        }
    }
}

impl<S: Real> fmt::Debug for Grid2D<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("l", &self.l)
            .field("n", &self.n)
            .field("h", &self.h)
            .finish()
    }
}

impl<S: Real> PartialEq for Grid2D<S> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.l == other.l
    }
}

/// Build a periodic grid. `l` must be positive and finite, `n` even and at
/// least 8.
pub fn make_grid<S: Real>(l: S, n: usize) -> Result<Grid2D<S>> {
    if !(l > S::zero()) || !l.is_finite() {
        return Err(Error::InvalidInput(format!(
            "grid side length must be positive and finite, got {l}"
        )));
    }
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 8 points per axis, got {n}"
        )));
    }
    if n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "points per axis must be even for the real-field spectral symmetry, got {n}"
        )));
    }
    let h = l / rl::<S>(n as f64);
    let two_pi_over_l = S::TAU() / l;
    let freqs = (0..n)
        .map(|j| {
            let m = if j < n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            };
            two_pi_over_l * rl::<S>(m)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    Ok(Grid2D {
        l,
        n,
        h,
        freqs: Arc::new(freqs),
        fwd,
        inv,
    })
}

impl<S: Real> Grid2D<S> {
    pub fn side_length(&self) -> S {
        self.l
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> S {
        self.h
    }

    /// Coordinate of node `i` along either axis.
    pub fn coord(&self, i: usize) -> S {
        self.h * rl::<S>(i as f64 - (self.n / 2) as f64)
    }

    /// Per-axis frequencies in FFT order; see the module docs for the layout.
    pub fn frequencies(&self) -> &[S] {
        &self.freqs
    }

    /// Frequency with the odd-derivative Nyquist convention applied.
    #[inline]
    pub fn freq_eff(&self, j: usize) -> S {
        if j == self.n / 2 {
            S::zero()
        } else {
            self.freqs[j]
        }
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n + i2
    }

    /// Unnormalized forward 2D FFT, in place. `data` is one field in the
    /// row-major layout.
    pub(crate) fn fft2(&self, data: &mut [Complex<S>]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.fwd.process(data); // all rows in one pass
        transpose_square(data, self.n);
        self.fwd.process(data);
        transpose_square(data, self.n);
    }

    /// Inverse of [`Grid2D::fft2`], including the `1/N^2` normalization.
    pub(crate) fn ifft2(&self, data: &mut [Complex<S>]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.inv.process(data);
        transpose_square(data, self.n);
        self.inv.process(data);
        transpose_square(data, self.n);
        let scale = S::one() / rl::<S>((self.n * self.n) as f64);
        for z in data.iter_mut() {
            *z = z.scale(scale);
        }
    }
}

fn transpose_square<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// A complex scalar field on a [`Grid2D`]. Fields constructed from real data
/// carry a realness tag; operations that promise real output preserve it and
/// are checked by [`Field2D::check_real_tag`].
#[derive(Clone, Debug)]
pub struct Field2D<S: Real> {
    grid: Grid2D<S>,
    values: Vec<Complex<S>>,
    real_tag: bool,
}

impl<S: Real> Field2D<S> {
    pub fn zeros(grid: &Grid2D<S>) -> Self {
        Field2D {
            grid: grid.clone(),
            values: vec![Complex::default(); grid.n * grid.n],
            real_tag: true,
        }
    }

    pub fn from_fn(grid: &Grid2D<S>, mut f: impl FnMut(S, S) -> Complex<S>) -> Self {
        let n = grid.n;
        let mut values = Vec::with_capacity(n * n);
        for i1 in 0..n {
            let x1 = grid.coord(i1);
            for i2 in 0..n {
                values.push(f(x1, grid.coord(i2)));
            }
        }
        Field2D {
            grid: grid.clone(),
            values,
            real_tag: false,
        }
    }

    pub fn from_real_fn(grid: &Grid2D<S>, mut f: impl FnMut(S, S) -> S) -> Self {
        let mut out = Self::from_fn(grid, |x1, x2| Complex::new(f(x1, x2), S::zero()));
        out.real_tag = true;
        out
    }

    pub fn from_values(grid: &Grid2D<S>, values: Vec<Complex<S>>) -> Result<Self> {
        if values.len() != grid.n * grid.n {
            return Err(Error::InvalidInput(format!(
                "field needs {} samples for an N={} grid, got {}",
                grid.n * grid.n,
                grid.n,
                values.len()
            )));
        }
        Ok(Field2D {
            grid: grid.clone(),
            values,
            real_tag: false,
        })
    }

    pub fn from_real_values(grid: &Grid2D<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.n * grid.n {
            return Err(Error::InvalidInput(format!(
                "field needs {} samples for an N={} grid, got {}",
                grid.n * grid.n,
                grid.n,
                values.len()
            )));
        }
        Ok(Field2D {
            grid: grid.clone(),
            values: values
                .into_iter()
                .map(|x| Complex::new(x, S::zero()))
                .collect(),
            real_tag: true,
        })
    }

    pub fn grid(&self) -> &Grid2D<S> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<S>] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> Complex<S> {
        self.values[i1 * self.grid.n + i2]
    }

    pub fn is_real_tagged(&self) -> bool {
        self.real_tag
    }

    /// Sup norm of the imaginary part against the tag tolerance. The bound is
    /// `1e-12 * (1 + sup|Re|)`: absolute for order-one fields, relative for
    /// large ones.
    pub fn check_real_tag(&self) -> Result<()> {
        let sup_im = self
            .values
            .iter()
            .fold(S::zero(), |m, z| m.max(z.im.abs()));
        let sup_re = self
            .values
            .iter()
            .fold(S::zero(), |m, z| m.max(z.re.abs()));
        let tol = rl::<S>(1e-12) * (S::one() + sup_re);
        if sup_im > tol {
            return Err(Error::InvalidInput(format!(
                "field tagged real has imaginary part {sup_im:e} (tolerance {tol:e})"
            )));
        }
        Ok(())
    }

    /// Real-part projection; output carries the realness tag.
    pub fn re(&self) -> Field2D<S> {
        Field2D {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|z| Complex::new(z.re, S::zero()))
                .collect(),
            real_tag: true,
        }
    }

    pub fn conj(&self) -> Field2D<S> {
        Field2D {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
            real_tag: self.real_tag,
        }
    }

    pub fn add(&self, other: &Field2D<S>) -> Field2D<S> {
        self.zip(other, |a, b| a + b, self.real_tag && other.real_tag)
    }

    pub fn sub(&self, other: &Field2D<S>) -> Field2D<S> {
        self.zip(other, |a, b| a - b, self.real_tag && other.real_tag)
    }

    /// Pointwise product.
    pub fn hadamard(&self, other: &Field2D<S>) -> Field2D<S> {
        self.zip(other, |a, b| a * b, self.real_tag && other.real_tag)
    }

    /// Scale by a real factor (keeps the realness tag).
    pub fn scale_re(&self, s: S) -> Field2D<S> {
        Field2D {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.scale(s)).collect(),
            real_tag: self.real_tag,
        }
    }

    /// Scale by a complex factor (drops the tag).
    pub fn scale(&self, c: Complex<S>) -> Field2D<S> {
        Field2D {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
            real_tag: false,
        }
    }

    fn zip(
        &self,
        other: &Field2D<S>,
        f: impl Fn(Complex<S>, Complex<S>) -> Complex<S>,
        real_tag: bool,
    ) -> Field2D<S> {
        assert!(
            self.grid == other.grid,
            "grid mismatch: {:?} vs {:?}",
            self.grid,
            other.grid
        );
        Field2D {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            real_tag,
        }
    }

    pub fn sup_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |m, z| m.max(z.norm()))
    }

    /// Discrete L2 norm: `sqrt(h^2 * sum |f|^2)`.
    pub fn l2_norm(&self) -> S {
        let s = self
            .values
            .iter()
            .fold(S::zero(), |acc, z| acc + z.norm_sqr());
        (s * self.grid.h * self.grid.h).sqrt()
    }

    /// Grid mean (plain average of the samples).
    pub fn mean(&self) -> Complex<S> {
        let s = self
            .values
            .iter()
            .fold(Complex::<S>::default(), |acc, &z| acc + z);
        s.unscale(rl::<S>(self.values.len() as f64))
    }

    /// Plain unnormalized 2D DFT of the samples, mainly for tests and
    /// diagnostics. Layout matches [`Grid2D::frequencies`] per axis.
    pub fn dft_values(&self) -> Vec<Complex<S>> {
        let mut data = self.values.clone();
        self.grid.fft2(&mut data);
        data
    }

    /// Apply a Fourier multiplier. The closure receives the raw and the
    /// Nyquist-zeroed frequency of each axis: `(raw1, raw2, eff1, eff2)`.
    pub(crate) fn multiplier(
        &self,
        f: impl Fn(S, S, S, S) -> Complex<S>,
    ) -> Field2D<S> {
        let n = self.grid.n;
        let mut data = self.values.clone();
        self.grid.fft2(&mut data);
        for i1 in 0..n {
            let r1 = self.grid.freqs[i1];
            let e1 = self.grid.freq_eff(i1);
            for i2 in 0..n {
                let m = f(r1, self.grid.freqs[i2], e1, self.grid.freq_eff(i2));
                data[i1 * n + i2] = data[i1 * n + i2] * m;
            }
        }
        self.grid.ifft2(&mut data);
        Field2D {
            grid: self.grid.clone(),
            values: data,
            real_tag: false,
        }
    }

    /// Mixed partial derivative of order `(j1, j2)`, `j1 + j2 <= 3`, by the
    /// Fourier multiplier `(i xi1)^j1 (i xi2)^j2`. Odd orders per axis use the
    /// Nyquist-zeroed frequency of that axis.
    pub fn spectral_deriv(&self, order: (u32, u32)) -> Result<Field2D<S>> {
        let (j1, j2) = order;
        if j1 + j2 > 3 {
            return Err(Error::InvalidInput(format!(
                "derivative order ({j1},{j2}) exceeds the supported total order 3"
            )));
        }
        let mut out = self.multiplier(|r1, r2, e1, e2| {
            let x1 = if j1 % 2 == 1 { e1 } else { r1 };
            let x2 = if j2 % 2 == 1 { e2 } else { r2 };
            Complex::new(S::zero(), x1).powu(j1) * Complex::new(S::zero(), x2).powu(j2)
        });
        // A real field has a real derivative under the zeroed-Nyquist
        // convention; keep the promise exact rather than to rounding.
        if self.real_tag {
            out = out.re();
        }
        Ok(out)
    }

    /// `(1/2)(d/dx1 - i d/dx2)`, the holomorphic derivative.
    pub fn dz(&self) -> Field2D<S> {
        let half = rl::<S>(0.5);
        self.multiplier(|_, _, e1, e2| Complex::new(e2 * half, e1 * half))
    }

    /// `(1/2)(d/dx1 + i d/dx2)`.
    pub fn dzbar(&self) -> Field2D<S> {
        let half = rl::<S>(0.5);
        self.multiplier(|_, _, e1, e2| Complex::new(-e2 * half, e1 * half))
    }

    /// Sum of the two pure second derivatives (true Nyquist frequencies).
    pub fn laplacian(&self) -> Field2D<S> {
        let mut out = self.multiplier(|r1, r2, _, _| Complex::new(-(r1 * r1 + r2 * r2), S::zero()));
        if self.real_tag {
            out = out.re();
        }
        out
    }

    /// Spectral shift: the result samples `f(x - y)`. Uses the zeroed-Nyquist
    /// phase so real fields stay real; tagged input is re-projected.
    pub fn translate(&self, y: (S, S)) -> Field2D<S> {
        let mut out = self.multiplier(|_, _, e1, e2| {
            Complex::new(S::zero(), -(e1 * y.0 + e2 * y.1)).exp()
        });
        if self.real_tag {
            out = out.re();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cl;
    use proptest::prelude::*;

    fn sup_diff(a: &Field2D<f64>, b: &Field2D<f64>) -> f64 {
        a.sub(b).sup_norm()
    }

    #[test]
    fn spacing_is_exact() {
        let g = make_grid(20.0f64, 256).unwrap();
        assert_eq!(g.spacing(), 0.078125);
        assert_eq!(g.points_per_axis(), 256);
        assert_eq!(g.side_length(), 20.0);
    }

    #[test]
    fn frequency_set_matches_definition() {
        let g = make_grid(1.0f64, 8).unwrap();
        let mut fs: Vec<f64> = g.frequencies().to_vec();
        fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected: Vec<f64> = (-4..4).map(|m| 2.0 * std::f64::consts::PI * m as f64).collect();
        for (a, b) in fs.iter().zip(expected.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(matches!(
            make_grid(20.0f64, 255),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(make_grid(20.0f64, 6), Err(Error::InvalidInput(_))));
        assert!(matches!(make_grid(0.0f64, 16), Err(Error::InvalidInput(_))));
        assert!(matches!(make_grid(-3.0f64, 16), Err(Error::InvalidInput(_))));
        assert!(matches!(
            make_grid(f64::NAN, 16),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn origin_is_a_node() {
        let g = make_grid(20.0f64, 64).unwrap();
        assert_eq!(g.coord(32), 0.0);
        assert_eq!(g.coord(0), -10.0);
    }

    #[test]
    fn plane_wave_is_an_eigenfunction_of_the_derivative() {
        let g = make_grid(20.0f64, 32).unwrap();
        let k = 2.0 * std::f64::consts::PI / 20.0;
        let f = Field2D::from_fn(&g, |x1, _| cl(0.0, k * x1).exp());
        let d = f.spectral_deriv((1, 0)).unwrap();
        let expected = f.scale(cl(0.0, k));
        assert!(sup_diff(&d, &expected) < 1e-12);
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let g = make_grid(20.0f64, 16).unwrap();
        let f = Field2D::from_fn(&g, |_, _| cl(3.5, -1.25));
        for order in [(1, 0), (0, 1), (2, 0), (0, 3), (1, 2)] {
            let d = f.spectral_deriv(order).unwrap();
            assert!(d.sup_norm() < 1e-12, "order {order:?}");
        }
    }

    #[test]
    fn second_derivative_beats_finite_differences_at_their_own_rate() {
        // Centered-difference oracle: spectral result is treated as truth and
        // the FD error must shrink like h^2 when the grid is refined.
        let err_on = |n: usize| -> f64 {
            let g = make_grid(20.0f64, n).unwrap();
            let f = Field2D::from_real_fn(&g, |x1, x2| (-(x1 * x1 + x2 * x2)).exp());
            let d = f.spectral_deriv((2, 0)).unwrap();
            let h = g.spacing();
            let mut worst: f64 = 0.0;
            for i1 in 1..n - 1 {
                for i2 in 0..n {
                    let fd = (f.at(i1 + 1, i2).re - 2.0 * f.at(i1, i2).re
                        + f.at(i1 - 1, i2).re)
                        / (h * h);
                    worst = worst.max((fd - d.at(i1, i2).re).abs());
                }
            }
            worst
        };
        let e1 = err_on(64);
        let e2 = err_on(128);
        assert!(e1 > 1e-6, "FD error unexpectedly small: {e1:e}");
        let ratio = e1 / e2;
        assert!(
            (3.2..4.8).contains(&ratio),
            "expected O(h^2) convergence, got ratio {ratio}"
        );
    }

    #[test]
    fn order_above_three_is_rejected() {
        let g = make_grid(10.0f64, 16).unwrap();
        let f = Field2D::zeros(&g);
        assert!(matches!(
            f.spectral_deriv((2, 2)),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            f.spectral_deriv((4, 0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn dz_and_dzbar_agree_on_x1_waves() {
        let g = make_grid(20.0f64, 32).unwrap();
        let k = 2.0 * std::f64::consts::PI / 20.0;
        let f = Field2D::from_fn(&g, |x1, _| cl(0.0, k * x1).exp());
        let expected = f.scale(cl(0.0, 0.5 * k));
        assert!(sup_diff(&f.dz(), &expected) < 1e-12);
        assert!(sup_diff(&f.dzbar(), &expected) < 1e-12);
    }

    #[test]
    fn dzbar_of_real_field_conjugates_dz() {
        let g = make_grid(20.0f64, 32).unwrap();
        let f = Field2D::from_real_fn(&g, |x1, x2| {
            (-(x1 * x1 + 0.5 * x2 * x2)).exp() + 0.3 * (0.9 * x1).cos() * (0.3 * x2).sin()
        });
        assert!(sup_diff(&f.dzbar(), &f.dz().conj()) < 1e-12);
    }

    fn band_limited(g: &Grid2D<f64>, seed: u64) -> Field2D<f64> {
        // A handful of low modes with deterministic pseudo-random weights.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k0 = 2.0 * std::f64::consts::PI / g.side_length();
        let modes: Vec<(f64, f64, f64, f64)> = (0..6)
            .map(|_| {
                (
                    rng.gen_range(-3..=3i32) as f64 * k0,
                    rng.gen_range(-3..=3i32) as f64 * k0,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Field2D::from_real_fn(g, |x1, x2| {
            modes
                .iter()
                .map(|&(k1, k2, a, p)| a * (k1 * x1 + k2 * x2 + p).cos())
                .sum()
        })
    }

    #[test]
    fn four_dz_dzbar_is_the_laplacian() {
        let g = make_grid(20.0f64, 32).unwrap();
        for seed in 0..5 {
            let f = band_limited(&g, seed);
            let lhs = f.dz().dzbar().scale_re(4.0);
            let rhs = f.laplacian();
            assert!(sup_diff(&lhs, &rhs) <= 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn nyquist_mode_odd_derivative_vanishes() {
        let g = make_grid(8.0f64, 16).unwrap();
        // Alternating-sign field = pure Nyquist mode along x1.
        let f = Field2D::from_real_fn(&g, |x1, _| {
            let i = (x1 / g.spacing()).round() as i64;
            if i % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        });
        let d1 = f.spectral_deriv((1, 0)).unwrap();
        assert!(d1.sup_norm() < 1e-12);
        // Even order keeps the true frequency.
        let xi = g.frequencies()[8];
        assert!((xi.abs() - std::f64::consts::PI * 16.0 / 8.0).abs() < 1e-12);
        let d2 = f.spectral_deriv((2, 0)).unwrap();
        let expected = f.scale_re(-xi * xi);
        assert!(sup_diff(&d2, &expected) < 1e-9 * xi * xi);
    }

    #[test]
    fn translation_by_lattice_vectors_rotates_indices() {
        let g = make_grid(20.0f64, 32).unwrap();
        let f = band_limited(&g, 9);
        let h = g.spacing();
        let shifted = f.translate((3.0 * h, -2.0 * h));
        let n = 32;
        for i1 in 0..n {
            for i2 in 0..n {
                // f(x - y) at node i equals f at node i - 3 (mod n) etc.
                let j1 = (i1 + n - 3) % n;
                let j2 = (i2 + 2) % n;
                let d = (shifted.at(i1, i2) - f.at(j1, j2)).norm();
                assert!(d < 1e-11, "({i1},{i2}): {d:e}");
            }
        }
        assert!(shifted.is_real_tagged());
        shifted.check_real_tag().unwrap();
    }

    #[test]
    fn translation_composes_to_identity() {
        let g = make_grid(20.0f64, 32).unwrap();
        let f = band_limited(&g, 17);
        let back = f.translate((0.37, -1.21)).translate((-0.37, 1.21));
        assert!(sup_diff(&back, &f) <= 1e-12 * f.sup_norm().max(1.0));
    }

    #[test]
    fn real_tag_is_checked_and_propagated() {
        let g = make_grid(10.0f64, 16).unwrap();
        let f = Field2D::from_real_fn(&g, |x1, x2| (x1 + 2.0 * x2).sin());
        assert!(f.is_real_tagged());
        f.check_real_tag().unwrap();
        let d = f.spectral_deriv((1, 1)).unwrap();
        assert!(d.is_real_tagged());
        d.check_real_tag().unwrap();
        let c = Field2D::from_fn(&g, |_, _| cl(0.0, 1.0));
        assert!(!c.is_real_tagged());
        assert!(c.re().is_real_tagged());
    }

    #[test]
    fn mean_and_norms() {
        let g = make_grid(4.0f64, 8).unwrap();
        let f = Field2D::from_fn(&g, |_, _| cl(2.0, -1.0));
        assert!((f.mean() - cl(2.0, -1.0)).norm() < 1e-15);
        // l2 of a constant: |c| * L
        assert!((f.l2_norm() - 5.0f64.sqrt() * 4.0).abs() < 1e-12);
        assert!((f.sup_norm() - 5.0f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn fft_roundtrip_preserves_fields_and_norms(seed in 0u64..1000) {
            let g = make_grid(20.0f64, 16).unwrap();
            let f = band_limited(&g, seed);
            let mut data = f.values().to_vec();
            g.fft2(&mut data);
            // Parseval: sum |fhat|^2 = N^2 sum |f|^2.
            let shat: f64 = data.iter().map(|z| z.norm_sqr()).sum();
            let s: f64 = f.values().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((shat - 256.0 * s).abs() <= 1e-12 * shat.max(1e-300));
            g.ifft2(&mut data);
            let back = Field2D::from_values(&g, data).unwrap();
            let rel = back.sub(&f).l2_norm() / f.l2_norm().max(1e-300);
            prop_assert!(rel <= 1e-12);
        }

        #[test]
        fn mixed_derivatives_commute(seed in 0u64..1000) {
            let g = make_grid(20.0f64, 16).unwrap();
            let f = band_limited(&g, seed);
            let a = f.spectral_deriv((1, 0)).unwrap().spectral_deriv((0, 1)).unwrap();
            let b = f.spectral_deriv((0, 1)).unwrap().spectral_deriv((1, 0)).unwrap();
            prop_assert!(sup_diff(&a, &b) <= 1e-12 * f.sup_norm().max(1.0));
        }

        #[test]
        fn dz_dzbar_laplacian_property(seed in 0u64..1000) {
            let g = make_grid(20.0f64, 16).unwrap();
            let f = band_limited(&g, seed);
            let lhs = f.dzbar().dz().scale_re(4.0);
            prop_assert!(sup_diff(&lhs, &f.laplacian()) <= 1e-10 * f.sup_norm().max(1.0));
        }
    }
}
