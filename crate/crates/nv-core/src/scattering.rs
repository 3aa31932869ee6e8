//! Fixed-energy scattering for `-Laplace psi + v psi = E psi` on the plane.
//!
//! The integral form with the outgoing kernel `G = -(i/4) H0^(1)(sqrt(E) r)`,
//!
//! ```text
//! psi = e^{i k x} + int G(x - y) v(y) psi(y) dy,        k^2 = E,
//! ```
//!
//! is discretized by the Nystrom method on the grid cells where `v` is
//! nonzero and solved densely (one LU factorization per potential, one
//! back-substitution per incident direction). Cell integrals of the kernel
//! come from a lookup table over integer node offsets: the diagonal cell is
//! integrated analytically (the kernel has a log singularity), cells within
//! a few spacings get a refined midpoint rule, and everything farther uses
//! the midpoint value. Distances are true plane distances; the box never
//! wraps.
//!
//! The far-field amplitude is
//!
//! ```text
//! f(k, l) = (2 pi)^{-2} int e^{-i l y} v(y) psi(y, k) dy,    |l|^2 = E,
//! ```
//!
//! and the large-`r` form of the kernel gives the scattered wave
//! `c f(k, sqrt(E) x/r) e^{i sqrt(E) r} / sqrt(sqrt(E) r)` with
//! `c = -pi^{3/2} (1 + i)`, which [`far_field_fit`] checks on an annulus.

use num_complex::Complex;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::potential::Potential;
use crate::scalar::{rl, Real};
use crate::special::{greens_cell_integral, greens_kernel};

/// Offsets (Chebyshev distance) that get the refined near-field quadrature.
const NEAR_FIELD_CELLS: usize = 4;
/// Refinement factor of the near-field midpoint rule.
const NEAR_FIELD_SUBDIV: usize = 16;

/// A plane wave `e^{i k x}` on the energy shell `|k|^2 = E`.
#[derive(Clone, Copy, Debug)]
pub struct IncidentWave<S: Real> {
    k: (S, S),
    e: S,
}

impl<S: Real> IncidentWave<S> {
    pub fn new(k: (S, S), e: S) -> Result<Self> {
        if !(e > S::zero()) || !e.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scattering requires positive energy, got {e}"
            )));
        }
        let k2 = k.0 * k.0 + k.1 * k.1;
        if (k2 - e).abs() > rl::<S>(1e-12) * e {
            return Err(Error::OffShell(format!(
                "|k|^2 = {k2:e} does not match the energy {e:e}"
            )));
        }
        Ok(IncidentWave { k, e })
    }

    pub fn from_angle(theta: S, e: S) -> Result<Self> {
        if !(e > S::zero()) || !e.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scattering requires positive energy, got {e}"
            )));
        }
        let s = e.sqrt();
        Ok(IncidentWave {
            k: (s * theta.cos(), s * theta.sin()),
            e,
        })
    }

    pub fn k(&self) -> (S, S) {
        self.k
    }

    pub fn energy(&self) -> S {
        self.e
    }

    pub fn angle(&self) -> S {
        self.k.1.atan2(self.k.0)
    }

    pub fn eval(&self, x1: S, x2: S) -> Complex<S> {
        Complex::new(S::zero(), self.k.0 * x1 + self.k.1 * x2).exp()
    }
}

struct Core<S: Real> {
    grid: Grid2D<S>,
    e: S,
    sup_v: S,
    /// Flat node indices carrying the potential, and its values there.
    active: Vec<u32>,
    v_active: Vec<S>,
    /// Cell integrals of the kernel by absolute node offset `(d1, d2)`.
    table: Vec<Complex<S>>,
    factored: Vec<Complex<S>>,
    pivots: Vec<i32>,
    rcond: S,
}

impl<S: Real> Core<S> {
    fn table_at(&self, d1: usize, d2: usize) -> Complex<S> {
        self.table[d1 * self.grid.points_per_axis() + d2]
    }
}

/// Factorized Lippmann-Schwinger operator for one potential at one energy.
pub struct Solver<S: Real> {
    core: Arc<Core<S>>,
}

fn build_table<S: Real>(grid: &Grid2D<S>, e: S) -> Result<Vec<Complex<S>>> {
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let mut table = vec![Complex::default(); n * n];
    let h2 = h * h;
    for d1 in 0..n {
        for d2 in 0..n {
            let entry = if d1 == 0 && d2 == 0 {
                greens_cell_integral(e, h)?
            } else if d1 <= NEAR_FIELD_CELLS && d2 <= NEAR_FIELD_CELLS {
                // Kernel curvature is still significant here; average the
                // kernel over a subdivided cell.
                let m = NEAR_FIELD_SUBDIV;
                let mut acc = Complex::<S>::default();
                for a in 0..m {
                    for b in 0..m {
                        let y1 = (rl::<S>(a as f64) + rl::<S>(0.5)) / rl::<S>(m as f64)
                            - rl::<S>(0.5);
                        let y2 = (rl::<S>(b as f64) + rl::<S>(0.5)) / rl::<S>(m as f64)
                            - rl::<S>(0.5);
                        let r1 = (rl::<S>(d1 as f64) - y1) * h;
                        let r2 = (rl::<S>(d2 as f64) - y2) * h;
                        acc += greens_kernel(e, (r1 * r1 + r2 * r2).sqrt())?;
                    }
                }
                acc.scale(h2 / rl::<S>((m * m) as f64))
            } else {
                let r = h * (rl::<S>((d1 * d1) as f64) + rl::<S>((d2 * d2) as f64)).sqrt();
                greens_kernel(e, r)?.scale(h2)
            };
            table[d1 * n + d2] = entry;
        }
    }
    Ok(table)
}

impl<S: Real> Solver<S> {
    /// Build the active set, assemble `I - G v`, and factorize it.
    pub fn new(p: &Potential<S>, e: S) -> Result<Self> {
        if !(e > S::zero()) || !e.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scattering requires positive energy, got {e}"
            )));
        }
        if !p.is_localized() {
            return Err(Error::InvalidInput(
                "scattering needs a localized potential; line profiles do not decay".into(),
            ));
        }
        let grid = p.field().grid().clone();
        let n = grid.points_per_axis();
        let sup_v = p.sup_norm();
        let threshold = rl::<S>(1e-12) * sup_v;
        let mut active = Vec::new();
        let mut v_active = Vec::new();
        for (idx, z) in p.field().values().iter().enumerate() {
            if z.re.abs() > threshold {
                active.push(idx as u32);
                v_active.push(z.re);
            }
        }
        let table = build_table(&grid, e)?;
        let na = active.len();
        if na == 0 {
            return Ok(Solver {
                core: Arc::new(Core {
                    grid,
                    e,
                    sup_v,
                    active,
                    v_active,
                    table,
                    factored: Vec::new(),
                    pivots: Vec::new(),
                    rcond: S::one(),
                }),
            });
        }

        let coords: Vec<(u32, u32)> = active
            .iter()
            .map(|&i| (i / n as u32, i % n as u32))
            .collect();
        // Column-major assembly of A = I - K, K[i][j] = cellint(x_i - y_j) v_j.
        let mut a = vec![Complex::<S>::default(); na * na];
        for (jc, &(j1, j2)) in coords.iter().enumerate() {
            let vj = v_active[jc];
            let col = &mut a[jc * na..(jc + 1) * na];
            for (ir, &(i1, i2)) in coords.iter().enumerate() {
                let d1 = i1.abs_diff(j1) as usize;
                let d2 = i2.abs_diff(j2) as usize;
                col[ir] = -table[d1 * n + d2].scale(vj);
            }
            col[jc] += Complex::new(S::one(), S::zero());
        }
        let anorm = S::opnorm_one(na, na, &a);
        let pivots = S::lu_factor(na, &mut a)?;
        let rcond = S::rcond(na, &a, anorm)?;
        if rcond < rl::<S>(1e-12) {
            return Err(Error::SingularSystem(format!(
                "discrete system is numerically singular (rcond {rcond:e}); \
                 the energy sits too close to a resonance of this potential"
            )));
        }
        Ok(Solver {
            core: Arc::new(Core {
                grid,
                e,
                sup_v,
                active,
                v_active,
                table,
                factored: a,
                pivots,
                rcond,
            }),
        })
    }

    pub fn energy(&self) -> S {
        self.core.e
    }

    pub fn grid(&self) -> &Grid2D<S> {
        &self.core.grid
    }

    pub fn active_cells(&self) -> usize {
        self.core.active.len()
    }

    pub fn rcond(&self) -> S {
        self.core.rcond
    }

    /// Conditioning is poor enough that amplitudes lose several digits;
    /// usually a sign of a nearby interior resonance.
    pub fn resonance_warning(&self) -> bool {
        self.core.rcond < rl::<S>(1e-8)
    }

    /// Expected scale of the discretization error, for residual checks.
    pub fn tolerance(&self) -> S {
        let h = self.core.grid.spacing();
        let e = self.core.e;
        h * h * (S::one() + e) * (S::one() + e) * (S::one() + self.core.sup_v)
    }

    /// Solve for one incident wave (a back-substitution).
    pub fn solve(&self, inc: &IncidentWave<S>) -> Result<ScatteringSolution<S>> {
        let c = &self.core;
        if (inc.energy() - c.e).abs() > rl::<S>(1e-12) * c.e {
            return Err(Error::InvalidInput(format!(
                "incident wave energy {:e} does not match the solver energy {:e}",
                inc.energy(),
                c.e
            )));
        }
        let n = c.grid.points_per_axis();
        let mut b: Vec<Complex<S>> = c
            .active
            .iter()
            .map(|&idx| {
                let i1 = (idx as usize) / n;
                let i2 = (idx as usize) % n;
                inc.eval(c.grid.coord(i1), c.grid.coord(i2))
            })
            .collect();
        if !c.active.is_empty() {
            S::lu_solve(c.active.len(), &c.factored, &c.pivots, &mut b)?;
        }
        Ok(ScatteringSolution {
            core: Arc::clone(&self.core),
            inc: *inc,
            psi_active: b,
        })
    }
}

/// One total wave `psi(., k)`, known exactly on the active cells and
/// extended everywhere else through the integral identity.
pub struct ScatteringSolution<S: Real> {
    core: Arc<Core<S>>,
    inc: IncidentWave<S>,
    psi_active: Vec<Complex<S>>,
}

impl<S: Real> ScatteringSolution<S> {
    pub fn incident(&self) -> &IncidentWave<S> {
        &self.inc
    }

    pub fn grid(&self) -> &Grid2D<S> {
        &self.core.grid
    }

    pub fn energy(&self) -> S {
        self.core.e
    }

    /// Total wave at a grid node, via the kernel table.
    pub fn psi_at_node(&self, i1: usize, i2: usize) -> Complex<S> {
        let c = &self.core;
        let n = c.grid.points_per_axis();
        let mut acc = self.inc.eval(c.grid.coord(i1), c.grid.coord(i2));
        for (ja, &idx) in c.active.iter().enumerate() {
            let j1 = (idx as usize) / n;
            let j2 = (idx as usize) % n;
            let d1 = i1.abs_diff(j1);
            let d2 = i2.abs_diff(j2);
            acc += c.table_at(d1, d2).scale(c.v_active[ja]) * self.psi_active[ja];
        }
        acc
    }

    /// Total wave on a list of nodes. Cost is `O(nodes * active)`.
    pub fn psi_on_indices(&self, nodes: &[(usize, usize)]) -> Vec<Complex<S>> {
        nodes
            .iter()
            .map(|&(i1, i2)| self.psi_at_node(i1, i2))
            .collect()
    }

    /// The full total wave as a field. Cost is `O(N^2 * active)`; meant for
    /// modest grids.
    pub fn psi_field(&self) -> Field2D<S> {
        let n = self.core.grid.points_per_axis();
        let mut values = vec![Complex::default(); n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                values[i1 * n + i2] = self.psi_at_node(i1, i2);
            }
        }
        Field2D::from_values(&self.core.grid, values).expect("sized to the grid")
    }

    /// `psi - e^{ikx}` at a node.
    pub fn scattered_at_node(&self, i1: usize, i2: usize) -> Complex<S> {
        let c = &self.core;
        self.psi_at_node(i1, i2) - self.inc.eval(c.grid.coord(i1), c.grid.coord(i2))
    }
}

/// Far-field amplitude of a solution in outgoing direction `l`, `|l|^2 = E`.
pub fn far_field_amplitude<S: Real>(
    sol: &ScatteringSolution<S>,
    l: (S, S),
) -> Result<Complex<S>> {
    let c = &sol.core;
    let l2 = l.0 * l.0 + l.1 * l.1;
    if (l2 - c.e).abs() > rl::<S>(1e-12) * c.e {
        return Err(Error::OffShell(format!(
            "|l|^2 = {l2:e} is off the energy shell {:e}",
            c.e
        )));
    }
    let n = c.grid.points_per_axis();
    let h2 = c.grid.spacing() * c.grid.spacing();
    let mut acc = Complex::<S>::default();
    for (ja, &idx) in c.active.iter().enumerate() {
        let j1 = (idx as usize) / n;
        let j2 = (idx as usize) % n;
        let y1 = c.grid.coord(j1);
        let y2 = c.grid.coord(j2);
        let phase = Complex::new(S::zero(), -(l.0 * y1 + l.1 * y2)).exp();
        acc += phase.scale(c.v_active[ja]) * sol.psi_active[ja];
    }
    let two_pi = rl::<S>(2.0) * S::PI();
    Ok(acc.scale(h2 / (two_pi * two_pi)))
}

/// The amplitude on an `M x M` grid of incident and outgoing directions
/// `theta_i = 2 pi i / M`. Row index = incident direction, column =
/// outgoing. Unit-circle points `lambda = e^{i theta}` index the same data
/// on the torus parameterization of the energy shell.
pub struct ScatteringAmplitude<S: Real> {
    e: S,
    m: usize,
    entries: Vec<Complex<S>>,
}

impl<S: Real> ScatteringAmplitude<S> {
    pub fn energy(&self) -> S {
        self.e
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn theta(&self, i: usize) -> S {
        rl::<S>(2.0) * S::PI() * rl::<S>(i as f64) / rl::<S>(self.m as f64)
    }

    /// Unit-circle coordinate of direction `i` on the energy shell.
    pub fn lambda(&self, i: usize) -> Complex<S> {
        Complex::new(S::zero(), self.theta(i)).exp()
    }

    pub fn at(&self, ik: usize, il: usize) -> Complex<S> {
        self.entries[ik * self.m + il]
    }

    pub fn row(&self, ik: usize) -> &[Complex<S>] {
        &self.entries[ik * self.m..(ik + 1) * self.m]
    }

    pub fn entries(&self) -> &[Complex<S>] {
        &self.entries
    }

    /// Build an amplitude from raw entries (row-major, `m * m`).
    pub fn from_entries(e: S, m: usize, entries: Vec<Complex<S>>) -> Result<Self> {
        if m < 16 {
            return Err(Error::InvalidInput(format!(
                "direction count must be at least 16, got {m}"
            )));
        }
        if entries.len() != m * m {
            return Err(Error::InvalidInput(format!(
                "expected {} entries, got {}",
                m * m,
                entries.len()
            )));
        }
        if !(e > S::zero()) {
            return Err(Error::InvalidInput(format!(
                "amplitudes live at positive energy, got {e}"
            )));
        }
        Ok(ScatteringAmplitude { e, m, entries })
    }

    /// Largest relative second difference along rows and columns; a proxy
    /// for continuity in the angles. Errors on non-finite entries.
    pub fn continuity_defect(&self) -> Result<S> {
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Instability(
                "amplitude contains non-finite entries".into(),
            ));
        }
        let m = self.m;
        let sup = self
            .entries
            .iter()
            .fold(S::zero(), |acc, z| acc.max(z.norm()));
        if sup == S::zero() {
            return Ok(S::zero());
        }
        let mut worst = S::zero();
        for a in 0..m {
            for b in 0..m {
                let along_l =
                    self.at(a, (b + 1) % m) - self.at(a, b).scale(rl::<S>(2.0)) + self.at(a, (b + m - 1) % m);
                let along_k =
                    self.at((a + 1) % m, b) - self.at(a, b).scale(rl::<S>(2.0)) + self.at((a + m - 1) % m, b);
                worst = worst.max(along_l.norm()).max(along_k.norm());
            }
        }
        Ok(worst / sup)
    }
}

/// Solve for every incident direction and assemble the `m x m` amplitude.
pub fn scattering_amplitude<S: Real>(solver: &Solver<S>, m: usize) -> Result<ScatteringAmplitude<S>> {
    if m < 16 {
        return Err(Error::InvalidInput(format!(
            "direction count must be at least 16, got {m}"
        )));
    }
    let e = solver.energy();
    let s = e.sqrt();
    let two_pi = rl::<S>(2.0) * S::PI();
    let mut entries = vec![Complex::default(); m * m];
    for ik in 0..m {
        let theta = two_pi * rl::<S>(ik as f64) / rl::<S>(m as f64);
        let inc = IncidentWave::new((s * theta.cos(), s * theta.sin()), e)?;
        let sol = solver.solve(&inc)?;
        for il in 0..m {
            let phi = two_pi * rl::<S>(il as f64) / rl::<S>(m as f64);
            let l = (s * phi.cos(), s * phi.sin());
            entries[ik * m + il] = far_field_amplitude(&sol, l)?;
        }
    }
    ScatteringAmplitude::from_entries(e, m, entries)
}

/// Convenience: factorize and solve for a single incident wave.
pub fn solve_lippmann_schwinger<S: Real>(
    p: &Potential<S>,
    e: S,
    inc: &IncidentWave<S>,
) -> Result<ScatteringSolution<S>> {
    Solver::new(p, e)?.solve(inc)
}

/// Sup norm of the amplitude entries.
pub fn amplitude_norm<S: Real>(amp: &ScatteringAmplitude<S>) -> S {
    amp.entries
        .iter()
        .fold(S::zero(), |acc, z| acc.max(z.norm()))
}

/// Trigonometric interpolation of one amplitude row at angle `phi`.
fn interp_row<S: Real>(row: &[Complex<S>], phi: S) -> Complex<S> {
    let m = row.len();
    let mf = rl::<S>(m as f64);
    let two_pi = rl::<S>(2.0) * S::PI();
    // DFT coefficients c_q, q = -m/2 .. m/2-1, evaluated directly.
    let mut acc = Complex::<S>::default();
    for q in 0..m {
        let qi = if q <= m / 2 { q as f64 } else { q as f64 - m as f64 };
        let mut cq = Complex::<S>::default();
        for (j, &f) in row.iter().enumerate() {
            let ang = -two_pi * rl::<S>(q as f64) * rl::<S>(j as f64) / mf;
            cq += f * Complex::new(S::zero(), ang).exp();
        }
        cq = cq.scale(S::one() / mf);
        if q == m / 2 {
            // Nyquist mode: symmetrize to the cosine.
            acc += cq.scale((rl::<S>(qi) * phi).cos());
        } else {
            acc += cq * Complex::new(S::zero(), rl::<S>(qi) * phi).exp();
        }
    }
    acc
}

/// Measure how well the scattered wave matches its far-field form on an
/// annulus of radius `radius_frac * L/2` (three cells thick each way).
///
/// Returns the relative sup defect between the extended scattered field and
/// `c f(k, sqrt(E) x/r) e^{i sqrt(E) r} / sqrt(sqrt(E) r)`. The amplitude
/// must contain the solution's incident direction among its rows; the row
/// is interpolated trigonometrically to the node directions. The potential
/// must be negligible on the annulus, otherwise the comparison is
/// meaningless and an annulus error is returned.
pub fn far_field_fit<S: Real>(
    sol: &ScatteringSolution<S>,
    amp: &ScatteringAmplitude<S>,
    radius_frac: S,
) -> Result<S> {
    let c = &sol.core;
    if !(radius_frac >= rl::<S>(0.3) && radius_frac <= rl::<S>(0.45)) {
        return Err(Error::InvalidInput(format!(
            "annulus radius fraction must lie in [0.3, 0.45], got {radius_frac}"
        )));
    }
    if (amp.energy() - c.e).abs() > rl::<S>(1e-12) * c.e {
        return Err(Error::InvalidInput(
            "amplitude and solution are at different energies".into(),
        ));
    }
    // Locate the incident direction among the amplitude rows.
    let two_pi = rl::<S>(2.0) * S::PI();
    let theta_k = {
        let t = sol.inc.angle();
        if t < S::zero() {
            t + two_pi
        } else {
            t
        }
    };
    let m = amp.size();
    let step = two_pi / rl::<S>(m as f64);
    let ratio = theta_k / step;
    let nearest = ratio.round();
    if (ratio - nearest).abs() > rl::<S>(1e-9) {
        return Err(Error::InvalidInput(format!(
            "incident angle {theta_k} is not one of the {m} amplitude directions"
        )));
    }
    let row = amp.row(nearest.to_usize().unwrap_or(0) % m);

    let grid = &c.grid;
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let radius = radius_frac * grid.side_length() * rl::<S>(0.5);
    let band = rl::<S>(3.0) * h;
    let mut nodes = Vec::new();
    for i1 in 0..n {
        let x1 = grid.coord(i1);
        for i2 in 0..n {
            let x2 = grid.coord(i2);
            let r = (x1 * x1 + x2 * x2).sqrt();
            if (r - radius).abs() <= band {
                nodes.push((i1, i2));
            }
        }
    }
    if nodes.len() < 16 {
        return Err(Error::AnnulusTooSmall(format!(
            "only {} nodes within the annulus at radius {radius}",
            nodes.len()
        )));
    }
    let leak = rl::<S>(1e-12) * c.sup_v;
    for &(i1, i2) in &nodes {
        let vi = p_value(c, i1, i2);
        if vi.abs() > leak {
            return Err(Error::AnnulusTooSmall(format!(
                "potential reaches the fit annulus (|v| = {:e} at node ({i1}, {i2}))",
                vi.abs()
            )));
        }
    }

    let sqrt_e = c.e.sqrt();
    // c = -pi^{3/2} (1 + i): the constant in front of f e^{i sqrt(E) r} / sqrt(sqrt(E) r).
    let pi32 = S::PI().powf(rl::<S>(1.5));
    let cff = Complex::new(-pi32, -pi32);
    let mut sup_dev = S::zero();
    let mut sup_pred = S::zero();
    for &(i1, i2) in &nodes {
        let x1 = grid.coord(i1);
        let x2 = grid.coord(i2);
        let r = (x1 * x1 + x2 * x2).sqrt();
        let phi = x2.atan2(x1);
        let f = interp_row(row, phi);
        let pred = cff * f * Complex::new(S::zero(), sqrt_e * r).exp().scale(S::one() / (sqrt_e * r).sqrt());
        let actual = sol.scattered_at_node(i1, i2);
        sup_dev = sup_dev.max((actual - pred).norm());
        sup_pred = sup_pred.max(pred.norm());
    }
    if sup_pred == S::zero() {
        if sup_dev == S::zero() {
            return Ok(S::zero());
        }
        return Err(Error::DegenerateFit(
            "predicted far field vanishes on the annulus but the wave does not".into(),
        ));
    }
    Ok(sup_dev / sup_pred)
}

/// Potential value at a node, zero when the node is not active.
fn p_value<S: Real>(c: &Core<S>, i1: usize, i2: usize) -> S {
    let n = c.grid.points_per_axis();
    let flat = (i1 * n + i2) as u32;
    match c.active.binary_search(&flat) {
        Ok(pos) => c.v_active[pos],
        Err(_) => S::zero(),
    }
}
