//! Potential families and their sampling onto grids.
//!
//! Everything downstream assumes the potential is effectively compactly
//! supported inside the box: sampling analytic families rejects fields whose
//! boundary ring is not far below the amplitude. The KdV line profile is
//! flagged as non-localized instead (constant along `x2`), and custom grids
//! are taken at face value: their samples are the potential, zero outside.

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::nv::{nv_rhs_fields, solve_w};
use crate::scalar::{rl, Real};

/// One Gaussian term `A exp(-|x - c|^2 / sigma^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTerm<S> {
    pub amplitude: S,
    pub width: S,
    pub center: (S, S),
}

/// Analytic potential families plus a raw-grid escape hatch.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec<S> {
    /// `A exp(-|x - c|^2 / sigma^2)` with `width = sigma`.
    Gaussian { amplitude: S, width: S, center: (S, S) },
    MultiGaussian { terms: Vec<GaussianTerm<S>> },
    /// `A exp(-|x - c| / sigma)` with `scale = sigma`; decay exponent `1/sigma`.
    ExponentialBump { amplitude: S, scale: S, center: (S, S) },
    /// `-2 kappa^2 sech^2(kappa (x1 - phase))`, constant in `x2`. Not
    /// localized in the plane.
    KdvLine { kappa: S, phase: S },
    /// Row-major `n x n` node values; `shift` accumulates translations and is
    /// applied spectrally at sampling time.
    CustomGrid { values: Vec<S>, shift: (S, S) },
}

/// The KdV one-soliton profile `-2 kappa^2 / cosh^2(kappa (x - phase))`.
pub fn kdv_soliton_profile<S: Real>(kappa: S, phase: S, x: S) -> S {
    let c = (kappa * (x - phase)).cosh();
    rl::<S>(-2.0) * kappa * kappa / (c * c)
}

/// Least-squares decay exponent from radial shell amplitudes.
#[derive(Clone, Copy, Debug)]
pub struct DecayEstimate<S> {
    /// Fitted `alpha` in `|v| ~ exp(-alpha r)` over the outer shells.
    pub alpha_hat: S,
    /// Set when the local rate keeps steepening with radius, as for a
    /// Gaussian; `alpha_hat` is then only a window average.
    pub super_exponential: bool,
}

/// A potential sampled on a grid, with localization metadata.
#[derive(Clone, Debug)]
pub struct Potential<S: Real> {
    spec: PotentialSpec<S>,
    field: Field2D<S>,
    sup_norm: S,
    decay: Option<DecayEstimate<S>>,
}

impl<S: Real> Potential<S> {
    pub fn spec(&self) -> &PotentialSpec<S> {
        &self.spec
    }

    pub fn field(&self) -> &Field2D<S> {
        &self.field
    }

    pub fn sup_norm(&self) -> S {
        self.sup_norm
    }

    /// `None` for the non-localized line profile and for the zero field.
    pub fn decay_exponent_estimate(&self) -> Option<S> {
        self.decay.map(|d| d.alpha_hat)
    }

    pub fn is_super_exponential(&self) -> bool {
        self.decay.map(|d| d.super_exponential).unwrap_or(false)
    }

    pub fn is_localized(&self) -> bool {
        !matches!(self.spec, PotentialSpec::KdvLine { .. })
    }
}

fn eval_analytic<S: Real>(spec: &PotentialSpec<S>, x1: S, x2: S) -> S {
    match spec {
        PotentialSpec::Gaussian {
            amplitude,
            width,
            center,
        } => {
            let d1 = x1 - center.0;
            let d2 = x2 - center.1;
            *amplitude * (-(d1 * d1 + d2 * d2) / (*width * *width)).exp()
        }
        PotentialSpec::MultiGaussian { terms } => terms
            .iter()
            .map(|t| {
                let d1 = x1 - t.center.0;
                let d2 = x2 - t.center.1;
                t.amplitude * (-(d1 * d1 + d2 * d2) / (t.width * t.width)).exp()
            })
            .fold(S::zero(), |a, b| a + b),
        PotentialSpec::ExponentialBump {
            amplitude,
            scale,
            center,
        } => {
            let d1 = x1 - center.0;
            let d2 = x2 - center.1;
            *amplitude * (-(d1 * d1 + d2 * d2).sqrt() / *scale).exp()
        }
        PotentialSpec::KdvLine { kappa, phase } => kdv_soliton_profile(*kappa, *phase, x1),
        PotentialSpec::CustomGrid { .. } => unreachable!("custom grids are not analytic"),
    }
}

fn validate_spec<S: Real>(spec: &PotentialSpec<S>) -> Result<()> {
    let finite = |s: S, what: &str| -> Result<()> {
        if s.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{what} must be finite, got {s}")))
        }
    };
    match spec {
        PotentialSpec::Gaussian {
            amplitude,
            width,
            center,
        } => {
            finite(*amplitude, "amplitude")?;
            finite(center.0, "center")?;
            finite(center.1, "center")?;
            if !(*width > S::zero()) {
                return Err(Error::InvalidInput(format!(
                    "gaussian width must be positive, got {width}"
                )));
            }
        }
        PotentialSpec::MultiGaussian { terms } => {
            if terms.is_empty() {
                return Err(Error::InvalidInput("multi-gaussian needs terms".into()));
            }
            for t in terms {
                validate_spec(&PotentialSpec::Gaussian {
                    amplitude: t.amplitude,
                    width: t.width,
                    center: t.center,
                })?;
            }
        }
        PotentialSpec::ExponentialBump {
            amplitude,
            scale,
            center,
        } => {
            finite(*amplitude, "amplitude")?;
            finite(center.0, "center")?;
            finite(center.1, "center")?;
            if !(*scale > S::zero()) {
                return Err(Error::InvalidInput(format!(
                    "bump scale must be positive, got {scale}"
                )));
            }
        }
        PotentialSpec::KdvLine { kappa, phase } => {
            finite(*phase, "phase")?;
            if !(*kappa > S::zero()) {
                return Err(Error::InvalidInput(format!(
                    "soliton parameter must be positive, got {kappa}"
                )));
            }
        }
        PotentialSpec::CustomGrid { values, shift } => {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(
                    "custom grid contains non-finite values".into(),
                ));
            }
            finite(shift.0, "shift")?;
            finite(shift.1, "shift")?;
        }
    }
    Ok(())
}

fn boundary_ring_max<S: Real>(f: &Field2D<S>) -> S {
    let n = f.grid().points_per_axis();
    let mut m = S::zero();
    for i in 0..n {
        m = m
            .max(f.at(0, i).norm())
            .max(f.at(n - 1, i).norm())
            .max(f.at(i, 0).norm())
            .max(f.at(i, n - 1).norm());
    }
    m
}

/// Sample a spec onto a grid, enforcing localization inside the box.
///
/// Analytic families fail with a boundary-leak error when the outermost
/// node ring exceeds `1e-8` of the sup norm (callers should stay below
/// `1e-10` for clean spectra). Custom grids skip the gate: their samples
/// define the potential outright, zero outside the box, and fields coming
/// off the flow at positive energy legitimately carry slow polynomial
/// halos. They must match the grid size exactly and are shifted spectrally
/// when carrying a translation.
pub fn sample_potential<S: Real>(spec: &PotentialSpec<S>, grid: &Grid2D<S>) -> Result<Potential<S>> {
    validate_spec(spec)?;
    let field = match spec {
        PotentialSpec::CustomGrid { values, shift } => {
            let n = grid.points_per_axis();
            if values.len() != n * n {
                return Err(Error::InvalidInput(format!(
                    "custom grid has {} values, grid wants {}",
                    values.len(),
                    n * n
                )));
            }
            let base = Field2D::from_real_values(grid, values.clone())?;
            if *shift == (S::zero(), S::zero()) {
                base
            } else {
                base.translate(*shift)
            }
        }
        _ => Field2D::from_real_fn(grid, |x1, x2| eval_analytic(spec, x1, x2)),
    };
    let sup_norm = field.sup_norm();
    let gated = !matches!(
        spec,
        PotentialSpec::KdvLine { .. } | PotentialSpec::CustomGrid { .. }
    );
    if sup_norm > S::zero() && gated {
        let ring = boundary_ring_max(&field);
        if ring > rl::<S>(1e-8) * sup_norm {
            return Err(Error::BoundaryLeak(format!(
                "boundary ring reaches {ring:e} against amplitude {sup_norm:e}; \
                 enlarge the box or tighten the profile"
            )));
        }
    }
    // Metadata only: on grids too coarse to fit a rate, sample anyway.
    let decay = match spec {
        PotentialSpec::KdvLine { .. } => None,
        _ if sup_norm == S::zero() => None,
        _ => decay_rate_estimate(&field).ok(),
    };
    Ok(Potential {
        spec: spec.clone(),
        field,
        sup_norm,
        decay,
    })
}

/// Translate a spec by `y`: analytic centers shift, custom grids accumulate
/// a spectral shift. Exact group law: translating twice equals translating
/// by the sum.
pub fn translate_spec<S: Real>(spec: &PotentialSpec<S>, y: (S, S)) -> PotentialSpec<S> {
    match spec {
        PotentialSpec::Gaussian {
            amplitude,
            width,
            center,
        } => PotentialSpec::Gaussian {
            amplitude: *amplitude,
            width: *width,
            center: (center.0 + y.0, center.1 + y.1),
        },
        PotentialSpec::MultiGaussian { terms } => PotentialSpec::MultiGaussian {
            terms: terms
                .iter()
                .map(|t| GaussianTerm {
                    amplitude: t.amplitude,
                    width: t.width,
                    center: (t.center.0 + y.0, t.center.1 + y.1),
                })
                .collect(),
        },
        PotentialSpec::ExponentialBump {
            amplitude,
            scale,
            center,
        } => PotentialSpec::ExponentialBump {
            amplitude: *amplitude,
            scale: *scale,
            center: (center.0 + y.0, center.1 + y.1),
        },
        PotentialSpec::KdvLine { kappa, phase } => PotentialSpec::KdvLine {
            kappa: *kappa,
            phase: *phase + y.0,
        },
        PotentialSpec::CustomGrid { values, shift } => PotentialSpec::CustomGrid {
            values: values.clone(),
            shift: (shift.0 + y.0, shift.1 + y.1),
        },
    }
}

/// Estimate the radial decay exponent of `|f|` by shell maxima.
///
/// Shells of width `h` cover radii up to `L/2`; shells whose amplitude falls
/// below `1e-14` of the sup norm are discarded, the fit runs over the outer
/// half of what survives, and the two halves of the fit window are compared
/// to detect a steepening (super-exponential) rate. Fewer than four usable
/// shells is a degenerate fit, as is the zero field.
pub fn decay_rate_estimate<S: Real>(f: &Field2D<S>) -> Result<DecayEstimate<S>> {
    let g = f.grid();
    let n = g.points_per_axis();
    let h = g.spacing();
    let sup = f.sup_norm();
    if sup == S::zero() {
        return Err(Error::DegenerateFit("zero field has no decay rate".into()));
    }
    let nshell = n / 2;
    let mut amp = vec![S::zero(); nshell];
    for i1 in 0..n {
        let x1 = g.coord(i1);
        for i2 in 0..n {
            let x2 = g.coord(i2);
            let r = (x1 * x1 + x2 * x2).sqrt();
            let j = (r / h).to_usize().unwrap_or(usize::MAX);
            if j < nshell {
                amp[j] = amp[j].max(f.at(i1, i2).norm());
            }
        }
    }
    let floor = rl::<S>(1e-14) * sup;
    let valid: Vec<usize> = (0..nshell).filter(|&j| amp[j] > floor).collect();
    let window = &valid[valid.len() / 2..];
    if window.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "only {} usable shells above the amplitude floor",
            window.len()
        )));
    }
    let slope = |ix: &[usize]| -> S {
        let m = rl::<S>(ix.len() as f64);
        let half = rl::<S>(0.5);
        let (mut sr, mut sy, mut srr, mut sry) =
            (S::zero(), S::zero(), S::zero(), S::zero());
        for &j in ix {
            let r = (rl::<S>(j as f64) + half) * h;
            let y = amp[j].ln();
            sr += r;
            sy += y;
            srr += r * r;
            sry += r * y;
        }
        (m * sry - sr * sy) / (m * srr - sr * sr)
    };
    let alpha_hat = (-slope(window)).max(S::zero());
    let mid = window.len() / 2;
    let a_inner = -slope(&window[..mid]);
    let a_outer = -slope(&window[mid..]);
    let super_exponential = a_inner > S::zero() && a_outer > rl::<S>(1.2) * a_inner;
    Ok(DecayEstimate {
        alpha_hat,
        super_exponential,
    })
}

/// Discrete L2 norm of `(-c . grad V) - 4 Re(4 dz^3 V + dz(V w) - E dz w)`,
/// the defect of `V` as a traveling wave of velocity `c` at energy `e`.
pub fn traveling_wave_residual<S: Real>(v: &Potential<S>, c: (S, S), e: S) -> Result<S> {
    if !(e > S::zero()) {
        return Err(Error::InvalidInput(format!(
            "traveling waves are tested at positive energy, got {e}"
        )));
    }
    let f = v.field();
    let w = solve_w(f);
    let rhs = nv_rhs_fields(f, &w, e);
    let d1 = f.spectral_deriv((1, 0))?;
    let d2 = f.spectral_deriv((0, 1))?;
    let advect = d1.scale_re(-c.0).add(&d2.scale_re(-c.1));
    Ok(advect.sub(&rhs).l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn gaussian_sampling_hits_the_amplitude_and_flags_fast_decay() {
        let g = make_grid(20.0f64, 128).unwrap();
        let spec = PotentialSpec::Gaussian {
            amplitude: 2.5,
            width: 1.0,
            center: (0.0, 0.0),
        };
        let p = sample_potential(&spec, &g).unwrap();
        assert_eq!(p.sup_norm(), 2.5); // center sits on a node
        assert!(p.is_localized());
        assert!(p.is_super_exponential());
        assert!(p.decay_exponent_estimate().unwrap() > 0.0);
        p.field().check_real_tag().unwrap();
    }

    #[test]
    fn wide_profiles_leak_through_the_boundary() {
        let g = make_grid(20.0f64, 64).unwrap();
        let spec = PotentialSpec::Gaussian {
            amplitude: 1.0,
            width: 6.0,
            center: (0.0, 0.0),
        };
        match sample_potential(&spec, &g) {
            Err(Error::BoundaryLeak(_)) => {}
            other => panic!("expected boundary leak, got {other:?}"),
        }
    }

    #[test]
    fn custom_grids_reject_nan_and_size_mismatch() {
        let g = make_grid(20.0f64, 16).unwrap();
        let mut values = vec![0.0f64; 256];
        values[40] = f64::NAN;
        let bad = PotentialSpec::CustomGrid {
            values,
            shift: (0.0, 0.0),
        };
        assert!(matches!(
            sample_potential(&bad, &g),
            Err(Error::InvalidInput(_))
        ));
        let short = PotentialSpec::CustomGrid {
            values: vec![0.0f64; 100],
            shift: (0.0, 0.0),
        };
        assert!(matches!(
            sample_potential(&short, &g),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn custom_grids_are_taken_at_face_value_even_with_edge_mass() {
        // A field produced by the flow can reach the wall with a polynomial
        // tail; re-sampling it must not second-guess the values.
        let g = make_grid(20.0f64, 16).unwrap();
        let mut values = vec![0.0f64; 256];
        values[0] = 1e-3; // corner node, far above the analytic gate
        values[8 * 16 + 8] = 1.0;
        let spec = PotentialSpec::CustomGrid {
            values,
            shift: (0.0, 0.0),
        };
        let p = sample_potential(&spec, &g).unwrap();
        assert_eq!(p.sup_norm(), 1.0);
    }

    #[test]
    fn zero_custom_grid_samples_but_has_no_decay_rate() {
        let g = make_grid(20.0f64, 16).unwrap();
        let spec = PotentialSpec::CustomGrid {
            values: vec![0.0f64; 256],
            shift: (0.0, 0.0),
        };
        let p = sample_potential(&spec, &g).unwrap();
        assert_eq!(p.sup_norm(), 0.0);
        assert!(p.decay_exponent_estimate().is_none());
        assert!(matches!(
            decay_rate_estimate(p.field()),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn the_line_profile_is_x2_uniform_even_and_flagged_non_localized() {
        let g = make_grid(30.0f64, 64).unwrap();
        let spec = PotentialSpec::KdvLine {
            kappa: 1.0,
            phase: 0.5,
        };
        let p = sample_potential(&spec, &g).unwrap();
        assert!(!p.is_localized());
        assert!(p.decay_exponent_estimate().is_none());
        for i1 in 0..64 {
            let want = kdv_soliton_profile(1.0, 0.5, g.coord(i1));
            for i2 in 0..64 {
                assert_eq!(p.field().at(i1, i2).re, want);
            }
        }
        for d in [0.3, 1.1, 2.7] {
            let a = kdv_soliton_profile(1.0f64, 0.5, 0.5 + d);
            let b = kdv_soliton_profile(1.0f64, 0.5, 0.5 - d);
            assert!((a - b).abs() <= 1e-15 * a.abs());
        }
        assert_eq!(kdv_soliton_profile(1.0f64, 0.0, 0.0), -2.0);
    }

    #[test]
    fn translations_compose_exactly() {
        let g = make_grid(20.0f64, 32).unwrap();
        let spec = PotentialSpec::Gaussian {
            amplitude: 1.0,
            width: 1.2,
            center: (0.3, -0.4),
        };
        let y1 = (0.7, -1.1);
        let y2 = (-0.2, 0.5);
        let once = translate_spec(&translate_spec(&spec, y1), y2);
        let sum = translate_spec(&spec, (y1.0 + y2.0, y1.1 + y2.1));
        let a = sample_potential(&once, &g).unwrap();
        let b = sample_potential(&sum, &g).unwrap();
        assert!(a.field().sub(b.field()).sup_norm() <= 1e-12);
    }

    #[test]
    fn spectral_custom_shift_matches_the_analytic_shift_off_lattice() {
        let g = make_grid(20.0f64, 64).unwrap();
        let base = PotentialSpec::Gaussian {
            amplitude: 1.0,
            width: 1.5,
            center: (0.0, 0.0),
        };
        let sampled = sample_potential(&base, &g).unwrap();
        let custom = PotentialSpec::CustomGrid {
            values: sampled.field().values().iter().map(|z| z.re).collect(),
            shift: (0.0, 0.0),
        };
        let y = (0.3, 0.7);
        let via_custom = sample_potential(&translate_spec(&custom, y), &g).unwrap();
        let via_analytic = sample_potential(&translate_spec(&base, y), &g).unwrap();
        let dev = via_custom.field().sub(via_analytic.field()).sup_norm();
        assert!(dev <= 1e-8, "shift mismatch {dev:e}");
    }

    #[test]
    fn exponential_bump_rate_is_recovered_within_five_percent() {
        let g = make_grid(20.0f64, 128).unwrap();
        let spec = PotentialSpec::ExponentialBump {
            amplitude: 1.0,
            scale: 0.5,
            center: (0.0, 0.0),
        };
        let p = sample_potential(&spec, &g).unwrap();
        let alpha = p.decay_exponent_estimate().unwrap();
        assert!((alpha - 2.0).abs() <= 0.1, "alpha_hat = {alpha}");
        assert!(!p.is_super_exponential());
    }

    #[test]
    fn residual_is_translation_invariant() {
        let g = make_grid(20.0f64, 64).unwrap();
        let spec = PotentialSpec::Gaussian {
            amplitude: 0.8,
            width: 1.1,
            center: (0.0, 0.0),
        };
        let c = (0.4, -0.9);
        let r0 = traveling_wave_residual(&sample_potential(&spec, &g).unwrap(), c, 1.0).unwrap();
        let moved = translate_spec(&spec, (1.3, 0.6));
        let r1 = traveling_wave_residual(&sample_potential(&moved, &g).unwrap(), c, 1.0).unwrap();
        assert!(
            (r0 - r1).abs() <= 1e-8 * r0,
            "residual moved from {r0:e} to {r1:e}"
        );
    }

    #[test]
    fn residual_scales_linearly_for_small_amplitudes() {
        // At amplitude A the defect is (linear defect)*A + O(A^2), so r/A
        // converges; successive differences shrink by ~10x per decade.
        let g = make_grid(20.0f64, 64).unwrap();
        let c = (1.0, 0.0);
        let r_over_a = |a: f64| -> f64 {
            let spec = PotentialSpec::Gaussian {
                amplitude: a,
                width: 1.0,
                center: (0.0, 0.0),
            };
            traveling_wave_residual(&sample_potential(&spec, &g).unwrap(), c, 1.0).unwrap() / a
        };
        let r1 = r_over_a(1e-1);
        let r2 = r_over_a(1e-2);
        let r3 = r_over_a(1e-3);
        assert!(r3 > 0.0);
        let d12 = (r1 - r2).abs();
        let d23 = (r2 - r3).abs();
        assert!(d23 <= 0.2 * d12, "not linearizing: {d12:e} then {d23:e}");
    }

    #[test]
    fn residual_rejects_nonpositive_energy() {
        let g = make_grid(20.0f64, 16).unwrap();
        let spec = PotentialSpec::Gaussian {
            amplitude: 0.1,
            width: 1.0,
            center: (0.0, 0.0),
        };
        let p = sample_potential(&spec, &g).unwrap();
        assert!(traveling_wave_residual(&p, (1.0, 0.0), 0.0).is_err());
        assert!(traveling_wave_residual(&p, (1.0, 0.0), -2.0).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(validate_spec(&PotentialSpec::Gaussian {
            amplitude: 1.0f64,
            width: 0.0,
            center: (0.0, 0.0)
        })
        .is_err());
        assert!(validate_spec(&PotentialSpec::KdvLine {
            kappa: -1.0f64,
            phase: 0.0
        })
        .is_err());
        assert!(
            validate_spec(&PotentialSpec::MultiGaussian::<f64> { terms: vec![] }).is_err()
        );
        assert!(validate_spec(&PotentialSpec::Gaussian {
            amplitude: f64::INFINITY,
            width: 1.0,
            center: (0.0, 0.0)
        })
        .is_err());
    }
}
