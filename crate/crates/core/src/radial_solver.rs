//! Per-mode radial eigenvalues by integration from the outer end inwards.
//!
//! Separating variables `f(r, p) = u(r) v(p)` with `v` a degree-`k`
//! spherical harmonic leaves the linear equation
//!
//! ```text
//! u'' + (n - 1) (h'/h) u' - lambda_k u / h^2 = 0
//! ```
//!
//! on `(0, L)`. The outer end fixes the solution up to scale (regularity at
//! the pole, or a Dirichlet/Neumann condition on a truncation sphere) and
//! the eigenvalue is read off at the boundary sphere as `sigma = -u'(0)/u(0)`,
//! the outward normal at `r = 0` being `-d/dr`.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{lambda_k, multiplicity, sharp_bound};
use crate::error::SolveError;
use crate::ode::{Control, Dopri5, ErrorScale};
use crate::profile::{Profile, Segment};

/// Condition imposed at the outer end of the radial interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterCondition {
    /// Full Steklov problem: `u ~ (L - r)^k` at the pole.
    PoleRegular,
    /// Mixed Steklov–Dirichlet: `u(r_end) = 0`.
    Dirichlet(f64),
    /// Mixed Steklov–Neumann: `u'(r_end) = 0`.
    Neumann(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeProblem {
    pub dimension: usize,
    pub mode: usize,
    pub outer: OuterCondition,
}

impl ModeProblem {
    pub fn new(dimension: usize, mode: usize, outer: OuterCondition) -> Self {
        Self { dimension, mode, outer }
    }

    pub fn pole(dimension: usize, mode: usize) -> Self {
        Self::new(dimension, mode, OuterCondition::PoleRegular)
    }

    pub fn dirichlet(dimension: usize, mode: usize, r_end: f64) -> Self {
        Self::new(dimension, mode, OuterCondition::Dirichlet(r_end))
    }

    pub fn neumann(dimension: usize, mode: usize, r_end: f64) -> Self {
        Self::new(dimension, mode, OuterCondition::Neumann(r_end))
    }

    pub fn lambda(&self) -> f64 {
        lambda_k(self.dimension, self.mode)
    }

    /// Outer end of the radial interval on `p`, after checking consistency.
    pub fn outer_end(&self, p: &Profile) -> Result<f64, SolveError> {
        if self.dimension < 2 {
            return Err(SolveError::Domain(format!(
                "dimension must be at least 2, got {}",
                self.dimension
            )));
        }
        let l = p.total_length();
        match self.outer {
            OuterCondition::PoleRegular => {
                let hl = p.value(l);
                if hl.abs() > 1e-8 {
                    return Err(SolveError::Domain(format!(
                        "pole-regular problem needs h(L) = 0, profile has h(L) = {hl}"
                    )));
                }
                Ok(l)
            }
            OuterCondition::Dirichlet(r) | OuterCondition::Neumann(r) => {
                if !(r > 0.0 && r <= l) {
                    return Err(SolveError::Domain(format!(
                        "truncation radius {r} outside (0, {l}]"
                    )));
                }
                if !(p.value(r) > 0.0) {
                    return Err(SolveError::Domain(format!("h vanishes at the truncation radius {r}")));
                }
                Ok(r)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    Riccati,
    FdOracle,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Shooting => "shooting",
            Method::Riccati => "riccati",
            Method::FdOracle => "fd_oracle",
            Method::ClosedForm => "closed_form",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shooting" => Ok(Method::Shooting),
            "riccati" => Ok(Method::Riccati),
            "fd_oracle" | "fd" => Ok(Method::FdOracle),
            "closed_form" => Ok(Method::ClosedForm),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEigenvalue {
    pub mode: usize,
    pub sigma: f64,
    pub multiplicity: u64,
    pub method: Method,
    /// A posteriori error estimate for `sigma`.
    pub residual: f64,
    /// `k + n - 2 - sigma` when the method tracks it directly, free of the
    /// cancellation in the subtraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_gap: Option<f64>,
}

impl ModeEigenvalue {
    /// Distance to `k + n - 2`, preferring the directly tracked value.
    pub fn gap(&self, dimension: usize) -> f64 {
        self.bound_gap
            .unwrap_or_else(|| sharp_bound(dimension, self.mode) - self.sigma)
    }

    pub(crate) fn exact(dimension: usize, mode: usize, sigma: f64, method: Method) -> Self {
        Self {
            mode,
            sigma,
            multiplicity: multiplicity(dimension, mode),
            method,
            residual: 0.0,
            bound_gap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Distance from the pole where pole-regular integration starts;
    /// `None` means `1e-6 L`.
    pub pole_offset: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `(u, u')` is rescaled whenever its size leaves
    /// `[1/renorm_threshold, renorm_threshold]`.
    pub renorm_threshold: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            pole_offset: None,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            renorm_threshold: 1e8,
            max_steps: 200_000,
        }
    }
}

impl SolverConfig {
    pub fn pole_offset_for(&self, total_length: f64) -> f64 {
        self.pole_offset.unwrap_or(1e-6 * total_length)
    }

    fn check(&self, total_length: f64) -> Result<(), SolveError> {
        let delta = self.pole_offset_for(total_length);
        if !(delta > 0.0 && delta < total_length / 10.0) {
            return Err(SolveError::Domain(format!(
                "pole offset {delta} must lie in (0, L/10) for L = {total_length}"
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(SolveError::Domain("tolerances must be positive".into()));
        }
        if !(self.renorm_threshold > 1.0) {
            return Err(SolveError::Domain("renormalisation threshold must exceed 1".into()));
        }
        Ok(())
    }

    fn loosened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// Ratio between the tolerances of the main solve and the companion solve
/// used for the residual estimate.
const RESIDUAL_LOOSENING: f64 = 100.0;

/// Leading exponent `alpha` of the regular solution `(L - r)^alpha` at a
/// pole where `h ~ c (L - r)`; equals `k` for a smooth pole (`c = 1`).
pub fn pole_exponent(dimension: usize, mode: usize, pole_slope: f64) -> f64 {
    let a = (dimension - 2) as f64;
    let lam = lambda_k(dimension, mode);
    0.5 * (-a + (a * a + 4.0 * lam / (pole_slope * pole_slope)).sqrt())
}

/// The constant solution exists for `k = 0` unless the outer end is
/// clamped to zero.
fn is_trivial(mp: &ModeProblem) -> bool {
    mp.mode == 0 && !matches!(mp.outer, OuterCondition::Dirichlet(_))
}

/// Run `step` over each segment piece of `[0, start]`, from `start` down to 0.
fn for_pieces_inward(
    p: &Profile,
    start: f64,
    mut step: impl FnMut(&Segment, f64, f64) -> Result<(), SolveError>,
) -> Result<(), SolveError> {
    let last = p.segment_index(start);
    for i in (0..=last).rev() {
        let seg = &p.segments()[i];
        let from = start.min(seg.r_end);
        if from > seg.r_start {
            step(seg, from, seg.r_start)?;
        }
    }
    Ok(())
}

fn power_of_two_rescale(y: &mut [f64; 2], threshold: f64) -> bool {
    let size = y[0].abs().max(y[1].abs());
    if size > threshold || (size > 0.0 && size < 1.0 / threshold) {
        let e = size.log2().round() as i32;
        let factor = 2f64.powi(-e);
        y[0] *= factor;
        y[1] *= factor;
        true
    } else {
        false
    }
}

fn shoot(p: &Profile, mp: &ModeProblem, cfg: &SolverConfig, scale: f64) -> Result<f64, SolveError> {
    let end = mp.outer_end(p)?;
    let l = p.total_length();
    cfg.check(l)?;
    let n = mp.dimension as f64;
    let lam = mp.lambda();
    let (start, init) = match mp.outer {
        OuterCondition::PoleRegular => {
            let delta = cfg.pole_offset_for(l);
            let alpha = pole_exponent(mp.dimension, mp.mode, p.pole_slope());
            (l - delta, [delta, -alpha])
        }
        OuterCondition::Dirichlet(_) => (end, [0.0, -1.0]),
        OuterCondition::Neumann(_) => (end, [1.0, 0.0]),
    };
    let mut y = [init[0] * scale, init[1] * scale];
    let threshold = cfg.renorm_threshold;
    let mut ode = Dopri5::new(
        ErrorScale::StateRelative {
            rel: cfg.rel_tol,
            abs: cfg.abs_tol,
        },
        cfg.max_steps,
    );
    for_pieces_inward(p, start, |seg, from, to| {
        let rhs = |r: f64, s: &[f64; 2]| {
            let h = seg.value(r);
            let dh = seg.slope(r);
            [s[1], -(n - 1.0) * dh / h * s[1] + lam * s[0] / (h * h)]
        };
        let out = ode
            .integrate(rhs, from, to, y, |_, s| {
                power_of_two_rescale(s, threshold);
                Control::Continue
            })
            .map_err(|source| SolveError::Integration { mode: mp.mode, source })?;
        y = out.y;
        Ok(())
    })?;
    let (u, du) = (y[0], y[1]);
    if !(u.abs() > 1e-14 * du.abs()) {
        return Err(SolveError::Degenerate { mode: mp.mode });
    }
    Ok(-du / u)
}

/// Mode eigenvalue by shooting `(u, u')` from the outer end to `r = 0`.
pub fn solve_mode(p: &Profile, mp: &ModeProblem, cfg: &SolverConfig) -> Result<ModeEigenvalue, SolveError> {
    solve_mode_with_scale(p, mp, cfg, 1.0)
}

/// As [`solve_mode`], with the initial data `(u, u')` multiplied by `scale`.
/// The result depends only on the ratio `u'/u`, so `scale` must not matter.
pub fn solve_mode_with_scale(
    p: &Profile,
    mp: &ModeProblem,
    cfg: &SolverConfig,
    scale: f64,
) -> Result<ModeEigenvalue, SolveError> {
    mp.outer_end(p)?;
    if is_trivial(mp) {
        return Ok(ModeEigenvalue::exact(mp.dimension, 0, 0.0, Method::Shooting));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(SolveError::Domain(format!("initial scale must be positive, got {scale}")));
    }
    let sigma = shoot(p, mp, cfg, scale)?;
    let coarse = shoot(p, mp, &cfg.loosened(RESIDUAL_LOOSENING), scale)?;
    Ok(ModeEigenvalue {
        mode: mp.mode,
        sigma,
        multiplicity: multiplicity(mp.dimension, mp.mode),
        method: Method::Shooting,
        residual: (sigma - coarse).abs(),
        bound_gap: None,
    })
}

/// Log-derivative representation in use.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    /// `z = h u'/u + (k + n - 2)`; at `r = 0` this is exactly the gap to
    /// `k + n - 2`.
    Shifted,
    /// `y = u / (h u')`, used where `u` vanishes.
    Inverse,
}

struct RiccatiOutcome {
    sigma: f64,
    gap: f64,
}

fn riccati(p: &Profile, mp: &ModeProblem, cfg: &SolverConfig) -> Result<RiccatiOutcome, SolveError> {
    let end = mp.outer_end(p)?;
    let l = p.total_length();
    cfg.check(l)?;
    let a = (mp.dimension - 2) as f64;
    let m = sharp_bound(mp.dimension, mp.mode);
    let lam = mp.lambda();
    // switch to the inverse chart when |h w| exceeds `wide`, back when it
    // drops below `narrow`
    let wide = 16.0 * (m + 1.0);
    let narrow = 4.0 * (m + 1.0);

    let (start, mut chart, mut value) = match mp.outer {
        OuterCondition::PoleRegular => {
            let delta = cfg.pole_offset_for(l);
            let alpha = pole_exponent(mp.dimension, mp.mode, p.pole_slope());
            // w = -alpha / delta
            (l - delta, Chart::Shifted, m - alpha * p.value(l - delta) / delta)
        }
        OuterCondition::Neumann(_) => (end, Chart::Shifted, m),
        OuterCondition::Dirichlet(_) => (end, Chart::Inverse, 0.0),
    };
    // z stays non-negative for these problems, so it can be controlled in
    // purely relative terms even when it is tiny
    let shifted_floor = match mp.outer {
        OuterCondition::Dirichlet(_) => cfg.abs_tol,
        _ => f64::MIN_POSITIVE,
    };
    let shifted_scale = ErrorScale::Mixed {
        rel: cfg.rel_tol,
        abs: shifted_floor,
    };
    let inverse_scale = ErrorScale::Mixed {
        rel: cfg.rel_tol,
        abs: cfg.abs_tol,
    };
    let mut steps_used = 0usize;

    for_pieces_inward(p, start, |seg, from, to| {
        let mut cur = from;
        while cur > to {
            let scale = match chart {
                Chart::Shifted => shifted_scale,
                Chart::Inverse => inverse_scale,
            };
            let mut ode = Dopri5::new(scale, cfg.max_steps.saturating_sub(steps_used));
            let out = match chart {
                Chart::Shifted => ode.integrate(
                    |r: f64, s: &[f64; 1]| {
                        let h = seg.value(r);
                        let dh = seg.slope(r);
                        let z = s[0];
                        [(-z * z + (2.0 * m - a * dh) * z - a * m * (1.0 - dh)) / h]
                    },
                    cur,
                    to,
                    [value],
                    |_, s| {
                        if (s[0] - m).abs() > wide {
                            Control::Stop
                        } else {
                            Control::Continue
                        }
                    },
                ),
                Chart::Inverse => ode.integrate(
                    |r: f64, s: &[f64; 1]| {
                        let h = seg.value(r);
                        let dh = seg.slope(r);
                        let y = s[0];
                        [(1.0 + a * dh * y - lam * y * y) / h]
                    },
                    cur,
                    to,
                    [value],
                    |_, s| {
                        if s[0].abs() * narrow > 1.0 {
                            Control::Stop
                        } else {
                            Control::Continue
                        }
                    },
                ),
            }
            .map_err(|source| SolveError::Integration { mode: mp.mode, source })?;
            steps_used += ode.steps();
            cur = out.t;
            value = out.y[0];
            if out.stopped {
                (chart, value) = match chart {
                    Chart::Shifted => (Chart::Inverse, 1.0 / (value - m)),
                    Chart::Inverse => (Chart::Shifted, m + 1.0 / value),
                };
            }
        }
        Ok(())
    })?;

    match chart {
        Chart::Shifted => Ok(RiccatiOutcome {
            sigma: m - value,
            gap: value,
        }),
        Chart::Inverse => {
            if value == 0.0 || !value.is_finite() {
                return Err(SolveError::Degenerate { mode: mp.mode });
            }
            Ok(RiccatiOutcome {
                sigma: -1.0 / value,
                gap: m + 1.0 / value,
            })
        }
    }
}

/// Mode eigenvalue from the log-derivative (Riccati) form of the radial
/// equation, switching to the reciprocal variable near zeros of `u`.
pub fn solve_mode_riccati(
    p: &Profile,
    mp: &ModeProblem,
    cfg: &SolverConfig,
) -> Result<ModeEigenvalue, SolveError> {
    mp.outer_end(p)?;
    if is_trivial(mp) {
        let mut e = ModeEigenvalue::exact(mp.dimension, 0, 0.0, Method::Riccati);
        e.bound_gap = Some(sharp_bound(mp.dimension, 0));
        return Ok(e);
    }
    let fine = riccati(p, mp, cfg)?;
    let coarse = riccati(p, mp, &cfg.loosened(RESIDUAL_LOOSENING))?;
    Ok(ModeEigenvalue {
        mode: mp.mode,
        sigma: fine.sigma,
        multiplicity: multiplicity(mp.dimension, mp.mode),
        method: Method::Riccati,
        residual: (fine.sigma - coarse.sigma).abs(),
        bound_gap: Some(fine.gap),
    })
}
