//! Full spectra with multiplicities, mixed-problem brackets and the
//! comparison, increase, truncation and sharpness experiments.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{lambda_k, sharp_bound};
use crate::error::SolveError;
use crate::fd_oracle::{fd_mode, GridSpec};
use crate::profile::{build_increase, Profile, SegmentKind};
use crate::radial_solver::{solve_mode, solve_mode_riccati, Method, ModeEigenvalue, ModeProblem, SolverConfig};

/// Slack used when comparing against the lower bound `k`.
pub const LOWER_BOUND_SLACK: f64 = 1e-6;
/// Gaps to `k + n - 2` below this are reported as unresolved.
pub const UPPER_BOUND_SLACK: f64 = 1e-9;
/// Relative tolerance of bracket and comparison checks.
pub const BRACKET_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Flag {
    /// `sigma_(k) < k`: below the Euclidean-ball value.
    BelowBallValue { mode: usize, sigma: f64 },
    /// `sigma_(k) >= k + n - 2`.
    UpperBoundViolated { mode: usize, gap: f64 },
    /// `0 < k + n - 2 - sigma_(k) < UPPER_BOUND_SLACK`: strictness holds but
    /// is not resolved at the slack.
    UpperBoundUnresolved { mode: usize, gap: f64 },
    /// `sigma_(k) <= sigma_(k-1)`.
    OrderingAnomaly { mode: usize },
    /// An experiment expected a strict increase and did not see one.
    NoStrictIncrease { mode: usize },
    /// Lower bracket above upper bracket, or the full value outside them.
    BracketInversion { mode: usize },
}

impl Flag {
    /// Flags that contradict a proven inequality, as opposed to notes about
    /// numerical resolution.
    pub fn is_violation(&self) -> bool {
        !matches!(self, Flag::UpperBoundUnresolved { .. })
    }

    pub fn mode(&self) -> usize {
        match *self {
            Flag::BelowBallValue { mode, .. }
            | Flag::UpperBoundViolated { mode, .. }
            | Flag::UpperBoundUnresolved { mode, .. }
            | Flag::OrderingAnomaly { mode }
            | Flag::NoStrictIncrease { mode }
            | Flag::BracketInversion { mode } => mode,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Flag::BelowBallValue { .. } => "below_ball_value",
            Flag::UpperBoundViolated { .. } => "upper_bound_violated",
            Flag::UpperBoundUnresolved { .. } => "upper_bound_unresolved",
            Flag::OrderingAnomaly { .. } => "ordering_anomaly",
            Flag::NoStrictIncrease { .. } => "no_strict_increase",
            Flag::BracketInversion { .. } => "bracket_inversion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub dimension: usize,
    pub label: String,
    pub k_max: usize,
    pub method: Method,
    /// One entry per mode, sorted by eigenvalue.
    pub entries: Vec<ModeEigenvalue>,
    pub flags: Vec<Flag>,
}

impl SpectrumResult {
    pub fn has_violations(&self) -> bool {
        self.flags.iter().any(Flag::is_violation)
    }

    /// True when every mode `k >= 1` sits strictly below `k + n - 2`.
    pub fn upper_bound_respected(&self) -> bool {
        !self
            .flags
            .iter()
            .any(|f| matches!(f, Flag::UpperBoundViolated { .. }))
    }

    pub fn mode(&self, k: usize) -> Option<&ModeEigenvalue> {
        self.entries.iter().find(|e| e.mode == k)
    }
}

/// Solve one mode with the requested method.
pub fn solve_with(
    p: &Profile,
    mp: &ModeProblem,
    method: Method,
    cfg: &SolverConfig,
) -> Result<ModeEigenvalue, SolveError> {
    match method {
        Method::Shooting => solve_mode(p, mp, cfg),
        Method::Riccati => solve_mode_riccati(p, mp, cfg),
        Method::FdOracle => fd_mode(p, mp, GridSpec::default()),
        Method::ClosedForm => Err(SolveError::Domain(
            "closed forms exist only for annuli; pick a numerical method".into(),
        )),
    }
}

#[cfg(feature = "parallel")]
fn map_modes<T: Send>(
    modes: std::ops::RangeInclusive<usize>,
    f: impl Fn(usize) -> Result<T, SolveError> + Sync + Send,
) -> Result<Vec<T>, SolveError> {
    use rayon::prelude::*;
    modes.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_modes<T>(
    modes: std::ops::RangeInclusive<usize>,
    f: impl Fn(usize) -> Result<T, SolveError>,
) -> Result<Vec<T>, SolveError> {
    modes.map(f).collect()
}

fn bound_flags(dimension: usize, e: &ModeEigenvalue, flags: &mut Vec<Flag>) {
    if e.mode == 0 {
        return;
    }
    if e.sigma < e.mode as f64 - LOWER_BOUND_SLACK {
        flags.push(Flag::BelowBallValue {
            mode: e.mode,
            sigma: e.sigma,
        });
    }
    if dimension >= 3 {
        let gap = e.gap(dimension);
        if gap <= 0.0 {
            flags.push(Flag::UpperBoundViolated { mode: e.mode, gap });
        } else if gap < UPPER_BOUND_SLACK {
            flags.push(Flag::UpperBoundUnresolved { mode: e.mode, gap });
        }
    }
}

/// `sigma_(k)` for `k = 0..=k_max` with multiplicities; bound and ordering
/// problems are flagged rather than treated as errors.
pub fn full_spectrum(
    p: &Profile,
    dimension: usize,
    k_max: usize,
    method: Method,
    cfg: &SolverConfig,
) -> Result<SpectrumResult, SolveError> {
    if k_max < 1 {
        return Err(SolveError::Domain("k_max must be at least 1".into()));
    }
    let mut by_mode = map_modes(0..=k_max, |k| {
        solve_with(p, &ModeProblem::pole(dimension, k), method, cfg)
    })?;

    let mut flags = Vec::new();
    for (i, e) in by_mode.iter().enumerate() {
        bound_flags(dimension, e, &mut flags);
        if i > 0 && !(e.sigma > by_mode[i - 1].sigma) {
            flags.push(Flag::OrderingAnomaly { mode: e.mode });
        }
    }
    by_mode.sort_by(|a, b| a.sigma.total_cmp(&b.sigma).then(a.mode.cmp(&b.mode)));
    Ok(SpectrumResult {
        dimension,
        label: p.label().to_string(),
        k_max,
        method,
        entries: by_mode,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketResult {
    pub mode: usize,
    /// Mixed Steklov–Neumann value on the collar `[0, r_end]`.
    pub lower: f64,
    /// Mixed Steklov–Dirichlet value on the collar.
    pub upper: f64,
    pub r_end: f64,
    /// Full Steklov value.
    pub full: Option<f64>,
}

impl BracketResult {
    pub fn contains(&self, sigma: f64) -> bool {
        let tol = BRACKET_RTOL * (1.0 + sigma.abs());
        self.lower <= sigma + tol && sigma <= self.upper + tol
    }
}

/// Collar radius used when none is given: the end of a leading `1 + r`
/// stretch, else the first local maximum of `h`, else `L / 2`.
pub fn default_collar(p: &Profile) -> f64 {
    let first = &p.segments()[0];
    if matches!(first.kind, SegmentKind::LinearUp { .. }) && first.r_end < p.total_length() {
        return first.r_end;
    }
    let l = p.total_length();
    let n = 20_000;
    let mut prev = p.slope(0.0);
    for i in 1..n {
        let r = l * i as f64 / n as f64;
        let s = p.slope(r);
        if prev > 0.0 && s <= 0.0 {
            return r;
        }
        prev = s;
    }
    l / 2.0
}

/// Neumann and Dirichlet truncations of mode `k` at `r_end`, with the full
/// value in between.
pub fn bracket_mode(
    p: &Profile,
    dimension: usize,
    k: usize,
    r_end: f64,
    cfg: &SolverConfig,
) -> Result<BracketResult, SolveError> {
    if !(r_end > 0.0 && r_end < p.total_length()) {
        return Err(SolveError::Domain(format!(
            "collar radius {r_end} must lie in (0, {})",
            p.total_length()
        )));
    }
    let lower = solve_mode(p, &ModeProblem::neumann(dimension, k, r_end), cfg)?.sigma;
    let upper = solve_mode(p, &ModeProblem::dirichlet(dimension, k, r_end), cfg)?.sigma;
    let full = solve_mode(p, &ModeProblem::pole(dimension, k), cfg)?.sigma;
    let result = BracketResult {
        mode: k,
        lower,
        upper,
        r_end,
        full: Some(full),
    };
    if !result.contains(full) {
        return Err(SolveError::Consistency(format!(
            "mode {k}: bracket [{lower}, {upper}] at r_end = {r_end} misses the full value {full}"
        )));
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub eps: f64,
    /// Neumann value on `[0, L - eps]`.
    pub sigma_neumann: f64,
    /// Full value minus the Neumann value.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationStudy {
    pub full: f64,
    pub rows: Vec<TruncationRow>,
    /// `log(gap_i / gap_{i+1}) / log(eps_i / eps_{i+1})` for consecutive rows.
    pub rates: Vec<f64>,
}

/// How fast Neumann truncations approach the full eigenvalue as the
/// truncation sphere shrinks towards the pole.
pub fn truncation_convergence(
    p: &Profile,
    dimension: usize,
    k: usize,
    eps_list: &[f64],
    cfg: &SolverConfig,
) -> Result<TruncationStudy, SolveError> {
    let l = p.total_length();
    if eps_list.iter().any(|&e| !(e > 0.0 && e < l / 2.0)) {
        return Err(SolveError::Domain(format!("truncation widths must lie in (0, {})", l / 2.0)));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SolveError::Domain("truncation widths must decrease".into()));
    }
    let full = solve_mode(p, &ModeProblem::pole(dimension, k), cfg)?.sigma;
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let sigma_neumann = solve_mode(p, &ModeProblem::neumann(dimension, k, l - eps), cfg)?.sigma;
            Ok(TruncationRow {
                eps,
                sigma_neumann,
                gap: full - sigma_neumann,
            })
        })
        .collect::<Result<Vec<_>, SolveError>>()?;
    let rates = rows
        .windows(2)
        .map(|w| (w[0].gap / w[1].gap).ln() / (w[0].eps / w[1].eps).ln())
        .collect();
    Ok(TruncationStudy { full, rows, rates })
}

/// Whether `h1 <= h2` on `[0, r_end]`, checked on a uniform sample.
pub fn dominated_on(h1: &Profile, h2: &Profile, r_end: f64) -> bool {
    let n = 10_000;
    (0..=n).all(|i| {
        let r = r_end * i as f64 / n as f64;
        h1.value(r) <= h2.value(r) + 1e-12
    })
}

/// Neumann values of mode `k` at `r_end` for two pointwise-ordered
/// profiles; the smaller profile must give the smaller value.
pub fn compare_profiles(
    p1: &Profile,
    p2: &Profile,
    dimension: usize,
    k: usize,
    r_end: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64), SolveError> {
    if dimension < 3 {
        return Err(SolveError::Domain("profile comparison needs n >= 3".into()));
    }
    if !(r_end > 0.0 && r_end < p1.total_length() && r_end < p2.total_length()) {
        return Err(SolveError::Domain(format!("truncation {r_end} must lie inside both profiles")));
    }
    if !dominated_on(p1, p2, r_end) {
        return Err(SolveError::Domain(format!(
            "{} is not below {} on [0, {r_end}]",
            p1.label(),
            p2.label()
        )));
    }
    let mp = ModeProblem::neumann(dimension, k, r_end);
    let first = solve_mode(p1, &mp, cfg)?.sigma;
    let second = solve_mode(p2, &mp, cfg)?.sigma;
    if first > second + BRACKET_RTOL * (1.0 + second.abs()) {
        return Err(SolveError::Consistency(format!(
            "mode {k}: smaller profile gives larger Neumann value ({first} > {second})"
        )));
    }
    Ok((first, second))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncreaseRow {
    pub mode: usize,
    pub sigma_base: f64,
    pub sigma_grown: f64,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncreaseExperiment {
    pub base_label: String,
    pub grown_length: f64,
    pub rows: Vec<IncreaseRow>,
    pub flags: Vec<Flag>,
}

/// Compare the spectrum of `base` with that of `build_increase(base)`.
pub fn increase_experiment(
    base: &Profile,
    dimension: usize,
    k_max: usize,
    cfg: &SolverConfig,
) -> Result<IncreaseExperiment, SolveError> {
    if dimension < 3 {
        return Err(SolveError::Domain("the increase construction is studied for n >= 3".into()));
    }
    let grown = build_increase(base)?;
    let rows = map_modes(0..=k_max, |k| {
        let mp = ModeProblem::pole(dimension, k);
        let a = solve_mode_riccati(base, &mp, cfg)?;
        let b = solve_mode_riccati(&grown, &mp, cfg)?;
        // compare through the tracked gaps: both may sit within 1e-9 of k + n - 2
        let strict = k == 0 || b.gap(dimension) < a.gap(dimension);
        Ok(IncreaseRow {
            mode: k,
            sigma_base: a.sigma,
            sigma_grown: b.sigma,
            strict,
        })
    })?;
    let flags = rows
        .iter()
        .filter(|r| !r.strict)
        .map(|r| Flag::NoStrictIncrease { mode: r.mode })
        .collect();
    Ok(IncreaseExperiment {
        base_label: base.label().to_string(),
        grown_length: grown.total_length(),
        rows,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub reach: f64,
    pub sigma: f64,
    /// `k + n - 2 - sigma`, tracked directly.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessSweep {
    pub dimension: usize,
    pub mode: usize,
    pub rows: Vec<SharpnessRow>,
    pub flags: Vec<Flag>,
}

/// Mode-`k` eigenvalue of tents with growing reach: gaps to `k + n - 2`
/// must stay positive and shrink.
pub fn sharpness_sweep(
    dimension: usize,
    k: usize,
    reaches: &[f64],
    cfg: &SolverConfig,
) -> Result<SharpnessSweep, SolveError> {
    if dimension < 3 || k < 1 {
        return Err(SolveError::Domain("sharpness sweep needs n >= 3 and k >= 1".into()));
    }
    if reaches.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolveError::Domain("tent reaches must increase".into()));
    }
    let rows = reaches
        .iter()
        .map(|&reach| {
            let tent = crate::profile::build_tent(reach)?;
            let e = solve_mode_riccati(&tent, &ModeProblem::pole(dimension, k), cfg)?;
            Ok(SharpnessRow {
                reach,
                sigma: e.sigma,
                gap: e.gap(dimension),
            })
        })
        .collect::<Result<Vec<_>, SolveError>>()?;
    let mut flags = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.gap <= 0.0 {
            flags.push(Flag::UpperBoundViolated { mode: k, gap: row.gap });
        }
        if i > 0 && !(row.gap < rows[i - 1].gap) {
            flags.push(Flag::NoStrictIncrease { mode: k });
        }
    }
    Ok(SharpnessSweep {
        dimension,
        mode: k,
        rows,
        flags,
    })
}

/// `lambda_k` re-exported next to the experiments that print it.
pub fn sphere_eigenvalue(dimension: usize, k: usize) -> f64 {
    lambda_k(dimension, k)
}

/// Sharp constant `k + n - 2`.
pub fn upper_limit(dimension: usize, k: usize) -> f64 {
    sharp_bound(dimension, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{annulus_sigma_d, annulus_sigma_n, AnnulusSpec};
    use crate::profile::{build_cone, build_tent};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn ball_spectrum() {
        let s = full_spectrum(&build_cone(), 3, 2, Method::Shooting, &cfg()).unwrap();
        let got: Vec<(f64, u64)> = s.entries.iter().map(|e| (e.sigma, e.multiplicity)).collect();
        for ((sigma, mult), (want_s, want_m)) in got.iter().zip([(0.0, 1), (1.0, 3), (2.0, 5)]) {
            assert!((sigma - want_s).abs() < 1e-8);
            assert_eq!(*mult, want_m);
        }
        assert!(s.flags.is_empty(), "{:?}", s.flags);
    }

    #[test]
    fn tent_spectrum_respects_the_bound() {
        let s = full_spectrum(&build_tent(10.0).unwrap(), 3, 1, Method::Riccati, &cfg()).unwrap();
        let s1 = s.mode(1).unwrap().sigma;
        assert!(s1 > 1.9955 && s1 < 2.0);
        assert!(s.upper_bound_respected());
        assert!(!s.has_violations());
    }

    #[test]
    fn closed_form_method_is_refused() {
        assert!(full_spectrum(&build_cone(), 3, 2, Method::ClosedForm, &cfg()).is_err());
        assert!(full_spectrum(&build_cone(), 3, 0, Method::Shooting, &cfg()).is_err());
    }

    #[test]
    fn tent_bracket_matches_annulus() {
        let b = bracket_mode(&build_tent(10.0).unwrap(), 3, 1, 10.0, &cfg()).unwrap();
        let a = AnnulusSpec::new(3, 11.0).unwrap();
        assert!((b.lower - annulus_sigma_n(a, 1)).abs() < 1e-8);
        assert!((b.upper - annulus_sigma_d(a, 1)).abs() < 1e-8);
        assert!((b.lower - 1.9954989).abs() < 1e-7);
        assert!((b.upper - 2.0022556).abs() < 1e-7);
    }

    #[test]
    fn collar_defaults() {
        assert_eq!(default_collar(&build_tent(10.0).unwrap()), 10.0);
        assert_eq!(default_collar(&build_cone()), 0.5);
        assert_eq!(default_collar(&build_increase(&build_cone()).unwrap()), 1.0);
    }

    #[test]
    fn cone_bracket_contains_one() {
        let b = bracket_mode(&build_cone(), 3, 1, 0.5, &cfg()).unwrap();
        assert!(b.lower <= 1.0 && 1.0 <= b.upper);
        let b0 = bracket_mode(&build_cone(), 3, 0, 0.5, &cfg()).unwrap();
        assert_eq!(b0.lower, 0.0);
        assert!(b0.upper > 0.0);
    }

    #[test]
    fn truncation_on_cone() {
        let t = truncation_convergence(&build_cone(), 3, 1, &[0.2, 0.1, 0.05, 0.01], &cfg()).unwrap();
        assert!(t.rows.windows(2).all(|w| w[1].gap < w[0].gap));
        assert!(t.rows.last().unwrap().gap < 1e-3);
        let zero = truncation_convergence(&build_cone(), 3, 0, &[0.2, 0.1], &cfg()).unwrap();
        assert!(zero.rows.iter().all(|r| r.gap == 0.0));
    }

    #[test]
    fn truncation_on_tent_decreases() {
        let t = truncation_convergence(&build_tent(2.0).unwrap(), 4, 2, &[0.5, 0.1, 0.02], &cfg()).unwrap();
        assert!(t.rows.windows(2).all(|w| w[1].gap < w[0].gap), "{t:?}");
    }

    #[test]
    fn comparison_orders_values() {
        let (a, b) = compare_profiles(&build_cone(), &build_tent(1.0).unwrap(), 3, 1, 0.9, &cfg()).unwrap();
        assert!(a < b);
        let c = build_cone();
        let (x, y) = compare_profiles(&c, &c, 3, 2, 0.5, &cfg()).unwrap();
        assert_eq!(x, y);
        assert!(matches!(
            compare_profiles(&build_tent(1.0).unwrap(), &c, 3, 1, 0.9, &cfg()),
            Err(SolveError::Domain(_))
        ));
    }

    #[test]
    fn increase_from_cone() {
        let exp = increase_experiment(&build_cone(), 3, 3, &cfg()).unwrap();
        for row in &exp.rows {
            if row.mode == 0 {
                assert_eq!(row.sigma_base, 0.0);
                assert_eq!(row.sigma_grown, 0.0);
            } else {
                assert!(row.sigma_grown > row.mode as f64);
                assert!(row.strict);
            }
        }
        assert!(exp.flags.is_empty());
        assert_eq!(exp.grown_length, 4.0);
    }

    #[test]
    fn sharpness_examples() {
        let s = sharpness_sweep(3, 1, &[2.0, 5.0, 10.0, 20.0], &cfg()).unwrap();
        assert!(s.flags.is_empty(), "{:?}", s.flags);
        assert!(s.rows.windows(2).all(|w| w[1].sigma > w[0].sigma));
        assert!(s.rows.last().unwrap().gap < 6.6e-4);
        assert!(s.rows.iter().all(|r| r.gap > 0.0));

        let a = AnnulusSpec::new(5, 11.0).unwrap();
        let s = sharpness_sweep(5, 1, &[10.0], &cfg()).unwrap();
        assert!(s.rows[0].sigma > annulus_sigma_n(a, 1) && s.rows[0].sigma < 4.0);

        let a = AnnulusSpec::new(3, 11.0).unwrap();
        let s = sharpness_sweep(3, 2, &[10.0], &cfg()).unwrap();
        assert!(s.rows[0].sigma > annulus_sigma_n(a, 2) && s.rows[0].sigma < 3.0);
    }
}
