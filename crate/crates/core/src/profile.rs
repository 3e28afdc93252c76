//! Warp profiles `h(r)` of revolution submanifolds with one boundary sphere.
//!
//! A profile is a list of analytic segments covering `[0, L]`. The boundary
//! sphere sits at `r = 0` with radius `h(0) = 1`; the orbit spheres close up
//! at the pole `r = L`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ProfileError;
use crate::tridiag;

/// Default tolerance for endpoint equalities such as `h(0) = 1`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Uniform samples per segment used by the validator, on top of the exact
/// critical points of each segment.
pub const SAMPLES_PER_SEGMENT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    /// `h = start_value + (r - r_start)`.
    LinearUp { start_value: f64 },
    /// `h = start_value - (r - r_start)`.
    LinearDown { start_value: f64 },
    /// `h = base + sin(pi (r - r_start)) / pi`: slope goes from +1 to -1 over a
    /// unit interval with vanishing curvature at both ends.
    CosineCap { base: f64 },
    /// `h = c0 + c1 t + c2 t^2 + c3 t^3` with `t = r - r_start`.
    Cubic { coeffs: [f64; 4] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub r_start: f64,
    pub r_end: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn new(r_start: f64, r_end: f64, kind: SegmentKind) -> Self {
        Self { r_start, r_end, kind }
    }

    pub fn length(&self) -> f64 {
        self.r_end - self.r_start
    }

    pub fn value(&self, r: f64) -> f64 {
        let t = r - self.r_start;
        match self.kind {
            SegmentKind::LinearUp { start_value } => start_value + t,
            SegmentKind::LinearDown { start_value } => start_value - t,
            SegmentKind::CosineCap { base } => base + (PI * t).sin() / PI,
            SegmentKind::Cubic { coeffs: [c0, c1, c2, c3] } => c0 + t * (c1 + t * (c2 + t * c3)),
        }
    }

    pub fn slope(&self, r: f64) -> f64 {
        let t = r - self.r_start;
        match self.kind {
            SegmentKind::LinearUp { .. } => 1.0,
            SegmentKind::LinearDown { .. } => -1.0,
            SegmentKind::CosineCap { .. } => (PI * t).cos(),
            SegmentKind::Cubic { coeffs: [_, c1, c2, c3] } => c1 + t * (2.0 * c2 + 3.0 * t * c3),
        }
    }

    pub fn curvature(&self, r: f64) -> f64 {
        let t = r - self.r_start;
        match self.kind {
            SegmentKind::LinearUp { .. } | SegmentKind::LinearDown { .. } => 0.0,
            SegmentKind::CosineCap { .. } => -PI * (PI * t).sin(),
            SegmentKind::Cubic { coeffs: [_, _, c2, c3] } => 2.0 * c2 + 6.0 * t * c3,
        }
    }

    /// Interior points where `h` or `h'` can take an extreme value, plus the
    /// two endpoints.
    pub fn critical_points(&self) -> Vec<f64> {
        let len = self.length();
        let mut ts = vec![0.0, len];
        match self.kind {
            SegmentKind::LinearUp { .. } | SegmentKind::LinearDown { .. } => {}
            SegmentKind::CosineCap { .. } => {
                // cos extremes at integers, sin extremes at half-integers
                let mut j = 1;
                while (j as f64) * 0.5 < len {
                    ts.push(j as f64 * 0.5);
                    j += 1;
                }
            }
            SegmentKind::Cubic { coeffs: [_, c1, c2, c3] } => {
                // h'' = 0: extreme of the quadratic h'
                if c3 != 0.0 {
                    ts.push(-c2 / (3.0 * c3));
                }
                // h' = 0: extremes of h
                ts.extend(quadratic_roots(3.0 * c3, 2.0 * c2, c1));
            }
        }
        ts.into_iter()
            .filter(|t| *t >= 0.0 && *t <= len && t.is_finite())
            .map(|t| self.r_start + t)
            .collect()
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = vec![q / a];
    if q != 0.0 {
        roots.push(c / q);
    }
    roots
}

/// A validated-structure warp profile. Invariants beyond structure are
/// checked by [`validate_profile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    segments: Vec<Segment>,
    total_length: f64,
    label: String,
    /// Whether the pole is required to be smooth (`h'(L) = -1`).
    smooth_pole: bool,
}

impl Profile {
    /// Assemble a profile from segments. Fails only on structural problems
    /// (empty list, gaps, overlaps, empty segments, not starting at 0).
    pub fn new(segments: Vec<Segment>, label: impl Into<String>) -> Result<Self, ProfileError> {
        check_structure(&segments)?;
        let total_length = segments.last().map(|s| s.r_end).unwrap_or(0.0);
        Ok(Self {
            segments,
            total_length,
            label: label.into(),
            smooth_pole: true,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn smooth_pole(&self) -> bool {
        self.smooth_pole
    }

    /// Index of the segment owning `r`; joins belong to the left segment.
    pub fn segment_index(&self, r: f64) -> usize {
        let i = self.segments.partition_point(|s| s.r_end < r);
        i.min(self.segments.len() - 1)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.segments[self.segment_index(r)].value(r)
    }

    pub fn slope(&self, r: f64) -> f64 {
        self.segments[self.segment_index(r)].slope(r)
    }

    pub fn curvature(&self, r: f64) -> f64 {
        self.segments[self.segment_index(r)].curvature(r)
    }

    /// `-h'(L)`; equal to one for a smooth pole.
    pub fn pole_slope(&self) -> f64 {
        let last = self.segments.last().expect("profile has segments");
        -last.slope(last.r_end)
    }

    /// Segment joins strictly inside `(0, L)`.
    pub fn joins(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.r_start)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (L = {})", self.label, self.total_length)
    }
}

fn check_structure(segments: &[Segment]) -> Result<(), ProfileError> {
    let first = segments
        .first()
        .ok_or_else(|| ProfileError::Structural("no segments".into()))?;
    if first.r_start != 0.0 {
        return Err(ProfileError::Structural(format!(
            "first segment starts at {} instead of 0",
            first.r_start
        )));
    }
    let scale = segments.last().map(|s| s.r_end.abs()).unwrap_or(1.0).max(1.0);
    for (i, s) in segments.iter().enumerate() {
        if !(s.r_start.is_finite() && s.r_end.is_finite()) || s.r_start >= s.r_end {
            return Err(ProfileError::Structural(format!(
                "segment {i} has empty or invalid domain [{}, {}]",
                s.r_start, s.r_end
            )));
        }
        if let Some(next) = segments.get(i + 1) {
            let d = next.r_start - s.r_end;
            if d.abs() > 1e-12 * scale {
                let what = if d > 0.0 { "gap" } else { "overlap" };
                return Err(ProfileError::Structural(format!(
                    "{what} of {} between segments {i} and {}",
                    d.abs(),
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    /// `h(0) = 1`
    BoundaryRadius,
    /// `h(L) = 0`
    PoleClosure,
    /// `h > 0` on `[0, L)`
    Positivity,
    /// `|h'| <= 1`
    SlopeBound,
    /// `h'(L) = -1`
    PoleSlope,
    ValueContinuity,
    SlopeContinuity,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::BoundaryRadius => "h(0) != 1",
            Invariant::PoleClosure => "h(L) != 0",
            Invariant::Positivity => "h <= 0 before the pole",
            Invariant::SlopeBound => "|h'| > 1",
            Invariant::PoleSlope => "h'(L) != -1",
            Invariant::ValueContinuity => "h jumps at a join",
            Invariant::SlopeContinuity => "h' jumps at a join",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    /// Location of the worst offence.
    pub r: f64,
    /// Size of the worst offence.
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_location(&self) -> Option<f64> {
        self.violations
            .iter()
            .map(|v| v.r)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Record an offence, keeping only the worst one per invariant.
    fn record(&mut self, invariant: Invariant, r: f64, magnitude: f64) {
        match self.violations.iter_mut().find(|v| v.invariant == invariant) {
            Some(v) if magnitude > v.magnitude => {
                v.r = r;
                v.magnitude = magnitude;
            }
            Some(_) => {}
            None => self.violations.push(Violation { invariant, r, magnitude }),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} at r = {} (by {:e})", v.invariant, v.r, v.magnitude)?;
        }
        Ok(())
    }
}

/// Check every profile invariant.
///
/// `tol` bounds endpoint equalities; inequalities (`|h'| <= 1`, positivity)
/// get a slack of `100 * tol`.
pub fn validate_profile(p: &Profile, tol: f64) -> ValidationReport {
    let slack = 100.0 * tol;
    let mut report = ValidationReport::default();
    let l = p.total_length;
    let first = &p.segments[0];
    let last = p.segments.last().expect("profile has segments");

    let h0 = first.value(0.0);
    if (h0 - 1.0).abs() > tol {
        report.record(Invariant::BoundaryRadius, 0.0, (h0 - 1.0).abs());
    }
    let hl = last.value(l);
    if hl.abs() > tol {
        report.record(Invariant::PoleClosure, l, hl.abs());
    }
    if p.smooth_pole {
        let dl = last.slope(l);
        if (dl + 1.0).abs() > tol {
            report.record(Invariant::PoleSlope, l, (dl + 1.0).abs());
        }
    }

    for (i, seg) in p.segments.iter().enumerate() {
        let n = SAMPLES_PER_SEGMENT;
        let samples = (0..=n).map(|j| seg.r_start + seg.length() * j as f64 / n as f64);
        for r in samples.chain(seg.critical_points()) {
            let d = seg.slope(r);
            if d.abs() > 1.0 + slack {
                report.record(Invariant::SlopeBound, r, d.abs() - 1.0);
            }
            if r < l {
                let h = seg.value(r);
                let pole_side = i + 1 == p.segments.len() && l - r <= tol;
                if h <= 0.0 && !pole_side {
                    report.record(Invariant::Positivity, r, -h);
                }
            }
        }
        if let Some(next) = p.segments.get(i + 1) {
            let r = seg.r_end;
            let dv = (seg.value(r) - next.value(next.r_start)).abs();
            if dv > tol {
                report.record(Invariant::ValueContinuity, r, dv);
            }
            let ds = (seg.slope(r) - next.slope(next.r_start)).abs();
            if ds > tol {
                report.record(Invariant::SlopeContinuity, r, ds);
            }
        }
    }
    report
}

fn ensure_valid(p: &Profile) -> Result<(), ProfileError> {
    let report = validate_profile(p, DEFAULT_TOL);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ProfileError::Invalid(report))
    }
}

/// The flat unit ball: `h(r) = 1 - r` on `[0, 1]`.
pub fn build_cone() -> Profile {
    Profile::new(
        vec![Segment::new(0.0, 1.0, SegmentKind::LinearDown { start_value: 1.0 })],
        "cone",
    )
    .expect("cone segments are well formed")
}

fn grow_cap_close(reach: f64, label: String) -> Profile {
    let top = reach + 1.0;
    let total = 2.0 * reach + 2.0;
    Profile::new(
        vec![
            Segment::new(0.0, reach, SegmentKind::LinearUp { start_value: 1.0 }),
            Segment::new(reach, reach + 1.0, SegmentKind::CosineCap { base: top }),
            Segment::new(reach + 1.0, total, SegmentKind::LinearDown { start_value: top }),
        ],
        label,
    )
    .expect("tent segments are well formed")
}

/// `h = 1 + r` out to `r = R`, a unit-length cosine cap, then a straight
/// closure reaching the pole at `L = 2R + 2`.
pub fn build_tent(reach: f64) -> Result<Profile, ProfileError> {
    if !(reach > 0.0 && reach.is_finite()) {
        return Err(ProfileError::Domain(format!("tent reach must be positive, got {reach}")));
    }
    Ok(grow_cap_close(reach, format!("tent(R={reach})")))
}

/// Build a profile dominating `base` on `[0, L1]`: `1 + r` up to `L1`, a
/// cosine cap on `[L1, L1 + 1]`, then `L2 - r` with `L2 = 2 L1 + 2`.
pub fn build_increase(base: &Profile) -> Result<Profile, ProfileError> {
    ensure_valid(base)?;
    let l1 = base.total_length();
    Ok(grow_cap_close(l1, format!("increase({})", base.label())))
}

/// Interpolating cubic spline through `knots`, natural at `r = 0`.
///
/// With `end_slope_checks` the spline is clamped to `h'(L) = -1` and the
/// pole slope is validated; without it the end is natural and the pole may
/// be conical.
pub fn build_custom(knots: &[(f64, f64)], end_slope_checks: bool) -> Result<Profile, ProfileError> {
    let p = spline_profile(knots, end_slope_checks)?;
    ensure_valid(&p)?;
    Ok(p)
}

fn spline_profile(knots: &[(f64, f64)], end_slope_checks: bool) -> Result<Profile, ProfileError> {
    if knots.len() < 2 {
        return Err(ProfileError::Domain("at least two knots are required".into()));
    }
    let (r0, h0) = knots[0];
    let (rl, hl) = knots[knots.len() - 1];
    if r0 != 0.0 || h0 != 1.0 {
        return Err(ProfileError::Domain(format!("first knot must be (0, 1), got ({r0}, {h0})")));
    }
    if hl != 0.0 {
        return Err(ProfileError::Domain(format!("last knot must have h = 0, got ({rl}, {hl})")));
    }
    if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) || knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
        return Err(ProfileError::Domain("knot radii must be finite and strictly increasing".into()));
    }

    let m = knots.len() - 1;
    let dr: Vec<f64> = knots.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let chord: Vec<f64> = knots.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();

    // second derivatives at knots; M_0 = 0 (natural start)
    let mut lower = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 1..m {
        if i > 1 {
            lower.push(dr[i - 1]);
        }
        diag.push(2.0 * (dr[i - 1] + dr[i]));
        upper.push(dr[i]);
        rhs.push(6.0 * (chord[i] - chord[i - 1]));
    }
    if end_slope_checks {
        if m > 1 {
            lower.push(dr[m - 1]);
        }
        diag.push(2.0 * dr[m - 1]);
        rhs.push(6.0 * (-1.0 - chord[m - 1]));
    } else {
        // natural end: M_m = 0, the last equation is dropped
        upper.pop();
    }
    let solved = tridiag::solve(&lower, &diag, &upper, &rhs)
        .ok_or_else(|| ProfileError::Domain("spline system is singular".into()))?;
    let mut second = vec![0.0; m + 1];
    for (i, v) in solved.into_iter().enumerate() {
        second[i + 1] = v;
    }

    let segments = (0..m)
        .map(|i| {
            let d = dr[i];
            let c0 = knots[i].1;
            let c1 = chord[i] - d * (2.0 * second[i] + second[i + 1]) / 6.0;
            let c2 = second[i] / 2.0;
            let c3 = (second[i + 1] - second[i]) / (6.0 * d);
            Segment::new(knots[i].0, knots[i + 1].0, SegmentKind::Cubic { coeffs: [c0, c1, c2, c3] })
        })
        .collect();
    let mut p = Profile::new(segments, format!("custom({} knots)", knots.len()))?;
    p.smooth_pole = end_slope_checks;
    Ok(p)
}

/// JSON description of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileSpec {
    Cone {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Tent {
        #[serde(rename = "R")]
        reach: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Increase {
        base: Box<ProfileSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Custom {
        knots: Vec<[f64; 2]>,
        #[serde(default = "default_true")]
        end_slope_checks: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

fn default_true() -> bool {
    true
}

impl ProfileSpec {
    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        serde_json::from_str(text).map_err(|e| ProfileError::Spec(e.to_string()))
    }

    /// Build and validate the described profile.
    pub fn build(&self) -> Result<Profile, ProfileError> {
        let (p, label) = match self {
            ProfileSpec::Cone { label } => (build_cone(), label),
            ProfileSpec::Tent { reach, label } => (build_tent(*reach)?, label),
            ProfileSpec::Increase { base, label } => (build_increase(&base.build()?)?, label),
            ProfileSpec::Custom {
                knots,
                end_slope_checks,
                label,
            } => {
                let pairs: Vec<(f64, f64)> = knots.iter().map(|k| (k[0], k[1])).collect();
                (build_custom(&pairs, *end_slope_checks)?, label)
            }
        };
        ensure_valid(&p)?;
        Ok(match label {
            Some(l) => p.with_label(l.clone()),
            None => p,
        })
    }
}

/// Parse, build and validate a profile spec.
pub fn load_profile(text: &str) -> Result<Profile, ProfileError> {
    ProfileSpec::from_json(text)?.build()
}
