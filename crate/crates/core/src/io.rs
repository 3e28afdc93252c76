//! CSV and JSON rendering of result tables.
//!
//! CSV floats use 9 significant digits so reruns diff cleanly; JSON keeps
//! full precision.

use std::fmt::Write as _;

use serde::Serialize;

use crate::closed_forms::sharp_bound;
use crate::fd_oracle::ConvergenceRow;
use crate::spectrum::{BracketResult, IncreaseExperiment, SharpnessSweep, SpectrumResult, TruncationStudy};

pub const SPECTRUM_HEADER: &str = "k,sigma,multiplicity,method,residual,lower,upper,flags";

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed,
/// exponent form outside `[1e-5, 1e9)`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Pretty-printed JSON with full float precision.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result types serialize");
    s.push('\n');
    s
}

/// One row per mode; `lower`/`upper` carry the bounds `k` and `k + n - 2`.
pub fn spectrum_csv(s: &SpectrumResult) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for e in &s.entries {
        let flags: Vec<&str> = s
            .flags
            .iter()
            .filter(|f| f.mode() == e.mode)
            .map(|f| f.code())
            .collect();
        let (lower, upper) = if e.mode == 0 || s.dimension < 3 {
            (e.mode as f64, f64::NAN)
        } else {
            (e.mode as f64, sharp_bound(s.dimension, e.mode))
        };
        let upper = if upper.is_nan() { String::new() } else { fmt_sig(upper) };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.mode,
            fmt_sig(e.sigma),
            e.multiplicity,
            e.method.as_str(),
            fmt_sig(e.residual),
            fmt_sig(lower),
            upper,
            flags.join(";")
        );
    }
    out
}

/// Bracket rows in the spectrum schema; `sigma` is the full value.
pub fn bracket_csv(rows: &[(BracketResult, u64)]) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for (b, mult) in rows {
        let flag = if b.full.is_some_and(|s| b.contains(s)) && b.lower <= b.upper {
            ""
        } else {
            "bracket_inversion"
        };
        let _ = writeln!(
            out,
            "{},{},{},shooting,,{},{},{}",
            b.mode,
            b.full.map(fmt_sig).unwrap_or_default(),
            mult,
            fmt_sig(b.lower),
            fmt_sig(b.upper),
            flag
        );
    }
    out
}

pub fn sharpness_csv(s: &SharpnessSweep) -> String {
    let mut out = String::from("R,sigma,gap\n");
    for r in &s.rows {
        let _ = writeln!(out, "{},{},{}", fmt_sig(r.reach), fmt_sig(r.sigma), fmt_sig(r.gap));
    }
    out
}

pub fn increase_csv(e: &IncreaseExperiment) -> String {
    let mut out = String::from("k,sigma_base,sigma_grown,strict\n");
    for r in &e.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.mode,
            fmt_sig(r.sigma_base),
            fmt_sig(r.sigma_grown),
            r.strict
        );
    }
    out
}

pub fn truncation_csv(t: &TruncationStudy) -> String {
    let mut out = String::from("eps,sigma_neumann,gap,rate\n");
    for (i, r) in t.rows.iter().enumerate() {
        let rate = if i == 0 { String::new() } else { fmt_sig(t.rates[i - 1]) };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(r.eps),
            fmt_sig(r.sigma_neumann),
            fmt_sig(r.gap),
            rate
        );
    }
    out
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("nodes,sigma,extrapolated,observed_order\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.nodes,
            fmt_sig(r.sigma),
            opt(r.extrapolated),
            opt(r.observed_order)
        );
    }
    out
}

pub fn comparison_csv(rows: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("k,sigma_first,sigma_second,ordered\n");
    for &(k, a, b) in rows {
        let _ = writeln!(out, "{k},{},{},{}", fmt_sig(a), fmt_sig(b), a <= b);
    }
    out
}
