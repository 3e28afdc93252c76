//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers or a profile-spec JSON string and
//! returns JSON text; the `*_json` functions are the same operations for
//! native callers and tests.

use serde_json::json;
use wasm_bindgen::prelude::*;

use steklov_core::spectrum::default_collar;
use steklov_core::{
    annulus_sigma_d, annulus_sigma_n, bracket_mode, build_tent, load_profile, sharp_bound, sharpness_sweep,
    AnnulusSpec, Profile, SolverConfig,
};

fn profile_outline(p: &Profile, samples: usize) -> serde_json::Value {
    let l = p.total_length();
    let pts: Vec<[f64; 2]> = (0..=samples)
        .map(|i| {
            let r = l * i as f64 / samples as f64;
            [r, p.value(r)]
        })
        .collect();
    json!({ "label": p.label(), "length": l, "points": pts })
}

/// Mode-`k` sweep over tents of the given reaches, with each tent's outline.
pub fn tent_sweep_json(n: usize, k: usize, reaches: &[f64]) -> Result<String, String> {
    let sweep = sharpness_sweep(n, k, reaches, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let outlines = reaches
        .iter()
        .map(|&r| build_tent(r).map(|p| profile_outline(&p, 200)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "limit": sharp_bound(n, k),
        "rows": sweep.rows,
        "flags": sweep.flags,
        "outlines": outlines,
    })
    .to_string())
}

/// Annulus closed forms on `count` radii spread geometrically over
/// `[l_min, l_max]`.
pub fn annulus_curve_json(n: usize, k: usize, l_min: f64, l_max: f64, count: usize) -> Result<String, String> {
    if !(l_min > 1.0 && l_max > l_min && count >= 2) {
        return Err("need 1 < L_min < L_max and at least two samples".into());
    }
    let ratio = (l_max / l_min).powf(1.0 / (count - 1) as f64);
    let rows = (0..count)
        .map(|i| {
            let l = l_min * ratio.powi(i as i32);
            let spec = AnnulusSpec::new(n, l).map_err(|e| e.to_string())?;
            Ok(json!({ "L": l, "sigma_D": annulus_sigma_d(spec, k), "sigma_N": annulus_sigma_n(spec, k) }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({ "limit": sharp_bound(n, k), "rows": rows }).to_string())
}

/// Bracket of mode `k` for a profile spec; a non-positive `r_end` picks the
/// default collar.
pub fn bracket_json(spec: &str, n: usize, k: usize, r_end: f64) -> Result<String, String> {
    let p = load_profile(spec).map_err(|e| e.to_string())?;
    let r_end = if r_end > 0.0 { r_end } else { default_collar(&p) };
    let b = bracket_mode(&p, n, k, r_end, &SolverConfig::default()).map_err(|e| e.to_string())?;
    Ok(json!({ "bracket": b, "outline": profile_outline(&p, 300) }).to_string())
}

#[wasm_bindgen]
pub fn tent_sweep(n: usize, k: usize, reaches: Vec<f64>) -> Result<String, JsError> {
    tent_sweep_json(n, k, &reaches).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn annulus_curve(n: usize, k: usize, l_min: f64, l_max: f64, count: usize) -> Result<String, JsError> {
    annulus_curve_json(n, k, l_min, l_max, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bracket(spec: &str, n: usize, k: usize, r_end: f64) -> Result<String, JsError> {
    bracket_json(spec, n, k, r_end).map_err(|e| JsError::new(&e))
}
