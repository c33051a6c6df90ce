//! Browser bindings: sampled curves of `M` and the Sonin envelope, the
//! extremum table, and a bound summary. Every entry point returns JSON text.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use jacobi_envelope::bounds::{rhs_bound, BoundId};
use jacobi_envelope::envelope::{delta, geometry, sonin_s, window_b};
use jacobi_envelope::extrema::{global_max_of, scan_extrema, DEFAULT_NODES_PER_DEGREE};
use jacobi_envelope::jacobi::weighted_m;
use jacobi_envelope::{Params, Window};

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn setup(k: u32, alpha: f64, beta: f64, use_delta: bool) -> Result<(Params, Window), String> {
    let p = Params::new(k, alpha, beta).map_err(|e| e.to_string())?;
    let w = if use_delta {
        if !p.is_ultraspherical() {
            return Err("the delta window needs alpha = beta".into());
        }
        let d = delta(k, alpha).ok_or("the delta window needs alpha >= 1/2")?;
        Window::symmetric(d).map_err(|e| e.to_string())?
    } else {
        Window::FULL
    };
    Ok((p, w))
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// `{x, m, s}` arrays over `n` points uniform in angle; `s` is null where `B <= 0`.
pub fn curve_json(k: u32, alpha: f64, beta: f64, use_delta: bool, n: usize) -> Result<String, String> {
    let (p, w) = setup(k, alpha, beta, use_delta)?;
    let n = n.clamp(16, 20_000);
    let (t0, t1) = (w.d_max.acos(), w.d_m.acos());
    let (mut xs, mut ms, mut ss) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 1..n {
        let x = (t1 - (t1 - t0) * i as f64 / n as f64).cos();
        let m = weighted_m(&p, x, &w).map(|v| v.value).unwrap_or(f64::NAN);
        let s = match window_b(&p, x, &w) {
            Ok(b) if b > 0.0 => sonin_s(&p, x, &w).map(|v| v.value).unwrap_or(f64::NAN),
            _ => f64::NAN,
        };
        xs.push(x);
        ms.push(finite(m));
        ss.push(finite(s));
    }
    Ok(json!({ "x": xs, "m": ms, "s": ss, "window": [w.d_m, w.d_max] }).to_string())
}

/// Extremum records plus the global maximum (endpoint limits included).
pub fn extrema_json(k: u32, alpha: f64, beta: f64, use_delta: bool) -> Result<String, String> {
    let (p, w) = setup(k, alpha, beta, use_delta)?;
    let recs = scan_extrema(&p, &w, DEFAULT_NODES_PER_DEGREE).map_err(|e| e.to_string())?;
    let g = global_max_of(&p, &w, &recs).map_err(|e| e.to_string())?;
    Ok(json!({ "records": recs, "global_max": g }).to_string())
}

fn window_max(p: &Params, w: &Window) -> Result<f64, String> {
    let recs = scan_extrema(p, w, DEFAULT_NODES_PER_DEGREE).map_err(|e| e.to_string())?;
    Ok(global_max_of(p, w, &recs).map_err(|e| e.to_string())?.m)
}

/// Maximum of `M` against every bound whose hypotheses hold, plus the geometry.
/// The centre and odd-k constants bound the delta-window maximum; the rest bound the full one.
pub fn bounds_json(k: u32, alpha: f64, beta: f64) -> Result<String, String> {
    let (p, w) = setup(k, alpha, beta, false)?;
    let max = window_max(&p, &w)?;
    let delta_max = match setup(k, alpha, beta, true) {
        Ok((_, dw)) => Some(window_max(&p, &dw)?),
        Err(_) => None,
    };
    let rows: Vec<Value> = BoundId::ALL
        .iter()
        .map(|&id| {
            let on_delta = matches!(id, BoundId::Thm4 | BoundId::Odd230 | BoundId::Odd29);
            let lhs = if on_delta { delta_max } else { Some(max) };
            match (rhs_bound(id, &p), lhs) {
                (Ok(rhs), Some(lhs)) => json!({
                    "id": id.as_str(),
                    "window": if on_delta { "delta" } else { "full" },
                    "rhs": finite(rhs),
                    "holds": lhs < rhs,
                    "ratio": finite(lhs / rhs),
                }),
                (Err(e), _) => json!({ "id": id.as_str(), "skipped": e.to_string() }),
                (Ok(_), None) => json!({ "id": id.as_str(), "skipped": "no delta window" }),
            }
        })
        .collect();
    let g = geometry(&p);
    Ok(json!({
        "max": max,
        "delta_max": delta_max,
        "bounds": rows,
        "geometry": { "delta": g.delta, "eta_minus": g.eta_minus, "eta_plus": g.eta_plus, "x0": g.x0 },
    })
    .to_string())
}

#[wasm_bindgen]
pub fn curve(k: u32, alpha: f64, beta: f64, use_delta: bool, n: usize) -> Result<String, JsValue> {
    curve_json(k, alpha, beta, use_delta, n).map_err(err)
}

#[wasm_bindgen]
pub fn extrema(k: u32, alpha: f64, beta: f64, use_delta: bool) -> Result<String, JsValue> {
    extrema_json(k, alpha, beta, use_delta).map_err(err)
}

#[wasm_bindgen]
pub fn bounds(k: u32, alpha: f64, beta: f64) -> Result<String, JsValue> {
    bounds_json(k, alpha, beta).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_curve_is_bounded_by_flat_envelope() {
        let v: Value = serde_json::from_str(&curve_json(5, -0.5, -0.5, false, 400).unwrap()).unwrap();
        let ms = v["m"].as_array().unwrap();
        assert_eq!(ms.len(), 399);
        let top = ms.iter().filter_map(Value::as_f64).fold(0.0, f64::max);
        assert!((top - 2.0 / std::f64::consts::PI).abs() < 1e-3);
        for s in v["s"].as_array().unwrap().iter().filter_map(Value::as_f64) {
            assert!((s - 2.0 / std::f64::consts::PI).abs() < 1e-9);
        }
    }

    #[test]
    fn extrema_and_bounds_serialize() {
        let v: Value = serde_json::from_str(&extrema_json(6, 1.0, 1.0, true).unwrap()).unwrap();
        assert!(v["global_max"]["x"].as_f64().unwrap().abs() < 1e-12);
        let v: Value = serde_json::from_str(&bounds_json(8, 2.0, 2.0).unwrap()).unwrap();
        let thm1 = v["bounds"].as_array().unwrap().iter().find(|r| r["id"] == "thm1").unwrap();
        assert_eq!(thm1["holds"], true);
        let thm4 = v["bounds"].as_array().unwrap().iter().find(|r| r["id"] == "thm4").unwrap();
        assert_eq!((thm4["window"].as_str(), thm4["holds"].as_bool()), (Some("delta"), Some(true)));
        assert!(extrema_json(6, 1.0, 0.7, true).is_err());
    }
}
