//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every exported function takes rates per day and times in days, and
//! returns either a flat `Float64Array` of `(t, value)` pairs or a JSON
//! string.

use serde_json::json;
use tedium::decay::{self, DecayParams};
use tedium::estimate::fit_nonlinear;
use tedium::ingest::{bin_usage, Scope};
use tedium::simulate::{simulate_user, user_rng, StreamLabels};
use tedium::time::{Duration, TimeInstant, SECONDS_PER_DAY};
use wasm_bindgen::prelude::*;

fn js(e: tedium::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `samples` points of `x0 exp(-m t)` on `[0, t_max]`, flattened as
/// `[t0, x0, t1, x1, ...]` with `t` in days.
#[wasm_bindgen(js_name = decayCurve)]
pub fn decay_curve(x0: f64, m_per_day: f64, t_max_days: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    curve(x0, m_per_day, t_max_days, samples).map_err(js)
}

/// Forward-integrated interest after each of `steps` equal steps, in the
/// same layout as [`decay_curve`].
#[wasm_bindgen(js_name = eulerCurve)]
pub fn euler_curve(x0: f64, m_per_day: f64, t_max_days: f64, steps: u32) -> Result<Vec<f64>, JsError> {
    euler(x0, m_per_day, t_max_days, steps).map_err(js)
}

/// Simulates one user, bins the events and fits the decay law. Returns JSON
/// `{bins: [[t_days, count], ...], events, fit: {...}, truth: {...}}`.
#[wasm_bindgen(js_name = simulateFit)]
pub fn simulate_fit(
    x0: f64,
    m_per_day: f64,
    lambda0_per_day: f64,
    days: f64,
    bin_days: f64,
    seed: u64,
) -> Result<String, JsError> {
    simulate_and_fit(x0, m_per_day, lambda0_per_day, days, bin_days, seed).map_err(js)
}

#[wasm_bindgen(js_name = halfLifeDays)]
pub fn half_life_days(m_per_day: f64) -> Result<f64, JsError> {
    decay::half_life(per_second(m_per_day)).map(|d| d.as_days()).map_err(js)
}

fn per_second(m_per_day: f64) -> f64 {
    m_per_day / SECONDS_PER_DAY
}

pub fn curve(x0: f64, m_per_day: f64, t_max_days: f64, samples: usize) -> tedium::Result<Vec<f64>> {
    let params = DecayParams::new(x0, per_second(m_per_day))?;
    let points = decay::decay_curve(&params, Duration::from_days(t_max_days), samples)?;
    Ok(points.into_iter().flat_map(|(t, x)| [t.as_days(), x]).collect())
}

pub fn euler(x0: f64, m_per_day: f64, t_max_days: f64, steps: u32) -> tedium::Result<Vec<f64>> {
    let params = DecayParams::new(x0, per_second(m_per_day))?;
    // reject unstable step counts up front, with the library's message
    decay::integrate_euler(&params, Duration::from_days(t_max_days), u64::from(steps))?;
    let mut out = vec![0.0, x0];
    for k in 1..=steps {
        let t = t_max_days * f64::from(k) / f64::from(steps);
        let x = decay::integrate_euler(&params, Duration::from_days(t), u64::from(k))?;
        out.extend([t, x]);
    }
    Ok(out)
}

pub fn simulate_and_fit(
    x0: f64,
    m_per_day: f64,
    lambda0_per_day: f64,
    days: f64,
    bin_days: f64,
    seed: u64,
) -> tedium::Result<String> {
    let params = DecayParams::new(x0, per_second(m_per_day))?;
    let origin = TimeInstant::from_epoch_secs(0.0);
    let labels = StreamLabels { user_id: "demo".into(), object_id: "text".into(), ontology_id: "demo".into(), origin };
    let tags = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let horizon = Duration::from_days(days);
    let mut rng = user_rng(seed, 0);
    let events = simulate_user(&params, per_second(lambda0_per_day), horizon, &tags, &labels, &mut rng)?;
    let series = bin_usage(
        &events,
        "demo",
        &Scope::Ontology("demo".into()),
        Duration::from_days(bin_days),
        origin,
        origin + horizon,
    )?;
    let bins: Vec<[f64; 2]> = series.points().iter().map(|p| [(p.time - origin).as_days(), p.intensity]).collect();
    let fit = match fit_nonlinear(&series, None) {
        Ok(fit) => json!({
            "x0": fit.x0,
            "m_per_day": fit.m * SECONDS_PER_DAY,
            "rmse": fit.rmse,
            "r_squared": fit.r_squared,
            "accepted": fit.accepted,
            "warnings": fit.warnings,
        }),
        Err(e) => json!({ "error": e.to_string(), "accepted": false }),
    };
    let doc = json!({
        "bins": bins,
        "events": events.len(),
        "fit": fit,
        "truth": { "x0": x0, "m_per_day": m_per_day },
    });
    Ok(doc.to_string())
}
