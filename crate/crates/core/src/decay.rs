//! Forgetfulness dynamics.
//!
//! Interest in a web object decays as `x(t) = x0 * exp(-m t)`, the solution
//! of the linear ODE `dx/dt = M(x)` with rate map `M(x) = -m x`. The tedium
//! coefficient `m` is strictly positive; larger values forget faster.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Duration;

/// Initial interest `x0` and tedium coefficient `m` (per second).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayParams {
    x0: f64,
    m: f64,
}

impl DecayParams {
    pub fn new(x0: f64, m: f64) -> Result<Self> {
        if !(x0.is_finite() && x0 >= 0.0) {
            return Err(Error::InvalidInterest(x0));
        }
        check_rate(m)?;
        Ok(DecayParams { x0, m })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Tedium coefficient in reciprocal seconds.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Same coefficient, interest restarted from `x0`.
    pub fn with_x0(&self, x0: f64) -> Result<Self> {
        DecayParams::new(x0, self.m)
    }

    pub fn half_life(&self) -> Duration {
        Duration::from_secs(std::f64::consts::LN_2 / self.m)
    }
}

impl<'de> Deserialize<'de> for DecayParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x0: f64,
            m: f64,
        }
        let raw = Raw::deserialize(d)?;
        DecayParams::new(raw.x0, raw.m).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_rate(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveRate(m))
    }
}

fn check_elapsed(t: Duration) -> Result<f64> {
    let t = t.as_secs();
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(Error::NegativeDuration(t))
    }
}

/// Closed-form interest after `t` has elapsed.
pub fn evaluate_interest(params: &DecayParams, t: Duration) -> Result<f64> {
    let t = check_elapsed(t)?;
    Ok(params.x0 * (-params.m * t).exp())
}

/// The forgetfulness function `M(x) = -m x`.
pub fn forgetfulness_rate(x: f64, m: f64) -> Result<f64> {
    check_rate(m)?;
    if !x.is_finite() {
        return Err(Error::Argument(format!("interest level must be finite (got {x})")));
    }
    Ok(-m * x)
}

/// Forward explicit integration of `dx/dt = -m x` from `x0` over `t` in
/// `steps` equal steps.
///
/// The step must satisfy `m * dt <= 1`; beyond that the iterate changes sign
/// and the scheme no longer tracks a decaying solution.
pub fn integrate_euler(params: &DecayParams, t: Duration, steps: u64) -> Result<f64> {
    let t = check_elapsed(t)?;
    if steps == 0 {
        return Err(Error::Argument("steps must be at least 1".into()));
    }
    let dt = t / steps as f64;
    if params.m * dt > 1.0 {
        let min_steps = (params.m * t).ceil() as u64;
        return Err(Error::StepSize { min_steps });
    }
    let mut x = params.x0;
    for _ in 0..steps {
        x += dt * -params.m * x;
    }
    Ok(x)
}

/// Time for interest to halve, `ln 2 / m`.
pub fn half_life(m: f64) -> Result<Duration> {
    check_rate(m)?;
    Ok(Duration::from_secs(std::f64::consts::LN_2 / m))
}

/// `samples` evenly spaced points `(t, x(t))` on `[0, t_max]`, both ends
/// included.
pub fn decay_curve(params: &DecayParams, t_max: Duration, samples: usize) -> Result<Vec<(Duration, f64)>> {
    if samples < 2 {
        return Err(Error::Argument(format!("samples must be at least 2 (got {samples})")));
    }
    let span = t_max.as_secs();
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::Argument(format!("t_max must be positive (got {t_max})")));
    }
    let last = (samples - 1) as f64;
    (0..samples)
        .map(|i| {
            let t = if i == samples - 1 { t_max } else { Duration::from_secs(span * i as f64 / last) };
            evaluate_interest(params, t).map(|x| (t, x))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x0: f64, m: f64) -> DecayParams {
        DecayParams::new(x0, m).unwrap()
    }

    fn secs(s: f64) -> Duration {
        Duration::from_secs(s)
    }

    /// exp(-1) as the reciprocal of the positive series sum of 1/k!, which
    /// shares no code path with `f64::exp`.
    fn inv_e_by_series() -> f64 {
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        for k in 1..30 {
            term /= k as f64;
            sum += term;
        }
        1.0 / sum
    }

    #[test]
    fn params_validation() {
        assert!(DecayParams::new(1.0, 0.0).is_err());
        assert!(DecayParams::new(1.0, -0.5).is_err());
        assert!(DecayParams::new(-1.0, 0.5).is_err());
        assert!(DecayParams::new(f64::NAN, 0.5).is_err());
        assert!(DecayParams::new(1.0, f64::INFINITY).is_err());
        assert!(DecayParams::new(0.0, 1e-12).is_ok());
        assert!(serde_json::from_str::<DecayParams>(r#"{"x0":1,"m":0}"#).is_err());
    }

    #[test]
    fn evaluate_interest_examples() {
        assert_eq!(evaluate_interest(&p(1.0, 0.5), secs(0.0)).unwrap(), 1.0);
        assert_eq!(evaluate_interest(&p(0.0, 2.0), secs(7.3)).unwrap(), 0.0);
        let x = evaluate_interest(&p(1.0, 0.5), secs(2.0)).unwrap();
        assert!((inv_e_by_series() - 0.3678794412).abs() < 1e-10);
        assert!((x - inv_e_by_series()).abs() < 1e-15);
        assert!(matches!(evaluate_interest(&p(1.0, 0.5), secs(-1.0)), Err(Error::NegativeDuration(_))));
    }

    #[test]
    fn forgetfulness_rate_examples() {
        assert_eq!(forgetfulness_rate(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(forgetfulness_rate(1.0, 0.5).unwrap(), -0.5);
        assert_eq!(forgetfulness_rate(2.0, 0.25).unwrap(), -0.5);
        assert!(matches!(forgetfulness_rate(1.0, 0.0), Err(Error::NonPositiveRate(_))));
        assert!(matches!(forgetfulness_rate(1.0, -2.0), Err(Error::NonPositiveRate(_))));
    }

    #[test]
    fn euler_examples() {
        assert_eq!(integrate_euler(&p(1.0, 0.5), secs(0.0), 10).unwrap(), 1.0);
        assert_eq!(integrate_euler(&p(1.0, 0.5), secs(2.0), 1).unwrap(), 0.0);
        let x = integrate_euler(&p(1.0, 0.5), secs(2.0), 100_000).unwrap();
        assert!((x - 0.367879).abs() < 2e-6);
        let exact = evaluate_interest(&p(1.0, 0.5), secs(2.0)).unwrap();
        assert!((x - exact).abs() < 2e-6);
    }

    #[test]
    fn euler_rejects_unstable_steps() {
        match integrate_euler(&p(1.0, 0.5), secs(10.0), 4) {
            Err(Error::StepSize { min_steps }) => assert_eq!(min_steps, 5),
            other => panic!("expected step-size error, got {other:?}"),
        }
        assert!(integrate_euler(&p(1.0, 0.5), secs(10.0), 5).is_ok());
        assert!(matches!(integrate_euler(&p(1.0, 0.5), secs(1.0), 0), Err(Error::Argument(_))));
    }

    #[test]
    fn half_life_examples() {
        let one = half_life(std::f64::consts::LN_2).unwrap().as_secs();
        assert!((one - 1.0).abs() < 1e-15);
        assert!((half_life(0.1).unwrap().as_secs() - 6.931472).abs() < 1e-6);
        assert!(half_life(0.0).is_err());
        assert!(half_life(-3.0).is_err());
        assert_eq!(p(2.0, 0.1).half_life(), half_life(0.1).unwrap());
    }

    #[test]
    fn decay_curve_examples() {
        let c = decay_curve(&p(1.0, 0.5), secs(2.0), 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], (secs(0.0), 1.0));
        assert_eq!(c[1].0, secs(2.0));
        assert!((c[1].1 - 0.3678794412).abs() < 1e-10);

        let zero = decay_curve(&p(0.0, 1.0), secs(5.0), 3).unwrap();
        assert!(zero.iter().all(|&(_, x)| x == 0.0));

        let c = decay_curve(&p(1.0, 0.5), secs(4.0), 5).unwrap();
        let xs: Vec<f64> = c.iter().map(|&(_, x)| x).collect();
        for (i, &(t, x)) in c.iter().enumerate() {
            assert_eq!(t.as_secs(), i as f64);
            assert_eq!(x, (-0.5 * i as f64).exp());
        }
        assert!(xs.windows(2).all(|w| w[1] < w[0]));
        assert!(xs.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= 0.0));

        assert!(decay_curve(&p(1.0, 0.5), secs(4.0), 1).is_err());
        assert!(decay_curve(&p(1.0, 0.5), secs(0.0), 3).is_err());
    }

    #[test]
    fn euler_is_first_order() {
        let params = p(1.0, 0.5);
        let t = secs(10.0);
        let exact = evaluate_interest(&params, t).unwrap();
        let errs: Vec<f64> = [1000u64, 2000, 4000, 8000, 16000]
            .iter()
            .map(|&n| (integrate_euler(&params, t, n).unwrap() - exact).abs())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 2.0 / 1.2 && ratio < 2.0 * 1.2, "ratio {ratio}");
        }
    }

    #[test]
    fn rate_matches_centered_difference() {
        let params = p(3.0, 0.8);
        for &t in &[0.5, 1.0, 4.0] {
            let x = evaluate_interest(&params, secs(t)).unwrap();
            let rate = forgetfulness_rate(x, params.m()).unwrap();
            for &h in &[1e-3, 1e-4] {
                let fwd = evaluate_interest(&params, secs(t + h)).unwrap();
                let back = evaluate_interest(&params, secs(t - h)).unwrap();
                let fd = (fwd - back) / (2.0 * h);
                // truncation error of the centered difference is h^2 m^3 x / 6
                let bound = params.m().powi(3) * x * h * h + 1e-10;
                assert!((rate - fd).abs() <= bound, "t={t} h={h}");
            }
        }
    }

    proptest! {
        #[test]
        fn semigroup(x0 in 0.0..1e3f64, m in 1e-4..10.0f64, t1 in 0.0..20.0f64, t2 in 0.0..20.0f64) {
            let params = p(x0, m);
            let mid = evaluate_interest(&params, secs(t1)).unwrap();
            let two_legs = evaluate_interest(&params.with_x0(mid).unwrap(), secs(t2)).unwrap();
            let one_leg = evaluate_interest(&params, secs(t1 + t2)).unwrap();
            prop_assert!((two_legs - one_leg).abs() <= 1e-12 * one_leg.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn monotone_and_positive(x0 in 1e-3..1e3f64, m in 1e-4..5.0f64, t1 in 0.0..50.0f64, dt in 1e-3..50.0f64) {
            let params = p(x0, m);
            let a = evaluate_interest(&params, secs(t1)).unwrap();
            let b = evaluate_interest(&params, secs(t1 + dt)).unwrap();
            prop_assert!(b < a);
            prop_assert!(b > 0.0);
            prop_assert!(a <= x0);
        }

        #[test]
        fn larger_m_forgets_faster(x0 in 1e-3..1e3f64, mb in 1e-3..2.0f64, extra in 1e-3..2.0f64, t in 0.01..10.0f64) {
            let fast = evaluate_interest(&p(x0, mb + extra), secs(t)).unwrap();
            let slow = evaluate_interest(&p(x0, mb), secs(t)).unwrap();
            prop_assert!(fast < slow);
        }

        #[test]
        fn rate_sign_opposes_interest(x in -1e6..1e6f64, m in 1e-6..1e3f64) {
            let r = forgetfulness_rate(x, m).unwrap();
            prop_assert_eq!(r == 0.0, x == 0.0);
            if x != 0.0 {
                prop_assert!(r.signum() == -x.signum());
            }
        }
    }
}
