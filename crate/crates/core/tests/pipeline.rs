//! Simulated corpora through binning and estimation.

use tedium::ingest::{bin_usage, Scope};
use tedium::simulate::{simulate_cohort, simulate_user, user_rng, CohortSpec, StreamLabels};
use tedium::{fit_nonlinear, DecayParams, Duration, TimeInstant};

const DAY: f64 = 86_400.0;

fn labels() -> StreamLabels {
    StreamLabels {
        user_id: "u01".into(),
        object_id: "text-1".into(),
        ontology_id: "cohort".into(),
        origin: TimeInstant::from_epoch_secs(1_704_067_200.0),
    }
}

fn fitted_m_per_day(params: DecayParams, lambda0_per_day: f64, days: f64, bin_days: f64, bins: f64, seed: u64) -> f64 {
    let labels = labels();
    let tags = vec!["a".to_string(), "b".to_string()];
    let mut rng = user_rng(seed, 0);
    let events =
        simulate_user(&params, lambda0_per_day / DAY, Duration::from_days(days), &tags, &labels, &mut rng).unwrap();
    let series = bin_usage(
        &events,
        "u01",
        &Scope::Ontology("cohort".into()),
        Duration::from_days(bin_days),
        labels.origin,
        labels.origin + Duration::from_days(bin_days * bins),
    )
    .unwrap();
    let fit = fit_nonlinear(&series, None).unwrap();
    assert!(fit.accepted, "{fit:?}");
    fit.m * DAY
}

#[test]
fn poisson_counts_golden_seed() {
    // x0 = 100, m = 0.1/day, 20 daily bins; value recorded from seed 2024
    let params = DecayParams::new(100.0, 0.1 / DAY).unwrap();
    let m_hat = fitted_m_per_day(params, 1.0, 20.0, 1.0, 20.0, 2024);
    assert!(((m_hat - 0.101_525_038_236_421_34) / 0.1).abs() < 1e-9, "{m_hat}");
    assert!(((m_hat - 0.1) / 0.1).abs() < 0.15);
}

#[test]
fn weekly_bins_recover_m_for_high_rate_users() {
    // lambda0 * x0 = 100/day; half-life 13.9 days, so 21 weeks is > 10 half-lives
    let params = DecayParams::new(1.0, 0.05 / DAY).unwrap();
    let within = (0..100)
        .filter(|&seed| ((fitted_m_per_day(params, 100.0, 150.0, 7.0, 21.0, seed) - 0.05) / 0.05).abs() < 0.10)
        .count();
    assert!(within >= 95, "{within}/100 seeds within 10%");
}

#[test]
fn cohort_streams_fit_their_own_truth() {
    let spec = CohortSpec { n_users: 5, lambda0: 200.0 / DAY, ..CohortSpec::reference(21) };
    let (events, truth) = simulate_cohort(&spec).unwrap();
    for (user, t) in &truth {
        let series = bin_usage(
            &events,
            user,
            &Scope::Ontology(spec.ontology_id.clone()),
            Duration::from_days(7.0),
            spec.origin,
            spec.origin + Duration::from_weeks(21.0),
        )
        .unwrap();
        let fit = fit_nonlinear(&series, None).unwrap();
        assert!(fit.accepted);
        assert!(((fit.m - t.m) / t.m).abs() < 0.15, "{user}: {} vs {}", fit.m * DAY, t.m * DAY);
    }
}
