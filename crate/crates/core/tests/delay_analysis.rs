use tcrf::delay_analysis::*;
use tcrf::discrete_temporal::build_cascade;
use tcrf::discrete_temporal::DiscreteCascadeSpec;
use tcrf::scale_distribution::uniform_time_constants;
use tcrf::scale_distribution::{DistributionKind, ScaleDistribution, TimeConstants};
use tcrf::Error;

const CS: [f64; 3] = [std::f64::consts::SQRT_2, 1.681_792_830_507_429, 2.0];

#[test]
fn mean_delay_examples() {
    assert_eq!(format_3dp(mean_delay_uniform(7, 1.0).unwrap()), "2.646");
    assert_eq!(mean_delay_uniform(1, 1.0).unwrap(), 1.0);
    assert_eq!(format_3dp(mean_delay_uniform(4, 1.0).unwrap()), "2.000");
    assert!(mean_delay_uniform(0, 1.0).is_err());

    let m = mean_delay_log(2, 2.0, 1.0).unwrap();
    assert!((m - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-14);
    assert_eq!(format_3dp(m), "1.366");
    assert_eq!(format_3dp(mean_delay_log(3, CS[0], 1.0).unwrap()), "1.707");
    assert!(mean_delay_log(1, 2.0, 1.0).is_err());
    assert!(mean_delay_log(3, 1.0, 1.0).is_err());
}

#[test]
fn closed_form_mean_equals_sum_of_mu() {
    for &c in &CS {
        for k in 2..=12 {
            let mu = ScaleDistribution::logarithmic(k, c, 2.5)
                .unwrap()
                .time_constants();
            let closed = mean_delay_log(k, c, 2.5).unwrap();
            assert!((closed - mu.mean()).abs() < 1e-12 * closed);
        }
    }
}

#[test]
fn limit_examples() {
    assert!((mean_delay_log_limit(2.0, 1.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    let v = mean_delay_log_limit(CS[0], 4.0).unwrap();
    assert!((v - 2.0 / (CS[0] - 1.0)).abs() < 1e-12);
    assert!((v - 4.8284).abs() < 1e-4);
    assert!((mean_delay_log_limit(10.0, 1.0).unwrap() - 99f64.sqrt() / 9.0).abs() < 1e-15);
    assert!(mean_delay_log_limit(1.0, 1.0).is_err());
}

#[test]
fn log_mean_increases_towards_limit() {
    for &c in &CS {
        let limit = mean_delay_log_limit(c, 1.0).unwrap();
        let mut prev = 0.0;
        for k in 2..=30 {
            let m = mean_delay_log(k, c, 1.0).unwrap();
            assert!(m > prev && m < limit);
            prev = m;
        }
    }
}

#[test]
fn log_faster_than_uniform() {
    for &c in &CS {
        for k in 3..=8 {
            assert!(mean_delay_log(k, c, 1.0).unwrap() < mean_delay_uniform(k, 1.0).unwrap());
        }
    }
}

#[test]
fn tmax_uniform_examples() {
    assert_eq!(format_3dp(tmax_uniform(7, 1.0).unwrap()), "2.268");
    assert_eq!(format_3dp(tmax_uniform(2, 1.0).unwrap()), "0.707");
    assert_eq!(tmax_uniform(1, 1.0).unwrap(), 0.0);
}

#[test]
fn tmax_numeric_examples() {
    let mu = ScaleDistribution::logarithmic(2, CS[1], 1.0)
        .unwrap()
        .time_constants();
    let (a, b) = (mu[0], mu[1]);
    let exact = a * b * (a / b).ln() / (a - b);
    assert!((tmax_numeric(&mu).unwrap() - exact).abs() < 1e-8);
    assert!((tmax_numeric(&mu).unwrap() - 0.688).abs() < 0.005);

    let mu = TimeConstants::new(vec![std::f64::consts::FRAC_1_SQRT_2; 2]).unwrap();
    assert!((tmax_numeric(&mu).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);

    // Two distinct poles a, b: argmax = ab ln(a/b) / (a - b).
    let (a, b) = (0.5, 0.75f64.sqrt());
    let exact = a * b * (a / b).ln() / (a - b);
    let mu = TimeConstants::new(vec![a, b]).unwrap();
    assert!((tmax_numeric(&mu).unwrap() - exact).abs() < 1e-8);
    assert!((exact - 0.6498).abs() < 1e-4);

    assert_eq!(
        tmax_numeric(&TimeConstants::new(vec![2.0]).unwrap()).unwrap(),
        0.0
    );
}

#[test]
fn tmax_numeric_matches_uniform_closed_form() {
    for k in 2..=10 {
        let mu = uniform_time_constants(k, 3.0).unwrap();
        let closed = tmax_uniform(k, 3.0).unwrap();
        let numeric = tmax_numeric(&mu).unwrap();
        assert!(
            (numeric - closed).abs() < 1e-6 * closed,
            "K={k}: {numeric} vs {closed}"
        );
    }
}

#[test]
fn tmax_below_mean() {
    for &c in &CS {
        for k in 2..=8 {
            let r = DelayReport::compute(k, DistributionKind::Logarithmic { c }).unwrap();
            assert!(r.tmax_delay < r.mean_delay && r.tmax_delay > 0.0);
        }
    }
}

#[test]
fn table_rows() {
    let table = render_delay_tables(&(2..=8).collect::<Vec<_>>(), &CS).unwrap();
    let row5: Vec<String> = (0..4)
        .map(|j| format_3dp(table.value(3, j, DelayMeasure::Mean)))
        .collect();
    assert_eq!(row5, ["2.236", "2.061", "1.860", "1.686"]);
    let row6: Vec<String> = (0..4)
        .map(|j| format_3dp(table.value(4, j, DelayMeasure::Maximum)))
        .collect();
    assert_eq!(row6, ["2.041", "1.669", "1.340", "1.083"]);

    let single = render_delay_tables(&[2], &[]).unwrap();
    assert_eq!(single.columns.len(), 1);
    assert_eq!(format_3dp(single.value(0, 0, DelayMeasure::Mean)), "1.414");
    assert_eq!(
        format_3dp(single.value(0, 0, DelayMeasure::Maximum)),
        "0.707"
    );
    let csv = single.render(DelayMeasure::Mean, TableFormat::Csv);
    assert_eq!(csv, "K,m_uni\n2,1.414\n");
}

#[test]
fn half_up_rounding() {
    assert_eq!(format_3dp(1.0005), "1.001");
    assert_eq!(format_3dp(2.0), "2.000");
    assert_eq!(format_3dp(1.15470), "1.155");
}

#[test]
fn step_delay_single_stage() {
    let spec = DiscreteCascadeSpec::from_mu(vec![1.0]).unwrap();
    assert_eq!(step_response_delay(&spec, 100).unwrap(), 0.0);
}

/// Oracle: the cascade of equal geometric stages has a negative binomial
/// impulse response, whose mode is floor((K-1) mu).
#[test]
fn step_delay_uniform_matches_negative_binomial_mode() {
    let spec = build_cascade(&ScaleDistribution::uniform(7, 400.0).unwrap()).unwrap();
    let mode = (6.0 * spec.mu()[0]).floor();
    let delay = step_response_delay(&spec, 2000).unwrap();
    assert!((delay - mode).abs() < 1.0, "{delay} vs mode {mode}");
    assert!((delay - 41.960).abs() < 1e-2);
}

#[test]
fn step_delay_log_is_faster() {
    let uni = build_cascade(&ScaleDistribution::uniform(7, 400.0).unwrap()).unwrap();
    let log = build_cascade(&ScaleDistribution::logarithmic(7, 2.0, 400.0).unwrap()).unwrap();
    let d_log = step_response_delay(&log, 2000).unwrap();
    assert!((d_log - 19.087).abs() < 1e-2, "{d_log}");
    assert!(d_log < step_response_delay(&uni, 2000).unwrap());
}

#[test]
fn step_delay_approaches_continuous_in_relative_terms() {
    // The gap to the continuous maximum stays bounded in samples, so the
    // relative gap shrinks as tau grows.
    let mut prev = f64::INFINITY;
    for tau in [100.0, 1600.0, 25600.0] {
        let spec = build_cascade(&ScaleDistribution::uniform(7, tau).unwrap()).unwrap();
        let cont = tmax_uniform(7, tau).unwrap();
        let rel = (step_response_delay(&spec, 40 * cont as usize).unwrap() - cont).abs() / cont;
        assert!(rel < prev);
        prev = rel;
    }
}

#[test]
fn step_delay_needs_room() {
    let spec = build_cascade(&ScaleDistribution::uniform(7, 400.0).unwrap()).unwrap();
    assert!(matches!(
        step_response_delay(&spec, 20),
        Err(Error::NoMaximumFound { .. })
    ));
}
