use num_complex::Complex64;
use tcrf::scale_distribution::{log_time_constants, uniform_time_constants, TimeConstants};
use tcrf::temporal_kernels::*;
use tcrf::Error;

fn tc(mu: &[f64]) -> TimeConstants {
    TimeConstants::new(mu.to_vec()).unwrap()
}

/// Brute-force oracle: trapezoidal convolution of sampled truncated
/// exponentials on a uniform grid.
fn convolution_oracle(mu: &[f64], dt: f64, t_end: f64) -> Vec<f64> {
    let n = (t_end / dt).ceil() as usize + 1;
    let sample =
        |m: f64| -> Vec<f64> { (0..n).map(|i| (-(i as f64) * dt / m).exp() / m).collect() };
    let mut acc = sample(mu[0]);
    for &m in &mu[1..] {
        let g = sample(m);
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate().skip(1) {
            let mut s = 0.0;
            for j in 0..=i {
                s += acc[j] * g[i - j];
            }
            s -= 0.5 * (acc[0] * g[i] + acc[i] * g[0]);
            *o = s * dt;
        }
        acc = out;
    }
    acc
}

#[test]
fn trunc_exp_examples() {
    assert_eq!(eval_trunc_exp(-1.0, 1.0).unwrap(), 0.0);
    assert_eq!(eval_trunc_exp(0.0, 2.0).unwrap(), 0.5);
    assert!((eval_trunc_exp(1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
    assert!(eval_trunc_exp(1.0, 0.0).is_err());
    assert!(eval_trunc_exp(1.0, -2.0).is_err());
}

#[test]
fn laplace_examples() {
    let zero = Complex64::new(0.0, 0.0);
    assert_eq!(
        laplace_cascade(zero, &[0.3, 1.7, 4.0]).unwrap(),
        Complex64::new(1.0, 0.0)
    );
    let one = Complex64::new(1.0, 0.0);
    assert!((laplace_cascade(one, &[1.0]).unwrap().re - 0.5).abs() < 1e-15);
    assert!((laplace_cascade(one, &[1.0, 2.0]).unwrap().re - 1.0 / 6.0).abs() < 1e-15);
    let pole = Complex64::new(-0.5, 0.0);
    assert!(matches!(
        laplace_cascade(pole, &[1.0, 2.0]),
        Err(Error::PoleEvaluation { stage: 1, .. })
    ));
}

#[test]
fn mean_variance_examples() {
    assert_eq!(cascade_mean_variance(&[1.0, 2.0]).unwrap(), (3.0, 5.0));
    assert_eq!(cascade_mean_variance(&[0.5; 4]).unwrap(), (2.0, 1.0));
    let mu = log_time_constants(2, 2f64.sqrt(), 1.0).unwrap();
    let (m, v) = cascade_mean_variance(&mu).unwrap();
    assert!((m - std::f64::consts::SQRT_2).abs() < 1e-5);
    assert!((v - 1.0).abs() < 1e-12);
    assert!(cascade_mean_variance(&[]).is_err());
}

#[test]
fn classification() {
    assert_eq!(classify(&[0.5; 4]), CascadeClass::AllEqual);
    assert_eq!(classify(&[0.5, 0.866]), CascadeClass::AllDistinct);
    let sqrt2 = log_time_constants(5, 2f64.sqrt(), 1.0).unwrap();
    assert_eq!(classify(&sqrt2), CascadeClass::Mixed);
    assert_eq!(classify(&[1.0]), CascadeClass::AllEqual);
}

#[test]
fn cascade_examples() {
    let equal = tc(&[1.0, 1.0]);
    assert!((eval_cascade(1.0, &equal) - (-1f64).exp()).abs() < 1e-15);
    assert_eq!(eval_cascade(0.0, &equal), 0.0);
    assert_eq!(eval_cascade(-0.1, &equal), 0.0);

    // Two-pole partial fraction (e^{-t/a} - e^{-t/b}) / (a - b) at t = 0.5.
    let distinct = tc(&[0.5, 0.75f64.sqrt()]);
    let got = eval_cascade(0.5, &distinct);
    assert!((got - 0.528_664_050_710_112_5).abs() < 1e-12, "{got}");
    let oracle = convolution_oracle(&distinct, 5e-4, 0.5);
    assert!((oracle[1000] - got).abs() < 1e-6);
}

#[test]
fn derivative_examples() {
    let equal = tc(&[1.0, 1.0]);
    assert!(eval_cascade_derivative(1.0, &equal, 1).unwrap().abs() < 1e-15);
    let d2 = eval_cascade_derivative(0.25, &equal, 2).unwrap();
    assert!((d2 - (0.25 - 2.0) * (-0.25f64).exp()).abs() < 1e-14);
    assert!((d2 + 1.362_901_370_374_958_6).abs() < 1e-12);

    let mu = uniform_time_constants(7, 1.0).unwrap();
    let t_max = 6.0 * mu[0];
    assert!(eval_cascade_derivative(t_max, &mu, 1).unwrap().abs() < 1e-12);
    assert!(eval_cascade_derivative(0.3, &mu, 3).is_err());
    assert!(eval_cascade_derivative(0.3, &mu, 0).is_err());
}

#[test]
fn partial_fraction_guard() {
    let close = tc(&[1.0, 1.0 + 1e-12]);
    assert!(matches!(
        eval_partial_fractions(0.5, &close),
        Err(Error::NumericInstability { .. })
    ));
    let ok = tc(&[0.5, 0.75f64.sqrt()]);
    assert!((eval_partial_fractions(0.5, &ok).unwrap() - 0.528_664_050_710_112_5).abs() < 1e-12);
}

fn test_cascades() -> Vec<TimeConstants> {
    let mut v = vec![
        tc(&[1.0]),
        tc(&[0.4, 0.9]),
        tc(&[0.3, 0.3, 0.8]),
        tc(&[0.2, 0.5, 0.7, 1.1]),
        uniform_time_constants(4, 1.0).unwrap(),
    ];
    for c in [2f64.sqrt(), 2f64.powf(0.75), 2.0] {
        for k in [2, 3, 4] {
            v.push(log_time_constants(k, c, 1.0).unwrap());
        }
    }
    v
}

#[test]
fn matches_brute_force_convolution() {
    for mu in test_cascades() {
        let sigma = mu.variance().sqrt();
        let dt = sigma / 2000.0;
        let t_end = mu.mean() + 2.0 * sigma;
        let oracle = convolution_oracle(&mu, dt, t_end);
        let kernel = KernelCascade::new(mu.clone());
        for i in (0..oracle.len()).step_by(97) {
            let t = i as f64 * dt;
            let err = (kernel.eval(t) - oracle[i]).abs();
            assert!(err < 1e-5, "mu={:?} t={t} err={err}", mu.as_slice());
        }
    }
}

#[test]
fn routes_agree() {
    // Uniformization is exact for any clustering; compare it with the
    // closed forms where those apply.
    for mu in test_cascades() {
        let kernel = KernelCascade::new(mu.clone());
        for i in 0..60 {
            let t = i as f64 * 0.07;
            for order in 0..=2u8 {
                let a = if order == 0 {
                    kernel.eval(t)
                } else {
                    kernel.derivative(t, order).unwrap()
                };
                let b = eval_uniformized(t, &mu, order).unwrap();
                assert!(
                    (a - b).abs() < 1e-10 * (1.0 + b.abs()),
                    "{:?} t={t} order={order}: {a} vs {b}",
                    mu.as_slice()
                );
            }
        }
    }
}

fn trapezoid(f: impl Fn(f64) -> f64, end: f64, dt: f64) -> f64 {
    let n = (end / dt).round() as usize;
    let mut s = 0.5 * (f(0.0) + f(n as f64 * dt));
    for i in 1..n {
        s += f(i as f64 * dt);
    }
    s * dt
}

#[test]
fn normalization_and_moments() {
    for mu in test_cascades() {
        let kernel = KernelCascade::new(mu.clone());
        let sigma = kernel.variance().sqrt();
        let end = kernel.mean() + 20.0 * sigma;
        let dt = sigma / 1000.0;
        let mass = trapezoid(|t| kernel.eval(t), end, dt);
        assert!((mass - 1.0).abs() < 1e-6, "{:?} mass {mass}", mu.as_slice());
        let mean = trapezoid(|t| t * kernel.eval(t), end, dt);
        let second = trapezoid(|t| t * t * kernel.eval(t), end, dt);
        let var = second - mean * mean;
        assert!((mean - kernel.mean()).abs() < 1e-4 * kernel.mean());
        assert!((var - kernel.variance()).abs() < 1e-4 * kernel.variance());
    }
}

#[test]
fn derivatives_match_finite_differences() {
    for mu in test_cascades() {
        let kernel = KernelCascade::new(mu.clone());
        let h = 1e-5;
        for i in 1..40 {
            let t = i as f64 * 0.1;
            let d1 = kernel.derivative(t, 1).unwrap();
            let fd1 = (kernel.eval(t + h) - kernel.eval(t - h)) / (2.0 * h);
            if d1.abs() > 1e-3 {
                assert!(
                    (d1 - fd1).abs() < 1e-6 * d1.abs(),
                    "{:?} t={t}: {d1} vs {fd1}",
                    mu.as_slice()
                );
            }
            let d2 = kernel.derivative(t, 2).unwrap();
            let fd2 = (kernel.derivative(t + h, 1).unwrap() - kernel.derivative(t - h, 1).unwrap())
                / (2.0 * h);
            if d2.abs() > 1e-3 {
                assert!(
                    (d2 - fd2).abs() < 1e-6 * d2.abs(),
                    "{:?} t={t}: {d2} vs {fd2}",
                    mu.as_slice()
                );
            }
        }
    }
}

#[test]
fn smooth_at_origin() {
    for mu in test_cascades().into_iter().filter(|m| m.len() >= 2) {
        let kernel = KernelCascade::new(mu.clone());
        assert!(kernel.eval(0.0).abs() < 1e-12, "{:?}", mu.as_slice());
        if mu.len() >= 3 {
            let d = kernel.derivative(1e-8, 1).unwrap();
            assert!(d.abs() < 1e-6, "{:?}: {d}", mu.as_slice());
        }
    }
}
