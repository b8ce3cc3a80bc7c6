use rand::{Rng, SeedableRng};
use tcrf::discrete_spatial::DiscreteGaussian1D;
use tcrf::discrete_temporal::build_cascade;
use tcrf::discrete_temporal::{DiscreteCascadeSpec, Startup};
use tcrf::engine::*;
use tcrf::scale_distribution::ScaleDistribution;
use tcrf::warp::{warp_frame, Interpolation};
use tcrf::{Error, Frame};

fn random_frame(rng: &mut impl Rng, w: usize, h: usize) -> Frame {
    Frame::from_fn(w, h, |_, _| rng.gen_range(-1.0..1.0))
}

#[test]
fn op_names_round_trip() {
    for (text, op) in [
        ("L", DerivativeOp::SMOOTH),
        ("L_xt", DerivativeOp::new(1, 0, 1).unwrap()),
        ("xxt", DerivativeOp::new(2, 0, 1).unwrap()),
        ("L_xyytt", DerivativeOp::new(1, 2, 2).unwrap()),
    ] {
        let parsed: DerivativeOp = text.parse().unwrap();
        assert_eq!(parsed, op);
        assert_eq!(parsed.to_string().parse::<DerivativeOp>().unwrap(), op);
    }
    assert!("xxxx".parse::<DerivativeOp>().is_err());
    assert!("ttt".parse::<DerivativeOp>().is_err());
    assert!("q".parse::<DerivativeOp>().is_err());
}

#[test]
fn config_validation() {
    let cascade = DiscreteCascadeSpec::from_mu(vec![1.0, 2.0]).unwrap();
    assert!(Engine::new(EngineConfig::new(1.0, cascade.clone()).with_scales(vec![2])).is_err());
    assert!(Engine::new(EngineConfig::new(1.0, cascade.clone()).with_ops(vec![])).is_err());
    assert!(Engine::new(EngineConfig::new(-1.0, cascade)).is_err());
}

#[test]
fn constant_stream_has_zero_temporal_derivative() {
    let cascade = build_cascade(&ScaleDistribution::uniform(3, 9.0).unwrap()).unwrap();
    let ops = vec![
        DerivativeOp::new(0, 0, 1).unwrap(),
        DerivativeOp::new(1, 0, 2).unwrap(),
    ];
    let config = EngineConfig::new(2.0, cascade)
        .with_ops(ops)
        .with_startup(Startup::FirstFrame);
    let mut engine = Engine::new(config).unwrap();
    let frame = Frame::filled(12, 10, 3.5);
    for i in 0..6 {
        let out = engine.process_frame(&frame).unwrap();
        assert_eq!(out[0].reliable, i >= 2);
        for fm in &out[0].maps {
            assert!(fm.map.as_slice().iter().all(|v| v.abs() < 1e-12));
        }
    }
}

#[test]
fn impulse_halves_each_frame() {
    let cascade = DiscreteCascadeSpec::from_mu(vec![1.0]).unwrap();
    let mut engine = Engine::new(EngineConfig::new(0.0, cascade)).unwrap();
    let mut impulse = Frame::zeros(5, 5);
    impulse.set(2, 2, 1.0);
    let zero = Frame::zeros(5, 5);
    let mut got = Vec::new();
    for t in 0..5 {
        let out = engine
            .process_frame(if t == 0 { &impulse } else { &zero })
            .unwrap();
        got.push(out[0].maps[0].map.get(2, 2));
    }
    assert_eq!(got, vec![0.5, 0.25, 0.125, 0.0625, 0.03125]);
}

#[test]
fn ramp_gradient_is_one() {
    let cascade = DiscreteCascadeSpec::from_mu(vec![1.0, 1.5]).unwrap();
    let config = EngineConfig::new(2.0, cascade)
        .with_ops(vec![DerivativeOp::new(1, 0, 0).unwrap()])
        .with_startup(Startup::FirstFrame);
    let mut engine = Engine::new(config).unwrap();
    let ramp = Frame::from_fn(40, 6, |x, _| x as f64);
    let r = DiscreteGaussian1D::new(2.0, 1e-8).unwrap().radius();
    for _ in 0..5 {
        let out = engine.process_frame(&ramp).unwrap();
        let map = &out[0].maps[0].map;
        for y in 0..6 {
            for x in r + 1..40 - r - 1 {
                assert!((map.get(x, y) - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn shape_must_not_drift() {
    let cascade = DiscreteCascadeSpec::from_mu(vec![1.0]).unwrap();
    let mut engine = Engine::new(EngineConfig::new(1.0, cascade)).unwrap();
    engine.process_frame(&Frame::zeros(8, 8)).unwrap();
    assert!(matches!(
        engine.process_frame(&Frame::zeros(8, 9)),
        Err(Error::ShapeMismatch { .. })
    ));
}

#[test]
fn linearity() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(21);
    let cascade = build_cascade(&ScaleDistribution::logarithmic(4, 2.0, 16.0).unwrap()).unwrap();
    let ops: Vec<DerivativeOp> = ["L", "xt", "yytt", "xxx"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let config = EngineConfig::new(1.5, cascade)
        .with_ops(ops)
        .with_scales(vec![1, 3]);
    let (mut ef, mut eg, mut eh) = (
        Engine::new(config.clone()).unwrap(),
        Engine::new(config.clone()).unwrap(),
        Engine::new(config).unwrap(),
    );
    let (a, b) = (0.7, -1.9);
    for _ in 0..12 {
        let f = random_frame(&mut rng, 16, 12);
        let g = random_frame(&mut rng, 16, 12);
        let combo = Frame::from_vec(
            16,
            12,
            f.as_slice()
                .iter()
                .zip(g.as_slice())
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
        .unwrap();
        let (of, og, oh) = (
            ef.process_frame(&f).unwrap(),
            eg.process_frame(&g).unwrap(),
            eh.process_frame(&combo).unwrap(),
        );
        for ((ff, gg), hh) in of.iter().zip(&og).zip(&oh) {
            for ((mf, mg), mh) in ff.maps.iter().zip(&gg.maps).zip(&hh.maps) {
                for ((x, y), z) in mf
                    .map
                    .as_slice()
                    .iter()
                    .zip(mg.map.as_slice())
                    .zip(mh.map.as_slice())
                {
                    assert!((a * x + b * y - z).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn integer_shift_equivariance() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let cascade = DiscreteCascadeSpec::from_mu(vec![0.8, 2.0]).unwrap();
    let config = EngineConfig::new(1.0, cascade).with_ops(vec!["xt".parse().unwrap()]);
    let (mut e1, mut e2) = (
        Engine::new(config.clone()).unwrap(),
        Engine::new(config).unwrap(),
    );
    let (w, h, shift, pad) = (48, 8, 5, 14);
    for _ in 0..6 {
        // Support kept away from the borders so mirroring never reaches it.
        let base = Frame::from_fn(w, h, |x, _| {
            if (pad..w - pad - shift).contains(&x) {
                rng.gen_range(0.0..1.0)
            } else {
                0.0
            }
        });
        let moved = Frame::from_fn(w, h, |x, y| {
            if x >= shift {
                base.get(x - shift, y)
            } else {
                0.0
            }
        });
        let a = e1.process_frame(&base).unwrap();
        let b = e2.process_frame(&moved).unwrap();
        for y in 0..h {
            for x in 0..w - shift {
                assert!(
                    (a[0].maps[0].map.get(x, y) - b[0].maps[0].map.get(x + shift, y)).abs() < 1e-14
                );
            }
        }
    }
}

#[test]
fn x_derivatives_sum_to_zero() {
    let cascade = DiscreteCascadeSpec::from_mu(vec![1.0, 2.0]).unwrap();
    let ops: Vec<DerivativeOp> = ["x", "xx", "xxt", "xxx"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let mut engine = Engine::new(EngineConfig::new(2.0, cascade).with_ops(ops)).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    for _ in 0..4 {
        let f = Frame::from_fn(60, 3, |x, _| {
            if (20..40).contains(&x) {
                rng.gen_range(0.0..1.0)
            } else {
                0.0
            }
        });
        for fm in &engine.process_frame(&f).unwrap()[0].maps {
            for row in fm.map.rows() {
                assert!(row.iter().sum::<f64>().abs() < 1e-9);
            }
        }
    }
}

#[test]
fn commute_examples() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let cascade = build_cascade(&ScaleDistribution::uniform(3, 4.0).unwrap()).unwrap();
    let frames: Vec<Frame> = (0..32).map(|_| random_frame(&mut rng, 16, 16)).collect();
    assert!(commute_check(&frames, 1.0, 1e-8, &cascade).unwrap() < 1e-10);

    let zeros = vec![Frame::zeros(16, 16); 8];
    assert_eq!(commute_check(&zeros, 1.0, 1e-8, &cascade).unwrap(), 0.0);

    let mut impulse = vec![Frame::zeros(16, 16); 8];
    impulse[0].set(8, 8, 1.0);
    assert!(commute_check(&impulse, 1.0, 1e-8, &cascade).unwrap() < 1e-10);
    assert_eq!(commute_check(&[], 1.0, 1e-8, &cascade).unwrap(), 0.0);
}

#[test]
fn zero_velocity_is_bit_identical() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(17);
    let cascade = build_cascade(&ScaleDistribution::logarithmic(3, 2.0, 9.0).unwrap()).unwrap();
    let config =
        EngineConfig::new(1.0, cascade).with_ops(vec!["L".parse().unwrap(), "xt".parse().unwrap()]);
    let mut plain = Engine::new(config.clone()).unwrap();
    let mut adapted = VelocityAdaptedEngine::new(config, (0.0, 0.0), Interpolation::Cubic).unwrap();
    for _ in 0..10 {
        let f = random_frame(&mut rng, 14, 11);
        assert_eq!(
            plain.process_frame(&f).unwrap(),
            adapted.process_frame(&f).unwrap()
        );
    }
}

#[test]
fn integer_velocity_matches_co_moving_frame() {
    // Impulse moving one pixel per frame: the adapted engine must equal
    // the plain engine on the stationary impulse, shifted by t.
    let cascade = DiscreteCascadeSpec::from_mu(vec![1.0, 1.0]).unwrap();
    let config = EngineConfig::new(1.0, cascade);
    let mut plain = Engine::new(config.clone()).unwrap();
    let mut adapted =
        VelocityAdaptedEngine::new(config, (1.0, 0.0), Interpolation::Linear).unwrap();
    let (w, h, x0) = (64, 9, 16);
    for t in 0..12 {
        let mut moving = Frame::zeros(w, h);
        moving.set(x0 + t, 4, 1.0);
        let mut still = Frame::zeros(w, h);
        still.set(x0, 4, 1.0);
        let a = adapted.process_frame(&moving).unwrap();
        let p = plain.process_frame(&still).unwrap();
        for y in 0..h {
            for x in 0..w - t - 16 {
                let want = p[0].maps[0].map.get(x, y);
                assert_eq!(a[0].maps[0].map.get(x + t, y), want);
            }
        }
    }
}

#[test]
fn translating_stimulus_is_steady_in_moving_frame() {
    let cascade = build_cascade(&ScaleDistribution::uniform(3, 16.0).unwrap()).unwrap();
    let config = EngineConfig::new(2.0, cascade)
        .with_ops(vec!["L".parse().unwrap(), "t".parse().unwrap()])
        .with_startup(Startup::FirstFrame);
    let v = 0.5;
    let (w, h) = (96, 5);
    let blob = |x: f64| (-(x * x) / (2.0 * 36.0)).exp();
    let mut adapted =
        VelocityAdaptedEngine::new(config.clone(), (v, 0.0), Interpolation::Cubic).unwrap();
    let mut plain = Engine::new(config).unwrap();
    for t in 0..20 {
        let centre = 30.0 + v * t as f64;
        let moving = Frame::from_fn(w, h, |x, _| blob(x as f64 - centre));
        let still = Frame::from_fn(w, h, |x, _| blob(x as f64 - 30.0));
        let a = adapted.process_frame(&moving).unwrap();
        let p = plain.process_frame(&still).unwrap();
        let shift = v * t as f64;
        let expected = warp_frame(&p[0].maps[0].map, (-shift, 0.0), Interpolation::Cubic);
        for x in 10..80 {
            assert!((a[0].maps[0].map.get(x, 2) - expected.get(x, 2)).abs() < 1e-3);
            assert!(a[0].maps[1].map.get(x, 2).abs() < 1e-3);
        }
    }
}
