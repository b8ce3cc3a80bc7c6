use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use tcrf::delay_analysis::{render_delay_tables, DelayMeasure, TableFormat};
use tcrf::discrete_spatial::s_from_degrees;
use tcrf::discrete_temporal::{build_cascade, tau_from_seconds, Startup};
use tcrf::engine::{Engine, EngineConfig, FeatureFrame, VelocityAdaptedEngine};
use tcrf::receptive_field::{preset, sample_rf_kernel, ReceptiveFieldSpec, RfKernel};
use tcrf::scale_distribution::ScaleDistribution;
use tcrf::temporal_kernels::KernelCascade;
use tcrf::warp::Interpolation;
use tcrf::{Error, Frame};

use crate::args::{
    DelaysArgs, FilterArgs, Format, InterpArg, KernelsArgs, Measure, RfFormat, RfModelArgs,
    StartupArg,
};
use crate::io::{open_output, write_pgm_preview, write_raw_plane, write_raw_volume, FrameSource};

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidParameter(msg.into()).into()
}

pub fn kernels(args: &KernelsArgs) -> Result<()> {
    if args.samples < 2 {
        return Err(invalid("at least two samples are required"));
    }
    let dist = ScaleDistribution::new(args.cascade.kind(), args.cascade.stages, args.tau)?;
    let kernel = KernelCascade::new(dist.time_constants());
    let t_end = args
        .t_end
        .unwrap_or_else(|| kernel.mean() + 6.0 * kernel.variance().sqrt());
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid(format!(
            "sampling interval end must be positive, got {t_end}"
        )));
    }
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "t,h,h_t,h_tt")?;
    let dt = t_end / (args.samples - 1) as f64;
    for i in 0..args.samples {
        let t = i as f64 * dt;
        writeln!(
            out,
            "{t},{},{},{}",
            kernel.eval(t),
            kernel.derivative(t, 1)?,
            kernel.derivative(t, 2)?
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn delays(args: &DelaysArgs) -> Result<()> {
    let c_list: Vec<f64> = if args.uniform {
        Vec::new()
    } else if args.c.is_empty() {
        vec![std::f64::consts::SQRT_2, 2f64.powf(0.75), 2.0]
    } else {
        args.c.clone()
    };
    let table = render_delay_tables(&args.stages.0, &c_list)?;
    let format = match args.format {
        Format::Text => TableFormat::Text,
        Format::Csv => TableFormat::Csv,
    };
    let mut out = open_output(None)?;
    let both = args.measure == Measure::Both;
    if args.measure != Measure::Max {
        if both && matches!(format, TableFormat::Text) {
            writeln!(out, "# mean delay")?;
        }
        write!(out, "{}", table.render(DelayMeasure::Mean, format))?;
    }
    if both {
        writeln!(out)?;
    }
    if args.measure != Measure::Mean {
        if both && matches!(format, TableFormat::Text) {
            writeln!(out, "# position of the maximum")?;
        }
        write!(out, "{}", table.render(DelayMeasure::Maximum, format))?;
    }
    out.flush()?;
    Ok(())
}

fn parse_scales(text: &str, stages: usize) -> Result<Vec<usize>> {
    match text.trim() {
        "top" => Ok(vec![stages - 1]),
        "all" => Ok((0..stages).collect()),
        list => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| invalid(format!("cannot read scale index '{s}'")))
            })
            .collect(),
    }
}

enum Pipeline {
    Plain(Engine),
    Adapted(VelocityAdaptedEngine),
}

impl Pipeline {
    fn process(&mut self, frame: &Frame) -> tcrf::Result<Vec<FeatureFrame>> {
        match self {
            Pipeline::Plain(e) => e.process_frame(frame),
            Pipeline::Adapted(e) => e.process_frame(frame),
        }
    }
}

pub fn filter(args: &FilterArgs) -> Result<()> {
    let tau = match (args.tau, args.sigma_t) {
        (Some(tau), None) => tau,
        (None, Some(sigma_t)) => tau_from_seconds(sigma_t, args.frame_rate)?,
        _ => return Err(invalid("exactly one of --tau or --sigma-t is required")),
    };
    let s = match (args.s, args.sigma_x) {
        (Some(s), None) => s,
        (None, Some(sigma_x)) => s_from_degrees(sigma_x, args.ppd)?,
        _ => return Err(invalid("exactly one of --s or --sigma-x is required")),
    };
    let dist = ScaleDistribution::new(args.cascade.kind(), args.cascade.stages, tau)?;
    let cascade = build_cascade(&dist)?;
    let config = EngineConfig::new(s, cascade)
        .with_eps(args.eps)
        .with_ops(args.ops.clone())
        .with_scales(parse_scales(&args.scales, args.cascade.stages)?)
        .with_startup(match args.startup {
            StartupArg::Zero => Startup::Zero,
            StartupArg::FirstFrame => Startup::FirstFrame,
        });
    let mut pipeline = match args.velocity {
        None => Pipeline::Plain(Engine::new(config)?),
        Some(v) => {
            let method = match args.interp {
                InterpArg::Linear => Interpolation::Linear,
                InterpArg::Cubic => Interpolation::Cubic,
            };
            Pipeline::Adapted(VelocityAdaptedEngine::new(config, v, method)?)
        }
    };

    let source = FrameSource::open(&args.input)?;
    fs::create_dir_all(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    let manifest_path = args.output.join("manifest.tsv");
    let mut manifest = BufWriter::new(
        fs::File::create(&manifest_path)
            .with_context(|| format!("creating {}", manifest_path.display()))?,
    );
    for (index, frame) in source.enumerate() {
        let frame = frame.with_context(|| format!("frame {index}"))?;
        let features = pipeline
            .process(&frame)
            .with_context(|| format!("frame {index}"))?;
        for feature in &features {
            for fm in &feature.maps {
                let stem = format!(
                    "f{:05}_k{}_{}",
                    feature.frame_index, feature.scale_index, fm.op
                );
                let name = format!("{stem}.f32");
                write_plane(&args.output.join(&name), &fm.map)?;
                if args.preview {
                    write_pgm_preview(&args.output.join(format!("{stem}.pgm")), &fm.map)?;
                }
                let (lo, hi) = fm.map.min_max();
                writeln!(
                    manifest,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    feature.frame_index, feature.tau, fm.op, lo as f32, hi as f32, name
                )?;
            }
        }
    }
    manifest.flush()?;
    Ok(())
}

fn write_plane(path: &Path, frame: &Frame) -> Result<()> {
    let mut out = BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    write_raw_plane(&mut out, frame)?;
    out.flush()?;
    Ok(())
}

fn rf_spec(args: &RfModelArgs) -> Result<(ReceptiveFieldSpec, f64)> {
    let (mut spec, sign) = match &args.preset {
        Some(name) => {
            let p = preset(name)?;
            (p.spec, p.sign)
        }
        None => {
            let op = tcrf::engine::DerivativeOp::new(args.alpha, args.alpha2, args.beta)?;
            (
                ReceptiveFieldSpec::new(op, args.sigma_x, args.sigma_t)
                    .with_velocity(args.v, args.v2),
                1.0,
            )
        }
    };
    spec.distribution = args.cascade.kind();
    spec.stages = args.cascade.stages;
    spec.pixels_per_degree = args.ppd;
    spec.frame_rate = args.frame_rate;
    spec.validate()?;
    Ok((spec, sign))
}

pub fn rf_model(args: &RfModelArgs) -> Result<()> {
    let (spec, sign) = rf_spec(args)?;
    let (default_half, default_frames) = spec.default_extent()?;
    let kernel = sample_rf_kernel(
        &spec,
        args.half_width.unwrap_or(default_half),
        args.frames.unwrap_or(default_frames),
    )?;
    let kernel = RfKernel {
        half_width: kernel.half_width,
        volume: kernel
            .volume
            .into_iter()
            .map(|f| f.map(|v| sign * v))
            .collect(),
    };
    match args.format {
        RfFormat::Raw => {
            let path = args
                .out
                .as_deref()
                .ok_or_else(|| invalid("raw output requires --out"))?;
            write_raw_volume(path, &kernel.volume)?;
        }
        RfFormat::Csv => {
            let xt = kernel.xt_map();
            let r = kernel.half_width as isize;
            let mut out = open_output(args.out.as_deref())?;
            let header: Vec<String> = (-r..=r).map(|x| x.to_string()).collect();
            writeln!(out, "t,{}", header.join(","))?;
            for (t, row) in xt.rows().enumerate() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{t},{}", cells.join(","))?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
