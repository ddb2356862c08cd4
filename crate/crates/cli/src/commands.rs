use std::fs;

use finsler_core::expansion::values;
use finsler_core::fd_pipeline::FdPipeline;
use finsler_core::sampling::sample_points;
use finsler_core::scalar_class::{classify as classify_metric, ClassificationReport};
use finsler_core::verify::verify as verify_metric;
use finsler_core::{Backend, ExpansionOrder, FinslerMetric, LocalExpansion, Result, SamplePoint, Tensor};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{LoadedMetric, RunConfig};
use crate::report::Report;
use crate::{CliError, RunArgs};

/// Relative tolerance of the Euler check applied to DSL metrics.
const HOMOGENEITY_TOL: f64 = 1e-8;

struct Run {
    config: RunConfig,
    metric: LoadedMetric,
}

fn load(args: &RunArgs) -> Result<Run, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(CliError::io(format!("cannot read config `{}`", args.config.display())))?;
    let mut config = RunConfig::parse(&text)?;
    if let Some(out) = &args.out {
        config.output = Some(out.clone());
    }
    if let Some(count) = args.samples {
        config.sampling.count = count;
    }
    if let Some(seed) = args.seed {
        config.sampling.seed = seed;
    }
    if let Some(backend) = args.backend {
        config.backend = Some(backend);
    }
    config.validate()?;
    let metric = config.load_metric()?;
    if let LoadedMetric::Dsl(dsl) = &metric {
        dsl.check_homogeneity(&sample_points(dsl.dimension(), &config.spec())?, HOMOGENEITY_TOL)?;
    }
    Ok(Run { config, metric })
}

fn open_report(config: &RunConfig, command: &str) -> Result<Report, CliError> {
    let mut report = Report::open(config.output.as_deref()).map_err(CliError::io("cannot open report"))?;
    report.header(command, config).map_err(CliError::io("cannot write report"))?;
    Ok(report)
}

#[derive(Debug, Serialize)]
struct TensorDump {
    signature: [usize; 2],
    components: Vec<f64>,
}

impl From<Tensor<f64>> for TensorDump {
    fn from(t: Tensor<f64>) -> Self {
        let s = t.signature();
        TensorDump {
            signature: [s.contra, s.cov],
            components: t.into_components(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SampleDump {
    index: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    l: f64,
    g: TensorDump,
    spray: TensorDump,
    nonlinear: TensorDump,
    berwald: TensorDump,
    rhat: TensorDump,
    deviation: TensorDump,
    k: f64,
    c: TensorDump,
    b: Option<TensorDump>,
    a: Option<TensorDump>,
}

fn dump_jet(metric: &LoadedMetric, index: usize, p: &SamplePoint) -> Result<SampleDump> {
    let exp = LocalExpansion::new(metric, p, ExpansionOrder::VERTICAL)?;
    Ok(SampleDump {
        index,
        x: p.x().to_vec(),
        y: p.y().to_vec(),
        l: exp.l().value(),
        g: values(exp.g()).into(),
        spray: values(exp.spray()?).into(),
        nonlinear: values(exp.nonlinear()?).into(),
        berwald: values(exp.berwald()?).into(),
        rhat: values(exp.vh_torsion()?).into(),
        deviation: values(exp.deviation()?).into(),
        k: exp.scalar_k()?.value(),
        c: values(exp.tensor_c()?).into(),
        b: Some(values(exp.tensor_b()?).into()),
        a: Some(values(exp.tensor_a()?).into()),
    })
}

fn dump_fd(fd: &FdPipeline<&LoadedMetric>, index: usize, p: &SamplePoint) -> Result<SampleDump> {
    let geo = fd.geometry(p)?;
    Ok(SampleDump {
        index,
        x: p.x().to_vec(),
        y: p.y().to_vec(),
        l: geo.l,
        g: geo.g.into(),
        spray: geo.spray.into(),
        nonlinear: geo.nonlinear.into(),
        berwald: geo.berwald.into(),
        rhat: geo.rhat.into(),
        deviation: geo.deviation.into(),
        k: geo.k,
        c: fd.tensor_c(p)?.into(),
        b: None,
        a: None,
    })
}

pub fn tensors(args: &RunArgs) -> Result<u8, CliError> {
    let Run { config, metric } = load(args)?;
    let points = sample_points(metric.dimension(), &config.spec())?;
    let fd = FdPipeline::new(&metric);
    let dumps: Vec<SampleDump> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            match config.backend() {
                Backend::Jet => dump_jet(&metric, i, p),
                Backend::Fd => dump_fd(&fd, i, p),
            }
            .map_err(|e| e.at_sample(i, p))
        })
        .collect::<Result<_>>()?;
    let mut report = open_report(&config, "tensors")?;
    let write = CliError::io("cannot write report");
    (|| {
        for d in &dumps {
            report.record("sample", d)?;
        }
        report.finish()
    })()
    .map_err(write)?;
    Ok(0)
}

pub fn verify(args: &RunArgs) -> Result<u8, CliError> {
    let Run { config, metric } = load(args)?;
    let result = verify_metric(
        &metric,
        &config.metric_name(),
        &config.spec(),
        config.backend(),
        &config.suites(),
        &config.tolerances,
    )?;
    let mut report = open_report(&config, "verify")?;
    (|| {
        for r in &result.records {
            report.record("residual", r)?;
        }
        for s in &result.summary {
            report.record("identity_summary", s)?;
        }
        if let Some(c) = &result.classification {
            report.record("classification", c)?;
        }
        let failed = result.records.iter().filter(|r| !r.pass).count();
        report.record(
            "summary",
            &serde_json::json!({
                "passed": result.passed,
                "records": result.records.len(),
                "failed": failed,
            }),
        )?;
        report.finish()
    })()
    .map_err(CliError::io("cannot write report"))?;
    Ok(if result.passed { 0 } else { 1 })
}

/// Formats to four decimals without a negative zero.
fn four_decimals(v: f64) -> String {
    let s = format!("{v:.4}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn verdict_line(report: &ClassificationReport) -> String {
    use finsler_core::catalog::Verdict;
    let k = four_decimals(report.k_mean);
    match report.verdict {
        Verdict::Scalar => format!("{}: scalar (k={k} nonconstant)", report.metric),
        v => format!("{}: {v} (k={k}±{})", report.metric, four_decimals(report.k_std)),
    }
}

pub fn classify(args: &RunArgs) -> Result<u8, CliError> {
    let Run { config, metric } = load(args)?;
    let tol = config.tolerances.overrides.get("classify").copied().or(config.tolerances.default);
    let result = classify_metric(&metric, &config.metric_name(), &config.spec(), config.backend(), tol)?;
    if config.output.is_some() {
        let mut report = open_report(&config, "classify")?;
        (|| {
            report.record("classification", &result)?;
            report.finish()
        })()
        .map_err(CliError::io("cannot write report"))?;
    }
    println!("{}", verdict_line(&result));
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_decimals_drops_negative_zero() {
        assert_eq!(four_decimals(-0.0), "0.0000");
        assert_eq!(four_decimals(-1e-9), "0.0000");
        assert_eq!(four_decimals(-0.25), "-0.2500");
        assert_eq!(four_decimals(1.03290), "1.0329");
    }
}
