use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::Serialize;

use qet_core::analysis::{comparison_report, evolution_scan, heatmap, ReportConfig};
use qet_core::model::REFERENCE_PAIRS;
use qet_core::protocol::{analytic_value, run_mitigated, run_quantity, EstimationResult};
use qet_core::sim::{bitstring, Counts};
use qet_core::{CalibrationMatrix, ModelParams, QetError};

use crate::config::{ConfigError, Format, Mitigation, Pairs, Resolved};
use crate::output::{fmt6, to_json, Csv, Num, SCHEMA_VERSION};

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<QetError> for Failure {
    fn from(e: QetError) -> Self {
        match e {
            QetError::InvalidParams { .. }
            | QetError::ZeroShots
            | QetError::InvalidGrid(_)
            | QetError::UnknownPreset(_)
            | QetError::InvalidProbability { .. } => Failure::Config(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

#[derive(Serialize)]
struct EstimateJson {
    mean: Num,
    std_error: Num,
}

impl From<&EstimationResult> for EstimateJson {
    fn from(r: &EstimationResult) -> Self {
        Self {
            mean: Num(r.mean),
            std_error: Num(r.std_error),
        }
    }
}

fn counts_json(counts: &[Counts]) -> Vec<BTreeMap<String, u64>> {
    counts
        .iter()
        .map(|c| (0..4).map(|i| (bitstring(i), c.as_array()[i])).collect())
        .collect()
}

#[derive(Serialize)]
struct RunJson {
    schema_version: u32,
    command: &'static str,
    h: Num,
    k: Num,
    target: &'static str,
    mode: &'static str,
    shots: u64,
    seed: u64,
    noise: String,
    mitigation: &'static str,
    analytic: Num,
    estimate: EstimateJson,
    deviation_sigma: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    unmitigated: Option<EstimateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration_fidelity: Option<Num>,
    counts: Vec<BTreeMap<String, u64>>,
}

pub fn run(opts: &Resolved) -> Outcome {
    let params = opts.params()?;
    let quantity = opts.target()?;
    let mode = opts.mode()?;
    let shots = opts.shots()?;
    let seed = opts.seed()?;
    let noise = opts.noise("none")?;
    let mitigation = opts.mitigation(Mitigation(None))?;
    let calibration_shots = opts.calibration_shots(shots)?;
    let analytic = analytic_value(&params, quantity);

    let noisy = (!noise.noise.is_noiseless()).then_some(&noise.noise);
    let (estimate, unmitigated, fidelity) = match (mitigation.0, noisy) {
        (Some(method), Some(n)) => {
            let m = run_mitigated(
                &params,
                quantity,
                mode,
                shots,
                seed,
                n,
                method,
                calibration_shots,
            )?;
            let fidelity = m.calibration.fidelity();
            (m.mitigated, Some(m.unmitigated), Some(fidelity))
        }
        _ => (
            run_quantity(&params, quantity, mode, shots, seed, noisy)?,
            None,
            None,
        ),
    };
    Ok(to_json(&RunJson {
        schema_version: SCHEMA_VERSION,
        command: "run",
        h: Num(params.h()),
        k: Num(params.k()),
        target: quantity.as_str(),
        mode: mode.as_str(),
        shots,
        seed,
        noise: noise.label,
        mitigation: mitigation.as_str(),
        analytic: Num(analytic),
        estimate: (&estimate).into(),
        deviation_sigma: Num(estimate.deviation_sigma(analytic)),
        unmitigated: unmitigated.as_ref().map(Into::into),
        calibration_fidelity: fidelity.map(Num),
        counts: counts_json(&estimate.raw_counts),
    }))
}

pub fn sweep(opts: &Resolved) -> Outcome {
    let grid = opts.grid()?;
    let mut csv = Csv::new(&["h", "k", "V", "H1"]);
    for cell in heatmap(&grid)? {
        csv.row([cell.h, cell.k, cell.v, cell.h1].map(fmt6));
    }
    Ok(csv.finish())
}

pub fn evolve(opts: &Resolved) -> Outcome {
    let params = opts.params()?;
    let t_max = opts.get_or("t-max", TAU / params.k())?;
    let steps = opts.get_or("t-steps", 101usize)?;
    let mut csv = Csv::new(&["t", "H1_numeric", "H1_closed_form", "V_numeric"]);
    for row in evolution_scan(&params, t_max, steps)? {
        csv.row([row.t, row.h1_numeric, row.h1_closed, row.v_numeric].map(fmt6));
    }
    Ok(csv.finish())
}

#[derive(Serialize)]
struct ReportRowJson {
    h: Num,
    k: Num,
    quantity: &'static str,
    analytic: Num,
    noiseless: EstimateJson,
    unmitigated: EstimateJson,
    mitigated: EstimateJson,
}

#[derive(Serialize)]
struct ReportJson {
    schema_version: u32,
    command: &'static str,
    mode: &'static str,
    shots: u64,
    calibration_shots: u64,
    seed: u64,
    noise: String,
    mitigation: &'static str,
    rows: Vec<ReportRowJson>,
}

pub fn report(opts: &Resolved) -> Outcome {
    let pairs = opts
        .get::<Pairs>("pairs")?
        .map_or_else(|| REFERENCE_PAIRS.to_vec(), |p| p.0);
    let params: Vec<ModelParams> = pairs
        .iter()
        .map(|&(h, k)| ModelParams::new(h, k))
        .collect::<Result<_, _>>()?;
    let shots = opts.shots()?;
    let noise = opts.noise("lima-like")?;
    let mitigation = opts.mitigation(Mitigation(Some(Default::default())))?;
    let config = ReportConfig {
        shots,
        seed: opts.seed()?,
        mode: opts.mode()?,
        noise: noise.noise,
        mitigation: mitigation.0,
        calibration_shots: opts.calibration_shots(shots)?,
    };
    let format = opts.format(Format::Csv)?;
    let rows = comparison_report(&params, &config)?;
    match format {
        Format::Json => Ok(to_json(&ReportJson {
            schema_version: SCHEMA_VERSION,
            command: "report",
            mode: config.mode.as_str(),
            shots: config.shots,
            calibration_shots: config.calibration_shots,
            seed: config.seed,
            noise: noise.label,
            mitigation: mitigation.as_str(),
            rows: rows
                .iter()
                .map(|r| ReportRowJson {
                    h: Num(r.params.h()),
                    k: Num(r.params.k()),
                    quantity: r.quantity.as_str(),
                    analytic: Num(r.analytic),
                    noiseless: EstimateJson {
                        mean: Num(r.noiseless.mean),
                        std_error: Num(r.noiseless.std_error),
                    },
                    unmitigated: EstimateJson {
                        mean: Num(r.unmitigated.mean),
                        std_error: Num(r.unmitigated.std_error),
                    },
                    mitigated: EstimateJson {
                        mean: Num(r.mitigated.mean),
                        std_error: Num(r.mitigated.std_error),
                    },
                })
                .collect(),
        })),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "h",
                "k",
                "quantity",
                "analytic",
                "noiseless",
                "noiseless_se",
                "unmitigated",
                "unmitigated_se",
                "mitigated",
                "mitigated_se",
            ]);
            for r in &rows {
                let mut fields = vec![
                    fmt6(r.params.h()),
                    fmt6(r.params.k()),
                    r.quantity.as_str().to_string(),
                ];
                fields.extend(
                    [
                        r.analytic,
                        r.noiseless.mean,
                        r.noiseless.std_error,
                        r.unmitigated.mean,
                        r.unmitigated.std_error,
                        r.mitigated.mean,
                        r.mitigated.std_error,
                    ]
                    .map(fmt6),
                );
                csv.row(fields);
            }
            Ok(csv.finish())
        }
        Format::Text => Err(Failure::Config(
            "report supports --format csv or json".into(),
        )),
    }
}

#[derive(Serialize)]
struct DemoJson {
    schema_version: u32,
    command: &'static str,
    h: Num,
    k: Num,
    target: &'static str,
    shots: u64,
    calibration_shots: u64,
    seed: u64,
    noise: String,
    mitigation: &'static str,
    calibration_matrix: Vec<Vec<Num>>,
    measurement_fidelity: Num,
    condition_number: Num,
    analytic: Num,
    unmitigated: EstimateJson,
    mitigated: EstimateJson,
}

fn matrix_rows(a: &CalibrationMatrix) -> Vec<Vec<Num>> {
    a.to_rows()
        .iter()
        .map(|r| r.iter().copied().map(Num).collect())
        .collect()
}

pub fn mitigate_demo(opts: &Resolved) -> Outcome {
    let params = opts.params()?;
    let quantity = opts.target()?;
    let shots = opts.shots()?;
    let calibration_shots = opts.calibration_shots(shots)?;
    let seed = opts.seed()?;
    let noise = opts.noise("lima-like")?;
    let method = match opts.mitigation(Mitigation(Some(Default::default())))?.0 {
        Some(m) => m,
        None => {
            return Err(Failure::Config(
                "mitigate-demo needs --mitigation direct or least-squares".into(),
            ))
        }
    };
    let m = run_mitigated(
        &params,
        quantity,
        opts.mode()?,
        shots,
        seed,
        &noise.noise,
        method,
        calibration_shots,
    )?;
    let analytic = analytic_value(&params, quantity);
    match opts.format(Format::Text)? {
        Format::Json => Ok(to_json(&DemoJson {
            schema_version: SCHEMA_VERSION,
            command: "mitigate-demo",
            h: Num(params.h()),
            k: Num(params.k()),
            target: quantity.as_str(),
            shots,
            calibration_shots,
            seed,
            noise: noise.label,
            mitigation: method.as_str(),
            calibration_matrix: matrix_rows(&m.calibration),
            measurement_fidelity: Num(m.calibration.fidelity()),
            condition_number: Num(m.calibration.condition_number()),
            analytic: Num(analytic),
            unmitigated: (&m.unmitigated).into(),
            mitigated: (&m.mitigated).into(),
        })),
        Format::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "noise: {}\ncalibration shots per basis state: {calibration_shots}\n",
                noise.label
            ));
            out.push_str("calibration matrix (rows: observed 00,01,10,11; columns: prepared):\n");
            out.push_str(&m.calibration.to_string());
            if !out.ends_with('\n') {
                out.push('\n');
            }
            out.push_str(&format!(
                "measurement fidelity: {}\ncondition number: {}\n",
                fmt6(m.calibration.fidelity()),
                fmt6(m.calibration.condition_number())
            ));
            out.push_str(&format!(
                "{} at {params}, {shots} shots, seed {seed}\n",
                quantity.as_str()
            ));
            out.push_str(&format!("analytic:    {}\n", fmt6(analytic)));
            out.push_str(&format!(
                "unmitigated: {} +- {}\n",
                fmt6(m.unmitigated.mean),
                fmt6(m.unmitigated.std_error)
            ));
            out.push_str(&format!(
                "mitigated:   {} +- {} ({})\n",
                fmt6(m.mitigated.mean),
                fmt6(m.mitigated.std_error),
                method.as_str()
            ));
            Ok(out)
        }
        Format::Csv => Err(Failure::Config(
            "mitigate-demo supports --format text or json".into(),
        )),
    }
}
