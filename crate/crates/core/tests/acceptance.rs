//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use common::{haar_unitary, params};
use qet_core::analysis::{evolution_scan, heatmap, phi_scan, SweepGrid, PHI_SCAN_POINTS};
use qet_core::mitigation::MitigationMethod;
use qet_core::model::{
    analytic_e0, analytic_e1, build_hamiltonians, entropy_report, free_evolution_v, nogo_gap,
    rho_qet, test_grid, REFERENCE_PAIRS, WEAK_COUPLING_PAIR,
};
use qet_core::protocol::{build_circuit, run_mitigated, run_protocol};
use qet_core::rng::{derive_seed, seeded_rng};
use qet_core::sim::{exact_distribution, expectation};
use qet_core::{MeasurementTarget, ModelParams, ProtocolMode, Quantity, ReadoutNoise};

const TABLE_ROUNDING: f64 = 1e-4;
const SIGMA_BAND: f64 = 4.0;
const DIST_TOL: f64 = 1e-12;
const NOGO_TOL: f64 = 1e-10;
const EVOLUTION_TOL: f64 = 1e-9;
const ENTROPY_TOL: f64 = 1e-10;
const SHOTS: u64 = 100_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// `(h, k, E0, H1, V, E1)` reference values, rounded to four decimals.
#[allow(clippy::approx_constant)]
const PUBLISHED: [(f64, f64, f64, f64, f64, f64); 5] = [
    (1.0, 0.2, 0.9806, 0.0521, -0.0701, -0.0180),
    (1.0, 0.5, 0.8944, 0.1873, -0.2598, -0.0726),
    (1.0, 1.0, 0.7071, 0.2598, -0.3746, -0.1147),
    (1.5, 1.0, 1.2481, 0.3480, -0.4905, -0.1425),
    (1.0, 0.1, 0.9950, 0.0144, -0.0193, -0.0049),
];

fn all_pairs() -> Vec<ModelParams> {
    REFERENCE_PAIRS
        .iter()
        .chain(std::iter::once(&WEAK_COUPLING_PAIR))
        .map(|&(h, k)| params(h, k))
        .collect()
}

fn analytic_regression() -> Outcome {
    let mut worst = 0.0f64;
    for (h, k, e0, h1, v, e1) in PUBLISHED {
        let p = params(h, k);
        let hs = build_hamiltonians(&p);
        let rho = rho_qet(&p);
        let computed = [
            analytic_e0(&p),
            expectation(&rho, &hs.h1).unwrap(),
            expectation(&rho, &hs.v).unwrap(),
            analytic_e1(&p),
        ];
        for (c, t) in computed.iter().zip([e0, h1, v, e1]) {
            worst = worst.max((c - t).abs());
        }
    }
    outcome(
        worst <= TABLE_ROUNDING,
        format!("max |computed - table| = {worst:.2e}"),
    )
}

fn sampled_agreement() -> Outcome {
    let settings: Vec<(ModelParams, MeasurementTarget)> = all_pairs()
        .into_iter()
        .flat_map(|p| MeasurementTarget::ALL.map(|t| (p, t)))
        .collect();
    let passes: Vec<usize> = settings
        .par_iter()
        .enumerate()
        .map(|(i, (p, target))| {
            let reference = qet_core::protocol::analytic_value(p, (*target).into());
            (0..20u64)
                .filter(|&s| {
                    let seed = derive_seed(0xA2 + i as u64, s);
                    let est =
                        run_protocol(p, *target, ProtocolMode::Conditional, SHOTS, seed, None)
                            .unwrap();
                    est.deviation_sigma(reference).abs() <= SIGMA_BAND
                })
                .count()
        })
        .collect();
    let worst = passes.iter().min().copied().unwrap_or(0);
    outcome(
        worst >= 19,
        format!("{} settings, worst pass rate {worst}/20", settings.len()),
    )
}

fn mode_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for p in test_grid() {
        for target in MeasurementTarget::ALL {
            let a = exact_distribution(&build_circuit(&p, target, ProtocolMode::Conditional));
            let b = exact_distribution(&build_circuit(&p, target, ProtocolMode::Deferred));
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    outcome(
        worst < DIST_TOL,
        format!("max probability difference {worst:.2e}"),
    )
}

fn nogo_inequality() -> Outcome {
    let mut min_gap = f64::INFINITY;
    for (i, &(h, k)) in REFERENCE_PAIRS.iter().enumerate() {
        let p = params(h, k);
        let mut rng = seeded_rng(0x4E0 + i as u64, 0);
        for _ in 0..1000 {
            min_gap = min_gap.min(nogo_gap(&p, &haar_unitary(&mut rng)));
        }
    }
    outcome(
        min_gap >= -NOGO_TOL,
        format!("min Tr[rho_W Htot] - E0 = {min_gap:.3e}"),
    )
}

fn time_evolution() -> Outcome {
    let mut worst = 0.0f64;
    for (h, k) in [(1.0, 1.0), (1.5, 1.0)] {
        let p = params(h, k);
        for row in evolution_scan(&p, TAU / k, 101).unwrap() {
            worst = worst
                .max((row.h1_numeric - row.h1_closed).abs())
                .max((row.v_numeric - free_evolution_v(&p, row.t)).abs());
        }
    }
    outcome(
        worst < EVOLUTION_TOL,
        format!("max deviation {worst:.2e} over 2x101 points"),
    )
}

fn entropy_bound() -> Outcome {
    let grid = test_grid();
    let min_slack = grid
        .iter()
        .map(|p| entropy_report(p).entropy_slack())
        .fold(f64::INFINITY, f64::min);
    outcome(
        min_slack >= -ENTROPY_TOL,
        format!("{} grid points, min slack {min_slack:.3e}", grid.len()),
    )
}

struct MitigationStats {
    closer: usize,
    negative: usize,
    mean_unmitigated: f64,
    mean_mitigated: f64,
    sem_mitigated: f64,
    analytic: f64,
}

/// 100 seeded noisy `V` runs per reference pair with least-squares mitigation.
fn mitigation_experiment() -> Vec<(ModelParams, MitigationStats)> {
    let noise = ReadoutNoise::lima_like();
    REFERENCE_PAIRS
        .iter()
        .enumerate()
        .map(|(i, &(h, k))| {
            let p = params(h, k);
            let analytic = qet_core::protocol::analytic_value(&p, Quantity::V);
            let runs: Vec<(f64, f64)> = (0..100u64)
                .into_par_iter()
                .map(|s| {
                    let seed = derive_seed(0x7000 + i as u64, s);
                    let m = run_mitigated(
                        &p,
                        Quantity::V,
                        ProtocolMode::Conditional,
                        SHOTS,
                        seed,
                        &noise,
                        MitigationMethod::LeastSquares,
                        SHOTS,
                    )
                    .unwrap();
                    (m.unmitigated.mean, m.mitigated.mean)
                })
                .collect();
            let n = runs.len() as f64;
            let mean_unmitigated = runs.iter().map(|r| r.0).sum::<f64>() / n;
            let mean_mitigated = runs.iter().map(|r| r.1).sum::<f64>() / n;
            let var = runs
                .iter()
                .map(|r| (r.1 - mean_mitigated).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            let stats = MitigationStats {
                closer: runs
                    .iter()
                    .filter(|r| (r.1 - analytic).abs() < (r.0 - analytic).abs())
                    .count(),
                negative: runs.iter().filter(|r| r.1 < 0.0).count(),
                mean_unmitigated,
                mean_mitigated,
                sem_mitigated: (var / n).sqrt(),
                analytic,
            };
            (p, stats)
        })
        .collect()
}

fn mitigation_efficacy(data: &[(ModelParams, MitigationStats)]) -> Outcome {
    let passed = data.iter().all(|(_, s)| s.closer >= 95 && s.negative >= 99);
    let detail = data
        .iter()
        .map(|(p, s)| format!("{p}: closer {}/100, negative {}/100", s.closer, s.negative))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(passed, detail)
}

fn noise_ordering(data: &[(ModelParams, MitigationStats)]) -> Outcome {
    let passed = data.iter().all(|(_, s)| {
        s.mean_unmitigated.abs() < s.mean_mitigated.abs()
            && s.mean_mitigated.abs() <= s.analytic.abs() + 3.0 * s.sem_mitigated
    });
    let detail = data
        .iter()
        .map(|(p, s)| {
            format!(
                "{p}: |{:.4}| < |{:.4}| <= |{:.4}|",
                s.mean_unmitigated, s.mean_mitigated, s.analytic
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(passed, detail)
}

fn sign_structure() -> Outcome {
    let cells = heatmap(&SweepGrid::default_heatmap()).unwrap();
    let bad = cells.iter().filter(|c| !(c.v < 0.0 && c.h1 > 0.0)).count();
    outcome(
        bad == 0,
        format!("{} cells, {bad} with wrong sign", cells.len()),
    )
}

fn phi_optimality() -> Outcome {
    let mut worst = 0.0f64;
    let mut resolution = 0.0;
    for (h, k) in REFERENCE_PAIRS {
        let p = params(h, k);
        let scan = phi_scan(&p, PHI_SCAN_POINTS).unwrap();
        let phi = qet_core::model::angles(&p).phi;
        worst = worst.max((scan.grid_phi - phi).abs());
        resolution = scan.resolution;
    }
    outcome(
        worst <= 2.0 * resolution,
        format!("max |grid argmin - phi| = {worst:.2e} (resolution {resolution:.2e})"),
    )
}

fn report(id: u32, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut result = run();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            result.passed = false;
            result.detail.push_str(&format!("; exceeded {limit:?}"));
        }
    }
    let tag = if result.passed { "PASS" } else { "FAIL" };
    println!(
        "[{tag}] {id:>2} {name}: {} ({:.2?})",
        result.detail, elapsed
    );
    result.passed
}

fn main() {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= report(1, "analytic regression", Some(secs(1)), analytic_regression);
    ok &= report(
        2,
        "sampled estimator agreement",
        Some(secs(30)),
        sampled_agreement,
    );
    ok &= report(3, "mode equivalence", None, mode_equivalence);
    ok &= report(4, "no-go inequality", None, nogo_inequality);
    ok &= report(5, "time evolution", None, time_evolution);
    ok &= report(6, "entropy bound", None, entropy_bound);

    let mut data = Vec::new();
    ok &= report(7, "mitigation efficacy", Some(secs(300)), || {
        data = mitigation_experiment();
        mitigation_efficacy(&data)
    });
    ok &= report(8, "synthetic-noise ordering", None, || {
        noise_ordering(&data)
    });

    ok &= report(9, "heat-map sign structure", Some(secs(10)), sign_structure);
    ok &= report(10, "phi optimality", None, phi_optimality);
    if !ok {
        std::process::exit(1);
    }
}
