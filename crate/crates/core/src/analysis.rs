//! Parameter sweeps, φ scans, time-evolution scans and comparison reports.

use rayon::prelude::*;

use crate::error::{QetError, Result};
use crate::mitigation::{MitigationMethod, ReadoutNoise};
use crate::model::{
    analytic_e1_at, angles, build_hamiltonians, free_evolution_h1, rho_measured, rho_qet,
    rho_qet_at, ModelParams,
};
use crate::protocol::{
    analytic_value, run_mitigated, run_quantity, EstimationResult, ProtocolMode, Quantity,
};
use crate::rng::derive_seed;
use crate::sim::{evolve, expectation};

/// Rectangular `(h, k)` grid. Cells are ordered h-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    h: Vec<f64>,
    k: Vec<f64>,
}

impl SweepGrid {
    pub fn new(h: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        if h.is_empty() || k.is_empty() {
            return Err(QetError::InvalidGrid("grid axes must be nonempty".into()));
        }
        if let Some(bad) = h.iter().chain(&k).find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(QetError::InvalidGrid(format!(
                "grid value {bad} is not a positive real"
            )));
        }
        Ok(Self { h, k })
    }

    /// `n_h × n_k` evenly spaced points, both ends included.
    pub fn linspace(
        h_range: (f64, f64),
        n_h: usize,
        k_range: (f64, f64),
        n_k: usize,
    ) -> Result<Self> {
        Self::new(linspace(h_range, n_h), linspace(k_range, n_k))
    }

    /// 50×50 over `[0.05, 2]` on both axes.
    pub fn default_heatmap() -> Self {
        Self::linspace((0.05, 2.0), 50, (0.05, 2.0), 50).expect("default grid is valid")
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.h.len() * self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.h
            .iter()
            .flat_map(move |&h| self.k.iter().map(move |&k| (h, k)))
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive; `n = 1` gives `[lo]`.
pub fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapCell {
    pub h: f64,
    pub k: f64,
    pub v: f64,
    pub h1: f64,
}

/// Exact `<V>` and `<H1>` under `ρ_QET` for every grid cell, in cell order.
pub fn heatmap(grid: &SweepGrid) -> Result<Vec<HeatmapCell>> {
    let cells: Vec<(f64, f64)> = grid.cells().collect();
    cells
        .par_iter()
        .map(|&(h, k)| {
            let params = ModelParams::new(h, k)?;
            let hs = build_hamiltonians(&params);
            let rho = rho_qet(&params);
            Ok(HeatmapCell {
                h,
                k,
                v: expectation(&rho, &hs.v)?,
                h1: expectation(&rho, &hs.h1)?,
            })
        })
        .collect()
}

pub const PHI_SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiScan {
    /// Vertex of the parabola through the best grid point and its neighbours.
    pub best_phi: f64,
    /// `<E1>` evaluated at `best_phi`.
    pub min_e1: f64,
    /// Best grid point before refinement.
    pub grid_phi: f64,
    pub grid_min_e1: f64,
    /// Spacing of the φ grid.
    pub resolution: f64,
    /// `best_phi` minus the closed-form optimal angle.
    pub offset: f64,
}

/// Grid search of `Tr[ρ_QET(φ) (H1 + V)]` over `points` values of φ in
/// `[0, π/2)`, followed by one parabolic refinement step.
pub fn phi_scan(params: &ModelParams, points: usize) -> Result<PhiScan> {
    if points < 3 {
        return Err(QetError::InvalidGrid(
            "phi scan needs at least three points".into(),
        ));
    }
    let resolution = std::f64::consts::FRAC_PI_2 / points as f64;
    let bob = build_hamiltonians(params).bob_energy();
    let e1 = |phi: f64| expectation(&rho_qet_at(params, phi), &bob);
    let mut grid = (0, f64::INFINITY);
    for i in 0..points {
        let value = e1(i as f64 * resolution)?;
        if value < grid.1 {
            grid = (i, value);
        }
    }
    let grid_phi = grid.0 as f64 * resolution;
    let (left, right) = (e1(grid_phi - resolution)?, e1(grid_phi + resolution)?);
    let curvature = left - 2.0 * grid.1 + right;
    let mut best = (grid_phi, grid.1);
    if curvature > 0.0 {
        let phi = grid_phi + 0.5 * resolution * (left - right) / curvature;
        let value = e1(phi)?;
        if value < best.1 {
            best = (phi, value);
        }
    }
    Ok(PhiScan {
        best_phi: best.0,
        min_e1: best.1,
        grid_phi,
        grid_min_e1: grid.1,
        resolution,
        offset: best.0 - angles(params).phi,
    })
}

/// Closed-form `<E1(φ)>` on the same grid as [`phi_scan`]; cheaper and used as
/// a cross-check.
pub fn phi_scan_closed_form(params: &ModelParams, points: usize) -> Vec<(f64, f64)> {
    let resolution = std::f64::consts::FRAC_PI_2 / points as f64;
    (0..points)
        .map(|i| {
            let phi = i as f64 * resolution;
            (phi, analytic_e1_at(params, phi))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionRow {
    pub t: f64,
    pub h1_numeric: f64,
    pub h1_closed: f64,
    pub v_numeric: f64,
}

impl EvolutionRow {
    pub fn deviation(&self) -> f64 {
        (self.h1_numeric - self.h1_closed)
            .abs()
            .max(self.v_numeric.abs())
    }
}

/// Evolves `ρ_M` under the full Hamiltonian on `steps` evenly spaced times in
/// `[0, t_max]`.
pub fn evolution_scan(params: &ModelParams, t_max: f64, steps: usize) -> Result<Vec<EvolutionRow>> {
    if steps == 0 || !t_max.is_finite() || t_max < 0.0 {
        return Err(QetError::InvalidGrid(format!(
            "invalid time grid: t_max={t_max}, steps={steps}"
        )));
    }
    let hs = build_hamiltonians(params);
    let rho = rho_measured(params);
    linspace((0.0, t_max), steps)
        .into_iter()
        .map(|t| {
            let rho_t = evolve(&rho, &hs.htot, t)?;
            Ok(EvolutionRow {
                t,
                h1_numeric: expectation(&rho_t, &hs.h1)?,
                h1_closed: free_evolution_h1(params, t),
                v_numeric: expectation(&rho_t, &hs.v)?,
            })
        })
        .collect()
}

/// One estimate column of a comparison row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl From<&EstimationResult> for Estimate {
    fn from(r: &EstimationResult) -> Self {
        Self {
            mean: r.mean,
            std_error: r.std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub params: ModelParams,
    pub quantity: Quantity,
    pub analytic: f64,
    pub noiseless: Estimate,
    pub unmitigated: Estimate,
    pub mitigated: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub shots: u64,
    pub seed: u64,
    pub mode: ProtocolMode,
    pub noise: ReadoutNoise,
    /// `None` reports the raw noisy estimate in the mitigated column.
    pub mitigation: Option<MitigationMethod>,
    pub calibration_shots: u64,
}

impl ReportConfig {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            mode: ProtocolMode::Conditional,
            noise: ReadoutNoise::lima_like(),
            mitigation: Some(MitigationMethod::LeastSquares),
            calibration_shots: shots,
        }
    }
}

/// Analytic, noiseless, noisy and mitigated values of `E0, H1, V, E1` for
/// every parameter pair.
///
/// Each pair gets its own seed derived from the base seed and its position.
/// The noiseless and noisy runs of a pair share shot seeds, so they differ
/// only by readout noise.
pub fn comparison_report(
    pairs: &[ModelParams],
    config: &ReportConfig,
) -> Result<Vec<ComparisonRow>> {
    if config.shots == 0 {
        return Err(QetError::ZeroShots);
    }
    let per_pair: Vec<Result<Vec<ComparisonRow>>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, params)| {
            let seed = derive_seed(config.seed, i as u64);
            Quantity::ALL
                .iter()
                .map(|&quantity| comparison_row(params, quantity, seed, config))
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(pairs.len() * Quantity::ALL.len());
    for r in per_pair {
        rows.extend(r?);
    }
    Ok(rows)
}

fn comparison_row(
    params: &ModelParams,
    quantity: Quantity,
    seed: u64,
    config: &ReportConfig,
) -> Result<ComparisonRow> {
    // Distinct quantities use distinct shot streams.
    let seed = derive_seed(seed, quantity as u64);
    let noiseless = run_quantity(params, quantity, config.mode, config.shots, seed, None)?;
    let (unmitigated, mitigated) = match config.mitigation {
        Some(method) => {
            let m = run_mitigated(
                params,
                quantity,
                config.mode,
                config.shots,
                seed,
                &config.noise,
                method,
                config.calibration_shots,
            )?;
            ((&m.unmitigated).into(), (&m.mitigated).into())
        }
        None => {
            let raw: Estimate = (&run_quantity(
                params,
                quantity,
                config.mode,
                config.shots,
                seed,
                Some(&config.noise),
            )?)
                .into();
            (raw, raw)
        }
    };
    Ok(ComparisonRow {
        params: *params,
        quantity,
        analytic: analytic_value(params, quantity),
        noiseless: (&noiseless).into(),
        unmitigated,
        mitigated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{analytic_e1, REFERENCE_PAIRS};

    fn p(h: f64, k: f64) -> ModelParams {
        ModelParams::new(h, k).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SweepGrid::new(vec![], vec![1.0]).is_err());
        assert!(SweepGrid::new(vec![1.0], vec![0.0]).is_err());
        assert!(SweepGrid::new(vec![f64::NAN], vec![1.0]).is_err());
        let g = SweepGrid::new(vec![1.0, 2.0], vec![0.5, 1.0, 1.5]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.cells().nth(1), Some((1.0, 1.0)));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace((0.05, 2.0), 50);
        assert_eq!(v.len(), 50);
        assert_eq!(v[0], 0.05);
        assert!((v[49] - 2.0).abs() < 1e-15);
        assert_eq!(linspace((3.0, 4.0), 1), vec![3.0]);
    }

    #[test]
    fn heatmap_reference_cells() {
        let g = SweepGrid::new(vec![1.0], vec![1.0, 0.1]).unwrap();
        let cells = heatmap(&g).unwrap();
        assert!((cells[0].v + 0.3746).abs() < 1e-4 && (cells[0].h1 - 0.2598).abs() < 1e-4);
        assert!((cells[1].v + 0.0193).abs() < 1e-4 && (cells[1].h1 - 0.0144).abs() < 1e-4);
    }

    #[test]
    fn heatmap_preserves_cell_order() {
        let g = SweepGrid::linspace((0.1, 1.0), 7, (0.2, 1.5), 5).unwrap();
        let cells = heatmap(&g).unwrap();
        for (cell, (h, k)) in cells.iter().zip(g.cells()) {
            assert_eq!((cell.h, cell.k), (h, k));
        }
    }

    #[test]
    fn phi_scan_finds_the_protocol_angle() {
        for (h, k) in REFERENCE_PAIRS {
            let params = p(h, k);
            let scan = phi_scan(&params, PHI_SCAN_POINTS).unwrap();
            assert!(
                scan.offset.abs() <= 2.0 * scan.resolution,
                "{params}: {scan:?}"
            );
            assert!((scan.grid_phi - angles(&params).phi).abs() <= scan.resolution);
            assert!(
                scan.min_e1 <= analytic_e1(&params) + 1e-9,
                "{params}: {scan:?}"
            );
        }
    }

    #[test]
    fn phi_zero_extracts_nothing() {
        let params = p(1.0, 0.5);
        let bob = build_hamiltonians(&params).bob_energy();
        let e1 = expectation(&rho_qet_at(&params, 0.0), &bob).unwrap();
        assert!(e1.abs() < 1e-12);
    }

    #[test]
    fn closed_form_scan_matches_matrix_scan() {
        let params = p(1.5, 1.0);
        let bob = build_hamiltonians(&params).bob_energy();
        for (phi, e1) in phi_scan_closed_form(&params, 97) {
            let numeric = expectation(&rho_qet_at(&params, phi), &bob).unwrap();
            assert!((numeric - e1).abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_scan_starts_at_zero_and_peaks() {
        let params = p(1.0, 1.0);
        let rows = evolution_scan(&params, 2.0 * std::f64::consts::PI, 101).unwrap();
        assert_eq!(rows.len(), 101);
        assert!(
            rows[0].t == 0.0 && rows[0].h1_numeric.abs() < 1e-12 && rows[0].v_numeric.abs() < 1e-12
        );
        let peak_t = std::f64::consts::PI / (4.0 * params.k());
        let peak = evolution_scan(&params, peak_t, 2).unwrap()[1];
        assert!((peak.h1_numeric - params.local_shift()).abs() < 1e-9);
        assert!(rows.iter().all(|r| r.deviation() < 1e-9));
    }

    #[test]
    fn evolution_scan_rejects_bad_grids() {
        assert!(evolution_scan(&p(1.0, 1.0), 1.0, 0).is_err());
        assert!(evolution_scan(&p(1.0, 1.0), f64::NAN, 3).is_err());
    }

    #[test]
    fn report_without_noise_collapses_columns() {
        let mut config = ReportConfig::new(2000, 3);
        config.noise = ReadoutNoise::none();
        config.mitigation = None;
        let rows = comparison_report(&[p(1.0, 1.0)], &config).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.noiseless, r.unmitigated);
            assert_eq!(r.unmitigated, r.mitigated);
        }
        let e1 = &rows[3];
        assert!((e1.analytic - analytic_e1(&p(1.0, 1.0))).abs() < 1e-12);
    }

    #[test]
    fn report_is_deterministic() {
        let config = ReportConfig::new(1000, 9);
        let pairs = [p(1.0, 0.2), p(1.0, 1.0)];
        assert_eq!(
            comparison_report(&pairs, &config).unwrap(),
            comparison_report(&pairs, &config).unwrap()
        );
    }
}
