//! Synthetic terminal readout errors and calibration-matrix mitigation.
//!
//! Readout flips are independent per qubit and asymmetric: qubit `q` reports
//! `1` for a true `0` with probability `p(1|0)` and `0` for a true `1` with
//! probability `p(0|1)`. The full response matrix `A[observed][prepared]` is
//! then the Kronecker product of the two single-qubit confusion matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use rand::Rng;

use crate::error::{QetError, Result};
use crate::rng::{seeded_rng, stream};
use crate::sim::{basis_index, run_shots, Circuit, Counts, Distribution, GateStep, ALGEBRA_TOL};

/// Largest condition number accepted by the direct inverse.
pub const MAX_CONDITION_NUMBER: f64 = 1e6;

/// Readout flip probabilities of one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitReadout {
    /// `p(read 1 | true 0)`.
    pub p1_given_0: f64,
    /// `p(read 0 | true 1)`.
    pub p0_given_1: f64,
}

impl QubitReadout {
    pub fn symmetric(p: f64) -> Self {
        Self {
            p1_given_0: p,
            p0_given_1: p,
        }
    }

    fn flip_probability(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.p1_given_0
        } else {
            self.p0_given_1
        }
    }

    /// `[[p(0|0), p(0|1)], [p(1|0), p(1|1)]]`.
    pub fn confusion(&self) -> [[f64; 2]; 2] {
        [
            [1.0 - self.p1_given_0, self.p0_given_1],
            [self.p1_given_0, 1.0 - self.p0_given_1],
        ]
    }
}

/// Independent per-qubit readout channel applied to terminal bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutNoise {
    qubits: [QubitReadout; 2],
}

/// Named presets carrying only the two per-qubit readout assignment errors of
/// the corresponding devices (symmetric flips).
pub const PRESETS: [(&str, f64, f64); 3] = [
    ("lima-like", 1.960e-2, 1.300e-2),
    ("jakarta-like", 2.440e-2, 2.400e-2),
    ("cairo-like", 8.500e-3, 8.000e-3),
];

impl ReadoutNoise {
    pub fn new(q0: QubitReadout, q1: QubitReadout) -> Result<Self> {
        for (name, value) in [
            ("q0 p(1|0)", q0.p1_given_0),
            ("q0 p(0|1)", q0.p0_given_1),
            ("q1 p(1|0)", q1.p1_given_0),
            ("q1 p(0|1)", q1.p0_given_1),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(QetError::InvalidProbability { name, value });
            }
        }
        Ok(Self { qubits: [q0, q1] })
    }

    pub fn none() -> Self {
        Self {
            qubits: [QubitReadout::symmetric(0.0); 2],
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|&(_, p0, p1)| Self {
                qubits: [QubitReadout::symmetric(p0), QubitReadout::symmetric(p1)],
            })
            .ok_or_else(|| QetError::UnknownPreset(name.to_string()))
    }

    pub fn lima_like() -> Self {
        Self::preset("lima-like").expect("built-in preset")
    }

    pub fn qubit(&self, q: usize) -> &QubitReadout {
        &self.qubits[q]
    }

    pub fn is_noiseless(&self) -> bool {
        self.qubits
            .iter()
            .all(|q| q.p1_given_0 == 0.0 && q.p0_given_1 == 0.0)
    }

    /// Exact response matrix of the channel.
    pub fn response_matrix(&self) -> CalibrationMatrix {
        let (a, b) = (self.qubits[0].confusion(), self.qubits[1].confusion());
        let m = Matrix4::from_fn(|obs, prep| a[obs >> 1][prep >> 1] * b[obs & 1][prep & 1]);
        CalibrationMatrix { a: m }
    }

    /// Flips one register value.
    pub fn corrupt<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> usize {
        let mut bits = [((index >> 1) & 1) as u8, (index & 1) as u8];
        for (bit, q) in bits.iter_mut().zip(&self.qubits) {
            let p = q.flip_probability(*bit);
            if p > 0.0 && rng.random::<f64>() < p {
                *bit ^= 1;
            }
        }
        basis_index(bits[0], bits[1])
    }
}

impl fmt::Display for ReadoutNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.qubits;
        write!(
            f,
            "{},{},{},{}",
            a.p1_given_0, a.p0_given_1, b.p1_given_0, b.p0_given_1
        )
    }
}

impl FromStr for ReadoutNoise {
    type Err = QetError;

    /// Accepts a preset name or four comma-separated probabilities
    /// `q0 p(1|0), q0 p(0|1), q1 p(1|0), q1 p(0|1)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(Self::none());
        }
        if let Ok(noise) = Self::preset(s) {
            return Ok(noise);
        }
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| QetError::UnknownPreset(s.to_string()))?;
        match values[..] {
            [a, b, c, d] => Self::new(
                QubitReadout {
                    p1_given_0: a,
                    p0_given_1: b,
                },
                QubitReadout {
                    p1_given_0: c,
                    p0_given_1: d,
                },
            ),
            _ => Err(QetError::UnknownPreset(s.to_string())),
        }
    }
}

/// Pushes every recorded shot through the readout channel.
pub fn apply_noise<R: Rng + ?Sized>(counts: &Counts, noise: &ReadoutNoise, rng: &mut R) -> Counts {
    if noise.is_noiseless() {
        return *counts;
    }
    let mut out = Counts::default();
    for (index, &n) in counts.as_array().iter().enumerate() {
        for _ in 0..n {
            out.record(noise.corrupt(index, rng));
        }
    }
    out
}

/// Exact outcome distribution after the readout channel, `A p`.
pub fn apply_noise_exact(dist: &Distribution, noise: &ReadoutNoise) -> Distribution {
    noise.response_matrix().apply(dist)
}

/// Column-stochastic readout response matrix: `A[observed][prepared]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix {
    a: Matrix4<f64>,
}

impl CalibrationMatrix {
    pub fn new(a: [[f64; 4]; 4]) -> Result<Self> {
        let m = Matrix4::from_fn(|r, c| a[r][c]);
        for (column, col) in m.column_iter().enumerate() {
            if let Some(&value) = col.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(QetError::InvalidProbability {
                    name: "calibration entry",
                    value,
                });
            }
            let sum = col.sum();
            if (sum - 1.0).abs() > ALGEBRA_TOL {
                return Err(QetError::NotColumnStochastic { column, sum });
            }
        }
        Ok(Self { a: m })
    }

    pub fn identity() -> Self {
        Self {
            a: Matrix4::identity(),
        }
    }

    pub fn entry(&self, observed: usize, prepared: usize) -> f64 {
        self.a[(observed, prepared)]
    }

    pub fn to_rows(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.a[(r, c)]))
    }

    /// Mean of the diagonal (average assignment fidelity).
    pub fn fidelity(&self) -> f64 {
        self.a.diagonal().mean()
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.a.singular_values();
        let (max, min) = (sv.max(), sv.min());
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn apply(&self, p: &Distribution) -> Distribution {
        let y = self.a * Vector4::from(*p);
        [y[0], y[1], y[2], y[3]]
    }

    pub fn max_abs_diff(&self, other: &CalibrationMatrix) -> f64 {
        (self.a - other.a).abs().max()
    }
}

impl fmt::Display for CalibrationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Circuits preparing `|00>, |01>, |10>, |11>` and measuring both qubits.
pub fn build_calibration_circuits() -> [Circuit; 4] {
    std::array::from_fn(|j| {
        let mut c = Circuit::new();
        for (q, bit) in [(0usize, (j >> 1) & 1), (1, j & 1)] {
            if bit == 1 {
                c.push(GateStep::PauliX { target: q }).expect("valid step");
            }
        }
        c.push(GateStep::MeasureZ { target: 0, bit: 0 })
            .expect("valid step");
        c.push(GateStep::MeasureZ { target: 1, bit: 1 })
            .expect("valid step");
        c
    })
}

/// Runs the four calibration circuits, each through the readout channel.
pub fn run_calibration(noise: &ReadoutNoise, shots: u64, seed: u64) -> Result<[Counts; 4]> {
    if shots == 0 {
        return Err(QetError::ZeroShots);
    }
    let circuits = build_calibration_circuits();
    let mut readout = seeded_rng(seed, stream::CALIBRATION_READOUT);
    let mut out = [Counts::default(); 4];
    for (j, circuit) in circuits.iter().enumerate() {
        let clean = run_shots(circuit, shots, crate::rng::derive_seed(seed, j as u64))?;
        out[j] = apply_noise(&clean, noise, &mut readout);
    }
    Ok(out)
}

/// Column `j` is the empirical outcome distribution when preparing basis state `j`.
pub fn estimate_calibration_matrix(runs: &[Counts; 4]) -> Result<CalibrationMatrix> {
    let mut a = [[0.0; 4]; 4];
    for (prepared, counts) in runs.iter().enumerate() {
        if counts.is_empty() {
            return Err(QetError::EmptyCounts);
        }
        let freq = counts.frequencies();
        for (observed, f) in freq.into_iter().enumerate() {
            a[observed][prepared] = f;
        }
    }
    // Integer frequencies can miss unit column sums by an ulp or two.
    CalibrationMatrix::new(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MitigationMethod {
    /// `A⁻¹ y`, negatives clipped to zero and renormalized.
    DirectInverse,
    /// `argmin ‖A x - y‖` over the probability simplex.
    #[default]
    LeastSquares,
}

impl MitigationMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            MitigationMethod::DirectInverse => "direct",
            MitigationMethod::LeastSquares => "least-squares",
        }
    }
}

impl FromStr for MitigationMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "direct" => Ok(Self::DirectInverse),
            "least-squares" | "lstsq" => Ok(Self::LeastSquares),
            other => Err(format!("unknown mitigation method {other:?}")),
        }
    }
}

/// Corrects observed counts with the calibration matrix.
pub fn mitigate(
    counts: &Counts,
    a: &CalibrationMatrix,
    method: MitigationMethod,
) -> Result<Distribution> {
    if counts.is_empty() {
        return Err(QetError::EmptyCounts);
    }
    mitigate_distribution(&counts.frequencies(), a, method)
}

/// Corrects an observed frequency vector.
pub fn mitigate_distribution(
    observed: &Distribution,
    a: &CalibrationMatrix,
    method: MitigationMethod,
) -> Result<Distribution> {
    match method {
        MitigationMethod::DirectInverse => direct_inverse(observed, a),
        MitigationMethod::LeastSquares => Ok(simplex_least_squares(observed, a)),
    }
}

fn direct_inverse(observed: &Distribution, a: &CalibrationMatrix) -> Result<Distribution> {
    let condition = a.condition_number();
    if condition.is_nan() || condition >= MAX_CONDITION_NUMBER {
        return Err(QetError::IllConditioned { condition });
    }
    let x =
        a.a.lu()
            .solve(&Vector4::from(*observed))
            .ok_or(QetError::IllConditioned { condition })?;
    let clipped: [f64; 4] = std::array::from_fn(|i| x[i].max(0.0));
    let total: f64 = clipped.iter().sum();
    Ok(clipped.map(|v| v / total))
}

/// Exact simplex-constrained least squares by enumerating active sets.
///
/// For each support `S` the equality-constrained problem
/// `min ‖A_S x_S - y‖²` s.t. `Σ x_S = 1` is solved through its KKT system;
/// the best nonnegative candidate is the global optimum of the convex problem.
fn simplex_least_squares(observed: &Distribution, a: &CalibrationMatrix) -> Distribution {
    let y = Vector4::from(*observed);
    let mut best: Option<(f64, Distribution)> = None;
    for mask in 1u32..16 {
        let support: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
        let n = support.len();
        let a_s = DMatrix::from_fn(4, n, |r, c| a.a[(r, support[c])]);
        let gram = a_s.transpose() * &a_s;
        let rhs_top = a_s.transpose() * DVector::from_column_slice(y.as_slice());
        let mut kkt = DMatrix::zeros(n + 1, n + 1);
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            for j in 0..n {
                kkt[(i, j)] = gram[(i, j)];
            }
            kkt[(i, n)] = 1.0;
            kkt[(n, i)] = 1.0;
            rhs[i] = rhs_top[i];
        }
        rhs[n] = 1.0;
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        if sol.iter().any(|v| !v.is_finite()) || (0..n).any(|i| sol[i] < -1e-14) {
            continue;
        }
        let mut x = [0.0; 4];
        for (i, &s) in support.iter().enumerate() {
            x[s] = sol[i].max(0.0);
        }
        let total: f64 = x.iter().sum();
        let x = x.map(|v| v / total);
        let residual = (a.a * Vector4::from(x) - y).norm_squared();
        if best.as_ref().is_none_or(|(r, _)| residual < *r - 1e-18) {
            best = Some((residual, x));
        }
    }
    // Singleton supports always have a solution, so `best` is populated.
    best.map(|(_, x)| x).unwrap_or(*observed)
}
