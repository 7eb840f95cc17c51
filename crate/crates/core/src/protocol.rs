//! Protocol circuits and count-based energy estimators.
//!
//! Every circuit starts from `|00>`, prepares the ground state with
//! `RY(2θ)` on qubit 0 and a CNOT, then performs Alice's `X0` measurement as a
//! Hadamard followed by a Z readout of qubit 0. Outcome bit `b` encodes
//! `μ = 1 - 2b`. Bob's reply `RY(2μφ)` on qubit 1 is either classically
//! conditioned on the mid-circuit bit or realized coherently by a controlled
//! `RY(-2φ)` plus an anti-controlled `RY(+2φ)` with all readout deferred to the
//! end of the circuit.

use std::fmt;
use std::str::FromStr;

use crate::error::{QetError, Result};
use crate::mitigation::{
    apply_noise, estimate_calibration_matrix, mitigate, run_calibration, CalibrationMatrix,
    MitigationMethod, ReadoutNoise,
};
use crate::model::{
    analytic_e0, analytic_e1, angles, build_hamiltonians, rho_qet, ModelParams, ProtocolAngles,
};
use crate::rng::{derive_seed, seeded_rng, stream};
use crate::sim::{expectation, run_shots, Circuit, Counts, Distribution, GateStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ProtocolMode {
    /// Mid-circuit measurement of Alice's qubit and classically controlled rotations.
    #[default]
    Conditional,
    /// Controlled and anti-controlled rotations with terminal measurement only.
    Deferred,
}

impl ProtocolMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtocolMode::Conditional => "conditional",
            ProtocolMode::Deferred => "deferred",
        }
    }
}

impl FromStr for ProtocolMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "conditional" => Ok(Self::Conditional),
            "deferred" => Ok(Self::Deferred),
            other => Err(format!(
                "unknown mode {other:?} (expected conditional|deferred)"
            )),
        }
    }
}

/// Quantity read out by a single circuit. `H1` and `V` do not commute and
/// always get separate circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementTarget {
    /// Alice's deposited energy.
    E0,
    /// Bob's local field term, Z basis on qubit 1.
    H1,
    /// Interaction term, `X0 X1` basis.
    V,
}

impl MeasurementTarget {
    pub const ALL: [MeasurementTarget; 3] = [Self::E0, Self::H1, Self::V];

    /// `±1` eigenvalue of the measured Pauli word for register value `index`.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let sign = |bit: usize| 1.0 - 2.0 * bit as f64;
        let (b0, b1) = ((index >> 1) & 1, index & 1);
        match self {
            Self::E0 => sign(b0),
            Self::H1 => sign(b1),
            Self::V => sign(b0) * sign(b1),
        }
    }

    /// `(scale, shift)` such that the energy is `scale * <Pauli word> + shift`.
    pub fn affine(&self, params: &ModelParams) -> (f64, f64) {
        match self {
            Self::E0 | Self::H1 => (params.h(), params.local_shift()),
            Self::V => (2.0 * params.k(), params.coupling_shift()),
        }
    }
}

impl From<MeasurementTarget> for Quantity {
    fn from(t: MeasurementTarget) -> Self {
        match t {
            MeasurementTarget::E0 => Quantity::E0,
            MeasurementTarget::H1 => Quantity::H1,
            MeasurementTarget::V => Quantity::V,
        }
    }
}

/// Energy quantity reported by the protocol. `E1` is the sum of the separately
/// measured `H1` and `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    E0,
    H1,
    V,
    E1,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Self::E0, Self::H1, Self::V, Self::E1];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::E0 => "E0",
            Quantity::H1 => "H1",
            Quantity::V => "V",
            Quantity::E1 => "E1",
        }
    }

    pub fn target(&self) -> Option<MeasurementTarget> {
        match self {
            Quantity::E0 => Some(MeasurementTarget::E0),
            Quantity::H1 => Some(MeasurementTarget::H1),
            Quantity::V => Some(MeasurementTarget::V),
            Quantity::E1 => None,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "E0" | "e0" => Ok(Self::E0),
            "H1" | "h1" => Ok(Self::H1),
            "V" | "v" => Ok(Self::V),
            "E1" | "e1" => Ok(Self::E1),
            other => Err(format!("unknown target {other:?} (expected E0|H1|V|E1)")),
        }
    }
}

/// Exact value of a protocol quantity: closed forms for `E0`/`E1`, and
/// `Tr[ρ_QET O]` for the individual terms.
pub fn analytic_value(params: &ModelParams, quantity: Quantity) -> f64 {
    match quantity {
        Quantity::E0 => analytic_e0(params),
        Quantity::E1 => analytic_e1(params),
        Quantity::H1 => expectation(&rho_qet(params), &build_hamiltonians(params).h1)
            .expect("Hermitian operands"),
        Quantity::V => expectation(&rho_qet(params), &build_hamiltonians(params).v)
            .expect("Hermitian operands"),
    }
}

fn push(c: &mut Circuit, step: GateStep) {
    c.push(step).expect("protocol steps are well-formed");
}

/// Builds the measurement circuit for `target`.
///
/// The `E0` circuit measures `X0` mid-circuit, rotates qubit 0 back with a
/// second Hadamard, and reads `Z0` again; it has no Bob operation and is the
/// same in both modes. For `V` the final Hadamard on qubit 1 completes the
/// `X0 X1` basis change (qubit 0 is already in the X frame).
pub fn build_circuit(
    params: &ModelParams,
    target: MeasurementTarget,
    mode: ProtocolMode,
) -> Circuit {
    let ProtocolAngles { theta, phi } = angles(params);
    let mut c = Circuit::new();
    push(
        &mut c,
        GateStep::Ry {
            angle: 2.0 * theta,
            target: 0,
        },
    );
    push(
        &mut c,
        GateStep::Cnot {
            control: 0,
            target: 1,
        },
    );
    push(&mut c, GateStep::Hadamard { target: 0 });

    if target == MeasurementTarget::E0 {
        push(&mut c, GateStep::MeasureZ { target: 0, bit: 0 });
        push(&mut c, GateStep::Hadamard { target: 0 });
        push(&mut c, GateStep::MeasureZ { target: 0, bit: 0 });
        push(&mut c, GateStep::MeasureZ { target: 1, bit: 1 });
        return c;
    }

    match mode {
        ProtocolMode::Conditional => {
            push(&mut c, GateStep::MeasureZ { target: 0, bit: 0 });
            push(
                &mut c,
                GateStep::ClassicallyControlledRy {
                    bit: 0,
                    value: 1,
                    angle: -2.0 * phi,
                    target: 1,
                },
            );
            push(
                &mut c,
                GateStep::ClassicallyControlledRy {
                    bit: 0,
                    value: 0,
                    angle: 2.0 * phi,
                    target: 1,
                },
            );
        }
        ProtocolMode::Deferred => {
            push(
                &mut c,
                GateStep::ControlledRy {
                    control: 0,
                    control_value: 1,
                    angle: -2.0 * phi,
                    target: 1,
                },
            );
            push(
                &mut c,
                GateStep::ControlledRy {
                    control: 0,
                    control_value: 0,
                    angle: 2.0 * phi,
                    target: 1,
                },
            );
        }
    }
    if target == MeasurementTarget::V {
        push(&mut c, GateStep::Hadamard { target: 1 });
    }
    push(&mut c, GateStep::MeasureZ { target: 0, bit: 0 });
    push(&mut c, GateStep::MeasureZ { target: 1, bit: 1 });
    c
}

fn pauli_mean(counts: &Counts, target: MeasurementTarget) -> Result<f64> {
    if counts.is_empty() {
        return Err(QetError::EmptyCounts);
    }
    Ok(counts
        .frequencies()
        .iter()
        .enumerate()
        .map(|(i, f)| f * target.eigenvalue(i))
        .sum())
}

/// `<Z1> = Σ (1 - 2 b1) counts / n`.
pub fn estimate_z1(counts: &Counts) -> Result<f64> {
    pauli_mean(counts, MeasurementTarget::H1)
}

/// `<X0 X1> = Σ (1 - 2 b0)(1 - 2 b1) counts / n`.
pub fn estimate_x0x1(counts: &Counts) -> Result<f64> {
    pauli_mean(counts, MeasurementTarget::V)
}

/// `<Z0> = Σ (1 - 2 b0) counts / n`.
pub fn estimate_z0(counts: &Counts) -> Result<f64> {
    pauli_mean(counts, MeasurementTarget::E0)
}

/// Sampled energy estimate with its per-shot standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub quantity: Quantity,
    pub mean: f64,
    pub std_error: f64,
    /// Shots per circuit.
    pub n_shots: u64,
    /// One entry per circuit (`H1` then `V` for `E1`).
    pub raw_counts: Vec<Counts>,
}

impl EstimationResult {
    /// Distance from `reference` in units of the standard error.
    pub fn deviation_sigma(&self, reference: f64) -> f64 {
        if self.std_error > 0.0 {
            (self.mean - reference) / self.std_error
        } else if self.mean == reference {
            0.0
        } else {
            f64::INFINITY.copysign(self.mean - reference)
        }
    }
}

/// Energy estimate from outcome frequencies standing for `n_shots` shots.
///
/// The standard error is the sample standard deviation of the per-shot
/// eigenvalues divided by `√n`, scaled by the observable's coefficient.
pub fn estimate_from_distribution(
    params: &ModelParams,
    target: MeasurementTarget,
    frequencies: &Distribution,
    n_shots: u64,
) -> Result<(f64, f64)> {
    if n_shots == 0 {
        return Err(QetError::EmptyCounts);
    }
    let (scale, shift) = target.affine(params);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (i, f) in frequencies.iter().enumerate() {
        let e = target.eigenvalue(i);
        m1 += f * e;
        m2 += f * e * e;
    }
    let n = n_shots as f64;
    let variance = if n_shots > 1 {
        ((m2 - m1 * m1) * n / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((scale * m1 + shift, scale * (variance / n).sqrt()))
}

/// Converts counts from the `target` circuit into an energy estimate.
pub fn estimate_energy(
    params: &ModelParams,
    target: MeasurementTarget,
    counts: &Counts,
) -> Result<EstimationResult> {
    if counts.is_empty() {
        return Err(QetError::EmptyCounts);
    }
    let (mean, std_error) =
        estimate_from_distribution(params, target, &counts.frequencies(), counts.total())?;
    Ok(EstimationResult {
        quantity: target.into(),
        mean,
        std_error,
        n_shots: counts.total(),
        raw_counts: vec![*counts],
    })
}

/// `<E1> = <H1> + <V>` with errors added in quadrature.
pub fn combine_e1(h1: &EstimationResult, v: &EstimationResult) -> Result<EstimationResult> {
    if h1.quantity != Quantity::H1 || v.quantity != Quantity::V {
        return Err(QetError::TargetMismatch(format!(
            "E1 combines H1 and V estimates, got {} and {}",
            h1.quantity, v.quantity
        )));
    }
    Ok(EstimationResult {
        quantity: Quantity::E1,
        mean: h1.mean + v.mean,
        std_error: h1.std_error.hypot(v.std_error),
        n_shots: h1.n_shots,
        raw_counts: h1.raw_counts.iter().chain(&v.raw_counts).copied().collect(),
    })
}

/// Raw (possibly noisy) counts of one protocol circuit.
pub fn sample_counts(
    params: &ModelParams,
    target: MeasurementTarget,
    mode: ProtocolMode,
    n_shots: u64,
    seed: u64,
    noise: Option<&ReadoutNoise>,
) -> Result<Counts> {
    if n_shots == 0 {
        return Err(QetError::ZeroShots);
    }
    let circuit = build_circuit(params, target, mode);
    let clean = run_shots(&circuit, n_shots, seed)?;
    Ok(match noise {
        Some(noise) => apply_noise(&clean, noise, &mut seeded_rng(seed, stream::READOUT)),
        None => clean,
    })
}

/// Build, sample, optionally corrupt with readout noise, and estimate.
pub fn run_protocol(
    params: &ModelParams,
    target: MeasurementTarget,
    mode: ProtocolMode,
    n_shots: u64,
    seed: u64,
    noise: Option<&ReadoutNoise>,
) -> Result<EstimationResult> {
    let counts = sample_counts(params, target, mode, n_shots, seed, noise)?;
    estimate_energy(params, target, &counts)
}

/// Seed of the `V` half of an `E1` run.
pub fn secondary_seed(seed: u64) -> u64 {
    derive_seed(seed, stream::SECONDARY)
}

/// Like [`run_protocol`] but also accepts `E1`, which runs `H1` with `seed`
/// and `V` with [`secondary_seed`].
pub fn run_quantity(
    params: &ModelParams,
    quantity: Quantity,
    mode: ProtocolMode,
    n_shots: u64,
    seed: u64,
    noise: Option<&ReadoutNoise>,
) -> Result<EstimationResult> {
    match quantity.target() {
        Some(target) => run_protocol(params, target, mode, n_shots, seed, noise),
        None => {
            let h1 = run_protocol(params, MeasurementTarget::H1, mode, n_shots, seed, noise)?;
            let v = run_protocol(
                params,
                MeasurementTarget::V,
                mode,
                n_shots,
                secondary_seed(seed),
                noise,
            )?;
            combine_e1(&h1, &v)
        }
    }
}

/// Raw and calibration-corrected estimates from the same noisy counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigatedEstimate {
    pub unmitigated: EstimationResult,
    pub mitigated: EstimationResult,
    pub calibration: CalibrationMatrix,
}

fn mitigated_single(
    params: &ModelParams,
    target: MeasurementTarget,
    raw: &EstimationResult,
    calibration: &CalibrationMatrix,
    method: MitigationMethod,
) -> Result<EstimationResult> {
    let counts = raw.raw_counts[0];
    let corrected = mitigate(&counts, calibration, method)?;
    let (mean, std_error) = estimate_from_distribution(params, target, &corrected, counts.total())?;
    Ok(EstimationResult {
        quantity: target.into(),
        mean,
        std_error,
        n_shots: counts.total(),
        raw_counts: vec![counts],
    })
}

/// Noisy protocol run followed by calibration-matrix mitigation.
///
/// The calibration matrix comes from the four basis-preparation circuits run
/// through the same readout channel with `calibration_shots` shots each.
#[allow(clippy::too_many_arguments)]
pub fn run_mitigated(
    params: &ModelParams,
    quantity: Quantity,
    mode: ProtocolMode,
    n_shots: u64,
    seed: u64,
    noise: &ReadoutNoise,
    method: MitigationMethod,
    calibration_shots: u64,
) -> Result<MitigatedEstimate> {
    let calibration = estimate_calibration_matrix(&run_calibration(
        noise,
        calibration_shots,
        seed_for_calibration(seed),
    )?)?;
    let single =
        |target: MeasurementTarget, seed: u64| -> Result<(EstimationResult, EstimationResult)> {
            let raw = run_protocol(params, target, mode, n_shots, seed, Some(noise))?;
            let fixed = mitigated_single(params, target, &raw, &calibration, method)?;
            Ok((raw, fixed))
        };
    let (unmitigated, mitigated) = match quantity.target() {
        Some(target) => single(target, seed)?,
        None => {
            let (h1_raw, h1_fixed) = single(MeasurementTarget::H1, seed)?;
            let (v_raw, v_fixed) = single(MeasurementTarget::V, secondary_seed(seed))?;
            (
                combine_e1(&h1_raw, &v_raw)?,
                combine_e1(&h1_fixed, &v_fixed)?,
            )
        }
    };
    Ok(MitigatedEstimate {
        unmitigated,
        mitigated,
        calibration,
    })
}

fn seed_for_calibration(seed: u64) -> u64 {
    derive_seed(seed, stream::CALIBRATION)
}
