//! Gate application, projective measurement, shot sampling and exact
//! branch enumeration.

use rand::Rng;

use super::circuit::{Circuit, Counts, Distribution, GateStep};
use super::state::{
    basis_index, c, embed, pauli, DensityMatrix, Mat4, Observable, PureState, Vec4, DECOMP_TOL,
};
use crate::error::{QetError, Result};
use crate::rng::{seeded_rng, stream};

/// Below this both Born probabilities of a measurement are treated as lost.
pub const UNDERFLOW_PROBABILITY: f64 = 1e-15;

/// Applies a unitary step. Measurement and classically controlled steps are
/// rejected; they need [`measure_z`] or a circuit run.
pub fn apply_gate(state: &PureState, step: &GateStep) -> Result<PureState> {
    let u = step
        .unitary()
        .ok_or_else(|| QetError::NotAUnitaryStep(step.to_string()))?;
    Ok(state.transformed(&u))
}

fn outcome_weights(amps: &Vec4, target: usize) -> [f64; 2] {
    let mut w = [0.0; 2];
    for (i, a) in amps.iter().enumerate() {
        let bit = if target == 0 { (i >> 1) & 1 } else { i & 1 };
        w[bit] += a.norm_sqr();
    }
    w
}

fn project(amps: &Vec4, target: usize, outcome: u8) -> Vec4 {
    let mut out = *amps;
    for (i, a) in out.iter_mut().enumerate() {
        let bit = if target == 0 { (i >> 1) & 1 } else { i & 1 };
        if bit != usize::from(outcome) {
            *a = c(0.0);
        }
    }
    out
}

fn sample_outcome<R: Rng + ?Sized>(amps: &Vec4, target: usize, rng: &mut R) -> Result<(u8, Vec4)> {
    let [p0, p1] = outcome_weights(amps, target);
    if p0 < UNDERFLOW_PROBABILITY && p1 < UNDERFLOW_PROBABILITY {
        return Err(QetError::ProbabilityUnderflow { p0, p1 });
    }
    let u: f64 = rng.random();
    let outcome = u8::from(u * (p0 + p1) >= p0);
    let p = if outcome == 0 { p0 } else { p1 };
    Ok((outcome, project(amps, target, outcome) / c(p.sqrt())))
}

/// Projective Z measurement of `target`. Returns the outcome bit and the
/// renormalized post-measurement state.
pub fn measure_z<R: Rng + ?Sized>(
    state: &PureState,
    target: usize,
    rng: &mut R,
) -> Result<(u8, PureState)> {
    if target > 1 {
        return Err(QetError::QubitOutOfRange(target));
    }
    let (bit, amps) = sample_outcome(state.amplitudes(), target, rng)?;
    Ok((bit, PureState::from_raw(amps)))
}

/// Circuit with gate matrices precomputed once per run.
enum Compiled {
    Unitary(Mat4),
    Measure { target: usize, bit: usize },
    Conditional { bit: usize, value: u8, op: Mat4 },
}

fn compile(circuit: &Circuit) -> Vec<Compiled> {
    circuit
        .steps()
        .iter()
        .map(|step| match *step {
            GateStep::MeasureZ { target, bit } => Compiled::Measure { target, bit },
            GateStep::ClassicallyControlledRy {
                bit,
                value,
                angle,
                target,
            } => Compiled::Conditional {
                bit,
                value,
                op: embed(&pauli::ry(angle), target),
            },
            ref other => Compiled::Unitary(other.unitary().expect("quantum step has a unitary")),
        })
        .collect()
}

/// Runs the circuit `n_shots` times from `|00>` and tallies the terminal
/// classical register. Identical `(circuit, n_shots, seed)` give identical counts.
pub fn run_shots(circuit: &Circuit, n_shots: u64, seed: u64) -> Result<Counts> {
    let program = compile(circuit);
    let mut rng = seeded_rng(seed, stream::SHOTS);
    let start = *PureState::zero().amplitudes();
    let mut counts = Counts::default();
    for _ in 0..n_shots {
        let mut amps = start;
        let mut bits = [0u8; 2];
        for op in &program {
            match op {
                Compiled::Unitary(u) => amps = u * amps,
                Compiled::Measure { target, bit } => {
                    let (b, next) = sample_outcome(&amps, *target, &mut rng)?;
                    bits[*bit] = b;
                    amps = next;
                }
                Compiled::Conditional { bit, value, op } => {
                    if bits[*bit] == *value {
                        amps = op * amps;
                    }
                }
            }
        }
        counts.record(basis_index(bits[0], bits[1]));
    }
    Ok(counts)
}

/// A measurement branch: unnormalized amplitudes (squared norm is the branch
/// probability) together with the classical register.
#[derive(Debug, Clone)]
pub struct Branch {
    pub amplitudes: Vec4,
    pub bits: [u8; 2],
}

impl Branch {
    pub fn probability(&self) -> f64 {
        self.amplitudes.norm_squared()
    }
}

/// Enumerates every measurement branch of the circuit exactly.
pub fn branches(circuit: &Circuit) -> Vec<Branch> {
    let mut live = vec![Branch {
        amplitudes: *PureState::zero().amplitudes(),
        bits: [0, 0],
    }];
    for op in compile(circuit) {
        match op {
            Compiled::Unitary(u) => {
                for b in &mut live {
                    b.amplitudes = u * b.amplitudes;
                }
            }
            Compiled::Conditional { bit, value, op } => {
                for b in live.iter_mut().filter(|b| b.bits[bit] == value) {
                    b.amplitudes = op * b.amplitudes;
                }
            }
            Compiled::Measure { target, bit } => {
                live = live
                    .into_iter()
                    .flat_map(|b| {
                        (0..2u8).filter_map(move |outcome| {
                            let amplitudes = project(&b.amplitudes, target, outcome);
                            let mut bits = b.bits;
                            bits[bit] = outcome;
                            (amplitudes.norm_squared() > 0.0).then_some(Branch { amplitudes, bits })
                        })
                    })
                    .collect();
            }
        }
    }
    live
}

/// Exact probability of every terminal register value.
pub fn exact_distribution(circuit: &Circuit) -> Distribution {
    let mut dist = [0.0; 4];
    for b in branches(circuit) {
        dist[basis_index(b.bits[0], b.bits[1])] += b.probability();
    }
    dist
}

/// `Tr[rho O]`, rejecting an imaginary residue above 1e-10.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    let value = (rho.matrix() * obs.matrix()).trace();
    if value.im.abs() > DECOMP_TOL {
        return Err(QetError::ImaginaryResidue { residue: value.im });
    }
    Ok(value.re)
}
