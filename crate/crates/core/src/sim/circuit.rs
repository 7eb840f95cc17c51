use std::fmt;

use super::state::{basis_index, c, embed, pauli, Mat2, Mat4};
use crate::error::{QetError, Result};

/// Number of qubits and classical bits in every circuit.
pub const REGISTER_WIDTH: usize = 2;

/// One step of a two-qubit circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateStep {
    Ry {
        angle: f64,
        target: usize,
    },
    Hadamard {
        target: usize,
    },
    PauliX {
        target: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// `RY(angle)` on `target` when `control` is in `|control_value>`.
    /// `control_value = 0` is the anti-controlled form.
    ControlledRy {
        control: usize,
        control_value: u8,
        angle: f64,
        target: usize,
    },
    /// Projective Z measurement of `target`, written to classical bit `bit`.
    MeasureZ {
        target: usize,
        bit: usize,
    },
    /// `RY(angle)` on `target` when classical bit `bit` equals `value`.
    ClassicallyControlledRy {
        bit: usize,
        value: u8,
        angle: f64,
        target: usize,
    },
}

impl GateStep {
    fn validate(&self) -> Result<()> {
        let qubit = |q: usize| {
            if q < REGISTER_WIDTH {
                Ok(())
            } else {
                Err(QetError::QubitOutOfRange(q))
            }
        };
        let cbit = |b: usize| {
            if b < REGISTER_WIDTH {
                Ok(())
            } else {
                Err(QetError::ClassicalBitOutOfRange(b))
            }
        };
        match *self {
            GateStep::Ry { target, .. }
            | GateStep::Hadamard { target }
            | GateStep::PauliX { target } => qubit(target),
            GateStep::Cnot { control, target }
            | GateStep::ControlledRy {
                control, target, ..
            } => {
                qubit(control)?;
                qubit(target)?;
                if control == target {
                    return Err(QetError::ControlEqualsTarget(target));
                }
                Ok(())
            }
            GateStep::MeasureZ { target, bit } => {
                qubit(target)?;
                cbit(bit)
            }
            GateStep::ClassicallyControlledRy { bit, target, .. } => {
                qubit(target)?;
                cbit(bit)
            }
        }
    }

    /// The 4×4 unitary of a purely quantum step, `None` for measurement and
    /// classically controlled steps.
    pub fn unitary(&self) -> Option<Mat4> {
        let single = |op: Mat2, target: usize| Some(embed(&op, target));
        match *self {
            GateStep::Ry { angle, target } => single(pauli::ry(angle), target),
            GateStep::Hadamard { target } => single(pauli::hadamard(), target),
            GateStep::PauliX { target } => single(pauli::x(), target),
            GateStep::Cnot { control, target } => Some(controlled(control, 1, &pauli::x(), target)),
            GateStep::ControlledRy {
                control,
                control_value,
                angle,
                target,
            } => Some(controlled(
                control,
                control_value,
                &pauli::ry(angle),
                target,
            )),
            GateStep::MeasureZ { .. } | GateStep::ClassicallyControlledRy { .. } => None,
        }
    }

    /// Quantum wires touched by the step, for depth counting.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateStep::Ry { target, .. }
            | GateStep::Hadamard { target }
            | GateStep::PauliX { target }
            | GateStep::MeasureZ { target, .. }
            | GateStep::ClassicallyControlledRy { target, .. } => vec![target],
            GateStep::Cnot { control, target }
            | GateStep::ControlledRy {
                control, target, ..
            } => {
                vec![control, target]
            }
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, GateStep::MeasureZ { .. })
    }
}

impl fmt::Display for GateStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GateStep::Ry { angle, target } => write!(f, "ry({angle}) q{target}"),
            GateStep::Hadamard { target } => write!(f, "h q{target}"),
            GateStep::PauliX { target } => write!(f, "x q{target}"),
            GateStep::Cnot { control, target } => write!(f, "cx q{control},q{target}"),
            GateStep::ControlledRy {
                control,
                control_value,
                angle,
                target,
            } => write!(f, "c{control_value}ry({angle}) q{control},q{target}"),
            GateStep::MeasureZ { target, bit } => write!(f, "measure q{target} -> c{bit}"),
            GateStep::ClassicallyControlledRy {
                bit,
                value,
                angle,
                target,
            } => write!(f, "if (c{bit}=={value}) ry({angle}) q{target}"),
        }
    }
}

/// `|v><v| ⊗ U + |1-v><1-v| ⊗ I` arranged on the given wires.
fn controlled(control: usize, value: u8, op: &Mat2, target: usize) -> Mat4 {
    Mat4::from_fn(|row, col| {
        let bits = |i: usize| [((i >> 1) & 1) as u8, (i & 1) as u8];
        let (r, cbits) = (bits(row), bits(col));
        if r[control] != cbits[control] {
            return c(0.0);
        }
        if cbits[control] == value {
            op[(usize::from(r[target]), usize::from(cbits[target]))]
        } else if r[target] == cbits[target] {
            c(1.0)
        } else {
            c(0.0)
        }
    })
}

/// Ordered list of steps acting on `|00>` with a two-bit classical register.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    steps: Vec<GateStep>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates every step, including the write-before-read rule for classical bits.
    pub fn from_steps(steps: impl IntoIterator<Item = GateStep>) -> Result<Self> {
        let mut circuit = Self::new();
        for step in steps {
            circuit.push(step)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, step: GateStep) -> Result<&mut Self> {
        step.validate()?;
        if let GateStep::ClassicallyControlledRy { bit, .. } = step {
            let written = self
                .steps
                .iter()
                .any(|s| matches!(s, GateStep::MeasureZ { bit: b, .. } if *b == bit));
            if !written {
                return Err(QetError::UnwrittenClassicalBit(bit));
            }
        }
        self.steps.push(step);
        Ok(self)
    }

    pub fn steps(&self) -> &[GateStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Layer depth excluding measurements. Steps on disjoint wires share a layer.
    pub fn depth(&self) -> usize {
        let mut wire = [0usize; REGISTER_WIDTH];
        for step in self.steps.iter().filter(|s| !s.is_measurement()) {
            let qs = step.qubits();
            let layer = qs.iter().map(|&q| wire[q]).max().unwrap_or(0) + 1;
            for q in qs {
                wire[q] = layer;
            }
        }
        wire.into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}

/// Two-bit outcome label `b0 b1`.
pub fn bitstring(index: usize) -> String {
    format!("{}{}", (index >> 1) & 1, index & 1)
}

/// Parses `"b0b1"` into a basis index.
pub fn parse_bitstring(s: &str) -> Option<usize> {
    match s.as_bytes() {
        [b0 @ (b'0' | b'1'), b1 @ (b'0' | b'1')] => Some(basis_index(b0 - b'0', b1 - b'0')),
        _ => None,
    }
}

/// Occurrence counts of the four terminal register values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Counts {
    counts: [u64; 4],
}

impl Counts {
    pub fn new(counts: [u64; 4]) -> Self {
        Self { counts }
    }

    /// Builds counts from `(bitstring, count)` pairs; unknown labels yield `None`.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Option<Self> {
        let mut counts = [0u64; 4];
        for (label, n) in pairs {
            counts[parse_bitstring(label)?] += n;
        }
        Some(Self { counts })
    }

    pub fn record(&mut self, index: usize) {
        self.counts[index] += 1;
    }

    pub fn as_array(&self) -> [u64; 4] {
        self.counts
    }

    pub fn get(&self, bitstring: &str) -> u64 {
        parse_bitstring(bitstring).map_or(0, |i| self.counts[i])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// `(bitstring, count)` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (String, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &n)| (bitstring(i), n))
    }

    /// Relative frequencies; all zero when empty.
    pub fn frequencies(&self) -> [f64; 4] {
        let total = self.total();
        if total == 0 {
            return [0.0; 4];
        }
        self.counts.map(|n| n as f64 / total as f64)
    }
}

impl fmt::Display for Counts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(b, n)| format!("{b}: {n}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Exact probability of each terminal register value.
pub type Distribution = [f64; 4];
