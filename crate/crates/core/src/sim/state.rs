//! Two-qubit states and observables.
//!
//! Basis ordering is `|q0 q1>` with index `2*b0 + b1`, so qubit 0 is the most
//! significant factor of every tensor product.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{QetError, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;

/// Tolerance for exact algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for quantities that pass through an eigendecomposition.
pub const DECOMP_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Basis index of the bit pair `(b0, b1)`.
pub fn basis_index(b0: u8, b1: u8) -> usize {
    2 * usize::from(b0 & 1) + usize::from(b1 & 1)
}

/// Single-qubit Pauli and Clifford matrices.
pub mod pauli {
    use super::*;

    pub fn identity() -> Mat2 {
        Mat2::identity()
    }

    pub fn x() -> Mat2 {
        Mat2::new(c(0.0), c(1.0), c(1.0), c(0.0))
    }

    pub fn y() -> Mat2 {
        Mat2::new(c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0))
    }

    pub fn z() -> Mat2 {
        Mat2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
    }

    pub fn hadamard() -> Mat2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Mat2::new(c(s), c(s), c(s), c(-s))
    }

    /// `RY(angle) = exp(-i angle/2 Y)`.
    pub fn ry(angle: f64) -> Mat2 {
        let (s, co) = (angle / 2.0).sin_cos();
        Mat2::new(c(co), c(-s), c(s), c(co))
    }
}

/// Kronecker product `a ⊗ b` with `a` acting on qubit 0.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Lift a single-qubit operator onto `target` of the two-qubit register.
pub fn embed(op: &Mat2, target: usize) -> Mat4 {
    if target == 0 {
        kron(op, &Mat2::identity())
    } else {
        kron(&Mat2::identity(), op)
    }
}

pub(crate) fn hermitian_deviation(m: &Mat4) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub(crate) fn unitary_deviation4(m: &Mat4) -> f64 {
    (m.adjoint() * m - Mat4::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Normalized amplitude vector of the two-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec4,
}

impl PureState {
    /// Builds a state from amplitudes ordered `|00>, |01>, |10>, |11>`.
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        Self::from_vector(Vec4::from(amplitudes))
    }

    pub fn from_vector(amps: Vec4) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(QetError::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    /// Renormalizes an arbitrary nonzero vector.
    pub fn normalized(amps: Vec4) -> Result<Self> {
        let norm = amps.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(QetError::NotNormalized { norm });
        }
        Ok(Self {
            amps: amps / c(norm),
        })
    }

    /// Computational basis state `|b0 b1>`.
    pub fn basis(b0: u8, b1: u8) -> Self {
        let mut amps = Vec4::zeros();
        amps[basis_index(b0, b1)] = c(1.0);
        Self { amps }
    }

    pub fn zero() -> Self {
        Self::basis(0, 0)
    }

    pub fn amplitudes(&self) -> &Vec4 {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Born probabilities of the four basis outcomes.
    pub fn probabilities(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.amps[i].norm_sqr())
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `<psi|O|psi>`.
    pub fn expectation(&self, obs: &Observable) -> f64 {
        self.amps.dotc(&(obs.matrix() * self.amps)).re
    }

    /// Maximum amplitude distance to `other` after removing the global phase.
    pub fn distance_up_to_phase(&self, other: &PureState) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            c(1.0)
        };
        (self.amps - other.amps * phase)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            rho: self.amps * self.amps.adjoint(),
        }
    }

    /// Applies a 4×4 operator without re-validating the norm.
    pub(crate) fn transformed(&self, op: &Mat4) -> Self {
        Self {
            amps: op * self.amps,
        }
    }

    pub(crate) fn from_raw(amps: Vec4) -> Self {
        Self { amps }
    }
}

/// Trace-one positive semidefinite Hermitian 4×4 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: Mat4,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Mat4) -> Result<Self> {
        let deviation = hermitian_deviation(&rho);
        if deviation > ALGEBRA_TOL {
            return Err(QetError::NotHermitian { deviation });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > ALGEBRA_TOL || trace.im.abs() > ALGEBRA_TOL {
            return Err(QetError::BadTrace { trace: trace.re });
        }
        let hermitian = (rho + rho.adjoint()) * c(0.5);
        let min = hermitian
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -DECOMP_TOL {
            return Err(QetError::NegativeEigenvalue { eigenvalue: min });
        }
        Ok(Self { rho })
    }

    /// Convex mixture `Σ w_i |psi_i><psi_i|` of unnormalized branch vectors.
    pub fn from_branches<'a>(branches: impl IntoIterator<Item = &'a Vec4>) -> Result<Self> {
        let rho = branches
            .into_iter()
            .fold(Mat4::zeros(), |acc, v| acc + v * v.adjoint());
        Self::new(rho)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.rho)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = ((self.rho + self.rho.adjoint()) * c(0.5)).symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    /// Probability of each basis outcome (the diagonal).
    pub fn diagonal(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.rho[(i, i)].re)
    }

    /// `U rho U†`.
    pub fn conjugated(&self, u: &Mat4) -> Result<Self> {
        Self::new(u * self.rho * u.adjoint())
    }

    /// Reduced state of `qubit` after tracing out the other one.
    pub fn partial_trace_keep(&self, qubit: usize) -> Mat2 {
        let r = &self.rho;
        Mat2::from_fn(|i, j| {
            (0..2)
                .map(|o| {
                    let (a, b) = if qubit == 0 {
                        (2 * i + o, 2 * j + o)
                    } else {
                        (2 * o + i, 2 * o + j)
                    };
                    r[(a, b)]
                })
                .sum()
        })
    }
}

/// Hermitian operator on the two-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    m: Mat4,
}

impl Observable {
    pub fn new(m: Mat4) -> Result<Self> {
        let deviation = hermitian_deviation(&m);
        if deviation > ALGEBRA_TOL {
            return Err(QetError::NotHermitian { deviation });
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: Mat4::identity(),
        }
    }

    /// Pauli-type product `a ⊗ b`; both factors must be Hermitian.
    pub fn product(a: &Mat2, b: &Mat2) -> Result<Self> {
        Self::new(kron(a, b))
    }

    pub fn z(target: usize) -> Self {
        Self {
            m: embed(&pauli::z(), target),
        }
    }

    pub fn x(target: usize) -> Self {
        Self {
            m: embed(&pauli::x(), target),
        }
    }

    pub fn xx() -> Self {
        Self {
            m: kron(&pauli::x(), &pauli::x()),
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m: self.m * c(factor),
        }
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            m: self.m + Mat4::identity() * c(shift),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = self.m.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Eigenvector of the smallest eigenvalue.
    pub fn ground_vector(&self) -> PureState {
        let eig = self.m.symmetric_eigen();
        let idx = eig.eigenvalues.imin();
        let v: Vec4 = eig.eigenvectors.column(idx).into_owned();
        PureState::from_raw(v / c(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Observable) -> f64 {
        (self.m - other.m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Add for &Observable {
    type Output = Observable;

    fn add(self, rhs: &Observable) -> Observable {
        Observable { m: self.m + rhs.m }
    }
}

impl std::ops::Add for Observable {
    type Output = Observable;

    fn add(self, rhs: Observable) -> Observable {
        &self + &rhs
    }
}
