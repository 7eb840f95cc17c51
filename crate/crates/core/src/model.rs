//! Closed-form quantities of the minimal two-qubit QET model.
//!
//! The model couples a local field `h` on each qubit to an `XX` interaction of
//! strength `k`:
//!
//! ```text
//! H_n  = h Z_n + h²/√(h²+k²)          (n = 0, 1)
//! V    = 2k X0 X1 + 2k²/√(h²+k²)
//! Htot = H0 + H1 + V
//! ```
//!
//! The constant shifts make every local term vanish in the ground state.
//! Alice measures `X0` with projectors `P0(μ) = (1 + μ X0)/2`, and Bob answers
//! with `U1(μ) = RY(2μφ)` on qubit 1.

use crate::error::{QetError, Result};
use crate::sim::{
    c, embed, evolve, expectation, pauli, unitary_deviation4, DensityMatrix, Mat2, Mat4,
    Observable, PureState, Vec4, C64, DECOMP_TOL,
};

/// Coupling constants `(h, k)`; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    h: f64,
    k: f64,
}

impl ModelParams {
    pub fn new(h: f64, k: f64) -> Result<Self> {
        if !(h.is_finite() && k.is_finite() && h > 0.0 && k > 0.0) {
            return Err(QetError::InvalidParams { h, k });
        }
        Ok(Self { h, k })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `√(h² + k²)`.
    pub fn norm(&self) -> f64 {
        self.h.hypot(self.k)
    }

    /// Constant shift of each `H_n`.
    pub fn local_shift(&self) -> f64 {
        self.h * self.h / self.norm()
    }

    /// Constant shift of `V`.
    pub fn coupling_shift(&self) -> f64 {
        2.0 * self.k * self.k / self.norm()
    }
}

impl std::fmt::Display for ModelParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(h={}, k={})", self.h, self.k)
    }
}

/// The four parameter pairs used as the headline benchmark.
pub const REFERENCE_PAIRS: [(f64, f64); 4] = [(1.0, 0.2), (1.0, 0.5), (1.0, 1.0), (1.5, 1.0)];

/// Weak-coupling pair benchmarked alongside [`REFERENCE_PAIRS`].
pub const WEAK_COUPLING_PAIR: (f64, f64) = (1.0, 0.1);

/// Grid shared by every property suite: `h ∈ {0.5, 1, 1.5}`, `k ∈ {0.1, 0.2, 0.5, 1}`.
/// It contains all reference pairs.
pub fn test_grid() -> Vec<ModelParams> {
    let mut grid = Vec::new();
    for h in [0.5, 1.0, 1.5] {
        for k in [0.1, 0.2, 0.5, 1.0] {
            grid.push(ModelParams { h, k });
        }
    }
    for (h, k) in REFERENCE_PAIRS.into_iter().chain([WEAK_COUPLING_PAIR]) {
        if !grid.iter().any(|p| p.h == h && p.k == k) {
            grid.push(ModelParams { h, k });
        }
    }
    grid
}

/// Reference pairs followed by the weak-coupling pair.
pub fn benchmark_pairs() -> Vec<ModelParams> {
    REFERENCE_PAIRS
        .into_iter()
        .chain([WEAK_COUPLING_PAIR])
        .map(|(h, k)| ModelParams { h, k })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSet {
    pub h0: Observable,
    pub h1: Observable,
    pub v: Observable,
    pub htot: Observable,
}

impl HamiltonianSet {
    /// Bob's local energy `H1 + V`.
    pub fn bob_energy(&self) -> Observable {
        &self.h1 + &self.v
    }
}

pub fn build_hamiltonians(params: &ModelParams) -> HamiltonianSet {
    let h0 = Observable::z(0)
        .scaled(params.h)
        .shifted(params.local_shift());
    let h1 = Observable::z(1)
        .scaled(params.h)
        .shifted(params.local_shift());
    let v = Observable::xx()
        .scaled(2.0 * params.k)
        .shifted(params.coupling_shift());
    let htot = &(&h0 + &h1) + &v;
    HamiltonianSet { h0, h1, v, htot }
}

/// Minimum eigenvalue of `V`: `-2k + 2k²/√(h²+k²)`.
pub fn v_ground_energy(params: &ModelParams) -> f64 {
    -2.0 * params.k + params.coupling_shift()
}

/// Minimum eigenvalue of `H_n`: `-h + h²/√(h²+k²)`.
pub fn local_ground_energy(params: &ModelParams) -> f64 {
    -params.h + params.local_shift()
}

/// Ground state `a|00> - b|11>` with `a, b = √((1 ∓ h/√(h²+k²))/2)`.
pub fn ground_state(params: &ModelParams) -> PureState {
    let ratio = params.h / params.norm();
    let a = ((1.0 - ratio) / 2.0).sqrt();
    let b = ((1.0 + ratio) / 2.0).sqrt();
    PureState::normalized(Vec4::new(c(a), c(0.0), c(0.0), c(-b))).expect("nonzero amplitudes")
}

/// Rotation angles of the protocol circuits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolAngles {
    /// Ground-state preparation uses `RY(2θ)` on qubit 0 followed by CNOT.
    pub theta: f64,
    /// Bob applies `RY(2μφ)` on qubit 1.
    pub phi: f64,
}

pub fn angles(params: &ModelParams) -> ProtocolAngles {
    let (h, k) = (params.h, params.k);
    let theta = -(((1.0 - h / params.norm()) / 2.0).sqrt()).acos();
    let phi = 0.5 * (h * k).atan2(h * h + 2.0 * k * k);
    ProtocolAngles { theta, phi }
}

/// Alice's mean deposited energy `h²/√(h²+k²)`.
pub fn analytic_e0(params: &ModelParams) -> f64 {
    params.local_shift()
}

/// Bob's local energy `Tr[ρ_QET (H1+V)]` in closed form for an arbitrary `φ`.
pub fn analytic_e1_at(params: &ModelParams, phi: f64) -> f64 {
    let (h, k) = (params.h, params.k);
    let (s2, c2) = (2.0 * phi).sin_cos();
    -(h * k * s2 - (h * h + 2.0 * k * k) * (1.0 - c2)) / params.norm()
}

/// Bob's local energy at the protocol's `φ`.
pub fn analytic_e1(params: &ModelParams) -> f64 {
    analytic_e1_at(params, angles(params).phi)
}

/// Alice's projector `P0(μ) = (1 + μ X0)/2` for `μ = ±1`.
pub fn alice_projector(mu: i8) -> Mat4 {
    (Mat4::identity() + embed(&pauli::x(), 0) * c(f64::from(mu))) * c(0.5)
}

/// Bob's operation `U1(μ) = RY(2μφ)` on qubit 1.
pub fn bob_rotation(mu: i8, phi: f64) -> Mat4 {
    embed(&pauli::ry(2.0 * f64::from(mu) * phi), 1)
}

fn branch_vectors(params: &ModelParams, phi: Option<f64>) -> [Vec4; 2] {
    let g = *ground_state(params).amplitudes();
    [1i8, -1].map(|mu| {
        let projected = alice_projector(mu) * g;
        match phi {
            Some(phi) => bob_rotation(mu, phi) * projected,
            None => projected,
        }
    })
}

/// `ρ_QET = Σ_μ U1(μ) P0(μ) |g><g| P0(μ) U1†(μ)` for an arbitrary `φ`.
pub fn rho_qet_at(params: &ModelParams, phi: f64) -> DensityMatrix {
    let branches = branch_vectors(params, Some(phi));
    DensityMatrix::from_branches(&branches).expect("protocol ensemble is a valid state")
}

pub fn rho_qet(params: &ModelParams) -> DensityMatrix {
    rho_qet_at(params, angles(params).phi)
}

/// Post-measurement ensemble `ρ_M = Σ_μ P0(μ) |g><g| P0(μ)` before Bob acts.
pub fn rho_measured(params: &ModelParams) -> DensityMatrix {
    let branches = branch_vectors(params, None);
    DensityMatrix::from_branches(&branches).expect("measured ensemble is a valid state")
}

/// Single-qubit unitary acting on Bob's qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct BobUnitary(Mat2);

impl BobUnitary {
    pub fn new(m: Mat2) -> Result<Self> {
        let deviation = (m.adjoint() * m - Mat2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation.is_nan() || deviation > DECOMP_TOL {
            return Err(QetError::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn lifted(&self) -> Mat4 {
        embed(&self.0, 1)
    }
}

/// Energy change `Tr[ρ_W Htot] - <E0>` when Bob applies a fixed unitary `W`
/// after Alice's measurement, ignoring her outcome. Never negative.
pub fn nogo_gap(params: &ModelParams, w: &BobUnitary) -> f64 {
    let lifted = w.lifted();
    debug_assert!(unitary_deviation4(&lifted) <= DECOMP_TOL);
    let rho_w = rho_measured(params)
        .conjugated(&lifted)
        .expect("unitary conjugation keeps the state valid");
    let htot = build_hamiltonians(params).htot;
    expectation(&rho_w, &htot).expect("Hermitian operands") - analytic_e0(params)
}

fn entropy_of(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    eigenvalues
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Von Neumann entropy (nats) of qubit 0 in the pure two-qubit state `psi`.
pub fn entanglement_entropy(psi: &PureState) -> f64 {
    let reduced = psi.to_density().partial_trace_keep(0);
    let hermitian = (reduced + reduced.adjoint()) * C64::new(0.5, 0.0);
    entropy_of(hermitian.symmetric_eigenvalues().iter().copied())
}

/// Entanglement bookkeeping of Alice's measurement and the two entropy bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    /// Ground-state entanglement entropy (nats).
    pub s_ab: f64,
    /// Probabilities of `μ = +1, -1`.
    pub branch_probabilities: [f64; 2],
    /// Entanglement entropy of each post-measurement branch.
    pub branch_entropies: [f64; 2],
    /// `S_AB - Σ p_μ S_AB(μ)`.
    pub delta_s: f64,
    /// `arctan(k/h)`.
    pub xi: f64,
    /// Energy Bob receives, `-<E1>`.
    pub e_b: f64,
    /// Right-hand side of the entropy lower bound in terms of `E_B`.
    pub delta_s_lower_bound: f64,
    /// Lower bound on the maximal receivable energy from `ΔS_AB`.
    pub max_eb_lower_bound: f64,
}

impl EntropyReport {
    /// `ΔS_AB - bound`; nonnegative when the entropy bound holds.
    pub fn entropy_slack(&self) -> f64 {
        self.delta_s - self.delta_s_lower_bound
    }
}

pub fn entropy_report(params: &ModelParams) -> EntropyReport {
    let s_ab = entanglement_entropy(&ground_state(params));
    let branches = branch_vectors(params, None);
    let branch_probabilities = branches.map(|v| v.norm_squared());
    let branch_entropies =
        branches.map(|v| PureState::normalized(v).map_or(0.0, |psi| entanglement_entropy(&psi)));
    let delta_s = s_ab
        - branch_probabilities
            .iter()
            .zip(&branch_entropies)
            .map(|(p, s)| p * s)
            .sum::<f64>();

    let xi = (params.k / params.h).atan();
    let (sin_xi, cos_xi) = xi.sin_cos();
    let e_b = -analytic_e1(params);
    let norm = params.norm();

    let delta_s_lower_bound = (1.0 + sin_xi * sin_xi) / (2.0 * cos_xi.powi(3))
        * ((1.0 + cos_xi) / (1.0 - cos_xi)).ln()
        * e_b
        / norm;

    let cos2 = cos_xi * cos_xi;
    let denominator =
        (1.0 + cos_xi) * (2.0 / (1.0 + cos_xi)).ln() + (1.0 - cos_xi) * (2.0 / (1.0 - cos_xi)).ln();
    let max_eb_lower_bound =
        2.0 * norm * ((4.0 - 3.0 * cos2).sqrt() - 2.0 + cos2) * delta_s / denominator;

    EntropyReport {
        s_ab,
        branch_probabilities,
        branch_entropies,
        delta_s,
        xi,
        e_b,
        delta_s_lower_bound,
        max_eb_lower_bound,
    }
}

/// `<H1(t)>` under free evolution of `ρ_M` by `Htot`: `h²(1 - cos 4kt) / (2√(h²+k²))`.
pub fn free_evolution_h1(params: &ModelParams, t: f64) -> f64 {
    params.h * params.h * (1.0 - (4.0 * params.k * t).cos()) / (2.0 * params.norm())
}

/// `<V(t)>` under free evolution of `ρ_M`; identically zero.
pub fn free_evolution_v(_params: &ModelParams, _t: f64) -> f64 {
    0.0
}

/// `(<H1(t)>, <V(t)>)` from exact numerical evolution of `ρ_M`.
pub fn evolved_local_energies(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let hs = build_hamiltonians(params);
    let rho_t = evolve(&rho_measured(params), &hs.htot, t)?;
    Ok((expectation(&rho_t, &hs.h1)?, expectation(&rho_t, &hs.v)?))
}
