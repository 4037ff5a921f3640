//! Single-qubit channels in Kraus form, local evolution of two-qubit states,
//! and the system-plus-environment dilation of amplitude damping.

use nalgebra::{Matrix2, SMatrix};
use num_complex::Complex64;

use crate::error::ChannelError;
use crate::state::{kron2, pauli, DensityMatrix4};

/// Allowed deviation of sum K^dag K (or K K^dag) from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-12;

pub type Matrix16 = SMatrix<Complex64, 16, 16>;

const C0: Complex64 = Complex64::new(0.0, 0.0);

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn max_abs<const R: usize, const C: usize>(m: &SMatrix<Complex64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damping factor exp(-kappa t / 2).
pub fn gamma_of_t(kappa: f64, t: f64) -> Result<f64, ChannelError> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(ChannelError::Domain {
            name: "kappa",
            value: kappa,
            domain: "[0, inf)",
        });
    }
    if t.is_nan() || t < 0.0 {
        return Err(ChannelError::Domain {
            name: "t",
            value: t,
            domain: "[0, inf]",
        });
    }
    if kappa == 0.0 {
        return Ok(1.0);
    }
    Ok((-0.5 * kappa * t).exp())
}

/// A trace-preserving single-qubit channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<Matrix2<Complex64>>,
}

impl KrausChannel {
    pub fn new(operators: Vec<Matrix2<Complex64>>) -> Result<Self, ChannelError> {
        if operators.is_empty() {
            return Err(ChannelError::Empty);
        }
        let sum: Matrix2<Complex64> = operators.iter().map(|k| k.adjoint() * k).sum();
        let dev = max_abs(&(sum - Matrix2::identity()));
        if dev > COMPLETENESS_TOL {
            return Err(ChannelError::NotTracePreserving(dev));
        }
        Ok(Self { operators })
    }

    pub fn identity() -> Self {
        Self {
            operators: vec![Matrix2::identity()],
        }
    }

    pub fn operators(&self) -> &[Matrix2<Complex64>] {
        &self.operators
    }

    /// Apply to a single-qubit density matrix.
    pub fn apply(&self, rho: &Matrix2<Complex64>) -> Matrix2<Complex64> {
        self.operators.iter().map(|k| k * rho * k.adjoint()).sum()
    }

    /// Channel `other` followed by `self`.
    pub fn after(&self, other: &KrausChannel) -> KrausChannel {
        let operators = self
            .operators
            .iter()
            .flat_map(|a| other.operators.iter().map(move |b| a * b))
            .collect();
        KrausChannel { operators }
    }
}

/// Amplitude damping with K0 = diag(1, gamma), K1 = sqrt(1 - gamma^2) |0><1|.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel, ChannelError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ChannelError::Domain {
            name: "gamma",
            value: gamma,
            domain: "[0, 1]",
        });
    }
    let c = (1.0 - gamma * gamma).sqrt();
    KrausChannel::new(vec![
        Matrix2::new(real(1.0), C0, C0, real(gamma)),
        Matrix2::new(C0, real(c), C0, C0),
    ])
}

/// Phase flip: sigma_z applied with probability p.
pub fn phase_flip(p: f64) -> Result<KrausChannel, ChannelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelError::Domain {
            name: "p",
            value: p,
            domain: "[0, 1]",
        });
    }
    KrausChannel::new(vec![
        Matrix2::identity() * real((1.0 - p).sqrt()),
        pauli(3) * real(p.sqrt()),
    ])
}

/// Whether the channel fixes the maximally mixed state.
pub fn is_unital(ch: &KrausChannel) -> bool {
    let sum: Matrix2<Complex64> = ch.operators.iter().map(|k| k * k.adjoint()).sum();
    max_abs(&(sum - Matrix2::identity())) <= COMPLETENESS_TOL
}

/// Independent local channels: sum_ij (K_i x K_j) rho (K_i x K_j)^dag.
pub fn apply_product_channel(rho: &DensityMatrix4, ch_a: &KrausChannel, ch_b: &KrausChannel) -> DensityMatrix4 {
    let mut out = nalgebra::Matrix4::zeros();
    for ka in &ch_a.operators {
        for kb in &ch_b.operators {
            let k = kron2(ka, kb);
            out += k * rho.0 * k.adjoint();
        }
    }
    DensityMatrix4(out)
}

/// A qubit of the four-qubit system-plus-environment register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
    EnvA,
    EnvB,
}

impl Subsystem {
    /// Bit position in the register index 8a + 4b + 2a' + b'.
    fn shift(self) -> usize {
        match self {
            Subsystem::A => 3,
            Subsystem::B => 2,
            Subsystem::EnvA => 1,
            Subsystem::EnvB => 0,
        }
    }
}

/// Density matrix of qubits ordered A, B, A', B'.
#[derive(Debug, Clone, PartialEq)]
pub struct FourQubitState(pub Box<Matrix16>);

impl FourQubitState {
    pub fn matrix(&self) -> &Matrix16 {
        &self.0
    }

    /// rho_AB tensor sigma_A'B'.
    pub fn product(rho: &DensityMatrix4, env: &DensityMatrix4) -> Self {
        Self(Box::new(Matrix16::from_fn(|i, j| rho.0[(i / 4, j / 4)] * env.0[(i % 4, j % 4)])))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (*self.0 * *self.0).trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(*self.0 - self.0.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (*self.0 + self.0.adjoint()) * real(0.5);
        nalgebra::SymmetricEigen::new(herm).eigenvalues.min()
    }
}

/// Two-qubit unitary on (system, environment) with index 2s + e:
/// |00> -> |00>, |10> -> g|10> + c|01>, |01> -> -c|10> + g|01>, |11> -> |11>.
fn damping_unitary(gamma: f64) -> nalgebra::Matrix4<Complex64> {
    let c = (1.0 - gamma * gamma).sqrt();
    let mut u = nalgebra::Matrix4::zeros();
    u[(0, 0)] = real(1.0);
    u[(2, 2)] = real(gamma);
    u[(1, 2)] = real(c);
    u[(2, 1)] = real(-c);
    u[(1, 1)] = real(gamma);
    u[(3, 3)] = real(1.0);
    u
}

/// Couple each qubit to its own vacuum environment with the damping unitary.
pub fn dilate_and_evolve(rho: &DensityMatrix4, gamma: f64) -> Result<FourQubitState, ChannelError> {
    dilate_and_evolve_pair(rho, gamma, gamma)
}

/// As [`dilate_and_evolve`] with separate damping on A and B.
pub fn dilate_and_evolve_pair(rho: &DensityMatrix4, gamma_a: f64, gamma_b: f64) -> Result<FourQubitState, ChannelError> {
    for g in [gamma_a, gamma_b] {
        if !(0.0..=1.0).contains(&g) {
            return Err(ChannelError::Domain {
                name: "gamma",
                value: g,
                domain: "[0, 1]",
            });
        }
    }
    let (va, vb) = (damping_unitary(gamma_a), damping_unitary(gamma_b));
    // U = V_AA' x V_BB' written in the A, B, A', B' ordering.
    let bits = |i: usize| ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
    let u = Matrix16::from_fn(|i, j| {
        let (a, b, ea, eb) = bits(i);
        let (a2, b2, ea2, eb2) = bits(j);
        va[(2 * a + ea, 2 * a2 + ea2)] * vb[(2 * b + eb, 2 * b2 + eb2)]
    });
    let vacuum = DensityMatrix4::diagonal([1.0, 0.0, 0.0, 0.0]);
    let initial = FourQubitState::product(rho, &vacuum);
    Ok(FourQubitState(Box::new(u * *initial.0 * u.adjoint())))
}

/// Reduced state of two qubits, in the order given by `keep`.
pub fn partial_trace(total: &FourQubitState, keep: &[Subsystem]) -> Result<DensityMatrix4, ChannelError> {
    let [first, second] = keep else {
        return Err(ChannelError::InvalidSubsystems);
    };
    if first == second {
        return Err(ChannelError::InvalidSubsystems);
    }
    let (s1, s2) = (first.shift(), second.shift());
    let traced: Vec<usize> = (0..4).filter(|&s| s != s1 && s != s2).collect();
    let index = |p: usize, q: usize, r: usize| (p << s1) | (q << s2) | ((r & 1) << traced[0]) | ((r >> 1) << traced[1]);
    let mut out = nalgebra::Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = C0;
            for r in 0..4 {
                acc += total.0[(index(i >> 1, i & 1, r), index(j >> 1, j & 1, r))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix4(out))
}

/// State of the two environment qubits after damping with factor `gamma`.
pub fn environment_state(rho: &DensityMatrix4, gamma: f64) -> Result<DensityMatrix4, ChannelError> {
    partial_trace(&dilate_and_evolve(rho, gamma)?, &[Subsystem::EnvA, Subsystem::EnvB])
}

/// System state after identical amplitude damping on both qubits.
pub fn system_state(rho: &DensityMatrix4, gamma: f64) -> Result<DensityMatrix4, ChannelError> {
    let ad = amplitude_damping(gamma)?;
    Ok(apply_product_channel(rho, &ad, &ad))
}
