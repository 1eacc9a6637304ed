//! Exact fixed-dimension complex linear algebra for one- and two-qubit pure
//! states: tensor products, diagonal phase evolution, Hadamard basis changes,
//! projective conditioning, reduced densities, Born probabilities, and
//! concurrence.
//!
//! Amplitudes are ordered `(00, 01, 10, 11)` with the first qubit's index in
//! the high bit. The dual basis is the Hadamard basis `|±⟩ = (|0⟩ ± |1⟩)/√2`,
//! in ordering `(++, +−, −+, −−)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for the unit-norm invariant of [`PureState`].
pub const NORM_TOL: f64 = 1e-12;

/// Conditioning on an outcome with probability at or below this threshold is
/// rejected: the collapsed state would be dominated by rounding noise.
pub const MIN_CONDITION_PROBABILITY: f64 = 1e-15;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-10;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Measurement/representation basis for qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Energy eigenbasis `{|0⟩, |1⟩}`.
    Computational,
    /// Hadamard basis `{|+⟩, |−⟩}`.
    Dual,
}

/// Single-qubit measurement outcome. `Zero`/`One` belong to the
/// computational basis, `Plus`/`Minus` to the dual basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Zero,
    One,
    Plus,
    Minus,
}

impl Outcome {
    pub fn basis(self) -> Basis {
        match self {
            Outcome::Zero | Outcome::One => Basis::Computational,
            Outcome::Plus | Outcome::Minus => Basis::Dual,
        }
    }

    fn index(self) -> usize {
        match self {
            Outcome::Zero | Outcome::Plus => 0,
            Outcome::One | Outcome::Minus => 1,
        }
    }
}

/// Which qubit a reduced density matrix keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Normalized pure state of one qubit (2 amplitudes) or two qubits
/// (4 amplitudes), tagged with the basis its amplitudes refer to.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    basis: Basis,
}

impl PureState {
    /// Builds a state from amplitudes that must already be normalized to
    /// within [`NORM_TOL`].
    pub fn new(amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidDimension(dim));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let deviation = (norm_sq - 1.0).abs();
        if !deviation.is_finite() || deviation > NORM_TOL {
            return Err(Error::NotNormalized(deviation));
        }
        Ok(PureState { amplitudes, basis })
    }

    /// Builds a state from unnormalized amplitudes, dividing out the norm.
    pub fn normalized(amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidDimension(dim));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || norm_sq <= MIN_CONDITION_PROBABILITY {
            return Err(Error::NotNormalized(norm_sq));
        }
        let inv = norm_sq.sqrt().recip();
        PureState::new(amplitudes.into_iter().map(|a| a * inv).collect(), basis)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// ⟨self|other⟩. Both states must share dimension and basis.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidDimension(other.dim()));
        }
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(
                "inner product requires both states in the same basis".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Multiplies amplitude `k` by `e^{−i·phases[k]}`. Phase evolution is
    /// diagonal in the computational basis, so the state must be in it.
    pub fn apply_diagonal_phases(&self, phases: &[f64]) -> Result<PureState> {
        if self.basis != Basis::Computational {
            return Err(Error::BasisMismatch(
                "diagonal phases act in the computational basis".into(),
            ));
        }
        if phases.len() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "{} phases supplied for a {}-amplitude state",
                phases.len(),
                self.dim()
            )));
        }
        if let Some(p) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite phase {p}")));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(phases)
            .map(|(a, &p)| a * Complex64::from_polar(1.0, -p))
            .collect();
        PureState::new(amplitudes, self.basis)
    }

    /// Applies a Hadamard to every qubit, re-expressing the state in the dual
    /// basis. Norm-preserving and self-inverse up to the basis tag.
    pub fn to_dual_basis(&self) -> Result<PureState> {
        if self.basis != Basis::Computational {
            return Err(Error::BasisMismatch("state is already in the dual basis".into()));
        }
        PureState::new(hadamard_all(&self.amplitudes), Basis::Dual)
    }

    /// Inverse of [`to_dual_basis`](Self::to_dual_basis).
    pub fn to_computational_basis(&self) -> Result<PureState> {
        if self.basis != Basis::Dual {
            return Err(Error::BasisMismatch(
                "state is already in the computational basis".into(),
            ));
        }
        PureState::new(hadamard_all(&self.amplitudes), Basis::Computational)
    }

    /// Projects the first qubit of a two-qubit state onto `outcome` and
    /// returns `(probability, collapsed one-qubit state)`. The outcome's
    /// basis must match the representation basis; the collapsed state keeps
    /// it.
    pub fn condition_on_first(&self, outcome: Outcome) -> Result<(f64, PureState)> {
        if self.dim() != 4 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        if outcome.basis() != self.basis {
            return Err(Error::BasisMismatch(format!(
                "outcome {outcome:?} does not belong to the state's basis {:?}",
                self.basis
            )));
        }
        let o = outcome.index();
        let kept = [self.amplitudes[2 * o], self.amplitudes[2 * o + 1]];
        let probability: f64 = kept.iter().map(|a| a.norm_sqr()).sum();
        if probability <= MIN_CONDITION_PROBABILITY {
            return Err(Error::ImpossibleOutcome(probability));
        }
        let inv = probability.sqrt().recip();
        let collapsed = PureState::new(vec![kept[0] * inv, kept[1] * inv], self.basis)?;
        Ok((probability, collapsed))
    }

    /// Partial trace of |ψ⟩⟨ψ| over the discarded qubit.
    pub fn reduced_density(&self, keep: Subsystem) -> Result<DensityMatrix> {
        if self.dim() != 4 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        let a = &self.amplitudes;
        let amp = |hi: usize, lo: usize| a[2 * hi + lo];
        let mut entries = vec![vec![Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = match keep {
                    Subsystem::First => (0..2).map(|b| amp(i, b) * amp(j, b).conj()).sum(),
                    Subsystem::Second => (0..2).map(|b| amp(b, i) * amp(b, j).conj()).sum(),
                };
            }
        }
        DensityMatrix::new(entries, self.basis)
    }

    /// Concurrence `2|a₀₀a₁₁ − a₀₁a₁₀|` of a two-qubit computational-basis
    /// state: 0 for product states, 1 for maximally entangled ones.
    pub fn concurrence(&self) -> Result<f64> {
        if self.dim() != 4 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        if self.basis != Basis::Computational {
            return Err(Error::BasisMismatch(
                "concurrence is evaluated on computational-basis amplitudes".into(),
            ));
        }
        let a = &self.amplitudes;
        Ok(2.0 * (a[0] * a[3] - a[1] * a[2]).norm())
    }

    /// Probabilities of the two outcomes of a one-qubit measurement in
    /// `basis`, converting representation first if necessary. Returned as
    /// `(p_zero_or_plus, p_one_or_minus)`.
    pub fn born_probabilities(&self, basis: Basis) -> Result<(f64, f64)> {
        if self.dim() != 2 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        let rep = if basis == self.basis {
            self.clone()
        } else {
            match basis {
                Basis::Dual => self.to_dual_basis()?,
                Basis::Computational => self.to_computational_basis()?,
            }
        };
        Ok((rep.amplitudes[0].norm_sqr(), rep.amplitudes[1].norm_sqr()))
    }
}

/// Kronecker product of two one-qubit states sharing a basis, in ordering
/// `(a₀b₀, a₀b₁, a₁b₀, a₁b₁)`.
pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    if a.dim() != 2 {
        return Err(Error::InvalidDimension(a.dim()));
    }
    if b.dim() != 2 {
        return Err(Error::InvalidDimension(b.dim()));
    }
    if a.basis != b.basis {
        return Err(Error::BasisMismatch(
            "tensor factors must share a basis".into(),
        ));
    }
    let (av, bv) = (&a.amplitudes, &b.amplitudes);
    PureState::new(
        vec![av[0] * bv[0], av[0] * bv[1], av[1] * bv[0], av[1] * bv[1]],
        a.basis,
    )
}

/// One Hadamard per qubit; the matrix is real and self-inverse, so the same
/// routine converts in both directions.
fn hadamard_all(a: &[Complex64]) -> Vec<Complex64> {
    match a.len() {
        2 => vec![(a[0] + a[1]) * FRAC_1_SQRT_2, (a[0] - a[1]) * FRAC_1_SQRT_2],
        4 => vec![
            (a[0] + a[1] + a[2] + a[3]) * 0.5,
            (a[0] - a[1] + a[2] - a[3]) * 0.5,
            (a[0] + a[1] - a[2] - a[3]) * 0.5,
            (a[0] - a[1] - a[2] + a[3]) * 0.5,
        ],
        n => unreachable!("PureState dimension {n} is validated at construction"),
    }
}

/// Validated density operator of one or two qubits: Hermitian, unit trace,
/// positive semidefinite (eigenvalues ≥ −1e-10).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: Vec<Vec<Complex64>>,
    basis: Basis,
}

impl DensityMatrix {
    pub fn new(entries: Vec<Vec<Complex64>>, basis: Basis) -> Result<Self> {
        let dim = entries.len();
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidDimension(dim));
        }
        if entries.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidDimension(dim));
        }
        let mut asymmetry: f64 = 0.0;
        for (i, row) in entries.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                asymmetry = asymmetry.max((cell - entries[j][i].conj()).norm());
            }
        }
        if !asymmetry.is_finite() || asymmetry > HERMITICITY_TOL {
            return Err(Error::NotHermitian(asymmetry));
        }
        let trace: f64 = (0..dim).map(|i| entries[i][i].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace((trace - 1.0).abs()));
        }
        let rho = DensityMatrix { entries, basis };
        let lambda_min = rho.min_eigenvalue();
        if lambda_min < EIGENVALUE_FLOOR {
            return Err(Error::NotPositive(lambda_min));
        }
        Ok(rho)
    }

    /// Rank-1 projector |ψ⟩⟨ψ|.
    pub fn from_pure(state: &PureState) -> Result<Self> {
        let a = state.amplitudes();
        let entries = a
            .iter()
            .map(|&ai| a.iter().map(|&aj| ai * aj.conj()).collect())
            .collect();
        DensityMatrix::new(entries, state.basis())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn entries(&self) -> &[Vec<Complex64>] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[i][i].re).sum()
    }

    /// tr ρ² — 1 for pure states, 1/dim for maximally mixed ones.
    pub fn purity(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.norm_sqr())
            .sum()
    }

    /// Smallest eigenvalue, via the real symmetric embedding
    /// `[[Re ρ, −Im ρ], [Im ρ, Re ρ]]` whose spectrum doubles ρ's.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let mut m = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = self.entries[i][j].re;
                m[i + n][j + n] = self.entries[i][j].re;
                m[i][j + n] = -self.entries[i][j].im;
                m[i + n][j] = self.entries[i][j].im;
            }
        }
        symmetric_eigenvalues(m)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
/// The matrices here are at most 8×8, where Jacobi converges in a few sweeps.
fn symmetric_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    let scale: f64 = m
        .iter()
        .flatten()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    for _ in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                for row in m.iter_mut() {
                    let (rp, rq) = (row[p], row[q]);
                    row[p] = c * rp - s * rq;
                    row[q] = s * rp + c * rq;
                }
                // p < q, so splitting at q leaves row p on the left.
                let (top, rest) = m.split_at_mut(q);
                for (mpk, mqk) in top[p].iter_mut().zip(rest[0].iter_mut()) {
                    let (vp, vq) = (*mpk, *mqk);
                    *mpk = c * vp - s * vq;
                    *mqk = s * vp + c * vq;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}
