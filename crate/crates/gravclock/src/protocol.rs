//! The clock-synchronization protocol: Alice measures her clock in the dual
//! basis at an agreed proper time, Bob measures his at a time that is off by
//! an unknown offset δ (Planck units, `delta_p`), and the statistics of Bob's
//! dual-basis outcomes encode δ.
//!
//! Two conditioning conventions are provided. `Mode::Reduced` drops the phase
//! e^{−iε₁δ} that Alice's clock accrues between the nominally simultaneous
//! measurements, giving Bob's state amplitudes ∝ (ς, κ) with
//! ς = 2 + e^{−iε₂δ} + e^{−iε₂′δ} and κ = 2 − e^{−iε₂δ} − e^{−iε₂′δ}.
//! `Mode::Full` conditions the actual evolved joint state at t = δ and keeps
//! that phase. The two coincide exactly when ε₁δ ≡ 0 (mod 2π); elsewhere they
//! differ and the comparison report exposes the gap.

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{joint_state, ClockParams};
use crate::provenance;
use crate::qops::{Basis, Outcome, PureState};

/// How Bob's conditional state is formed after Alice's measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Closed-form conditional state with Alice's own dephasing dropped.
    Reduced,
    /// Conditioning of the actual joint state at t = δ.
    Full,
}

/// A dual-basis measurement outcome, for both Alice's conditioning and Bob's
/// readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualOutcome {
    Plus,
    Minus,
}

impl From<DualOutcome> for Outcome {
    fn from(o: DualOutcome) -> Outcome {
        match o {
            DualOutcome::Plus => Outcome::Plus,
            DualOutcome::Minus => Outcome::Minus,
        }
    }
}

/// Inputs of one protocol round.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProtocolConfig {
    pub params: ClockParams,
    /// Bob's timing offset in Planck units.
    pub delta_p: f64,
    pub mode: Mode,
    pub alice_outcome: DualOutcome,
}

impl ProtocolConfig {
    pub fn reduced(params: ClockParams, delta_p: f64) -> Self {
        ProtocolConfig {
            params,
            delta_p,
            mode: Mode::Reduced,
            alice_outcome: DualOutcome::Plus,
        }
    }

    pub fn full(params: ClockParams, delta_p: f64) -> Self {
        ProtocolConfig {
            params,
            delta_p,
            mode: Mode::Full,
            alice_outcome: DualOutcome::Plus,
        }
    }
}

/// Bob's post-conditioning state together with the probability of the Alice
/// outcome that produced it.
#[derive(Debug, Clone)]
pub struct ConditionalState {
    /// Dual-basis one-qubit state.
    pub state: PureState,
    pub alice_probability: f64,
}

/// Bob's conditional state for the given round configuration.
pub fn bob_conditional_state(cfg: &ProtocolConfig) -> Result<ConditionalState> {
    if !cfg.delta_p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta_p must be finite, got {}",
            cfg.delta_p
        )));
    }
    match cfg.mode {
        Mode::Reduced => {
            if cfg.alice_outcome != DualOutcome::Plus {
                return Err(Error::InvalidParameter(
                    "the reduced conditional state is defined for Alice outcome '+' only".into(),
                ));
            }
            let c = cfg.params.couplings();
            let e2 = num_complex::Complex64::from_polar(1.0, -cfg.params.eps2 * cfg.delta_p);
            let e2d = num_complex::Complex64::from_polar(1.0, -c.eps2_dilated * cfg.delta_p);
            let two = num_complex::Complex64::new(2.0, 0.0);
            let sigma = two + e2 + e2d;
            let kappa = two - e2 - e2d;
            // |ς|² + |κ|² = 12 + 4cos(ζ′δ); Alice sees '+' with that weight
            // out of the 16 carried by the joint dual quadruple.
            let norm_sq = sigma.norm_sqr() + kappa.norm_sqr();
            let state = PureState::normalized(vec![sigma, kappa], Basis::Dual)?;
            Ok(ConditionalState {
                state,
                alice_probability: norm_sq / 16.0,
            })
        }
        Mode::Full => {
            let joint = joint_state(&cfg.params, cfg.delta_p)?;
            let dual = joint.to_dual_basis()?;
            let (alice_probability, state) = dual.condition_on_first(cfg.alice_outcome.into())?;
            Ok(ConditionalState { state, alice_probability })
        }
    }
}

/// Probability that Bob's dual-basis measurement yields `outcome`, from the
/// closed form
///
/// ```text
/// P(±) = 1/2 ± ζ₂ [cos(ε₂δ_p) + cos((ε₂ − ζ′)δ_p)],   ζ₂ = 1/(3 + cos(ζ′δ_p))
/// ```
///
/// (the Born probabilities of the reduced conditional state).
pub fn bob_probability(params: &ClockParams, delta_p: f64, outcome: DualOutcome) -> f64 {
    let c = params.couplings();
    let weight = c.born_weight(delta_p);
    let osc = (params.eps2 * delta_p).cos() + (c.eps2_dilated * delta_p).cos();
    match outcome {
        DualOutcome::Plus => 0.5 + weight * osc,
        DualOutcome::Minus => 0.5 - weight * osc,
    }
}

/// Per-mode outcome summary used by [`ModeComparison`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeReport {
    pub p_plus: f64,
    pub p_minus: f64,
    pub alice_probability: f64,
}

/// Side-by-side evaluation of the two conditioning modes at one offset,
/// including the fidelity between the two conditional states.
#[derive(Debug, Clone, Serialize)]
pub struct ModeComparison {
    pub delta_p: f64,
    pub reduced: ModeReport,
    pub full: ModeReport,
    /// |⟨ψ_reduced|ψ_full⟩|²; 1 exactly when ε₁δ_p ≡ 0 (mod 2π).
    pub fidelity: f64,
}

pub fn compare_modes(params: &ClockParams, delta_p: f64) -> Result<ModeComparison> {
    let reduced = bob_conditional_state(&ProtocolConfig::reduced(*params, delta_p))?;
    let full = bob_conditional_state(&ProtocolConfig::full(*params, delta_p))?;
    let report = |c: &ConditionalState| -> Result<ModeReport> {
        let (p_plus, p_minus) = c.state.born_probabilities(Basis::Dual)?;
        Ok(ModeReport {
            p_plus,
            p_minus,
            alice_probability: c.alice_probability,
        })
    };
    Ok(ModeComparison {
        delta_p,
        reduced: report(&reduced)?,
        full: report(&full)?,
        fidelity: reduced.state.fidelity(&full.state)?,
    })
}

/// Outcome counts of `n` independent protocol rounds at a fixed offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub n: u64,
    pub k_plus: u64,
    pub seed: u64,
    /// Digest of (params, delta_p, n, seed) identifying the generating
    /// configuration.
    pub config_hash: String,
}

/// Draws `n` Bernoulli outcomes with the closed-form `P(+)` using a ChaCha8
/// generator seeded with `seed`. Identical inputs give identical records.
pub fn sample_outcomes(
    params: &ClockParams,
    delta_p: f64,
    n: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if !delta_p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta_p must be finite, got {delta_p}"
        )));
    }
    // Rounding can push the closed form a few ulp outside [0, 1].
    let p_plus = bob_probability(params, delta_p, DualOutcome::Plus).clamp(0.0, 1.0);
    let dist = Bernoulli::new(p_plus)
        .map_err(|e| Error::NumericalFailure(format!("invalid Bernoulli probability: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k_plus = 0u64;
    for _ in 0..n {
        if dist.sample(&mut rng) {
            k_plus += 1;
        }
    }
    Ok(MeasurementRecord {
        n,
        k_plus,
        seed,
        config_hash: provenance::config_digest(&(params, delta_p, n, seed)),
    })
}

/// Seed for replicate `replicate` of an experiment with base seed
/// `base_seed`: `splitmix64(base_seed XOR (replicate · 0x9E3779B97F4A7C15))`.
/// Fixed across versions so recorded seeds stay reproducible.
pub fn replicate_seed(base_seed: u64, replicate: u64) -> u64 {
    splitmix64(base_seed ^ replicate.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Closed search interval for the offset estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "window [{lo}, {hi}] must be a finite nonempty interval"
            )));
        }
        Ok(Window { lo, hi })
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

/// One period of Bob's fastest oscillation: [0, 2π/ε₂].
pub fn default_window(params: &ClockParams) -> Window {
    Window {
        lo: 0.0,
        hi: 2.0 * std::f64::consts::PI / params.eps2,
    }
}

/// Maximum-likelihood estimate of the offset from a measurement record.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub delta_hat: f64,
    pub window: Window,
    /// Binomial log-likelihood at the estimate.
    pub log_likelihood: f64,
    /// 1/√(n·F_c(δ̂)); `None` where the classical Fisher information
    /// vanishes.
    pub stderr_cr: Option<f64>,
    pub grid_step: f64,
}

/// Grid size used by [`estimate_delta`].
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Refinement stops when the bracket shrinks below this fraction of the
/// window width.
const REFINE_RTOL: f64 = 1e-10;

/// Probabilities are clamped here before taking logs so impossible outcomes
/// stay representable.
const LOG_FLOOR: f64 = 1e-300;

/// Maximizes the binomial log-likelihood
/// `k·ln P₊(δ) + (n−k)·ln P₋(δ)` over `window` on a uniform grid of
/// [`DEFAULT_GRID_POINTS`] points followed by golden-section refinement.
/// Ties resolve toward the smallest δ.
pub fn estimate_delta(
    record: &MeasurementRecord,
    params: &ClockParams,
    window: Window,
) -> Result<EstimateReport> {
    estimate_delta_with(record, params, window, DEFAULT_GRID_POINTS)
}

/// [`estimate_delta`] with an explicit grid size (at least 3 points).
pub fn estimate_delta_with(
    record: &MeasurementRecord,
    params: &ClockParams,
    window: Window,
    grid_points: usize,
) -> Result<EstimateReport> {
    if record.n == 0 {
        return Err(Error::InvalidParameter("record contains no outcomes".into()));
    }
    if record.k_plus > record.n {
        return Err(Error::InvalidParameter(format!(
            "k_plus = {} exceeds n = {}",
            record.k_plus, record.n
        )));
    }
    if grid_points < 3 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 3 points, got {grid_points}"
        )));
    }
    let k = record.k_plus as f64;
    let n_minus_k = (record.n - record.k_plus) as f64;
    let ll = |delta: f64| -> f64 {
        let p_plus = bob_probability(params, delta, DualOutcome::Plus).clamp(0.0, 1.0);
        k * p_plus.max(LOG_FLOOR).ln() + n_minus_k * (1.0 - p_plus).max(LOG_FLOOR).ln()
    };

    let step = window.width() / (grid_points - 1) as f64;
    let grid_x = |i: usize| window.lo + i as f64 * step;
    let mut best_i = 0usize;
    let mut best_ll = f64::NEG_INFINITY;
    let mut min_ll = f64::INFINITY;
    for i in 0..grid_points {
        let v = ll(grid_x(i));
        // Strict inequality keeps the earliest (smallest-δ) maximizer.
        if v > best_ll {
            best_ll = v;
            best_i = i;
        }
        min_ll = min_ll.min(v);
    }
    if best_ll - min_ll <= 1e-12 * (1.0 + best_ll.abs()) {
        return Err(Error::FlatLikelihood);
    }

    let bracket_lo = grid_x(best_i.saturating_sub(1));
    let bracket_hi = grid_x((best_i + 1).min(grid_points - 1));
    let refined = golden_section_max(&ll, bracket_lo, bracket_hi, REFINE_RTOL * window.width());
    let refined_ll = ll(refined);

    // Prefer the refined point only when it is strictly better; on a tie the
    // smaller offset wins.
    let (delta_hat, log_likelihood) = if refined_ll > best_ll
        || (refined_ll == best_ll && refined < grid_x(best_i))
    {
        (refined, refined_ll)
    } else {
        (grid_x(best_i), best_ll)
    };

    let fisher = crate::metrology::classical_fisher(params, delta_hat);
    let stderr_cr = if fisher > 0.0 && fisher.is_finite() {
        Some((record.n as f64 * fisher).sqrt().recip())
    } else {
        None
    };

    Ok(EstimateReport {
        delta_hat,
        window,
        log_likelihood,
        stderr_cr,
        grid_step: step,
    })
}

/// Golden-section maximization on [a, b]; assumes the bracket is small enough
/// that local unimodality holds. Ties move the bracket left.
fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
