//! Joint evolution of two gravitationally coupled two-level clocks held by
//! Alice and Bob, in dimensionless Planck units.
//!
//! Both clocks start in |+⟩. Each runs at its own gap rate, and the gravity
//! of clock A's excited level shifts clock B's rate: the |11⟩ branch
//! accumulates phase at ε₁ + ε₂′ with ε₂′ = ε₂(1 − ε₁/ξ). The resulting
//! conditional phase ζ′·t, ζ′ = ε₁ε₂/ξ, is what entangles the pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qops::{Basis, DensityMatrix, PureState};

/// Dimensionless clock parameters: gap rates ε₁ ≥ 0, ε₂ > 0 and separation
/// ξ > 0, all in Planck units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClockParams")]
pub struct ClockParams {
    pub eps1: f64,
    pub eps2: f64,
    pub xi: f64,
}

#[derive(Deserialize)]
struct RawClockParams {
    eps1: f64,
    eps2: f64,
    xi: f64,
}

impl TryFrom<RawClockParams> for ClockParams {
    type Error = Error;
    fn try_from(raw: RawClockParams) -> Result<Self> {
        ClockParams::new(raw.eps1, raw.eps2, raw.xi)
    }
}

impl ClockParams {
    pub fn new(eps1: f64, eps2: f64, xi: f64) -> Result<Self> {
        if !eps1.is_finite() || eps1 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eps1 must be finite and nonnegative, got {eps1}"
            )));
        }
        if !eps2.is_finite() || eps2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eps2 must be finite and positive, got {eps2}"
            )));
        }
        if !xi.is_finite() || xi <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "xi must be finite and positive, got {xi}"
            )));
        }
        Ok(ClockParams { eps1, eps2, xi })
    }

    pub fn couplings(&self) -> Couplings {
        let coupling = self.eps1 * self.eps2 / self.xi;
        Couplings {
            coupling,
            eps2_dilated: self.eps2 - coupling,
        }
    }
}

/// Quantities derived from [`ClockParams`] that govern the coupled dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Couplings {
    /// Gravitational phase coupling ζ′ = ε₁ε₂/ξ.
    pub coupling: f64,
    /// Bob's dilated gap rate ε₂′ = ε₂ − ζ′ = ε₂(1 − ε₁/ξ).
    pub eps2_dilated: f64,
}

impl Couplings {
    /// Normalization weight 1/(3 + cos(ζ′δ_p)) of the dual-basis outcome
    /// probabilities. Bounded in [1/4, 1/2]; the same dimensionless value
    /// whether the argument is written in SI or Planck form.
    pub fn born_weight(&self, delta_p: f64) -> f64 {
        (3.0 + (self.coupling * delta_p).cos()).recip()
    }
}

/// Joint state after coordinate time `t`, in the computational basis:
/// amplitudes ½·(1, e^{−iε₂t}, e^{−iε₁t}, e^{−i(ε₁+ε₂′)t}) over
/// (00, 01, 10, 11).
pub fn joint_state(params: &ClockParams, t: f64) -> Result<PureState> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let c = params.couplings();
    let phases = [
        0.0,
        params.eps2 * t,
        params.eps1 * t,
        (params.eps1 + c.eps2_dilated) * t,
    ];
    let amplitudes = phases
        .iter()
        .map(|&p| Complex64::from_polar(0.5, -p))
        .collect();
    PureState::new(amplitudes, Basis::Computational)
}

/// The same state as a dual-basis density matrix, built directly from the
/// closed-form quadruple
///
/// ```text
/// β = 1 + e₁ + e₂ + e₁e₂′      η = 1 − e₁ + e₂ − e₁e₂′
/// α = 1 + e₁ − e₂ − e₁e₂′      γ = 1 − e₁ − e₂ + e₁e₂′
/// ```
///
/// with eᵢ = e^{−iεᵢt}, e₂′ = e^{−iε₂′t}: ρ = (1/16)·v v†, v = (β, α, η, γ)
/// over (++, +−, −+, −−). Independent of [`joint_state`] plus a basis
/// change, and equal to it.
pub fn dual_joint_density(params: &ClockParams, t: f64) -> Result<DensityMatrix> {
    let (beta, alpha, eta, gamma) = dual_quadruple(params, t)?;
    let v = [beta, alpha, eta, gamma];
    let entries = v
        .iter()
        .map(|&vi| v.iter().map(|&vj| vi * vj.conj() / 16.0).collect())
        .collect();
    DensityMatrix::new(entries, Basis::Dual)
}

/// The unnormalized dual-basis amplitude quadruple (β, α, η, γ);
/// Σ|·|² = 16.
pub fn dual_quadruple(
    params: &ClockParams,
    t: f64,
) -> Result<(Complex64, Complex64, Complex64, Complex64)> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let c = params.couplings();
    let e1 = Complex64::from_polar(1.0, -params.eps1 * t);
    let e2 = Complex64::from_polar(1.0, -params.eps2 * t);
    let e2d = Complex64::from_polar(1.0, -c.eps2_dilated * t);
    let e12 = e1 * e2d;
    let one = Complex64::new(1.0, 0.0);
    Ok((
        one + e1 + e2 + e12,
        one + e1 - e2 - e12,
        one - e1 + e2 - e12,
        one - e1 - e2 + e12,
    ))
}

/// Concurrence of the joint state in closed form: |sin(ζ′t/2)|.
pub fn concurrence_closed_form(params: &ClockParams, t: f64) -> f64 {
    (0.5 * params.couplings().coupling * t).sin().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{tensor_product, Subsystem};

    const PI: f64 = std::f64::consts::PI;
    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn params(eps1: f64, eps2: f64, xi: f64) -> ClockParams {
        ClockParams::new(eps1, eps2, xi).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn couplings_known_values() {
        let c = params(10.0, 10.0, 20.0).couplings();
        assert_close(c.coupling, 5.0, 1e-14);
        assert_close(c.eps2_dilated, 5.0, 1e-14);

        // At xi = eps1 the dilation cancels Bob's gap entirely.
        let c = params(10.0, 10.0, 10.0).couplings();
        assert_close(c.coupling, 10.0, 1e-14);
        assert_close(c.eps2_dilated, 0.0, 1e-14);
    }

    #[test]
    fn coupling_identities_hold_for_generic_parameters() {
        for (e1, e2, xi) in [(3.0, 7.0, 11.0), (0.0, 2.0, 5.0), (12.5, 0.3, 400.0)] {
            let p = params(e1, e2, xi);
            let c = p.couplings();
            // eps2_dilated = eps2 − coupling exactly, and the product form
            // eps2(1 − eps1/xi) agrees.
            assert_close(c.eps2_dilated, p.eps2 - c.coupling, 0.0);
            assert_close(c.eps2_dilated, p.eps2 * (1.0 - p.eps1 / p.xi), 1e-12 * p.eps2.max(1.0));
            for dp in [0.0, 0.3, 2.0, 17.0] {
                let w = c.born_weight(dp);
                assert!((0.25..=0.5).contains(&w), "born weight {w} out of range");
            }
        }
    }

    #[test]
    fn joint_state_at_canonical_point() {
        // eps1 = eps2 = 10, xi = 20, t = pi/10: phases (0, π, π, 3π/2).
        let s = joint_state(&params(10.0, 10.0, 20.0), PI / 10.0).unwrap();
        let expect = [
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.5),
        ];
        for (got, want) in s.amplitudes().iter().zip(&expect) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn joint_state_at_time_zero_is_all_plus() {
        let s = joint_state(&params(7.0, 3.0, 50.0), 0.0).unwrap();
        for a in s.amplitudes() {
            assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert_close(s.concurrence().unwrap(), 0.0, 1e-15);
    }

    #[test]
    fn flat_spacetime_factorizes() {
        // eps1 = 0 removes the coupling: the state stays a product for all t.
        let p = params(0.0, 10.0, 20.0);
        for t in [0.1, 0.5, 2.0, 13.0] {
            let s = joint_state(&p, t).unwrap();
            assert_close(s.concurrence().unwrap(), 0.0, 1e-12);
            assert_close(concurrence_closed_form(&p, t), 0.0, 1e-15);
        }
    }

    #[test]
    fn large_separation_approaches_product_of_free_clocks() {
        // At ξ = 1e12 the residual coupling phase ζ′t ~ 1e-10 is the only
        // deviation from two freely running clocks.
        let p = params(10.0, 10.0, 1e12);
        let t = 0.7;
        let clock = |eps: f64| {
            PureState::new(
                vec![
                    Complex64::new(FRAC_1_SQRT_2, 0.0),
                    Complex64::from_polar(FRAC_1_SQRT_2, -eps * t),
                ],
                Basis::Computational,
            )
            .unwrap()
        };
        let product = tensor_product(&clock(p.eps1), &clock(p.eps2)).unwrap();
        let s = joint_state(&p, t).unwrap();
        for (a, b) in s.amplitudes().iter().zip(product.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn conditional_phase_structure() {
        // a₀₀a₁₁ = a₀₁a₁₀ · e^{−i(φ₁₁−φ₀₁−φ₁₀)} with φ₁₁ = φ₀₁ + φ₁₀ − ζ′t:
        // the |11⟩ amplitude lags the product of single-excitation phases by
        // exactly the conditional phase.
        for (e1, e2, xi, t) in [
            (10.0, 10.0, 20.0, PI / 10.0),
            (3.0, 7.0, 11.0, 0.9),
            (1.5, 2.5, 4.0, 5.0),
        ] {
            let p = params(e1, e2, xi);
            let zp = p.couplings().coupling;
            let a = joint_state(&p, t).unwrap().amplitudes().to_vec();
            let lhs = a[1] * a[2];
            let rhs = a[0] * a[3] * Complex64::from_polar(1.0, -zp * t);
            assert!((lhs - rhs).norm() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn dual_quadruple_at_canonical_point() {
        let (beta, alpha, eta, gamma) =
            dual_quadruple(&params(10.0, 10.0, 20.0), PI / 10.0).unwrap();
        let expect = [
            (beta, Complex64::new(-1.0, 1.0)),
            (alpha, Complex64::new(1.0, -1.0)),
            (eta, Complex64::new(1.0, -1.0)),
            (gamma, Complex64::new(3.0, 1.0)),
        ];
        for (got, want) in expect {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        let total = beta.norm_sqr() + alpha.norm_sqr() + eta.norm_sqr() + gamma.norm_sqr();
        assert_close(total, 16.0, 1e-12);
    }

    #[test]
    fn dual_density_matches_transformed_state() {
        // Route A: closed-form quadruple → ρ. Route B: evolve, Hadamard both
        // qubits, form the projector. Entrywise agreement.
        for (e1, e2, xi, t) in [
            (10.0, 10.0, 20.0, PI / 10.0),
            (4.0, 9.0, 33.0, 1.7),
            (0.0, 5.0, 8.0, 0.4),
        ] {
            let p = params(e1, e2, xi);
            let rho = dual_joint_density(&p, t).unwrap();
            let dual_state = joint_state(&p, t).unwrap().to_dual_basis().unwrap();
            let oracle = DensityMatrix::from_pure(&dual_state).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let d = (rho.entry(i, j) - oracle.entry(i, j)).norm();
                    assert!(d < 1e-12, "entry ({i},{j}) differs by {d}");
                }
            }
        }
    }

    #[test]
    fn concurrence_closed_form_matches_state_route() {
        for (e1, e2, xi, t) in [
            (10.0, 10.0, 20.0, PI / 10.0),
            (10.0, 10.0, 10.0, PI / 10.0),
            (6.0, 2.0, 7.0, 3.3),
        ] {
            let p = params(e1, e2, xi);
            let from_state = joint_state(&p, t).unwrap().concurrence().unwrap();
            assert_close(concurrence_closed_form(&p, t), from_state, 1e-12);
        }
        // Canonical value √2/2 at the quarter-period of the coupling.
        assert_close(
            concurrence_closed_form(&params(10.0, 10.0, 20.0), PI / 10.0),
            std::f64::consts::FRAC_1_SQRT_2,
            1e-12,
        );
    }

    #[test]
    fn concurrence_periodicity_and_maximum() {
        let p = params(10.0, 10.0, 10.0); // ζ′ = 10
        let period = 2.0 * PI / 10.0;
        for t in [0.05, 0.11, 0.29] {
            assert_close(
                concurrence_closed_form(&p, t + period),
                concurrence_closed_form(&p, t),
                1e-12,
            );
        }
        // Maximal entanglement at the half-period.
        let s = joint_state(&p, PI / 10.0).unwrap();
        assert_close(s.concurrence().unwrap(), 1.0, 1e-12);
        assert_close(
            s.reduced_density(Subsystem::First).unwrap().purity(),
            0.5,
            1e-12,
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ClockParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(ClockParams::new(1.0, 0.0, 1.0).is_err());
        assert!(ClockParams::new(1.0, 1.0, -2.0).is_err());
        assert!(ClockParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(joint_state(&params(1.0, 1.0, 1.0), f64::INFINITY).is_err());
    }
}
