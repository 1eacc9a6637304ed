//! Fisher-information analysis of the offset estimate: numerical quantum
//! Fisher information of the conditional-state family (ground truth), a
//! closed-form expression retained for cross-checking, the classical Fisher
//! information of the dual-basis measurement, and Cramér-Rao precision
//! bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ClockParams;
use crate::protocol::{bob_conditional_state, ProtocolConfig};

/// Relative tolerance used both for the Richardson step check inside
/// [`qfi_numerical`] and for the closed-form agreement test behind
/// [`MetrologyReport::discrepancy_flag`].
pub const DISCREPANCY_RTOL: f64 = 1e-6;

/// Default finite-difference step: 1e-6 scaled up when ε₂ < 1 so the phase
/// increment stays resolvable.
pub fn default_qfi_step(params: &ClockParams) -> f64 {
    1e-6 * (1.0 / params.eps2).max(1.0)
}

/// Quantum Fisher information of the δ-parametrized conditional-state family,
/// F = 4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²), with |∂ψ⟩ by central finite differences at
/// the default step. See [`qfi_numerical_with_step`].
pub fn qfi_numerical(params: &ClockParams, delta_p: f64) -> Result<f64> {
    qfi_numerical_with_step(params, delta_p, default_qfi_step(params))
}

/// [`qfi_numerical`] with an explicit step. The derivative is evaluated at
/// `step` and `step/2`; if the two second-order estimates disagree beyond
/// [`DISCREPANCY_RTOL`] the computation is rejected as a numerical failure
/// (step too small: cancellation; too large: truncation). Otherwise the
/// Richardson combination (4F₂ − F₁)/3 is returned.
pub fn qfi_numerical_with_step(params: &ClockParams, delta_p: f64, step: f64) -> Result<f64> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let f1 = qfi_central(params, delta_p, step)?;
    let f2 = qfi_central(params, delta_p, 0.5 * step)?;
    if (f1 - f2).abs() > DISCREPANCY_RTOL * f2.abs().max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "finite-difference estimates at steps {step:e} and {:e} disagree: {f1} vs {f2}",
            0.5 * step
        )));
    }
    Ok((4.0 * f2 - f1) / 3.0)
}

/// One central-difference QFI evaluation at a fixed step.
fn qfi_central(params: &ClockParams, delta_p: f64, step: f64) -> Result<f64> {
    let state_at = |d: f64| -> Result<Vec<num_complex::Complex64>> {
        let cond = bob_conditional_state(&ProtocolConfig::reduced(*params, d))?;
        Ok(cond.state.amplitudes().to_vec())
    };
    let psi = state_at(delta_p)?;
    let fwd = state_at(delta_p + step)?;
    let bwd = state_at(delta_p - step)?;
    let inv2h = 0.5 / step;
    let d: Vec<num_complex::Complex64> = fwd
        .iter()
        .zip(&bwd)
        .map(|(f, b)| (f - b) * inv2h)
        .collect();
    let dd: f64 = d.iter().map(|z| z.norm_sqr()).sum();
    let pd: num_complex::Complex64 = psi.iter().zip(&d).map(|(p, q)| p.conj() * q).sum();
    Ok(4.0 * (dd - pd.norm_sqr()))
}

/// Closed-form expression for the QFI,
///
/// ```text
/// (2c − 1)·[(2ε₂² − 2ε₂ζ′)c + ε₂² + (ε₂ − ζ′)²] / (3 + c),   c = cos(ζ′δ_p),
/// ```
///
/// evaluated literally. It agrees with [`qfi_numerical`] when
/// ζ′δ_p ≡ 0 (mod 2π) but departs elsewhere — it can even go negative, which
/// no Fisher information can. It is reported alongside the numerical value
/// with a discrepancy flag rather than silently corrected.
pub fn qfi_closed_form(params: &ClockParams, delta_p: f64) -> f64 {
    let cp = params.couplings();
    let c = (cp.coupling * delta_p).cos();
    let e2 = params.eps2;
    let e2d = cp.eps2_dilated;
    (2.0 * c - 1.0) * ((2.0 * e2 * e2 - 2.0 * e2 * cp.coupling) * c + e2 * e2 + e2d * e2d)
        / (3.0 + c)
}

/// Below this fraction of the total weight an outcome probability is treated
/// as a removable zero and [`classical_fisher`] switches to its analytic
/// limit.
const PROBABILITY_ZERO_RTOL: f64 = 1e-12;

/// Classical Fisher information of Bob's dual-basis outcome about δ_p,
/// F_c = (P₊′)²/(P₊P₋), with the analytic derivative of the outcome
/// probability.
///
/// Evaluation uses the cancellation-free decomposition (u = (ε₂+ε₂′)δ_p/2,
/// v = ζ′δ_p/2)
///
/// ```text
/// P± = N±/(N₊+N₋),   N± = sin²u + (cos u ± cos v)²,
/// ```
///
/// whose numerators are sums of squares. N± vanishes only to even order
/// (sin u and cos u ∓ cos v hit zero together), so each probability zero is
/// removable; there the two-sided limit of F_c is (ε₂+ε₂′)²/4 regardless of
/// which zero is approached, and that value is returned.
pub fn classical_fisher(params: &ClockParams, delta_p: f64) -> f64 {
    let cp = params.couplings();
    let du = 0.5 * (params.eps2 + cp.eps2_dilated);
    let dv = 0.5 * cp.coupling;
    let (su, cu) = (du * delta_p).sin_cos();
    let (sv, cv) = (dv * delta_p).sin_cos();

    let n_plus = su * su + (cu + cv) * (cu + cv);
    let n_minus = su * su + (cu - cv) * (cu - cv);
    let total = n_plus + n_minus;
    if n_plus.min(n_minus) <= PROBABILITY_ZERO_RTOL * total {
        return du * du;
    }

    let dn_plus = 2.0 * su * cu * du - 2.0 * (cu + cv) * (su * du + sv * dv);
    let dn_minus = 2.0 * su * cu * du - 2.0 * (cu - cv) * (su * du - sv * dv);
    let w = dn_plus * n_minus - n_plus * dn_minus;
    w * w / (total * total * n_plus * n_minus)
}

/// Cramér-Rao bound on the offset's standard deviation from `n` repetitions:
/// 1/√(n·fisher).
pub fn precision_bound(fisher: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "precision bound needs at least one repetition".into(),
        ));
    }
    if !fisher.is_finite() || fisher <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Fisher information must be positive, got {fisher}"
        )));
    }
    Ok((n as f64 * fisher).sqrt().recip())
}

/// All information quantities at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct MetrologyReport {
    /// Ground truth: finite-difference QFI of the conditional-state family.
    pub qfi_numerical: f64,
    /// Literal closed form; compare before trusting.
    pub qfi_closed_form: f64,
    pub classical_fisher: f64,
    /// Δδ = 1/√(n·qfi_numerical) — the quantum Cramér-Rao limit.
    pub delta_precision: f64,
    /// True iff |qfi_closed_form − qfi_numerical| > 1e-6·max(1, qfi_numerical).
    pub discrepancy_flag: bool,
    pub n: u64,
}

/// Evaluates every metrology quantity at (`params`, `delta_p`) for `n`
/// repetitions, using the default finite-difference step.
pub fn metrology_report(params: &ClockParams, delta_p: f64, n: u64) -> Result<MetrologyReport> {
    metrology_report_with_step(params, delta_p, n, default_qfi_step(params))
}

/// [`metrology_report`] with an explicit finite-difference step.
pub fn metrology_report_with_step(
    params: &ClockParams,
    delta_p: f64,
    n: u64,
    step: f64,
) -> Result<MetrologyReport> {
    let qfi = qfi_numerical_with_step(params, delta_p, step)?;
    if qfi < -1e-9 {
        return Err(Error::NumericalFailure(format!(
            "numerical QFI is negative beyond tolerance: {qfi}"
        )));
    }
    let closed = qfi_closed_form(params, delta_p);
    let fisher = classical_fisher(params, delta_p);
    Ok(MetrologyReport {
        qfi_numerical: qfi,
        qfi_closed_form: closed,
        classical_fisher: fisher,
        delta_precision: precision_bound(qfi.max(f64::MIN_POSITIVE), n)?,
        discrepancy_flag: (closed - qfi).abs() > DISCREPANCY_RTOL * qfi.max(1.0),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn params(eps1: f64, eps2: f64, xi: f64) -> ClockParams {
        ClockParams::new(eps1, eps2, xi).unwrap()
    }

    fn canonical() -> ClockParams {
        params(10.0, 10.0, 20.0)
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// Independent QFI reference: differentiating the normalized state
    /// (ς, κ)/√N by hand gives
    /// F = 4(ε₂² + ε₂′² + 2ε₂ε₂′cos(ζ′δ)) / (3 + cos(ζ′δ))².
    fn qfi_reference(p: &ClockParams, delta_p: f64) -> f64 {
        let c = p.couplings();
        let cos = (c.coupling * delta_p).cos();
        let e2 = p.eps2;
        let e2d = c.eps2_dilated;
        4.0 * (e2 * e2 + e2d * e2d + 2.0 * e2 * e2d * cos) / ((3.0 + cos) * (3.0 + cos))
    }

    #[test]
    fn qfi_matches_analytic_reference_on_generic_points() {
        for (p, dp) in [
            (canonical(), 0.37),
            (canonical(), 1.9),
            (params(3.0, 7.0, 11.0), 0.6),
            (params(0.5, 0.25, 2.0), 4.2),
            (params(0.0, 10.0, 5.0), 0.8),
        ] {
            let num = qfi_numerical(&p, dp).unwrap();
            let reference = qfi_reference(&p, dp);
            assert_close(num, reference, 1e-6 * reference.max(1.0));
        }
    }

    #[test]
    fn qfi_frozen_anchor_values() {
        // Flat limit: F = ε₂² for any offset.
        assert_close(qfi_numerical(&params(0.0, 10.0, 20.0), 0.9).unwrap(), 100.0, 1e-6);
        // Zero offset: F = (2ε₂ − ζ′)²/4.
        assert_close(qfi_numerical(&canonical(), 0.0).unwrap(), 56.25, 1e-6);
        // Half coupling period (ζ′δ = π): F = ζ′².
        assert_close(qfi_numerical(&canonical(), PI / 5.0).unwrap(), 25.0, 1e-6);
    }

    #[test]
    fn closed_form_frozen_values_and_agreement_domain() {
        assert_close(qfi_closed_form(&params(0.0, 10.0, 20.0), 0.9), 100.0, 1e-12);
        assert_close(qfi_closed_form(&canonical(), 0.0), 56.25, 1e-12);
        // Outside its domain the printed expression turns negative.
        assert_close(qfi_closed_form(&canonical(), PI / 5.0), -37.5, 1e-12);
        // Full coupling winding ζ′δ = 2π: agreement returns.
        let dp = 2.0 * PI / 5.0;
        assert_close(
            qfi_closed_form(&canonical(), dp),
            qfi_numerical(&canonical(), dp).unwrap(),
            1e-6,
        );
    }

    #[test]
    fn qfi_rejects_pathological_steps() {
        assert!(qfi_numerical_with_step(&canonical(), 0.3, 0.0).is_err());
        // A step near the cancellation floor must be detected, not returned.
        let r = qfi_numerical_with_step(&canonical(), 0.3, 1e-13);
        assert!(matches!(r, Err(Error::NumericalFailure(_))), "{r:?}");
    }

    #[test]
    fn classical_fisher_frozen_values() {
        assert_close(classical_fisher(&canonical(), PI / 10.0), 320.0 / 9.0, 1e-9);
        // Flat limit: the dual measurement saturates the QFI everywhere.
        let flat = params(0.0, 10.0, 20.0);
        for dp in [0.1, 0.9, 2.0, PI / 10.0] {
            assert_close(classical_fisher(&flat, dp), 100.0, 1e-9);
        }
    }

    #[test]
    fn classical_fisher_removable_zeros() {
        // At every probability zero the two-sided limit is (ε₂+ε₂′)²/4,
        // which is 56.25 at the canonical parameters.
        //
        // δ = 0 (P₊ = 1): exact at the point, regular branch just off it.
        assert_close(classical_fisher(&canonical(), 0.0), 56.25, 1e-12);
        assert_close(classical_fisher(&canonical(), 1e-6), 56.25, 1e-4 * 56.25);
        // Interior zero of P₋ at δ = 2π/5, where u = 3π and v = π meet with
        // cos u = cos v = −1.
        let dp = 2.0 * PI / 5.0;
        assert_close(classical_fisher(&canonical(), dp), 56.25, 1e-12);
        assert_close(
            classical_fisher(&canonical(), dp - 1e-5),
            56.25,
            1e-6 * 56.25,
        );
    }

    #[test]
    fn classical_fisher_never_exceeds_qfi() {
        // Deterministic pseudo-grid over parameters and offsets.
        let mut x = 0.123_f64;
        let mut next = || {
            x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0;
            x
        };
        for _ in 0..300 {
            let p = params(20.0 * next(), 0.5 + 19.5 * next(), 1.0 + 99.0 * next());
            let dp = 2.0 * PI * next();
            let fc = classical_fisher(&p, dp);
            let fq = qfi_reference(&p, dp);
            assert!(fc >= 0.0, "negative classical Fisher at {p:?}, {dp}");
            assert!(
                fc <= fq + 1e-9,
                "classical {fc} exceeds quantum {fq} at {p:?}, {dp}"
            );
        }
    }

    #[test]
    fn precision_bound_arithmetic() {
        assert_close(precision_bound(100.0, 1).unwrap(), 0.1, 1e-15);
        assert_close(precision_bound(56.25, 4).unwrap(), 1.0 / 15.0, 1e-15);
        assert!(precision_bound(0.0, 5).is_err());
        assert!(precision_bound(-3.0, 5).is_err());
        assert!(precision_bound(100.0, 0).is_err());
    }

    #[test]
    fn report_flags_the_closed_form_departure() {
        let at_gap = metrology_report(&canonical(), PI / 5.0, 1).unwrap();
        assert!(at_gap.discrepancy_flag);
        assert_close(at_gap.qfi_numerical, 25.0, 1e-6);
        assert_close(at_gap.qfi_closed_form, -37.5, 1e-12);
        assert_close(at_gap.delta_precision, 0.2, 1e-7);

        let at_zero = metrology_report(&canonical(), 0.0, 4).unwrap();
        assert!(!at_zero.discrepancy_flag);
        assert_close(at_zero.delta_precision, 1.0 / 15.0, 1e-7);
        assert!(at_zero.classical_fisher <= at_zero.qfi_numerical + 1e-9);
    }
}
