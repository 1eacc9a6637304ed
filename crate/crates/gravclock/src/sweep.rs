//! Deterministic parameter sweeps and Monte Carlo estimation experiments.
//!
//! A sweep is a rectangular grid: one swept axis (major row order), one
//! family of series values (minor row order), and fixed values for the rest.
//! Each kind produces a fixed column layout independent of which parameter
//! plays which role, so downstream consumers never guess at the schema.
//! Tables carry provenance metadata and serialize to CSV or JSON with
//! shortest round-trip number formatting, making repeated runs byte-identical
//! regardless of the execution strategy.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_collect;
use crate::metrology::{
    self, classical_fisher, metrology_report, precision_bound, qfi_closed_form,
    MetrologyReport,
};
use crate::model::{concurrence_closed_form, joint_state, ClockParams};
use crate::protocol::{
    default_window, estimate_delta_with, replicate_seed, sample_outcomes, DualOutcome,
    Window, DEFAULT_GRID_POINTS,
};
use crate::provenance;
use crate::qops::Subsystem;

/// What a sweep evaluates at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Bob's dual-basis outcome probabilities.
    Probability,
    /// Quantum and classical Fisher information.
    Qfi,
    /// Concurrence and reduced-state purity of the evolving joint state.
    Entanglement,
}

/// A sweepable quantity. `Time` is the evolution time of an entanglement
/// sweep, serialized as `"t"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    Eps1,
    Eps2,
    Xi,
    #[serde(rename = "t")]
    Time,
}

impl std::fmt::Display for ParamName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ParamName::Eps1 => "eps1",
            ParamName::Eps2 => "eps2",
            ParamName::Xi => "xi",
            ParamName::Time => "t",
        };
        f.write_str(s)
    }
}

/// The swept axis: an inclusive uniform grid from `lo` to `hi`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: ParamName,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl AxisSpec {
    /// Grid values lo, lo+step, …; the last point lands on `hi` up to
    /// rounding of the step count.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

/// The per-curve parameter, one curve per value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub name: ParamName,
    pub values: Vec<f64>,
}

/// Full description of one sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Values for every parameter that is neither the axis nor the series.
    #[serde(default)]
    pub fixed: BTreeMap<ParamName, f64>,
    pub axis: AxisSpec,
    pub series: SeriesSpec,
    /// Measurement offset for probability and Fisher-information sweeps.
    #[serde(default)]
    pub delta_p: Option<f64>,
    /// Finite-difference step override for QFI sweeps.
    #[serde(default)]
    pub qfi_step: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.axis.step.is_finite() && self.axis.step > 0.0) {
            return invalid(format!("axis step must be positive, got {}", self.axis.step));
        }
        if !(self.axis.lo.is_finite() && self.axis.hi.is_finite() && self.axis.lo < self.axis.hi)
        {
            return invalid(format!(
                "axis range [{}, {}] must be a finite nonempty interval",
                self.axis.lo, self.axis.hi
            ));
        }
        if self.series.values.is_empty() {
            return invalid("series needs at least one value".into());
        }
        if self.series.values.iter().any(|v| !v.is_finite()) {
            return invalid("series values must be finite".into());
        }
        if self.axis.name == self.series.name {
            return invalid(format!("axis and series both sweep {}", self.axis.name));
        }
        for role in [self.axis.name, self.series.name] {
            if self.fixed.contains_key(&role) {
                return invalid(format!("{role} is swept and fixed at the same time"));
            }
        }
        if let Some(v) = self.fixed.values().find(|v| !v.is_finite()) {
            return invalid(format!("fixed values must be finite, got {v}"));
        }
        let have = |name: ParamName| {
            self.axis.name == name || self.series.name == name || self.fixed.contains_key(&name)
        };
        let needs_time = self.kind == SweepKind::Entanglement;
        for required in [ParamName::Eps1, ParamName::Eps2, ParamName::Xi] {
            if !have(required) {
                return invalid(format!("sweep does not determine {required}"));
            }
        }
        if needs_time && !have(ParamName::Time) {
            return invalid("entanglement sweep does not determine t".into());
        }
        if !needs_time && have(ParamName::Time) {
            return invalid("t only applies to entanglement sweeps".into());
        }
        match self.delta_p {
            None if !needs_time => {
                return invalid(format!("{:?} sweep requires delta_p", self.kind));
            }
            Some(d) if !d.is_finite() => {
                return invalid(format!("delta_p must be finite, got {d}"));
            }
            _ => {}
        }
        if let Some(step) = self.qfi_step {
            if !(step.is_finite() && step > 0.0) {
                return invalid(format!("qfi_step must be positive, got {step}"));
            }
        }
        Ok(())
    }

    /// The complete parameter assignment at one grid point.
    fn resolve(&self, axis_value: f64, series_value: f64) -> Assignment {
        let mut values = self.fixed.clone();
        values.insert(self.axis.name, axis_value);
        values.insert(self.series.name, series_value);
        Assignment {
            eps1: values[&ParamName::Eps1],
            eps2: values[&ParamName::Eps2],
            xi: values[&ParamName::Xi],
            t: values.get(&ParamName::Time).copied(),
        }
    }
}

struct Assignment {
    eps1: f64,
    eps2: f64,
    xi: f64,
    t: Option<f64>,
}

impl Assignment {
    fn params(&self) -> Result<ClockParams> {
        ClockParams::new(self.eps1, self.eps2, self.xi)
    }
}

/// Provenance attached to every table.
#[derive(Debug, Clone, Serialize)]
pub struct TableMeta {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl TableMeta {
    fn for_config<T: Serialize>(config: &T, seed: u64) -> Self {
        TableMeta {
            tool_version: provenance::TOOL_VERSION.to_string(),
            config_hash: provenance::config_digest(config),
            seed,
        }
    }
}

/// A finished sweep: fixed column schema, axis-major/series-minor rows, and
/// provenance. `discrepancy_flag` is stored as 0/1 and rendered as a boolean
/// in JSON.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub meta: TableMeta,
}

impl SweepTable {
    /// CSV with `#`-prefixed metadata lines before the header. Numbers use
    /// the shortest representation that round-trips, so output is
    /// byte-stable.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# tool_version: {}", self.meta.tool_version)?;
        writeln!(w, "# config_hash: {}", self.meta.config_hash)?;
        writeln!(w, "# seed: {}", self.meta.seed)?;
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let mut line = String::new();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// JSON object with metadata, header, and rows; flag columns become
    /// booleans.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        if self.header[j] == "discrepancy_flag" {
                            serde_json::Value::Bool(*v != 0.0)
                        } else {
                            serde_json::json!(v)
                        }
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "meta": self.meta,
            "header": self.header,
            "rows": rows,
        })
    }

    fn check_finite(self) -> Result<Self> {
        for row in &self.rows {
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NumericalFailure(format!(
                    "table contains a non-finite value: {bad}"
                )));
            }
        }
        Ok(self)
    }
}

/// Grid-point inputs in emission order: axis-major, series-minor.
fn grid(spec: &SweepSpec) -> Vec<(f64, f64)> {
    let axis = spec.axis.points();
    let mut cells = Vec::with_capacity(axis.len() * spec.series.values.len());
    for &a in &axis {
        for &s in &spec.series.values {
            cells.push((a, s));
        }
    }
    cells
}

/// Bob's outcome probabilities over the grid. Columns:
/// `epsilon1, xi, epsilon2, delta_p, p_plus, p_minus`.
pub fn run_probability_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    if spec.kind != SweepKind::Probability {
        return Err(Error::InvalidParameter(format!(
            "expected a probability sweep, got {:?}",
            spec.kind
        )));
    }
    spec.validate()?;
    let delta_p = spec.delta_p.expect("validated");
    let rows = map_collect(&grid(spec), |&(a, s)| -> Result<Vec<f64>> {
        let asg = spec.resolve(a, s);
        let params = asg.params()?;
        let p_plus = crate::protocol::bob_probability(&params, delta_p, DualOutcome::Plus);
        let p_minus = crate::protocol::bob_probability(&params, delta_p, DualOutcome::Minus);
        Ok(vec![asg.eps1, asg.xi, asg.eps2, delta_p, p_plus, p_minus])
    });
    SweepTable {
        header: vec!["epsilon1", "xi", "epsilon2", "delta_p", "p_plus", "p_minus"],
        rows: rows.into_iter().collect::<Result<_>>()?,
        meta: TableMeta::for_config(spec, 0),
    }
    .check_finite()
}

/// Fisher information over the grid. Columns:
/// `epsilon2, xi, epsilon1, delta_p, qfi_numerical, qfi_closed_form,
/// classical_fisher, discrepancy_flag`.
pub fn run_qfi_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    if spec.kind != SweepKind::Qfi {
        return Err(Error::InvalidParameter(format!(
            "expected a qfi sweep, got {:?}",
            spec.kind
        )));
    }
    spec.validate()?;
    let delta_p = spec.delta_p.expect("validated");
    let rows = map_collect(&grid(spec), |&(a, s)| -> Result<Vec<f64>> {
        let asg = spec.resolve(a, s);
        let params = asg.params()?;
        let step = spec.qfi_step.unwrap_or_else(|| metrology::default_qfi_step(&params));
        let qfi = metrology::qfi_numerical_with_step(&params, delta_p, step)?;
        let closed = qfi_closed_form(&params, delta_p);
        let fisher = classical_fisher(&params, delta_p);
        let flag = (closed - qfi).abs() > metrology::DISCREPANCY_RTOL * qfi.max(1.0);
        Ok(vec![
            asg.eps2,
            asg.xi,
            asg.eps1,
            delta_p,
            qfi,
            closed,
            fisher,
            f64::from(u8::from(flag)),
        ])
    });
    SweepTable {
        header: vec![
            "epsilon2",
            "xi",
            "epsilon1",
            "delta_p",
            "qfi_numerical",
            "qfi_closed_form",
            "classical_fisher",
            "discrepancy_flag",
        ],
        rows: rows.into_iter().collect::<Result<_>>()?,
        meta: TableMeta::for_config(spec, 0),
    }
    .check_finite()
}

/// Entanglement growth over the grid. Columns:
/// `epsilon1, epsilon2, xi, t, concurrence, purity`.
pub fn run_entanglement_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    if spec.kind != SweepKind::Entanglement {
        return Err(Error::InvalidParameter(format!(
            "expected an entanglement sweep, got {:?}",
            spec.kind
        )));
    }
    spec.validate()?;
    let rows = map_collect(&grid(spec), |&(a, s)| -> Result<Vec<f64>> {
        let asg = spec.resolve(a, s);
        let params = asg.params()?;
        let t = asg.t.expect("validated");
        let state = joint_state(&params, t)?;
        let concurrence = state.concurrence()?;
        let purity = state.reduced_density(Subsystem::First)?.purity();
        debug_assert!(
            (concurrence - concurrence_closed_form(&params, t)).abs() < 1e-9,
            "closed form drifted from the state route"
        );
        Ok(vec![asg.eps1, asg.eps2, asg.xi, t, concurrence, purity])
    });
    SweepTable {
        header: vec!["epsilon1", "epsilon2", "xi", "t", "concurrence", "purity"],
        rows: rows.into_iter().collect::<Result<_>>()?,
        meta: TableMeta::for_config(spec, 0),
    }
    .check_finite()
}

/// Runs whichever sweep `spec.kind` names.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    match spec.kind {
        SweepKind::Probability => run_probability_sweep(spec),
        SweepKind::Qfi => run_qfi_sweep(spec),
        SweepKind::Entanglement => run_entanglement_sweep(spec),
    }
}

/// Default probability figure: P(±) against ε₁ ∈ [0, 20] for ξ ∈ {1, 2, 10},
/// with ε₂ = 10 and the offset at one full Bob period (ε₂δ_p = 2π). The axis
/// covers two periods of the widest series.
pub fn default_probability_figure() -> SweepSpec {
    SweepSpec {
        kind: SweepKind::Probability,
        fixed: BTreeMap::from([(ParamName::Eps2, 10.0)]),
        axis: AxisSpec {
            name: ParamName::Eps1,
            lo: 0.0,
            hi: 20.0,
            step: 0.01,
        },
        series: SeriesSpec {
            name: ParamName::Xi,
            values: vec![1.0, 2.0, 10.0],
        },
        delta_p: Some(2.0 * std::f64::consts::PI / 10.0),
        qfi_step: None,
    }
}

/// Default Fisher-information figure: QFI against ε₂ ∈ [1, 20] for
/// ξ ∈ {1, 10, 100}, with ε₁ = 10 and the same offset as the probability
/// figure.
pub fn default_qfi_figure() -> SweepSpec {
    SweepSpec {
        kind: SweepKind::Qfi,
        fixed: BTreeMap::from([(ParamName::Eps1, 10.0)]),
        axis: AxisSpec {
            name: ParamName::Eps2,
            lo: 1.0,
            hi: 20.0,
            step: 0.25,
        },
        series: SeriesSpec {
            name: ParamName::Xi,
            values: vec![1.0, 10.0, 100.0],
        },
        delta_p: Some(2.0 * std::f64::consts::PI / 10.0),
        qfi_step: None,
    }
}

/// Default entanglement figure: concurrence against t ∈ [0, 2] for
/// ξ ∈ {10, 20, 40} at ε₁ = ε₂ = 10, covering at least one full coupling
/// period of every series.
pub fn default_entanglement_figure() -> SweepSpec {
    SweepSpec {
        kind: SweepKind::Entanglement,
        fixed: BTreeMap::from([(ParamName::Eps1, 10.0), (ParamName::Eps2, 10.0)]),
        axis: AxisSpec {
            name: ParamName::Time,
            lo: 0.0,
            hi: 2.0,
            step: 0.01,
        },
        series: SeriesSpec {
            name: ParamName::Xi,
            values: vec![10.0, 20.0, 40.0],
        },
        delta_p: None,
        qfi_step: None,
    }
}

/// Inputs of a Monte Carlo estimation experiment: `replicates` independent
/// datasets of `n` rounds each are sampled at the true offset `delta_p` and
/// fed to the maximum-likelihood estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ClockParams,
    pub delta_p: f64,
    pub n: u64,
    pub replicates: u64,
    pub base_seed: u64,
    /// Search window; one Bob period [0, 2π/ε₂] when omitted.
    #[serde(default)]
    pub window: Option<Window>,
    /// Likelihood grid size; 4096 when omitted.
    #[serde(default)]
    pub grid_points: Option<usize>,
}

/// One replicate's dataset summary and estimate.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: u64,
    pub seed: u64,
    pub k_plus: u64,
    pub delta_hat: f64,
    pub log_likelihood: f64,
}

/// Aggregated experiment results, with the information-theoretic context at
/// the true parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub meta: TableMeta,
    pub replicates: Vec<ReplicateOutcome>,
    /// Sample mean of δ̂.
    pub mean: f64,
    /// Unbiased sample variance of δ̂.
    pub variance: f64,
    /// mean − true δ.
    pub bias: f64,
    /// √(variance / replicates).
    pub stderr_mean: f64,
    /// Classical Cramér-Rao variance bound 1/(n·F_c) at the true offset.
    pub cr_variance_classical: f64,
    /// Quantum Cramér-Rao variance bound 1/(n·F_Q) at the true offset.
    pub cr_variance_quantum: f64,
    /// variance / cr_variance_classical; near 1 for an efficient estimator.
    pub efficiency_ratio: f64,
    /// Fractions of replicates with |δ̂ − δ| within k·√(cr_variance_classical)
    /// for k = 1, 2, 3.
    pub coverage: [f64; 3],
    /// Full information analysis at the true point.
    pub metrology: MetrologyReport,
}

/// Runs the experiment. Replicate r uses the seed
/// `replicate_seed(base_seed, r)`; aggregation is in replicate order, so the
/// report does not depend on scheduling.
pub fn run_estimation_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.replicates == 0 {
        return Err(Error::InvalidParameter(
            "experiment needs at least one replicate".into(),
        ));
    }
    if !cfg.delta_p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta_p must be finite, got {}",
            cfg.delta_p
        )));
    }
    let window = match cfg.window {
        Some(w) => Window::new(w.lo, w.hi)?,
        None => default_window(&cfg.params),
    };
    let grid_points = cfg.grid_points.unwrap_or(DEFAULT_GRID_POINTS);

    let indices: Vec<u64> = (0..cfg.replicates).collect();
    let outcomes = map_collect(&indices, |&r| -> Result<ReplicateOutcome> {
        let seed = replicate_seed(cfg.base_seed, r);
        let record = sample_outcomes(&cfg.params, cfg.delta_p, cfg.n, seed)?;
        let estimate = estimate_delta_with(&record, &cfg.params, window, grid_points)?;
        Ok(ReplicateOutcome {
            replicate: r,
            seed,
            k_plus: record.k_plus,
            delta_hat: estimate.delta_hat,
            log_likelihood: estimate.log_likelihood,
        })
    });
    let replicates: Vec<ReplicateOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let r = replicates.len() as f64;
    let mean = replicates.iter().map(|o| o.delta_hat).sum::<f64>() / r;
    let variance = if replicates.len() > 1 {
        replicates
            .iter()
            .map(|o| (o.delta_hat - mean).powi(2))
            .sum::<f64>()
            / (r - 1.0)
    } else {
        0.0
    };

    let report = metrology_report(&cfg.params, cfg.delta_p, cfg.n)?;
    let cr_variance_classical =
        precision_bound(report.classical_fisher, cfg.n)?.powi(2);
    let cr_variance_quantum = precision_bound(report.qfi_numerical, cfg.n)?.powi(2);
    let cr_sigma = cr_variance_classical.sqrt();
    let coverage = [1.0, 2.0, 3.0].map(|k| {
        replicates
            .iter()
            .filter(|o| (o.delta_hat - cfg.delta_p).abs() <= k * cr_sigma)
            .count() as f64
            / r
    });

    Ok(ExperimentReport {
        meta: TableMeta::for_config(cfg, cfg.base_seed),
        replicates,
        mean,
        variance,
        bias: mean - cfg.delta_p,
        stderr_mean: (variance / r).sqrt(),
        cr_variance_classical,
        cr_variance_quantum,
        efficiency_ratio: variance / cr_variance_classical,
        coverage,
        metrology: report,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn axis_grid_is_inclusive_and_exact() {
        let axis = AxisSpec {
            name: ParamName::Eps1,
            lo: 0.0,
            hi: 20.0,
            step: 0.01,
        };
        let pts = axis.points();
        assert_eq!(pts.len(), 2001);
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 20.0);

        let coarse = AxisSpec {
            name: ParamName::Eps2,
            lo: 1.0,
            hi: 20.0,
            step: 0.25,
        };
        assert_eq!(coarse.points().len(), 77);
    }

    #[test]
    fn probability_sweep_shape_and_order() {
        let mut spec = default_probability_figure();
        spec.axis.step = 0.5; // keep the unit test light
        let table = run_probability_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 41 * 3);
        assert_eq!(
            table.header,
            vec!["epsilon1", "xi", "epsilon2", "delta_p", "p_plus", "p_minus"]
        );
        // Axis-major: the first three rows share epsilon1 = 0 and walk the
        // series values in order.
        assert_eq!(table.rows[0][0], 0.0);
        assert_eq!(table.rows[0][1], 1.0);
        assert_eq!(table.rows[1][1], 2.0);
        assert_eq!(table.rows[2][1], 10.0);
        assert_eq!(table.rows[3][0], 0.5);
        for row in &table.rows {
            assert_close(row[4] + row[5], 1.0, 1e-14);
        }
        // ε₁ = 0 decouples the clocks; with ε₂δ_p = 2π Bob's outcome is
        // certain.
        assert_close(table.rows[0][4], 1.0, 1e-12);
    }

    #[test]
    fn probability_sweep_attains_the_extremes_on_series_multiples() {
        // At ε₂δ_p = 2π: P(+) = ½ + (1+cos(2πε₁/ξ))/(3+cos(2πε₁/ξ)),
        // maxima 1 at ε₁ = kξ, minima ½ at ε₁ = (k+½)ξ.
        let spec = default_probability_figure();
        let table = run_probability_sweep(&spec).unwrap();
        let xi10: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[1] == 10.0).collect();
        for (eps1, expected) in [(0.0, 1.0), (5.0, 0.5), (10.0, 1.0), (15.0, 0.5), (20.0, 1.0)]
        {
            let row = xi10
                .iter()
                .find(|r| (r[0] - eps1).abs() < 1e-9)
                .expect("grid point present");
            assert_close(row[4], expected, 1e-9);
        }
    }

    #[test]
    fn qfi_sweep_columns_and_flag_encoding() {
        let spec = SweepSpec {
            kind: SweepKind::Qfi,
            fixed: BTreeMap::from([(ParamName::Eps1, 10.0)]),
            axis: AxisSpec {
                name: ParamName::Eps2,
                lo: 5.0,
                hi: 10.0,
                step: 2.5,
            },
            series: SeriesSpec {
                name: ParamName::Xi,
                values: vec![20.0, 1e9],
            },
            delta_p: Some(PI / 10.0),
            qfi_step: None,
        };
        let table = run_qfi_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 3 * 2);
        // ξ = 1e9 rows sit in the closed form's agreement domain (ζ′ ≈ 0),
        // ξ = 20 rows do not at this offset.
        for row in &table.rows {
            let xi = row[1];
            let flag = row[7];
            assert!(flag == 0.0 || flag == 1.0);
            if xi > 1e8 {
                assert_eq!(flag, 0.0, "flat row flagged: {row:?}");
                assert_close(row[4], row[5], 1e-6 * row[4].max(1.0));
            } else {
                assert_eq!(flag, 1.0, "coupled row unflagged: {row:?}");
            }
            assert!(row[6] <= row[4] + 1e-9, "classical exceeds quantum: {row:?}");
        }
    }

    #[test]
    fn entanglement_sweep_tracks_the_closed_form() {
        let mut spec = default_entanglement_figure();
        spec.axis.step = 0.1;
        let table = run_entanglement_sweep(&spec).unwrap();
        assert_eq!(table.header, vec!["epsilon1", "epsilon2", "xi", "t", "concurrence", "purity"]);
        for row in &table.rows {
            let params = ClockParams::new(row[0], row[1], row[2]).unwrap();
            assert_close(row[4], concurrence_closed_form(&params, row[3]), 1e-12);
            assert_close(row[5], 1.0 - row[4] * row[4] / 2.0, 1e-12);
        }
    }

    #[test]
    fn sweep_validation_rejects_inconsistent_specs() {
        let mut overlap = default_probability_figure();
        overlap.fixed.insert(ParamName::Eps1, 3.0);
        assert!(overlap.validate().is_err());

        let mut missing = default_probability_figure();
        missing.fixed.clear();
        assert!(missing.validate().is_err());

        let mut no_offset = default_probability_figure();
        no_offset.delta_p = None;
        assert!(no_offset.validate().is_err());

        let mut bad_step = default_qfi_figure();
        bad_step.axis.step = -0.25;
        assert!(bad_step.validate().is_err());

        let mut stray_time = default_probability_figure();
        stray_time.fixed.insert(ParamName::Time, 1.0);
        assert!(stray_time.validate().is_err());

        let mut same_role = default_probability_figure();
        same_role.series.name = ParamName::Eps1;
        assert!(same_role.validate().is_err());
    }

    #[test]
    fn csv_output_is_stable_and_metadata_prefixed() {
        let mut spec = default_probability_figure();
        spec.axis.hi = 0.05;
        let table = run_probability_sweep(&spec).unwrap();
        let mut first = Vec::new();
        table.write_csv(&mut first).unwrap();
        let mut second = Vec::new();
        run_probability_sweep(&spec)
            .unwrap()
            .write_csv(&mut second)
            .unwrap();
        assert_eq!(first, second);

        let text = String::from_utf8(first).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# tool_version: "));
        assert!(lines.next().unwrap().starts_with("# config_hash: "));
        assert!(lines.next().unwrap().starts_with("# seed: "));
        assert_eq!(
            lines.next().unwrap(),
            "epsilon1,xi,epsilon2,delta_p,p_plus,p_minus"
        );
        let first_row = lines.next().unwrap();
        assert!(first_row.starts_with("0,1,10,"), "{first_row}");
    }

    #[test]
    fn json_output_renders_flags_as_booleans() {
        let spec = SweepSpec {
            kind: SweepKind::Qfi,
            fixed: BTreeMap::from([(ParamName::Eps1, 10.0)]),
            axis: AxisSpec {
                name: ParamName::Eps2,
                lo: 10.0,
                hi: 11.0,
                step: 1.0,
            },
            series: SeriesSpec {
                name: ParamName::Xi,
                values: vec![20.0],
            },
            delta_p: Some(PI / 10.0),
            qfi_step: None,
        };
        let json = run_qfi_sweep(&spec).unwrap().to_json();
        let rows = json["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0][7].is_boolean());
        assert_eq!(rows[0][7], serde_json::Value::Bool(true));
        assert!(json["meta"]["config_hash"].is_string());
    }

    #[test]
    fn estimation_experiment_aggregates_in_replicate_order() {
        let cfg = ExperimentConfig {
            params: ClockParams::new(10.0, 10.0, 20.0).unwrap(),
            delta_p: PI / 10.0,
            n: 2000,
            replicates: 8,
            base_seed: 99,
            window: Some(Window::new(0.0, 0.35).unwrap()),
            grid_points: Some(512),
        };
        let report = run_estimation_experiment(&cfg).unwrap();
        assert_eq!(report.replicates.len(), 8);
        for (i, o) in report.replicates.iter().enumerate() {
            assert_eq!(o.replicate, i as u64);
            assert_eq!(o.seed, replicate_seed(99, i as u64));
        }
        let again = run_estimation_experiment(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
        assert!(report.variance >= 0.0);
        assert!(report.coverage[0] <= report.coverage[1]);
        assert!(report.coverage[1] <= report.coverage[2]);
        // Even at this light n the estimates cluster near the truth.
        assert!((report.mean - PI / 10.0).abs() < 0.02, "mean {}", report.mean);
    }

    #[test]
    fn zero_offset_experiment_recovers_zero_exactly() {
        let cfg = ExperimentConfig {
            params: ClockParams::new(10.0, 10.0, 20.0).unwrap(),
            delta_p: 0.0,
            n: 1000,
            replicates: 10,
            base_seed: 1,
            window: Some(Window::new(0.0, 0.3).unwrap()),
            grid_points: None,
        };
        let report = run_estimation_experiment(&cfg).unwrap();
        for o in &report.replicates {
            assert_eq!(o.k_plus, 1000);
            assert_eq!(o.delta_hat, 0.0);
        }
        assert_eq!(report.mean, 0.0);
        assert_eq!(report.variance, 0.0);
    }
}
