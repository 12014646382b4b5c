use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::errors::effectivity;
use super::indicators::{eta_h, eta_h_with, eta_minus1_with, eta_zero_with, gap_bound, GapBound};
use super::local::{check_problem, CellFields};
use super::osc::{oscillations, DEFAULT_OSC_DEGREE};
use super::problem::ProblemData;
use crate::derham::{Bc, CochainVec, DiscreteComplex};
use crate::error::{FeecError, Result};
use crate::hodge::{hodge_decompose, HodgeParts, MixedSolution};
use crate::numfmt::{fmt_f64, to_json_string, JsonF64};

/// Treatment of the harmonic nonconformity term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Crude,
    Sharp,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Crude => "crude",
            Mode::Sharp => "sharp",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = FeecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crude" => Ok(Mode::Crude),
            "sharp" => Ok(Mode::Sharp),
            _ => Err(FeecError::InvalidArgument(format!(
                "unknown estimator mode `{s}` (expected crude or sharp)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EstimatorOptions {
    pub mode: Mode,
    pub osc_degree: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            mode: Mode::Crude,
            osc_degree: DEFAULT_OSC_DEGREE,
        }
    }
}

/// Indicators of one cell. `osc_delta` is `None` when `δf` is unavailable.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementIndicators {
    pub cell_id: usize,
    pub h_k: f64,
    pub eta_m1: f64,
    pub eta_0: f64,
    pub eta_h_p: f64,
    pub osc: f64,
    pub osc_boundary: f64,
    pub osc_delta: Option<f64>,
}

impl ElementIndicators {
    /// `(η₋₁² + η₀² + η_H(p)²)^{1/2}`.
    pub fn eta(&self) -> f64 {
        self.eta_sq().sqrt()
    }

    pub fn eta_sq(&self) -> f64 {
        self.eta_m1 * self.eta_m1 + self.eta_0 * self.eta_0 + self.eta_h_p * self.eta_h_p
    }

    /// Sum of the squared oscillation terms.
    pub fn osc_sq(&self) -> f64 {
        let d = self.osc_delta.unwrap_or(0.0);
        self.osc * self.osc + self.osc_boundary * self.osc_boundary + d * d
    }
}

/// Both variants of the harmonic term.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicTerm {
    pub u_norm: f64,
    pub crude: f64,
    pub epsilon: Option<f64>,
    pub sharp: Option<f64>,
}

impl HarmonicTerm {
    pub fn value(&self, mode: Mode) -> Option<f64> {
        match mode {
            Mode::Crude => Some(self.crude),
            Mode::Sharp => self.sharp,
        }
    }
}

/// `μ‖u_h‖`, and with `parts` also `μ ε + μ² ‖u_h‖` where `ε` measures
/// `u_h^⊥`.
pub fn harmonic_term(
    cx: &DiscreteComplex,
    gap: &GapBound,
    u: &CochainVec,
    mode: Mode,
    parts: Option<&HodgeParts>,
) -> Result<HarmonicTerm> {
    let k = u.space().degree();
    let u_norm = cx.mass(k)?.bilinear(u.values(), u.values()).max(0.0).sqrt();
    let crude = gap.mu * u_norm;
    let (epsilon, sharp) = match (mode, parts) {
        (Mode::Crude, None) => (None, None),
        (_, Some(parts)) => {
            let eta = eta_h(cx, &parts.zperp_part)?;
            let eps = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
            (Some(eps), Some(gap.mu * eps + gap.mu * gap.mu * u_norm))
        }
        (Mode::Sharp, None) => {
            return Err(FeecError::Missing(
                "the sharp harmonic term needs the Hodge decomposition of u_h".into(),
            ))
        }
    };
    Ok(HarmonicTerm {
        u_norm,
        crude,
        epsilon,
        sharp,
    })
}

/// Element indicators and global reliability bound of one discrete solution.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorReport {
    pub k: usize,
    pub bc: Bc,
    pub mode: Mode,
    pub elements: Vec<ElementIndicators>,
    pub mu_i: Vec<f64>,
    pub mu: f64,
    pub harmonic: HarmonicTerm,
    pub total_crude: f64,
    pub total_sharp: Option<f64>,
    pub effectivity: Option<f64>,
}

pub const CSV_HEADER: &str = "cell_id,h_K,eta_m1,eta_0,eta_H_p,osc,osc_boundary,osc_delta";

#[derive(Serialize)]
struct ReportDoc<'a> {
    mu: f64,
    mu_i: &'a [f64],
    epsilon: Option<f64>,
    harmonic_term: f64,
    total: f64,
    mode: Mode,
    effectivity: Option<JsonF64>,
}

impl EstimatorReport {
    /// `(Σ_K η₋₁² + η₀² + η_H(p)²)^{1/2}`.
    pub fn indicator_norm(&self) -> f64 {
        self.elements
            .iter()
            .map(ElementIndicators::eta_sq)
            .sum::<f64>()
            .sqrt()
    }

    pub fn harmonic_term(&self) -> f64 {
        self.harmonic
            .value(self.mode)
            .expect("report mode has its harmonic term")
    }

    /// Total of the report's mode.
    pub fn total(&self) -> f64 {
        match self.mode {
            Mode::Crude => self.total_crude,
            Mode::Sharp => self.total_sharp.expect("sharp report has a sharp total"),
        }
    }

    pub fn eta(&self) -> Vec<f64> {
        self.elements.iter().map(ElementIndicators::eta).collect()
    }

    /// Record the effectivity index against the given error norm.
    pub fn set_error(&mut self, error: f64) {
        self.effectivity = Some(effectivity(self.total(), error));
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.elements.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for e in &self.elements {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                e.cell_id,
                fmt_f64(e.h_k),
                fmt_f64(e.eta_m1),
                fmt_f64(e.eta_0),
                fmt_f64(e.eta_h_p),
                fmt_f64(e.osc),
                fmt_f64(e.osc_boundary),
                e.osc_delta.map(fmt_f64).unwrap_or_default()
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        to_json_string(&ReportDoc {
            mu: self.mu,
            mu_i: &self.mu_i,
            epsilon: self.harmonic.epsilon,
            harmonic_term: self.harmonic_term(),
            total: self.total(),
            mode: self.mode,
            effectivity: self.effectivity.map(JsonF64),
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| FeecError::io(path, e))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| FeecError::io(path, e))
    }
}

/// Evaluate every indicator and assemble the reliability bound.
pub fn total_estimate(
    cx: &DiscreteComplex,
    problem: &ProblemData,
    sol: &MixedSolution,
    options: &EstimatorOptions,
) -> Result<EstimatorReport> {
    check_problem(cx, problem, sol)?;
    let mesh = cx.mesh();
    let k = sol.k;
    let fields = CellFields::new(cx, sol);
    let eta_m1 = eta_minus1_with(cx, k, &fields)?;
    let eta_0 = eta_zero_with(cx, problem, &fields)?;
    let eta_p = eta_h_with(cx, k, &fields.p)?;
    let osc = oscillations(cx, problem, options.osc_degree)?;
    let gap = gap_bound(cx, &sol.harmonic)?;
    let parts = match options.mode {
        Mode::Sharp => Some(hodge_decompose(cx, &sol.u)?),
        Mode::Crude => None,
    };
    let harmonic = harmonic_term(cx, &gap, &sol.u, options.mode, parts.as_ref())?;
    let h = &mesh.geometry().h;
    let elements: Vec<ElementIndicators> = (0..mesh.num_cells())
        .map(|c| ElementIndicators {
            cell_id: c,
            h_k: h[c],
            eta_m1: eta_m1[c],
            eta_0: eta_0[c],
            eta_h_p: eta_p[c],
            osc: osc.osc[c],
            osc_boundary: osc.osc_boundary[c],
            osc_delta: osc.osc_delta.as_ref().map(|d| d[c]),
        })
        .collect();
    let mut report = EstimatorReport {
        k,
        bc: sol.bc,
        mode: options.mode,
        elements,
        mu_i: gap.mu_i,
        mu: gap.mu,
        harmonic,
        total_crude: 0.0,
        total_sharp: None,
        effectivity: None,
    };
    let base = report.indicator_norm();
    report.total_crude = base + report.harmonic.crude;
    report.total_sharp = report.harmonic.sharp.map(|s| base + s);
    Ok(report)
}
