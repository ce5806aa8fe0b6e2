//! JSON report shapes and CSV emission.
//!
//! Key order is fixed by struct declaration order and maps use `BTreeMap`,
//! so byte-identical inputs produce byte-identical reports.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use salvage_core::{
    AdversaryOutcome, ConditionReport, DominanceReport, DominanceVerdict, IntervalSet,
    LinkIssue, PiecewiseWeight, RealFn,
};

/// `[lo, hi]` with `"-inf"`/`"inf"` for unbounded ends.
#[derive(Debug, Clone, Serialize)]
pub struct JsonInterval(serde_json::Value, serde_json::Value);

fn bound(v: f64) -> serde_json::Value {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else {
        serde_json::json!(v)
    }
}

pub fn interval_set_json(set: &IntervalSet) -> Vec<JsonInterval> {
    set.intervals()
        .iter()
        .map(|iv| JsonInterval(bound(iv.lo), bound(iv.hi)))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ConditionReportJson {
    pub a1_sup_residual: f64,
    pub a2_min: f64,
    pub a3_integral: f64,
    pub a3_error: f64,
    pub a4_integral: f64,
    pub a4_error: f64,
    pub verdicts: VerdictsJson,
}

#[derive(Debug, Serialize)]
pub struct VerdictsJson {
    pub a1: &'static str,
    pub a2: &'static str,
    pub a3: &'static str,
    pub a4: &'static str,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

impl ConditionReportJson {
    pub fn from_core(c: &ConditionReport) -> Self {
        ConditionReportJson {
            a1_sup_residual: c.a1_sup_residual,
            a2_min: c.a2_min,
            a3_integral: c.a3_integral.value,
            a3_error: c.a3_integral.abs_error_estimate,
            a4_integral: c.a4_integral.value,
            a4_error: c.a4_integral.abs_error_estimate,
            verdicts: VerdictsJson {
                a1: verdict(c.a1_pass),
                a2: verdict(c.a2_pass),
                a3: verdict(c.a3_pass),
                a4: verdict(c.a4_pass),
            },
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkIssueJson {
    NotInjective { segment_count: usize, segments: Vec<SegmentJson> },
    ImageEscape { x: f64, qx: f64, distance: f64 },
    PartialCoverage { covered_measure: f64, x_minus_measure: f64 },
}

#[derive(Debug, Serialize)]
pub struct SegmentJson {
    pub lo: f64,
    pub hi: f64,
    pub direction: &'static str,
}

impl LinkIssueJson {
    pub fn from_core(issue: &LinkIssue) -> Self {
        match issue {
            LinkIssue::NotInjective { segments } => LinkIssueJson::NotInjective {
                segment_count: segments.len(),
                segments: segments
                    .iter()
                    .map(|s| SegmentJson {
                        lo: s.interval.lo,
                        hi: s.interval.hi,
                        direction: match s.direction {
                            salvage_core::Direction::Increasing => "increasing",
                            salvage_core::Direction::Decreasing => "decreasing",
                            salvage_core::Direction::Constant => "constant",
                        },
                    })
                    .collect(),
            },
            LinkIssue::ImageEscape { x, qx, distance } => {
                LinkIssueJson::ImageEscape { x: *x, qx: *qx, distance: *distance }
            }
            LinkIssue::PartialCoverage { covered_measure, x_minus_measure } => {
                LinkIssueJson::PartialCoverage {
                    covered_measure: *covered_measure,
                    x_minus_measure: *x_minus_measure,
                }
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AnalyzeJson {
    pub domain: Vec<JsonInterval>,
    pub x_minus: Vec<JsonInterval>,
    pub x_plus: Vec<JsonInterval>,
    pub x_plus_matched: Vec<JsonInterval>,
    pub x_minus_measure: f64,
    pub beta_original: f64,
    pub beta_error: f64,
    pub mass_original: f64,
    pub mass_error: f64,
}

#[derive(Debug, Serialize)]
pub struct LinkJson {
    pub valid: bool,
    pub constructible: bool,
    pub issues: Vec<LinkIssueJson>,
    pub conditions: ConditionReportJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<JsonInterval>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_transformed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_transformed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop1_value_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop1_mass_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonneg_certificate: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct DominancePassJson {
    pub n: usize,
    pub bins: usize,
    pub verdict: &'static str,
    pub violated_bins: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preservation_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonneg_certificate: Option<f64>,
}

impl DominancePassJson {
    pub fn from_core(r: &DominanceReport) -> Self {
        DominancePassJson {
            n: r.n_requested,
            bins: r.bins.bin_count(),
            verdict: match r.verdict {
                DominanceVerdict::Dominated => "dominated",
                DominanceVerdict::Violated => "violated",
            },
            violated_bins: r.violated_bins.clone(),
            preservation_residual: r.preservation_residual,
            mass_residual: r.mass_residual,
            nonneg_certificate: r.omega_tilde_n.as_ref().map(|w| w.nonneg_certificate()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SalvageJson {
    pub verdict: &'static str,
    pub headline: DominancePassJson,
    pub schedule: Vec<DominancePassJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_transformed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_transformed: Option<f64>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum AdversaryJson {
    Found { center: f64, half_width: f64, epsilon: f64, amplitude: f64, achieved_beta: f64 },
    Infeasible { infeasible: bool, omega_mass: f64 },
}

impl AdversaryJson {
    pub fn from_core(o: &AdversaryOutcome) -> Self {
        match o {
            AdversaryOutcome::Found { spec, achieved_beta, .. } => AdversaryJson::Found {
                center: spec.center,
                half_width: spec.half_width,
                epsilon: spec.epsilon,
                amplitude: spec.amplitude,
                achieved_beta: *achieved_beta,
            },
            AdversaryOutcome::Infeasible { omega_mass } => {
                AdversaryJson::Infeasible { infeasible: true, omega_mass: *omega_mass }
            }
        }
    }
}

/// Writes the per-bin table: one row per bin.
pub fn write_bins_csv(path: &Path, report: &DominanceReport) -> Result<()> {
    let mut out = String::from("bin_lo,bin_hi,mu_minus,mu_plus,leb_plus,omega_tilde_value,violated\n");
    for (k, m) in report.measures.iter().enumerate() {
        let violated = report.violated_bins.contains(&k);
        let value = if m.preimage_minus.measure() > 0.0 && m.leb_plus > 0.0 {
            format!("{}", ((m.mu_plus - m.mu_minus) / m.leb_plus).max(0.0))
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.bin.lo, m.bin.hi, m.mu_minus, m.mu_plus, m.leb_plus, value, violated
        ));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Writes plot-ready samples: `x, omega, omega_tilde, g_prime` at 2048
/// uniform points over the domain hull. Out-of-domain cells are left blank.
pub fn write_samples_csv(
    path: &Path,
    domain: &IntervalSet,
    omega: &RealFn,
    omega_tilde: Option<&PiecewiseWeight>,
    g_prime: &RealFn,
) -> Result<()> {
    let hull = domain.hull().context("empty domain")?;
    let mut out = String::from("x,omega,omega_tilde,g_prime\n");
    const N: usize = 2048;
    for k in 0..N {
        let x = hull.lo + (hull.hi - hull.lo) * k as f64 / (N - 1) as f64;
        let w = omega.eval(x).map(|v| v.to_string()).unwrap_or_default();
        let wt = match omega_tilde {
            Some(t) => t.eval(x).map(|v| v.to_string()).unwrap_or_default(),
            None => String::new(),
        };
        let g = g_prime.eval(x).map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", x, w, wt, g));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
