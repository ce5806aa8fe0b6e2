//! Subcommand orchestration: runs the core analyses over a resolved problem
//! and assembles the JSON reports plus the process exit status.

use anyhow::Result;
use serde::Serialize;

use salvage_core::{
    assess_link, beta, beta_weighted, dominance_pass, find_sign_flip, mass, mass_weighted,
    match_set, partition_signs, refine, transform_weights_link, AdversaryOutcome, BranchPolicy,
    DominanceReport, DominanceSettings, DominanceVerdict, PiecewiseWeight, SignPartition,
    Tolerances,
};

use crate::problem::Problem;
use crate::report::{
    interval_set_json, AdversaryJson, AnalyzeJson, ConditionReportJson, DominancePassJson,
    LinkIssueJson, LinkJson, SalvageJson,
};

/// Process exit semantics: 0 success, 2 dominance violated, 3 link condition
/// failed or link invalid, 4 parse/config error, 5 numerical failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Ok = 0,
    DominanceViolated = 2,
    LinkFailed = 3,
    Config = 4,
    Numerical = 5,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Combines statuses, keeping the more severe (config/numerical beat
    /// link, link beats dominance).
    pub fn worst(self, other: ExitStatus) -> ExitStatus {
        self.max(other)
    }
}

fn grid_pitch(problem: &Problem) -> f64 {
    salvage_core::roots::default_grid_h(&problem.domain)
}

pub struct Analysis {
    pub part: SignPartition,
    pub json: AnalyzeJson,
}

pub fn run_analyze(problem: &Problem) -> Result<Analysis> {
    let mut part = partition_signs(&problem.omega, &problem.domain)?;
    part.x_plus_matched = match_set(&problem.g_prime, &part, grid_pitch(problem))?;
    let b = beta(&problem.omega, &problem.g_prime, &problem.domain, problem.quad_tol)?;
    let m = mass(&problem.omega, &problem.domain, problem.quad_tol)?;
    let json = AnalyzeJson {
        domain: interval_set_json(&problem.domain),
        x_minus: interval_set_json(&part.x_minus),
        x_plus: interval_set_json(&part.x_plus),
        x_plus_matched: interval_set_json(&part.x_plus_matched),
        x_minus_measure: part.x_minus.measure(),
        beta_original: b.value,
        beta_error: b.abs_error_estimate,
        mass_original: m.value,
        mass_error: m.abs_error_estimate,
    };
    Ok(Analysis { part, json })
}

pub struct LinkRun {
    pub json: LinkJson,
    pub status: ExitStatus,
    pub omega_tilde: Option<PiecewiseWeight>,
}

pub fn run_link(
    problem: &Problem,
    part: &SignPartition,
    branch: Option<usize>,
) -> Result<Option<LinkRun>> {
    let Some(q) = &problem.link else {
        return Ok(None);
    };
    let tols = Tolerances {
        quad_tol: problem.quad_tol,
        a_tol: problem.a_tol,
        grid_points: problem.grid_points,
    };
    let policy = match branch {
        Some(k) => BranchPolicy::Segment(k),
        None => BranchPolicy::Reject,
    };
    let assessment =
        assess_link(&problem.omega, &problem.g_prime, q, part, &tols, policy, grid_pitch(problem))?;

    let valid = assessment.is_valid();
    let constructible = assessment.conditions.constructible();
    let mut json = LinkJson {
        valid,
        constructible,
        issues: assessment.issues.iter().map(LinkIssueJson::from_core).collect(),
        conditions: ConditionReportJson::from_core(&assessment.conditions),
        image: assessment.link.as_ref().map(|l| interval_set_json(&l.image)),
        beta_transformed: None,
        mass_transformed: None,
        prop1_value_residual: None,
        prop1_mass_residual: None,
        nonneg_certificate: None,
    };

    let mut omega_tilde = None;
    if valid && constructible {
        let link = assessment.link.as_ref().expect("valid link present");
        let w = transform_weights_link(&problem.omega, link, part)?;
        let b = beta_weighted(&w, &problem.g_prime, &part.x_plus, problem.quad_tol)?;
        let m = mass_weighted(&w, &part.x_plus, problem.quad_tol)?;
        let (r1, r2) = salvage_core::verify_prop1(
            &problem.omega,
            &w,
            &problem.g_prime,
            &problem.domain,
            part,
            problem.quad_tol,
        )?;
        json.beta_transformed = Some(b.value);
        json.mass_transformed = Some(m.value);
        json.prop1_value_residual = Some(r1);
        json.prop1_mass_residual = Some(r2);
        json.nonneg_certificate = Some(w.nonneg_certificate());
        omega_tilde = Some(w);
    }

    // A3/A4 only gate which preservation guarantees are asserted a priori;
    // the transform exists (and the residuals above measure preservation
    // directly), so they do not fail the run.
    let status = if valid && constructible { ExitStatus::Ok } else { ExitStatus::LinkFailed };
    Ok(Some(LinkRun { json, status, omega_tilde }))
}

pub struct SalvageRun {
    pub json: SalvageJson,
    pub status: ExitStatus,
    pub headline: DominanceReport,
}

pub fn run_salvage(problem: &Problem, part: &SignPartition) -> Result<SalvageRun> {
    let settings = DominanceSettings {
        quad_tol: problem.quad_tol,
        dominance_tol: problem.a_tol,
        grid_h: grid_pitch(problem),
    };
    let schedule_reports =
        refine(&problem.omega, &problem.g_prime, part, &problem.n_schedule, &settings)?;
    let headline = match problem.n_schedule.iter().position(|&n| n == problem.bins) {
        Some(i) => schedule_reports[i].clone(),
        None => dominance_pass(&problem.omega, &problem.g_prime, part, problem.bins, &settings)?,
    };

    let (beta_transformed, mass_transformed) = match &headline.omega_tilde_n {
        Some(w) => {
            let b = beta_weighted(w, &problem.g_prime, &part.x_plus, problem.quad_tol)?;
            let m = mass_weighted(w, &part.x_plus, problem.quad_tol)?;
            (Some(b.value), Some(m.value))
        }
        None => (None, None),
    };

    let json = SalvageJson {
        verdict: match headline.verdict {
            DominanceVerdict::Dominated => "dominated",
            DominanceVerdict::Violated => "violated",
        },
        headline: DominancePassJson::from_core(&headline),
        schedule: schedule_reports.iter().map(DominancePassJson::from_core).collect(),
        beta_transformed,
        mass_transformed,
    };
    let status = match headline.verdict {
        DominanceVerdict::Dominated => ExitStatus::Ok,
        DominanceVerdict::Violated => ExitStatus::DominanceViolated,
    };
    Ok(SalvageRun { json, status, headline })
}

pub struct AdversaryRun {
    pub json: AdversaryJson,
    pub outcome: AdversaryOutcome,
}

pub fn run_adversary(problem: &Problem, part: &SignPartition) -> Result<AdversaryRun> {
    let outcome = find_sign_flip(&problem.omega, part, problem.epsilon, problem.quad_tol)?;
    Ok(AdversaryRun { json: AdversaryJson::from_core(&outcome), outcome })
}

/// The full pipeline: analyze, link (when present), salvage, adversary.
#[derive(Serialize)]
pub struct GalleryJson {
    pub fixture: String,
    pub beta_original: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_transformed: Option<f64>,
    pub mass_original: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_transformed: Option<f64>,
    pub analyze: AnalyzeJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkJson>,
    pub salvage: SalvageJson,
    pub adversary: AdversaryJson,
}

pub struct GalleryRun {
    pub json: GalleryJson,
    pub status: ExitStatus,
    pub omega_tilde: Option<PiecewiseWeight>,
    pub headline: DominanceReport,
}

pub fn run_gallery(name: &str, problem: &Problem, branch: Option<usize>) -> Result<GalleryRun> {
    let analysis = run_analyze(problem)?;
    let link_run = run_link(problem, &analysis.part, branch)?;
    let salvage_run = run_salvage(problem, &analysis.part)?;
    let adversary_run = run_adversary(problem, &analysis.part)?;

    let mut status = ExitStatus::Ok;
    if let Some(l) = &link_run {
        status = status.worst(l.status);
    }
    status = status.worst(salvage_run.status);

    // prefer the link-route transform for the headline numbers; the
    // dominance route is the fallback
    let (beta_transformed, mass_transformed, omega_tilde) = match &link_run {
        Some(l) if l.omega_tilde.is_some() => {
            (l.json.beta_transformed, l.json.mass_transformed, l.omega_tilde.clone())
        }
        _ => (
            salvage_run.json.beta_transformed,
            salvage_run.json.mass_transformed,
            salvage_run.headline.omega_tilde_n.clone(),
        ),
    };

    let json = GalleryJson {
        fixture: name.to_string(),
        beta_original: analysis.json.beta_original,
        beta_transformed,
        mass_original: analysis.json.mass_original,
        mass_transformed,
        analyze: analysis.json,
        link: link_run.map(|l| l.json),
        salvage: salvage_run.json,
        adversary: adversary_run.json,
    };
    Ok(GalleryRun { json, status, omega_tilde, headline: salvage_run.headline })
}
