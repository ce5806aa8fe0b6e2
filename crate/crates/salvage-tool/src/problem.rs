//! Problem-file schema, validation, and resolution into core objects.
//!
//! A problem is JSON:
//!
//! ```json
//! {
//!   "domain": [0, 3],
//!   "omega": "x - 1",
//!   "g_prime": "2",
//!   "link": "x + 2",
//!   "params": {"z": 2},
//!   "tolerances": {"quad_tol": 1e-10, "a_tol": 1e-9, "grid_points": 1024,
//!                   "bins": 256, "n_schedule": [64, 128, 256, 512, 1024]}
//! }
//! ```
//!
//! `domain` endpoints accept the sentinels `"-inf"`/`"inf"`; an unbounded
//! domain is truncated to the quadrature window (`[-10, 10]` by default).
//! `omega`, `g_prime`, and `g` are either a single expression string or a
//! piecewise list `[{"interval": [lo, hi], "expr": "..."}]`. Exactly one of
//! `g_prime`/`g` is required (`g` is differentiated; if both are given they
//! are cross-checked and disagreements become warnings).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use salvage_core::{parse_expr, Interval, IntervalSet, Params, RealFn, TruncationPolicy};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Number(f64),
    Sentinel(String),
}

impl Bound {
    fn resolve(&self, field: &str) -> Result<f64> {
        match self {
            Bound::Number(v) => Ok(*v),
            Bound::Sentinel(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => bail!("{field}: unknown bound `{other}` (use a number, \"-inf\", or \"inf\")"),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct PieceSpec {
    pub interval: [Bound; 2],
    pub expr: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FnSpec {
    Expr(String),
    Pieces(Vec<PieceSpec>),
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub quad_tol: Option<f64>,
    pub a_tol: Option<f64>,
    pub grid_points: Option<usize>,
    pub bins: Option<usize>,
    pub n_schedule: Option<Vec<usize>>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub domain: [Bound; 2],
    pub omega: FnSpec,
    #[serde(default)]
    pub g_prime: Option<FnSpec>,
    #[serde(default)]
    pub g: Option<FnSpec>,
    #[serde(default)]
    pub link: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
}

/// A problem resolved into evaluable functions on a finite domain.
#[derive(Debug)]
pub struct Problem {
    pub domain: IntervalSet,
    pub omega: RealFn,
    pub g_prime: RealFn,
    pub link: Option<RealFn>,
    pub quad_tol: f64,
    pub a_tol: f64,
    pub grid_points: usize,
    pub bins: usize,
    pub n_schedule: Vec<usize>,
    pub epsilon: f64,
    /// Non-fatal findings (e.g. `g` vs `g_prime` disagreement).
    pub warnings: Vec<String>,
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    serde_json::from_str(text).map_err(|e| anyhow!("problem file: {e}"))
}

fn build_fn(
    spec: &FnSpec,
    field: &str,
    domain_hull: Interval,
    params: &Params,
) -> Result<RealFn> {
    match spec {
        FnSpec::Expr(text) => {
            let expr = parse_expr(text, params).map_err(|e| anyhow!("{field}: {e}"))?;
            RealFn::from_expr(expr, domain_hull, params.clone()).map_err(|e| anyhow!("{field}: {e}"))
        }
        FnSpec::Pieces(pieces) => {
            if pieces.is_empty() {
                bail!("{field}: piecewise list is empty");
            }
            let mut built = Vec::with_capacity(pieces.len());
            for (i, p) in pieces.iter().enumerate() {
                let lo = p.interval[0].resolve(&format!("{field}[{i}].interval"))?;
                let hi = p.interval[1].resolve(&format!("{field}[{i}].interval"))?;
                if lo >= hi || lo.is_nan() || hi.is_nan() {
                    bail!("{field}[{i}].interval: [{lo}, {hi}] is empty");
                }
                let expr = parse_expr(&p.expr, params)
                    .map_err(|e| anyhow!("{field}[{i}].expr: {e}"))?;
                built.push((Interval::closed(lo, hi), expr));
            }
            RealFn::from_pieces(built, params.clone()).map_err(|e| anyhow!("{field}: {e}"))
        }
    }
}

impl ProblemSpec {
    /// Validates and resolves the spec; `z_override` replaces `params.z`.
    pub fn resolve(&self, z_override: Option<f64>) -> Result<Problem> {
        let mut warnings = Vec::new();
        let mut params: Params = self.params.clone().into_iter().collect();
        if let Some(z) = z_override {
            params.insert("z".to_string(), z);
        }

        let lo = self.domain[0].resolve("domain")?;
        let hi = self.domain[1].resolve("domain")?;
        if lo >= hi || lo.is_nan() || hi.is_nan() {
            bail!("domain: [{lo}, {hi}] is empty");
        }
        let window = TruncationPolicy::default().window;
        let raw = IntervalSet::from_interval(Interval::closed(lo, hi));
        let domain = raw.clip_to_window(window);
        if domain != raw {
            warnings.push(format!(
                "domain: unbounded endpoints truncated to [-{window}, {window}]"
            ));
        }
        let hull = domain.hull().expect("nonempty domain");

        let omega = build_fn(&self.omega, "omega", hull, &params)?;

        let g_prime = match (&self.g_prime, &self.g) {
            (None, None) => bail!("g_prime: missing (provide g_prime or g)"),
            (Some(gp), None) => build_fn(gp, "g_prime", hull, &params)?,
            (None, Some(g)) => build_fn(g, "g", hull, &params)?.differentiate(),
            (Some(gp), Some(g)) => {
                let supplied = build_fn(gp, "g_prime", hull, &params)?;
                let derived = build_fn(g, "g", hull, &params)?.differentiate();
                let mut worst = 0.0f64;
                for x in domain.sample_grid(257) {
                    if let (Ok(a), Ok(b)) = (supplied.eval(x), derived.eval(x)) {
                        worst = worst.max((a - b).abs());
                    }
                }
                if worst > 1e-6 {
                    warnings.push(format!(
                        "g_prime disagrees with the derivative of g (max |diff| = {worst:.3e}); using g_prime"
                    ));
                }
                supplied
            }
        };

        let link = match &self.link {
            Some(text) => {
                let expr = parse_expr(text, &params).map_err(|e| anyhow!("link: {e}"))?;
                Some(RealFn::from_expr(expr, hull, params.clone()).map_err(|e| anyhow!("link: {e}"))?)
            }
            None => None,
        };

        let n_schedule = self
            .tolerances
            .n_schedule
            .clone()
            .unwrap_or_else(|| vec![64, 128, 256, 512, 1024]);
        if n_schedule.is_empty() {
            bail!("tolerances.n_schedule: empty");
        }
        if n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            bail!("tolerances.n_schedule: must be strictly increasing");
        }

        Ok(Problem {
            domain,
            omega,
            g_prime,
            link,
            quad_tol: self.tolerances.quad_tol.unwrap_or(1e-10),
            a_tol: self.tolerances.a_tol.unwrap_or(1e-9),
            grid_points: self.tolerances.grid_points.unwrap_or(1024),
            bins: self.tolerances.bins.unwrap_or(256),
            n_schedule,
            epsilon: self.tolerances.epsilon.unwrap_or(0.01),
            warnings,
        })
    }
}
