//! Randomized both-sides verification of the closed-form identities.
//!
//! Every case draws parameters into a [`ParamSet`] and evaluates
//! `eval(lhs_params, rhs_params)`. Normal trials pass the same set twice;
//! mutation trials perturb one entry on the left only, which must break
//! the identity if the comparison is not vacuous.

mod catalog;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::sampling::{cell_rng, Sampler, SamplerConfig};

pub use catalog::catalog;

/// Attempts per trial before the trial is recorded as exhausted.
pub const MAX_ATTEMPTS: u64 = 64;
/// A case fails when more than this fraction of draws is rejected.
pub const MAX_REJECTION_RATE: f64 = 0.9;
/// Relative size of a mutation.
pub const MUTATION_REL: f64 = 1e-3;
/// Residual above which a mutated trial counts as broken.
pub const MUTATION_BREAK: f64 = 1e-5;

/// One named parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Int(i64),
    Ints(Vec<i64>),
    Complex(Complex64),
    List(Vec<Complex64>),
}

/// Sampled parameters of one trial, ordered by name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet(BTreeMap<String, Param>);

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_c(mut self, key: &str, z: Complex64) -> Self {
        self.0.insert(key.into(), Param::Complex(z));
        self
    }

    pub fn with_list(mut self, key: &str, zs: Vec<Complex64>) -> Self {
        self.0.insert(key.into(), Param::List(zs));
        self
    }

    pub fn with_int(mut self, key: &str, n: usize) -> Self {
        self.0.insert(key.into(), Param::Int(n as i64));
        self
    }

    pub fn with_ints(mut self, key: &str, ns: Vec<usize>) -> Self {
        self.0.insert(key.into(), Param::Ints(ns.into_iter().map(|n| n as i64).collect()));
        self
    }

    fn get(&self, key: &str) -> Result<&Param> {
        self.0.get(key).ok_or_else(|| Error::InvalidArgument(format!("missing parameter `{key}`")))
    }

    fn kind_error(key: &str, want: &str) -> Error {
        Error::InvalidArgument(format!("parameter `{key}` is not {want}"))
    }

    pub fn c(&self, key: &str) -> Result<Complex64> {
        match self.get(key)? {
            Param::Complex(z) => Ok(*z),
            _ => Err(Self::kind_error(key, "a complex number")),
        }
    }

    pub fn list(&self, key: &str) -> Result<&[Complex64]> {
        match self.get(key)? {
            Param::List(zs) => Ok(zs),
            _ => Err(Self::kind_error(key, "a complex list")),
        }
    }

    pub fn int(&self, key: &str) -> Result<usize> {
        match self.get(key)? {
            Param::Int(n) if *n >= 0 => Ok(*n as usize),
            _ => Err(Self::kind_error(key, "a nonnegative integer")),
        }
    }

    pub fn ints(&self, key: &str) -> Result<Vec<usize>> {
        match self.get(key)? {
            Param::Ints(ns) if ns.iter().all(|&n| n >= 0) => Ok(ns.iter().map(|&n| n as usize).collect()),
            _ => Err(Self::kind_error(key, "a list of nonnegative integers")),
        }
    }

    /// Complex entries (list elements individually) that a mutation may touch.
    pub fn slots(&self) -> Vec<(String, Option<usize>)> {
        let mut out = Vec::new();
        for (k, v) in &self.0 {
            match v {
                Param::Complex(_) => out.push((k.clone(), None)),
                Param::List(zs) => out.extend((0..zs.len()).map(|i| (k.clone(), Some(i)))),
                _ => {}
            }
        }
        out
    }

    /// Copy with one complex entry scaled by `1 + rel`.
    pub fn perturbed(&self, slot: &(String, Option<usize>), rel: f64) -> Self {
        let mut out = self.clone();
        let f = 1.0 + rel;
        match (out.0.get_mut(&slot.0), slot.1) {
            (Some(Param::Complex(z)), None) => *z *= f,
            (Some(Param::List(zs)), Some(i)) if i < zs.len() => zs[i] *= f,
            _ => {}
        }
        out
    }

    /// Complex numbers become `[re, im]`; lists become arrays of those.
    pub fn to_json(&self) -> Value {
        let map = self
            .0
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    Param::Int(n) => json!(n),
                    Param::Ints(ns) => json!(ns),
                    Param::Complex(z) => cjson(*z),
                    Param::List(zs) => Value::Array(zs.iter().map(|&z| cjson(z)).collect()),
                };
                (k.clone(), v)
            })
            .collect();
        Value::Object(map)
    }
}

/// Residual of one evaluation together with the cancellation ratio of its
/// summation side (1 when nothing cancels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub residual: f64,
    pub condition: f64,
}

impl Outcome {
    pub fn exact(residual: f64) -> Self {
        Self { residual, condition: 1.0 }
    }

    /// Worst residual and worst condition of the two.
    pub fn worst(self, other: Outcome) -> Outcome {
        Outcome { residual: nan_max(self.residual, other.residual), condition: nan_max(self.condition, other.condition) }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

pub type DrawFn = fn(&mut Sampler) -> Result<ParamSet>;
pub type EvalFn = fn(&ParamSet, &ParamSet) -> Result<Outcome>;

/// One catalog identity.
#[derive(Clone, Copy)]
pub struct Case {
    pub id: &'static str,
    pub family: Family,
    pub summary: &'static str,
    pub default_tol: f64,
    pub draw: DrawFn,
    pub eval: EvalFn,
    /// Parameters the identity holds for whatever their value, so perturbing
    /// them cannot break it. Mutation checks skip them.
    pub invariant_in: &'static [&'static str],
}

impl std::fmt::Debug for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Case").field("id", &self.id).field("family", &self.family).finish()
    }
}

impl Case {
    /// Draws whose summation side cancels by more than this ratio are
    /// rejected: their rounding error alone would use up 1% of the budget.
    pub fn condition_limit(&self) -> f64 {
        0.01 * self.default_tol / f64::EPSILON
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Theta,
    Weierstrass,
    Summation,
    Geometric,
    PqPower,
    Karlsson,
    Interpolation,
    FgInversion,
    Characterization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub params: Value,
    pub residual: f64,
}

/// Per-case report; serializes to the fixed report schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub id: String,
    pub trials: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub pass: bool,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MutationStats {
    /// Passing trials whose mutated evaluation completed.
    pub checked: usize,
    pub broken: usize,
}

impl MutationStats {
    pub fn broken_fraction(&self) -> f64 {
        if self.checked == 0 {
            1.0
        } else {
            self.broken as f64 / self.checked as f64
        }
    }
}

/// Report plus bookkeeping that is not part of the serialized schema.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRun {
    pub report: ResidualReport,
    pub tol: f64,
    pub attempts: u64,
    pub rejections: u64,
    pub mutation: Option<MutationStats>,
}

impl CaseRun {
    pub fn rejection_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.rejections as f64 / self.attempts as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogConfig {
    /// Comma-separated case ids or id substrings; empty selects every case.
    pub filter: String,
    pub seed: u64,
    pub trials: usize,
    /// Overrides every case's default tolerance.
    pub tol: Option<f64>,
    pub sampler: SamplerConfig,
    pub mutation: bool,
    /// Worker threads; falls back to `ELLIPTHETA_THREADS`, then to rayon's default.
    pub threads: Option<usize>,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        Self {
            filter: String::new(),
            seed: 0,
            trials: 100,
            tol: None,
            sampler: SamplerConfig::default(),
            mutation: false,
            threads: None,
        }
    }
}

impl CatalogConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance must be positive and finite (got {t})")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("thread count must be positive".into()));
        }
        self.sampler.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogReport {
    pub seed: u64,
    pub tol: Option<f64>,
    pub runs: Vec<CaseRun>,
}

impl CatalogReport {
    pub fn pass(&self) -> bool {
        self.runs.iter().all(|r| r.report.pass)
    }

    pub fn reports(&self) -> impl Iterator<Item = &ResidualReport> {
        self.runs.iter().map(|r| &r.report)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "seed": self.seed,
            "tol": self.tol,
            "cases": self.reports().collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            let rep = &r.report;
            s += &format!(
                "{:<24} {} trials={} max={:.3e} mean={:.3e} tol={:.1e} rejected={}/{}\n",
                rep.id,
                if rep.pass { "PASS" } else { "FAIL" },
                rep.trials,
                rep.max_residual,
                rep.mean_residual,
                r.tol,
                r.rejections,
                r.attempts
            );
        }
        s
    }
}

/// Whether `id` is selected by a comma-separated list of patterns. A pattern
/// that is itself a case id selects only that case; any other pattern
/// selects the ids containing it.
pub fn matches_filter(id: &str, filter: &str) -> bool {
    let pats: Vec<&str> = filter.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if pats.is_empty() {
        return true;
    }
    let ids = catalog();
    pats.iter().any(|p| if ids.iter().any(|c| c.id == *p) { id == *p } else { id.contains(p) })
}

/// Reads `ELLIPTHETA_THREADS`; unset means no cap.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("ELLIPTHETA_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!("ELLIPTHETA_THREADS must be a positive integer (got {v:?})"))),
        },
    }
}

enum TrialResult {
    Done { params: ParamSet, residual: f64, mutation: Option<bool> },
    Error { params: Option<ParamSet>, message: String },
    Exhausted,
}

struct TrialRecord {
    attempts: u64,
    rejections: u64,
    result: TrialResult,
}

fn run_trial(case: &Case, cfg: &CatalogConfig, tol: f64, trial: u64) -> TrialRecord {
    let limit = case.condition_limit();
    let mut rejections = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let mut sampler = Sampler::new(cell_rng(cfg.seed, case.id, trial, attempt), cfg.sampler);
        let params = match (case.draw)(&mut sampler) {
            Ok(ps) => ps,
            Err(e) if e.is_rejection() => {
                rejections += 1;
                continue;
            }
            Err(e) => {
                return TrialRecord {
                    attempts: attempt + 1,
                    rejections,
                    result: TrialResult::Error { params: None, message: e.to_string() },
                }
            }
        };
        let outcome = match (case.eval)(&params, &params) {
            Ok(o) if o.condition <= limit => o,
            Ok(_) => {
                rejections += 1;
                continue;
            }
            Err(e) if e.is_rejection() => {
                rejections += 1;
                continue;
            }
            Err(e) => {
                return TrialRecord {
                    attempts: attempt + 1,
                    rejections,
                    result: TrialResult::Error { params: Some(params), message: e.to_string() },
                }
            }
        };
        let residual = outcome.residual;
        let mutation = if cfg.mutation && residual <= tol {
            mutate(case, cfg.seed, trial, &params)
        } else {
            None
        };
        return TrialRecord {
            attempts: attempt + 1,
            rejections,
            result: TrialResult::Done { params, residual, mutation },
        };
    }
    TrialRecord { attempts: MAX_ATTEMPTS, rejections, result: TrialResult::Exhausted }
}

/// Perturbs one left-hand parameter; `Some(true)` when the identity breaks.
fn mutate(case: &Case, seed: u64, trial: u64, params: &ParamSet) -> Option<bool> {
    let slots: Vec<_> = params.slots().into_iter().filter(|(k, _)| !case.invariant_in.contains(&k.as_str())).collect();
    if slots.is_empty() {
        return None;
    }
    let mut rng = cell_rng(seed, case.id, trial, u64::MAX);
    let slot = &slots[rng.gen_range(0..slots.len())];
    let mutated = params.perturbed(slot, MUTATION_REL);
    match (case.eval)(&mutated, params) {
        Ok(o) => Some(!(o.residual <= MUTATION_BREAK)),
        Err(_) => None,
    }
}

/// Runs `trials` trials of one case. Trials are independent and merged in
/// trial order, so the result does not depend on scheduling.
pub fn run_case(case: &Case, cfg: &CatalogConfig) -> CaseRun {
    let tol = cfg.tol.unwrap_or(case.default_tol);
    let records: Vec<TrialRecord> =
        (0..cfg.trials as u64).into_par_iter().map(|t| run_trial(case, cfg, tol, t)).collect();

    let mut attempts = 0;
    let mut rejections = 0;
    let mut failures = Vec::new();
    let mut residuals = Vec::new();
    let mut mutation = MutationStats::default();
    let mut exhausted = 0usize;
    for rec in records {
        attempts += rec.attempts;
        rejections += rec.rejections;
        match rec.result {
            TrialResult::Done { params, residual, mutation: m } => {
                let r = if residual.is_nan() { f64::MAX } else { residual };
                if !(r <= tol) {
                    failures.push(Failure { params: params.to_json(), residual: r });
                }
                residuals.push(r);
                if let Some(broken) = m {
                    mutation.checked += 1;
                    mutation.broken += broken as usize;
                }
            }
            TrialResult::Error { params, message } => {
                let mut v = params.map_or_else(|| json!({}), |p| p.to_json());
                v["error"] = json!(message);
                failures.push(Failure { params: v, residual: f64::MAX });
                residuals.push(f64::MAX);
            }
            TrialResult::Exhausted => exhausted += 1,
        }
    }
    let rate = if attempts == 0 { 0.0 } else { rejections as f64 / attempts as f64 };
    if exhausted > 0 || rate > MAX_REJECTION_RATE {
        failures.push(Failure {
            params: json!({ "rejected_draws": rejections, "attempts": attempts, "exhausted_trials": exhausted }),
            residual: f64::MAX,
        });
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let mean_residual = if residuals.is_empty() { 0.0 } else { residuals.iter().sum::<f64>() / residuals.len() as f64 };
    let pass = failures.is_empty() && max_residual <= tol;
    CaseRun {
        report: ResidualReport {
            id: case.id.to_string(),
            trials: residuals.len(),
            max_residual,
            mean_residual,
            pass,
            failures,
        },
        tol,
        attempts,
        rejections,
        mutation: cfg.mutation.then_some(mutation),
    }
}

/// Runs every selected case. Deterministic for a fixed configuration.
pub fn run_catalog(cfg: &CatalogConfig) -> Result<CatalogReport> {
    cfg.validate()?;
    let threads = match cfg.threads {
        Some(n) => Some(n),
        None => threads_from_env()?,
    };
    let cases: Vec<Case> = catalog().into_iter().filter(|c| matches_filter(c.id, &cfg.filter)).collect();
    let work = || cases.par_iter().map(|c| run_case(c, cfg)).collect::<Vec<_>>();
    let runs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(CatalogReport { seed: cfg.seed, tol: cfg.tol, runs })
}

fn run_family(family: Family, seed: u64, trials: usize, sampler: SamplerConfig) -> Result<Vec<ResidualReport>> {
    let cfg = CatalogConfig { seed, trials, sampler, ..Default::default() };
    cfg.validate()?;
    Ok(catalog().iter().filter(|c| c.family == family).map(|c| run_case(c, &cfg).report).collect())
}

/// Three-term Weierstrass relation, its generalization over node lists, and
/// the `k = 0` specialization.
pub fn check_weierstrass_family(seed: u64, trials: usize, sampler: SamplerConfig) -> Result<Vec<ResidualReport>> {
    run_family(Family::Weierstrass, seed, trials, sampler)
}

/// Balanced terminating VWP summations.
pub fn check_summation_family(seed: u64, trials: usize, sampler: SamplerConfig) -> Result<Vec<ResidualReport>> {
    run_family(Family::Summation, seed, trials, sampler)
}

/// Karlsson-Minton type expansions.
pub fn check_karlsson_family(seed: u64, trials: usize, sampler: SamplerConfig) -> Result<Vec<ResidualReport>> {
    run_family(Family::Karlsson, seed, trials, sampler)
}

/// Expansions of `P(x)^N` and `Q(x)^N` over geometric nodes.
pub fn check_pq_power_expansions(seed: u64, trials: usize, sampler: SamplerConfig) -> Result<Vec<ResidualReport>> {
    run_family(Family::PqPower, seed, trials, sampler)
}

#[cfg(test)]
mod tests;
