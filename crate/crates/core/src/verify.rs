//! Batch verification: one row per (check, parameter point), deterministic
//! CSV/JSON reports, and log-log exponent fits.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    composite_scale, even_center_bound, gamma_ratio_check, glav_reduction, pointwise_bound, rhs_bound, v_factors,
    BoundId,
};
use crate::envelope::{delta, geometry, identity_checks, Geometry};
use crate::error::{Error, Result};
use crate::extrema::{
    global_max_of, scan_extrema, structure_checks, ExtremumRecord, StructureReport, Verdict, VerdictStatus,
    DEFAULT_NODES_PER_DEGREE,
};
use crate::jacobi::{alpha_star, weighted_m, Jacobi, Params, Window};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every check id, in report order.
pub const CHECK_IDS: &[&str] = &[
    "chow_eq1",
    "emn_eq2",
    "gamma_ratio",
    "identity_A0_delta",
    "identity_B1_delta",
    "identity_B1_one",
    "identity_D_delta",
    "identity_D_scaled",
    "krasikov_eq3",
    "lemma_glav",
    "lmonult_decreasing",
    "odd_29",
    "pointwise_eq",
    "thm1",
    "thm1_ratio",
    "thm3_containment",
    "thm4_center_max",
    "thm4_containment",
    "thm4_even_chain",
    "thm4_even_value",
    "thm4_odd_value",
    "thm5_unimodal",
    "v1_decreasing",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Checked,
    SkippedHypothesis,
    NumericFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Checked => "checked",
            Status::SkippedHypothesis => "skipped_hypothesis",
            Status::NumericFailure => "numeric_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub check_id: String,
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
    #[serde(deserialize_with = "real_or_nan")]
    pub lhs: f64,
    #[serde(deserialize_with = "real_or_nan")]
    pub rhs: f64,
    #[serde(deserialize_with = "real_or_nan")]
    pub margin: f64,
    pub pass: bool,
    pub status: Status,
}

/// JSON has no NaN; serde_json writes it as `null`.
fn real_or_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl VerificationResult {
    fn checked(id: &str, p: &Params, lhs: f64, rhs: f64, margin: f64) -> Self {
        let ok = lhs.is_finite() && rhs.is_finite() && !margin.is_nan();
        Self {
            check_id: id.to_string(),
            k: p.k,
            alpha: p.alpha,
            beta: p.beta,
            lhs,
            rhs,
            margin,
            pass: ok && margin > 0.0,
            status: if ok { Status::Checked } else { Status::NumericFailure },
        }
    }

    fn other(id: &str, p: &Params, status: Status) -> Self {
        Self {
            check_id: id.to_string(),
            k: p.k,
            alpha: p.alpha,
            beta: p.beta,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            pass: false,
            status,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity_rel: f64,
    pub extremum_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity_rel: 1e-9, extremum_abs: 1e-13 }
    }
}

/// Why a check produced no row value.
enum Outcome {
    Skip,
    Fail,
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        match e {
            Error::Hypothesis(_) => Outcome::Skip,
            _ => Outcome::Fail,
        }
    }
}

type CheckResult = std::result::Result<(f64, f64, f64), Outcome>;

fn require(cond: bool) -> std::result::Result<(), Outcome> {
    if cond {
        Ok(())
    } else {
        Err(Outcome::Skip)
    }
}

/// Scans and geometry shared by all checks at one parameter point.
struct Point {
    p: Params,
    tol: Tolerances,
    geom: Geometry,
    full: OnceCell<Result<Vec<ExtremumRecord>>>,
    delta: OnceCell<Result<(Window, Vec<ExtremumRecord>)>>,
}

impl Point {
    fn new(p: Params, tol: Tolerances) -> Self {
        Self { p, tol, geom: geometry(&p), full: OnceCell::new(), delta: OnceCell::new() }
    }

    fn full(&self) -> std::result::Result<&[ExtremumRecord], Outcome> {
        match self.full.get_or_init(|| scan_extrema(&self.p, &Window::FULL, DEFAULT_NODES_PER_DEGREE)) {
            Ok(r) => Ok(r),
            Err(_) => Err(Outcome::Fail),
        }
    }

    fn full_max(&self) -> std::result::Result<f64, Outcome> {
        let recs = self.full()?;
        Ok(global_max_of(&self.p, &Window::FULL, recs)?.m)
    }

    fn delta(&self) -> std::result::Result<(&Window, &[ExtremumRecord]), Outcome> {
        require(self.p.thm4_applicable())?;
        let res = self.delta.get_or_init(|| {
            let d = delta(self.p.k, self.p.alpha).ok_or_else(|| Error::Hypothesis("delta".into()))?;
            let w = Window::symmetric(d)?;
            Ok((w, scan_extrema(&self.p, &w, DEFAULT_NODES_PER_DEGREE)?))
        });
        match res {
            Ok((w, r)) => Ok((w, r)),
            Err(_) => Err(Outcome::Fail),
        }
    }

    fn delta_max(&self) -> std::result::Result<ExtremumRecord, Outcome> {
        let (w, recs) = self.delta()?;
        Ok(global_max_of(&self.p, w, recs)?)
    }

    fn structure(&self, full: bool) -> std::result::Result<StructureReport, Outcome> {
        if full {
            Ok(structure_checks(&self.p, &Window::FULL, self.full()?, &self.geom))
        } else {
            let (w, recs) = self.delta()?;
            Ok(structure_checks(&self.p, w, recs, &self.geom))
        }
    }

    fn bound_vs_max(&self, id: BoundId) -> CheckResult {
        let rhs = rhs_bound(id, &self.p)?;
        let lhs = self.full_max()?;
        Ok((lhs, rhs, rhs - lhs))
    }

    fn identity(&self, name: &str) -> CheckResult {
        require(self.p.is_ultraspherical() && self.p.alpha > 0.5 && self.p.k >= 1)?;
        let rep = identity_checks(self.p.k, self.p.alpha)?;
        let c = rep.identity(name).ok_or(Outcome::Fail)?;
        Ok((c.rel_err, self.tol.identity_rel, self.tol.identity_rel - c.rel_err))
    }

    fn run(&self, id: &str) -> CheckResult {
        let p = &self.p;
        match id {
            "chow_eq1" => self.bound_vs_max(BoundId::ChowEq1),
            "emn_eq2" => self.bound_vs_max(BoundId::EmnEq2),
            "krasikov_eq3" => self.bound_vs_max(BoundId::KrasikovEq3),
            "thm1" => self.bound_vs_max(BoundId::Thm1),
            "lemma_glav" => self.bound_vs_max(BoundId::LemmaGlav),
            "thm1_ratio" => {
                require(p.thm1_applicable())?;
                let red = glav_reduction(p)?;
                Ok((red.lhs, red.rhs, red.rhs * (1.0 + 1e-12) - red.lhs))
            }
            "thm4_even_value" => {
                require(p.thm4_applicable() && p.k.is_multiple_of(2) && p.k >= 2)?;
                let (w, _) = self.delta()?;
                let lhs = weighted_m(p, 0.0, w)?.value;
                let rhs = even_center_bound(p.k, p.alpha);
                Ok((lhs, rhs, rhs - lhs))
            }
            "thm4_even_chain" => {
                require(p.thm4_applicable() && p.k.is_multiple_of(2) && p.k >= 2)?;
                let (w, _) = self.delta()?;
                let lhs = weighted_m(p, 0.0, w)?.value;
                let rhs = even_chain_bound(p.k, p.alpha);
                Ok((lhs, rhs, rhs - lhs))
            }
            "thm4_center_max" => {
                require(p.thm4_applicable() && p.k.is_multiple_of(2) && p.k >= 2)?;
                let x = self.delta_max()?.x.abs();
                Ok((x, self.tol.extremum_abs, self.tol.extremum_abs - x))
            }
            "thm4_odd_value" => {
                require(p.thm4_applicable() && p.k % 2 == 1 && p.k >= 3)?;
                let rhs = rhs_bound(BoundId::Odd230, p)?;
                let lhs = self.delta_max()?.m;
                Ok((lhs, rhs, rhs - lhs))
            }
            "odd_29" => {
                let rhs = rhs_bound(BoundId::Odd29, p)?;
                let lhs = self.delta_max()?.m;
                Ok((lhs, rhs, rhs - lhs))
            }
            "thm4_containment" => {
                require(p.thm4_applicable())?;
                let d = self.geom.delta.ok_or(Outcome::Skip)?;
                let v = self.structure(true)?.delta_containment;
                verdict_row(v, d - v.margin, d)
            }
            "thm3_containment" => {
                require(p.thm3_applicable())?;
                let recs = self.full()?;
                let (lo, hi) = (self.geom.eta_minus.ok_or(Outcome::Skip)?, self.geom.eta_plus.ok_or(Outcome::Skip)?);
                let v = self.structure(true)?.eta_containment;
                if v.status == VerdictStatus::Skipped {
                    return Err(Outcome::Skip);
                }
                let x_max = recs.iter().map(|r| r.x).fold(f64::NEG_INFINITY, f64::max);
                let x_min = recs.iter().map(|r| r.x).fold(f64::INFINITY, f64::min);
                if hi - x_max <= x_min - lo {
                    Ok((x_max, hi, v.margin))
                } else {
                    Ok((-x_min, -lo, v.margin))
                }
            }
            "thm5_unimodal" => {
                require(p.thm5_applicable())?;
                let v = self.structure(true)?.unimodal;
                verdict_row(v, 0.0, v.margin)
            }
            "lmonult_decreasing" => {
                require(p.thm4_applicable() && p.k.is_multiple_of(2))?;
                let v = self.structure(false)?.center_decreasing;
                verdict_row(v, 0.0, v.margin)
            }
            "identity_B1_delta" => self.identity("B1_at_delta"),
            "identity_B1_one" => self.identity("B1_at_one"),
            "identity_D_delta" => self.identity("D_scaled_at_delta"),
            "identity_D_scaled" => {
                require(p.is_ultraspherical() && p.alpha > 0.5 && p.k >= 1)?;
                let rep = identity_checks(p.k, p.alpha)?;
                let worst = ["D_scaled_quadratic_at_0", "D_scaled_quadratic_at_half_delta", "D_scaled_quadratic_at_delta"]
                    .iter()
                    .filter_map(|n| rep.identity(n))
                    .map(|c| c.rel_err)
                    .fold(0.0, f64::max);
                Ok((worst, self.tol.identity_rel, self.tol.identity_rel - worst))
            }
            "identity_A0_delta" => {
                require(p.is_ultraspherical() && p.alpha > 0.5 && p.k >= 1)?;
                let rep = identity_checks(p.k, p.alpha)?;
                let s = rep.sign("A0_zero_inside_delta").ok_or(Outcome::Fail)?;
                Ok((s.value, 0.0, -s.value))
            }
            "pointwise_eq" => {
                require(p.alpha >= -0.5 && p.beta >= -0.5)?;
                let jac = Jacobi::new(*p);
                let mut worst: Option<(f64, f64, f64)> = None;
                for i in 0..64 {
                    let x = (PI * (i as f64 + 0.5) / 64.0).cos();
                    let Ok(rhs) = pointwise_bound(p, x) else { continue };
                    let lhs = crate::jacobi::weighted_m_with(&jac, x, &Window::FULL)?.value;
                    let m = rhs - lhs;
                    if worst.is_none_or(|w| m < w.2) {
                        worst = Some((lhs, rhs, m));
                    }
                }
                worst.ok_or(Outcome::Skip)
            }
            "gamma_ratio" => {
                let mut best: Option<(f64, f64, f64)> = None;
                for x in [p.kf(), p.kf() + 2.0 * p.alpha] {
                    if !(x >= 0.0) {
                        continue;
                    }
                    let g = gamma_ratio_check(x)?;
                    if best.is_none_or(|b| g.ln_gap < b.2) {
                        best = Some((g.ln_lhs, g.ln_rhs, g.ln_gap));
                    }
                }
                best.ok_or(Outcome::Skip)
            }
            "v1_decreasing" => {
                require(p.k % 2 == 1 && p.k >= 3 && p.is_ultraspherical() && p.alpha >= 0.5)?;
                let here = v_factors(p.k, p.alpha)?.v1;
                let next_k = v_factors(p.k + 2, p.alpha)?.v1;
                let next_a = v_factors(p.k, p.alpha + (1e-3 * p.alpha).max(1e-3))?.v1;
                let lhs = next_k.max(next_a);
                Ok((lhs, here, here - lhs))
            }
            _ => Err(Outcome::Fail),
        }
    }
}

/// `sqrt((r^2-4a^2)/(r^2-4)) * 2r / (pi sqrt((2k+1)(r+2a)))`, the Gamma-ratio
/// bound on `M(0; -delta, delta)`; it simplifies to `2r / (pi sqrt(r^2-4))`.
pub fn even_chain_bound(k: u32, alpha: f64) -> f64 {
    let r = 2.0 * k as f64 + 2.0 * alpha + 1.0;
    ((r * r - 4.0 * alpha * alpha) / (r * r - 4.0)).sqrt() * 2.0 * r
        / (PI * ((2.0 * k as f64 + 1.0) * (r + 2.0 * alpha)).sqrt())
}

fn verdict_row(v: Verdict, lhs: f64, rhs: f64) -> CheckResult {
    match v.status {
        VerdictStatus::Skipped => Err(Outcome::Skip),
        // no consecutive pair to compare
        VerdictStatus::Checked if v.margin.is_infinite() => Err(Outcome::Skip),
        VerdictStatus::Checked => Ok((lhs, rhs, v.margin)),
    }
}

pub fn is_known_check(id: &str) -> bool {
    CHECK_IDS.contains(&id)
}

pub fn run_check(check_id: &str, p: &Params) -> Result<VerificationResult> {
    Ok(run_checks(&[check_id.to_string()], p, &Tolerances::default())?.remove(0))
}

/// All requested checks at one point, sharing extremum scans.
pub fn run_checks(checks: &[String], p: &Params, tol: &Tolerances) -> Result<Vec<VerificationResult>> {
    if let Some(bad) = checks.iter().find(|c| !is_known_check(c)) {
        return Err(Error::Config(format!("unknown check id '{bad}'")));
    }
    let pt = Point::new(*p, *tol);
    Ok(checks
        .iter()
        .map(|id| match pt.run(id) {
            Ok((lhs, rhs, margin)) => VerificationResult::checked(id, p, lhs, rhs, margin),
            Err(Outcome::Skip) => VerificationResult::other(id, p, Status::SkippedHypothesis),
            Err(Outcome::Fail) => VerificationResult::other(id, p, Status::NumericFailure),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KParity {
    #[default]
    Any,
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSpec {
    pub min: u32,
    pub max: u32,
    #[serde(default = "one")]
    pub step: u32,
    #[serde(default)]
    pub parity: KParity,
}

fn one() -> u32 {
    1
}

impl KSpec {
    pub fn values(&self) -> Vec<u32> {
        if self.step == 0 || self.min > self.max {
            return Vec::new();
        }
        (self.min..=self.max)
            .step_by(self.step as usize)
            .filter(|k| match self.parity {
                KParity::Any => true,
                KParity::Even => k % 2 == 0,
                KParity::Odd => k % 2 == 1,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum AlphaSpec {
    List(Vec<f64>),
    // tried before LogRange, whose fields are a subset
    Random { lo: f64, hi: f64, count: usize, seed: u64 },
    LogRange { lo: f64, hi: f64, count: usize },
}

impl AlphaSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            AlphaSpec::List(ref v) => {
                if v.is_empty() {
                    return bad("alpha_spec list is empty".into());
                }
                Ok(v.clone())
            }
            AlphaSpec::LogRange { lo, hi, count } => {
                if !(lo > 0.0 && hi >= lo && count >= 1 && hi.is_finite()) {
                    return bad(format!("log range needs 0 < lo <= hi and count >= 1 (lo = {lo}, hi = {hi}, count = {count})"));
                }
                if count == 1 {
                    return Ok(vec![lo]);
                }
                let (l, h) = (lo.ln(), hi.ln());
                Ok((0..count)
                    .map(|i| match i {
                        0 => lo,
                        i if i == count - 1 => hi,
                        i => (l + (h - l) * i as f64 / (count - 1) as f64).exp(),
                    })
                    .collect())
            }
            AlphaSpec::Random { lo, hi, count, seed } => {
                if !(lo > -1.0 && hi > lo && count >= 1 && hi.is_finite()) {
                    return bad(format!("random range needs -1 < lo < hi and count >= 1 (lo = {lo}, hi = {hi})"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..count).map(|_| rng.gen_range(lo..hi)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    #[default]
    EqualAlpha,
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub checks: Vec<String>,
    pub k_spec: KSpec,
    pub alpha_spec: AlphaSpec,
    #[serde(default)]
    pub beta_mode: BetaMode,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid sweep config: {e}")))
    }

    /// Expanded check list (`all` stands for every id).
    pub fn check_list(&self) -> Result<Vec<String>> {
        if self.checks.is_empty() {
            return Err(Error::Config("checks list is empty".into()));
        }
        let mut out = Vec::new();
        for c in &self.checks {
            if c == "all" {
                out.extend(CHECK_IDS.iter().map(|s| s.to_string()));
            } else if is_known_check(c) {
                out.push(c.clone());
            } else {
                return Err(Error::Config(format!("unknown check id '{c}'")));
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Validated parameter points in grid order.
    pub fn points(&self) -> Result<Vec<Params>> {
        let ks = self.k_spec.values();
        if ks.is_empty() {
            return Err(Error::Config(format!("k range is empty: {:?}", self.k_spec)));
        }
        let alphas = self.alpha_spec.values()?;
        if let BetaMode::Grid(b) = &self.beta_mode {
            if b.is_empty() {
                return Err(Error::Config("beta grid is empty".into()));
            }
        }
        let tol = &self.tolerances;
        if !(tol.identity_rel > 0.0 && tol.extremum_abs > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        let mut pts = Vec::new();
        for &k in &ks {
            for &a in &alphas {
                let betas = match &self.beta_mode {
                    BetaMode::EqualAlpha => vec![a],
                    BetaMode::Grid(b) => b.clone(),
                };
                for b in betas {
                    pts.push(Params::new(k, a, b).map_err(|e| Error::Config(e.to_string()))?);
                }
            }
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped_hypothesis: usize,
    pub numeric_failure: usize,
}

impl Counts {
    fn add(&mut self, r: &VerificationResult) {
        match r.status {
            Status::Checked => {
                self.checked += 1;
                if r.pass {
                    self.passed += 1;
                } else {
                    self.failed += 1;
                }
            }
            Status::SkippedHypothesis => self.skipped_hypothesis += 1,
            Status::NumericFailure => self.numeric_failure += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub config_echo: Option<SweepConfig>,
    pub counts: BTreeMap<String, Counts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    pub rows: Vec<VerificationResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

fn sort_rows(rows: &mut [VerificationResult]) {
    rows.sort_by(|a, b| {
        a.check_id
            .cmp(&b.check_id)
            .then(a.k.cmp(&b.k))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.beta.total_cmp(&b.beta))
    });
}

impl Report {
    pub fn from_rows(mut rows: Vec<VerificationResult>, config_echo: Option<SweepConfig>) -> Self {
        sort_rows(&mut rows);
        let mut counts: BTreeMap<String, Counts> = BTreeMap::new();
        for r in &rows {
            counts.entry(r.check_id.clone()).or_default().add(r);
        }
        Report { metadata: Metadata { tool_version: TOOL_VERSION.to_string(), config_echo, counts }, rows }
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(&self.rows)
    }

    /// CSV body: header row plus one line per result, reals at 17 significant digits.
    pub fn csv_body(&self) -> String {
        let mut s = String::from("check_id,k,alpha,beta,lhs,rhs,margin,pass,status\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.check_id,
                r.k,
                fmt_real(r.alpha),
                fmt_real(r.beta),
                fmt_real(r.lhs),
                fmt_real(r.rhs),
                fmt_real(r.margin),
                r.pass,
                r.status.as_str()
            );
        }
        s
    }

    /// CSV with a leading `#` comment line carrying the tool version and a timestamp.
    pub fn to_csv(&self, timestamp: &str) -> String {
        format!("# jacobi-envelope {TOOL_VERSION} generated {timestamp}\n{}", self.csv_body())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self, format: Format, timestamp: &str) -> String {
        match format {
            Format::Csv => self.to_csv(timestamp),
            Format::Json => self.to_json(),
        }
    }
}

/// 17 significant digits, lossless for f64.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// 0: no checked row fails; 1: some checked row fails; 3: numeric failures only.
pub fn exit_code(rows: &[VerificationResult]) -> i32 {
    if rows.iter().any(|r| r.status == Status::Checked && !r.pass) {
        1
    } else if rows.iter().any(|r| r.status == Status::NumericFailure) {
        3
    } else {
        0
    }
}

pub fn sweep(cfg: &SweepConfig, exec: Execution) -> Result<Report> {
    let checks = cfg.check_list()?;
    let points = cfg.points()?;
    let tol = cfg.tolerances;
    let run = |p: &Params| run_checks(&checks, p, &tol);
    let nested: Vec<Vec<VerificationResult>> = match exec {
        Execution::Serial => points.iter().map(run).collect::<Result<_>>()?,
        Execution::Parallel => points.par_iter().map(run).collect::<Result<_>>()?,
    };
    Ok(Report::from_rows(nested.into_iter().flatten().collect(), Some(cfg.clone())))
}

/// Parse the CSV body written by [`Report::to_csv`]; `#` lines are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<VerificationResult>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "check_id,k,alpha,beta,lhs,rhs,margin,pass,status" => {}
        other => return Err(Error::Config(format!("unexpected CSV header: {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Config(format!("malformed CSV row {}: {line}", i + 1));
            if f.len() != 9 {
                return Err(bad());
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            let status = match f[8] {
                "checked" => Status::Checked,
                "skipped_hypothesis" => Status::SkippedHypothesis,
                "numeric_failure" => Status::NumericFailure,
                _ => return Err(bad()),
            };
            Ok(VerificationResult {
                check_id: f[0].to_string(),
                k: f[1].parse().map_err(|_| bad())?,
                alpha: real(f[2])?,
                beta: real(f[3])?,
                lhs: real(f[4])?,
                rhs: real(f[5])?,
                margin: real(f[6])?,
                pass: f[7].parse().map_err(|_| bad())?,
                status,
            })
        })
        .collect()
}

/// Rows from either report format.
pub fn parse_report(text: &str) -> Result<Vec<VerificationResult>> {
    if text.trim_start().starts_with('{') {
        let rep: Report = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON report: {e}")))?;
        Ok(rep.rows)
    } else {
        parse_csv(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predictor {
    Alpha,
    AlphaComposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub n: usize,
}

/// Least-squares slope of `ln lhs` against `ln alpha` or `ln(alpha^{1/3}(1+alpha/k)^{1/6})`.
pub fn fit_exponent(rows: &[VerificationResult], predictor: Predictor) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status == Status::Checked && r.lhs > 0.0 && r.lhs.is_finite() && r.alpha > 0.0)
        .map(|r| {
            let x = match predictor {
                Predictor::Alpha => r.alpha,
                Predictor::AlphaComposite => composite_scale(r.k, r.alpha),
            };
            (x.ln(), r.lhs.ln())
        })
        .filter(|(x, _)| x.is_finite())
        .collect();
    let n = pts.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!("need at least 5 usable rows, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("predictor has no spread".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(Fit { slope, stderr, intercept, n })
}

/// Alpha values for the cube-root bound sweep: `alpha*` to `10^4`, log-spaced.
pub fn thm1_alpha_grid(count: usize) -> Vec<f64> {
    AlphaSpec::LogRange { lo: alpha_star(), hi: 1e4, count }.values().expect("valid range")
}
