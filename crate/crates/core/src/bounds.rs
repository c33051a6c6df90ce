//! Right-hand sides of the known and new bounds on `max M`, plus the
//! auxiliary inequalities the odd and even cases are built from.

use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::envelope::geometry;
use crate::error::{domain, Error, Result};
use crate::jacobi::{alpha_star, ln_gamma_ratio, Params};
use crate::lgamma::{ln_gamma, stirling_correction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    ChowEq1,
    EmnEq2,
    KrasikovEq3,
    Thm1,
    Thm4,
    LemmaGlav,
    Odd230,
    Odd29,
}

impl BoundId {
    pub const ALL: [BoundId; 8] = [
        BoundId::ChowEq1,
        BoundId::EmnEq2,
        BoundId::KrasikovEq3,
        BoundId::Thm1,
        BoundId::Thm4,
        BoundId::LemmaGlav,
        BoundId::Odd230,
        BoundId::Odd29,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::ChowEq1 => "chow_eq1",
            BoundId::EmnEq2 => "emn_eq2",
            BoundId::KrasikovEq3 => "krasikov_eq3",
            BoundId::Thm1 => "thm1",
            BoundId::Thm4 => "thm4",
            BoundId::LemmaGlav => "lemma_glav",
            BoundId::Odd230 => "odd_230",
            BoundId::Odd29 => "odd_29",
        }
    }

    /// `Err(Hypothesis)` naming the failed predicate when the bound is not claimed at `p`.
    pub fn check_hypothesis(self, p: &Params) -> Result<()> {
        let (k, a, b) = (p.k, p.alpha, p.beta);
        let odd = k % 2 == 1;
        let fail = |what: &str| Err(Error::Hypothesis(format!("{}: {what}", self.as_str())));
        match self {
            BoundId::ChowEq1 if !(-0.5 < b && b <= a && a < 0.5) => fail("-1/2 < beta <= alpha < 1/2"),
            BoundId::EmnEq2 if !(a >= -0.5 && b >= -0.5) => fail("alpha, beta >= -1/2"),
            BoundId::KrasikovEq3 if !(k >= 6 && a >= b && b >= alpha_star()) => {
                fail("k >= 6 and alpha >= beta >= (1+sqrt 2)/4")
            }
            BoundId::Thm1 if !p.thm1_applicable() => fail("k >= 6 and alpha = beta >= (1+sqrt 2)/4"),
            BoundId::Thm4 if !p.thm4_applicable() => fail("alpha = beta > 1/2"),
            BoundId::Thm4 if !(if odd { k >= 3 } else { k >= 2 }) => fail("k >= 2 even or k >= 3 odd"),
            BoundId::LemmaGlav if !(p.is_ultraspherical() && a >= alpha_star()) => {
                fail("alpha = beta >= (1+sqrt 2)/4")
            }
            BoundId::LemmaGlav if !(if odd { k >= 7 } else { k >= 6 }) => fail("k >= 6 even or k >= 7 odd"),
            BoundId::Odd230 if !(odd && k >= 3 && p.thm4_applicable()) => fail("odd k >= 3 and alpha = beta > 1/2"),
            BoundId::Odd29 if !(odd && k >= 7 && p.is_ultraspherical() && a >= alpha_star()) => {
                fail("odd k >= 7 and alpha = beta >= (1+sqrt 2)/4")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown bound id '{s}'")))
    }
}

/// `mu` in `mu alpha^{1/3} (1 + alpha/k)^{1/6}`: 10/7 for even `k`, 22 for odd.
pub fn thm1_mu(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        10.0 / 7.0
    } else {
        22.0
    }
}

/// `alpha^{1/3} (1 + alpha/k)^{1/6}`.
pub fn composite_scale(k: u32, alpha: f64) -> f64 {
    alpha.cbrt() * (1.0 + alpha / k as f64).powf(1.0 / 6.0)
}

/// `(r tan tau)^{1/3}` with `r = 2k + 2 alpha + 1`.
pub fn r_tan_cbrt(p: &Params) -> f64 {
    let g = geometry(p);
    (g.r * g.tan_tau).cbrt()
}

/// `(2/pi)(1 + 1/(8 (k + alpha)^2))`.
pub fn even_center_bound(k: u32, alpha: f64) -> f64 {
    let s = k as f64 + alpha;
    2.0 / PI * (1.0 + 1.0 / (8.0 * s * s))
}

pub fn rhs_bound(id: BoundId, p: &Params) -> Result<f64> {
    id.check_hypothesis(p)?;
    let (k, a, b) = (p.kf(), p.alpha, p.beta);
    let v = match id {
        BoundId::ChowEq1 => {
            let ln = (2.0 * a + 1.0) * LN_2 + ln_gamma_ratio(k + a + b + 1.0, k + 1.0)
                + ln_gamma_ratio(k + a + 1.0, k + b + 1.0)
                - PI.ln()
                - 2.0 * a * (2.0 * k + a + b + 1.0).ln();
            ln.exp()
        }
        BoundId::EmnEq2 => 2.0 * E * (2.0 + a.hypot(b)) / PI,
        BoundId::KrasikovEq3 => {
            let s = a + b + 1.0;
            let r = 2.0 * k + s;
            11.0 * (s * s * r * r / (4.0 * k * (k + s))).cbrt()
        }
        BoundId::Thm1 => thm1_mu(p.k) * composite_scale(p.k, a),
        BoundId::Thm4 if p.k.is_multiple_of(2) => even_center_bound(p.k, a),
        BoundId::Thm4 | BoundId::Odd230 => 230.0 / PI,
        BoundId::LemmaGlav => {
            let c = if p.k.is_multiple_of(2) { 12.0 / 13.0 } else { 14.0 };
            c * r_tan_cbrt(p)
        }
        BoundId::Odd29 => 29.0 / PI,
    };
    Ok(v)
}

/// `(2e/pi) (2k+2a+2b+1)(2k+2a+2b+2) / ((2k+2a+2b+2)^2 - 2a^2/(1-x) - 2b^2/(1+x))`.
pub fn pointwise_bound(p: &Params, x: f64) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return Err(domain(format!("pointwise bound needs x in (-1, 1), got {x}")));
    }
    let (k, a, b) = (p.kf(), p.alpha, p.beta);
    let s = 2.0 * k + 2.0 * a + 2.0 * b;
    let den = (s + 2.0) * (s + 2.0) - 2.0 * a * a / (1.0 - x) - 2.0 * b * b / (1.0 + x);
    if !(den > 0.0) {
        return Err(Error::DenominatorNonpositive(den));
    }
    Ok(2.0 * E / PI * (s + 1.0) * (s + 2.0) / den)
}

/// Both sides of `Gamma(x+1) / Gamma(x/2+1)^2 < 2^{x+1/2} / sqrt(pi (x+1/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    /// `ln(rhs / lhs)`, computed without subtracting the two logs.
    pub ln_gap: f64,
}

/// `(x+1) ln(1 + 1/(x+1)) - 1`.
fn log_gap_head(x: f64) -> f64 {
    let u = 1.0 / (x + 1.0);
    if u < 1e-3 {
        // sum_{j>=1} (-1)^j u^j / (j+1)
        let mut term = 1.0;
        let mut acc = 0.0;
        for j in 1..12 {
            term *= -u;
            acc += term / (j as f64 + 1.0);
        }
        acc
    } else {
        (x + 1.0) * u.ln_1p() - 1.0
    }
}

pub fn gamma_ratio_check(x: f64) -> Result<GammaRatio> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma ratio needs finite x >= 0, got {x}")));
    }
    let ln_lhs = ln_gamma(x + 1.0) - 2.0 * ln_gamma(0.5 * x + 1.0);
    let ln_rhs = (x + 0.5) * LN_2 - 0.5 * (PI * (x + 0.5)).ln();
    let ln_gap = log_gap_head(x) + 0.5 * (0.5 / (x + 0.5)).ln_1p() + 2.0 * stirling_correction(0.5 * x + 1.0)
        - stirling_correction(x + 1.0);
    Ok(GammaRatio { lhs: ln_lhs.exp(), rhs: ln_rhs.exp(), ln_lhs, ln_rhs, ln_gap })
}

/// Odd-case reduction factors `v(k, alpha)` and `v_1 = (1 + 1/(8(k+alpha)^2)) v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VFactors {
    pub v: f64,
    pub v1: f64,
}

fn delta_sq(k: f64, alpha: f64) -> f64 {
    let r = 2.0 * k + 2.0 * alpha + 1.0;
    (r * r - 4.0 * alpha * alpha - 3.0) / (r * r - 4.0)
}

pub fn v_factors(k: u32, alpha: f64) -> Result<VFactors> {
    if k.is_multiple_of(2) || k < 3 {
        return Err(Error::Hypothesis(format!("v factors need odd k >= 3, got {k}")));
    }
    if !(alpha >= 0.5 - 1e-12) || !alpha.is_finite() {
        return Err(Error::Hypothesis(format!("v factors need alpha >= 1/2, got {alpha}")));
    }
    let kf = k as f64;
    let xi2 = {
        let x = crate::envelope::xi0(k, alpha);
        x * x
    };
    let (d_here, d_down) = (delta_sq(kf, alpha), delta_sq(kf - 1.0, alpha + 1.0));
    if !(xi2 < d_down && xi2 < d_here && xi2 < 1.0) {
        return Err(Error::WindowDegenerate(format!(
            "xi0^2 = {xi2} not below delta^2(k-1, alpha+1) = {d_down} and delta^2(k, alpha) = {d_here}"
        )));
    }
    let rk = (kf + 2.0 * alpha + 1.0) * kf;
    let v = rk * xi2 * (d_here - xi2).sqrt() / ((1.0 - xi2) * (d_down - xi2).sqrt());
    let s = kf + alpha;
    Ok(VFactors { v, v1: (1.0 + 1.0 / (8.0 * s * s)) * v })
}

/// Reduction of the `r, tau` form of the bound to the `alpha^{1/3} (1 + alpha/k)^{1/6}` form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlavReduction {
    /// `(r tan tau)^{1/3}`.
    pub lhs: f64,
    /// `(4 sqrt 2 - 2)^{1/3} alpha^{1/3} (1 + alpha/k)^{1/6}`.
    pub rhs: f64,
    /// The closed sixth-root form of `lhs / (alpha^{1/3} (1+alpha/k)^{1/6})`.
    pub ratio: f64,
    /// Whether the auxiliary `epsilon` of the argument stays below 1/31.
    pub epsilon_small: bool,
}

pub fn glav_reduction(p: &Params) -> Result<GlavReduction> {
    if !(p.k >= 1 && p.is_ultraspherical() && p.alpha > 0.0) {
        return Err(Error::Hypothesis("reduction needs k >= 1 and alpha = beta > 0".into()));
    }
    let (k, a) = (p.kf(), p.alpha);
    let r = 2.0 * k + 2.0 * a + 1.0;
    let ratio = ((2.0 * a + 1.0).powi(2) * r * r / (4.0 * a * a * (k + a) * (k + 2.0 * a + 1.0))).powf(1.0 / 6.0);
    let g = geometry(p);
    let epsilon = 2f64.powf(-1.0 / 3.0) / 3.0 * r.powf(-2.0 / 3.0) * g.tan_tau.powf(4.0 / 3.0);
    Ok(GlavReduction {
        lhs: r_tan_cbrt(p),
        rhs: (4.0 * 2f64.sqrt() - 2.0).cbrt() * composite_scale(p.k, a),
        ratio,
        epsilon_small: epsilon < 1.0 / 31.0,
    })
}
