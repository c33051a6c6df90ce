//! Orthonormal Jacobi polynomials and the weighted square `M`.
//!
//! Values are produced by the orthonormal three-term recurrence
//!
//! ```text
//! x p_n = a_{n+1} p_{n+1} + b_n p_n + a_n p_{n-1}
//! ```
//!
//! run on an `f64` pair with a shared power-of-two scale, and returned as
//! [`ScaledReal`]. Derivatives use `d/dx P_k^{(a,b)} = (k+a+b+1)/2 P_{k-1}^{(a+1,b+1)}`
//! with the explicit norm ratio.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::lgamma::{ln_gamma, stirling_correction};
use crate::scaled_real::ScaledReal;

/// Lower parameter threshold `(1 + sqrt 2) / 4` of the cube-root bound and the extremum location bounds.
pub fn alpha_star() -> f64 {
    (1.0 + std::f64::consts::SQRT_2) / 4.0
}

/// Degree and weight exponents of `(1-x)^alpha (1+x)^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
}

impl Params {
    pub fn new(k: u32, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0) || !(beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(domain(format!(
                "weight exponents must be finite and > -1 (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(Self { k, alpha, beta })
    }

    pub fn ultraspherical(k: u32, alpha: f64) -> Result<Self> {
        Self::new(k, alpha, alpha)
    }

    pub fn kf(&self) -> f64 {
        self.k as f64
    }

    pub fn is_ultraspherical(&self) -> bool {
        self.alpha == self.beta
    }

    /// `2k + alpha + beta + 1`, which is `r = 2k + 2 alpha + 1` when `alpha = beta`.
    pub fn r(&self) -> f64 {
        2.0 * self.kf() + self.alpha + self.beta + 1.0
    }

    pub fn thm1_applicable(&self) -> bool {
        self.k >= 6 && self.is_ultraspherical() && self.alpha >= alpha_star()
    }

    pub fn thm3_applicable(&self) -> bool {
        self.k >= 6 && self.alpha >= self.beta && self.beta >= alpha_star()
    }

    pub fn thm4_applicable(&self) -> bool {
        self.is_ultraspherical() && self.alpha > 0.5
    }

    pub fn thm5_applicable(&self) -> bool {
        self.alpha >= self.beta && self.beta > 0.5
    }

    /// Parameters of the polynomial that the derivative relation lands on.
    pub fn derivative_params(&self) -> Option<Params> {
        (self.k > 0).then(|| Params {
            k: self.k - 1,
            alpha: self.alpha + 1.0,
            beta: self.beta + 1.0,
        })
    }
}

/// Extremum-search interval `(d_m, d_M)` inside `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub d_m: f64,
    pub d_max: f64,
}

impl Window {
    pub const FULL: Window = Window { d_m: -1.0, d_max: 1.0 };

    pub fn new(d_m: f64, d_max: f64) -> Result<Self> {
        if !(-1.0 <= d_m && d_m < d_max && d_max <= 1.0) {
            return Err(domain(format!("window needs -1 <= d_m < d_M <= 1, got ({d_m}, {d_max})")));
        }
        Ok(Self { d_m, d_max })
    }

    pub fn symmetric(d: f64) -> Result<Self> {
        Self::new(-d, d)
    }

    pub fn is_full(&self) -> bool {
        self.d_m == -1.0 && self.d_max == 1.0
    }

    /// Half-width when the window is centred at 0.
    pub fn symmetric_half_width(&self) -> Option<f64> {
        (self.d_m == -self.d_max).then_some(self.d_max)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.d_m <= x && x <= self.d_max
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.d_m < x && x < self.d_max
    }
}

/// `ln Γ(a) - ln Γ(b)`, without forming either log when both are large.
pub(crate) fn ln_gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 10.0 || b < 10.0 {
        return ln_gamma(a) - ln_gamma(b);
    }
    let diff = a - b;
    (a - 0.5) * (diff / b).ln_1p() + diff * (b.ln() - 1.0) + stirling_correction(a)
        - stirling_correction(b)
}

/// `ln h_k`, the squared norm of the standard `P_k^{(alpha, beta)}`.
pub fn log_norm(p: &Params) -> f64 {
    let (k, a, b) = (p.kf(), p.alpha, p.beta);
    if p.k == 0 {
        if a == b {
            // duplication formula: h_0 = sqrt(pi) Γ(a+1) / Γ(a+3/2)
            return 0.5 * PI.ln() + ln_gamma_ratio(a + 1.0, a + 1.5);
        }
        return (a + b + 1.0) * LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0);
    }
    if a == b {
        // Γ(k+2a+1) = 2^{k+2a} Γ(k/2+a+1/2) Γ(k/2+a+1) / sqrt(pi)
        return (1.0 - k) * LN_2 + 0.5 * PI.ln() - (2.0 * k + 2.0 * a + 1.0).ln() - ln_gamma(k + 1.0)
            + ln_gamma_ratio(k + a + 1.0, 0.5 * k + a + 0.5)
            + ln_gamma_ratio(k + a + 1.0, 0.5 * k + a + 1.0);
    }
    (a + b + 1.0) * LN_2 - (2.0 * k + a + b + 1.0).ln()
        + ln_gamma_ratio(k + a + 1.0, k + a + b + 1.0)
        + ln_gamma_ratio(k + b + 1.0, k + 1.0)
}

/// Recurrence tables for one `(alpha, beta)` up to degree `k`.
#[derive(Debug, Clone)]
pub struct Jacobi {
    params: Params,
    ln_p0: f64,
    /// `diag[n] = b_n`, n = 0..k
    diag: Vec<f64>,
    /// `off[n] = a_n`, n = 1..=k (index 0 unused)
    off: Vec<f64>,
    /// `inv[n] = 1 / a_{n+1}`
    inv: Vec<f64>,
}

/// Abscissae advanced together through the recurrence; independent lanes hide its latency.
const LANES: usize = 8;

const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;
const RESCALE_EVERY: usize = 8;

impl Jacobi {
    pub fn new(params: Params) -> Self {
        let (a, b) = (params.alpha, params.beta);
        let k = params.k as usize;
        let mut diag = Vec::with_capacity(k.max(1));
        let mut off = vec![0.0; k + 1];
        for n in 0..k.max(1) {
            let nf = n as f64;
            let bn = if n == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                let s = 2.0 * nf + a + b;
                (b - a) * (b + a) / (s * (s + 2.0))
            };
            diag.push(bn);
        }
        for (n, slot) in off.iter_mut().enumerate().skip(1) {
            let nf = n as f64;
            let sq = if n == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                let s = 2.0 * nf + a + b;
                4.0 * nf * (nf + a) * (nf + b) * (nf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            *slot = sq.sqrt();
        }
        let inv = off.iter().skip(1).map(|a| 1.0 / a).collect();
        let ln_h0 = log_norm(&Params { k: 0, ..params });
        Self { params, ln_p0: -0.5 * ln_h0, diag, off, inv }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `P_k(x)` (orthonormal) without a domain check.
    pub fn eval_unchecked(&self, x: f64) -> ScaledReal {
        let [v] = self.eval_lanes([x]);
        v
    }

    /// `P_k` at every abscissa, without domain checks. Each result is
    /// bit-identical to [`Jacobi::eval_unchecked`] at the same point.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<ScaledReal> {
        let mut out = Vec::with_capacity(xs.len());
        let mut chunks = xs.chunks_exact(LANES);
        for c in &mut chunks {
            out.extend(self.eval_lanes::<LANES>(c.try_into().expect("full chunk")));
        }
        let rest = chunks.remainder();
        if let Some(&last) = rest.last() {
            let lanes: [f64; LANES] = std::array::from_fn(|j| rest.get(j).copied().unwrap_or(last));
            out.extend(self.eval_lanes(lanes).into_iter().take(rest.len()));
        }
        out
    }

    fn eval_lanes<const L: usize>(&self, xs: [f64; L]) -> [ScaledReal; L] {
        let mut prev = [0.0f64; L];
        let mut cur = [1.0f64; L];
        let mut ln_scale = [self.ln_p0; L];
        let k = self.params.k as usize;
        // Growth per step stays far below 1e19 on [-1, 1], so checking the
        // range every RESCALE_EVERY steps keeps clear of overflow; rescaling
        // by powers of two is exact, so the values do not depend on when it happens.
        for block in (0..k).step_by(RESCALE_EVERY) {
            for n in block..(block + RESCALE_EVERY).min(k) {
                let (d, o, inv) = (self.diag[n], self.off[n], self.inv[n]);
                for j in 0..L {
                    let next = ((xs[j] - d) * cur[j] - o * prev[j]) * inv;
                    prev[j] = cur[j];
                    cur[j] = next;
                }
            }
            for j in 0..L {
                let m = cur[j].abs().max(prev[j].abs());
                if m > RESCALE_HI || (m < RESCALE_LO && m > 0.0) {
                    let e = m.log2().floor() as i32;
                    let f = 2f64.powi(-e);
                    cur[j] *= f;
                    prev[j] *= f;
                    ln_scale[j] += e as f64 * LN_2;
                }
            }
        }
        std::array::from_fn(|j| ScaledReal::from_f64(cur[j]).scale_ln(ln_scale[j]))
    }

    pub fn eval(&self, x: f64) -> Result<ScaledReal> {
        check_unit(x)?;
        Ok(self.eval_unchecked(x))
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain(format!("x = {x} outside [-1, 1]")))
    }
}

/// Evaluator for `P_k`, `P_k'` and `P_k''` at fixed parameters.
#[derive(Debug, Clone)]
pub struct JacobiEvaluator {
    base: Jacobi,
    first: Option<(f64, Jacobi)>,
}

impl JacobiEvaluator {
    pub fn new(params: Params) -> Self {
        let first = params
            .derivative_params()
            .map(|dp| (ln_derivative_prefactor(&params), Jacobi::new(dp)));
        Self { base: Jacobi::new(params), first }
    }

    pub fn params(&self) -> &Params {
        self.base.params()
    }

    pub fn value(&self, x: f64) -> ScaledReal {
        self.base.eval_unchecked(x)
    }

    pub fn deriv(&self, x: f64) -> ScaledReal {
        match &self.first {
            Some((ln_pref, inner)) => inner.eval_unchecked(x).scale_ln(*ln_pref),
            None => ScaledReal::ZERO,
        }
    }

    /// [`JacobiEvaluator::value`] at many points.
    pub fn values(&self, xs: &[f64]) -> Vec<ScaledReal> {
        self.base.eval_many(xs)
    }

    /// [`JacobiEvaluator::deriv`] at many points.
    pub fn derivs(&self, xs: &[f64]) -> Vec<ScaledReal> {
        match &self.first {
            Some((ln_pref, inner)) => inner.eval_many(xs).into_iter().map(|v| v.scale_ln(*ln_pref)).collect(),
            None => vec![ScaledReal::ZERO; xs.len()],
        }
    }

    pub fn second_deriv(&self, x: f64) -> ScaledReal {
        match &self.first {
            Some((ln_pref, inner)) => JacobiEvaluator::new(*inner.params()).deriv(x).scale_ln(*ln_pref),
            None => ScaledReal::ZERO,
        }
    }
}

/// `ln sqrt(k (k + alpha + beta + 1))`: the factor `(k+a+b+1)/2` times the
/// orthonormal norm ratio `sqrt(h_{k-1}^{(a+1,b+1)} / h_k^{(a,b)}) = sqrt(4k/(k+a+b+1))`.
fn ln_derivative_prefactor(p: &Params) -> f64 {
    let k = p.kf();
    0.5 * (k.ln() + (k + p.alpha + p.beta + 1.0).ln())
}

pub fn eval_orthonormal(p: &Params, x: f64) -> Result<ScaledReal> {
    Jacobi::new(*p).eval(x)
}

pub fn eval_orthonormal_deriv(p: &Params, x: f64) -> Result<ScaledReal> {
    check_unit(x)?;
    Ok(JacobiEvaluator::new(*p).deriv(x))
}

/// Orthonormal `P_k^{(alpha, alpha)}(0)` for even `k`, from the closed form
/// `(-1)^{k/2} Γ(k+a+1) / (2^k (k/2)! Γ(k/2+a+1))` divided by `sqrt(h_k)`.
pub fn value_at_zero_even(k: u32, alpha: f64) -> Result<ScaledReal> {
    if k % 2 == 1 {
        return Err(domain(format!("value_at_zero_even needs even k, got {k}")));
    }
    let p = Params::ultraspherical(k, alpha)?;
    let kf = k as f64;
    let half = 0.5 * kf;
    let ln_std = ln_gamma_ratio(kf + alpha + 1.0, half + alpha + 1.0) - kf * LN_2 - ln_gamma(half + 1.0);
    let sign = if (k / 2).is_multiple_of(2) { 1 } else { -1 };
    Ok(ScaledReal::new(sign, ln_std - 0.5 * log_norm(&p)))
}

/// `M` at a point, both as a (possibly saturated) float and as its log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedValue {
    pub value: f64,
    pub ln_value: f64,
}

impl WeightedValue {
    pub fn from_ln(ln_value: f64) -> Self {
        Self { value: ln_value.exp(), ln_value }
    }

    pub const ZERO: WeightedValue = WeightedValue { value: 0.0, ln_value: f64::NEG_INFINITY };
}

/// Log of the weight part `sqrt((x-d_m)(d_M-x)) (1-x)^alpha (1+x)^beta` at an
/// interior point.
pub(crate) fn ln_weight(p: &Params, x: f64, w: &Window) -> f64 {
    0.5 * ((x - w.d_m).ln() + (w.d_max - x).ln()) + p.alpha * (1.0 - x).ln() + p.beta * (1.0 + x).ln()
}

/// `M_k^{alpha,beta}(x; d_m, d_M) = sqrt((x-d_m)(d_M-x)) (1-x)^alpha (1+x)^beta P_k(x)^2`.
pub fn weighted_m(p: &Params, x: f64, w: &Window) -> Result<WeightedValue> {
    weighted_m_with(&Jacobi::new(*p), x, w)
}

pub fn weighted_m_with(jac: &Jacobi, x: f64, w: &Window) -> Result<WeightedValue> {
    let p = jac.params();
    if !w.contains(x) || !(-1.0..=1.0).contains(&x) {
        return Err(domain(format!("x = {x} outside window ({}, {})", w.d_m, w.d_max)));
    }
    let at_right = x == w.d_max;
    let at_left = x == w.d_m;
    if !(at_left || at_right) {
        let pk = jac.eval_unchecked(x);
        if pk.is_zero() {
            return Ok(WeightedValue::ZERO);
        }
        return Ok(WeightedValue::from_ln(ln_weight(p, x, w) + 2.0 * pk.ln_abs()));
    }
    // endpoint: only x = +-1 can give a nonzero limit
    let (exponent, other_ln) = if at_right && x == 1.0 {
        (p.alpha + 0.5, 0.5 * (1.0 - w.d_m).ln() + p.beta * 2f64.ln())
    } else if at_left && x == -1.0 {
        (p.beta + 0.5, 0.5 * (w.d_max + 1.0).ln() + p.alpha * 2f64.ln())
    } else {
        return Ok(WeightedValue::ZERO);
    };
    if exponent > 0.0 {
        Ok(WeightedValue::ZERO)
    } else if exponent == 0.0 {
        let pk = jac.eval_unchecked(x);
        if pk.is_zero() {
            return Ok(WeightedValue::ZERO);
        }
        Ok(WeightedValue::from_ln(other_ln + 2.0 * pk.ln_abs()))
    } else {
        Err(domain(format!("M diverges at x = {x}: net exponent {exponent} < 0")))
    }
}

/// Relative residual of `(1-x^2) y'' = ((a+b+2)x + a-b) y' - k(k+a+b+1) y`,
/// normalised by `|k(k+a+b+1) y| + |y'| + 1`.
pub fn ode_residual(p: &Params, x: f64) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return Err(domain(format!("ode_residual needs x in (-1, 1), got {x}")));
    }
    let ev = JacobiEvaluator::new(*p);
    let (a, b, k) = (p.alpha, p.beta, p.kf());
    let y = ev.value(x);
    let y1 = ev.deriv(x);
    let y2 = ev.second_deriv(x);
    let lam = k * (k + a + b + 1.0);
    let t_second = y2 * (1.0 - x * x);
    let t_first = y1 * (-((a + b + 2.0) * x + a - b));
    let t_zero = y * lam;
    let num = ScaledReal::sum([t_second, t_first, t_zero]);
    let den = ScaledReal::sum([t_zero.abs(), y1.abs(), ScaledReal::ONE]);
    if num.is_zero() {
        return Ok(0.0);
    }
    Ok((num.ln_abs() - den.ln_abs()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

pub fn parity(k: u32) -> Parity {
    if k.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}
