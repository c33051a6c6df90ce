//! Sonin envelopes and the closed-form geometry around them.
//!
//! For `f'' - 2A f' + B f = 0` the Sonin function `S = f^2 + f'^2 / B` passes
//! through every local maximum of `f^2` where `B > 0`, and
//! `sign(dS/dx) = sign(4AB - B')`. Two transforms are covered:
//!
//! * full window: `z = (1-x)^{a/2+1/4} (1+x)^{b/2+1/4} P_k`, `z^2 = M(x)`;
//! * symmetric window `(-d, d)`, `alpha = beta`:
//!   `g = (d^2-x^2)^{1/4} (1-x^2)^{a/2} P_k`, `g^2 = M(x; -d, d)`.

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::jacobi::{JacobiEvaluator, Params, Window};
use crate::scaled_real::ScaledReal;

/// Position bounds for the local extrema of `M`, and the window half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub r: f64,
    pub tau: f64,
    pub omega: f64,
    pub sin_tau: f64,
    pub cos_tau: f64,
    pub tan_tau: f64,
    /// Half-width of the symmetric window; needs `alpha = beta >= 1/2`.
    pub delta: Option<f64>,
    /// `eta_{-1}`, `eta_{+1}` (theta = 1/3 and 3/10). Absent when `cos tau cos omega = 0` (k = 0).
    pub eta_minus: Option<f64>,
    pub eta_plus: Option<f64>,
    /// Symmetric bound `|x| < eta` for `alpha = beta`.
    pub eta_sym: Option<f64>,
    /// Turning point of the maxima; needs `alpha >= beta > 1/2`.
    pub x0: Option<f64>,
    /// Bound on the first positive maximum for odd `k`; needs `alpha = beta`.
    pub xi0: Option<f64>,
}

/// `delta(k, alpha) = sqrt(1 - (4a^2 - 1) / ((2k+2a+1)^2 - 4))`, defined for `alpha >= 1/2`.
pub fn delta(k: u32, alpha: f64) -> Option<f64> {
    if !(alpha >= 0.5) {
        return None;
    }
    if alpha == 0.5 {
        return Some(1.0);
    }
    let r = 2.0 * k as f64 + 2.0 * alpha + 1.0;
    let d2 = (r * r - 4.0 * alpha * alpha - 3.0) / (r * r - 4.0);
    Some(d2.sqrt())
}

/// `xi_0 = sqrt(21 / (2k^2 + 4 a k + 2a + 1))`.
pub fn xi0(k: u32, alpha: f64) -> f64 {
    let k = k as f64;
    (21.0 / (2.0 * k * k + 4.0 * alpha * k + 2.0 * alpha + 1.0)).sqrt()
}

pub fn geometry(p: &Params) -> Geometry {
    let (k, a, b) = (p.kf(), p.alpha, p.beta);
    let r = p.r();
    let sin_tau = (a + b + 1.0) / r;
    // 1 - sin^2 tau = 2k (2k + 2a + 2b + 2) / r^2, without cancellation
    let cos_tau = (2.0 * k * (2.0 * k + 2.0 * (a + b + 1.0))).sqrt() / r;
    let tan_tau = sin_tau / cos_tau;
    let sin_omega = (a - b) / r;
    let cos_omega = (1.0 - sin_omega * sin_omega).sqrt();
    let tau = sin_tau.asin();
    let omega = sin_omega.asin();

    let eta = |j: f64, theta: f64| -> Option<f64> {
        let c = cos_tau * cos_omega;
        if c <= 0.0 {
            return None;
        }
        let cos_sum = cos_tau * cos_omega - j * sin_tau * sin_omega;
        let sin_sum = sin_tau * cos_omega + j * cos_tau * sin_omega;
        let bulge = (sin_sum.powi(4) / (2.0 * c)).cbrt() * r.powf(-2.0 / 3.0);
        Some(j * (cos_sum - theta * bulge))
    };

    let ultra = p.is_ultraspherical();
    let eta_sym = (ultra && cos_tau > 0.0).then(|| {
        cos_tau * (1.0 - 2f64.powf(-1.0 / 3.0) / 3.0 * r.powf(-2.0 / 3.0) * tan_tau.powf(4.0 / 3.0))
    });
    let x0 = if p.thm5_applicable() {
        if ultra {
            Some(0.0)
        } else {
            let sb = (4.0 * b * b - 1.0).sqrt();
            let sa = (4.0 * a * a - 1.0).sqrt();
            Some((sb - sa) / (sb + sa))
        }
    } else {
        None
    };

    Geometry {
        r,
        tau,
        omega,
        sin_tau,
        cos_tau,
        tan_tau,
        delta: if ultra { delta(p.k, a) } else { None },
        eta_minus: eta(-1.0, 1.0 / 3.0),
        eta_plus: eta(1.0, 3.0 / 10.0),
        eta_sym,
        x0,
        xi0: ultra.then(|| xi0(p.k, a)),
    }
}

/// Sonin coefficients at a point, with `D` the scaled monotonicity indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoninPoint {
    pub x: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    /// Analytic `dB/dx`.
    pub b_prime: f64,
    pub s: Option<f64>,
}

/// Coefficients of the `z` equation on the full window; `r = 2k + a + b + 1`.
pub fn coeffs_full(p: &Params, x: f64) -> Result<SoninPoint> {
    if !(x > -1.0 && x < 1.0) {
        return Err(domain(format!("coeffs_full needs x in (-1, 1), got {x}")));
    }
    let (a2, b2) = (p.alpha * p.alpha, p.beta * p.beta);
    let r = p.r();
    let q = 1.0 - x * x;
    let num = r * r * q - 2.0 * (1.0 + x) * a2 - 2.0 * (1.0 - x) * b2 + 1.0;
    let num_prime = -2.0 * r * r * x - 2.0 * a2 + 2.0 * b2;
    Ok(SoninPoint {
        x,
        a: x / (2.0 * q),
        b: num / (4.0 * q * q),
        d: (a2 - b2) * (x * x + 1.0) + (2.0 * a2 + 2.0 * b2 - 1.0) * x,
        b_prime: num_prime / (4.0 * q * q) + num * x / (q * q * q),
        s: None,
    })
}

/// Coefficients of the `g` equation on the symmetric window `(-d, d)`, `r = 2k + 2a + 1`.
pub fn coeffs_window(k: u32, alpha: f64, d: f64, x: f64) -> Result<SoninPoint> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(domain(format!("window half-width must be in (0, 1], got {d}")));
    }
    if !(x.abs() < d) || !(x.abs() < 1.0) {
        return Err(domain(format!("coeffs_window needs |x| < d = {d}, got {x}")));
    }
    let r = 2.0 * k as f64 + 2.0 * alpha + 1.0;
    let (r2, a2, d2, x2) = (r * r, alpha * alpha, d * d, x * x);
    let q = 1.0 - x2;
    let w = d2 - x2;
    let n2 = 2.0 * d2 - d2 * d2 + (3.0 - 4.0 * d2) * x2;
    let n2_prime = 2.0 * (3.0 - 4.0 * d2) * x;
    let b = (q * r2 - 4.0 * a2) / (4.0 * q * q) + n2 / (4.0 * q * w * w);
    let b_prime = r2 * x / (2.0 * q * q) - 4.0 * a2 * x / (q * q * q)
        + n2_prime / (4.0 * q * w * w)
        + n2 * x / (2.0 * q * q * w * w)
        + n2 * x / (q * w * w * w);
    let d_val = (4.0 * a2 - (1.0 - d2) * r2) * w * w + (3.0 - 4.0 * d2) * x2 * x2
        - 2.0 * (5.0 * d2 * d2 - 9.0 * d2 + 3.0) * x2
        - d2 * d2 * d2
        + 9.0 * d2 * d2
        - 9.0 * d2;
    Ok(SoninPoint {
        x,
        a: x * (2.0 * d2 - 1.0 - x2) / (2.0 * w * q),
        b,
        d: d_val,
        b_prime,
        s: None,
    })
}

/// `u = ((x-d_m)(d_M-x))^{1/4} (1-x)^{a/2} (1+x)^{b/2} P_k` and `u'`.
///
/// On the full window `u = z`; on a symmetric window with `alpha = beta`, `u = g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transformed {
    pub u: ScaledReal,
    pub du: ScaledReal,
}

/// `ln` of the positive prefactor of `u` and the log-derivative of that prefactor.
fn prefactor(p: &Params, x: f64, w: &Window) -> (f64, f64) {
    let (l, rgt) = (x - w.d_m, w.d_max - x);
    let ln_w = 0.25 * (l.ln() + rgt.ln()) + 0.5 * p.alpha * (1.0 - x).ln() + 0.5 * p.beta * (1.0 + x).ln();
    let dlog = 0.25 * (1.0 / l - 1.0 / rgt) - 0.5 * p.alpha / (1.0 - x) + 0.5 * p.beta / (1.0 + x);
    (ln_w, dlog)
}

/// Caller guarantees `x` is strictly inside the window and `(-1, 1)`.
pub fn transformed(ev: &JacobiEvaluator, x: f64, w: &Window) -> Transformed {
    let (ln_w, dlog) = prefactor(ev.params(), x, w);
    let pk = ev.value(x);
    let dpk = ev.deriv(x);
    let inner = pk * dlog + dpk;
    Transformed { u: pk.scale_ln(ln_w), du: inner.scale_ln(ln_w) }
}

/// Sign of `u'`; the prefactor is positive so only `L P + P'` matters.
pub fn transformed_deriv_sign(ev: &JacobiEvaluator, x: f64, w: &Window) -> i8 {
    deriv_sign_from(ev.params(), x, w, ev.value(x), ev.deriv(x))
}

/// [`transformed_deriv_sign`] from already evaluated `P` and `P'`.
pub(crate) fn deriv_sign_from(p: &Params, x: f64, w: &Window, pk: ScaledReal, dpk: ScaledReal) -> i8 {
    let dlog = 0.25 * (1.0 / (x - w.d_m) - 1.0 / (w.d_max - x)) - 0.5 * p.alpha / (1.0 - x) + 0.5 * p.beta / (1.0 + x);
    (pk * dlog + dpk).sign()
}

/// Value of the Sonin function, in float and log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoninValue {
    pub value: f64,
    pub ln_value: f64,
}

/// `B` at `x` for whichever transform applies to the window.
pub fn window_b(p: &Params, x: f64, w: &Window) -> Result<f64> {
    if w.is_full() {
        return Ok(coeffs_full(p, x)?.b);
    }
    match w.symmetric_half_width() {
        Some(d) if p.is_ultraspherical() => Ok(coeffs_window(p.k, p.alpha, d, x)?.b),
        _ => Err(domain(
            "Sonin coefficients exist for the full window or a symmetric window with alpha = beta",
        )),
    }
}

pub fn sonin_s(p: &Params, x: f64, w: &Window) -> Result<SoninValue> {
    sonin_s_with(&JacobiEvaluator::new(*p), x, w)
}

pub fn sonin_s_with(ev: &JacobiEvaluator, x: f64, w: &Window) -> Result<SoninValue> {
    if !w.contains_interior(x) || !(x > -1.0 && x < 1.0) {
        return Err(domain(format!("x = {x} must lie strictly inside the window and (-1, 1)")));
    }
    let b = window_b(ev.params(), x, w)?;
    if !(b > 0.0) {
        return Err(Error::OutsideOscillation { b });
    }
    let t = transformed(ev, x, w);
    let s = t.u * t.u + t.du * t.du * (1.0 / b);
    Ok(SoninValue { value: s.to_f64_saturating(), ln_value: s.ln_abs() })
}

/// Sonin point with `S` filled where `B > 0`.
pub fn sonin_point(p: &Params, x: f64, w: &Window) -> Result<SoninPoint> {
    let mut pt = if w.is_full() {
        coeffs_full(p, x)?
    } else {
        match w.symmetric_half_width() {
            Some(d) if p.is_ultraspherical() => coeffs_window(p.k, p.alpha, d, x)?,
            _ => return Err(domain("unsupported window for Sonin coefficients")),
        }
    };
    pt.s = if pt.b > 0.0 { Some(sonin_s(p, x, w)?.value) } else { None };
    Ok(pt)
}

/// One algebraic identity, evaluated exactly and reported as floats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub computed: f64,
    pub closed_form: f64,
    pub rel_err: f64,
    /// Set for the printed `4r^4` variant, which is reported but not expected to hold.
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignCheck {
    pub name: &'static str,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identities: Vec<IdentityCheck>,
    pub signs: Vec<SignCheck>,
}

impl IdentityReport {
    pub fn identity(&self, name: &str) -> Option<&IdentityCheck> {
        self.identities.iter().find(|c| c.name == name)
    }

    pub fn sign(&self, name: &str) -> Option<&SignCheck> {
        self.signs.iter().find(|c| c.name == name)
    }
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

fn rel_err(computed: &BigRational, closed: &BigRational) -> f64 {
    let diff = (computed - closed).abs();
    if closed.is_zero() {
        to_f64(&diff)
    } else {
        to_f64(&(diff / closed.abs()))
    }
}

/// Exact rational checks of the polynomial identities behind the
/// `delta`-window lemmas. Polynomials are evaluated term by term as displayed
/// (sextic `B_1`, quartic `D`), in terms of `x^2`.
pub fn identity_checks(k: u32, alpha: f64) -> Result<IdentityReport> {
    if !(alpha > 0.5) || k < 1 || !alpha.is_finite() {
        return Err(Error::Hypothesis(format!("identity checks need alpha > 1/2 and k >= 1 (k = {k}, alpha = {alpha})")));
    }
    let a = BigRational::from_float(alpha).expect("finite alpha");
    let kk = q(k as i64);
    let a2 = &a * &a;
    let r = q(2) * &kk + q(2) * &a + q(1);
    let r2 = &r * &r;
    let d2 = (&r2 - q(4) * &a2 - q(3)) / (&r2 - q(4));
    let one = q(1);

    let b1 = |x2: &BigRational| -> BigRational {
        let x4 = x2 * x2;
        let x6 = &x4 * x2;
        let c4 = (&one + q(2) * &d2) * &r2 + q(4) * &d2 - q(4) * &a2 - q(3);
        let c2 = (&d2 * &d2 + q(2) * &d2) * &r2 - &d2 * &d2 - q(8) * &a2 * &d2 + q(6) * &d2 - q(3);
        let c0 = (&d2 * &r2 - q(4) * &a2 * &d2 - &d2 + q(2)) * &d2;
        -(&r2 * x6) + c4 * x4 - c2 * x2 + c0
    };
    let d_quartic = |x2: &BigRational| -> BigRational {
        let w = &d2 - x2;
        (q(4) * &a2 - (&one - &d2) * &r2) * &w * &w + (q(3) - q(4) * &d2) * x2 * x2
            - q(2) * (q(5) * &d2 * &d2 - q(9) * &d2 + q(3)) * x2
            - &d2 * &d2 * &d2
            + q(9) * &d2 * &d2
            - q(9) * &d2
    };
    let scale = (&r2 - q(4)).pow(3) / (q(3) * (q(4) * &a2 - q(1)));
    let quadratic = |x2: &BigRational, printed: bool| -> BigRational {
        let lead = if printed { q(4) * &r2 * &r2 } else { q(4) * &r2 };
        q(2) * (&r2 - q(4)) * (q(2) * &r2 - q(12) * &a2 - q(5)) * x2
            - (&r2 - q(4) * &a2 - q(3)) * (lead - q(4) * &a2 - q(15))
    };
    let a0 = |x2: &BigRational| -> BigRational {
        q(4) * &kk * (&kk + q(2) * &a + q(1)) - (&r2 + q(4) * &a + q(2)) * x2
    };

    let mut identities = Vec::new();
    let mut push = |name: &'static str, computed: BigRational, closed: BigRational, informational: bool| {
        identities.push(IdentityCheck {
            name,
            computed: to_f64(&computed),
            closed_form: to_f64(&closed),
            rel_err: rel_err(&computed, &closed),
            informational,
        });
    };

    let one_minus = &one - &d2;
    let b1_delta = b1(&d2);
    let b1_one = b1(&one);
    push("B1_at_delta", b1_delta.clone(), q(5) * &one_minus * &one_minus * &d2, false);
    push("B1_at_one", b1_one.clone(), -(q(4) * &a2 * &one_minus * &one_minus), false);
    let d_delta_raw = d_quartic(&d2);
    push(
        "D_scaled_at_delta",
        &scale * &d_delta_raw,
        -(q(5) * (q(4) * &a2 - q(1)) * (&r2 - q(4) * &a2 - q(3))),
        false,
    );
    let zero = q(0);
    let quarter_d2 = &d2 / q(4);
    push("D_scaled_quadratic_at_0", &scale * d_quartic(&zero), quadratic(&zero, false), false);
    push("D_scaled_quadratic_at_half_delta", &scale * d_quartic(&quarter_d2), quadratic(&quarter_d2, false), false);
    push("D_scaled_quadratic_at_delta", &scale * &d_delta_raw, quadratic(&d2, false), false);
    push("D_scaled_quadratic_at_0_printed_4r4", &scale * d_quartic(&zero), quadratic(&zero, true), true);

    let a0_delta = a0(&d2);
    let signs = vec![
        SignCheck { name: "B1_at_delta_positive", value: to_f64(&b1_delta), holds: b1_delta.is_positive() },
        SignCheck { name: "B1_at_one_negative", value: to_f64(&b1_one), holds: b1_one.is_negative() },
        SignCheck { name: "D_at_delta_negative", value: to_f64(&d_delta_raw), holds: d_delta_raw.is_negative() },
        // as printed; never holds for k >= 1
        SignCheck { name: "A0_at_delta_positive", value: to_f64(&a0_delta), holds: a0_delta.is_positive() },
        // what containment in (-delta, delta) actually needs: the positive zero of A0 lies below delta
        SignCheck { name: "A0_zero_inside_delta", value: to_f64(&a0_delta), holds: a0_delta.is_negative() },
    ];
    Ok(IdentityReport { identities, signs })
}
