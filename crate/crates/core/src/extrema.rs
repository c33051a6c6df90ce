//! Local extrema of `M` on a window and the structural claims about them.
//!
//! Critical points are zeros of `u' = W (L P + P')` (maxima of `|u|`, where
//! `u^2` is `M` up to a positive constant) and zeros of `P` (minima). Both are
//! bracketed on a grid uniform in `theta = arccos x` and refined by bisection.

use serde::Serialize;

use crate::envelope::{deriv_sign_from, Geometry};
use crate::error::{domain, Error, Result};
use crate::jacobi::{ln_weight, weighted_m, JacobiEvaluator, Params, Window};

pub const DEFAULT_NODES_PER_DEGREE: u32 = 12;
const MIN_NODES: usize = 64;
const MAX_NODES: usize = 4_000_000;
const BISECTION_TOL: f64 = 1e-13;
/// Relative gap under which two maxima count as tied.
const TIE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremumRecord {
    pub x: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "ln_M")]
    pub ln_m: f64,
    pub kind: Kind,
    /// Left-to-right position among the scanned records. Endpoint records
    /// returned by [`global_max`] carry 0 (left) or the record count (right).
    pub index: usize,
}

/// Share of the window's angular extent where the full-window `B` is positive.
fn oscillation_fraction(p: &Params, w: &Window) -> f64 {
    let (a2, b2) = (p.alpha * p.alpha, p.beta * p.beta);
    let r2 = p.r() * p.r();
    // B > 0  <=>  r^2 x^2 + 2(a^2 - b^2) x - (r^2 - 2a^2 - 2b^2 + 1) < 0
    let half_b = a2 - b2;
    let c = r2 - 2.0 * a2 - 2.0 * b2 + 1.0;
    let disc = half_b * half_b + r2 * c;
    if !(disc > 0.0) {
        return 1.0;
    }
    let s = disc.sqrt();
    let lo = ((-half_b - s) / r2).max(w.d_m);
    let hi = ((-half_b + s) / r2).min(w.d_max);
    let full = w.d_m.acos() - w.d_max.acos();
    if !(hi > lo) || !(full > 0.0) {
        return 1.0;
    }
    ((lo.acos() - hi.acos()) / full).clamp(1e-6, 1.0)
}

fn node_count(p: &Params, w: &Window, nodes_per_degree: u32) -> usize {
    let base = MIN_NODES.max(nodes_per_degree as usize * (p.k as usize + 2)) as f64;
    ((base / oscillation_fraction(p, w)).ceil() as usize).min(MAX_NODES)
}

/// Interior nodes in increasing `x`, uniform in angle.
fn angle_grid(w: &Window, n: usize) -> Vec<f64> {
    let (t_hi, t_lo) = (w.d_m.acos(), w.d_max.acos());
    let step = (t_hi - t_lo) / n as f64;
    (1..n)
        .rev()
        .map(|i| (t_lo + step * i as f64).cos())
        .filter(|&x| w.contains_interior(x) && x > -1.0 && x < 1.0)
        .collect()
}

struct Scanner<'a> {
    ev: JacobiEvaluator,
    w: &'a Window,
}

impl Scanner<'_> {
    fn p_signs(&self, xs: &[f64]) -> Vec<i8> {
        self.ev.values(xs).iter().map(|v| v.sign()).collect()
    }

    /// Signs of `P` and of `u'` at every abscissa.
    fn both_signs(&self, xs: &[f64]) -> (Vec<i8>, Vec<i8>) {
        let (ps, ds) = (self.ev.values(xs), self.ev.derivs(xs));
        let p = self.ev.params();
        let du = xs.iter().zip(ps.iter().zip(&ds)).map(|(&x, (&pk, &dpk))| deriv_sign_from(p, x, self.w, pk, dpk));
        (ps.iter().map(|v| v.sign()).collect(), du.collect())
    }

    fn du_signs(&self, xs: &[f64]) -> Vec<i8> {
        self.both_signs(xs).1
    }

    fn record(&self, x: f64, kind: Kind) -> ExtremumRecord {
        let pk = self.ev.value(x);
        let ln_m = if pk.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_weight(self.ev.params(), x, self.w) + 2.0 * pk.ln_abs()
        };
        ExtremumRecord { x, m: ln_m.exp(), ln_m, kind, index: 0 }
    }
}

/// Roots of a sign sequence: exact zeros at nodes and brackets around sign flips.
enum Root {
    At(usize),
    Between(usize),
}

fn sign_roots(signs: &[i8], stride: usize) -> Vec<Root> {
    let idx: Vec<usize> = (0..signs.len()).step_by(stride).collect();
    let mut out = Vec::new();
    for (j, &i) in idx.iter().enumerate() {
        if signs[i] == 0 {
            out.push(Root::At(i));
        } else if let Some(&next) = idx.get(j + 1) {
            if signs[i] * signs[next] < 0 {
                out.push(Root::Between(i));
            }
        }
    }
    out
}

struct Bracket {
    a: f64,
    b: f64,
    sa: i8,
    hit: Option<f64>,
}

impl Bracket {
    fn live_mid(&self) -> Option<f64> {
        let mid = 0.5 * (self.a + self.b);
        (self.hit.is_none() && self.b - self.a > BISECTION_TOL && mid > self.a && mid < self.b).then_some(mid)
    }
}

/// Bisects every bracket on the sign of `f`, advancing all of them together
/// so that `f` sees whole batches of midpoints.
fn bisect_all(brackets: &mut [Bracket], f: impl Fn(&[f64]) -> Vec<i8>) {
    for _ in 0..200 {
        let (live, mids): (Vec<usize>, Vec<f64>) =
            brackets.iter().enumerate().filter_map(|(i, br)| br.live_mid().map(|m| (i, m))).unzip();
        if live.is_empty() {
            break;
        }
        for ((i, mid), sm) in live.into_iter().zip(&mids).zip(f(&mids)) {
            let br = &mut brackets[i];
            if sm == 0 {
                br.hit = Some(*mid);
            } else if sm == br.sa {
                br.a = *mid;
            } else {
                br.b = *mid;
            }
        }
    }
}

/// Every interior critical point of `M` on `w`, sorted by `x`.
pub fn scan_extrema(p: &Params, w: &Window, nodes_per_degree: u32) -> Result<Vec<ExtremumRecord>> {
    if nodes_per_degree < 4 {
        return Err(domain(format!("nodes_per_degree must be >= 4, got {nodes_per_degree}")));
    }
    let w = &Window::new(w.d_m, w.d_max)?;
    let sc = Scanner { ev: JacobiEvaluator::new(*p), w };
    let n = node_count(p, w, nodes_per_degree);
    let xs = angle_grid(w, 4 * n);
    let (p_signs, du_signs) = sc.both_signs(&xs);

    let fine_p = sign_roots(&p_signs, 1);
    let fine_du = sign_roots(&du_signs, 1);
    let coarse = sign_roots(&p_signs, 4).len() + sign_roots(&du_signs, 4).len();
    let fine = fine_p.len() + fine_du.len();
    if coarse != fine {
        return Err(Error::GridTooCoarse { coarse, fine });
    }

    // M' = sign(u) sign(u'); going + to - marks a maximum
    let m_prime = |i: usize| p_signs[i] * du_signs[i];
    let mut out = Vec::with_capacity(fine);
    let mut refine = |roots: Vec<Root>, signs: &[i8], f: &dyn Fn(&[f64]) -> Vec<i8>| {
        let mut brackets: Vec<Bracket> = roots
            .iter()
            .map(|root| match *root {
                Root::At(i) => Bracket { a: xs[i], b: xs[i], sa: 0, hit: Some(xs[i]) },
                Root::Between(i) => Bracket { a: xs[i], b: xs[i + 1], sa: signs[i], hit: None },
            })
            .collect();
        bisect_all(&mut brackets, f);
        for (root, br) in roots.iter().zip(&brackets) {
            let (lo, hi) = match *root {
                Root::At(i) => (i.saturating_sub(1), (i + 1).min(xs.len() - 1)),
                Root::Between(i) => (i, i + 1),
            };
            let x = br.hit.unwrap_or(0.5 * (br.a + br.b));
            let kind = if m_prime(lo) > 0 || m_prime(hi) < 0 { Kind::Max } else { Kind::Min };
            out.push(sc.record(x, kind));
        }
    };
    refine(fine_p, &p_signs, &|m| sc.p_signs(m));
    refine(fine_du, &du_signs, &|m| sc.du_signs(m));
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    for (i, r) in out.iter_mut().enumerate() {
        r.index = i;
    }
    Ok(out)
}

/// Largest maximum among the scanned records and the window endpoint limits.
pub fn global_max(p: &Params, w: &Window) -> Result<ExtremumRecord> {
    let records = scan_extrema(p, w, DEFAULT_NODES_PER_DEGREE)?;
    global_max_of(p, w, &records)
}

pub fn global_max_of(p: &Params, w: &Window, records: &[ExtremumRecord]) -> Result<ExtremumRecord> {
    let mut candidates: Vec<ExtremumRecord> = records.iter().copied().filter(|r| r.kind == Kind::Max).collect();
    for (x, index) in [(w.d_m, 0), (w.d_max, records.len())] {
        let v = weighted_m(p, x, w)?;
        if v.value > 0.0 {
            candidates.push(ExtremumRecord { x, m: v.value, ln_m: v.ln_value, kind: Kind::Max, index });
        }
    }
    let mut best: Option<ExtremumRecord> = None;
    for c in candidates {
        best = Some(match best {
            None => c,
            Some(b) => {
                let gap = c.ln_m - b.ln_m;
                if gap.abs() <= TIE_REL {
                    if c.x.abs() < b.x.abs() { c } else { b }
                } else if gap > 0.0 {
                    c
                } else {
                    b
                }
            }
        });
    }
    best.ok_or_else(|| domain("no maximum found on the window"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Checked,
    Skipped,
}

/// Outcome of one structural claim; `margin > 0` iff it holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub holds: bool,
    pub margin: f64,
}

impl Verdict {
    fn checked(margin: f64) -> Self {
        Self { status: VerdictStatus::Checked, holds: margin > 0.0, margin }
    }

    const SKIPPED: Verdict = Verdict { status: VerdictStatus::Skipped, holds: false, margin: f64::NAN };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureReport {
    /// Maxima decrease left of `x0` and increase right of it (margin in `ln M`).
    pub unimodal: Verdict,
    /// Every extremum lies in `(eta_{-1}, eta_{+1})`.
    pub eta_containment: Verdict,
    /// Every full-window maximum lies in `(-delta, delta)`.
    pub delta_containment: Verdict,
    /// On the delta-window with even `k`, maxima decrease in `|x|` (margin in `ln M`).
    pub center_decreasing: Verdict,
}

fn min_drop<'a>(seq: impl Iterator<Item = &'a ExtremumRecord>) -> f64 {
    let v: Vec<&ExtremumRecord> = seq.collect();
    v.windows(2).map(|w| w[0].ln_m - w[1].ln_m).fold(f64::INFINITY, f64::min)
}

pub fn structure_checks(p: &Params, w: &Window, records: &[ExtremumRecord], geom: &Geometry) -> StructureReport {
    let maxima: Vec<&ExtremumRecord> = records.iter().filter(|r| r.kind == Kind::Max).collect();
    // points within this distance of x0 count on both sides
    let near = 1e-12;

    let unimodal = match geom.x0 {
        Some(x0) if w.is_full() => {
            let left = min_drop(maxima.iter().copied().filter(|r| r.x <= x0 + near));
            let right = min_drop(maxima.iter().rev().copied().filter(|r| r.x >= x0 - near));
            Verdict::checked(left.min(right))
        }
        _ => Verdict::SKIPPED,
    };

    let eta_containment = match (geom.eta_minus, geom.eta_plus) {
        (Some(lo), Some(hi)) if p.thm3_applicable() && w.is_full() => Verdict::checked(
            records.iter().map(|r| (r.x - lo).min(hi - r.x)).fold(f64::INFINITY, f64::min),
        ),
        _ => Verdict::SKIPPED,
    };

    let delta_containment = match geom.delta {
        Some(d) if p.thm4_applicable() && w.is_full() => {
            Verdict::checked(maxima.iter().map(|r| d - r.x.abs()).fold(f64::INFINITY, f64::min))
        }
        _ => Verdict::SKIPPED,
    };

    let on_delta_window = match (geom.delta, w.symmetric_half_width()) {
        (Some(d), Some(h)) => (d - h).abs() <= 1e-15 * d,
        _ => false,
    };
    let center_decreasing = if on_delta_window && p.k.is_multiple_of(2) && p.thm4_applicable() {
        let right = min_drop(maxima.iter().copied().filter(|r| r.x >= -near));
        let left = min_drop(maxima.iter().rev().copied().filter(|r| r.x <= near));
        Verdict::checked(left.min(right))
    } else {
        Verdict::SKIPPED
    };

    StructureReport { unimodal, eta_containment, delta_containment, center_decreasing }
}
