//! The eight-case regime decision procedure for a generator matrix, plus
//! the closed-form theory parameters attached to each regime: the core
//! threshold `eps_max`, the core growth rate `d`, the subcritical exponent
//! `delta`, mixing steps, and the small-component bounds.

use num::rational::BigRational;
use num::One;
use serde::Serialize;

use crate::error::{Result, SkgError};
use crate::genmatrix::{derive, support_report, DerivedQuantities, GeneratorMatrix, Signature, SupportReport};
use crate::spectral::{mixing_steps, rpd_delta, walk_spectrum, WalkSpectrum};

/// Verdict on the asymptotic component structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ComponentRegime {
    /// Largest component is O((k-1)^t): disconnected or bipartite support.
    SmallComponents,
    /// Almost all vertices isolated: `prod c_i < 1`.
    Shattered,
    /// Giant component of size proportional to n.
    Giant,
    /// All column sums exactly 1; the critical case, where neither the
    /// shattered nor the giant prediction applies.
    UndeterminedCritical,
}

/// Verdict on asymptotic connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConnectivityRegime {
    /// Support disconnected or bipartite; the component axis already rules.
    NotApplicable,
    /// `c_min < 1`: polylogarithmically many isolated vertices.
    ManyIsolated,
    /// `c_min = 1` with a backbone-degree-zero vertex.
    SomeIsolated,
    Connected,
}

/// Three-way comparison against 1, decided exactly or within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "=")]
    Equal,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ToleranceMode {
    Float { tol: f64 },
    ExactRational,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeFlags {
    pub w_connected: bool,
    pub w_bipartite: bool,
    pub prod_c_vs_one: Rel,
    pub c_min_vs_one: Rel,
    pub backbone_min_degree: usize,
    pub c_all_equal: bool,
    /// A float comparison against 1 landed within the 10x-tolerance band;
    /// the verdict is within rounding noise of the critical surface.
    pub near_critical: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeParams {
    pub prod_c: f64,
    pub sum_c_ln_c: Option<f64>,
    /// Upper bound on the core threshold eps; `None` when `sum c ln c <= 0`.
    pub eps_max: Option<f64>,
    /// True when the eps bound degenerates to +infinity (all c_i equal).
    pub eps_max_unbounded: bool,
    /// The eps actually used for `core_growth_d` and `mixing_s`.
    pub core_eps: Option<f64>,
    pub core_growth_d: Option<f64>,
    pub subcritical: Option<SubcriticalDelta>,
    pub mixing_s: Option<u64>,
    pub gap: Option<f64>,
}

/// The complete classification of a generator matrix.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    /// Which of the eight regime cases have their hypotheses satisfied.
    pub case_ids: Vec<u8>,
    pub component_regime: ComponentRegime,
    pub connectivity_regime: ConnectivityRegime,
    pub flags: RegimeFlags,
    pub params: RegimeParams,
    pub tolerance_mode: ToleranceMode,
}

fn rel_to_one_float(x: f64, tol: f64) -> (Rel, bool) {
    let dev = x - 1.0;
    let rel = if dev.abs() <= tol {
        Rel::Equal
    } else if dev < 0.0 {
        Rel::Below
    } else {
        Rel::Above
    };
    (rel, dev.abs() <= 10.0 * tol)
}

fn rel_rational(x: &BigRational) -> Rel {
    match x.cmp(&BigRational::one()) {
        std::cmp::Ordering::Less => Rel::Below,
        std::cmp::Ordering::Equal => Rel::Equal,
        std::cmp::Ordering::Greater => Rel::Above,
    }
}

pub fn classify_default(p: &GeneratorMatrix) -> RegimeReport {
    classify(p, 1e-12)
}

/// Classify `P` into its component and connectivity regimes.
///
/// Knife-edge equalities (`prod c = 1`, `c_min = 1`, all `c_i` equal) are
/// decided by exact rational arithmetic when the matrix carries rational
/// entries, and by `|x - 1| <= tol` otherwise; float decisions within
/// `10 tol` of the surface raise the `near_critical` flag.
pub fn classify(p: &GeneratorMatrix, tol: f64) -> RegimeReport {
    let d = derive(p);
    let support = support_report(&d);
    classify_derived(&d, &support, tol)
}

pub fn classify_derived(d: &DerivedQuantities, support: &SupportReport, tol: f64) -> RegimeReport {
    let prod_c = d.prod_c();
    let mut near_critical = false;

    let (prod_rel, c_min_rel, all_equal, tolerance_mode) = match &d.c_rational {
        Some(cr) => {
            let prod: BigRational = cr.iter().product();
            let min = cr.iter().min().unwrap();
            let all_equal = cr.iter().all(|c| c == &cr[0]);
            (rel_rational(&prod), rel_rational(min), all_equal, ToleranceMode::ExactRational)
        }
        None => {
            let (prod_rel, near1) = rel_to_one_float(prod_c, tol);
            let (cmin_rel, near2) = rel_to_one_float(d.c_min(), tol);
            near_critical = near1 || near2;
            let all_equal = d.c_max() - d.c_min() <= tol;
            (prod_rel, cmin_rel, all_equal, ToleranceMode::Float { tol })
        }
    };

    let mut case_ids = Vec::new();
    let effective = support.connected && !support.bipartite;

    let (component_regime, connectivity_regime) = if !effective {
        case_ids.push(1);
        (ComponentRegime::SmallComponents, ConnectivityRegime::NotApplicable)
    } else {
        let component = match (prod_rel, all_equal) {
            (Rel::Below, _) => {
                case_ids.push(2);
                ComponentRegime::Shattered
            }
            (Rel::Equal, false) => {
                case_ids.push(3);
                ComponentRegime::Giant
            }
            (Rel::Above, _) => {
                case_ids.push(4);
                ComponentRegime::Giant
            }
            (Rel::Equal, true) => ComponentRegime::UndeterminedCritical,
        };
        let connectivity = match (c_min_rel, support.backbone_min_degree) {
            (Rel::Below, _) => {
                case_ids.push(5);
                ConnectivityRegime::ManyIsolated
            }
            (Rel::Equal, 0) => {
                case_ids.push(6);
                ConnectivityRegime::SomeIsolated
            }
            (Rel::Equal, _) => {
                case_ids.push(7);
                ConnectivityRegime::Connected
            }
            (Rel::Above, _) => {
                case_ids.push(8);
                ConnectivityRegime::Connected
            }
        };
        (component, connectivity)
    };

    // theory parameters, populated where defined
    let sum_c_ln_c = d.sum_c_ln_c();
    let eps_bound = sum_c_ln_c.and_then(|_| epsilon_max(d).ok());
    let eps_max_unbounded = eps_bound.map(|e| e.is_infinite()).unwrap_or(false);
    let core_eps = eps_bound.map(|e| if e.is_finite() { e / 2.0 } else { 0.5 });
    let core_d = core_eps.and_then(|eps| core_growth_d(d, eps).ok());
    let subcritical = if effective && prod_rel == Rel::Below {
        subcritical_delta(d).ok()
    } else {
        None
    };
    let spectrum = if d.m1.is_some() { walk_spectrum(d).ok() } else { None };
    let gap = spectrum.as_ref().map(|s| s.gap);
    let mixing_s = match (&spectrum, core_eps) {
        (Some(s), Some(eps)) if s.gap > 0.0 => mixing_steps(s, d, eps).ok(),
        _ => None,
    };

    RegimeReport {
        case_ids,
        component_regime,
        connectivity_regime,
        flags: RegimeFlags {
            w_connected: support.connected,
            w_bipartite: support.bipartite,
            prod_c_vs_one: prod_rel,
            c_min_vs_one: c_min_rel,
            backbone_min_degree: support.backbone_min_degree,
            c_all_equal: all_equal,
            near_critical,
        },
        params: RegimeParams {
            prod_c,
            sum_c_ln_c,
            eps_max: eps_bound.filter(|e| e.is_finite()),
            eps_max_unbounded,
            core_eps,
            core_growth_d: core_d,
            subcritical,
            mixing_s,
            gap,
        },
        tolerance_mode,
    }
}

/// Upper bound on the admissible core threshold:
/// `sum c_i ln(c_i) / (sum c_i ln(c_i) - vol(W) ln(c_min))`, infinite when
/// the denominator vanishes (all column sums equal). Always positive on
/// its domain `sum c_i ln(c_i) > 0`.
pub fn epsilon_max(d: &DerivedQuantities) -> Result<f64> {
    let s = d
        .sum_c_ln_c()
        .ok_or_else(|| SkgError::Domain("eps bound needs all column sums positive".into()))?;
    if s <= 0.0 {
        return Err(SkgError::Domain(format!(
            "eps bound needs sum c_i ln(c_i) > 0, got {s}"
        )));
    }
    let denom = s - d.vol_w * d.c_min().ln();
    // denom = sum c_i (ln c_i - ln c_min) >= 0, zero only for equal sums
    if denom <= 1e-14 * (s.abs() + d.vol_w) {
        return Ok(f64::INFINITY);
    }
    Ok(s / denom)
}

/// Core growth rate `d = c_min^eps (c_1^{c_1} ... c_k^{c_k})^{(1-eps)/vol}`;
/// every core vertex has expected degree at least `d^t`, and `d > 1` on the
/// admissible range of eps.
pub fn core_growth_d(d: &DerivedQuantities, eps: f64) -> Result<f64> {
    let bound = epsilon_max(d)?;
    if !(eps > 0.0) || eps >= bound {
        return Err(SkgError::Domain(format!(
            "eps {eps} outside (0, {bound})"
        )));
    }
    let s = d.sum_c_ln_c().unwrap();
    let ln_d = eps * d.c_min().ln() + (1.0 - eps) / d.vol_w * s;
    let growth = ln_d.exp();
    if growth <= 1.0 {
        return Err(SkgError::Domain(format!(
            "core growth rate {growth} <= 1; eps {eps} too close to the bound"
        )));
    }
    Ok(growth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubcriticalBranch {
    General,
    EqualColumns,
}

/// Exponent of the isolated-vertex count in the subcritical regime: with
/// probability `1 - exp(-Theta(n^delta))` all but `O(n^delta)` vertices are
/// isolated.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubcriticalDelta {
    /// Smaller root of `alpha = 2 (eps - alpha)^2 / (ln c_max - ln c_min)^2`
    /// with `eps = -(1/k) sum ln c_i`; absent on the equal-columns branch.
    pub alpha: Option<f64>,
    pub delta: f64,
    pub branch: SubcriticalBranch,
}

pub fn subcritical_delta(d: &DerivedQuantities) -> Result<SubcriticalDelta> {
    let k = d.k();
    if k < 2 {
        return Err(SkgError::Domain("subcritical exponent needs k >= 2".into()));
    }
    if d.c_min() <= 0.0 {
        return Err(SkgError::Domain("subcritical exponent needs all c_i > 0".into()));
    }
    let prod = d.prod_c();
    if prod >= 1.0 {
        return Err(SkgError::Domain(format!(
            "subcritical exponent needs prod c_i < 1, got {prod}"
        )));
    }
    let ln_k = (k as f64).ln();
    if d.c_max() - d.c_min() <= 1e-14 {
        // all columns equal c < 1: expected edges n^{1 + ln(c)/ln(k)} / 2
        return Ok(SubcriticalDelta {
            alpha: None,
            delta: 1.0 + d.c_min().ln() / ln_k,
            branch: SubcriticalBranch::EqualColumns,
        });
    }
    let eps = -d.c.iter().map(|c| c.ln()).sum::<f64>() / k as f64;
    let spread = d.c_max().ln() - d.c_min().ln();
    // smaller root of 2a^2 - (4 eps + spread^2) a + 2 eps^2 = 0, written in
    // the cancellation-free product form
    let alpha = 4.0 * eps * eps
        / (4.0 * eps + spread * spread + spread * (spread * spread + 8.0 * eps).sqrt());
    Ok(SubcriticalDelta {
        alpha: Some(alpha),
        delta: 1.0 - alpha / ln_k,
        branch: SubcriticalBranch::General,
    })
}

/// One size class of components of a bipartite tensor power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    pub size: u128,
    pub count: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallCompBound {
    /// Upper bound on the largest component of the support power.
    pub bound: u128,
    /// Full component census for the bipartite branch: every component of
    /// the power appears in exactly one entry.
    pub census: Option<Vec<CensusEntry>>,
}

fn checked_pow(base: u128, exp: u32) -> Result<u128> {
    base.checked_pow(exp).ok_or(SkgError::Overflow("component size bound"))
}

/// Deterministic bound on the largest component of the t-th tensor power
/// of a disconnected or bipartite support graph.
pub fn lemma_smallcomp_bound(s: &SupportReport, k: usize, t: u32) -> Result<SmallCompBound> {
    if s.connected && !s.bipartite {
        return Err(SkgError::Domain(
            "small-component bound applies only to disconnected or bipartite support".into(),
        ));
    }
    if !s.connected {
        return Ok(SmallCompBound {
            bound: checked_pow(k as u128 - 1, t)?,
            census: None,
        });
    }
    // connected and bipartite: components of the power are indexed by
    // unordered pattern pairs {S, S^c} of positions sent to side A
    let (a, b) = s
        .bipartition
        .as_ref()
        .map(|(a, b)| (a.len() as u128, b.len() as u128))
        .expect("connected bipartite support has a bipartition");
    if t == 0 {
        return Ok(SmallCompBound { bound: 1, census: Some(vec![CensusEntry { size: 1, count: 1 }]) });
    }
    let mut census = Vec::new();
    let mut bound: u128 = 0;
    for i in 0..=(t / 2) {
        let size = checked_pow(a, i)?
            .checked_mul(checked_pow(b, t - i)?)
            .and_then(|x| {
                checked_pow(a, t - i)
                    .ok()
                    .and_then(|y| checked_pow(b, i).ok().and_then(|z| y.checked_mul(z)))
                    .and_then(|w| x.checked_add(w))
            })
            .ok_or(SkgError::Overflow("component size bound"))?;
        let mut count = crate::comb::binomial(t as u128, i as u128)?;
        if i == t - i {
            count /= 2;
        }
        bound = bound.max(size);
        census.push(CensusEntry { size, count });
    }
    Ok(SmallCompBound { bound, census: Some(census) })
}

/// Membership in the connected core `S_eps`: every signature coordinate
/// strictly exceeds `(1 - eps) pi_i`.
pub fn s_eps_member(sigma: &Signature, eps: f64, d: &DerivedQuantities) -> Result<bool> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SkgError::Domain(format!("eps must be in (0,1), got {eps}")));
    }
    let pi = d
        .pi
        .as_ref()
        .ok_or_else(|| SkgError::Domain("core membership needs all c_i > 0".into()))?;
    if sigma.k() != pi.len() {
        return Err(SkgError::LengthMismatch(sigma.k(), pi.len()));
    }
    Ok(sigma
        .as_slice()
        .iter()
        .zip(pi)
        .all(|(&s, &p)| s > (1.0 - eps) * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SigmaNuMembership {
    pub member: bool,
    /// Whether the infinite quantifier over walk steps was settled: either
    /// a concrete violation was found, or the certified tail bound keeps
    /// the orbit above `nu` for all remaining steps.
    pub certified: bool,
}

/// Membership in `Sigma_nu`: `<sigma M^s, L> >= nu` for every `s >= 0`.
///
/// The orbit is scanned up to a horizon `s*` chosen so that the relative
/// pointwise distance bound settles every later step; when `nu` sits within
/// the certified tail of `<pi, L>` the answer is reported uncertified.
pub fn sigma_nu_member(
    sigma: &Signature,
    nu: f64,
    d: &DerivedQuantities,
    s: &WalkSpectrum,
) -> Result<SigmaNuMembership> {
    let l = d
        .l
        .as_ref()
        .ok_or_else(|| SkgError::Domain("orbit membership needs all c_i > 0".into()))?;
    if s.gap <= 0.0 {
        return Err(SkgError::Domain(
            "orbit membership needs a mixing chain (connected, non-bipartite W)".into(),
        ));
    }
    if sigma.k() != d.k() {
        return Err(SkgError::LengthMismatch(sigma.k(), d.k()));
    }
    let min_l = l.iter().cloned().fold(f64::INFINITY, f64::min);
    if nu <= min_l {
        // every distribution satisfies <sigma', L> >= min L
        return Ok(SigmaNuMembership { member: true, certified: true });
    }

    let pi = d.pi.as_ref().unwrap();
    let m = d.m.as_ref().unwrap();
    let pi_l: f64 = pi.iter().zip(l).map(|(p, l)| p * l).sum();
    let weight: f64 = pi.iter().zip(l).map(|(p, l)| p * l.abs()).sum();
    let margin = pi_l - nu;

    let scale = 1.0 + pi_l.abs() + nu.abs();
    let settled = weight > 0.0 && margin.abs() > 1e-12 * scale;
    let horizon = if settled {
        let eps_target = margin.abs() / (2.0 * weight);
        let steps = mixing_steps(s, d, eps_target)?;
        debug_assert!(rpd_delta(d, steps)? < eps_target);
        steps
    } else {
        // cannot settle the tail; scan a fixed window
        256
    };

    let mut current = sigma.clone();
    for _ in 0..=horizon {
        let value: f64 = current.as_slice().iter().zip(l).map(|(s, l)| s * l).sum();
        if value < nu {
            return Ok(SigmaNuMembership { member: false, certified: true });
        }
        current = current.step(m);
    }
    Ok(SigmaNuMembership { member: true, certified: settled && margin > 0.0 })
}
