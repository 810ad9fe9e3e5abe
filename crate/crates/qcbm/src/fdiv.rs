//! The f-divergence registry.
//!
//! Every entry evaluates `D_f(p‖q) = Σ_x p(x) f*(q(x)/p(x))` where `f*` is
//! the generator in ratio form, `f*(r) = r f(1/r)`. Two independent routes
//! compute each value:
//!
//! * [`exact_divergence_conjugate`] — the ratio-form expectation above;
//! * [`exact_divergence_definition`] — the direct sum over outcomes in
//!   terms of `p` and `q` (absolute differences, square roots, logs of
//!   probability ratios), with the same normalisation as the generator.
//!
//! The two routes share no code path and serve as cross-checks of each
//! other; tests hold them to 1e−10.
//!
//! Asymmetric entries are standardised — `f*(1) = 0`, `f*′(1) = 0`,
//! `f*″(1) = 1` — which fixes their constants (the 2 in the squared
//! Hellinger generator, the 4 in the type-II Kullback–Leibler generators,
//! the ½ in the Pearson generators). Total variation keeps its conventional
//! ½ and is not standardisable (its generator has a kink at r = 1). The
//! three symmetric entries are the plain sums of their asymmetric halves'
//! conventional forms, so `jeffrey = kl_i_fwd + kl_i_rev` exactly, while
//! `js` and `pearson_sym` equal the corresponding standardised sums divided
//! by 4 and multiplied by 2 respectively; their curvatures at r = 1 are 2,
//! ½, and 4 rather than 1.
//!
//! Conventions: natural logarithms, `0·f*(0/0) = 0`, and evaluation errors
//! out (rather than returning ∞) when a generator is singular where one of
//! the distributions vanishes. Ratio clamping is for estimated ratios only;
//! the exact evaluators never clamp.

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};

/// Bounds applied to estimated density ratios before they reach a generator
/// or its derivative, guarding the singularities of log and 1/r terms when a
/// classifier saturates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioClampPolicy {
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for RatioClampPolicy {
    fn default() -> Self {
        RatioClampPolicy {
            r_min: 1e-8,
            r_max: 1e8,
        }
    }
}

impl RatioClampPolicy {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
            return Err(Error::InvalidClampBounds { r_min, r_max });
        }
        Ok(RatioClampPolicy { r_min, r_max })
    }

    /// Clamps a ratio into [r_min, r_max]; +∞ saturates to r_max.
    pub fn clamp(&self, r: f64) -> f64 {
        r.clamp(self.r_min, self.r_max)
    }
}

/// Registry of divergence generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    /// Total variation, ½ Σ |p − q|.
    Tv,
    /// Squared Hellinger distance (standardised): 2 Σ (√p − √q)².
    H2,
    /// Kullback–Leibler of p from q: Σ p ln(p/q).
    KlIFwd,
    /// Kullback–Leibler of q from p: Σ q ln(q/p).
    KlIRev,
    /// Type-II forward KL (standardised): 4 Σ p ln(2p/(p+q)).
    KlIiFwd,
    /// Type-II reverse KL (standardised): 4 Σ q ln(2q/(p+q)).
    KlIiRev,
    /// Pearson χ² of q from p (standardised): ½ Σ (p − q)²/p.
    PearsonFwd,
    /// Pearson χ² of p from q (standardised): ½ Σ (p − q)²/q.
    PearsonRev,
    /// Jeffrey divergence: the sum of both type-I KL directions.
    Jeffrey,
    /// Jensen–Shannon built from type-II halves: Σ p ln(2p/(p+q)) + Σ q ln(2q/(p+q)).
    Js,
    /// Symmetric Pearson: Σ (p − q)²/p + Σ (p − q)²/q.
    PearsonSym,
}

impl Divergence {
    /// Registry order: the eight asymmetric-table entries, then the three
    /// symmetric constructions. Tie-breaks elsewhere follow this order.
    pub const ALL: [Divergence; 11] = [
        Divergence::Tv,
        Divergence::H2,
        Divergence::KlIFwd,
        Divergence::KlIRev,
        Divergence::KlIiFwd,
        Divergence::KlIiRev,
        Divergence::PearsonFwd,
        Divergence::PearsonRev,
        Divergence::Jeffrey,
        Divergence::Js,
        Divergence::PearsonSym,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Divergence::Tv => "tv",
            Divergence::H2 => "h2",
            Divergence::KlIFwd => "kl_i_fwd",
            Divergence::KlIRev => "kl_i_rev",
            Divergence::KlIiFwd => "kl_ii_fwd",
            Divergence::KlIiRev => "kl_ii_rev",
            Divergence::PearsonFwd => "pearson_fwd",
            Divergence::PearsonRev => "pearson_rev",
            Divergence::Jeffrey => "jeffrey",
            Divergence::Js => "js",
            Divergence::PearsonSym => "pearson_sym",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Divergence::ALL
            .into_iter()
            .find(|d| d.name() == name)
            .ok_or_else(|| Error::UnknownDivergence(name.to_string()))
    }

    /// Whether D(p, q) = D(q, p) for all arguments.
    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            Divergence::Tv
                | Divergence::H2
                | Divergence::Jeffrey
                | Divergence::Js
                | Divergence::PearsonSym
        )
    }

    /// Whether the generator is standardised (f*′(1) = 0, f*″(1) = 1).
    /// Total variation has no curvature at 1; the symmetric sums keep their
    /// conventional scale instead.
    pub fn is_standardised(self) -> bool {
        !matches!(
            self,
            Divergence::Tv | Divergence::Jeffrey | Divergence::Js | Divergence::PearsonSym
        )
    }

    /// The generator in ratio form, f*(r), for r ≥ 0. Returns +∞ at r = 0
    /// for generators singular there.
    pub fn conjugate(self, r: f64) -> f64 {
        match self {
            Divergence::Tv => 0.5 * (r - 1.0).abs(),
            Divergence::H2 => {
                let d = r.sqrt() - 1.0;
                2.0 * d * d
            }
            Divergence::KlIFwd => -r.ln() + r - 1.0,
            Divergence::KlIRev => x_ln_x(r) - r + 1.0,
            Divergence::KlIiFwd => 4.0 * (2.0 / (r + 1.0)).ln() + 2.0 * (r - 1.0),
            Divergence::KlIiRev => {
                if r == 0.0 {
                    2.0
                } else {
                    4.0 * r * (2.0 * r / (r + 1.0)).ln() + 2.0 * (1.0 - r)
                }
            }
            Divergence::PearsonFwd => {
                let d = r - 1.0;
                0.5 * d * d
            }
            Divergence::PearsonRev => {
                let d = r - 1.0;
                0.5 * d * d / r
            }
            Divergence::Jeffrey => x_ln_x(r) - r.ln(),
            Divergence::Js => {
                let fwd = (2.0 / (r + 1.0)).ln();
                let rev = if r == 0.0 {
                    0.0
                } else {
                    r * (2.0 * r / (r + 1.0)).ln()
                };
                fwd + rev
            }
            Divergence::PearsonSym => {
                let d = r - 1.0;
                d * d + d * d / r
            }
        }
    }

    /// Exact derivative of [`Divergence::conjugate`], without clamping.
    fn conjugate_derivative_raw(self, r: f64) -> f64 {
        match self {
            Divergence::Tv => {
                // sgn(r − 1)/2, with sgn(0) = 0.
                if r > 1.0 {
                    0.5
                } else if r < 1.0 {
                    -0.5
                } else {
                    0.0
                }
            }
            Divergence::H2 => 2.0 * (1.0 - 1.0 / r.sqrt()),
            Divergence::KlIFwd => 1.0 - 1.0 / r,
            Divergence::KlIRev => r.ln(),
            Divergence::KlIiFwd => 2.0 - 4.0 / (1.0 + r),
            Divergence::KlIiRev => 4.0 * (2.0 * r / (1.0 + r)).ln() + 2.0 * (1.0 - r) / (1.0 + r),
            Divergence::PearsonFwd => r - 1.0,
            Divergence::PearsonRev => 0.5 * (1.0 - 1.0 / (r * r)),
            Divergence::Jeffrey => r.ln() + 1.0 - 1.0 / r,
            Divergence::Js => (2.0 * r / (1.0 + r)).ln(),
            Divergence::PearsonSym => 2.0 * (r - 1.0) + 1.0 - 1.0 / (r * r),
        }
    }

    /// True if f*(0) = +∞, i.e. the generator cannot absorb outcomes where
    /// q vanishes but p does not.
    fn singular_at_zero_ratio(self) -> bool {
        matches!(
            self,
            Divergence::KlIFwd
                | Divergence::PearsonRev
                | Divergence::Jeffrey
                | Divergence::PearsonSym
        )
    }

    /// The limit of p·f*(q/p) as p → 0 with q fixed, or an error when that
    /// limit diverges (the generator cannot absorb outcomes where p
    /// vanishes but q does not).
    fn vanishing_p_term(self, q: f64, outcome: usize) -> Result<f64> {
        match self {
            Divergence::Tv => Ok(0.5 * q),
            Divergence::H2 => Ok(2.0 * q),
            Divergence::KlIFwd => Ok(q),
            Divergence::KlIiFwd => Ok(2.0 * q),
            Divergence::KlIiRev => Ok(q * (4.0 * std::f64::consts::LN_2 - 2.0)),
            Divergence::PearsonRev => Ok(0.5 * q),
            Divergence::Js => Ok(q * std::f64::consts::LN_2),
            Divergence::KlIRev
            | Divergence::PearsonFwd
            | Divergence::Jeffrey
            | Divergence::PearsonSym => Err(Error::SupportViolation {
                divergence: self.name(),
                vanishing: "p",
                outcome,
            }),
        }
    }
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Divergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Divergence::from_name(s)
    }
}

fn x_ln_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// f*′ evaluated on a clamped ratio. Errors on non-positive or non-finite
/// input; infinite classifier ratios should be saturated by the caller's
/// clamp policy before reaching an expectation, so they are rejected here.
pub fn conjugate_derivative(gen: Divergence, r: f64, clamp: RatioClampPolicy) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidRatio(r));
    }
    Ok(gen.conjugate_derivative_raw(clamp.clamp(r)))
}

fn check_widths(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.n_bits() != q.n_bits() {
        return Err(Error::WidthMismatch {
            left: p.n_bits(),
            right: q.n_bits(),
        });
    }
    Ok(())
}

/// D_f(p‖q) through the ratio-form expectation Σ p·f*(q/p).
///
/// Outcomes with p = q = 0 contribute nothing. Outcomes where only one
/// distribution vanishes contribute their finite limit, or error out for
/// generators singular at that boundary.
pub fn exact_divergence_conjugate(
    gen: Divergence,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<f64> {
    check_widths(p, q)?;
    let mut total = 0.0;
    for x in 0..p.outcome_count() {
        let (px, qx) = (p.prob(x), q.prob(x));
        if px == 0.0 && qx == 0.0 {
            continue;
        }
        if px == 0.0 {
            total += gen.vanishing_p_term(qx, x)?;
        } else if qx == 0.0 && gen.singular_at_zero_ratio() {
            return Err(Error::SupportViolation {
                divergence: gen.name(),
                vanishing: "q",
                outcome: x,
            });
        } else {
            total += px * gen.conjugate(qx / px);
        }
    }
    Ok(total)
}

/// D_f(p‖q) through the direct sum over outcomes, sharing no code with the
/// ratio route.
pub fn exact_divergence_definition(
    gen: Divergence,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<f64> {
    check_widths(p, q)?;
    let n = p.outcome_count();
    let term = |x: usize| -> (f64, f64) { (p.prob(x), q.prob(x)) };

    // Each arm writes the sum in p/q form; the shared constants match the
    // registry generators so both routes value the same quantity.
    let value = match gen {
        Divergence::Tv => (0..n).map(|x| (p.prob(x) - q.prob(x)).abs()).sum::<f64>() * 0.5,
        Divergence::H2 => {
            (0..n)
                .map(|x| {
                    let d = p.prob(x).sqrt() - q.prob(x).sqrt();
                    d * d
                })
                .sum::<f64>()
                * 2.0
        }
        Divergence::KlIFwd => {
            let mut acc = 0.0;
            for x in 0..n {
                let (px, qx) = term(x);
                if px > 0.0 {
                    if qx == 0.0 {
                        return Err(Error::SupportViolation {
                            divergence: gen.name(),
                            vanishing: "q",
                            outcome: x,
                        });
                    }
                    acc += px * (px / qx).ln();
                }
            }
            acc
        }
        Divergence::KlIRev => {
            let mut acc = 0.0;
            for x in 0..n {
                let (px, qx) = term(x);
                if qx > 0.0 {
                    if px == 0.0 {
                        return Err(Error::SupportViolation {
                            divergence: gen.name(),
                            vanishing: "p",
                            outcome: x,
                        });
                    }
                    acc += qx * (qx / px).ln();
                }
            }
            acc
        }
        Divergence::KlIiFwd => 4.0 * kl_to_midpoint(p, q),
        Divergence::KlIiRev => 4.0 * kl_to_midpoint(q, p),
        Divergence::PearsonFwd => {
            let mut acc = 0.0;
            for x in 0..n {
                let (px, qx) = term(x);
                if px == 0.0 {
                    if qx > 0.0 {
                        return Err(Error::SupportViolation {
                            divergence: gen.name(),
                            vanishing: "p",
                            outcome: x,
                        });
                    }
                } else {
                    let d = px - qx;
                    acc += d * d / px;
                }
            }
            0.5 * acc
        }
        Divergence::PearsonRev => {
            let mut acc = 0.0;
            for x in 0..n {
                let (px, qx) = term(x);
                if qx == 0.0 {
                    if px > 0.0 {
                        return Err(Error::SupportViolation {
                            divergence: gen.name(),
                            vanishing: "q",
                            outcome: x,
                        });
                    }
                } else {
                    let d = px - qx;
                    acc += d * d / qx;
                }
            }
            0.5 * acc
        }
        Divergence::Jeffrey => {
            exact_divergence_definition(Divergence::KlIFwd, p, q)?
                + exact_divergence_definition(Divergence::KlIRev, p, q)?
        }
        Divergence::Js => kl_to_midpoint(p, q) + kl_to_midpoint(q, p),
        Divergence::PearsonSym => {
            2.0 * (exact_divergence_definition(Divergence::PearsonFwd, p, q)?
                + exact_divergence_definition(Divergence::PearsonRev, p, q)?)
        }
    };
    Ok(value)
}

/// Σ a ln(2a/(a+b)), the KL of `a` from the midpoint (a+b)/2. Finite for
/// any pair of distributions.
fn kl_to_midpoint(a: &DiscreteDistribution, b: &DiscreteDistribution) -> f64 {
    (0..a.outcome_count())
        .map(|x| {
            let (ax, bx) = (a.prob(x), b.prob(x));
            if ax == 0.0 {
                0.0
            } else {
                ax * (2.0 * ax / (ax + bx)).ln()
            }
        })
        .sum()
}

/// D_f(p‖q) with ratios supplied by an estimator instead of read off q/p.
/// With exact ratios this reproduces [`exact_divergence_conjugate`].
pub fn divergence_from_ratios<F>(gen: Divergence, p: &DiscreteDistribution, ratio: F) -> Result<f64>
where
    F: Fn(usize) -> f64,
{
    let mut total = 0.0;
    for x in 0..p.outcome_count() {
        let px = p.prob(x);
        if px == 0.0 {
            continue;
        }
        let r = ratio(x);
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidRatio(r));
        }
        total += px * gen.conjugate(r);
    }
    Ok(total)
}

/// An algebraically equivalent generator for the forward Pearson
/// divergence: (r² − 1)/2 instead of (r − 1)²/2. The two differ by
/// 1 − r, whose expectation under p vanishes, so both value every pair of
/// distributions identically.
pub fn pearson_fwd_alt_conjugate(r: f64) -> f64 {
    0.5 * (r * r - 1.0)
}

/// True iff the generator values this pair symmetrically: compares
/// D(p, q) and D(q, p) through the definition route. Symmetric entries
/// return true on every valid pair; asymmetric ones only coincidentally.
pub fn symmetry_check(
    gen: Divergence,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<bool> {
    let forward = exact_divergence_definition(gen, p, q)?;
    let backward = exact_divergence_definition(gen, q, p)?;
    Ok((forward - backward).abs() <= 1e-10 * forward.abs().max(1.0))
}
