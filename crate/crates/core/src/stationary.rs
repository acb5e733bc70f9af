//! The invariant measures of a switching random walk: ν for the
//! switching ladder-heights chain, μ for the walk itself (via the
//! renewal lifting map), and π for the chain of overshoots at zero
//! crossings, together with the continuous-case overshoot density used
//! by the Monte Carlo tests.
//!
//! All lattice measures carry atom masses = density × h under the Haar
//! convention, so the density formulas below transcribe directly.

use crate::error::{Error, Result};
use crate::ladder::LadderSystem;
use crate::measures::{FinitePmf, LatticeMeasure, Sign, SignRestriction, WindowDensity};
use crate::num::Num;
use crate::renewal::{renewal_measure, RenewalMeasure};

/// Largest tolerated defect on a ladder law fed into the closed-form
/// densities, relative to the requested tolerance.
const PROPER_SLACK: f64 = 10.0;

fn require_proper(law: &FinitePmf, name: &str, tol: f64) -> Result<()> {
    if law.defect().to_f64() > PROPER_SLACK * tol {
        return Err(Error::InvalidMeasure(format!(
            "{name} is not proper within tolerance (defect {:.3e})",
            law.defect().to_f64()
        )));
    }
    Ok(())
}

/// The constant a = pα / (pα + p′(1−α)) of the ν density. The 0/0 case
/// indicates a pair that cannot oscillate at the requested α.
pub fn a_constant(p: &Num, p_prime: &Num, alpha: &Num) -> Result<Num> {
    let denom = p.clone() * alpha.clone() + p_prime.clone() * (Num::one() - alpha.clone());
    if denom.to_f64() <= 0.0 {
        return Err(Error::OscillationViolated(
            "pα + p′(1−α) = 0: switching never crosses zero at this α".into(),
        ));
    }
    Ok(p.clone() * alpha.clone() / denom)
}

/// Invariant measure of the switching ladder-heights chain:
/// density P(D < x) + P(A′ > x) − 1 + a·P(D = x) + (1−a)·P(A′ = x),
/// supported on [min supp D, max supp A′].
pub fn nu(d: &FinitePmf, a_prime: &FinitePmf, alpha: &Num, tol: f64) -> Result<LatticeMeasure> {
    require_proper(d, "weak descending ladder law D", tol)?;
    require_proper(a_prime, "weak ascending ladder law A′", tol)?;
    let p = d.prob_lt(0);
    let p_prime = a_prime.prob_gt(0);
    let a = a_constant(&p, &p_prime, alpha)?;
    let span = d.span().clone();
    let h = Num::Rat(span.clone());
    let lo = d.support_min().ok_or_else(|| Error::EmptyLaw("D".into()))?;
    let hi = a_prime
        .support_max()
        .ok_or_else(|| Error::EmptyLaw("A′".into()))?;
    let mut atoms = Vec::new();
    for x in lo..=hi {
        let density = d.prob_lt(x) + a_prime.prob_gt(x) - Num::one()
            + a.clone() * d.mass(x)
            + (Num::one() - a.clone()) * a_prime.mass(x);
        let df = density.to_f64();
        if df < -PROPER_SLACK * tol {
            return Err(Error::InvalidMeasure(format!(
                "ν density {df:.3e} < 0 at {x}: inconsistent ladder inputs"
            )));
        }
        // Clamp roundoff from the float backend: a density this small is
        // pure cancellation noise and would otherwise pollute supp(ν).
        let density = if df < 0.0 || (!density.is_exact() && df < 1e-12) {
            Num::zero()
        } else {
            density
        };
        atoms.push((x, density * h.clone()));
    }
    Ok(LatticeMeasure::new(span, atoms))
}

/// The lifting map φ ↦ U₊ * φ_α⁺ + U₋′ * φ_α⁻ (an injection; μ = lift(ν)).
pub fn lift(
    phi: &LatticeMeasure,
    u_plus: &RenewalMeasure,
    u_minus_prime: &RenewalMeasure,
    alpha: &Num,
) -> Result<WindowDensity> {
    let phi_plus = SignRestriction::new(alpha.clone(), Sign::Plus).apply_measure(phi);
    let phi_minus = SignRestriction::new(alpha.clone(), Sign::Minus).apply_measure(phi);
    let up = u_plus.base.convolve_measure(&phi_plus)?;
    let down = u_minus_prime.base.convolve_measure(&phi_minus)?;
    let out = up.add(&down)?;
    if out.interior_is_empty() {
        return Err(Error::EmptyInterior(
            "lift output has no valid interior; enlarge the renewal windows".into(),
        ));
    }
    Ok(out)
}

/// Invariant measure of the overshoot chain (valid when α = 1 or the
/// state space is non-lattice): density
/// [P(D≤x) − P(D+A′≤x)]·1(x<0) + [P(A′>x) − P(D+A′>x)]·1(x≥0).
pub fn pi(d: &FinitePmf, a_prime: &FinitePmf, tol: f64) -> Result<LatticeMeasure> {
    require_proper(d, "weak descending ladder law D", tol)?;
    require_proper(a_prime, "weak ascending ladder law A′", tol)?;
    let sum = d.convolve(a_prime)?;
    let span = d.span().clone();
    let h = Num::Rat(span.clone());
    let lo = d.support_min().ok_or_else(|| Error::EmptyLaw("D".into()))?;
    let hi = a_prime
        .support_max()
        .ok_or_else(|| Error::EmptyLaw("A′".into()))?;
    let mut atoms = Vec::new();
    for x in lo..=hi {
        let density = if x < 0 {
            d.prob_le(x) - sum.prob_le(x)
        } else {
            a_prime.prob_gt(x) - sum.prob_gt(x)
        };
        let df = density.to_f64();
        if df < -PROPER_SLACK * tol {
            return Err(Error::InvalidMeasure(format!(
                "π density {df:.3e} < 0 at {x}: inconsistent ladder inputs"
            )));
        }
        let density = if df < 0.0 { Num::zero() } else { density };
        atoms.push((x, density * h.clone()));
    }
    Ok(LatticeMeasure::new(span, atoms))
}

/// The random-walk specialization of π:
/// π(dx) = p·[P(X₁ ≤ x)·1(x<0) + P(X₁ > x)·1(x≥0)]·λ(dx).
pub fn pi_rw(x: &FinitePmf, p: &Num) -> Result<LatticeMeasure> {
    let span = x.span().clone();
    let h = Num::Rat(span.clone());
    let lo = x.support_min().ok_or_else(|| Error::EmptyLaw("X₁".into()))?;
    let hi = x.support_max().unwrap();
    let atoms = (lo..=hi)
        .map(|k| {
            let density = if k < 0 { x.prob_le(k) } else { x.prob_gt(k) };
            (k, p.clone() * density * h.clone())
        })
        .collect();
    Ok(LatticeMeasure::new(span, atoms))
}

/// Everything Theorem 1 and Proposition 1 produce for one lattice spec.
#[derive(Clone, Debug)]
pub struct StationaryBundle {
    pub nu: LatticeMeasure,
    pub mu: WindowDensity,
    /// None when the overshoot measure is out of the proposition's scope
    /// (lattice span with α ∈ (0,1)).
    pub pi: Option<LatticeMeasure>,
    pub p: Num,
    pub p_prime: Num,
    pub a: Num,
    /// ‖μ‖ = ‖U₊‖·‖ν_α⁺‖ + ‖U₋′‖·‖ν_α⁻‖ when E X₁ < 0 < E X₁′; None for
    /// the infinite-mass (zero-drift) regime.
    pub mu_total_mass: Option<Num>,
    pub u_plus: RenewalMeasure,
    pub u_minus_prime: RenewalMeasure,
    pub tol_achieved: f64,
}

impl StationaryBundle {
    /// `half_width` is the lattice half-width of the window on which μ is
    /// materialized.
    pub fn compute(ladders: &LadderSystem, alpha: &Num, half_width: i64, tol: f64) -> Result<Self> {
        let nu_m = nu(&ladders.d.pmf, &ladders.a_prime.pmf, alpha, tol)?;
        let radius = nu_m
            .support_min()
            .map(|a| nu_m.support_max().unwrap().max(-a))
            .unwrap_or(0);
        let w = half_width + radius.max(1);
        let u_plus = renewal_measure(&ladders.a_strict.pmf, w)?;
        let u_minus_prime = renewal_measure(&ladders.d_strict_prime.pmf, w)?;
        let mu = lift(&nu_m, &u_plus, &u_minus_prime, alpha)?;

        let span_is_lattice = true; // FinitePmf inputs are always lattice
        let alpha_is_one = *alpha == Num::one();
        let pi_m = if alpha_is_one || !span_is_lattice {
            Some(pi(&ladders.d.pmf, &ladders.a_prime.pmf, tol)?)
        } else {
            None
        };

        let mu_total_mass = match (&u_plus.total_mass, &u_minus_prime.total_mass) {
            (Some(up), Some(um)) => {
                let restrict_p = SignRestriction::new(alpha.clone(), Sign::Plus);
                let restrict_m = SignRestriction::new(alpha.clone(), Sign::Minus);
                let plus_mass = restrict_p.apply_measure(&nu_m).total();
                let minus_mass = restrict_m.apply_measure(&nu_m).total();
                Some(up.clone() * plus_mass + um.clone() * minus_mass)
            }
            _ => None,
        };

        Ok(StationaryBundle {
            nu: nu_m,
            mu,
            pi: pi_m,
            p: ladders.p.clone(),
            p_prime: ladders.p_prime.clone(),
            a: ladders.a_const.clone(),
            mu_total_mass,
            u_plus,
            u_minus_prime,
            tol_achieved: ladders.tol_achieved,
        })
    }

    /// μ normalized to a probability density, when ‖μ‖ < ∞.
    pub fn normalize_mu(&self) -> Option<(WindowDensity, Num)> {
        let total = self.mu_total_mass.clone()?;
        if total.to_f64() <= 0.0 {
            return None;
        }
        Some((self.mu.scale(&total.clone().recip()), total))
    }
}

// ---------------------------------------------------------------------------
// Continuous-case overshoot law (Monte Carlo reference)
// ---------------------------------------------------------------------------

/// Normalized overshoot density of a mean-zero continuous random walk:
/// proportional to P(X ≤ x) for x < 0 and P(X > x) for x ≥ 0, with
/// normalizer E|X₁| (the constant p cancels).
#[derive(Clone, Debug)]
pub struct OvershootLaw {
    law: crate::kernels::ContinuousLaw,
    abs_mean: f64,
    /// I(0) = ∫_{−∞}^0 F = E X₁⁻.
    i0: f64,
}

impl OvershootLaw {
    pub fn new(law: crate::kernels::ContinuousLaw) -> Result<Self> {
        if law.mean().abs() > 1e-12 {
            return Err(Error::Unsupported(
                "overshoot law requires a mean-zero increment law".into(),
            ));
        }
        let i0 = law.integral_cdf(0.0)?;
        // Mean zero: E X⁻ = E X⁺, so E|X| = 2·I(0).
        Ok(OvershootLaw {
            law,
            abs_mean: 2.0 * i0,
            i0,
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        let u = if x < 0.0 {
            self.law.cdf(x)
        } else {
            1.0 - self.law.cdf(x)
        };
        u / self.abs_mean
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        let i = self.law.integral_cdf(x)?;
        Ok(if x < 0.0 {
            i / self.abs_mean
        } else {
            (2.0 * self.i0 + x - i) / self.abs_mean
        })
    }

    /// Inverse-CDF sampling by bisection (the CDF is continuous and
    /// strictly increasing on the support).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while self.cdf(lo)? > u {
            lo *= 2.0;
            if lo < -1e9 {
                break;
            }
        }
        while self.cdf(hi)? < u {
            hi *= 2.0;
            if hi > 1e9 {
                break;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid)? < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
