//! Renewal measures U = Σₙ G*ⁿ of one-sided (possibly defective) strict
//! ladder laws, the renewal-equation deconvolution that inverts the
//! lifting map, and supremum laws qU₊ of negative-drift walks.

use crate::error::{Error, Result};
use crate::measures::{FinitePmf, Tail, WindowDensity};
use crate::num::Num;

/// A renewal measure materialized on a one-sided window, as a density
/// with respect to the Haar measure λ (so the δ₀ atom has value 1/h).
#[derive(Clone, Debug)]
pub struct RenewalMeasure {
    pub base: WindowDensity,
    pub generator: FinitePmf,
    /// 1/(1−‖G‖) for a defective generator; None when ‖G‖ = 1 (infinite
    /// total mass).
    pub total_mass: Option<Num>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Positive,
    Negative,
}

fn generator_side(g: &FinitePmf) -> Result<Option<Side>> {
    let (smin, smax) = match (g.support_min(), g.support_max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(None), // totally defective
    };
    if smin <= 0 && smax >= 0 {
        return Err(Error::InvalidSpec(
            "renewal generator must be supported strictly on one side of 0".into(),
        ));
    }
    Ok(Some(if smin > 0 { Side::Positive } else { Side::Negative }))
}

/// Renewal masses u(0..=w) of a generator with strictly positive support,
/// by the one-sided recursion u(x) = δ₀(x) + Σ_k u(x−k)G(k). Exact on the
/// rational backend: the generator points away from 0, so no truncation
/// enters.
pub(crate) fn renewal_masses(g: &FinitePmf, w: i64) -> Vec<Num> {
    let mut u = vec![Num::zero(); (w + 1) as usize];
    u[0] = Num::one();
    for x in 1..=w {
        let mut acc = Num::zero();
        for (k, m) in g.atoms() {
            if *k >= 1 && *k <= x {
                acc = acc + u[(x - k) as usize].clone() * m.clone();
            }
        }
        u[x as usize] = acc;
    }
    u
}

/// U = Σₙ G*ⁿ on the window [0, W] (or [−W, 0] for a negative-side
/// generator). The totally defective generator yields δ₀.
pub fn renewal_measure(g: &FinitePmf, w: i64) -> Result<RenewalMeasure> {
    if w < 0 {
        return Err(Error::InvalidSpec("window extent must be ≥ 0".into()));
    }
    let side = generator_side(g)?;
    let span = g.span().clone();
    let h = Num::Rat(span.clone());
    let masses = match side {
        None => {
            let mut u = vec![Num::zero(); (w + 1) as usize];
            u[0] = Num::one();
            u
        }
        Some(Side::Positive) => renewal_masses(g, w),
        Some(Side::Negative) => renewal_masses(&g.mirror(), w),
    };
    let values: Vec<Num> = masses.into_iter().map(|m| m / h.clone()).collect();
    let base = match side {
        Some(Side::Negative) => WindowDensity::new(
            span,
            -w,
            0,
            values.into_iter().rev().collect(),
            Tail::Unknown,
            Tail::Zero,
        )?,
        _ => WindowDensity::new(span, 0, w, values, Tail::Zero, Tail::Unknown)?,
    };
    let gmass = g.total_mass();
    let total_mass = if g.defect().to_f64() > 0.0 {
        Some((Num::one() - gmass).recip())
    } else {
        None
    };
    Ok(RenewalMeasure {
        base,
        generator: g.clone(),
        total_mass,
    })
}

/// Signed deconvolution result: φ = ψ − ψ*G, the inverse of φ ↦ U*φ on
/// the valid interior. Negative values are the designed signal that ψ
/// was not of lifted form; they are reported, never clamped.
#[derive(Clone, Debug)]
pub struct Deconvolution {
    pub phi: WindowDensity,
    /// Most negative interior value (0 when none).
    pub negative_min: f64,
    /// True when the result dips below −1e−9 on its interior.
    pub signed: bool,
}

pub fn renewal_deconvolve(psi: &WindowDensity, g: &FinitePmf) -> Result<Deconvolution> {
    generator_side(g)?;
    let conv = psi.convolve(g)?;
    let phi = psi.sub(&conv)?;
    if phi.interior_is_empty() {
        return Err(Error::EmptyInterior(
            "window too small for any valid deconvolved value".into(),
        ));
    }
    let (ilo, ihi) = phi.interior();
    let mut neg = 0.0f64;
    for k in ilo..=ihi {
        let v = phi.density_at(k).map(|v| v.to_f64()).unwrap_or(0.0);
        neg = neg.min(v);
    }
    Ok(Deconvolution {
        phi,
        negative_min: neg,
        signed: neg < -1e-9,
    })
}

/// Law of the all-time supremum M = sup_n S_n of a negative-drift walk:
/// qU₊ with q = 1 − ‖A_s‖. Refuses a proper (zero-drift) A_s, whose
/// supremum is infinite.
pub fn supremum_law(a_s: &FinitePmf, w: i64) -> Result<FinitePmf> {
    let q = Num::one() - a_s.total_mass();
    if q.to_f64() <= 1e-9 {
        return Err(Error::Unsupported(
            "supremum law requires a strictly defective ascending ladder law \
             (negative drift); the supremum of a zero-drift walk is infinite"
                .into(),
        ));
    }
    match generator_side(a_s)? {
        None => return Ok(FinitePmf::delta(a_s.span().clone(), 0)),
        Some(Side::Positive) => {}
        Some(Side::Negative) => {
            return Err(Error::InvalidSpec(
                "ascending ladder law must have positive support".into(),
            ))
        }
    }
    let u = renewal_masses(a_s, w);
    let atoms: Vec<(i64, Num)> = u
        .into_iter()
        .enumerate()
        .map(|(n, m)| (n as i64, q.clone() * m))
        .filter(|(_, m)| m.to_f64() > 0.0)
        .collect();
    let placed: Num = atoms.iter().map(|(_, m)| m.clone()).sum();
    // The remaining mass beyond the window decays geometrically; it is
    // reported honestly as the defect.
    FinitePmf::from_atoms_defective(a_s.span().clone(), atoms, Num::one() - placed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::span_one;

    #[test]
    fn totally_defective_generator_gives_delta() {
        let g = FinitePmf::totally_defective(span_one());
        let u = renewal_measure(&g, 5).unwrap();
        assert_eq!(u.base.density_at(0).unwrap(), Num::one());
        for k in 1..=5 {
            assert_eq!(u.base.density_at(k).unwrap(), Num::zero());
        }
        assert_eq!(u.total_mass, Some(Num::one()));
    }

    #[test]
    fn deterministic_generator_counting_measure() {
        let g = FinitePmf::delta(span_one(), 1);
        let u = renewal_measure(&g, 10).unwrap();
        for k in 0..=10 {
            assert_eq!(u.base.density_at(k).unwrap(), Num::one());
        }
        assert_eq!(u.base.density_at(-1).unwrap(), Num::zero());
        assert_eq!(u.total_mass, None);
    }

    #[test]
    fn geometric_generator() {
        // G = ½δ₁ (defect ½): u(n) = 2⁻ⁿ, total mass 2.
        let g = FinitePmf::from_atoms_defective(
            span_one(),
            vec![(1, Num::ratio(1, 2))],
            Num::ratio(1, 2),
        )
        .unwrap();
        let u = renewal_measure(&g, 8).unwrap();
        for k in 0..=8 {
            assert_eq!(u.base.density_at(k).unwrap(), Num::ratio(1, 1 << k));
        }
        assert_eq!(u.total_mass, Some(Num::ratio(2, 1)));
    }

    #[test]
    fn negative_side_generator() {
        let g = FinitePmf::delta(span_one(), -1);
        let u = renewal_measure(&g, 6).unwrap();
        for k in -6..=0 {
            assert_eq!(u.base.density_at(k).unwrap(), Num::one());
        }
        assert_eq!(u.base.density_at(1).unwrap(), Num::zero());
    }

    #[test]
    fn two_sided_generator_rejected() {
        let g = FinitePmf::from_atoms(
            span_one(),
            vec![(-1, Num::ratio(1, 2)), (1, Num::ratio(1, 2))],
        )
        .unwrap();
        assert!(renewal_measure(&g, 4).is_err());
        let g0 = FinitePmf::from_atoms(
            span_one(),
            vec![(0, Num::ratio(1, 2)), (1, Num::ratio(1, 2))],
        )
        .unwrap();
        assert!(renewal_measure(&g0, 4).is_err());
    }

    #[test]
    fn renewal_fixed_point() {
        // U = δ₀ + U*G, checked by one convolution on the interior.
        let g = FinitePmf::from_atoms_defective(
            span_one(),
            vec![(1, Num::ratio(1, 3)), (2, Num::ratio(1, 3))],
            Num::ratio(1, 3),
        )
        .unwrap();
        let u = renewal_measure(&g, 30).unwrap();
        let ug = u.base.convolve(&g).unwrap();
        let (ilo, ihi) = ug.interior();
        assert!(ihi >= 20);
        // Below the convolution window the value 0 is carried by the
        // Zero tail, so the identity is checkable from 0 upward.
        for k in ilo.min(0)..=ihi {
            let expect = if k == 0 {
                ug.density_at(0).unwrap() + Num::one()
            } else {
                ug.density_at(k).unwrap()
            };
            assert_eq!(u.base.density_at(k).unwrap(), expect, "at {k}");
        }
        // ‖U‖ = 1/(1−2/3) = 3.
        assert_eq!(u.total_mass, Some(Num::ratio(3, 1)));
    }

    #[test]
    fn deconvolve_inverts_counting_measure() {
        // ψ = counting measure on [0, W], G = δ₁ → δ₀ on the interior.
        let g = FinitePmf::delta(span_one(), 1);
        let psi = renewal_measure(&g, 12).unwrap().base;
        let d = renewal_deconvolve(&psi, &g).unwrap();
        assert!(!d.signed);
        let (ilo, ihi) = d.phi.interior();
        for k in ilo..=ihi {
            let expect = if k == 0 { Num::one() } else { Num::zero() };
            assert_eq!(d.phi.density_at(k).unwrap(), expect, "at {k}");
        }
    }

    #[test]
    fn deconvolve_flags_signed_output() {
        // ψ = δ₀ is not of lifted form for G = δ₁: φ = δ₀ − δ₁ is signed.
        let psi = WindowDensity::new(
            span_one(),
            -4,
            4,
            (-4..=4)
                .map(|k| if k == 0 { Num::one() } else { Num::zero() })
                .collect(),
            Tail::Zero,
            Tail::Zero,
        )
        .unwrap();
        let g = FinitePmf::delta(span_one(), 1);
        let d = renewal_deconvolve(&psi, &g).unwrap();
        assert!(d.signed);
        assert_eq!(d.phi.density_at(1).unwrap(), Num::ratio(-1, 1));
    }

    #[test]
    fn deconvolve_round_trip() {
        // φ a finite measure on [0, 3]; ψ = U*φ; deconvolution recovers φ.
        let g = FinitePmf::from_atoms_defective(
            span_one(),
            vec![(1, Num::ratio(1, 2)), (3, Num::ratio(1, 4))],
            Num::ratio(1, 4),
        )
        .unwrap();
        let u = renewal_measure(&g, 40).unwrap();
        let phi = crate::measures::LatticeMeasure::new(
            span_one(),
            vec![
                (0, Num::ratio(2, 5)),
                (1, Num::ratio(1, 5)),
                (3, Num::ratio(7, 5)),
            ],
        );
        let psi = u.base.convolve_measure(&phi).unwrap();
        let d = renewal_deconvolve(&psi, &g).unwrap();
        assert!(!d.signed);
        let (ilo, ihi) = d.phi.interior();
        assert!(ilo <= 0 && ihi >= 3, "interior [{ilo}, {ihi}]");
        for k in ilo..=ihi.min(10) {
            assert_eq!(d.phi.density_at(k).unwrap(), phi.mass(k), "at {k}");
        }
    }

    #[test]
    fn supremum_law_geometric() {
        let a_s = FinitePmf::from_atoms_defective(
            span_one(),
            vec![(1, Num::ratio(1, 2))],
            Num::ratio(1, 2),
        )
        .unwrap();
        let m = supremum_law(&a_s, 20).unwrap();
        for k in 0..=20 {
            assert_eq!(m.mass(k), Num::ratio(1, 2i64.pow(k as u32 + 1)));
        }
        // Totally defective → M ≡ 0.
        let none = FinitePmf::totally_defective(span_one());
        assert_eq!(supremum_law(&none, 5).unwrap(), FinitePmf::delta(span_one(), 0));
        // Proper A_s refused.
        let proper = FinitePmf::delta(span_one(), 1);
        assert!(supremum_law(&proper, 5).is_err());
    }
}
