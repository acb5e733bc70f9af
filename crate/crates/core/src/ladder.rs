//! Ladder-height laws of a lattice random walk with finite-support
//! increments, the first-passage (entrance-point) kernels used by the
//! crossing chain, and Wiener–Hopf consistency checks.
//!
//! The general engine is the truncated absorbing-chain method: absorption
//! masses into each boundary point are obtained by solving the banded
//! linear system of first-passage probabilities, with the truncation
//! level doubled until the law is TV-Cauchy. Two augmentations keep the
//! zero-drift case (where truncation error decays only like 1/L) usable:
//! a closed form via the Wiener–Hopf factorization for zero-mean walks
//! that are skip-free toward the non-absorbed side, evaluated exactly on
//! the rational backend, and Richardson extrapolation of the doubling
//! sequence otherwise.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::{FinitePmf, Span};
use crate::num::{Backend, Num};
use crate::solver::absorb_below;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Weak,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbsorbSide {
    Negatives,
    Nonnegatives,
}

/// A computed (possibly defective) first ladder-height or entrance law,
/// with its certification record.
#[derive(Clone, Debug)]
pub struct LadderLaw {
    pub pmf: FinitePmf,
    pub backend: Backend,
    /// Estimated sup-norm error on the masses. 0 for exact paths.
    pub accuracy: f64,
    /// Rigorous one-sided bound on unresolved mass (unabsorbed mass at
    /// the final truncation level; equals the defect for exact paths).
    pub defect_bound: f64,
    /// True when `accuracy` met the requested tolerance.
    pub certified: bool,
    /// Final truncation level (number of transient states); 0 for
    /// closed-form paths.
    pub truncation_level: i64,
    /// (transient states, solved escape mass) per doubling level, for
    /// monotonicity checks. Empty for closed-form paths.
    pub level_escapes: Vec<(i64, f64)>,
}

impl LadderLaw {
    fn exact(pmf: FinitePmf) -> Self {
        let backend = pmf.backend();
        let defect = pmf.defect().to_f64();
        LadderLaw {
            pmf,
            backend,
            accuracy: 0.0,
            defect_bound: defect,
            certified: true,
            truncation_level: 0,
            level_escapes: Vec::new(),
        }
    }
}

/// Hard cap on transient states per solve; doubling stops here.
const MAX_STATES: i64 = 1 << 14;
const BASE_STATES: i64 = 64;

/// Law of the first ladder height S_γ of the walk with increment law `x`,
/// for the chosen boundary convention (weak allows equality).
pub fn ladder_law(x: &FinitePmf, direction: Direction, kind: Kind, tol: f64) -> Result<LadderLaw> {
    if tol <= 0.0 {
        return Err(Error::InvalidSpec("tol must be positive".into()));
    }
    check_nondegenerate(x)?;
    match direction {
        Direction::Descending => descending_law(x, kind, tol),
        Direction::Ascending => {
            let mut law = descending_law(&x.mirror(), kind, tol)?;
            law.pmf = law.pmf.mirror();
            Ok(law)
        }
    }
}

fn check_nondegenerate(x: &FinitePmf) -> Result<()> {
    if x.atoms().is_empty() || (x.atoms().len() == 1 && x.support_min() == Some(0)) {
        return Err(Error::DegenerateLaw("increment law degenerate at 0".into()));
    }
    Ok(())
}

fn floor_for(kind: Kind) -> i64 {
    // Weak descending absorbs at ≤ 0 (transient states are > 0);
    // strict descending absorbs at < 0 (transient states are ≥ 0).
    match kind {
        Kind::Weak => 1,
        Kind::Strict => 0,
    }
}

fn descending_law(x: &FinitePmf, kind: Kind, tol: f64) -> Result<LadderLaw> {
    if let Some(pmf) = descending_closed_form(x, kind) {
        return Ok(LadderLaw::exact(pmf));
    }
    let start = 0;
    truncated_first_passage(x, floor_for(kind), start, tol)
}

/// Closed forms: one-sided increment laws, and the Wiener–Hopf formulas
/// for zero-mean upward-skip-free walks (strict ascending height δ₁, so
/// law(X) = δ₁ + D − δ₁*D solves to P(D ≤ k) = P(X ≤ k), exactly).
fn descending_closed_form(x: &FinitePmf, kind: Kind) -> Option<FinitePmf> {
    let span = x.span().clone();
    let smin = x.support_min()?;
    let smax = x.support_max()?;

    if smax <= 0 {
        // Monotone non-increasing path: the first step decides.
        return Some(match kind {
            Kind::Weak => x.clone(),
            Kind::Strict => {
                // Geometric over the atoms at 0.
                let p0 = x.mass(0);
                let scale = (Num::one() - p0).recip();
                let atoms = x
                    .atoms()
                    .iter()
                    .filter(|(k, _)| **k < 0)
                    .map(|(k, m)| (*k, m.clone() * scale.clone()))
                    .collect();
                FinitePmf::from_atoms(span, atoms).ok()?
            }
        });
    }
    if smin >= 0 {
        // Non-decreasing path: never goes below its start.
        return Some(match kind {
            Kind::Weak => {
                let p0 = x.mass(0);
                FinitePmf::from_atoms_defective(span, vec![(0, p0.clone())], Num::one() - p0)
                    .ok()?
            }
            Kind::Strict => FinitePmf::totally_defective(span),
        });
    }
    if smin == -1 && x.backend() == Backend::Exact && x.mean_index().is_zero() {
        // Zero-mean downward-skip-free: the walk can only cross a level
        // from above by landing exactly one below it, and at zero mean
        // every level below is reached. Weak: the first step decides
        // between the sole negative atom and (eventually) an exact hit
        // of 0.
        let p_neg = x.mass(-1);
        return Some(match kind {
            Kind::Weak => FinitePmf::from_atoms(
                span,
                vec![(-1, p_neg.clone()), (0, Num::one() - p_neg)],
            )
            .ok()?,
            Kind::Strict => FinitePmf::delta(span, -1),
        });
    }
    if smax == 1 && x.backend() == Backend::Exact && x.mean_index().is_zero() {
        // Zero-mean upward-skip-free: exact Wiener–Hopf factorization.
        return Some(match kind {
            Kind::Weak => {
                let atoms = (smin..=0).map(|k| (k, x.prob_le(k))).collect();
                FinitePmf::from_atoms(span, atoms).ok()?
            }
            Kind::Strict => {
                let p1 = x.mass(1);
                let atoms = (smin..=-1)
                    .map(|k| (k, x.prob_le(k) / p1.clone()))
                    .collect();
                FinitePmf::from_atoms(span, atoms).ok()?
            }
        });
    }
    None
}

/// The strict descending ladder law when it is exactly computable (used
/// by the exact entrance-kernel path).
pub(crate) fn exact_strict_descending(x: &FinitePmf) -> Option<FinitePmf> {
    if check_nondegenerate(x).is_err() {
        return None;
    }
    descending_closed_form(x, Kind::Strict)
}

// ---------------------------------------------------------------------------
// Truncated solve with level doubling and Richardson extrapolation
// ---------------------------------------------------------------------------

/// Law of the walk's position at the first time k ≥ 1 with S_k < floor,
/// started from `start`, by the truncated absorbing-chain method.
fn truncated_first_passage(x: &FinitePmf, floor: i64, start: i64, tol: f64) -> Result<LadderLaw> {
    let span = x.span().clone();
    let step: Vec<(i64, f64)> = x
        .atoms()
        .iter()
        .map(|(k, m)| (*k, m.to_f64()))
        .collect();
    let input_defect = x.defect().to_f64();
    let min_jump = step.iter().map(|(k, _)| *k).min().unwrap();
    let max_jump = step.iter().map(|(k, _)| *k).max().unwrap();
    let width = (max_jump - min_jump).max(1);

    let mut levels: Vec<(i64, BTreeMap<i64, f64>, f64)> = Vec::new(); // (n, law, escape)
    let mut n = BASE_STATES.max(8 * width).max(start - floor + 8);
    let mut geometric_done = false;
    while n <= MAX_STATES {
        let ceil = floor + n - 1;
        let sol = absorb_below(&step, floor, ceil)?;
        // Assemble the law from `start` (one explicit step if the start
        // is outside the transient range).
        let mut law: BTreeMap<i64, f64> = BTreeMap::new();
        let mut escape = input_defect;
        if start >= floor {
            for (j, v) in sol.law(start) {
                law.insert(*j, *v);
            }
            escape += sol.escape_from(start) * (1.0 - input_defect);
        } else {
            for (k, p) in &step {
                let dest = start + k;
                if dest < floor {
                    *law.entry(dest).or_insert(0.0) += p;
                } else if dest <= ceil {
                    for (j, v) in sol.law(dest) {
                        *law.entry(*j).or_insert(0.0) += p * v;
                    }
                    escape += p * sol.escape_from(dest);
                } else {
                    escape += p;
                }
            }
        }
        levels.push((n, law, escape));
        if levels.len() >= 2 {
            let (prev, cur) = (&levels[levels.len() - 2], &levels[levels.len() - 1]);
            let delta = law_sup_diff(&prev.1, &cur.1).max((prev.2 - cur.2).abs());
            if delta < tol && cur.2 < tol {
                // Proper regime, truncation error ≤ solved escape.
                geometric_done = true;
                break;
            }
            if delta < tol * 1e-2 {
                // Converged law with a genuine defect (drift away from
                // the boundary): the escape is the certified defect bound.
                geometric_done = true;
                break;
            }
        }
        n *= 2;
    }

    let (final_n, final_law, final_escape) = levels.last().unwrap().clone();
    let level_escapes: Vec<(i64, f64)> = levels.iter().map(|(n, _, e)| (*n, *e)).collect();

    if geometric_done {
        let delta = if levels.len() >= 2 {
            law_sup_diff(&levels[levels.len() - 2].1, &final_law)
        } else {
            0.0
        };
        let accuracy = delta.max(if final_escape < tol { final_escape } else { delta });
        let pmf = pmf_from_f64(span, &final_law)?;
        return Ok(LadderLaw {
            pmf,
            backend: Backend::Float,
            accuracy,
            defect_bound: final_escape,
            certified: accuracy <= tol.max(1e-15),
            truncation_level: final_n,
            level_escapes,
        });
    }

    // Sublinear (zero-drift) regime: Richardson-extrapolate the doubling
    // sequence, whose truncation error has a 1/L expansion.
    let keys: Vec<i64> = levels
        .iter()
        .flat_map(|(_, law, _)| law.keys().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let use_from = levels.len().saturating_sub(8);
    let mut extrapolated: BTreeMap<i64, f64> = BTreeMap::new();
    let mut accuracy = 0.0f64;
    for &j in &keys {
        let seq: Vec<f64> = levels[use_from..]
            .iter()
            .map(|(_, law, _)| law.get(&j).copied().unwrap_or(0.0))
            .collect();
        let (v, err) = richardson(&seq);
        extrapolated.insert(j, v.max(0.0));
        accuracy = accuracy.max(err);
    }
    let esc_seq: Vec<f64> = levels[use_from..].iter().map(|(_, _, e)| *e).collect();
    let (esc_ext, esc_err) = richardson(&esc_seq);
    accuracy = accuracy.max(esc_err).max(esc_ext.abs().min(final_escape));

    // Extrapolation can overshoot the simplex slightly; project back and
    // charge the projection to the reported accuracy.
    let total: f64 = extrapolated.values().sum();
    if total > 1.0 {
        for v in extrapolated.values_mut() {
            *v /= total;
        }
        accuracy = accuracy.max(total - 1.0);
    }

    let pmf = pmf_from_f64(span, &extrapolated)?;
    Ok(LadderLaw {
        pmf,
        backend: Backend::Float,
        accuracy,
        defect_bound: final_escape,
        certified: accuracy <= tol,
        truncation_level: final_n,
        level_escapes,
    })
}

/// Richardson extrapolation for a sequence v_i = v + Σ_k c_k (h/2^i)^k.
/// Returns the extrapolated value and a consistency-based error estimate.
fn richardson(seq: &[f64]) -> (f64, f64) {
    let n = seq.len();
    if n == 1 {
        return (seq[0], f64::INFINITY);
    }
    let mut table: Vec<Vec<f64>> = vec![seq.to_vec()];
    for k in 1..n {
        let prev = &table[k - 1];
        let factor = (1u64 << k) as f64;
        let row: Vec<f64> = (1..prev.len())
            .map(|i| prev[i] + (prev[i] - prev[i - 1]) / (factor - 1.0))
            .collect();
        table.push(row);
    }
    let diag = table[n - 1][0];
    let sub = table[n - 2][if table[n - 2].len() > 1 { 1 } else { 0 }];
    (diag, (diag - sub).abs().max(1e-15))
}

fn law_sup_diff(a: &BTreeMap<i64, f64>, b: &BTreeMap<i64, f64>) -> f64 {
    let mut keys: Vec<i64> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    keys.iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn pmf_from_f64(span: Span, law: &BTreeMap<i64, f64>) -> Result<FinitePmf> {
    let atoms: Vec<(i64, Num)> = law
        .iter()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (*k, Num::F64(*v)))
        .collect();
    let placed: f64 = atoms.iter().map(|(_, v)| v.to_f64()).sum();
    FinitePmf::from_atoms_defective(span, atoms, Num::F64((1.0 - placed).max(0.0)))
}

// ---------------------------------------------------------------------------
// Entrance kernels
// ---------------------------------------------------------------------------

/// Law of the walk's position when it first enters the absorbing side,
/// started from y on the other side. For y = 0 and absorb = negatives
/// this is the strict-descending first-passage point.
pub fn entrance_kernel(
    x: &FinitePmf,
    y: i64,
    absorb: AbsorbSide,
    tol: f64,
) -> Result<LadderLaw> {
    check_nondegenerate(x)?;
    match absorb {
        AbsorbSide::Negatives => {
            if y < 0 {
                return Err(Error::InvalidSpec(format!(
                    "start {y} must be on the non-absorbed side (≥ 0)"
                )));
            }
            entrance_below(x, y, 0, tol)
        }
        AbsorbSide::Nonnegatives => {
            if y >= 0 {
                return Err(Error::InvalidSpec(format!(
                    "start {y} must be on the non-absorbed side (< 0)"
                )));
            }
            // Mirror: entering [0, ∞) from below is entering (−∞, 0]
            // from above for the mirrored walk.
            let mut law = entrance_below(&x.mirror(), -y, 1, tol)?;
            law.pmf = law.pmf.mirror();
            Ok(law)
        }
    }
}

/// First entry into {j < floor} from a start on the transient side.
/// Exact path: the entry happens at a strict descending ladder epoch, so
/// the entrance law is a finite renewal sum over the strict descending
/// ladder law G: E_y(j) = Σ_{y′=floor}^{y} R(y−y′) G(j−y′), with R the
/// renewal sequence of the decrements of G.
fn entrance_below(x: &FinitePmf, y: i64, floor: i64, tol: f64) -> Result<LadderLaw> {
    if let Some(g) = exact_strict_descending(x) {
        let span = x.span().clone();
        let renewal = renewal_sequence(&g, (y - floor).max(0));
        let mut atoms: BTreeMap<i64, Num> = BTreeMap::new();
        for yp in floor..=y.max(floor - 1) {
            let r = renewal[(y - yp) as usize].clone();
            for (gk, gm) in g.atoms() {
                let j = yp + gk;
                if j < floor {
                    let entry = atoms.entry(j).or_insert_with(Num::zero);
                    *entry = entry.clone() + r.clone() * gm.clone();
                }
            }
        }
        // Start below the transient floor (weak conventions): one
        // explicit step first.
        if y < floor {
            return Err(Error::InvalidSpec("start below transient floor".into()));
        }
        let placed: Num = atoms.values().cloned().sum();
        let pmf = FinitePmf::from_atoms_defective(
            span,
            atoms.into_iter().collect(),
            Num::one() - placed,
        )?;
        return Ok(LadderLaw::exact(pmf));
    }
    truncated_first_passage(x, floor, y, tol)
}

/// R(0..=n) for the renewal process of the decrements −G of a strict
/// descending ladder law G.
fn renewal_sequence(g: &FinitePmf, n: i64) -> Vec<Num> {
    let mut r = vec![Num::zero(); (n + 1) as usize];
    r[0] = Num::one();
    for i in 1..=n {
        let mut acc = Num::zero();
        for (k, m) in g.atoms() {
            let d = -k; // decrement ≥ 1
            if d <= i {
                acc = acc + r[(i - d) as usize].clone() * m.clone();
            }
        }
        r[i as usize] = acc;
    }
    r
}

// ---------------------------------------------------------------------------
// Wiener–Hopf residual
// ---------------------------------------------------------------------------

/// Sup-norm residual of the factorization identity
/// law(X) = law(A_s) + law(D) − law(A_s) * law(D)
/// pairing the strict ascending with the weak descending law.
pub fn wiener_hopf_residual(x: &FinitePmf, a_strict: &FinitePmf, d: &FinitePmf) -> Result<f64> {
    let cross = a_strict.convolve(d)?;
    let mut keys: std::collections::BTreeSet<i64> = std::collections::BTreeSet::new();
    keys.extend(x.atoms().keys());
    keys.extend(a_strict.atoms().keys());
    keys.extend(d.atoms().keys());
    keys.extend(cross.atoms().keys());
    let mut sup = 0.0f64;
    for k in keys {
        let rhs = a_strict.mass(k) + d.mass(k) - cross.mass(k);
        sup = sup.max((x.mass(k) - rhs).abs().to_f64());
    }
    Ok(sup)
}

// ---------------------------------------------------------------------------
// LadderSystem
// ---------------------------------------------------------------------------

/// The six ladder laws of a switching pair (X₁, X₁′) and the derived
/// constants of the invariant-measure formulas.
#[derive(Clone, Debug)]
pub struct LadderSystem {
    /// Weak descending ladder height of S (proper under oscillation).
    pub d: LadderLaw,
    /// Weak ascending ladder height of S (may be improper).
    pub a: LadderLaw,
    /// Weak ascending ladder height of S′ (proper under oscillation).
    pub a_prime: LadderLaw,
    /// Weak descending ladder height of S′ (may be improper).
    pub d_prime: LadderLaw,
    /// Strict ascending ladder height of S (renewal generator of U₊).
    pub a_strict: LadderLaw,
    /// Strict descending ladder height of S′ (renewal generator of U₋′).
    pub d_strict_prime: LadderLaw,
    /// p = P(D < 0).
    pub p: Num,
    /// p′ = P(A′ > 0).
    pub p_prime: Num,
    /// a = pα / (pα + p′(1−α)).
    pub a_const: Num,
    /// q = P(M = 0) = defect of A_s (meaningful for negative drift).
    pub q: Num,
    /// q′ = defect of D_s′.
    pub q_prime: Num,
    pub tol_achieved: f64,
    pub truncation_level_used: i64,
}

impl LadderSystem {
    pub fn compute(x1: &FinitePmf, x1p: &FinitePmf, alpha: &Num, tol: f64) -> Result<Self> {
        let d = ladder_law(x1, Direction::Descending, Kind::Weak, tol)?;
        let a = ladder_law(x1, Direction::Ascending, Kind::Weak, tol)?;
        let a_strict = ladder_law(x1, Direction::Ascending, Kind::Strict, tol)?;
        let a_prime = ladder_law(x1p, Direction::Ascending, Kind::Weak, tol)?;
        let d_prime = ladder_law(x1p, Direction::Descending, Kind::Weak, tol)?;
        let d_strict_prime = ladder_law(x1p, Direction::Descending, Kind::Strict, tol)?;

        let p = d.pmf.prob_lt(0);
        let p_prime = a_prime.pmf.prob_gt(0);
        let denom = p.clone() * alpha.clone()
            + p_prime.clone() * (Num::one() - alpha.clone());
        if denom.to_f64() <= 0.0 {
            return Err(Error::OscillationViolated(
                "pα + p′(1−α) = 0: the a-constant of the invariant density is undefined".into(),
            ));
        }
        let a_const = p.clone() * alpha.clone() / denom;
        let q = a_strict.pmf.defect().clone();
        let q_prime = d_strict_prime.pmf.defect().clone();
        let laws = [&d, &a, &a_prime, &d_prime, &a_strict, &d_strict_prime];
        let tol_achieved = laws.iter().map(|l| l.accuracy).fold(0.0, f64::max);
        let truncation_level_used = laws.iter().map(|l| l.truncation_level).max().unwrap();
        Ok(LadderSystem {
            d,
            a,
            a_prime,
            d_prime,
            a_strict,
            d_strict_prime,
            p,
            p_prime,
            a_const,
            q,
            q_prime,
            tol_achieved,
            truncation_level_used,
        })
    }

    pub fn backend(&self) -> Backend {
        use crate::num::join;
        [
            &self.d,
            &self.a,
            &self.a_prime,
            &self.d_prime,
            &self.a_strict,
            &self.d_strict_prime,
        ]
        .iter()
        .fold(Backend::Exact, |b, l| join(b, l.backend))
    }

    pub fn wiener_hopf_residual_x1(&self, x1: &FinitePmf) -> Result<f64> {
        wiener_hopf_residual(x1, &self.a_strict.pmf, &self.d.pmf)
    }
}
