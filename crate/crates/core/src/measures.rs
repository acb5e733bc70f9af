//! Exact arithmetic of finitely supported and windowed measures on a
//! lattice h·Z: construction, convolution, sign restriction, norms and
//! comparisons.
//!
//! Conventions. The Haar measure λ on h·Z gives each lattice atom mass h,
//! so a density f w.r.t. λ places mass f(x)·h at x. [`FinitePmf`] stores
//! atom *masses*; [`WindowDensity`] stores *densities*, which makes the
//! density convolution formula (φ * law(Z))(x) = Σ_z f(x−z)·P(Z=z)
//! transcribe directly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::num::{join, Backend, Num};

pub type Span = BigRational;

pub fn span_one() -> Span {
    BigRational::from_integer(BigInt::from(1))
}

pub fn span_from(num: i64, den: i64) -> Span {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn check_spans(a: &Span, b: &Span) -> Result<()> {
    if a != b {
        return Err(Error::SpanMismatch(a.to_string(), b.to_string()));
    }
    Ok(())
}

/// Tolerance on the "masses sum to one" invariant of a [`FinitePmf`].
pub const MASS_SUM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// FinitePmf
// ---------------------------------------------------------------------------

/// A finitely supported, possibly defective probability mass function on
/// the lattice h·Z. Keys are lattice indices k, representing the value k·h.
/// `defect` is the mass not placed (the probability that the defining
/// stopping time is infinite, for improper ladder laws).
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePmf {
    span: Span,
    atoms: BTreeMap<i64, Num>,
    defect: Num,
}

impl FinitePmf {
    /// Proper law from a list of (index, mass) atoms. Masses must be
    /// non-negative and sum to 1 within [`MASS_SUM_TOL`].
    pub fn from_atoms(span: Span, atoms: Vec<(i64, Num)>) -> Result<Self> {
        Self::from_atoms_defective(span, atoms, Num::zero())
    }

    pub fn from_atoms_defective(span: Span, atoms: Vec<(i64, Num)>, defect: Num) -> Result<Self> {
        let mut map: BTreeMap<i64, Num> = BTreeMap::new();
        for (k, m) in atoms {
            if m.to_f64() < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative mass {m} at {k}")));
            }
            if m.is_zero() {
                continue;
            }
            let entry = map.entry(k).or_insert_with(Num::zero);
            *entry = entry.clone() + m;
        }
        if defect.to_f64() < -MASS_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("negative defect {defect}")));
        }
        let total: Num = map.values().cloned().sum::<Num>() + defect.clone();
        if (total.to_f64() - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "masses + defect sum to {} (expected 1)",
                total.to_f64()
            )));
        }
        Ok(FinitePmf {
            span,
            atoms: map,
            defect,
        })
    }

    pub fn delta(span: Span, k: i64) -> Self {
        FinitePmf {
            span,
            atoms: BTreeMap::from([(k, Num::one())]),
            defect: Num::zero(),
        }
    }

    /// Uniform law on an inclusive index range.
    pub fn uniform(span: Span, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi);
        let n = hi - lo + 1;
        let m = Num::ratio(1, n);
        FinitePmf {
            span,
            atoms: (lo..=hi).map(|k| (k, m.clone())).collect(),
            defect: Num::zero(),
        }
    }

    /// The law with no mass placed at all (e.g. a ladder height whose
    /// stopping time is a.s. infinite).
    pub fn totally_defective(span: Span) -> Self {
        FinitePmf {
            span,
            atoms: BTreeMap::new(),
            defect: Num::one(),
        }
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    pub fn atoms(&self) -> &BTreeMap<i64, Num> {
        &self.atoms
    }

    pub fn mass(&self, k: i64) -> Num {
        self.atoms.get(&k).cloned().unwrap_or_else(Num::zero)
    }

    pub fn defect(&self) -> &Num {
        &self.defect
    }

    pub fn total_mass(&self) -> Num {
        self.atoms.values().cloned().sum()
    }

    pub fn is_proper(&self, tol: f64) -> bool {
        self.defect.to_f64().abs() <= tol
    }

    pub fn support_min(&self) -> Option<i64> {
        self.atoms.keys().next().copied()
    }

    pub fn support_max(&self) -> Option<i64> {
        self.atoms.keys().next_back().copied()
    }

    /// Mean in lattice index units (multiply by the span for real units).
    pub fn mean_index(&self) -> Num {
        self.atoms
            .iter()
            .map(|(k, m)| Num::from_int(*k) * m.clone())
            .sum()
    }

    pub fn backend(&self) -> Backend {
        self.atoms
            .values()
            .chain(std::iter::once(&self.defect))
            .fold(Backend::Exact, |b, v| join(b, v.backend()))
    }

    pub fn to_float(&self) -> FinitePmf {
        FinitePmf {
            span: self.span.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|(k, v)| (*k, v.to_float()))
                .collect(),
            defect: self.defect.to_float(),
        }
    }

    /// Law of −X.
    pub fn mirror(&self) -> FinitePmf {
        FinitePmf {
            span: self.span.clone(),
            atoms: self.atoms.iter().map(|(k, v)| (-k, v.clone())).collect(),
            defect: self.defect.clone(),
        }
    }

    pub fn prob_le(&self, k: i64) -> Num {
        self.atoms
            .range(..=k)
            .map(|(_, m)| m.clone())
            .sum()
    }

    pub fn prob_lt(&self, k: i64) -> Num {
        self.atoms.range(..k).map(|(_, m)| m.clone()).sum()
    }

    pub fn prob_gt(&self, k: i64) -> Num {
        self.atoms
            .range(k + 1..)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Exact convolution of two pmfs (law of the independent sum).
    /// Defects combine as 1 − (1−d_a)(1−d_b).
    pub fn convolve(&self, other: &FinitePmf) -> Result<FinitePmf> {
        check_spans(&self.span, &other.span)?;
        if other.atoms.is_empty() && other.defect.is_zero() {
            return Err(Error::EmptyLaw("convolution with empty law".into()));
        }
        let mut atoms: BTreeMap<i64, Num> = BTreeMap::new();
        for (ka, ma) in &self.atoms {
            for (kb, mb) in &other.atoms {
                let entry = atoms.entry(ka + kb).or_insert_with(Num::zero);
                *entry = entry.clone() + ma.clone() * mb.clone();
            }
        }
        let defect = Num::one()
            - (Num::one() - self.defect.clone()) * (Num::one() - other.defect.clone());
        Ok(FinitePmf {
            span: self.span.clone(),
            atoms,
            defect,
        })
    }

    pub fn to_measure(&self) -> LatticeMeasure {
        LatticeMeasure {
            span: self.span.clone(),
            atoms: self.atoms.clone(),
        }
    }

    /// Reinterpret on a coarser lattice: index k becomes k/d, span becomes
    /// span·d. All support indices must be divisible by d.
    fn reindex(&self, d: i64) -> FinitePmf {
        assert!(d >= 1);
        FinitePmf {
            span: &self.span * BigRational::from_integer(BigInt::from(d)),
            atoms: self
                .atoms
                .iter()
                .map(|(k, v)| {
                    debug_assert_eq!(k % d, 0);
                    (k / d, v.clone())
                })
                .collect(),
            defect: self.defect.clone(),
        }
    }
}

/// Joint span of two laws declared on a common base lattice: the gcd of
/// all support indices, i.e. the maximal d with P(X₁ ∈ d·hZ)·P(X₁′ ∈ d·hZ) = 1.
/// Both laws are re-indexed to the detected span.
pub fn detect_span(x1: &FinitePmf, x1p: &FinitePmf) -> Result<(i64, FinitePmf, FinitePmf)> {
    check_spans(&x1.span, &x1p.span)?;
    let mut d: i64 = 0;
    for k in x1.atoms.keys().chain(x1p.atoms.keys()) {
        d = d.gcd(k);
    }
    if d == 0 {
        return Err(Error::DegenerateLaw(
            "both laws degenerate at 0; no span".into(),
        ));
    }
    Ok((d, x1.reindex(d), x1p.reindex(d)))
}

// ---------------------------------------------------------------------------
// LatticeMeasure: finite non-negative (or signed residual) measures
// ---------------------------------------------------------------------------

/// A finitely supported measure on h·Z with no normalization constraint.
/// Houses ν, π and the random finite measures fed to the lifting map.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMeasure {
    span: Span,
    atoms: BTreeMap<i64, Num>,
}

impl LatticeMeasure {
    pub fn new(span: Span, atoms: Vec<(i64, Num)>) -> Self {
        let mut map: BTreeMap<i64, Num> = BTreeMap::new();
        for (k, m) in atoms {
            if m.is_zero() {
                continue;
            }
            let entry = map.entry(k).or_insert_with(Num::zero);
            *entry = entry.clone() + m;
        }
        LatticeMeasure { span, atoms: map }
    }

    pub fn zero(span: Span) -> Self {
        LatticeMeasure {
            span,
            atoms: BTreeMap::new(),
        }
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    pub fn atoms(&self) -> &BTreeMap<i64, Num> {
        &self.atoms
    }

    pub fn mass(&self, k: i64) -> Num {
        self.atoms.get(&k).cloned().unwrap_or_else(Num::zero)
    }

    pub fn total(&self) -> Num {
        self.atoms.values().cloned().sum()
    }

    pub fn support_min(&self) -> Option<i64> {
        self.atoms.keys().next().copied()
    }

    pub fn support_max(&self) -> Option<i64> {
        self.atoms.keys().next_back().copied()
    }

    pub fn min_mass(&self) -> f64 {
        self.atoms
            .values()
            .map(|m| m.to_f64())
            .fold(0.0, f64::min)
    }

    pub fn scale(&self, c: &Num) -> LatticeMeasure {
        LatticeMeasure {
            span: self.span.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|(k, m)| (*k, m.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn backend(&self) -> Backend {
        self.atoms
            .values()
            .fold(Backend::Exact, |b, v| join(b, v.backend()))
    }

    /// Normalize to total mass 1. Errors on zero total.
    pub fn normalized(&self) -> Result<LatticeMeasure> {
        let t = self.total();
        if t.to_f64() <= 0.0 {
            return Err(Error::InvalidMeasure("normalizing a zero measure".into()));
        }
        Ok(self.scale(&t.recip()))
    }

    /// Sup distance between atom masses over the union of supports.
    pub fn sup_diff(&self, other: &LatticeMeasure) -> f64 {
        let mut keys: Vec<i64> = self.atoms.keys().chain(other.atoms.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|k| (self.mass(*k).to_f64() - other.mass(*k).to_f64()).abs())
            .fold(0.0, f64::max)
    }

    /// Total-variation distance ½Σ|Δ| over the union of supports.
    pub fn tv_diff(&self, other: &LatticeMeasure) -> f64 {
        let mut keys: Vec<i64> = self.atoms.keys().chain(other.atoms.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys
            .iter()
            .map(|k| (self.mass(*k).to_f64() - other.mass(*k).to_f64()).abs())
            .sum::<f64>()
    }

    /// Materialize on a window as a density w.r.t. λ with zero tails.
    /// The window must contain the support.
    pub fn to_window(&self, lo: i64, hi: i64) -> Result<WindowDensity> {
        if let (Some(smin), Some(smax)) = (self.support_min(), self.support_max()) {
            if smin < lo || smax > hi {
                return Err(Error::InvalidMeasure(format!(
                    "support [{smin},{smax}] outside window [{lo},{hi}]"
                )));
            }
        }
        let h = Num::Rat(self.span.clone());
        let values = (lo..=hi)
            .map(|k| self.mass(k) / h.clone())
            .collect();
        Ok(WindowDensity {
            span: self.span.clone(),
            lo,
            hi,
            values,
            interior_lo: lo,
            interior_hi: hi,
            tail_lo: Tail::Zero,
            tail_hi: Tail::Zero,
        })
    }
}

// ---------------------------------------------------------------------------
// Sign restriction φ ↦ φ_α^±
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// The maps φ ↦ φ_α^+ (keep x>0, scale x=0 by α) and φ ↦ φ_α^−
/// (keep x<0, scale x=0 by 1−α).
#[derive(Clone, Debug)]
pub struct SignRestriction {
    pub alpha: Num,
    pub sign: Sign,
}

impl SignRestriction {
    pub fn new(alpha: Num, sign: Sign) -> Self {
        SignRestriction { alpha, sign }
    }

    fn weight_at_zero(&self) -> Num {
        match self.sign {
            Sign::Plus => self.alpha.clone(),
            Sign::Minus => Num::one() - self.alpha.clone(),
        }
    }

    fn keeps(&self, k: i64) -> bool {
        match self.sign {
            Sign::Plus => k > 0,
            Sign::Minus => k < 0,
        }
    }

    pub fn apply_measure(&self, phi: &LatticeMeasure) -> LatticeMeasure {
        let atoms = phi
            .atoms
            .iter()
            .filter_map(|(k, m)| {
                if self.keeps(*k) {
                    Some((*k, m.clone()))
                } else if *k == 0 {
                    Some((0, m.clone() * self.weight_at_zero()))
                } else {
                    None
                }
            })
            .collect();
        LatticeMeasure {
            span: phi.span.clone(),
            atoms,
        }
    }

    /// Restriction of a pmf. The result is generally defective (the
    /// dropped mass moves to the defect).
    pub fn apply_pmf(&self, phi: &FinitePmf) -> FinitePmf {
        let mut atoms: BTreeMap<i64, Num> = BTreeMap::new();
        for (k, m) in &phi.atoms {
            if self.keeps(*k) {
                atoms.insert(*k, m.clone());
            } else if *k == 0 {
                let w = m.clone() * self.weight_at_zero();
                if !w.is_zero() {
                    atoms.insert(0, w);
                }
            }
        }
        let placed: Num = atoms.values().cloned().sum();
        FinitePmf {
            span: phi.span.clone(),
            defect: Num::one() - placed,
            atoms,
        }
    }

    /// Restriction of a windowed density. The window must contain 0.
    pub fn apply_window(&self, phi: &WindowDensity) -> Result<WindowDensity> {
        if phi.lo > 0 || phi.hi < 0 {
            return Err(Error::Unsupported(
                "sign restriction needs a window containing 0".into(),
            ));
        }
        let mut out = phi.clone();
        for (i, k) in (phi.lo..=phi.hi).enumerate() {
            if k == 0 {
                out.values[i] = phi.values[i].clone() * self.weight_at_zero();
            } else if !self.keeps(k) {
                out.values[i] = Num::zero();
            }
        }
        match self.sign {
            Sign::Plus => out.tail_lo = Tail::Zero,
            Sign::Minus => out.tail_hi = Tail::Zero,
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// WindowDensity
// ---------------------------------------------------------------------------

/// What a windowed density asserts about its values beyond the window.
/// Tail handling is explicit metadata, never implicit zero-fill: μ, π, U₊
/// are infinite or locally finite measures and silent truncation would
/// corrupt kernel application at window edges.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    Zero,
    Unknown,
    Const(Num),
}

impl Tail {
    fn is_known(&self) -> bool {
        !matches!(self, Tail::Unknown)
    }

    fn value(&self) -> Option<Num> {
        match self {
            Tail::Zero => Some(Num::zero()),
            Tail::Const(c) => Some(c.clone()),
            Tail::Unknown => None,
        }
    }
}

/// A density w.r.t. the normalized Haar measure λ on a lattice window
/// [lo·h, hi·h], with explicit valid-interior bookkeeping. Values inside
/// the window but outside the interior are stored best-effort and carry
/// no exactness guarantee after truncated operations.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowDensity {
    span: Span,
    lo: i64,
    hi: i64,
    values: Vec<Num>,
    interior_lo: i64,
    interior_hi: i64,
    tail_lo: Tail,
    tail_hi: Tail,
}

impl WindowDensity {
    pub fn new(
        span: Span,
        lo: i64,
        hi: i64,
        values: Vec<Num>,
        tail_lo: Tail,
        tail_hi: Tail,
    ) -> Result<Self> {
        if lo > hi || values.len() != (hi - lo + 1) as usize {
            return Err(Error::InvalidMeasure(format!(
                "window [{lo},{hi}] does not match {} values",
                values.len()
            )));
        }
        Ok(WindowDensity {
            span,
            lo,
            hi,
            values,
            interior_lo: lo,
            interior_hi: hi,
            tail_lo,
            tail_hi,
        })
    }

    pub fn constant(span: Span, lo: i64, hi: i64, c: Num) -> Self {
        WindowDensity {
            span,
            lo,
            hi,
            values: vec![c.clone(); (hi - lo + 1) as usize],
            interior_lo: lo,
            interior_hi: hi,
            tail_lo: Tail::Const(c.clone()),
            tail_hi: Tail::Const(c),
        }
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn interior(&self) -> (i64, i64) {
        (self.interior_lo, self.interior_hi)
    }

    pub fn interior_is_empty(&self) -> bool {
        self.interior_lo > self.interior_hi
    }

    pub fn tails(&self) -> (&Tail, &Tail) {
        (&self.tail_lo, &self.tail_hi)
    }

    pub fn with_interior(mut self, lo: i64, hi: i64) -> Self {
        self.interior_lo = lo.max(self.lo);
        self.interior_hi = hi.min(self.hi);
        self
    }

    /// Density at lattice index k, using tail metadata beyond the window.
    /// `None` means the value is not known (unknown tail, or inside the
    /// window but outside the interior when `strict` interior semantics
    /// are needed — this accessor reports stored values there).
    pub fn density_at(&self, k: i64) -> Option<Num> {
        if k < self.lo {
            self.tail_lo.value()
        } else if k > self.hi {
            self.tail_hi.value()
        } else {
            Some(self.values[(k - self.lo) as usize].clone())
        }
    }

    /// Atom mass at index k: density times h (Haar normalization).
    pub fn mass_at(&self, k: i64) -> Option<Num> {
        self.density_at(k)
            .map(|f| f * Num::Rat(self.span.clone()))
    }

    pub fn values(&self) -> &[Num] {
        &self.values
    }

    pub fn backend(&self) -> Backend {
        self.values
            .iter()
            .fold(Backend::Exact, |b, v| join(b, v.backend()))
    }

    /// Smallest density value on the valid interior (for non-negativity
    /// checks; signed residuals are exempt by construction).
    pub fn min_on_interior(&self) -> f64 {
        if self.interior_is_empty() {
            return 0.0;
        }
        (self.interior_lo..=self.interior_hi)
            .map(|k| self.values[(k - self.lo) as usize].to_f64())
            .fold(f64::INFINITY, f64::min)
    }

    /// Exact convolution with a finite pmf, with interior and tail
    /// bookkeeping: the interior shrinks by the support radius of `b` on
    /// any side whose tail is unknown and is preserved where the tail is
    /// declared; a constant tail convolves to the same constant times the
    /// placed mass of `b`.
    pub fn convolve(&self, b: &FinitePmf) -> Result<WindowDensity> {
        check_spans(&self.span, &b.span)?;
        if b.atoms.is_empty() {
            return Err(Error::EmptyLaw("convolution with empty pmf".into()));
        }
        self.convolve_atoms(&b.atoms)
    }

    /// Convolution with a finite (not necessarily probability) measure
    /// given by its atoms. Shared by pmf convolution and the lifting map.
    pub fn convolve_measure(&self, b: &LatticeMeasure) -> Result<WindowDensity> {
        check_spans(&self.span, &b.span)?;
        if b.atoms.is_empty() {
            // Convolution with the zero measure.
            let mut out = self.clone();
            for v in &mut out.values {
                *v = Num::zero();
            }
            out.tail_lo = Tail::Zero;
            out.tail_hi = Tail::Zero;
            return Ok(out);
        }
        self.convolve_atoms(&b.atoms)
    }

    fn convolve_atoms(&self, atoms: &BTreeMap<i64, Num>) -> Result<WindowDensity> {
        let bmin = *atoms.keys().next().unwrap();
        let bmax = *atoms.keys().next_back().unwrap();
        let btotal: Num = atoms.values().cloned().sum();

        // Window: shift outward on zero-tailed sides so leaked mass stays
        // represented; keep the bounds where the tail is constant/unknown.
        let out_lo = if self.tail_lo == Tail::Zero {
            self.lo + bmin
        } else {
            self.lo
        };
        let out_hi = if self.tail_hi == Tail::Zero {
            self.hi + bmax
        } else {
            self.hi
        };

        let mut values = Vec::with_capacity((out_hi - out_lo + 1) as usize);
        for y in out_lo..=out_hi {
            let mut acc = Num::zero();
            for (k, m) in atoms {
                let f = self.density_at(y - k).unwrap_or_else(Num::zero);
                acc = acc + f * m.clone();
            }
            values.push(acc);
        }

        // Valid interior per side: preserved where the input is known all
        // the way to (and beyond) the window edge, else shrunk by the
        // support radius of b pointing into the unknown region.
        let out_int_lo = if self.tail_lo.is_known() && self.interior_lo == self.lo {
            out_lo
        } else {
            self.interior_lo + bmax
        };
        let out_int_hi = if self.tail_hi.is_known() && self.interior_hi == self.hi {
            out_hi
        } else {
            self.interior_hi + bmin
        };

        let tail_lo = match &self.tail_lo {
            Tail::Zero => Tail::Zero,
            Tail::Const(c) => Tail::Const(c.clone() * btotal.clone()),
            Tail::Unknown => Tail::Unknown,
        };
        let tail_hi = match &self.tail_hi {
            Tail::Zero => Tail::Zero,
            Tail::Const(c) => Tail::Const(c.clone() * btotal.clone()),
            Tail::Unknown => Tail::Unknown,
        };

        Ok(WindowDensity {
            span: self.span.clone(),
            lo: out_lo,
            hi: out_hi,
            values,
            interior_lo: out_int_lo.max(out_lo),
            interior_hi: out_int_hi.min(out_hi),
            tail_lo,
            tail_hi,
        })
    }

    /// Pointwise combination. The output window is the union of the
    /// windows wherever an out-of-window operand value is recoverable
    /// from a declared tail, and the intersection where it is not;
    /// interiors combine side by side on the same principle.
    fn zip_with(&self, other: &WindowDensity, f: impl Fn(&Num, &Num) -> Num) -> Result<WindowDensity> {
        check_spans(&self.span, &other.span)?;
        let union_lo = self.lo.min(other.lo);
        let union_hi = self.hi.max(other.hi);
        let eff_lo = |w: &WindowDensity| if w.tail_lo.is_known() { union_lo } else { w.lo };
        let eff_hi = |w: &WindowDensity| if w.tail_hi.is_known() { union_hi } else { w.hi };
        let lo = eff_lo(self).max(eff_lo(other));
        let hi = eff_hi(self).min(eff_hi(other));
        if lo > hi {
            return Err(Error::EmptyInterior("windows do not overlap".into()));
        }
        let values = (lo..=hi)
            .map(|k| {
                f(
                    &self.density_at(k).expect("value known by construction"),
                    &other.density_at(k).expect("value known by construction"),
                )
            })
            .collect();
        let tail_side = |a: &Tail, b: &Tail| match (a.value(), b.value()) {
            (Some(x), Some(y)) => {
                let c = f(&x, &y);
                if c.is_zero() {
                    Tail::Zero
                } else {
                    Tail::Const(c)
                }
            }
            _ => Tail::Unknown,
        };
        let tail_lo = tail_side(&self.tail_lo, &other.tail_lo);
        let tail_hi = tail_side(&self.tail_hi, &other.tail_hi);
        // Interior: a side constrains the output only where its interior
        // stops short of its window edge or its tail is unknown.
        let int_lo_of = |w: &WindowDensity| {
            if w.tail_lo.is_known() && w.interior_lo == w.lo {
                lo
            } else {
                w.interior_lo
            }
        };
        let int_hi_of = |w: &WindowDensity| {
            if w.tail_hi.is_known() && w.interior_hi == w.hi {
                hi
            } else {
                w.interior_hi
            }
        };
        Ok(WindowDensity {
            span: self.span.clone(),
            lo,
            hi,
            values,
            interior_lo: int_lo_of(self).max(int_lo_of(other)).max(lo),
            interior_hi: int_hi_of(self).min(int_hi_of(other)).min(hi),
            tail_lo,
            tail_hi,
        })
    }

    pub fn add(&self, other: &WindowDensity) -> Result<WindowDensity> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &WindowDensity) -> Result<WindowDensity> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Num) -> WindowDensity {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.clone() * c.clone();
        }
        let scale_tail = |t: &Tail| match t {
            Tail::Zero => Tail::Zero,
            Tail::Const(k) => Tail::Const(k.clone() * c.clone()),
            Tail::Unknown => Tail::Unknown,
        };
        out.tail_lo = scale_tail(&self.tail_lo);
        out.tail_hi = scale_tail(&self.tail_hi);
        out
    }

    pub fn to_float(&self) -> WindowDensity {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.to_float();
        }
        out
    }

    /// Extract the finite measure of the atoms on a sub-range of the
    /// window (mass = density · h).
    pub fn to_measure_on(&self, lo: i64, hi: i64) -> Result<LatticeMeasure> {
        if lo < self.lo || hi > self.hi {
            return Err(Error::EmptyInterior(format!(
                "range [{lo},{hi}] outside window [{},{}]",
                self.lo, self.hi
            )));
        }
        let h = Num::Rat(self.span.clone());
        Ok(LatticeMeasure::new(
            self.span.clone(),
            (lo..=hi)
                .map(|k| (k, self.values[(k - self.lo) as usize].clone() * h.clone()))
                .collect(),
        ))
    }
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Sup,
    TotalVariation,
}

/// Named norm of a−b over the intersection of valid interiors, plus the
/// region used. Sup compares densities; total variation is ½ Σ |Δmass|.
pub fn distance(a: &WindowDensity, b: &WindowDensity, norm: Norm) -> Result<(f64, (i64, i64))> {
    check_spans(&a.span, &b.span)?;
    let lo = a.interior_lo.max(b.interior_lo);
    let hi = a.interior_hi.min(b.interior_hi);
    if lo > hi {
        return Err(Error::EmptyInterior(
            "valid interiors do not intersect".into(),
        ));
    }
    let hval = Num::Rat(a.span.clone()).to_f64();
    let mut sup = 0.0f64;
    let mut tv = 0.0f64;
    for k in lo..=hi {
        let da = a.values[(k - a.lo) as usize].to_f64();
        let db = b.values[(k - b.lo) as usize].to_f64();
        let d = (da - db).abs();
        sup = sup.max(d);
        tv += d * hval;
    }
    let value = match norm {
        Norm::Sup => sup,
        Norm::TotalVariation => 0.5 * tv,
    };
    Ok((value, (lo, hi)))
}

/// Total-variation distance between two finite pmfs: ½ Σ |Δmass| over the
/// union of supports (defects excluded; they compare via total mass).
pub fn tv_pmf(a: &FinitePmf, b: &FinitePmf) -> f64 {
    a.to_measure().tv_diff(&b.to_measure())
}

pub fn sup_pmf(a: &FinitePmf, b: &FinitePmf) -> f64 {
    a.to_measure().sup_diff(&b.to_measure())
}
