//! Banded linear solves for first-passage (absorption) probabilities of a
//! lattice walk killed outside a truncation window.
//!
//! The transient matrix I − Q of a finite-support walk is banded and an
//! M-matrix, so LU without pivoting is stable; the same code runs over f64
//! (large truncation levels) and over exact big rationals (small solver
//! problems and golden tests).

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// The minimal arithmetic the solver needs, implemented by f64 and
/// BigRational.
pub trait Scalar: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Banded matrix: row i holds columns [i−kl, i+ku] in a flat strip.
pub struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<T>,
}

impl<T: Scalar> Banded<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Banded {
            n,
            kl,
            ku,
            data: vec![T::zero(); n * (kl + ku + 1)],
        }
    }

    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        if j < lo || j > hi {
            return None;
        }
        Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.idx(i, j)
            .map(|k| self.data[k].clone())
            .unwrap_or_else(T::zero)
    }

    /// In-place LU without pivoting, then solve for multiple right-hand
    /// sides (`rhs` is n rows × m columns). Errors on a zero pivot.
    pub fn solve(mut self, rhs: &mut [Vec<T>]) -> Result<()> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        for i in 0..n {
            let piv = self.get(i, i);
            if piv.is_zero() {
                return Err(Error::InvalidMeasure(format!(
                    "singular transient system (zero pivot at row {i})"
                )));
            }
            let rmax = (i + self.kl).min(n - 1);
            for r in i + 1..=rmax {
                let a = self.get(r, i);
                if a.is_zero() {
                    continue;
                }
                let factor = a.div(&piv);
                let cmax = (i + self.ku).min(n - 1);
                for c in i..=cmax {
                    let v = self.get(r, c).sub(&factor.mul(&self.get(i, c)));
                    self.set(r, c, v);
                }
                let (head, tail) = rhs.split_at_mut(r);
                let src = &head[i];
                let dst = &mut tail[0];
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d = d.sub(&factor.mul(s));
                }
            }
        }
        // Back substitution.
        for i in (0..n).rev() {
            let cmax = (i + self.ku).min(n - 1);
            for c in i + 1..=cmax {
                let a = self.get(i, c);
                if a.is_zero() {
                    continue;
                }
                let (head, tail) = rhs.split_at_mut(c);
                let dst = &mut head[i];
                let src = &tail[0];
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d = d.sub(&a.mul(s));
                }
            }
            let piv = self.get(i, i);
            for v in rhs[i].iter_mut() {
                *v = v.div(&piv);
            }
        }
        Ok(())
    }
}

/// Absorption solve for the walk with one-step law `step` (index, prob):
/// transient states are {floor, …, ceil}; a step landing below `floor` is
/// absorbed at its landing point; a step landing above `ceil` escapes.
///
/// Returns, for every transient state y, the absorption law over landing
/// points j < floor, plus the escape probability (the solved bound on the
/// mass that leaves through the top of the truncation window).
pub struct AbsorbSolution<T> {
    pub floor: i64,
    pub ceil: i64,
    /// `laws[y - floor]` maps landing point j (< floor) to its probability.
    pub laws: Vec<BTreeMap<i64, T>>,
    pub escape: Vec<T>,
}

impl<T: Scalar> AbsorbSolution<T> {
    pub fn law(&self, y: i64) -> &BTreeMap<i64, T> {
        &self.laws[(y - self.floor) as usize]
    }

    pub fn escape_from(&self, y: i64) -> T {
        self.escape[(y - self.floor) as usize].clone()
    }
}

pub fn absorb_below<T: Scalar>(
    step: &[(i64, T)],
    floor: i64,
    ceil: i64,
) -> Result<AbsorbSolution<T>> {
    assert!(ceil >= floor);
    let n = (ceil - floor + 1) as usize;
    let min_jump = step.iter().map(|(k, _)| *k).min().unwrap_or(0);
    let max_jump = step.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let kl = (-min_jump).max(0) as usize;
    let ku = max_jump.max(0) as usize;

    // Absorption targets: j in [floor + min_jump, floor - 1].
    let targets: Vec<i64> = if min_jump < 0 {
        (floor + min_jump..floor).collect()
    } else {
        Vec::new()
    };
    let m = targets.len();

    let mut a = Banded::<T>::zeros(n, kl, ku);
    let mut rhs: Vec<Vec<T>> = vec![vec![T::zero(); m]; n];
    for i in 0..n {
        let y = floor + i as i64;
        a.set(i, i, T::one());
        for (k, p) in step {
            let dest = y + k;
            if dest > ceil {
                continue; // escapes through the top
            }
            if dest >= floor {
                let j = (dest - floor) as usize;
                let cur = a.get(i, j);
                a.set(i, j, cur.sub(p));
            } else {
                let c = (dest - (floor + min_jump)) as usize;
                rhs[i][c] = rhs[i][c].add(p);
            }
        }
    }
    a.solve(&mut rhs)?;

    let mut laws = Vec::with_capacity(n);
    let mut escape = Vec::with_capacity(n);
    for row in rhs {
        let mut total = T::zero();
        let mut law = BTreeMap::new();
        for (c, v) in row.into_iter().enumerate() {
            if !v.is_zero() {
                total = total.add(&v);
                law.insert(targets[c], v);
            }
        }
        escape.push(T::one().sub(&total));
        laws.push(law);
    }
    Ok(AbsorbSolution {
        floor,
        ceil,
        laws,
        escape,
    })
}
