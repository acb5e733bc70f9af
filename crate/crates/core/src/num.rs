//! Scalar values with two backends: exact big rationals for the exact
//! engine and golden tests, doubles for large windows and Monte Carlo.
//!
//! Arithmetic between two exact values stays exact; anything touching a
//! float is demoted to the float backend, so every derived quantity
//! carries an honest record of how it was produced.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Which arithmetic produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Backend {
    Exact,
    Float,
}

/// A scalar that is either an exact rational or a double.
#[derive(Clone, Debug)]
pub enum Num {
    Rat(BigRational),
    F64(f64),
}

impl Num {
    pub fn zero() -> Self {
        Num::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Num::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Num::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Num::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Parse either an exact rational ("2/3", "-1", "5") or a decimal
    /// ("0.25" routes to the float backend).
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            return Some(Num::Rat(BigRational::new(n, d)));
        }
        if let Ok(n) = s.parse::<BigInt>() {
            return Some(Num::Rat(BigRational::from_integer(n)));
        }
        s.parse::<f64>().ok().map(Num::F64)
    }

    pub fn backend(&self) -> Backend {
        match self {
            Num::Rat(_) => Backend::Exact,
            Num::F64(_) => Backend::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Rat(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Num::F64(x) => *x,
        }
    }

    /// Demote to the float backend.
    pub fn to_float(&self) -> Num {
        Num::F64(self.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Rat(r) => r.is_zero(),
            Num::F64(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> Num {
        match self {
            Num::Rat(r) => Num::Rat(r.abs()),
            Num::F64(x) => Num::F64(x.abs()),
        }
    }

    pub fn recip(&self) -> Num {
        Num::one() / self.clone()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Num::Rat(r) => Some(r),
            Num::F64(_) => None,
        }
    }
}

impl Default for Num {
    fn default() -> Self {
        Num::zero()
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Rat(r) => write!(f, "{r}"),
            Num::F64(x) => write!(f, "{x}"),
        }
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Num::Rat(a), Num::Rat(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Num::Rat(a), Num::Rat(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Num {
            type Output = Num;
            fn $method(self, rhs: Num) -> Num {
                match (self, rhs) {
                    (Num::Rat(a), Num::Rat(b)) => Num::Rat(a.$method(b)),
                    (a, b) => Num::F64(a.to_f64().$method(b.to_f64())),
                }
            }
        }

        impl<'a> $trait<&'a Num> for &'a Num {
            type Output = Num;
            fn $method(self, rhs: &'a Num) -> Num {
                self.clone().$method(rhs.clone())
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        match self {
            Num::Rat(r) => Num::Rat(-r),
            Num::F64(x) => Num::F64(-x),
        }
    }
}

impl std::iter::Sum for Num {
    fn sum<I: Iterator<Item = Num>>(iter: I) -> Num {
        iter.fold(Num::zero(), |a, b| a + b)
    }
}

/// The coarser of two backends: anything touching Float is Float.
pub fn join(a: Backend, b: Backend) -> Backend {
    if a == Backend::Exact && b == Backend::Exact {
        Backend::Exact
    } else {
        Backend::Float
    }
}
