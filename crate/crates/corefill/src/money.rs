use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

/// Number of micro-units in one currency unit.
pub const MICROS_PER_UNIT: u64 = 1_000_000;

/// A non-negative amount of money in exact micro-units (10^-6 of a currency
/// unit). All arithmetic on `Money` is integer arithmetic: sums and
/// comparisons are exact, subtraction clamps at zero via
/// [`Money::saturating_sub`], and nothing in the engine ever rounds.
///
/// Bids, utilities, payments, welfare values, and search tolerances are all
/// carried as `Money`, so every algorithm in this crate runs on the integer
/// micro lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_micros(micros: u64) -> Money {
        Money(micros)
    }

    /// Whole currency units, e.g. `Money::from_units(60)` is 60.000000.
    pub const fn from_units(units: u64) -> Money {
        Money(units * MICROS_PER_UNIT)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Difference clamped at zero; this is the truncation primitive.
    pub fn saturating_sub(self, rhs: Money) -> Money {
        Money(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_sub(self, rhs: Money) -> Option<Money> {
        self.0.checked_sub(rhs.0).map(Money)
    }

    pub fn min(self, rhs: Money) -> Money {
        Money(self.0.min(rhs.0))
    }

    pub fn max(self, rhs: Money) -> Money {
        Money(self.0.max(rhs.0))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0.checked_add(rhs.0).expect("money overflow"))
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        *self = *self + rhs;
    }
}

/// Panics on underflow. Use `saturating_sub` where clamping is intended.
impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0.checked_sub(rhs.0).expect("money underflow"))
    }
}

impl Mul<u64> for Money {
    type Output = Money;
    fn mul(self, rhs: u64) -> Money {
        Money(self.0.checked_mul(rhs).expect("money overflow"))
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / MICROS_PER_UNIT, self.0 % MICROS_PER_UNIT)
    }
}

/// Exact rational used for derived reporting quantities that do not live on
/// the micro lattice: click probabilities, cost-per-click figures, revenue
/// ratios. Never fed back into an algorithm.
pub type Frac = Ratio<i128>;

pub fn frac(num: i128, den: i128) -> Frac {
    Ratio::new(num, den)
}

pub fn frac_from_money(m: Money) -> Frac {
    Ratio::from_integer(m.micros() as i128)
}

/// Canonical text form used in CSV reports: `"p"` for integers, `"p/q"`
/// otherwise, always in lowest terms. Round-trips exactly through
/// [`parse_frac`].
pub fn format_frac(f: &Frac) -> String {
    if f.denom() == &1 {
        f.numer().to_string()
    } else {
        format!("{}/{}", f.numer(), f.denom())
    }
}

pub fn parse_frac(s: &str) -> Option<Frac> {
    match s.split_once('/') {
        None => s.parse::<i128>().ok().map(Ratio::from_integer),
        Some((n, d)) => {
            let n = n.parse::<i128>().ok()?;
            let d = d.parse::<i128>().ok()?;
            if d == 0 {
                None
            } else {
                Some(Ratio::new(n, d))
            }
        }
    }
}
