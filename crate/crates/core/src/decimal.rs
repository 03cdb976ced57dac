//! Exact fixed-point decimals for weights and metric values.

use std::cmp::Ordering;
use std::fmt;

/// Fractional digits written for computed values.
pub const DEFAULT_SCALE: u32 = 6;

const MAX_SCALE: u32 = 30;

/// `units × 10^-scale`. Equality and ordering are numeric, so `2.5` equals
/// `2.500000`.
#[derive(Clone, Copy, Debug)]
pub struct Decimal {
    units: i128,
    scale: u32,
}

impl Decimal {
    pub fn new(units: i128, scale: u32) -> Self {
        Decimal { units, scale }
    }

    pub fn from_int(value: i128, scale: u32) -> Self {
        Decimal {
            units: value * 10i128.pow(scale),
            scale,
        }
    }

    /// `numerator / denominator` rounded half-to-even at `scale` digits.
    /// `None` when the denominator is zero or the result overflows.
    pub fn from_ratio(numerator: u128, denominator: u128, scale: u32) -> Option<Self> {
        if denominator == 0 {
            return None;
        }
        let scale = scale.min(MAX_SCALE);
        let num = numerator.checked_mul(10u128.pow(scale))?;
        let den = denominator;
        let mut q = num / den;
        let r = num % den;
        match (2 * r).cmp(&den) {
            Ordering::Greater => q += 1,
            Ordering::Equal if q % 2 == 1 => q += 1,
            _ => {}
        }
        Some(Decimal {
            units: i128::try_from(q).ok()?,
            scale,
        })
    }

    /// Parses an `xsd:decimal` lexical form (`-1.50`, `3`, `.5`).
    pub fn parse(s: &str) -> Option<Self> {
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let frac = frac.trim_end_matches('0');
        let int = int.trim_start_matches('0');
        if frac.len() as u32 > MAX_SCALE || int.len() + frac.len() > 37 {
            return None;
        }
        let digits = format!("{int}{frac}");
        let units: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
        Some(Decimal {
            units: if neg { -units } else { units },
            scale: frac.len() as u32,
        })
    }

    pub fn units(&self) -> i128 {
        self.units
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn to_f64(&self) -> f64 {
        self.units as f64 / 10f64.powi(self.scale as i32)
    }

    fn rescaled(&self, scale: u32) -> Option<i128> {
        self.units.checked_mul(10i128.checked_pow(scale - self.scale)?)
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        match (self.rescaled(scale), other.rescaled(scale)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Decimal {}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.units < 0 { "-" } else { "" };
        let abs = self.units.unsigned_abs();
        if self.scale == 0 {
            return write!(f, "{sign}{abs}");
        }
        let p = 10u128.pow(self.scale);
        write!(f, "{sign}{}.{:0width$}", abs / p, abs % p, width = self.scale as usize)
    }
}
