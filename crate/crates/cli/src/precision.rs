//! Choice of scalar type for a run.
//!
//! Orbit points of long words are ill conditioned, so the arithmetic width is
//! chosen from a bound on the condition numbers a command will meet.

use std::fmt;
use std::str::FromStr;

/// Supported significand widths for multiprecision runs.
pub const WIDTHS: [u32; 6] = [128, 256, 512, 1024, 2048, 4096];

/// Decimal digits kept in reserve beyond the worst expected condition number.
pub const GUARD_DIGITS: f64 = 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Double,
    Bits(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionChoice {
    Auto,
    Fixed(Precision),
}

impl FromStr for PrecisionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(PrecisionChoice::Auto),
            "f64" | "double" => Ok(PrecisionChoice::Fixed(Precision::Double)),
            _ => {
                let bits: u32 = s.parse().map_err(|_| format!("unknown precision `{s}`"))?;
                if WIDTHS.contains(&bits) {
                    Ok(PrecisionChoice::Fixed(Precision::Bits(bits)))
                } else {
                    Err(format!("precision must be auto, f64 or one of {WIDTHS:?} bits"))
                }
            }
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => write!(f, "f64"),
            Precision::Bits(b) => write!(f, "{b}-bit"),
        }
    }
}

impl Precision {
    /// Significand bits, 53 for double precision.
    pub fn bits(self) -> u32 {
        match self {
            Precision::Double => 53,
            Precision::Bits(b) => b,
        }
    }

    /// Narrowest type carrying `digits` decimal digits.
    pub fn for_digits(digits: f64) -> Precision {
        if digits <= 15.0 {
            return Precision::Double;
        }
        let bits = digits * std::f64::consts::LOG2_10;
        WIDTHS.iter().copied().find(|&w| w as f64 >= bits).map_or(Precision::Bits(WIDTHS[WIDTHS.len() - 1]), Precision::Bits)
    }
}

impl PrecisionChoice {
    /// Resolves `Auto` from the decimal logarithm of the worst expected
    /// point condition number.
    pub fn resolve(self, log10_condition: f64) -> Precision {
        match self {
            PrecisionChoice::Fixed(p) => p,
            PrecisionChoice::Auto => Precision::for_digits(log10_condition + GUARD_DIGITS),
        }
    }
}

/// Bound on `log₁₀ cond(ρ(w)·x)` over words of `letters` letters:
/// `cond(g p gᵀ) ≤ cond(g)² cond(p)`.
pub fn orbit_condition_bound(generator_log10_conditions: &[f64], basepoint_log10_condition: f64, letters: usize) -> f64 {
    let worst = generator_log10_conditions.iter().copied().fold(0.0, f64::max);
    2.0 * worst * letters as f64 + basepoint_log10_condition
}

/// Runs `$body` with the type alias `$t` bound to the scalar of `$p`.
#[macro_export]
macro_rules! with_precision {
    ($p:expr, $t:ident => $body:expr) => {
        match $p {
            $crate::precision::Precision::Double => {
                type $t = f64;
                $body
            }
            $crate::precision::Precision::Bits(128) => {
                type $t = morsecert_core::Mp<128>;
                $body
            }
            $crate::precision::Precision::Bits(256) => {
                type $t = morsecert_core::Mp<256>;
                $body
            }
            $crate::precision::Precision::Bits(512) => {
                type $t = morsecert_core::Mp<512>;
                $body
            }
            $crate::precision::Precision::Bits(1024) => {
                type $t = morsecert_core::Mp<1024>;
                $body
            }
            $crate::precision::Precision::Bits(2048) => {
                type $t = morsecert_core::Mp<2048>;
                $body
            }
            $crate::precision::Precision::Bits(_) => {
                type $t = morsecert_core::Mp<4096>;
                $body
            }
        }
    };
}
