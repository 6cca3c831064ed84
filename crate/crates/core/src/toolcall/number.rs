//! Exact decimal numbers for call arguments.
//!
//! A literal such as `12.50` is stored as an integer mantissa (`1250`) and a
//! scale (`2`), so nothing is lost to binary floating point. Equality is
//! numeric: `2`, `2.0` and `0.2e1` are all equal.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Largest accepted exponent magnitude. Larger exponents are rejected by the
/// lexer rather than expanded into enormous digit strings.
pub const MAX_EXPONENT: i64 = 1024;

#[derive(Clone, Debug)]
pub struct Number {
    mantissa: BigInt,
    scale: u32,
    /// The literal was written with a fractional part or an exponent.
    fractional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumberError {
    Empty,
    Malformed,
    ExponentRange,
}

impl Number {
    pub fn from_i64(v: i64) -> Self {
        Self {
            mantissa: BigInt::from(v),
            scale: 0,
            fractional: false,
        }
    }

    /// Parses a decimal literal: optional sign, digits, optional fraction,
    /// optional exponent. Leading `+` and a bare leading `.` are accepted.
    pub fn parse(text: &str) -> Result<Self, NumberError> {
        let bytes = text.as_bytes();
        if bytes.is_empty() {
            return Err(NumberError::Empty);
        }
        let mut i = 0;
        let negative = match bytes[0] {
            b'-' => {
                i += 1;
                true
            }
            b'+' => {
                i += 1;
                false
            }
            _ => false,
        };
        let mut digits = String::new();
        let mut frac_digits = 0u32;
        let mut saw_digit = false;
        let mut fractional = false;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            saw_digit = true;
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            fractional = true;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                digits.push(bytes[i] as char);
                frac_digits += 1;
                saw_digit = true;
                i += 1;
            }
        }
        if !saw_digit {
            return Err(NumberError::Malformed);
        }
        let mut exponent: i64 = 0;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            fractional = true;
            i += 1;
            let mut exp_negative = false;
            if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                exp_negative = bytes[i] == b'-';
                i += 1;
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                exponent = exponent.saturating_mul(10).saturating_add((bytes[i] - b'0') as i64);
                i += 1;
            }
            if start == i {
                return Err(NumberError::Malformed);
            }
            if exponent > MAX_EXPONENT {
                return Err(NumberError::ExponentRange);
            }
            if exp_negative {
                exponent = -exponent;
            }
        }
        if i != bytes.len() {
            return Err(NumberError::Malformed);
        }
        let mut mantissa: BigInt = digits.parse().map_err(|_| NumberError::Malformed)?;
        if negative {
            mantissa = -mantissa;
        }
        let mut scale = frac_digits as i64 - exponent;
        if scale < 0 {
            mantissa *= BigInt::from(10u8).pow((-scale) as u32);
            scale = 0;
        }
        Ok(Self {
            mantissa,
            scale: scale as u32,
            fractional,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Whether the literal carried a fractional part (`2.0` vs `2`).
    pub fn is_fractional(&self) -> bool {
        self.fractional
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    pub fn to_i64(&self) -> Option<i64> {
        let (m, s) = self.normalized();
        if s == 0 {
            m.to_i64()
        } else {
            None
        }
    }

    /// Mantissa and scale with trailing fractional zeros removed.
    fn normalized(&self) -> (BigInt, u32) {
        let mut m = self.mantissa.clone();
        let mut s = self.scale;
        let ten = BigInt::from(10u8);
        while s > 0 && (&m % &ten).is_zero() {
            m /= &ten;
            s -= 1;
        }
        (m, s)
    }

    /// Text that is identical for numerically equal numbers.
    pub fn canonical_key(&self) -> String {
        let (m, s) = self.normalized();
        Self {
            mantissa: m,
            scale: s,
            fractional: false,
        }
        .to_string()
    }

    /// `self + k`, keeping the scale and fractional flag.
    pub fn add_integer(&self, k: i64) -> Self {
        let shift = BigInt::from(10u8).pow(self.scale);
        Self {
            mantissa: &self.mantissa + BigInt::from(k) * shift,
            scale: self.scale,
            fractional: self.fractional,
        }
    }

    pub fn doubled(&self) -> Self {
        Self {
            mantissa: &self.mantissa * 2,
            scale: self.scale,
            fractional: self.fractional,
        }
    }

    /// Same value, printed with the opposite integer/fraction style
    /// (`2` becomes `2.0`, `2.0` becomes `2`). Non-integral values only gain
    /// the fractional flag.
    pub fn with_flipped_style(&self) -> Self {
        let (m, s) = self.normalized();
        if s == 0 && self.fractional {
            Self {
                mantissa: m,
                scale: 0,
                fractional: false,
            }
        } else if s == 0 {
            Self {
                mantissa: m * 10,
                scale: 1,
                fractional: true,
            }
        } else {
            self.clone()
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        let ten = BigInt::from(10u8);
        match self.scale.cmp(&other.scale) {
            Ordering::Equal => self.mantissa.cmp(&other.mantissa),
            Ordering::Less => {
                let lifted = &self.mantissa * ten.pow(other.scale - self.scale);
                lifted.cmp(&other.mantissa)
            }
            Ordering::Greater => {
                let lifted = &other.mantissa * ten.pow(self.scale - other.scale);
                self.mantissa.cmp(&lifted)
            }
        }
    }
}

impl fmt::Display for Number {
    /// Plain positional notation; exponents are expanded. A literal parsed
    /// with a fractional part keeps at least one fractional digit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.abs().to_string();
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        let scale = self.scale as usize;
        if scale == 0 {
            if self.fractional {
                write!(f, "{sign}{digits}.0")
            } else {
                write!(f, "{sign}{digits}")
            }
        } else if digits.len() > scale {
            let (int, frac) = digits.split_at(digits.len() - scale);
            write!(f, "{sign}{int}.{frac}")
        } else {
            let zeros = "0".repeat(scale - digits.len());
            write!(f, "{sign}0.{zeros}{digits}")
        }
    }
}
