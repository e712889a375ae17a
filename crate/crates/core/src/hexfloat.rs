//! Hexadecimal floating-point text encoding (`0x1.8p+1` == 3.0).
//!
//! Used wherever a value must survive a text round trip bit-exactly, most
//! importantly noise values whose equality marks a lazy (unchanged) step.

use crate::error::{Error, Result};

const MANTISSA_BITS: u32 = 52;
const MANTISSA_MASK: u64 = (1 << MANTISSA_BITS) - 1;
const EXP_BIAS: i64 = 1023;

/// Canonical hex rendering of a finite `f64`. Non-finite inputs render as
/// `inf`, `-inf` or `nan`, which [`parse`] rejects.
pub fn format(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = value.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> MANTISSA_BITS) & 0x7ff) as i64;
    let mantissa = bits & MANTISSA_MASK;
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, 1 - EXP_BIAS)
    } else {
        (1, biased - EXP_BIAS)
    };
    let digits = format!("{mantissa:013x}");
    let digits = digits.trim_end_matches('0');
    let frac = if digits.is_empty() {
        String::new()
    } else {
        format!(".{digits}")
    };
    let exp_sign = if exp < 0 { '-' } else { '+' };
    format!("{sign}0x{lead}{frac}p{exp_sign}{}", exp.abs())
}

/// Parses the canonical form produced by [`format`]: an optional sign,
/// `0x`, a leading digit `0` or `1`, up to 13 fraction digits, and a binary
/// exponent.
pub fn parse(text: &str) -> Result<f64> {
    let err = || Error::Parse(format!("malformed hex float {text:?}"));
    let (negative, rest) = match text.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))
        .ok_or_else(err)?;
    let (significand, exponent) = rest
        .split_once(['p', 'P'])
        .ok_or_else(err)?;
    let exp: i64 = exponent.parse().map_err(|_| err())?;
    let (lead, frac) = match significand.split_once('.') {
        Some((l, f)) => (l, f),
        None => (significand, ""),
    };
    let lead = match lead {
        "0" => 0u64,
        "1" => 1u64,
        _ => return Err(err()),
    };
    if frac.len() > 13 || !frac.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(err());
    }
    let mantissa = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).map_err(|_| err())? << (4 * (13 - frac.len()))
    };
    let sign_bit = u64::from(negative) << 63;
    let bits = match lead {
        0 if mantissa == 0 => sign_bit,
        0 => {
            if exp != 1 - EXP_BIAS {
                return Err(err());
            }
            sign_bit | mantissa
        }
        _ => {
            let biased = exp + EXP_BIAS;
            if !(1..=2046).contains(&biased) {
                return Err(err());
            }
            sign_bit | ((biased as u64) << MANTISSA_BITS) | mantissa
        }
    };
    Ok(f64::from_bits(bits))
}
