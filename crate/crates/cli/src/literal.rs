//! Complex literals: `a`, `bi`, `a+bi`, `a-bi`, with optional whitespace and
//! scientific notation. A bare `i` stands for a unit coefficient.

use num_complex::Complex64;

pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    let z = match s.strip_suffix('i') {
        None => Complex64::new(number(&s, text)?, 0.0),
        Some(body) => match split_point(body) {
            Some(k) => Complex64::new(number(&body[..k], text)?, coefficient(&body[k..], text)?),
            None => Complex64::new(0.0, coefficient(body, text)?),
        },
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("complex literal '{text}' is not finite"))
    }
}

/// Index of the sign that starts the imaginary part, skipping a leading sign
/// and exponent signs.
fn split_point(body: &str) -> Option<usize> {
    let bytes = body.as_bytes();
    (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
}

fn coefficient(s: &str, text: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => number(s, text),
    }
}

fn number(s: &str, text: &str) -> Result<f64, String> {
    // f64::from_str also takes "inf" and "nan"; only plain decimals are literals
    if !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E')) {
        return Err(format!("invalid complex literal '{text}'"));
    }
    s.parse().map_err(|_| format!("invalid complex literal '{text}'"))
}
