//! Complex literals on the command line: `a`, `ai`, `a+bi`, `a-bi` (optional
//! whitespace) and the pair form `re,im`.

use epchiral::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid complex literal {0:?}: expected a, ai, a+bi, a-bi or re,im")]
pub struct ParseComplexError(pub String);

fn finite(s: &str) -> Option<f64> {
    let s = s.strip_prefix('+').unwrap_or(s);
    // f64::from_str also accepts "inf", "nan" and a second leading sign
    if s.is_empty() || s.starts_with(['+']) {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Index of the sign separating the real and imaginary parts, if any.
fn split_point(body: &str) -> Option<usize> {
    let bytes = body.as_bytes();
    (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
}

pub fn parse_complex(input: &str) -> Result<Complex64, ParseComplexError> {
    let fail = || ParseComplexError(input.to_string());
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some((re, im)) = s.split_once(',') {
        return match (finite(re), finite(im)) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(fail()),
        };
    }
    let Some(body) = s.strip_suffix('i') else {
        return finite(&s)
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(fail);
    };
    match split_point(body) {
        Some(k) => {
            let re = finite(&body[..k]).ok_or_else(fail)?;
            let im = finite(&body[k..]).ok_or_else(fail)?;
            Ok(Complex64::new(re, im))
        }
        None => finite(body)
            .map(|im| Complex64::new(0.0, im))
            .ok_or_else(fail),
    }
}

/// Two indices written `a,b`.
pub fn parse_pair(input: &str) -> Result<(usize, usize), String> {
    let (a, b) = input
        .split_once(',')
        .ok_or_else(|| format!("invalid pair {input:?}: expected a,b"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid pair {input:?}: expected a,b"))
    };
    Ok((parse(a)?, parse(b)?))
}
