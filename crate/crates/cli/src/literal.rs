//! Parsing of `re,im` literals and 15-digit output formatting.

use elliptheta::Complex64;

fn caret(text: &str, col: usize, msg: &str) -> String {
    format!("{msg} at column {}\n  {text}\n  {}^", col + 1, " ".repeat(col))
}

fn real_part(text: &str, start: usize, part: &str) -> Result<f64, String> {
    if part.is_empty() {
        return Err(caret(text, start, "expected a number"));
    }
    if part.chars().any(char::is_whitespace) {
        let at = start + part.find(char::is_whitespace).unwrap();
        return Err(caret(text, at, "spaces are not allowed in a complex literal"));
    }
    part.parse::<f64>().map_err(|_| {
        // point at the first character that cannot continue a float
        let bad = part
            .char_indices()
            .find(|&(i, ch)| !(ch.is_ascii_digit() || ch == '.' || ch == 'e' || ch == 'E' || ((ch == '-' || ch == '+') && (i == 0 || matches!(part.as_bytes()[i - 1], b'e' | b'E')))))
            .map_or(part.len() - 1, |(i, _)| i);
        caret(text, start + bad, "not a number")
    })
}

/// `"re,im"` or a plain real literal.
pub fn complex(text: &str) -> Result<Complex64, String> {
    let z = match text.split_once(',') {
        None => Complex64::new(real_part(text, 0, text)?, 0.0),
        Some((re, im)) => {
            if let Some(extra) = im.find(',') {
                return Err(caret(text, re.len() + 1 + extra, "a complex literal has at most one comma"));
            }
            Complex64::new(real_part(text, 0, re)?, real_part(text, re.len() + 1, im)?)
        }
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("complex literal {text:?} is not finite"));
    }
    Ok(z)
}

/// 15 significant digits, fixed notation for moderate exponents.
pub fn real(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.14e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let fixed = format!("{v:.*}", (14 - exp) as usize);
        let t = fixed.trim_end_matches('0');
        if t.ends_with('.') {
            format!("{t}0")
        } else {
            t.to_string()
        }
    } else {
        let m = mant.trim_end_matches('0');
        let m = m.strip_suffix('.').unwrap_or(m);
        format!("{m}e{exp}")
    }
}

pub fn cplx(z: Complex64) -> String {
    format!("{},{}", real(z.re), real(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(complex("0.3,-0.1").unwrap(), Complex64::new(0.3, -0.1));
        assert_eq!(complex("-2").unwrap(), Complex64::new(-2.0, 0.0));
        assert_eq!(complex("1e-3,2E2").unwrap(), Complex64::new(1e-3, 200.0));
    }

    #[test]
    fn errors_point_at_the_bad_column() {
        let e = complex("0.4,x").unwrap_err();
        assert!(e.starts_with("not a number at column 5"), "{e}");
        assert!(e.ends_with("\n  0.4,x\n      ^"), "{e}");
        assert!(complex("0.4,").unwrap_err().contains("column 5"));
        assert!(complex("1,2,3").unwrap_err().contains("at most one comma at column 4"));
        assert!(complex("0.1, 2").unwrap_err().contains("spaces"));
        assert!(complex("12a").unwrap_err().contains("column 3"));
    }

    #[test]
    fn fifteen_digits() {
        assert_eq!(real(2.0), "2.0");
        assert_eq!(real(1.0 / 3.0), "0.333333333333333");
        assert_eq!(real(-123456.789), "-123456.789");
        assert_eq!(real(1.5e-20), "1.5e-20");
        assert_eq!(real(6.02214076e23), "6.02214076e23");
        assert_eq!(real(-0.0), "0.0");
        assert_eq!(cplx(Complex64::new(0.5, -1e-7)), "0.5,-1e-7");
    }
}
