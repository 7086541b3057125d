//! Quantities written as `"<expression> <unit>"`, e.g. `"2*pi*150 kHz"`.
//!
//! The expression understands numbers, `pi`, `+ - * / ^` and parentheses.
//! Frequencies are multiplied out literally: `"2*pi*150 kHz"` is
//! 2pi x 150e3 and is read as rad/s wherever an angular frequency is
//! expected, while `"150 kHz"` for a coupling `J` is read as Hz.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    /// Fluctuation strength kappa, with `tau_c = 2/kappa^2`.
    RootRate,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Frequency => "frequency (Hz, kHz, MHz, GHz or rad/s)",
            Dimension::Time => "time (s, ms, us, ns or ps)",
            Dimension::RootRate => "fluctuation strength (s^-1/2)",
        })
    }
}

fn unit_factor(dim: Dimension, unit: &str) -> Option<f64> {
    let f = match (dim, unit) {
        (Dimension::Frequency, "Hz" | "rad/s") => 1.0,
        (Dimension::Frequency, "kHz") => 1e3,
        (Dimension::Frequency, "MHz") => 1e6,
        (Dimension::Frequency, "GHz") => 1e9,
        (Dimension::Time, "s") => 1.0,
        (Dimension::Time, "ms") => 1e-3,
        (Dimension::Time, "us" | "µs") => 1e-6,
        (Dimension::Time, "ns") => 1e-9,
        (Dimension::Time, "ps") => 1e-12,
        (Dimension::RootRate, "s^-1/2") => 1.0,
        _ => return None,
    };
    Some(f)
}

/// Evaluate `text` and convert it to SI (or rad/s).
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let value = p.expr()?;
    let unit = text[p.pos..].trim();
    if unit.is_empty() {
        return Err(format!("missing unit in {text:?}; expected {dim}"));
    }
    let factor = unit_factor(dim, unit).ok_or_else(|| format!("unit {unit:?} in {text:?} is not a {dim}"))?;
    let v = value * factor;
    if !v.is_finite() {
        return Err(format!("{text:?} is not finite"));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let r = self.term()?;
            v = if c == b'+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.power()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            // "rad/s" after a number is a unit, not a division.
            if c == b'/' && !self.operand_follows() {
                break;
            }
            self.pos += 1;
            let r = self.power()?;
            v = if c == b'*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn operand_follows(&self) -> bool {
        let rest = &self.s[self.pos + 1..];
        let rest = rest.iter().skip_while(|c| c.is_ascii_whitespace()).copied().collect::<Vec<u8>>();
        matches!(rest.first(), Some(b'0'..=b'9' | b'.' | b'(' | b'-' | b'+')) || rest.starts_with(b"pi")
    }

    fn power(&mut self) -> Result<f64, String> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.power()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        let here = String::from_utf8_lossy(&self.s[self.pos.min(self.s.len())..]).into_owned();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(format!("missing ')' before {here:?}"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'p') if self.s[self.pos..].starts_with(b"pi") => {
                self.pos += 2;
                Ok(std::f64::consts::PI)
            }
            Some(b'0'..=b'9' | b'.') => self.number(),
            _ => Err(format!("expected a number, 'pi' or '(' at {here:?}")),
        }
    }

    fn number(&mut self) -> Result<f64, String> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.s.len() && (p.s[p.pos].is_ascii_digit() || p.s[p.pos] == b'.') {
                p.pos += 1;
            }
        };
        digits(self);
        // Exponent only if digits follow, so "5 e" style units stay intact.
        if self.pos < self.s.len() && matches!(self.s[self.pos], b'e' | b'E') {
            let mut k = self.pos + 1;
            if k < self.s.len() && matches!(self.s[k], b'+' | b'-') {
                k += 1;
            }
            if k < self.s.len() && self.s[k].is_ascii_digit() {
                self.pos = k;
                digits(self);
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        text.parse::<f64>().map_err(|_| format!("bad number {text:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn frequencies() {
        let v = parse_quantity("2*pi*150 kHz", Dimension::Frequency).unwrap();
        assert!((v - 2.0 * PI * 150e3).abs() < 1e-6);
        assert_eq!(parse_quantity("150kHz", Dimension::Frequency).unwrap(), 150e3);
        assert_eq!(parse_quantity("2*pi*5e2 kHz", Dimension::Frequency).unwrap(), 2.0 * PI * 5e2 * 1e3);
        assert_eq!(parse_quantity("1e6 rad/s", Dimension::Frequency).unwrap(), 1e6);
        assert_eq!(parse_quantity("2 * (1 + 2) ^ 2 Hz", Dimension::Frequency).unwrap(), 18.0);
    }

    #[test]
    fn times() {
        let v = parse_quantity("0.1/(2*pi*100e3) s", Dimension::Time).unwrap();
        assert!((v - 0.1 / (2.0 * PI * 1e5)).abs() < 1e-20);
        assert_eq!(parse_quantity("160 ns", Dimension::Time).unwrap(), 160e-9);
        assert_eq!(parse_quantity("1.6e-7 s", Dimension::Time).unwrap(), 1.6e-7);
        assert_eq!(parse_quantity("-pi/4 us", Dimension::Time).unwrap(), -PI / 4.0 * 1e-6);
        assert_eq!(parse_quantity("2e3 s^-1/2", Dimension::RootRate).unwrap(), 2e3);
    }

    #[test]
    fn rejections() {
        assert!(parse_quantity("150", Dimension::Frequency).unwrap_err().contains("missing unit"));
        assert!(parse_quantity("150 ns", Dimension::Frequency).unwrap_err().contains("not a frequency"));
        assert!(parse_quantity("2*(3 kHz", Dimension::Frequency).is_err());
        assert!(parse_quantity("kHz", Dimension::Frequency).is_err());
        assert!(parse_quantity("1/0 Hz", Dimension::Frequency).is_err());
    }
}
