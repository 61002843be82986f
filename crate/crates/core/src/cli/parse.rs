//! Text grammars accepted on the command line and in config files.
//!
//! Perturbation: a sum of terms `[±][p/q ]x^k` with even `k`. A bare rational
//! is a constant term and a bare `x` means `x^1`. An optional `*` may sit
//! between coefficient and monomial. Columns in errors are 1-based.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::RationalPoly;
use crate::{Error, Real, Result};

/// Largest number of points a `start:stop:step` grid may expand to.
pub const MAX_GRID_POINTS: usize = 10_000;

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().enumerate().map(|(i, c)| (i + 1, c)).collect(),
            pos: 0,
            text,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(i, _)| i)
            .unwrap_or(self.chars.len() + 1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            column: self.column(),
            message: message.into(),
        }
    }

    fn digits(&mut self, what: &str) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(format!("expected {what} in {:?}", self.text)));
        }
        let s: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        Ok(s.parse().expect("ascii digits"))
    }

    fn rational(&mut self) -> Result<BigRational> {
        let num = self.digits("digits")?;
        if !self.eat('/') {
            return Ok(BigRational::from_integer(num));
        }
        let col = self.column();
        let den = self.digits("denominator")?;
        if den.is_zero() {
            return Err(Error::Parse {
                column: col,
                message: "zero denominator".into(),
            });
        }
        Ok(BigRational::new(num, den))
    }

    fn power(&mut self) -> Result<u32> {
        if !self.eat('^') {
            return Ok(1);
        }
        self.skip_ws();
        let col = self.column();
        self.digits("exponent")?
            .try_into()
            .map_err(|_| Error::Parse {
                column: col,
                message: "exponent out of range".into(),
            })
    }
}

/// Parses an even polynomial with rational coefficients.
pub fn parse_perturbation(text: &str) -> Result<RationalPoly> {
    let mut cur = Cursor::new(text);
    let mut poly = RationalPoly::zero();
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(cur.error("empty perturbation"));
    }
    let mut first = true;
    loop {
        cur.skip_ws();
        let negative = match cur.peek() {
            Some('+') => {
                cur.pos += 1;
                false
            }
            Some('-') => {
                cur.pos += 1;
                true
            }
            _ if first => false,
            _ => return Err(cur.error("expected '+' or '-'")),
        };
        first = false;
        cur.skip_ws();
        let mut coeff = BigRational::one();
        let mut saw_coeff = false;
        if cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            coeff = cur.rational()?;
            saw_coeff = true;
            cur.skip_ws();
            if cur.eat('*') {
                cur.skip_ws();
                if cur.peek() != Some('x') {
                    return Err(cur.error("expected 'x' after '*'"));
                }
            }
        }
        let power = if cur.eat('x') {
            cur.skip_ws();
            cur.power()?
        } else if saw_coeff {
            0
        } else {
            return Err(cur.error("expected a coefficient or 'x'"));
        };
        if negative {
            coeff = -coeff;
        }
        poly = &poly + &RationalPoly::monomial(power, coeff)?;
        cur.skip_ws();
        if cur.peek().is_none() {
            return Ok(poly);
        }
    }
}

fn parse_real(s: &str, what: &str) -> Result<Real> {
    let t = s.trim();
    t.parse::<Real>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("{what}: cannot read {t:?} as a finite number")))
}

/// `a,b,c` or `start:stop:step`, returned sorted ascending without duplicates.
pub fn parse_grid(text: &str) -> Result<Vec<Real>> {
    let parts: Vec<&str> = text.split(':').collect();
    let mut out = match parts.as_slice() {
        [single] => single
            .split(',')
            .map(|p| parse_real(p, "grid point"))
            .collect::<Result<Vec<_>>>()?,
        [a, b, s] => {
            let (a, b, s) = (
                parse_real(a, "grid start")?,
                parse_real(b, "grid stop")?,
                parse_real(s, "grid step")?,
            );
            if !(s > 0.0) || b < a {
                return Err(Error::DegenerateGrid(format!(
                    "{text}: need start <= stop and a positive step"
                )));
            }
            let span = (b - a) / s;
            if span >= MAX_GRID_POINTS as Real {
                return Err(Error::DegenerateGrid(format!("{text}: too many points")));
            }
            let count = (span + 1e-9).floor() as usize + 1;
            (0..count).map(|i| a + i as Real * s).collect()
        }
        _ => return Err(Error::InvalidArgument(format!("{text}: expected a,b,… or start:stop:step"))),
    };
    out.sort_by(Real::total_cmp);
    out.dedup();
    if out.is_empty() {
        return Err(Error::DegenerateGrid("empty grid".into()));
    }
    Ok(out)
}
