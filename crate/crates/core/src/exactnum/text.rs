//! Literal syntax for values in Q(pi).
//!
//! ```text
//! expr := '(' sum ')' '/' '(' sum ')' | sum
//! sum  := [+|-] term { (+|-) term }
//! term := RAT ['*'] ['pi' ['^' INT]] | 'pi' ['^' INT]
//! RAT  := INT ['/' INT]
//! ```
//! Whitespace is ignored everywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{poly, PiRational, Repr};
use crate::error::{Error, Result};

fn rat_string(n: &BigInt, d: &BigInt) -> String {
    if d.is_one() {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

pub(super) fn format(x: &PiRational) -> String {
    match &x.0 {
        Repr::Lin { a, b, d } => {
            let g = a.gcd(b).gcd(d);
            let (a, b, d) = if g.is_one() { (a.clone(), b.clone(), d.clone()) } else { (a / &g, b / &g, d / &g) };
            let c = BigRational::new(a, d.clone());
            let k = BigRational::new(b, d);
            if k.is_zero() {
                return rat_string(c.numer(), c.denom());
            }
            let mut s = if k.is_one() {
                "pi".to_string()
            } else if k == -BigRational::one() {
                "-pi".to_string()
            } else {
                format!("{} pi", rat_string(k.numer(), k.denom()))
            };
            if !c.is_zero() {
                let sign = if c.is_negative() { '-' } else { '+' };
                s.push_str(&format!(" {sign} {}", rat_string(&c.numer().abs(), c.denom())));
            }
            s
        }
        Repr::Frac { num, den } => format!("({})/({})", format_poly(num), format_poly(den)),
    }
}

fn format_poly(p: &[BigInt]) -> String {
    let mut s = String::new();
    for (k, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if s.is_empty() {
            if c.is_negative() {
                s.push('-');
            }
        } else {
            s.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let coeff = if k > 0 && mag.is_one() { String::new() } else if k > 0 { format!("{mag} ") } else { mag.to_string() };
        s.push_str(&coeff);
        match k {
            0 => {}
            1 => s.push_str("pi"),
            _ => s.push_str(&format!("pi^{k}")),
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digit run parses"))
    }

    fn at_pi(&mut self) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(b"pi")
    }

    fn pi_power(&mut self) -> Result<usize> {
        self.pos += 2;
        if self.eat(b'^') {
            let k = self.int()?;
            usize::try_from(k).ok().filter(|&k| k <= 64).ok_or_else(|| self.err("exponent too large"))
        } else {
            Ok(1)
        }
    }

    fn term(&mut self) -> Result<(BigRational, usize)> {
        if self.at_pi() {
            let k = self.pi_power()?;
            return Ok((BigRational::one(), k));
        }
        let n = self.int()?;
        let c = if self.eat(b'/') {
            let pos = self.pos;
            let d = self.int()?;
            if d.is_zero() {
                return Err(Error::Parse { pos, msg: "zero denominator".into() });
            }
            BigRational::new(n, d)
        } else {
            BigRational::from_integer(n)
        };
        let star = self.eat(b'*');
        if self.at_pi() {
            let k = self.pi_power()?;
            return Ok((c, k));
        }
        if star {
            return Err(self.err("expected 'pi' after '*'"));
        }
        Ok((c, 0))
    }

    fn sum(&mut self) -> Result<poly::RatPoly> {
        let mut out: poly::RatPoly = Vec::new();
        let mut negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        loop {
            let (c, k) = self.term()?;
            if out.len() <= k {
                out.resize(k + 1, BigRational::zero());
            }
            out[k] += if negate { -c } else { c };
            negate = match self.peek() {
                Some(b'+') => false,
                Some(b'-') => true,
                _ => break,
            };
            self.pos += 1;
        }
        poly::trim(&mut out);
        Ok(out)
    }

    fn expr(&mut self) -> Result<PiRational> {
        if self.eat(b'(') {
            let num = self.sum()?;
            self.expect(b')')?;
            let den = if self.eat(b'/') {
                self.expect(b'(')?;
                let pos = self.pos;
                let den = self.sum()?;
                self.expect(b')')?;
                if den.is_empty() {
                    return Err(Error::Parse { pos, msg: "zero denominator".into() });
                }
                den
            } else {
                vec![BigRational::one()]
            };
            return Ok(PiRational::from_rat_polys(num, den));
        }
        let num = self.sum()?;
        Ok(PiRational::from_rat_polys(num, vec![BigRational::one()]))
    }
}

pub(super) fn parse(s: &str) -> Result<PiRational> {
    let mut p = Parser { src: s.as_bytes(), pos: 0 };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_examples() {
        assert_eq!(parse("pi - 3").unwrap().to_string(), "pi - 3");
        assert_eq!(parse("3 - pi").unwrap().to_string(), "-pi + 3");
        assert_eq!(parse("-1/2*pi").unwrap().to_string(), "-1/2 pi");
        assert_eq!(parse("-7/4").unwrap().to_string(), "-7/4");
        assert_eq!(parse("0").unwrap().to_string(), "0");
    }

    #[test]
    fn parse_examples() {
        let x = parse("3/20 + pi - 3").unwrap();
        let (c, k) = x.linear_parts().unwrap();
        assert_eq!(c, BigRational::new((-57).into(), 20.into()));
        assert_eq!(k, BigRational::one());
        let y = parse("(1+pi)/(2)").unwrap();
        assert_eq!(y.to_string(), "1/2 pi + 1/2");
        let z = parse("( 2 pi^2 - 1 ) / ( pi )").unwrap();
        assert_eq!(z.to_string(), "(2 pi^2 - 1)/(pi)");
        assert_eq!(parse(&z.to_string()).unwrap(), z);
    }

    #[test]
    fn errors_carry_positions() {
        match parse("1 + ") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse("1/0") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("(1)/(pi - pi)").is_err());
        assert!(parse("2 pie").is_err());
    }
}
