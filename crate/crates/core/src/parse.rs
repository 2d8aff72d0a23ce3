//! Text syntax for rational functions: `t^3+2*t+1`, `(t+1)/(t^2+1)`, `-1/t^2`.
//!
//! Integers are reduced mod p. Exponents may be negative. A number directly
//! followed by the variable or a parenthesis multiplies (`2t`).

use crate::error::{Error, Result};
use crate::field::check_prime;
use crate::ratfn::RatFn;

/// Parses a rational function in the variable `t`.
pub fn parse_ratfn(input: &str, p: u64) -> Result<RatFn> {
    parse_ratfn_in(input, p, "t")
}

/// Parses a rational function in the named variable.
pub fn parse_ratfn_in(input: &str, p: u64, var: &str) -> Result<RatFn> {
    check_prime(p)?;
    let mut parser = Parser {
        src: input,
        bytes: input.as_bytes(),
        pos: 0,
        p,
        var,
    };
    let value = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.err("unexpected trailing input"));
    }
    Ok(value)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    p: u64,
    var: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            input: self.src.to_string(),
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RatFn> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFn> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    acc = acc.checked_div(&d).map_err(|_| {
                        self.pos = at;
                        self.err("division by zero")
                    })?;
                }
                Some(b'(') => acc = &acc * &self.power()?,
                Some(c) if self.starts_var(c) => acc = &acc * &self.power()?,
                _ => return Ok(acc),
            }
        }
    }

    fn starts_var(&self, c: u8) -> bool {
        c.is_ascii_alphabetic() && self.src[self.pos..].starts_with(self.var)
    }

    fn unary(&mut self) -> Result<RatFn> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatFn> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.skip_ws();
        let e = self.integer()?;
        let raised = base.pow(e);
        if negative {
            raised.inv().map_err(|_| self.err("zero raised to a negative power"))
        } else {
            Ok(raised)
        }
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        self.src[start..self.pos]
            .parse::<u64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn atom(&mut self) -> Result<RatFn> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RatFn::from_i64((n % self.p) as i64, self.p))
            }
            Some(c) if self.starts_var(c) => {
                self.pos += self.var.len();
                Ok(RatFn::t(self.p))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use proptest::prelude::*;

    #[test]
    fn polynomial_syntax() {
        let r = parse_ratfn("t^3+2*t+1", 5).unwrap();
        assert_eq!(r, RatFn::from_poly(Poly::from_i64(5, &[1, 2, 0, 1])));
    }

    #[test]
    fn fractions_and_implicit_products() {
        let a = parse_ratfn("1/(t^2+1)", 3).unwrap();
        let b = parse_ratfn("(t^2+1)^-1", 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_ratfn("2t", 3).unwrap(), parse_ratfn("2*t", 3).unwrap());
        assert_eq!(parse_ratfn("t(t+1)", 3).unwrap(), parse_ratfn("t^2+t", 3).unwrap());
    }

    #[test]
    fn other_variable() {
        let a = parse_ratfn_in("1/(s+1)", 2, "s").unwrap();
        assert_eq!(a.format_with("s"), "1/(s+1)");
    }

    #[test]
    fn errors_carry_position() {
        match parse_ratfn("t+*", 5) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_ratfn("1/(t-t)", 5).is_err());
        assert!(parse_ratfn("t", 4).is_err());
        assert!(parse_ratfn("(t+1", 5).is_err());
    }

    fn arb_ratfn(p: u64) -> impl Strategy<Value = RatFn> {
        (
            proptest::collection::vec(0..p, 0..5),
            proptest::collection::vec(0..p, 1..5),
        )
            .prop_filter_map("zero denominator", move |(n, d)| {
                RatFn::new(Poly::new(p, n), Poly::new(p, d)).ok()
            })
    }

    proptest! {
        #[test]
        fn display_round_trips(r in arb_ratfn(7)) {
            let text = r.to_string();
            prop_assert_eq!(parse_ratfn(&text, 7).unwrap(), r);
        }
    }
}
