//! Complex amplitude expressions: `1/sqrt(2)`, `-2/3`, `exp(i*pi/4)`, `0.5+0.5i`.
//!
//! Grammar (usual precedence, `^` right-associative):
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' unary)?
//! atom   := number ['i'] | 'i' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'
//! ```
//! Functions: sqrt, exp, cos, sin, conj, abs, re, im.

use crate::error::{Result, WalkError};
use num_complex::Complex64 as C64;

/// Evaluate an amplitude expression in double precision.
pub fn eval(src: &str) -> Result<C64> {
    let mut p = Parser {
        s: src.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Evaluate and require a real value (imaginary part below 1e-12).
pub fn eval_real(src: &str) -> Result<f64> {
    let v = eval(src)?;
    if v.im.abs() > 1e-12 {
        return Err(WalkError::Expr(format!("`{src}` is not real")));
    }
    Ok(v.re)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> WalkError {
        WalkError::Expr(format!(
            "{msg} at column {} in `{}`",
            self.pos + 1,
            String::from_utf8_lossy(self.s)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<C64> {
        let mut v = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    v += self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    v -= self.term()?;
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<C64> {
        let mut v = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    v *= self.unary()?;
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.unary()?;
                    if d.norm() == 0.0 {
                        return Err(self.err("division by zero"));
                    }
                    v /= d;
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<C64> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<C64> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.unary()?;
            if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 64.0 {
                return Ok(base.powi(e.re as i32));
            }
            return Ok(base.powc(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<C64> {
        let c = self.peek().ok_or_else(|| self.err("unexpected end"))?;
        if c == b'(' {
            self.pos += 1;
            let v = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)`"));
            }
            self.pos += 1;
            return Ok(v);
        }
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < self.s.len()
                && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.')
            {
                self.pos += 1;
            }
            // exponent part, e.g. 1e-3
            if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < self.s.len() && (self.s[self.pos] == b'+' || self.s[self.pos] == b'-')
                {
                    self.pos += 1;
                }
                if self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                } else {
                    self.pos = save;
                }
            }
            let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
            let x: f64 = text.parse().map_err(|_| self.err("bad number"))?;
            if self.pos < self.s.len() && self.s[self.pos] == b'i' && !self.ident_continues(1) {
                self.pos += 1;
                return Ok(C64::new(0.0, x));
            }
            return Ok(C64::new(x, 0.0));
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.s[start..self.pos])
                .unwrap()
                .to_ascii_lowercase();
            match name.as_str() {
                "i" => return Ok(C64::new(0.0, 1.0)),
                "pi" => return Ok(C64::new(std::f64::consts::PI, 0.0)),
                "e" => return Ok(C64::new(std::f64::consts::E, 0.0)),
                _ => {}
            }
            if self.peek() != Some(b'(') {
                return Err(self.err(&format!("unknown symbol `{name}`")));
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)`"));
            }
            self.pos += 1;
            return match name.as_str() {
                "sqrt" => Ok(arg.sqrt()),
                "exp" => Ok(arg.exp()),
                "cos" => Ok(arg.cos()),
                "sin" => Ok(arg.sin()),
                "conj" => Ok(arg.conj()),
                "abs" => Ok(C64::new(arg.norm(), 0.0)),
                "re" => Ok(C64::new(arg.re, 0.0)),
                "im" => Ok(C64::new(arg.im, 0.0)),
                _ => Err(self.err(&format!("unknown function `{name}`"))),
            };
        }
        Err(self.err("unexpected character"))
    }

    fn ident_continues(&self, offset: usize) -> bool {
        self.s
            .get(self.pos + offset)
            .is_some_and(|b| b.is_ascii_alphanumeric())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn arithmetic_and_functions() {
        assert!(close(
            eval("1/sqrt(2)").unwrap(),
            C64::new(0.5f64.sqrt(), 0.0)
        ));
        assert!(close(eval("-2/3").unwrap(), C64::new(-2.0 / 3.0, 0.0)));
        assert!(close(eval("2^3^2").unwrap(), C64::new(512.0, 0.0)));
        assert!(close(eval("0.5+0.5i").unwrap(), C64::new(0.5, 0.5)));
        assert!(close(eval("1e-3").unwrap(), C64::new(1e-3, 0.0)));
        let w = eval("exp(i*pi/4)").unwrap();
        assert!(close(w, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)));
        assert!(close(
            eval("-(1+i)*conj(1+i)").unwrap(),
            C64::new(-2.0, 0.0)
        ));
    }

    #[test]
    fn rejects_garbage() {
        assert!(eval("1+").is_err());
        assert!(eval("foo(1)").is_err());
        assert!(eval("1/0").is_err());
        assert!(eval("(1").is_err());
        assert!(eval_real("i").is_err());
    }
}
