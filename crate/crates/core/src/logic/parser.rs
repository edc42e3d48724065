//! Prefix constraint notation.
//!
//! ```text
//! f := atom | !(f) | &(f,...,f) | |(f,...,f) | >(f,f) | =(f,f)
//! ```
//!
//! Atoms are declared variable names (`[A-Za-z0-9_]+`). Whitespace between
//! tokens is ignored. Errors carry the byte offset where parsing failed.

use super::{Formula, LogicError, Scenario};

/// Parses a constraint string against the variables of `scenario`.
pub fn parse_formula(text: &str, scenario: &Scenario) -> Result<Formula, LogicError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, scenario };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

pub(crate) fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    scenario: &'a Scenario,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> LogicError {
        LogicError::Syntax { position: self.pos.min(self.src.len()), message: message.to_string() }
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

    fn expect(&mut self, b: u8) -> Result<(), LogicError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", b as char)))
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(op @ (b'!' | b'&' | b'|' | b'>' | b'=')) => {
                let op_pos = self.pos;
                self.pos += 1;
                self.expect(b'(')?;
                let mut args = vec![self.formula()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    args.push(self.formula()?);
                }
                self.expect(b')')?;
                let arity_err = |expected: &str| LogicError::Syntax {
                    position: op_pos,
                    message: format!("`{}` takes {expected}, got {}", op as char, args.len()),
                };
                match op {
                    b'!' if args.len() == 1 => Ok(Formula::not(args.pop().unwrap())),
                    b'!' => Err(arity_err("exactly one argument")),
                    b'&' => Ok(Formula::And(args)),
                    b'|' => Ok(Formula::Or(args)),
                    _ if args.len() != 2 => Err(arity_err("exactly two arguments")),
                    _ => {
                        let b = args.pop().unwrap();
                        let a = args.pop().unwrap();
                        Ok(if op == b'>' { Formula::implies(a, b) } else { Formula::iff(a, b) })
                    }
                }
            }
            Some(c) if is_name_byte(c) => {
                let start = self.pos;
                while self.pos < self.src.len() && is_name_byte(self.src[self.pos]) {
                    self.pos += 1;
                }
                // only ASCII bytes were consumed, so this slice is valid UTF-8
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                self.scenario
                    .var(name)
                    .map(Formula::Atom)
                    .ok_or_else(|| LogicError::UndeclaredAtom { name: name.to_string(), position: start })
            }
            Some(_) => Err(self.error("expected a variable name or connective")),
        }
    }
}
