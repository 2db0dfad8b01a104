//! Recursive-descent parser for the polynomial expression grammar.
//!
//! Grammar (whitespace ignored):
//!   expr     := term (('+'|'-') term)*
//!   term     := factor ('*' factor)*
//!   factor   := '-' factor | power
//!   power    := primary ('^' exponent)?
//!   primary  := literal | variable | '(' expr ')'
//!   exponent := integer | '(' sign? integer ')'
//!
//! Literals are integers, exact decimals, or `p/q` fractions. Variables
//! are `x1..xn` and `y1..ym` for the supplied arity. Exponents must be
//! nonnegative integers.

use num_traits::One;

use super::{ExprError, PolyExpr};
use crate::rat::{parse_rat, Rat};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let b = self.src[self.pos];
            match b {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((Tok::Plus, start));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((Tok::Minus, start));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((Tok::Star, start));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((Tok::Caret, start));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((Tok::LParen, start));
                    self.pos += 1;
                }
                b')' => {
                    out.push((Tok::RParen, start));
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    let text = self.lex_number()?;
                    let value = parse_rat(&text).ok_or(ExprError::Syntax {
                        position: start,
                        message: format!("bad numeric literal `{text}`"),
                    })?;
                    out.push((Tok::Number(value), start));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let mut end = self.pos + 1;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let name = std::str::from_utf8(&self.src[self.pos..end])
                        .expect("ascii ident")
                        .to_string();
                    self.pos = end;
                    out.push((Tok::Ident(name), start));
                }
                _ => {
                    return Err(ExprError::Syntax {
                        position: start,
                        message: format!("unexpected character `{}`", b as char),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Consumes digits, optionally followed by `.digits` (decimal) or
    /// `/digits` (fraction). Each form becomes one literal token.
    fn lex_number(&mut self) -> Result<String, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'.' || self.src[self.pos] == b'/')
        {
            let sep = self.src[self.pos];
            let after = self.pos + 1;
            if after >= self.src.len() || !self.src[after].is_ascii_digit() {
                return Err(ExprError::Syntax {
                    position: self.pos,
                    message: format!("digits expected after `{}`", sep as char),
                });
            }
            self.pos = after;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .to_string())
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    arity: (usize, usize),
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.idx)
            .map(|(_, p)| *p)
            .unwrap_or(self.len)
    }

    fn expr(&mut self) -> Result<PolyExpr, ExprError> {
        let mut acc = self.term()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc + &rhs;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc - &rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<PolyExpr, ExprError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some((Tok::Star, _))) {
            self.bump();
            let rhs = self.factor()?;
            acc = &acc * &rhs;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PolyExpr, ExprError> {
        if matches!(self.peek(), Some((Tok::Minus, _))) {
            self.bump();
            let inner = self.factor()?;
            return Ok(-&inner);
        }
        self.power()
    }

    fn power(&mut self) -> Result<PolyExpr, ExprError> {
        let base = self.primary()?;
        if matches!(self.peek(), Some((Tok::Caret, _))) {
            self.bump();
            let exp = self.exponent()?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    /// Integer exponent, optionally parenthesized and signed. Negative or
    /// non-integer exponents are rejected with their position.
    fn exponent(&mut self) -> Result<u32, ExprError> {
        let pos = self.here();
        let parenthesized = if matches!(self.peek(), Some((Tok::LParen, _))) {
            self.bump();
            true
        } else {
            false
        };
        let mut negative = false;
        match self.peek() {
            Some((Tok::Minus, _)) if parenthesized => {
                negative = true;
                self.bump();
            }
            Some((Tok::Plus, _)) if parenthesized => {
                self.bump();
            }
            _ => {}
        }
        let value = match self.bump() {
            Some((Tok::Number(v), npos)) => {
                if !v.is_integer() {
                    return Err(ExprError::BadExponent { position: npos });
                }
                if negative {
                    return Err(ExprError::BadExponent { position: pos });
                }
                let n = v.to_integer();
                u32::try_from(n).map_err(|_| ExprError::BadExponent { position: npos })?
            }
            Some((_, p)) => return Err(ExprError::BadExponent { position: p }),
            None => return Err(ExprError::BadExponent { position: pos }),
        };
        if parenthesized {
            match self.bump() {
                Some((Tok::RParen, _)) => {}
                Some((_, p)) => {
                    return Err(ExprError::Syntax {
                        position: p,
                        message: "`)` expected after exponent".into(),
                    })
                }
                None => {
                    return Err(ExprError::Syntax {
                        position: self.len,
                        message: "unclosed exponent parenthesis".into(),
                    })
                }
            }
        }
        Ok(value)
    }

    fn primary(&mut self) -> Result<PolyExpr, ExprError> {
        match self.bump() {
            Some((Tok::Number(v), _)) => Ok(PolyExpr::constant(self.arity, v)),
            Some((Tok::Ident(name), pos)) => self.variable(&name, pos),
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((_, p)) => Err(ExprError::Syntax {
                        position: p,
                        message: "`)` expected".into(),
                    }),
                    None => Err(ExprError::Syntax {
                        position: self.len,
                        message: "unclosed parenthesis".into(),
                    }),
                }
            }
            Some((tok, pos)) => Err(ExprError::Syntax {
                position: pos,
                message: format!("unexpected token `{tok:?}`"),
            }),
            None => Err(ExprError::Syntax {
                position: self.len,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn variable(&mut self, name: &str, pos: usize) -> Result<PolyExpr, ExprError> {
        let (n, m) = self.arity;
        let unknown = || ExprError::UnknownVariable {
            name: name.to_string(),
            position: pos,
            n,
            m,
        };
        let (block, digits) = name.split_at(1);
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if index == 0 {
            return Err(unknown());
        }
        let var = match block {
            "x" if index <= n => index - 1,
            "y" if index <= m => n + index - 1,
            _ => return Err(unknown()),
        };
        let mut p = PolyExpr::zero(self.arity);
        p = &p
            + &PolyExpr::from_terms(
                self.arity,
                [(super::Monomial::variable(n + m, var), Rat::one())],
            );
        Ok(p)
    }
}

/// Parses `text` as a polynomial in `x1..xn, y1..ym` and returns its
/// canonical expanded form.
pub fn parse_expr(text: &str, arity: (usize, usize)) -> Result<PolyExpr, ExprError> {
    let toks = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        toks,
        idx: 0,
        arity,
        len: text.len(),
    };
    let e = parser.expr()?;
    if let Some((tok, pos)) = parser.peek() {
        return Err(ExprError::Syntax {
            position: *pos,
            message: format!("trailing input starting with `{tok:?}`"),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    #[test]
    fn precedence_and_parentheses() {
        let a = parse_expr("2*x1+3*x1^2", (1, 0)).unwrap();
        let b = parse_expr("x1*(2+3*x1)", (1, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let a = parse_expr("-x1^2", (1, 0)).unwrap();
        let b = &(-&parse_expr("x1", (1, 0)).unwrap()) * &parse_expr("x1", (1, 0)).unwrap();
        assert_eq!(a, -&(-&b));
        assert_eq!(
            a.evaluate(&[rat(3)]).unwrap(),
            rat(-9)
        );
    }

    #[test]
    fn decimal_literals_are_exact() {
        let e = parse_expr("0.5*x1", (1, 0)).unwrap();
        assert_eq!(e.evaluate(&[rat(3)]).unwrap(), ratio(3, 2));
    }

    #[test]
    fn fraction_literals() {
        let e = parse_expr("1/3 + x1", (1, 0)).unwrap();
        assert_eq!(e.evaluate(&[ratio(2, 3)]).unwrap(), rat(1));
    }

    #[test]
    fn unknown_variables_are_rejected() {
        assert!(matches!(
            parse_expr("x2", (1, 1)),
            Err(ExprError::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse_expr("z1", (1, 1)),
            Err(ExprError::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse_expr("x0", (1, 1)),
            Err(ExprError::UnknownVariable { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_expr("x1 + + y1", (1, 1)) {
            Err(ExprError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(matches!(
            parse_expr("x1^(1/2)", (1, 0)),
            Err(ExprError::BadExponent { .. })
        ));
    }

    #[test]
    fn parenthesized_positive_exponent_ok() {
        let a = parse_expr("x1^(3)", (1, 0)).unwrap();
        let b = parse_expr("x1^3", (1, 0)).unwrap();
        assert_eq!(a, b);
    }
}
