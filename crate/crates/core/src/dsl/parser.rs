//! Recursive-descent parser for surface expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'X' | 'Y' | 'pi' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents must be constant; `-X^2` parses as `-(X^2)`.

use super::expr::{BinOp, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent at byte {offset} depends on X or Y; rewrite a^b as exp(b*ln(a))")]
    NonConstantExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonConstantExponent { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: format!("expected {wanted}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        if !exponent.is_constant() {
            return Err(ParseError::NonConstantExponent { offset: at });
        }
        Ok(Expr::binary(BinOp::Pow, base, exponent))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "X" => return Ok(Expr::Var(Var::X)),
                    "Y" => return Ok(Expr::Var(Var::Y)),
                    "pi" => return Ok(Expr::Pi),
                    _ => {}
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError::UnknownIdentifier { offset: at, name });
                };
                self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::call(func, arg))
            }
            _ => Err(self.unexpected("a number, variable, function or `(`")),
        }
    }
}

/// Parses an infix expression over `X`, `Y` and `pi`.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::Var(Var::X)
    }

    fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    #[test]
    fn ellipsoid_component() {
        let e = parse("sin(pi*X)*cos(2*pi*Y)").unwrap();
        let expected = Expr::binary(
            BinOp::Mul,
            Expr::call(Func::Sin, Expr::binary(BinOp::Mul, Expr::Pi, x())),
            Expr::call(
                Func::Cos,
                Expr::binary(
                    BinOp::Mul,
                    Expr::binary(BinOp::Mul, Expr::num(2.0), Expr::Pi),
                    y(),
                ),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn bare_variable() {
        assert_eq!(parse("X").unwrap(), x());
        assert_eq!(parse("  Y ").unwrap(), y());
    }

    #[test]
    fn catenoid_radius() {
        let e = parse("2*cosh(pi*X - pi/2)").unwrap();
        let expected = Expr::binary(
            BinOp::Mul,
            Expr::num(2.0),
            Expr::call(
                Func::Cosh,
                Expr::binary(
                    BinOp::Sub,
                    Expr::binary(BinOp::Mul, Expr::Pi, x()),
                    Expr::binary(BinOp::Div, Expr::Pi, Expr::num(2.0)),
                ),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_negation() {
        let e = parse("-X^2^3").unwrap();
        let expected = Expr::Neg(Box::new(Expr::binary(
            BinOp::Pow,
            x(),
            Expr::binary(BinOp::Pow, Expr::num(2.0), Expr::num(3.0)),
        )));
        assert_eq!(e, expected);
        assert_eq!(
            parse("X^-1").unwrap(),
            Expr::binary(BinOp::Pow, x(), Expr::Neg(Box::new(Expr::num(1.0))))
        );
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::num(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Expr::num(0.25));
        assert_eq!(parse("2E2").unwrap(), Expr::num(200.0));
    }

    #[test]
    fn error_offsets() {
        assert_eq!(parse("X + * Y").unwrap_err().offset(), 4);
        assert_eq!(
            parse("sin(X) + foo(Y)").unwrap_err(),
            ParseError::UnknownIdentifier {
                offset: 9,
                name: "foo".into()
            }
        );
        assert_eq!(
            parse("X^Y").unwrap_err(),
            ParseError::NonConstantExponent { offset: 2 }
        );
        assert!(matches!(
            parse("(X + 1"),
            Err(ParseError::Syntax { offset: 6, .. })
        ));
        assert!(matches!(parse("2 $ X"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("2X"), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("x"), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn constant_exponent_expressions_are_allowed() {
        let e = parse("X^(1/2) + Y^pi").unwrap();
        assert!(e.eval_jet(4.0, 1.0).is_ok());
    }

    #[test]
    fn print_then_parse_is_identity() {
        for src in [
            "sin(pi*X)*cos(2*pi*Y)",
            "-X^2 + 3/(Y - 1)",
            "sech(2*pi*(X-Y))^4",
            "arcsinh(2*pi*X)/(4*pi) + Y",
            "0.1 - -X",
        ] {
            let a = parse(src).unwrap();
            let b = parse(&a.to_string()).unwrap();
            assert_eq!(a, b, "{src} -> {a}");
        }
    }
}
