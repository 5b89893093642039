use std::fmt;

use super::{BinOp, Expr, Func};

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    /// Found something other than what the grammar allows here.
    Syntax { expected: String, found: String },
    UnknownFunction(String),
    WrongArity {
        function: String,
        expected: usize,
        found: usize,
    },
    InvalidIdentifier(String),
}

/// Parse failure. `position` is the 1-based column (byte index + 1) of the
/// offending token; end-of-input reports one past the last byte.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => write!(
                f,
                "syntax error at offset {}: expected {expected}, found {found}",
                self.position
            ),
            ParseErrorKind::UnknownFunction(name) => {
                write!(f, "unknown function `{name}` at offset {}", self.position)
            }
            ParseErrorKind::WrongArity {
                function,
                expected,
                found,
            } => write!(
                f,
                "function `{function}` at offset {} takes {expected} argument(s), got {found}",
                self.position
            ),
            ParseErrorKind::InvalidIdentifier(name) => {
                write!(f, "invalid identifier `{name}` at offset {}", self.position)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
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
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
            let value = text.parse::<f64>().map_err(|_| ParseError {
                position: start + 1,
                kind: ParseErrorKind::Syntax {
                    expected: "number".into(),
                    found: format!("`{text}`"),
                },
            })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if b"+-*/^(),".contains(&c) {
            out.push((Tok::Op(c as char), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                position: i + 1,
                kind: ParseErrorKind::Syntax {
                    expected: "expression".into(),
                    found: format!("`{ch}`"),
                },
            });
        }
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
        self.toks[self.pos].1 + 1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.offset(),
            kind: ParseErrorKind::Syntax {
                expected: expected.to_string(),
                found: self.peek().describe(),
            },
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("\"{c}\"")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
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
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            Ok(Expr::binary(BinOp::Pow, base, exponent))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() != Tok::Op('(') {
                    return Ok(Expr::Var(name));
                }
                let func = Func::from_name(&name).ok_or_else(|| ParseError {
                    position: start,
                    kind: ParseErrorKind::UnknownFunction(name.clone()),
                })?;
                self.bump();
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Op(',') {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(')')?;
                if args.len() != func.arity() {
                    return Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::WrongArity {
                            function: name,
                            expected: func.arity(),
                            found: args.len(),
                        },
                    });
                }
                Ok(Expr::Call(func, args))
            }
            Tok::Op('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            _ => Err(self.error("number, identifier or \"(\"")),
        }
    }
}

/// Parses expression source text into a tree.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("operator or end of input"));
    }
    Ok(e)
}

/// Checks `name` against `[A-Za-z_][A-Za-z0-9_]*`.
pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Expr {
        Expr::var(name)
    }

    #[test]
    fn angular_momentum_tree() {
        let e = parse_expression("q1*p2 - q2*p1").unwrap();
        let expected = Expr::binary(
            BinOp::Sub,
            Expr::binary(BinOp::Mul, v("q1"), v("p2")),
            Expr::binary(BinOp::Mul, v("q2"), v("p1")),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn unary_minus_looser_than_power() {
        let e = parse_expression("-2^2").unwrap();
        assert_eq!(
            e,
            Expr::Neg(Box::new(Expr::binary(
                BinOp::Pow,
                Expr::Const(2.0),
                Expr::Const(2.0)
            )))
        );
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse_expression("a^b^c").unwrap();
        assert_eq!(
            e,
            Expr::binary(BinOp::Pow, v("a"), Expr::binary(BinOp::Pow, v("b"), v("c")))
        );
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(
            parse_expression(" sin ( x ) *2").unwrap(),
            parse_expression("sin(x)*2").unwrap()
        );
    }

    #[test]
    fn literals() {
        assert_eq!(parse_expression("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse_expression(".25").unwrap(), Expr::Const(0.25));
        assert_eq!(parse_expression("2E+2").unwrap(), Expr::Const(200.0));
    }

    #[test]
    fn unbalanced_parenthesis() {
        let err = parse_expression("sin(q1").unwrap_err();
        assert_eq!(err.position, 7);
        match err.kind {
            ParseErrorKind::Syntax { expected, .. } => assert_eq!(expected, "\")\""),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_function_and_arity() {
        let err = parse_expression("1 + foo(x)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("foo".into()));
        assert_eq!(err.position, 5);
        let err = parse_expression("atan2(x)").unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::WrongArity {
                expected: 2,
                found: 1,
                ..
            }
        ));
        assert!(parse_expression("sqrt(x, y)").is_err());
    }

    #[test]
    fn trailing_garbage() {
        assert!(parse_expression("x y").is_err());
        assert!(parse_expression("x $").is_err());
        assert!(parse_expression("").is_err());
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("qt_1"));
        assert!(is_identifier("_x"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier("a-b"));
        assert!(!is_identifier(""));
    }
}
