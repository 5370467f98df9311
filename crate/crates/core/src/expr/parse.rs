use thiserror::Error;

use super::{BinOp, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: found {found}, expected one of {}", .expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("number `{text}` at offset {offset} is not a finite value")]
    NumberOutOfRange { text: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NumberOutOfRange { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Number(&'a str),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Invalid(char),
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "\"+\"".into(),
            Tok::Minus => "\"-\"".into(),
            Tok::Star => "\"*\"".into(),
            Tok::Slash => "\"/\"".into(),
            Tok::Caret => "\"^\"".into(),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::Invalid(c) => format!("character {c:?}"),
            Tok::End => "end of input".into(),
        }
    }
}

const EXPECT_OPERAND: &[&str] = &["number", "identifier", "\"(\"", "\"-\""];
const EXPECT_OPERATOR: &[&str] = &["\"+\"", "\"-\"", "\"*\"", "\"/\"", "\"^\"", "end of input"];
const EXPECT_OPERATOR_OR_CLOSE: &[&str] = &["\"+\"", "\"-\"", "\"*\"", "\"/\"", "\"^\"", "\")\""];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    /// Returns the next token and its byte offset.
    fn next(&mut self) -> (Tok<'a>, usize) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.src[start..].chars().next() else {
            return (Tok::End, start);
        };
        let single = |tok| (tok, start);
        self.pos += c.len_utf8();
        match c {
            '+' => single(Tok::Plus),
            '-' => single(Tok::Minus),
            '*' => single(Tok::Star),
            '/' => single(Tok::Slash),
            '^' => single(Tok::Caret),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            c if c.is_ascii_digit() || (c == '.' && self.peek_digit()) => {
                self.pos = start;
                self.number();
                (Tok::Number(&self.src[start..self.pos]), start)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                (Tok::Ident(&self.src[start..self.pos]), start)
            }
            other => single(Tok::Invalid(other)),
        }
    }

    fn peek_digit(&self) -> bool {
        self.src
            .as_bytes()
            .get(self.pos)
            .is_some_and(u8::is_ascii_digit)
    }

    fn eat_digits(&mut self) {
        while self.peek_digit() {
            self.pos += 1;
        }
    }

    // digits [ "." digits ] [ ("e"|"E") ["+"|"-"] digits ]
    fn number(&mut self) {
        let bytes = self.src.as_bytes();
        self.eat_digits();
        if bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.eat_digits();
        }
        if matches!(bytes.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.peek_digit() {
                self.eat_digits();
            } else {
                // `2e` is the number 2 followed by an identifier.
                self.pos = save;
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok<'a>,
    offset: usize,
}

/// Parses an expression in `x`, `y`, `z`.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer {
        src: source,
        pos: 0,
    };
    let (tok, offset) = lexer.next();
    let mut p = Parser { lexer, tok, offset };
    let e = p.expr()?;
    match p.tok {
        Tok::End => Ok(e),
        _ => Err(p.unexpected(EXPECT_OPERATOR)),
    }
}

impl<'a> Parser<'a> {
    fn bump(&mut self) {
        let (tok, offset) = self.lexer.next();
        self.tok = tok;
        self.offset = offset;
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset,
            found: self.tok.describe(),
            expected: expected.to_vec(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut negations = 0usize;
        while self.tok == Tok::Minus {
            negations += 1;
            self.bump();
        }
        let mut e = self.power()?;
        for _ in 0..negations {
            e = Expr::Neg(Box::new(e));
        }
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Number(text) => {
                let value: f64 = text.parse().map_err(|_| self.unexpected(EXPECT_OPERAND))?;
                if !value.is_finite() {
                    return Err(ParseError::NumberOutOfRange {
                        text: text.to_string(),
                        offset: self.offset,
                    });
                }
                self.bump();
                Ok(Expr::Const(value))
            }
            Tok::Ident(name) => {
                let at = self.offset;
                if let Some(v) = Var::from_name(name) {
                    self.bump();
                    return Ok(Expr::Var(v));
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(ParseError::UnknownIdentifier {
                        name: name.to_string(),
                        offset: at,
                    });
                };
                self.bump();
                if self.tok != Tok::LParen {
                    return Err(self.unexpected(&["\"(\""]));
                }
                self.bump();
                let arg = self.expr()?;
                self.close_paren()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            _ => Err(self.unexpected(EXPECT_OPERAND)),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        if self.tok != Tok::RParen {
            return Err(self.unexpected(EXPECT_OPERATOR_OR_CLOSE));
        }
        self.bump();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    #[test]
    fn sum_of_power_and_product() {
        let e = parse("x^2 + y*z").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Add,
                Expr::binary(BinOp::Pow, var(Var::X), Expr::Const(2.0)),
                Expr::binary(BinOp::Mul, var(Var::Y), var(Var::Z)),
            )
        );
    }

    #[test]
    fn unary_minus_binds_below_power() {
        let e = parse("-x^2").unwrap();
        assert_eq!(
            e,
            Expr::Neg(Box::new(Expr::binary(
                BinOp::Pow,
                var(Var::X),
                Expr::Const(2.0)
            )))
        );
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("x^y^z").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Pow,
                var(Var::X),
                Expr::binary(BinOp::Pow, var(Var::Y), var(Var::Z))
            )
        );
        // exponent may carry its own unary minus
        assert_eq!(
            parse("x^-2").unwrap(),
            Expr::binary(
                BinOp::Pow,
                var(Var::X),
                Expr::Neg(Box::new(Expr::Const(2.0)))
            )
        );
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse("x - y - z").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Sub,
                Expr::binary(BinOp::Sub, var(Var::X), var(Var::Y)),
                var(Var::Z)
            )
        );
    }

    #[test]
    fn doubled_plus_is_syntax_error_at_offset_4() {
        let err = parse("x + + y").unwrap_err();
        match &err {
            ParseError::Syntax {
                offset, expected, ..
            } => {
                assert_eq!(*offset, 4);
                assert!(expected.contains(&"number"));
                assert!(expected.contains(&"\"(\""));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dangling_minus_reports_end_of_input() {
        let err = parse("x - -").unwrap_err();
        assert_eq!(err.offset(), 5);
        assert!(err.to_string().contains("end of input"));
    }

    #[test]
    fn unknown_identifiers_are_rejected() {
        assert_eq!(
            parse("x + w").unwrap_err(),
            ParseError::UnknownIdentifier {
                name: "w".into(),
                offset: 4
            }
        );
        assert!(matches!(
            parse("pi * x").unwrap_err(),
            ParseError::UnknownIdentifier { .. }
        ));
    }

    #[test]
    fn function_names_require_an_argument_list() {
        let err = parse("exp + 1").unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(parse("exp(x").is_err());
        assert!(parse("x(1)").is_err());
    }

    #[test]
    fn numbers_with_fraction_and_exponent() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Expr::Const(0.25));
        assert_eq!(parse("3E2").unwrap(), Expr::Const(300.0));
        assert!(matches!(
            parse("1e999").unwrap_err(),
            ParseError::NumberOutOfRange { .. }
        ));
    }

    #[test]
    fn invalid_characters_and_empty_input() {
        assert_eq!(parse("x $ y").unwrap_err().offset(), 2);
        assert_eq!(parse("").unwrap_err().offset(), 0);
        assert_eq!(parse("(x + y").unwrap_err().offset(), 6);
        assert_eq!(parse("x)").unwrap_err().offset(), 1);
    }
}
