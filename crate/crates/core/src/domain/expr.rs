//! Spatial-profile expression language.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := power (('*' | '/') power)*
//! power  := unary ('^' power)?          right-associative
//! unary  := '-' unary | atom            unary minus binds tighter than '^'
//! atom   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | log | sqrt | abs
//! ```

use crate::error::{Error, EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

/// Abstract syntax tree of a spatial profile in the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileExpr {
    Literal(f64),
    Var,
    Pi,
    Neg(Box<ProfileExpr>),
    Binary(BinaryOp, Box<ProfileExpr>, Box<ProfileExpr>),
    Call(Func, Box<ProfileExpr>),
}

impl ProfileExpr {
    /// Evaluate at a point, reporting domain errors instead of NaN/inf.
    pub fn eval(&self, x: f64) -> std::result::Result<f64, EvalError> {
        let v = match self {
            ProfileExpr::Literal(c) => *c,
            ProfileExpr::Var => x,
            ProfileExpr::Pi => std::f64::consts::PI,
            ProfileExpr::Neg(e) => -e.eval(x)?,
            ProfileExpr::Binary(op, l, r) => {
                let a = l.eval(x)?;
                let b = r.eval(x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinaryOp::Pow => a.powf(b),
                }
            }
            ProfileExpr::Call(f, e) => {
                let a = e.eval(x)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::LogNonPositive);
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::SqrtNegative);
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ProfileExpr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            ProfileExpr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            ProfileExpr::Binary(BinaryOp::Pow, ..) => 3,
            ProfileExpr::Neg(_) => 4,
            _ => 5,
        }
    }
}

/// Minimal-parenthesis printer; `parse_profile(pretty_print(e))` rebuilds `e`.
pub fn pretty_print(expr: &ProfileExpr) -> String {
    let mut out = String::new();
    print_expr(expr, &mut out);
    out
}

fn print_child(child: &ProfileExpr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        print_expr(child, out);
        out.push(')');
    } else {
        print_expr(child, out);
    }
}

fn print_expr(expr: &ProfileExpr, out: &mut String) {
    match expr {
        ProfileExpr::Literal(c) => out.push_str(&format!("{c}")),
        ProfileExpr::Var => out.push('x'),
        ProfileExpr::Pi => out.push_str("pi"),
        ProfileExpr::Neg(e) => {
            out.push('-');
            // any binary child rebinds against the tight unary minus
            print_child(e, e.precedence() < 4, out);
        }
        ProfileExpr::Binary(op, l, r) => {
            let p = expr.precedence();
            let (sym, right_assoc) = match op {
                BinaryOp::Add => ("+", false),
                BinaryOp::Sub => ("-", false),
                BinaryOp::Mul => ("*", false),
                BinaryOp::Div => ("/", false),
                BinaryOp::Pow => ("^", true),
            };
            if right_assoc {
                print_child(l, l.precedence() <= p, out);
                out.push_str(sym);
                print_child(r, r.precedence() < p, out);
            } else {
                print_child(l, l.precedence() < p, out);
                out.push_str(sym);
                print_child(r, r.precedence() <= p, out);
            }
        }
        ProfileExpr::Call(f, e) => {
            out.push_str(f.name());
            out.push('(');
            print_expr(e, out);
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
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

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token with its starting byte offset; None at end of input.
    fn next(&mut self) -> Result<Option<(Token, usize)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => return self.lex_number(start).map(Some),
            b'a'..=b'z' | b'A'..=b'Z' => {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii range")
                    .to_string();
                return Ok(Some((Token::Ident(name), start)));
            }
            other => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }

    fn lex_number(&mut self, start: usize) -> Result<(Token, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `e` belonged to something else; back off
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii range");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::Syntax {
                offset: start,
                message: format!("number literal `{text}` overflows"),
            });
        }
        Ok((Token::Num(value), start))
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.cursor)
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<ProfileExpr> {
        let mut lhs = self.term()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ProfileExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ProfileExpr> {
        let mut lhs = self.power()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.power()?;
            lhs = ProfileExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<ProfileExpr> {
        let base = self.unary()?;
        if let Some((Token::Caret, _)) = self.peek() {
            self.bump();
            let exp = self.power()?;
            return Ok(ProfileExpr::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exp),
            ));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ProfileExpr> {
        if let Some((Token::Minus, _)) = self.peek() {
            self.bump();
            let inner = self.unary()?;
            return Ok(ProfileExpr::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ProfileExpr> {
        let offset = self.here();
        let Some((tok, _)) = self.bump() else {
            return Err(Error::Syntax {
                offset,
                message: "expected a value".into(),
            });
        };
        match tok {
            Token::Num(v) => Ok(ProfileExpr::Literal(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "x" => Ok(ProfileExpr::Var),
                "pi" => Ok(ProfileExpr::Pi),
                "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        "sqrt" => Func::Sqrt,
                        _ => Func::Abs,
                    };
                    match self.bump() {
                        Some((Token::LParen, _)) => {}
                        other => {
                            return Err(Error::Syntax {
                                offset: other.map(|(_, o)| o).unwrap_or(self.end),
                                message: format!("expected `(` after `{name}`"),
                            })
                        }
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(ProfileExpr::Call(f, Box::new(arg)))
                }
                _ => Err(Error::UnknownIdentifier { name, offset }),
            },
            other => Err(Error::Syntax {
                offset,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.bump() {
            Some((Token::RParen, _)) => Ok(()),
            other => Err(Error::Syntax {
                offset: other.map(|(_, o)| o).unwrap_or(self.end),
                message: "expected `)`".into(),
            }),
        }
    }
}

/// Parse a profile expression; reports syntax errors with byte offsets.
pub fn parse_profile(text: &str) -> Result<ProfileExpr> {
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next()? {
        tokens.push(t);
    }
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end: text.len(),
    };
    let expr = parser.expr()?;
    if let Some((tok, offset)) = parser.peek() {
        return Err(Error::Syntax {
            offset: *offset,
            message: format!("unexpected trailing token {tok:?}"),
        });
    }
    Ok(expr)
}
