//! Tiny arithmetic grammar for coefficient rules and sine-combination
//! targets.
//!
//! Coefficient rules like `d_n = 1/n` define the per-mode mismatch (or
//! target coefficient) as an expression in the mode index `n`, with
//! `+ − * / ^`, `exp(...)`, `pi`, and parentheses (the unicode `×`, `÷`,
//! `−` spellings are accepted too). Sine targets like
//! `sin(pi x)` or `0.5 sin(2 pi x) + sin(3 pi x)` are linear combinations
//! of plain sines; `sin(kπx) = e_k/√2` in the orthonormal basis.

use crate::error::{Error, Result};

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

fn lex(input: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' | '×' | '·' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' | '÷' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            'π' => {
                tokens.push(Token::Ident("pi".into()));
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = text
                    .parse()
                    .map_err(|_| Error::parse(input, format!("bad number \"{text}\"")))?;
                tokens.push(Token::Num(value));
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token::Ident(chars[start..i].iter().collect()));
            }
            _ => return Err(Error::parse(input, format!("unexpected character '{c}'"))),
        }
    }
    Ok(tokens)
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Num(f64),
    Var,
    Pi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    fn eval(&self, n: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => n,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(n),
            Expr::Add(a, b) => a.eval(n) + b.eval(n),
            Expr::Sub(a, b) => a.eval(n) - b.eval(n),
            Expr::Mul(a, b) => a.eval(n) * b.eval(n),
            Expr::Div(a, b) => a.eval(n) / b.eval(n),
            Expr::Pow(a, b) => a.eval(n).powf(b.eval(n)),
            Expr::Exp(e) => e.eval(n).exp(),
        }
    }
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        match self.next() {
            Some(found) if found == t => Ok(()),
            found => Err(Error::parse(
                self.input,
                format!("expected {t:?}, found {found:?}"),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Token::Slash) => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // right-associative power binds tighter than unary minus on the left
    fn factor(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.next();
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::Ident(name)) => match name.as_str() {
                "n" => Ok(Expr::Var),
                "pi" => Ok(Expr::Pi),
                "exp" => {
                    self.expect(Token::LParen)?;
                    let inner = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::Exp(Box::new(inner)))
                }
                other => Err(Error::parse(
                    self.input,
                    format!("unknown identifier \"{other}\""),
                )),
            },
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            found => Err(Error::parse(
                self.input,
                format!("expected a value, found {found:?}"),
            )),
        }
    }
}

/// A per-mode coefficient rule `n ↦ value`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRule {
    expr: Expr,
    source: String,
}

impl CoefficientRule {
    pub fn evaluate(&self, n: usize) -> f64 {
        self.expr.eval(n as f64)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Parse a coefficient rule; an optional `<name> =` prefix (e.g. `d_n =`)
/// is stripped.
pub fn parse_rule(input: &str) -> Result<CoefficientRule> {
    let body = match input.split_once('=') {
        Some((lhs, rhs)) if lhs.trim().chars().all(|c| c.is_alphanumeric() || c == '_') => rhs,
        _ => input,
    };
    let tokens = lex(body)?;
    let mut parser = Parser {
        input,
        tokens,
        pos: 0,
    };
    let expr = parser.expr()?;
    if parser.peek().is_some() {
        return Err(Error::parse(input, "trailing tokens after expression"));
    }
    Ok(CoefficientRule {
        expr,
        source: input.trim().to_string(),
    })
}

/// Parse a sine combination like `sin(pi x)` or
/// `0.5 sin(2 pi x) - sin(3 pi x)` into `(k, amplitude)` pairs, the
/// amplitude applying to the plain (non-normalized) `sin(kπx)`.
pub fn parse_sine_target(input: &str) -> Result<Vec<(usize, f64)>> {
    let tokens = lex(input)?;
    let mut parser = Parser {
        input,
        tokens,
        pos: 0,
    };
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut first = true;
    loop {
        let mut sign = 1.0;
        match parser.peek() {
            None if !first => break,
            Some(Token::Plus) if !first => {
                parser.next();
            }
            Some(Token::Minus) => {
                parser.next();
                sign = -1.0;
            }
            _ if first => {}
            found => {
                return Err(Error::parse(
                    input,
                    format!("expected '+' or '-' between terms, found {found:?}"),
                ))
            }
        }
        first = false;
        let mut amplitude = sign;
        if let Some(Token::Num(v)) = parser.peek() {
            amplitude *= v;
            parser.next();
            if let Some(Token::Star) = parser.peek() {
                parser.next();
            }
        }
        match parser.next() {
            Some(Token::Ident(name)) if name == "sin" => {}
            found => {
                return Err(Error::parse(
                    input,
                    format!("expected \"sin\", found {found:?}"),
                ))
            }
        }
        parser.expect(Token::LParen)?;
        let mut k = 1usize;
        if let Some(Token::Num(v)) = parser.peek().cloned() {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(Error::parse(input, format!("mode multiple {v} must be a positive integer")));
            }
            k = v as usize;
            parser.next();
            if let Some(Token::Star) = parser.peek() {
                parser.next();
            }
        }
        match parser.next() {
            Some(Token::Ident(name)) if name == "pi" => {}
            found => {
                return Err(Error::parse(
                    input,
                    format!("expected \"pi\", found {found:?}"),
                ))
            }
        }
        if let Some(Token::Star) = parser.peek() {
            parser.next();
        }
        match parser.next() {
            Some(Token::Ident(name)) if name == "x" => {}
            found => {
                return Err(Error::parse(
                    input,
                    format!("expected \"x\", found {found:?}"),
                ))
            }
        }
        parser.expect(Token::RParen)?;
        terms.push((k, amplitude));
        if parser.peek().is_none() {
            break;
        }
    }
    if terms.is_empty() {
        return Err(Error::parse(input, "no sine terms found"));
    }
    Ok(terms)
}
