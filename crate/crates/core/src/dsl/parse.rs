use std::collections::BTreeMap;

use super::ast::{BinOp, Expr, Vector};
use super::DslError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| DslError::Syntax {
                line: tl,
                col: tc,
                message: format!("malformed number `{text}`"),
            })?;
            Tok::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if "+-*/^(),".contains(c) {
            i += 1;
            Tok::Sym(c)
        } else {
            return Err(DslError::Syntax {
                line: tl,
                col: tc,
                message: format!("unexpected character `{c}`"),
            });
        };
        col += i - start;
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    n: usize,
    params: &'a BTreeMap<String, f64>,
}

type PResult<T> = Result<T, DslError>;

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn at_end(&self) -> bool {
        self.peek().tok == Tok::End
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn syntax<T>(&self, t: &Token, message: impl Into<String>) -> PResult<T> {
        Err(DslError::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self) -> PResult<T> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::End => self.syntax(&t, "unexpected end of input"),
            Tok::Num(v) => self.syntax(&t, format!("unexpected number {v}")),
            Tok::Ident(s) => self.syntax(&t, format!("unexpected identifier `{s}`")),
            Tok::Sym(c) => self.syntax(&t, format!("unexpected `{c}`")),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let at = self.peek().clone();
            let exponent = self.unary()?;
            return self.pow(base, exponent, &at);
        }
        Ok(base)
    }

    fn pow(&self, base: Expr, exponent: Expr, at: &Token) -> PResult<Expr> {
        if !exponent.is_constant() {
            return self.syntax(at, "exponent must be constant");
        }
        Ok(Expr::Pow(Box::new(base), Box::new(exponent)))
    }

    /// Parses the inside of a parenthesized group opened at `open`; an input
    /// that ends early is reported at the unclosed parenthesis.
    fn enclosed<T>(&mut self, open: &Token, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let inner = f(self);
        if self.at_end() && (inner.is_err() || self.peek().tok != Tok::Sym(')')) {
            return self.syntax(open, "unclosed `(`");
        }
        let v = inner?;
        if !self.eat(')') {
            return self.unexpected();
        }
        Ok(v)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::Sym('(') => self.enclosed(&t, |p| p.expr()),
            Tok::Ident(name) => {
                if self.peek().tok == Tok::Sym('(') {
                    let open = self.next();
                    return self.call(name, &t, &open);
                }
                self.identifier(name, &t)
            }
            _ => {
                self.pos -= usize::from(t.tok != Tok::End);
                self.unexpected()
            }
        }
    }

    fn identifier(&self, name: &str, t: &Token) -> PResult<Expr> {
        if let Some(v) = self.params.get(name) {
            return Ok(Expr::Param(name.to_string(), *v));
        }
        let mut chars = name.chars();
        let head = chars.next();
        let rest = chars.as_str();
        if let (Some(h @ ('x' | 'y')), true) = (head, !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())) {
            let vector = if h == 'x' { Vector::X } else { Vector::Y };
            return match rest.parse::<usize>() {
                Ok(i) if i >= 1 && i <= self.n => Ok(Expr::Coord(vector, i - 1)),
                _ => Err(DslError::IndexOutOfRange {
                    line: t.line,
                    col: t.col,
                    name: name.to_string(),
                    dimension: self.n,
                }),
            };
        }
        if name == "x" || name == "y" {
            return self.syntax(t, format!("vector `{name}` may only appear as an argument of dot or norm2"));
        }
        Err(DslError::UnknownIdentifier {
            line: t.line,
            col: t.col,
            name: name.to_string(),
        })
    }

    fn vector_arg(&mut self) -> PResult<Vector> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == "x" => Ok(Vector::X),
            Tok::Ident(s) if s == "y" => Ok(Vector::Y),
            Tok::End => self.syntax(&t, "unexpected end of input"),
            _ => self.syntax(&t, "expected `x` or `y`"),
        }
    }

    fn call(&mut self, name: &str, t: &Token, open: &Token) -> PResult<Expr> {
        let expected = match name {
            "sqrt" | "norm2" => 1,
            "pow" | "dot" => 2,
            _ => {
                return Err(DslError::UnknownIdentifier {
                    line: t.line,
                    col: t.col,
                    name: name.to_string(),
                })
            }
        };
        let vectors = matches!(name, "dot" | "norm2");
        let mut exprs = Vec::new();
        let mut vecs = Vec::new();
        let mut exponent_at = None;
        let count = self.enclosed(open, |p| {
            if p.peek().tok == Tok::Sym(')') {
                return Ok(0);
            }
            let mut count = 0;
            loop {
                if count == 1 && name == "pow" {
                    exponent_at = Some(p.peek().clone());
                }
                if vectors {
                    vecs.push(p.vector_arg()?);
                } else {
                    exprs.push(p.expr()?);
                }
                count += 1;
                if !p.eat(',') {
                    return Ok(count);
                }
            }
        })?;
        if count != expected {
            return Err(DslError::Arity {
                line: t.line,
                col: t.col,
                name: name.to_string(),
                expected,
                found: count,
            });
        }
        let mut exprs = exprs.into_iter();
        match name {
            "sqrt" => Ok(Expr::Sqrt(Box::new(exprs.next().unwrap()))),
            "pow" => {
                let (base, exponent) = (exprs.next().unwrap(), exprs.next().unwrap());
                self.pow(base, exponent, exponent_at.as_ref().unwrap_or(t))
            }
            "dot" => Ok(Expr::Dot(vecs[0], vecs[1])),
            _ => Ok(Expr::Norm2(vecs[0])),
        }
    }
}

/// Parses a metric expression in dimension `n` with named constants `params`.
pub fn parse_metric(source: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Expr, DslError> {
    let mut p = Parser {
        toks: tokenize(source)?,
        pos: 0,
        n,
        params,
    };
    let e = p.expr()?;
    if !p.at_end() {
        return p.unexpected();
    }
    Ok(e)
}
