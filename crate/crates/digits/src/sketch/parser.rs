//! Recursive-descent parser for the sketch surface syntax.

use std::collections::HashSet;
use std::fmt;

use super::{BinOp, Expr, Hole, SketchAst, Stmt};

#[derive(Debug, Clone, thiserror::Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

const PUNCTS: &[&str] = &[
    "&&", "||", "<=", ">=", "==", "!=", "??", "(", ")", "{", "}", ";", ",", "=", "<", ">", "+",
    "-", "*", "/", "!",
];

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn skip_trivia(&mut self) {
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.bump();
            }
            // line comments
            if self.pos + 1 < self.src.len()
                && self.src[self.pos] == b'/'
                && self.src[self.pos + 1] == b'/'
            {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.bump();
                }
                continue;
            }
            break;
        }
    }

    fn next_token(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, line, col));
        }
        let c = self.src[self.pos];
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.bump();
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((Tok::Ident(s.to_string()), line, col));
        }
        if c.is_ascii_digit() || (c == b'.' && self.peek_digit_at(self.pos + 1)) {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_digit()
                    || self.src[self.pos] == b'.'
                    || self.src[self.pos] == b'e'
                    || self.src[self.pos] == b'E'
                    || ((self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                        && matches!(self.src[self.pos - 1], b'e' | b'E')))
            {
                self.bump();
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let v: f64 = s.parse().map_err(|_| ParseError {
                line,
                col,
                message: format!("malformed number {s:?}"),
            })?;
            return Ok((Tok::Num(v), line, col));
        }
        for p in PUNCTS {
            if self.src[self.pos..].starts_with(p.as_bytes()) {
                for _ in 0..p.len() {
                    self.bump();
                }
                return Ok((Tok::Punct(p), line, col));
            }
        }
        Err(ParseError {
            line,
            col,
            message: format!("unexpected character {:?}", c as char),
        })
    }

    fn peek_digit_at(&self, i: usize) -> bool {
        i < self.src.len() && self.src[i].is_ascii_digit()
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    holes: Vec<Hole>,
    declared: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        if *self.peek() == Tok::Punct(p) {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn eat_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {other}")),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.advance();
                Ok(())
            }
            other => self.err(format!("expected `{kw}`, found {other}")),
        }
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_number(&mut self) -> Result<f64, ParseError> {
        let neg = if *self.peek() == Tok::Punct("-") {
            self.advance();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v) => {
                self.advance();
                Ok(if neg { -v } else { v })
            }
            other => self.err(format!("expected number, found {other}")),
        }
    }

    fn is_type_keyword(&self) -> bool {
        self.peek_keyword("double") || self.peek_keyword("int")
    }

    fn eat_type(&mut self) -> Result<(), ParseError> {
        if self.is_type_keyword() {
            self.advance();
            Ok(())
        } else {
            self.err(format!("expected type keyword, found {}", self.peek()))
        }
    }

    fn parse_program(&mut self) -> Result<SketchAst, ParseError> {
        self.eat_type()?;
        let name = self.eat_ident()?;
        self.eat_punct("(")?;
        let mut inputs = Vec::new();
        if *self.peek() != Tok::Punct(")") {
            loop {
                self.eat_type()?;
                inputs.push(self.eat_ident()?);
                if *self.peek() == Tok::Punct(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.eat_punct(")")?;
        for i in &inputs {
            self.declared.insert(i.clone());
        }
        let body = self.parse_block()?;
        if *self.peek() != Tok::Eof {
            return self.err(format!("trailing input after function body: {}", self.peek()));
        }
        if !returns_on_all_tails(&body) {
            return self.err("function body must end in a return statement on every path");
        }
        Ok(SketchAst {
            name,
            inputs,
            body,
            holes: std::mem::take(&mut self.holes),
        })
    }

    fn parse_block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.eat_punct("{")?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::Punct("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unterminated block");
            }
            stmts.push(self.parse_stmt()?);
        }
        self.eat_punct("}")?;
        Ok(stmts)
    }

    fn parse_stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.peek_keyword("if") {
            return self.parse_if();
        }
        if self.peek_keyword("for") {
            return self.parse_for();
        }
        if self.peek_keyword("assert") {
            self.advance();
            self.eat_punct("(")?;
            let event = self.parse_expr()?;
            self.eat_punct(";")?;
            let theta = self.eat_number()?;
            if !(0.0..=1.0).contains(&theta) {
                return self.err(format!("assert threshold {theta} outside [0, 1]"));
            }
            self.eat_punct(")")?;
            self.eat_punct(";")?;
            return Ok(Stmt::Assert { event, theta });
        }
        if self.peek_keyword("return") {
            self.advance();
            let e = self.parse_expr()?;
            match &e {
                Expr::Num(v) if *v == 0.0 || *v == 1.0 => {}
                Expr::Var(_) => {}
                _ => {
                    return self.err(
                        "return value must be a variable or the literal 0 or 1 (Boolean output)",
                    )
                }
            }
            self.check_vars(&e)?;
            self.eat_punct(";")?;
            return Ok(Stmt::Return(e));
        }
        if self.is_type_keyword() {
            self.advance();
            let name = self.eat_ident()?;
            self.eat_punct("=")?;
            let init = self.parse_expr()?;
            self.check_vars(&init)?;
            self.eat_punct(";")?;
            self.declared.insert(name.clone());
            return Ok(Stmt::Decl { name, init });
        }
        // bare assignment
        let name = self.eat_ident()?;
        if !self.declared.contains(&name) {
            return self.err(format!("assignment to undeclared variable `{name}`"));
        }
        self.eat_punct("=")?;
        let value = self.parse_expr()?;
        self.check_vars(&value)?;
        self.eat_punct(";")?;
        Ok(Stmt::Assign { name, value })
    }

    fn parse_if(&mut self) -> Result<Stmt, ParseError> {
        self.eat_keyword("if")?;
        self.eat_punct("(")?;
        let cond = self.parse_expr()?;
        self.check_vars(&cond)?;
        self.eat_punct(")")?;
        let then_branch = self.parse_block()?;
        let else_branch = if self.peek_keyword("else") {
            self.advance();
            if self.peek_keyword("if") {
                vec![self.parse_if()?]
            } else {
                self.parse_block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If {
            cond,
            then_branch,
            else_branch,
        })
    }

    fn parse_for(&mut self) -> Result<Stmt, ParseError> {
        self.eat_keyword("for")?;
        self.eat_punct("(")?;
        self.eat_keyword("int")?;
        let var = self.eat_ident()?;
        self.eat_punct("=")?;
        let start = self.eat_number()?;
        if start != 0.0 {
            return self.err("loop counter must start at 0");
        }
        self.eat_punct(";")?;
        let v2 = self.eat_ident()?;
        self.eat_punct("<")?;
        let bound = match self.peek().clone() {
            Tok::Num(v) if v >= 0.0 && v == v.trunc() => {
                self.advance();
                v as u32
            }
            other => {
                return self.err(format!("loop bound must be a constant integer, found {other}"))
            }
        };
        self.eat_punct(";")?;
        let v3 = self.eat_ident()?;
        self.eat_punct("=")?;
        let v4 = self.eat_ident()?;
        self.eat_punct("+")?;
        match self.peek().clone() {
            Tok::Num(v) if v == 1.0 => {
                self.advance();
            }
            other => return self.err(format!("loop increment must be `+ 1`, found {other}")),
        }
        self.eat_punct(")")?;
        if v2 != var || v3 != var || v4 != var {
            return self.err("loop header must use a single counter variable");
        }
        let newly_declared = self.declared.insert(var.clone());
        let body = self.parse_block()?;
        if newly_declared {
            self.declared.remove(&var);
        }
        Ok(Stmt::For { var, count: bound, body })
    }

    fn check_vars(&self, e: &Expr) -> Result<(), ParseError> {
        match e {
            Expr::Var(name) if !self.declared.contains(name) => {
                self.err(format!("unknown identifier `{name}`"))
            }
            Expr::Num(_) | Expr::Var(_) | Expr::Hole(_) => Ok(()),
            Expr::Neg(a) | Expr::Not(a) | Expr::Abs(a) => self.check_vars(a),
            Expr::Bin(_, a, b) => {
                self.check_vars(a)?;
                self.check_vars(b)
            }
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_and()?;
        while *self.peek() == Tok::Punct("||") {
            self.advance();
            let rhs = self.parse_and()?;
            lhs = Expr::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_cmp()?;
        while *self.peek() == Tok::Punct("&&") {
            self.advance();
            let rhs = self.parse_cmp()?;
            lhs = Expr::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_add()?;
        let op = match self.peek() {
            Tok::Punct("<") => BinOp::Lt,
            Tok::Punct("<=") => BinOp::Le,
            Tok::Punct(">") => BinOp::Gt,
            Tok::Punct(">=") => BinOp::Ge,
            Tok::Punct("==") => BinOp::Eq,
            Tok::Punct("!=") => BinOp::Ne,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.parse_add()?;
        Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn parse_add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => BinOp::Add,
                Tok::Punct("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.parse_mul()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("*") => BinOp::Mul,
                Tok::Punct("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.parse_unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Punct("-") => {
                self.advance();
                Ok(Expr::Neg(Box::new(self.parse_unary()?)))
            }
            Tok::Punct("!") => {
                self.advance();
                Ok(Expr::Not(Box::new(self.parse_unary()?)))
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.advance();
                Ok(Expr::Num(v))
            }
            Tok::Punct("(") => {
                self.advance();
                let e = self.parse_expr()?;
                self.eat_punct(")")?;
                Ok(e)
            }
            Tok::Punct("??") => {
                self.advance();
                self.eat_punct("(")?;
                let lo = self.eat_number()?;
                self.eat_punct(",")?;
                let hi = self.eat_number()?;
                self.eat_punct(")")?;
                if lo > hi {
                    return self.err(format!("hole range [{lo}, {hi}] has lo > hi"));
                }
                let index = self.holes.len();
                self.holes.push(Hole { index, lo, hi });
                Ok(Expr::Hole(index))
            }
            Tok::Ident(name) if name == "abs" => {
                self.advance();
                self.eat_punct("(")?;
                let e = self.parse_expr()?;
                self.eat_punct(")")?;
                Ok(Expr::Abs(Box::new(e)))
            }
            Tok::Ident(name) => {
                self.advance();
                Ok(Expr::Var(name))
            }
            other => self.err(format!("expected expression, found {other}")),
        }
    }
}

fn returns_on_all_tails(stmts: &[Stmt]) -> bool {
    match stmts.last() {
        Some(Stmt::Return(_)) => true,
        Some(Stmt::If {
            then_branch,
            else_branch,
            ..
        }) => {
            !else_branch.is_empty()
                && returns_on_all_tails(then_branch)
                && returns_on_all_tails(else_branch)
        }
        _ => false,
    }
}

/// Parses sketch source text. Syntax and semantic errors carry line/column.
pub fn parse(source: &str) -> Result<SketchAst, ParseError> {
    let mut lex = Lexer::new(source);
    let mut toks = Vec::new();
    loop {
        let t = lex.next_token()?;
        let done = t.0 == Tok::Eof;
        toks.push(t);
        if done {
            break;
        }
    }
    let mut p = Parser {
        toks,
        pos: 0,
        holes: Vec::new(),
        declared: HashSet::new(),
    };
    p.parse_program()
}
