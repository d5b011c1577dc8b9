//! Parser for the accepted pure-Prolog subset.
//!
//! Grammar: facts, rules, and `:- entry Goal [: [Props]].` directives. Terms are
//! atoms, integers, variables, compounds and list sugar. Operators come from a
//! fixed table; cut, negation, disjunction, if-then-else and database updates
//! are rejected.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::program::{Builtin, Clause, ClauseId, EntryDecl, EntryProp, Program};
use super::term::{Term, Var, CONS, NIL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Atom(String),
    /// Atom immediately followed by `(`.
    Functor(String),
    Var(String),
    Int(i64),
    Open,
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    End,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Atom(a) => write!(f, "`{a}`"),
            Tok::Functor(a) => write!(f, "`{a}(`"),
            Tok::Var(v) => write!(f, "variable `{v}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Open => f.write_str("`(`"),
            Tok::Close => f.write_str("`)`"),
            Tok::OpenList => f.write_str("`[`"),
            Tok::CloseList => f.write_str("`]`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::End => f.write_str("end of clause"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn skip_layout(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                            None => {
                                return Err(ParseError {
                                    line,
                                    col,
                                    message: "unterminated block comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_layout()?;
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    col,
                });
                return Ok(out);
            };
            let tok = if c.is_ascii_digit() {
                let mut s = String::new();
                while let Some(d) = self.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    self.bump();
                }
                Tok::Int(s.parse().map_err(|_| self.error("integer literal out of range"))?)
            } else if c.is_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(d) = self.peek().filter(|d| d.is_alphanumeric() || *d == '_') {
                    s.push(d);
                    self.bump();
                }
                if c.is_uppercase() || c == '_' {
                    Tok::Var(s)
                } else {
                    self.name_token(s)
                }
            } else if c == '\'' {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('\'') if self.peek() == Some('\'') => {
                            self.bump();
                            s.push('\'');
                        }
                        Some('\'') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => s.push('\n'),
                            Some(e) => s.push(e),
                            None => return Err(self.error("unterminated quoted atom")),
                        },
                        Some(ch) => s.push(ch),
                        None => return Err(self.error("unterminated quoted atom")),
                    }
                }
                self.name_token(s)
            } else {
                match c {
                    '(' => {
                        self.bump();
                        Tok::Open
                    }
                    ')' => {
                        self.bump();
                        Tok::Close
                    }
                    '[' => {
                        self.bump();
                        if self.peek() == Some(']') {
                            self.bump();
                            self.name_token(NIL.to_string())
                        } else {
                            Tok::OpenList
                        }
                    }
                    ']' => {
                        self.bump();
                        Tok::CloseList
                    }
                    '|' => {
                        self.bump();
                        Tok::Bar
                    }
                    ',' => {
                        self.bump();
                        Tok::Comma
                    }
                    '!' => {
                        self.bump();
                        Tok::Atom("!".into())
                    }
                    ';' => {
                        self.bump();
                        Tok::Atom(";".into())
                    }
                    '.' if self
                        .peek_at(1)
                        .is_none_or(|n| n.is_whitespace() || n == '%') =>
                    {
                        self.bump();
                        Tok::End
                    }
                    c if SYMBOL_CHARS.contains(c) => {
                        let mut s = String::new();
                        while let Some(d) = self.peek().filter(|d| SYMBOL_CHARS.contains(*d)) {
                            s.push(d);
                            self.bump();
                        }
                        self.name_token(s)
                    }
                    other => return Err(self.error(format!("unexpected character `{other}`"))),
                }
            };
            out.push(Token { tok, line, col });
        }
    }

    fn name_token(&self, s: String) -> Tok {
        if self.peek() == Some('(') {
            Tok::Functor(s)
        } else {
            Tok::Atom(s)
        }
    }
}

#[derive(Clone, Copy)]
enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        "=" | "\\=" | "==" | "\\==" | "is" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" => {
            (700, Assoc::Xfx)
        }
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "/" | "//" | "mod" | "rem" => (400, Assoc::Yfx),
        "^" => (200, Assoc::Xfy),
        ":-" => (1200, Assoc::Xfx),
        "->" => (1050, Assoc::Xfy),
        _ => return None,
    })
}

const REJECTED: &[(&str, &str)] = &[
    ("!", "cut is not supported"),
    (";", "disjunction is not supported"),
    ("->", "if-then-else is not supported"),
    ("\\+", "negation is not supported"),
    ("assert", "database updates are not supported"),
    ("asserta", "database updates are not supported"),
    ("assertz", "database updates are not supported"),
    ("retract", "database updates are not supported"),
];

/// A parsed term before variable standardization: variables are still names.
#[derive(Debug, Clone)]
enum Raw {
    Var(String),
    Anon,
    Atom(String),
    Int(i64),
    Compound(String, Vec<Raw>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(t: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(Self::error_at(&t, format!("expected {what}, found {}", t.tok)))
        }
    }

    fn infix_here(&self) -> Option<(String, u32, Assoc)> {
        match &self.peek().tok {
            Tok::Atom(name) => infix_op(name).map(|(p, a)| (name.clone(), p, a)),
            Tok::Comma => Some((",".into(), 1000, Assoc::Xfy)),
            Tok::Bar => None,
            _ => None,
        }
    }

    fn parse(&mut self, max_prec: u32) -> Result<Raw, ParseError> {
        let mut left = self.primary(max_prec)?;
        let mut left_prec = 0;
        while let Some((name, prec, assoc)) = self.infix_here() {
            if prec > max_prec {
                break;
            }
            let (left_max, right_max) = match assoc {
                Assoc::Xfx => (prec - 1, prec - 1),
                Assoc::Xfy => (prec - 1, prec),
                Assoc::Yfx => (prec, prec - 1),
            };
            if left_prec > left_max {
                break;
            }
            self.next();
            let right = self.parse(right_max)?;
            left = Raw::Compound(name, vec![left, right]);
            left_prec = prec;
        }
        Ok(left)
    }

    fn primary(&mut self, max_prec: u32) -> Result<Raw, ParseError> {
        let t = self.next();
        let at = Token {
            tok: Tok::Eof,
            ..t
        };
        match t.tok {
            Tok::Int(i) => Ok(Raw::Int(i)),
            Tok::Var(name) if name == "_" => Ok(Raw::Anon),
            Tok::Var(name) => Ok(Raw::Var(name)),
            Tok::Open => {
                let inner = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                Ok(inner)
            }
            Tok::OpenList => {
                let mut items = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    items.push(self.parse(999)?);
                }
                let tail = if self.peek().tok == Tok::Bar {
                    self.next();
                    self.parse(999)?
                } else {
                    Raw::Atom(NIL.into())
                };
                self.expect(Tok::CloseList, "`]`")?;
                Ok(items
                    .into_iter()
                    .rev()
                    .fold(tail, |acc, it| Raw::Compound(CONS.into(), vec![it, acc])))
            }
            Tok::Functor(name) => {
                self.expect(Tok::Open, "`(`")?;
                if self.peek().tok == Tok::Close {
                    return Err(Self::error_at(&at, "zero-argument compound; write the atom instead"));
                }
                let mut args = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    args.push(self.parse(999)?);
                }
                self.expect(Tok::Close, "`)`")?;
                Ok(Raw::Compound(name, args))
            }
            Tok::Atom(name) if name == "-" => match self.peek().tok {
                Tok::Int(i) => {
                    self.next();
                    Ok(Raw::Int(-i))
                }
                _ if self.starts_term() && max_prec >= 200 => {
                    let arg = self.parse(200)?;
                    Ok(Raw::Compound("-".into(), vec![arg]))
                }
                _ => Ok(Raw::Atom(name)),
            },
            Tok::Atom(name) if name == "\\+" && self.starts_term() => {
                Err(Self::error_at(&at, "negation is not supported"))
            }
            Tok::Atom(name) => Ok(Raw::Atom(name)),
            other => Err(Self::error_at(&at, format!("unexpected {other:?}"))),
        }
    }

    fn starts_term(&self) -> bool {
        matches!(
            self.peek().tok,
            Tok::Int(_) | Tok::Var(_) | Tok::Open | Tok::OpenList | Tok::Functor(_) | Tok::Atom(_)
        )
    }
}

/// Per-clause variable standardization.
struct Standardizer {
    named: HashMap<String, u32>,
    next: u32,
}

impl Standardizer {
    fn new() -> Self {
        Standardizer {
            named: HashMap::new(),
            next: 0,
        }
    }

    fn term(&mut self, raw: &Raw) -> Term {
        match raw {
            Raw::Var(name) => {
                let id = match self.named.get(name) {
                    Some(id) => *id,
                    None => {
                        let id = self.next;
                        self.next += 1;
                        self.named.insert(name.clone(), id);
                        id
                    }
                };
                Term::Var(Var::new(id, name.as_str()))
            }
            Raw::Anon => {
                let id = self.next;
                self.next += 1;
                Term::Var(Var::new(id, format!("_{id}").as_str()))
            }
            Raw::Atom(a) => Term::atom(a),
            Raw::Int(i) => Term::Int(*i),
            Raw::Compound(f, args) => {
                Term::Compound(f.as_str().into(), args.iter().map(|a| self.term(a)).collect())
            }
        }
    }
}

fn flatten_conj(raw: Raw, out: &mut Vec<Raw>) {
    match raw {
        Raw::Compound(f, mut args) if f == "," && args.len() == 2 => {
            let right = args.pop().unwrap();
            let left = args.pop().unwrap();
            flatten_conj(left, out);
            flatten_conj(right, out);
        }
        other => out.push(other),
    }
}

fn check_literal(raw: &Raw, at: &Token) -> Result<(), ParseError> {
    let name = match raw {
        Raw::Atom(n) | Raw::Compound(n, _) => n,
        Raw::Var(_) | Raw::Anon => {
            return Err(Parser::error_at(at, "variable used as a goal"));
        }
        Raw::Int(_) => return Err(Parser::error_at(at, "integer used as a goal")),
    };
    if let Some((_, why)) = REJECTED.iter().find(|(n, _)| n == name) {
        return Err(Parser::error_at(at, *why));
    }
    Ok(())
}

fn check_head(raw: &Raw, at: &Token) -> Result<(), ParseError> {
    match raw {
        Raw::Atom(n) | Raw::Compound(n, _) => {
            let arity = match raw {
                Raw::Compound(_, a) => a.len(),
                _ => 0,
            };
            if Builtin::lookup(n, arity).is_some() || n == "," {
                return Err(Parser::error_at(at, format!("cannot redefine builtin {n}/{arity}")));
            }
            check_literal(raw, at)
        }
        _ => Err(Parser::error_at(at, "clause head must be an atom or compound")),
    }
}

fn parse_props(raw: &Raw, goal: &Term, at: &Token) -> Result<Vec<EntryProp>, ParseError> {
    let mut props = vec![EntryProp::Any; goal.args().len()];
    let mut seen = vec![false; props.len()];
    let mut items = Vec::new();
    let mut cur = raw;
    loop {
        match cur {
            Raw::Atom(n) if n == NIL => break,
            Raw::Compound(f, args) if f == CONS => {
                items.push(&args[0]);
                cur = &args[1];
            }
            _ => return Err(Parser::error_at(at, "entry properties must be a list")),
        }
    }
    for item in items {
        let (prop, var) = match item {
            Raw::Compound(p, args) if args.len() == 1 => {
                let prop = match p.as_str() {
                    "ground" => EntryProp::Ground,
                    "free" | "var" => EntryProp::Free,
                    "any" => EntryProp::Any,
                    other => {
                        return Err(Parser::error_at(at, format!("unknown entry property `{other}`")))
                    }
                };
                match &args[0] {
                    Raw::Var(v) => (prop, v),
                    _ => return Err(Parser::error_at(at, "entry property must name a variable")),
                }
            }
            _ => return Err(Parser::error_at(at, "malformed entry property")),
        };
        let pos = goal
            .args()
            .iter()
            .position(|a| matches!(a, Term::Var(x) if &*x.name == var.as_str()))
            .ok_or_else(|| {
                Parser::error_at(at, format!("`{var}` is not an argument of the entry goal"))
            })?;
        if seen[pos] {
            return Err(Parser::error_at(at, format!("`{var}` has more than one entry property")));
        }
        seen[pos] = true;
        props[pos] = prop;
    }
    Ok(props)
}

fn parse_entry(raw: Raw, at: &Token) -> Result<EntryDecl, ParseError> {
    let (goal_raw, props_raw) = match raw {
        Raw::Compound(f, mut args) if f == ":" && args.len() == 2 => {
            let props = args.pop().unwrap();
            (args.pop().unwrap(), Some(props))
        }
        other => (other, None),
    };
    check_head(&goal_raw, at)?;
    let goal = Standardizer::new().term(&goal_raw);
    let mut names = Vec::new();
    for a in goal.args() {
        match a {
            Term::Var(v) if !v.name.starts_with('_') && !names.contains(&v.id) => names.push(v.id),
            _ => {
                return Err(Parser::error_at(
                    at,
                    "entry goal arguments must be distinct named variables",
                ))
            }
        }
    }
    let props = match props_raw {
        Some(p) => parse_props(&p, &goal, at)?,
        None => vec![EntryProp::Any; goal.args().len()],
    };
    Ok(EntryDecl { goal, props })
}

/// Parses program text into a [`Program`] with recursion info.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let mut clauses = Vec::new();
    let mut entries: Vec<EntryDecl> = Vec::new();
    while p.peek().tok != Tok::Eof {
        let start = p.peek().clone();
        if start.tok == Tok::Atom(":-".into()) {
            p.next();
            let directive = p.next();
            match &directive.tok {
                Tok::Atom(d) if d == "entry" => {}
                other => {
                    return Err(Parser::error_at(
                        &directive,
                        format!("unsupported directive {other:?}; only `entry` is accepted"),
                    ))
                }
            }
            let raw = parse_entry_body(&mut p)?;
            let end = p.peek().clone();
            p.expect(Tok::End, "`.` after directive")?;
            let entry = parse_entry(raw, &start)?;
            if entries
                .iter()
                .any(|e| e.key() == entry.key() && e.props == entry.props)
            {
                return Err(Parser::error_at(
                    &end,
                    format!("duplicate entry declaration for {}", entry.key()),
                ));
            }
            entries.push(entry);
            continue;
        }
        let raw = p.parse(1200)?;
        p.expect(Tok::End, "`.` at end of clause")?;
        let (head, body) = match raw {
            Raw::Compound(f, mut args) if f == ":-" && args.len() == 2 => {
                let body = args.pop().unwrap();
                (args.pop().unwrap(), Some(body))
            }
            other => (other, None),
        };
        check_head(&head, &start)?;
        let mut lits = Vec::new();
        if let Some(b) = body {
            flatten_conj(b, &mut lits);
        }
        for l in &lits {
            check_literal(l, &start)?;
        }
        let mut st = Standardizer::new();
        let head = st.term(&head);
        let body = lits.iter().map(|l| st.term(l)).collect();
        clauses.push(Clause {
            id: ClauseId(clauses.len()),
            head,
            body,
            recursive: false,
        });
    }
    Ok(Program::new(clauses, entries))
}

/// `Goal` or `Goal : Props`, where `:` only separates the two parts.
fn parse_entry_body(p: &mut Parser) -> Result<Raw, ParseError> {
    let goal = p.parse(999)?;
    if p.peek().tok == Tok::Atom(":".into()) {
        p.next();
        let props = p.parse(999)?;
        Ok(Raw::Compound(":".into(), vec![goal, props]))
    } else {
        Ok(goal)
    }
}
