//! First-order formulas over {E, B, C[z,t,k], =, constants}: a small
//! concrete syntax, a printer that round-trips, and a set-valued evaluator
//! over finite structures.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! program  := prelude* formula
//! prelude  := "const" IDENT ("," IDENT)* ";"
//!           | "def" UIDENT "(" VAR ("," VAR)* ")" ":=" formula ";"
//! formula  := disj ("->" formula)?
//! disj     := conj (("|" | "or") conj)*
//! conj     := unary (("&" | "and") unary)*
//! unary    := ("!" | "not") unary
//!           | ("exists" | "forall") VAR unary
//!           | "(" formula ")"
//!           | "E" "(" t "," t ")" | "B" "(" t "," t ")"
//!           | "C" "[" INT "," INT "," INT "]" "(" t "," t "," t ")"
//!           | UIDENT "(" t ("," t)* ")"
//!           | t "=" t
//! ```
//!
//! Variables match `[a-z][a-zA-Z0-9_]*`. Definitions are expanded at parse
//! time with capture-avoiding substitution.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::bitset::VertexSet;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    E(Term, Term),
    B(Term, Term),
    /// `C[z,t,k](a,b,c)`, i.e. C(a+z, b+t, c+k).
    C([i64; 3], [Term; 3]),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    fn terms(&self) -> Vec<&Term> {
        match self {
            Formula::E(a, b) | Formula::B(a, b) | Formula::Eq(a, b) => vec![a, b],
            Formula::C(_, t) => t.iter().collect(),
            _ => Vec::new(),
        }
    }

    /// Free variables, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            atom => {
                for t in atom.terms() {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
        }
    }

    /// Constants mentioned anywhere, sorted.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            for t in a.terms() {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&Formula)) {
        match self {
            Formula::Not(x) | Formula::Exists(_, x) | Formula::Forall(_, x) => x.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            atom => f(atom),
        }
    }

    /// Simultaneous capture-avoiding substitution of free variables.
    pub fn substitute(&self, map: &HashMap<String, Term>, fresh: &mut FreshNames) -> Formula {
        let sub_term = |t: &Term| match t {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
            c => c.clone(),
        };
        match self {
            Formula::E(a, b) => Formula::E(sub_term(a), sub_term(b)),
            Formula::B(a, b) => Formula::B(sub_term(a), sub_term(b)),
            Formula::Eq(a, b) => Formula::Eq(sub_term(a), sub_term(b)),
            Formula::C(s, t) => Formula::C(*s, [sub_term(&t[0]), sub_term(&t[1]), sub_term(&t[2])]),
            Formula::Not(x) => Formula::not(x.substitute(map, fresh)),
            Formula::And(a, b) => Formula::and(a.substitute(map, fresh), b.substitute(map, fresh)),
            Formula::Or(a, b) => Formula::or(a.substitute(map, fresh), b.substitute(map, fresh)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(map, fresh), b.substitute(map, fresh)),
            Formula::Exists(v, x) | Formula::Forall(v, x) => {
                let mut inner = map.clone();
                inner.remove(v);
                let captures = inner.values().any(|t| matches!(t, Term::Var(w) if w == v));
                let (name, body) = if captures {
                    let w = fresh.next(v);
                    inner.insert(v.clone(), Term::Var(w.clone()));
                    (w, x.substitute(&inner, fresh))
                } else {
                    (v.clone(), x.substitute(&inner, fresh))
                };
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(name, Box::new(body))
                } else {
                    Formula::Forall(name, Box::new(body))
                }
            }
        }
    }

    /// Full source text: a `const` prelude for every constant, then the
    /// fully parenthesized formula.
    pub fn to_source(&self) -> String {
        let consts = self.constants();
        if consts.is_empty() {
            self.to_string()
        } else {
            let list: Vec<&str> = consts.iter().map(String::as_str).collect();
            format!("const {}; {}", list.join(", "), self)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::E(a, b) => write!(f, "E({a},{b})"),
            Formula::B(a, b) => write!(f, "B({a},{b})"),
            Formula::C(s, t) => write!(f, "C[{},{},{}]({},{},{})", s[0], s[1], s[2], t[0], t[1], t[2]),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(x) => match **x {
                Formula::Eq(..) => write!(f, "!({x})"),
                _ => write!(f, "!{x}"),
            },
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Exists(v, x) => write!(f, "exists {v} ({x})"),
            Formula::Forall(v, x) => write!(f, "forall {v} ({x})"),
        }
    }
}

/// Generator of variable names that occur nowhere in the source.
#[derive(Debug, Default)]
pub struct FreshNames {
    taken: HashSet<String>,
    counter: usize,
}

impl FreshNames {
    pub fn avoiding(taken: HashSet<String>) -> Self {
        FreshNames { taken, counter: 0 }
    }

    pub fn next(&mut self, base: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{base}_{}", self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Equals,
    Assign,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(i) => format!("`{i}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut col = 1;
    let err = |column: usize, message: String| Error::Syntax { column, message };
    while i < chars.len() {
        let c = chars[i];
        let start = col;
        if c == '\n' {
            i += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '!' => Some(Tok::Bang),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push((Tok::Arrow, start));
            i += 2;
            col += 2;
            continue;
        }
        if c == ':' && chars.get(i + 1) == Some(&'=') {
            out.push((Tok::Assign, start));
            i += 2;
            col += 2;
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let v = s
                .parse::<i64>()
                .map_err(|_| err(start, format!("integer `{s}` out of range")))?;
            out.push((Tok::Int(v), start));
            col += j - i;
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            out.push((Tok::Ident(chars[i..j].iter().collect()), start));
            col += j - i;
            i = j;
            continue;
        }
        return Err(err(start, format!("unexpected character `{c}`")));
    }
    out.push((Tok::Eof, col));
    Ok(out)
}

// ---------------------------------------------------------------- parser

const KEYWORDS: [&str; 7] = ["exists", "forall", "const", "def", "and", "or", "not"];

struct Definition {
    params: Vec<String>,
    body: Formula,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    constants: HashSet<String>,
    defs: HashMap<String, Definition>,
    bound: Vec<String>,
    fresh: FreshNames,
    /// Parameters allowed free while parsing a definition body.
    def_params: Option<Vec<String>>,
}

fn is_var_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase()) && !KEYWORDS.contains(&s)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            column: self.col(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {}, found {}", describe(&t), describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.fail(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn int(&mut self) -> Result<i64> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            other => self.fail(format!("expected integer, found {}", describe(&other))),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn program(&mut self) -> Result<Formula> {
        loop {
            if self.is_kw("const") {
                self.bump();
                loop {
                    let col = self.col();
                    let name = self.ident()?;
                    if KEYWORDS.contains(&name.as_str()) || ["E", "B", "C"].contains(&name.as_str()) {
                        return Err(Error::Syntax {
                            column: col,
                            message: format!("`{name}` cannot name a constant"),
                        });
                    }
                    self.constants.insert(name);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else if self.is_kw("def") {
                self.bump();
                let col = self.col();
                let name = self.ident()?;
                if !name.starts_with(|c: char| c.is_ascii_uppercase()) || ["E", "B", "C"].contains(&name.as_str()) {
                    return Err(Error::Syntax {
                        column: col,
                        message: format!("`{name}` cannot name a predicate"),
                    });
                }
                self.expect(Tok::LParen)?;
                let mut params = Vec::new();
                loop {
                    let col = self.col();
                    let p = self.ident()?;
                    if !is_var_name(&p) || self.constants.contains(&p) {
                        return Err(Error::Syntax {
                            column: col,
                            message: format!("`{p}` is not a variable"),
                        });
                    }
                    params.push(p);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                self.expect(Tok::Assign)?;
                self.def_params = Some(params.clone());
                let body = self.formula()?;
                self.def_params = None;
                self.expect(Tok::Semi)?;
                self.defs.insert(name, Definition { params, body });
            } else {
                break;
            }
        }
        let f = self.formula()?;
        if *self.peek() != Tok::Eof {
            return self.fail(format!("unexpected {}", describe(self.peek())));
        }
        Ok(f)
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disj(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Pipe || self.is_kw("or") {
            self.bump();
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp || self.is_kw("and") {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Bang || self.is_kw("not") {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_kw("exists") || self.is_kw("forall") {
            let exists = self.is_kw("exists");
            self.bump();
            let col = self.col();
            let v = self.ident()?;
            if !is_var_name(&v) || self.constants.contains(&v) {
                return Err(Error::Syntax {
                    column: col,
                    message: format!("`{v}` cannot be bound"),
                });
            }
            self.bound.push(v.clone());
            let body = self.unary();
            self.bound.pop();
            let body = Box::new(body?);
            return Ok(if exists { Formula::Exists(v, body) } else { Formula::Forall(v, body) });
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        if let Tok::Ident(name) = self.peek().clone() {
            match (name.as_str(), self.peek_at(1)) {
                ("E", Tok::LParen) | ("B", Tok::LParen) => {
                    self.bump();
                    let args = self.args()?;
                    if args.len() != 2 {
                        return self.fail(format!("{name} takes 2 arguments"));
                    }
                    let (a, b) = (args[0].clone(), args[1].clone());
                    return Ok(if name == "E" { Formula::E(a, b) } else { Formula::B(a, b) });
                }
                ("C", Tok::LBracket) => {
                    self.bump();
                    self.bump();
                    let z = self.int()?;
                    self.expect(Tok::Comma)?;
                    let t = self.int()?;
                    self.expect(Tok::Comma)?;
                    let k = self.int()?;
                    self.expect(Tok::RBracket)?;
                    let args = self.args()?;
                    if args.len() != 3 {
                        return self.fail("C takes 3 arguments");
                    }
                    return Ok(Formula::C([z, t, k], [args[0].clone(), args[1].clone(), args[2].clone()]));
                }
                (_, Tok::LParen) if name.starts_with(|c: char| c.is_ascii_uppercase()) => {
                    self.bump();
                    return self.expand(&name);
                }
                _ => {}
            }
        }
        let a = self.term()?;
        self.expect(Tok::Equals)?;
        let b = self.term()?;
        Ok(Formula::Eq(a, b))
    }

    fn args(&mut self) -> Result<Vec<Term>> {
        self.expect(Tok::LParen)?;
        let mut out = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn expand(&mut self, name: &str) -> Result<Formula> {
        let args = self.args()?;
        let def = self
            .defs
            .get(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if def.params.len() != args.len() {
            return self.fail(format!(
                "{name} takes {} arguments, found {}",
                def.params.len(),
                args.len()
            ));
        }
        let map: HashMap<String, Term> = def.params.iter().cloned().zip(args).collect();
        Ok(def.body.substitute(&map, &mut self.fresh))
    }

    fn term(&mut self) -> Result<Term> {
        let col = self.col();
        let name = self.ident()?;
        if self.bound.contains(&name) {
            return Ok(Term::Var(name));
        }
        if self.constants.contains(&name) {
            return Ok(Term::Const(name));
        }
        if !is_var_name(&name) {
            return if KEYWORDS.contains(&name.as_str()) {
                Err(Error::Syntax {
                    column: col,
                    message: format!("keyword `{name}` used as a term"),
                })
            } else {
                Err(Error::UnknownSymbol(name))
            };
        }
        if let Some(params) = &self.def_params {
            if !params.contains(&name) {
                return Err(Error::Syntax {
                    column: col,
                    message: format!("`{name}` is free in a definition body but not a parameter"),
                });
            }
        }
        Ok(Term::Var(name))
    }
}

/// Parses a program (prelude declarations followed by one formula).
pub fn parse(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let names: HashSet<String> = toks
        .iter()
        .filter_map(|(t, _)| match t {
            Tok::Ident(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let mut p = Parser {
        toks,
        pos: 0,
        constants: HashSet::new(),
        defs: HashMap::new(),
        bound: Vec::new(),
        fresh: FreshNames::avoiding(names),
        def_params: None,
    };
    p.program()
}

// ---------------------------------------------------------------- structures

/// Oracle for the shifted circular order: `(shifts, a, b, c) ↦ C(a+z, b+t, c+k)`.
pub type OrderOracle<'a> = dyn Fn([i64; 3], usize, usize, usize) -> bool + Sync + 'a;

/// A finite structure: domain `0..n`, relation oracles and constants.
#[derive(Clone)]
pub struct StructureView<'a> {
    pub n: usize,
    pub e: Option<&'a [VertexSet]>,
    pub b: Option<&'a [VertexSet]>,
    pub c: Option<&'a OrderOracle<'a>>,
    pub constants: HashMap<String, usize>,
}

impl<'a> StructureView<'a> {
    pub fn graph(e: &'a [VertexSet]) -> Self {
        StructureView {
            n: e.len(),
            e: Some(e),
            b: None,
            c: None,
            constants: HashMap::new(),
        }
    }

    pub fn with_b(mut self, b: &'a [VertexSet]) -> Self {
        self.b = Some(b);
        self
    }

    pub fn with_order(mut self, c: &'a OrderOracle<'a>) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_constant(mut self, name: &str, v: usize) -> Self {
        self.constants.insert(name.to_string(), v);
        self
    }
}

// ---------------------------------------------------------------- evaluator

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum T {
    Var(u8),
    Vertex(usize),
}

#[derive(Clone, Copy, Debug)]
enum Node {
    E(T, T),
    B(T, T),
    C([i64; 3], [T; 3]),
    Eq(T, T),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Exists(u8, usize),
    Forall(u8, usize),
}

const UNBOUND: usize = usize::MAX;
const MAX_VARS: usize = 64;

/// A formula compiled against one structure. Set-valued subresults for
/// subformulas with at most two free variables are cached for the lifetime
/// of the evaluator.
pub struct Evaluator<'s, 'a> {
    s: &'s StructureView<'a>,
    nodes: Vec<Node>,
    free: Vec<u64>,
    root: usize,
    var_names: Vec<String>,
    memo: RefCell<HashMap<(usize, u8, usize), VertexSet>>,
    full: VertexSet,
}

impl<'s, 'a> Evaluator<'s, 'a> {
    pub fn new(s: &'s StructureView<'a>, f: &Formula) -> Result<Self> {
        let mut ev = Evaluator {
            s,
            nodes: Vec::new(),
            free: Vec::new(),
            root: 0,
            var_names: Vec::new(),
            memo: RefCell::new(HashMap::new()),
            full: VertexSet::full(s.n),
        };
        ev.root = ev.compile(f)?;
        Ok(ev)
    }

    fn var_id(&mut self, name: &str) -> Result<u8> {
        if let Some(i) = self.var_names.iter().position(|v| v == name) {
            return Ok(i as u8);
        }
        if self.var_names.len() >= MAX_VARS {
            return Err(Error::InvalidConfig(format!("more than {MAX_VARS} distinct variables")));
        }
        self.var_names.push(name.to_string());
        Ok((self.var_names.len() - 1) as u8)
    }

    fn term(&mut self, t: &Term) -> Result<T> {
        match t {
            Term::Var(v) => Ok(T::Var(self.var_id(v)?)),
            Term::Const(c) => match self.s.constants.get(c) {
                Some(&v) if v < self.s.n => Ok(T::Vertex(v)),
                Some(&v) => Err(Error::IndexOutOfRange { index: v, len: self.s.n }),
                None => Err(Error::UnboundVariable(c.clone())),
            },
        }
    }

    fn push(&mut self, node: Node, free: u64) -> usize {
        self.nodes.push(node);
        self.free.push(free);
        self.nodes.len() - 1
    }

    fn tmask(t: T) -> u64 {
        match t {
            T::Var(i) => 1 << i,
            T::Vertex(_) => 0,
        }
    }

    fn compile(&mut self, f: &Formula) -> Result<usize> {
        Ok(match f {
            Formula::E(a, b) | Formula::B(a, b) | Formula::Eq(a, b) => {
                let (a, b) = (self.term(a)?, self.term(b)?);
                let node = match f {
                    Formula::E(..) => {
                        self.s.e.ok_or(Error::MissingOracle("E"))?;
                        Node::E(a, b)
                    }
                    Formula::B(..) => {
                        self.s.b.ok_or(Error::MissingOracle("B"))?;
                        Node::B(a, b)
                    }
                    _ => Node::Eq(a, b),
                };
                self.push(node, Self::tmask(a) | Self::tmask(b))
            }
            Formula::C(sh, t) => {
                self.s.c.ok_or(Error::MissingOracle("C"))?;
                let ts = [self.term(&t[0])?, self.term(&t[1])?, self.term(&t[2])?];
                let m = ts.iter().fold(0, |m, &t| m | Self::tmask(t));
                self.push(Node::C(*sh, ts), m)
            }
            Formula::Not(x) => {
                let i = self.compile(x)?;
                self.push(Node::Not(i), self.free[i])
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let (i, j) = (self.compile(a)?, self.compile(b)?);
                let node = match f {
                    Formula::And(..) => Node::And(i, j),
                    Formula::Or(..) => Node::Or(i, j),
                    _ => Node::Implies(i, j),
                };
                self.push(node, self.free[i] | self.free[j])
            }
            Formula::Exists(v, x) | Formula::Forall(v, x) => {
                let id = self.var_id(v)?;
                let i = self.compile(x)?;
                let node = if matches!(f, Formula::Exists(..)) {
                    Node::Exists(id, i)
                } else {
                    Node::Forall(id, i)
                };
                self.push(node, self.free[i] & !(1u64 << id))
            }
        })
    }

    fn env_vector(&self, env: &HashMap<String, usize>) -> Result<Vec<usize>> {
        let mut out = vec![UNBOUND; self.var_names.len()];
        for (i, name) in self.var_names.iter().enumerate() {
            if let Some(&v) = env.get(name) {
                if v >= self.s.n {
                    return Err(Error::IndexOutOfRange { index: v, len: self.s.n });
                }
                out[i] = v;
            }
        }
        let free = self.free[self.root];
        for (i, name) in self.var_names.iter().enumerate() {
            if free & (1 << i) != 0 && out[i] == UNBOUND {
                return Err(Error::UnboundVariable(name.clone()));
            }
        }
        Ok(out)
    }

    /// Truth of the formula under `env`.
    pub fn eval(&self, env: &HashMap<String, usize>) -> Result<bool> {
        let mut e = self.env_vector(env)?;
        Ok(self.bool_at(self.root, &mut e))
    }

    /// `{x : formula(x)}` with the remaining free variables bound by `env`.
    pub fn satisfying(&self, env: &HashMap<String, usize>, var: &str) -> Result<VertexSet> {
        let Some(id) = self.var_names.iter().position(|v| v == var) else {
            // The variable does not occur: the formula is constant in it.
            let t = self.eval(env)?;
            return Ok(if t { self.full.clone() } else { VertexSet::new(self.s.n) });
        };
        let mut env = env.clone();
        env.remove(var);
        let mut e = vec![UNBOUND; self.var_names.len()];
        for (i, name) in self.var_names.iter().enumerate() {
            if let Some(&v) = env.get(name) {
                e[i] = v;
            }
        }
        let free = self.free[self.root] & !(1u64 << id);
        for (i, name) in self.var_names.iter().enumerate() {
            if free & (1 << i) != 0 && e[i] == UNBOUND {
                return Err(Error::UnboundVariable(name.clone()));
            }
        }
        Ok(self.set_at(self.root, &mut e, id as u8))
    }

    #[inline]
    fn val(t: T, env: &[usize]) -> usize {
        match t {
            T::Var(i) => env[i as usize],
            T::Vertex(v) => v,
        }
    }

    fn rel(&self, node: Node) -> Option<&'a [VertexSet]> {
        match node {
            Node::E(..) => self.s.e,
            Node::B(..) => self.s.b,
            _ => None,
        }
    }

    fn bool_at(&self, i: usize, env: &mut [usize]) -> bool {
        let node = self.nodes[i];
        match node {
            Node::E(a, b) | Node::B(a, b) => {
                let rows = self.rel(node).expect("checked at compile time");
                rows[Self::val(a, env)].contains(Self::val(b, env))
            }
            Node::Eq(a, b) => Self::val(a, env) == Self::val(b, env),
            Node::C(sh, t) => (self.s.c.expect("checked at compile time"))(
                sh,
                Self::val(t[0], env),
                Self::val(t[1], env),
                Self::val(t[2], env),
            ),
            Node::Not(x) => !self.bool_at(x, env),
            Node::And(a, b) => self.bool_at(a, env) && self.bool_at(b, env),
            Node::Or(a, b) => self.bool_at(a, env) || self.bool_at(b, env),
            Node::Implies(a, b) => !self.bool_at(a, env) || self.bool_at(b, env),
            Node::Exists(v, x) | Node::Forall(v, x) => {
                let free = self.free[i];
                if free != 0 && free.count_ones() <= 2 {
                    // Open the highest free variable and consult the cache.
                    let open = 63 - free.leading_zeros() as u8;
                    let at = env[open as usize];
                    return self.set_at(i, env, open).contains(at);
                }
                let saved = env[v as usize];
                let s = self.set_at(x, env, v);
                env[v as usize] = saved;
                if matches!(node, Node::Exists(..)) {
                    !s.is_empty()
                } else {
                    s.count() == self.s.n
                }
            }
        }
    }

    fn constant_set(&self, t: bool) -> VertexSet {
        if t {
            self.full.clone()
        } else {
            VertexSet::new(self.s.n)
        }
    }

    /// Values of variable `open` satisfying node `i`; `env[open]` is scratch.
    fn set_at(&self, i: usize, env: &mut [usize], open: u8) -> VertexSet {
        let free = self.free[i];
        let bit = 1u64 << open;
        if free & bit == 0 {
            return self.constant_set(self.bool_at(i, env));
        }
        let cacheable = free.count_ones() <= 2;
        let key = if cacheable {
            let other = free & !bit;
            let other_val = if other == 0 {
                UNBOUND
            } else {
                env[other.trailing_zeros() as usize]
            };
            let key = (i, open, other_val);
            if let Some(s) = self.memo.borrow().get(&key) {
                return s.clone();
            }
            Some(key)
        } else {
            None
        };
        let out = self.compute_set(i, env, open);
        if let Some(key) = key {
            self.memo.borrow_mut().insert(key, out.clone());
        }
        out
    }

    fn compute_set(&self, i: usize, env: &mut [usize], open: u8) -> VertexSet {
        let n = self.s.n;
        let node = self.nodes[i];
        let is_open = |t: T| t == T::Var(open);
        match node {
            Node::E(a, b) | Node::B(a, b) => {
                let rows = self.rel(node).expect("checked at compile time");
                match (is_open(a), is_open(b)) {
                    (true, true) => VertexSet::from_indices(n, (0..n).filter(|&x| rows[x].contains(x))),
                    (true, false) => {
                        // Symmetric relation: {x : R(x, b)} = row of b.
                        rows[Self::val(b, env)].clone()
                    }
                    (false, true) => rows[Self::val(a, env)].clone(),
                    (false, false) => unreachable!("open variable occurs"),
                }
            }
            Node::Eq(a, b) => match (is_open(a), is_open(b)) {
                (true, true) => self.full.clone(),
                (true, false) => VertexSet::singleton(n, Self::val(b, env)),
                (false, true) => VertexSet::singleton(n, Self::val(a, env)),
                (false, false) => unreachable!("open variable occurs"),
            },
            Node::C(..) => self.enumerate(i, env, open),
            Node::Not(x) => self.set_at(x, env, open).complement(),
            Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => {
                let bit = 1u64 << open;
                // Evaluate a side that does not mention the open variable
                // first; it may decide the result alone.
                let (first, second) = if self.free[a] & bit != 0 && self.free[b] & bit == 0 {
                    (b, a)
                } else {
                    (a, b)
                };
                let swapped = first != a;
                let s1 = self.set_at(first, env, open);
                match node {
                    Node::And(..) => {
                        if s1.is_empty() {
                            return s1;
                        }
                        let mut s = self.set_at(second, env, open);
                        s.intersect_with(&s1);
                        s
                    }
                    Node::Or(..) => {
                        if s1.count() == n {
                            return s1;
                        }
                        let mut s = self.set_at(second, env, open);
                        s.union_with(&s1);
                        s
                    }
                    _ => {
                        // Implies(a, b) = !a | b.
                        let not_a_first = !swapped;
                        if not_a_first {
                            let na = s1.complement();
                            if na.count() == n {
                                return na;
                            }
                            let mut s = self.set_at(second, env, open);
                            s.union_with(&na);
                            s
                        } else {
                            // first = b.
                            if s1.count() == n {
                                return s1;
                            }
                            let mut s = self.set_at(second, env, open).complement();
                            s.union_with(&s1);
                            s
                        }
                    }
                }
            }
            Node::Exists(v, x) | Node::Forall(v, x) => {
                let exists = matches!(node, Node::Exists(..));
                let saved = env[v as usize];
                let mut acc = if exists { VertexSet::new(n) } else { self.full.clone() };
                for y in 0..n {
                    env[v as usize] = y;
                    let s = self.set_at(x, env, open);
                    if exists {
                        acc.union_with(&s);
                        if acc.count() == n {
                            break;
                        }
                    } else {
                        acc.intersect_with(&s);
                        if acc.is_empty() {
                            break;
                        }
                    }
                }
                env[v as usize] = saved;
                acc
            }
        }
    }

    fn enumerate(&self, i: usize, env: &mut [usize], open: u8) -> VertexSet {
        let saved = env[open as usize];
        let mut out = VertexSet::new(self.s.n);
        for x in 0..self.s.n {
            env[open as usize] = x;
            if self.bool_at(i, env) {
                out.insert(x);
            }
        }
        env[open as usize] = saved;
        out
    }
}

/// Truth of `f` in `s` under `env`.
pub fn evaluate(s: &StructureView<'_>, f: &Formula, env: &HashMap<String, usize>) -> Result<bool> {
    Evaluator::new(s, f)?.eval(env)
}

/// The subset of the domain defined by `f`, whose single free variable is
/// left open; `params` add constant bindings.
pub fn define_set(s: &StructureView<'_>, f: &Formula, params: &HashMap<String, usize>) -> Result<VertexSet> {
    let free = f.free_vars();
    if free.len() != 1 {
        return Err(Error::FreeVariableCount(free.into_iter().collect()));
    }
    let var = free.into_iter().next().expect("one variable");
    let mut view = s.clone();
    for (k, &v) in params {
        view.constants.insert(k.clone(), v);
    }
    Evaluator::new(&view, f)?.satisfying(&HashMap::new(), &var)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, usize)]) -> HashMap<String, usize> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn rows(n: usize, edges: &[(usize, usize)]) -> Vec<VertexSet> {
        let mut r = vec![VertexSet::new(n); n];
        for &(u, v) in edges {
            r[u].insert(v);
            r[v].insert(u);
        }
        r
    }

    #[test]
    fn parses_derived_predicate() {
        let f = parse("def N2(v,x) := exists w (E(v,w) & E(w,x)); forall z (E(x,z) -> N2(v,z))").unwrap();
        assert_eq!(
            f.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["v".to_string(), "x".to_string()]
        );
        assert_eq!(parse(&f.to_source()).unwrap(), f);
    }

    #[test]
    fn unterminated_atom_reports_column() {
        assert!(matches!(parse("E(x"), Err(Error::Syntax { column: 4, .. })));
    }

    #[test]
    fn shifted_order_atom() {
        let f = parse("const a, b, c; C[1,0,-2](a,b,c)").unwrap();
        assert_eq!(
            f,
            Formula::C(
                [1, 0, -2],
                [Term::Const("a".into()), Term::Const("b".into()), Term::Const("c".into())]
            )
        );
    }

    #[test]
    fn unknown_symbols() {
        assert_eq!(parse("E(x, K)"), Err(Error::UnknownSymbol("K".into())));
        assert_eq!(parse("P(x)"), Err(Error::UnknownSymbol("P".into())));
    }

    #[test]
    fn implication_is_right_associative() {
        let f = parse("E(a,b) -> E(b,c) -> E(c,d)").unwrap();
        assert!(matches!(f, Formula::Implies(_, ref r) if matches!(**r, Formula::Implies(..))));
    }

    #[test]
    fn definition_substitution_avoids_capture() {
        // Argument `w` must not be captured by the body's bound `w`.
        let f = parse("def N2(v,x) := exists w (E(v,w) & E(w,x)); N2(w, y)").unwrap();
        match &f {
            Formula::Exists(bound, _) => assert_ne!(bound, "w"),
            other => panic!("{other:?}"),
        }
        assert!(f.free_vars().contains("w"));
    }

    #[test]
    fn evaluation_examples() {
        let r = rows(2, &[(0, 1)]);
        let s = StructureView::graph(&r);
        assert!(evaluate(&s, &parse("E(x,y)").unwrap(), &env(&[("x", 0), ("y", 1)])).unwrap());
        let r = rows(1, &[]);
        let s = StructureView::graph(&r);
        assert!(!evaluate(&s, &parse("exists y E(x,y)").unwrap(), &env(&[("x", 0)])).unwrap());
    }

    #[test]
    fn evaluation_errors() {
        let r = rows(2, &[(0, 1)]);
        let s = StructureView::graph(&r);
        assert_eq!(
            evaluate(&s, &parse("B(x,y)").unwrap(), &env(&[("x", 0), ("y", 1)])),
            Err(Error::MissingOracle("B"))
        );
        assert_eq!(
            evaluate(&s, &parse("E(x,y)").unwrap(), &env(&[("x", 0)])),
            Err(Error::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn define_set_examples() {
        let r = rows(4, &[(0, 1), (0, 2), (2, 3)]);
        let s = StructureView::graph(&r);
        let f = parse("const c; x = c").unwrap();
        assert_eq!(define_set(&s, &f, &env(&[("c", 2)])).unwrap().to_vec(), vec![2]);
        let f = parse("const c; E(c,x)").unwrap();
        assert_eq!(define_set(&s, &f, &env(&[("c", 0)])).unwrap(), r[0]);
        let f = parse("E(x,y)").unwrap();
        assert!(matches!(define_set(&s, &f, &env(&[])), Err(Error::FreeVariableCount(_))));
    }

    #[test]
    fn order_oracle_atoms() {
        let r = rows(3, &[]);
        let order = |sh: [i64; 3], a: usize, b: usize, c: usize| sh == [0, 0, 0] && a < b && b < c;
        let s = StructureView::graph(&r).with_order(&order);
        let f = parse("exists y exists z C[0,0,0](x,y,z)").unwrap();
        assert!(evaluate(&s, &f, &env(&[("x", 0)])).unwrap());
        assert!(!evaluate(&s, &f, &env(&[("x", 1)])).unwrap());
    }
}
