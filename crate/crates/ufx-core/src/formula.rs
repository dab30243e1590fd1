//! Formula language with classical and ultrafilter quantifiers.
//!
//! Concrete syntax: `forall x ...`, `exists x ...`, `Uforall[d] x ...`,
//! `Uexists[d] x ...`, connectives `~`, `&`, `|`, `->`, equality `=`.
//! Precedence from tightest to loosest is `~`, `&`, `|`, `->`; quantifiers
//! scope as far right as possible. Ultrafilter parameters such as `d` are
//! free names bound externally through an [`Assignment`].

use crate::beta::FiniteUltrafilter;
use crate::model::{Model, Vocabulary};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App { func: String, args: Vec<Term> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum UfMode {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    Equal(Term, Term),
    Pred {
        pred: String,
        args: Vec<Term>,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall {
        var: String,
        body: Box<Formula>,
    },
    Exists {
        var: String,
        body: Box<Formula>,
    },
    UfQuant {
        mode: UfMode,
        param: String,
        var: String,
        body: Box<Formula>,
    },
}

impl Formula {
    #[allow(clippy::should_implement_trait)] // constructor, parallel to `and`/`or`
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

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall {
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists {
            var: var.into(),
            body: Box::new(body),
        }
    }

    pub fn ufquant(
        mode: UfMode,
        param: impl Into<String>,
        var: impl Into<String>,
        body: Formula,
    ) -> Formula {
        Formula::UfQuant {
            mode,
            param: param.into(),
            var: var.into(),
            body: Box::new(body),
        }
    }

    /// Free variables and free ultrafilter parameter names.
    pub fn free_names(&self) -> FreeNames {
        let mut names = FreeNames::default();
        let mut bound = BTreeSet::new();
        collect_free(self, &mut bound, &mut names);
        names
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct FreeNames {
    pub vars: BTreeSet<String>,
    pub ufs: BTreeSet<String>,
}

fn collect_free_term(t: &Term, bound: &BTreeSet<String>, names: &mut FreeNames) {
    match t {
        Term::Var(v) => {
            if !bound.contains(v) {
                names.vars.insert(v.clone());
            }
        }
        Term::App { args, .. } => {
            for a in args {
                collect_free_term(a, bound, names);
            }
        }
    }
}

fn collect_free(f: &Formula, bound: &mut BTreeSet<String>, names: &mut FreeNames) {
    match f {
        Formula::Equal(a, b) => {
            collect_free_term(a, bound, names);
            collect_free_term(b, bound, names);
        }
        Formula::Pred { args, .. } => {
            for a in args {
                collect_free_term(a, bound, names);
            }
        }
        Formula::Not(x) => collect_free(x, bound, names),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_free(a, bound, names);
            collect_free(b, bound, names);
        }
        Formula::Forall { var, body } | Formula::Exists { var, body } => {
            let fresh = bound.insert(var.clone());
            collect_free(body, bound, names);
            if fresh {
                bound.remove(var);
            }
        }
        Formula::UfQuant {
            param, var, body, ..
        } => {
            names.ufs.insert(param.clone());
            let fresh = bound.insert(var.clone());
            collect_free(body, bound, names);
            if fresh {
                bound.remove(var);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App { func, args } => {
                write!(f, "{func}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Equal(a, b) => write!(f, "{a} = {b}"),
            Formula::Pred { pred, args } => {
                write!(f, "{pred}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Formula::Not(x) => match **x {
                Formula::Pred { .. } | Formula::Not(_) => write!(f, "~{x}"),
                _ => write!(f, "~({x})"),
            },
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Forall { var, body } => write!(f, "forall {var} {body}"),
            Formula::Exists { var, body } => write!(f, "exists {var} {body}"),
            Formula::UfQuant {
                mode,
                param,
                var,
                body,
            } => {
                let kw = match mode {
                    UfMode::Forall => "Uforall",
                    UfMode::Exists => "Uexists",
                };
                write!(f, "{kw}[{param}] {var} {body}")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Amp,
    Pipe,
    Arrow,
    Tilde,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Tilde => write!(f, "`~`"),
            Tok::Eq => write!(f, "`=`"),
        }
    }
}

struct Pos {
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' | ')' | '[' | ']' | ',' | '&' | '|' | '~' | '=' => {
                chars.next();
                col += 1;
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    '~' => Tok::Tilde,
                    _ => Tok::Eq,
                };
                out.push((tok, pos));
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    out.push((Tok::Arrow, pos));
                } else {
                    return Err(ParseError {
                        line: pos.line,
                        col: pos.col,
                        msg: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(name), pos));
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
    vocab: &'a Vocabulary,
    bound: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some((_, p)) => (p.line, p.col),
            None => match self.toks.last() {
                Some((_, p)) => (p.line, p.col + 1),
                None => (1, 1),
            },
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected {want}, found {t}"))),
            None => Err(self.err(format!("expected {want}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(t) => Err(self.err(format!("expected {what}, found {t}"))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn fresh_var(&mut self, what: &str) -> Result<String, ParseError> {
        let name = self.ident(what)?;
        if is_keyword(&name) {
            return Err(self.err(format!("`{name}` is a reserved word")));
        }
        if self.vocab.predicate(&name).is_some() || self.vocab.function(&name).is_some() {
            return Err(self.err(format!("`{name}` is a declared symbol, not a variable")));
        }
        if self.bound.contains(&name) {
            return Err(self.err(format!("variable `{name}` is already bound on this path")));
        }
        Ok(name)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_level()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and_level()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and_level()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn quantified(
        &mut self,
        var: String,
        make: impl FnOnce(String, Formula) -> Formula,
    ) -> Result<Formula, ParseError> {
        self.bound.push(var.clone());
        let body = self.formula();
        self.bound.pop();
        Ok(make(var, body?))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(kw)) if kw == "forall" || kw == "exists" => {
                let universal = kw == "forall";
                self.pos += 1;
                let var = self.fresh_var("a variable")?;
                self.quantified(var, |v, b| {
                    if universal {
                        Formula::forall(v, b)
                    } else {
                        Formula::exists(v, b)
                    }
                })
            }
            Some(Tok::Ident(kw)) if kw == "Uforall" || kw == "Uexists" => {
                let mode = if kw == "Uforall" {
                    UfMode::Forall
                } else {
                    UfMode::Exists
                };
                self.pos += 1;
                self.expect(Tok::LBracket)?;
                let param = self.ident("an ultrafilter parameter")?;
                self.expect(Tok::RBracket)?;
                let var = self.fresh_var("a variable")?;
                self.quantified(var, |v, b| Formula::ufquant(mode, param, v, b))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                if is_keyword(&name) {
                    return Err(self.err(format!("`{name}` cannot start an atom here")));
                }
                if let Some(sym) = self.vocab.predicate(&name) {
                    let arity = sym.arity;
                    self.pos += 1;
                    let args = self.arg_list(&name, arity)?;
                    return Ok(Formula::Pred { pred: name, args });
                }
                let lhs = self.term()?;
                self.expect(Tok::Eq)?;
                let rhs = self.term()?;
                Ok(Formula::Equal(lhs, rhs))
            }
            Some(t) => {
                let t = format!("{t}");
                Err(self.err(format!("expected a formula, found {t}")))
            }
            None => Err(self.err("expected a formula, found end of input")),
        }
    }

    fn arg_list(&mut self, name: &str, arity: usize) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            args.push(self.term()?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                Some(t) => return Err(self.err(format!("expected `,` or `)`, found {t}"))),
                None => return Err(self.err("unclosed argument list")),
            }
        }
        if args.len() != arity {
            return Err(self.err(format!(
                "`{name}` has arity {arity}, got {} arguments",
                args.len()
            )));
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.ident("a term")?;
        if is_keyword(&name) {
            return Err(self.err(format!("`{name}` is a reserved word")));
        }
        if let Some(sym) = self.vocab.function(&name) {
            let arity = sym.arity;
            let args = self.arg_list(&name, arity)?;
            return Ok(Term::App { func: name, args });
        }
        if self.vocab.predicate(&name).is_some() {
            return Err(self.err(format!("predicate `{name}` cannot appear in a term")));
        }
        if self.peek() == Some(&Tok::LParen) {
            return Err(self.err(format!("unknown symbol `{name}`")));
        }
        Ok(Term::Var(name))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "forall" | "exists" | "Uforall" | "Uexists")
}

/// Parses a formula in the concrete syntax against a vocabulary.
pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vocab,
        bound: Vec::new(),
    };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(f)
}

/// Values for the free names of a formula: universe points for variables,
/// ultrafilters for quantifier parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub vars: BTreeMap<String, usize>,
    pub ufs: BTreeMap<String, FiniteUltrafilter>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_var(mut self, name: impl Into<String>, value: usize) -> Self {
        self.vars.insert(name.into(), value);
        self
    }

    pub fn with_uf(mut self, name: impl Into<String>, d: FiniteUltrafilter) -> Self {
        self.ufs.insert(name.into(), d);
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("no value assigned to variable `{0}`")]
    MissingVariable(String),
    #[error("no ultrafilter assigned to parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter `{name}` is an ultrafilter on {got} points, model has {expected}")]
    ParameterUniverse {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("model has no interpretation for symbol `{0}`")]
    UnknownSymbol(String),
    #[error("function `{name}` has no value at {args:?}")]
    FunctionValueMissing { name: String, args: Vec<usize> },
    #[error("universe of size {size} exceeds the quantifier limit of {max}")]
    UniverseTooLarge { size: usize, max: usize },
}

/// Largest universe over which ultrafilter quantifiers can be evaluated;
/// witness sets are held as 128-bit masks.
pub const UF_UNIVERSE_MAX: usize = 128;

/// Tarskian evaluation, with the ultrafilter quantifier semantics:
/// `Uforall[d] x body` holds when the set of points satisfying `body`
/// belongs to the ultrafilter assigned to `d`, and `Uexists` is evaluated
/// as `~Uforall ~`.
pub fn evaluate(m: &Model, f: &Formula, a: &Assignment) -> Result<bool, EvalError> {
    let mut vars = a.vars.clone();
    eval_rec(m, f, &mut vars, &a.ufs)
}

fn eval_term(m: &Model, t: &Term, vars: &BTreeMap<String, usize>) -> Result<usize, EvalError> {
    match t {
        Term::Var(v) => vars
            .get(v)
            .copied()
            .ok_or_else(|| EvalError::MissingVariable(v.clone())),
        Term::App { func, args } => {
            let vals = args
                .iter()
                .map(|a| eval_term(m, a, vars))
                .collect::<Result<Vec<_>, _>>()?;
            if m.function(func).is_none() {
                return Err(EvalError::UnknownSymbol(func.clone()));
            }
            m.value(func, &vals)
                .ok_or_else(|| EvalError::FunctionValueMissing {
                    name: func.clone(),
                    args: vals,
                })
        }
    }
}

fn eval_rec(
    m: &Model,
    f: &Formula,
    vars: &mut BTreeMap<String, usize>,
    ufs: &BTreeMap<String, FiniteUltrafilter>,
) -> Result<bool, EvalError> {
    match f {
        Formula::Equal(a, b) => Ok(eval_term(m, a, vars)? == eval_term(m, b, vars)?),
        Formula::Pred { pred, args } => {
            let vals = args
                .iter()
                .map(|a| eval_term(m, a, vars))
                .collect::<Result<Vec<_>, _>>()?;
            if m.relation(pred).is_none() {
                return Err(EvalError::UnknownSymbol(pred.clone()));
            }
            Ok(m.holds(pred, &vals))
        }
        Formula::Not(x) => Ok(!eval_rec(m, x, vars, ufs)?),
        Formula::And(a, b) => Ok(eval_rec(m, a, vars, ufs)? && eval_rec(m, b, vars, ufs)?),
        Formula::Or(a, b) => Ok(eval_rec(m, a, vars, ufs)? || eval_rec(m, b, vars, ufs)?),
        Formula::Implies(a, b) => Ok(!eval_rec(m, a, vars, ufs)? || eval_rec(m, b, vars, ufs)?),
        Formula::Forall { var, body } => {
            let saved = vars.get(var).copied();
            let mut all = true;
            for i in 0..m.size() {
                vars.insert(var.clone(), i);
                if !eval_rec(m, body, vars, ufs)? {
                    all = false;
                    break;
                }
            }
            restore(vars, var, saved);
            Ok(all)
        }
        Formula::Exists { var, body } => {
            let saved = vars.get(var).copied();
            let mut any = false;
            for i in 0..m.size() {
                vars.insert(var.clone(), i);
                if eval_rec(m, body, vars, ufs)? {
                    any = true;
                    break;
                }
            }
            restore(vars, var, saved);
            Ok(any)
        }
        Formula::UfQuant {
            mode,
            param,
            var,
            body,
        } => {
            let d = ufs
                .get(param)
                .ok_or_else(|| EvalError::MissingParameter(param.clone()))?;
            if d.universe_size() != m.size() {
                return Err(EvalError::ParameterUniverse {
                    name: param.clone(),
                    expected: m.size(),
                    got: d.universe_size(),
                });
            }
            if m.size() > UF_UNIVERSE_MAX {
                return Err(EvalError::UniverseTooLarge {
                    size: m.size(),
                    max: UF_UNIVERSE_MAX,
                });
            }
            // The definable set {i : body(i)} is computed once per node.
            let saved = vars.get(var).copied();
            let mut witness = 0u128;
            let mut failed = None;
            for i in 0..m.size() {
                vars.insert(var.clone(), i);
                match eval_rec(m, body, vars, ufs) {
                    Ok(true) => witness |= 1u128 << i,
                    Ok(false) => {}
                    Err(e) => {
                        failed = Some(e);
                        break;
                    }
                }
            }
            restore(vars, var, saved);
            if let Some(e) = failed {
                return Err(e);
            }
            match mode {
                UfMode::Forall => Ok(d.contains(witness)),
                UfMode::Exists => {
                    let full = if m.size() == UF_UNIVERSE_MAX {
                        u128::MAX
                    } else {
                        (1u128 << m.size()) - 1
                    };
                    Ok(!d.contains(!witness & full))
                }
            }
        }
    }
}

fn restore(vars: &mut BTreeMap<String, usize>, var: &str, saved: Option<usize>) {
    match saved {
        Some(v) => {
            vars.insert(var.to_string(), v);
        }
        None => {
            vars.remove(var);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, Vocabulary};

    fn tau() -> Vocabulary {
        Vocabulary::new(
            vec![("P1".into(), 1), ("P2".into(), 1), ("R".into(), 2)],
            vec![("F".into(), 2)],
        )
        .unwrap()
    }

    #[test]
    fn parses_the_symmetry_formula() {
        let text = "P1(x) & forall y (P1(y) -> F(x,y) = F(y,x))";
        let f = parse_formula(text, &tau()).unwrap();
        let expected = Formula::and(
            Formula::Pred {
                pred: "P1".into(),
                args: vec![Term::Var("x".into())],
            },
            Formula::forall(
                "y",
                Formula::implies(
                    Formula::Pred {
                        pred: "P1".into(),
                        args: vec![Term::Var("y".into())],
                    },
                    Formula::Equal(
                        Term::App {
                            func: "F".into(),
                            args: vec![Term::Var("x".into()), Term::Var("y".into())],
                        },
                        Term::App {
                            func: "F".into(),
                            args: vec![Term::Var("y".into()), Term::Var("x".into())],
                        },
                    ),
                ),
            ),
        );
        assert_eq!(f, expected);
        let names = f.free_names();
        assert_eq!(names.vars.into_iter().collect::<Vec<_>>(), vec!["x"]);
        assert!(names.ufs.is_empty());
    }

    #[test]
    fn parses_ultrafilter_quantifier() {
        let f = parse_formula("Uforall[d] x (P1(x))", &tau()).unwrap();
        assert_eq!(
            f,
            Formula::ufquant(
                UfMode::Forall,
                "d",
                "x",
                Formula::Pred {
                    pred: "P1".into(),
                    args: vec![Term::Var("x".into())],
                },
            )
        );
        assert_eq!(
            f.free_names().ufs.into_iter().collect::<Vec<_>>(),
            vec!["d"]
        );
    }

    #[test]
    fn reports_syntax_errors_with_position() {
        let err = parse_formula("P1(x,", &tau()).unwrap_err();
        assert_eq!((err.line, err.col), (1, 6));
        assert!(parse_formula("Q(x)", &tau()).is_err());
        assert!(parse_formula("forall x forall x P1(x)", &tau()).is_err());
        assert!(parse_formula("R(x)", &tau()).is_err());
    }

    #[test]
    fn quantifiers_scope_maximally_right() {
        let f = parse_formula("P1(x) & forall y P1(y) -> F(x,y) = F(y,x)", &tau()).unwrap();
        // The quantifier captures the implication, then `&` applies.
        match f {
            Formula::And(_, rhs) => assert!(matches!(*rhs, Formula::Forall { .. })),
            other => panic!("unexpected shape: {other}"),
        }
    }

    #[test]
    fn display_round_trips() {
        let vocab = tau();
        for text in [
            "P1(x) & forall y (P1(y) -> F(x,y) = F(y,x))",
            "Uforall[d] x (P1(x) | ~P2(x))",
            "exists y Uexists[u] x (R(x,y) -> x = y)",
            "F(x, F(y, z)) = x",
        ] {
            let f = parse_formula(text, &vocab).unwrap();
            let rendered = f.to_string();
            let f2 = parse_formula(&rendered, &vocab).unwrap();
            assert_eq!(f, f2, "failed on {text} rendered as {rendered}");
        }
    }

    fn small_model() -> Model {
        // n = 3, R = {(0,1)}, P1 = {0}, F(x,y) = x.
        let mut m = Model::new(tau(), 3).unwrap();
        m.add_tuple("P1", vec![0]).unwrap();
        m.add_tuple("R", vec![0, 1]).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                m.set_value("F", vec![x, y], x).unwrap();
            }
        }
        m
    }

    #[test]
    fn nested_ultrafilter_quantifiers_expand_correctly() {
        use crate::beta::FiniteUltrafilter;
        let m = small_model();
        let f = parse_formula("Uforall[d1] x1 Uforall[d2] x2 R(x1, x2)", &tau()).unwrap();
        let j = |p| FiniteUltrafilter::new(3, p).unwrap();
        let a = Assignment::new().with_uf("d1", j(0)).with_uf("d2", j(1));
        assert!(evaluate(&m, &f, &a).unwrap());
        let a = Assignment::new().with_uf("d1", j(0)).with_uf("d2", j(2));
        assert!(!evaluate(&m, &f, &a).unwrap());
    }

    #[test]
    fn principal_quantifier_reduces_to_substitution() {
        use crate::beta::FiniteUltrafilter;
        let m = small_model();
        let body = parse_formula("P1(x) | R(x, y)", &tau()).unwrap();
        let q = Formula::ufquant(UfMode::Forall, "d", "x", body.clone());
        for point in 0..3 {
            for y in 0..3 {
                let a = Assignment::new()
                    .with_var("y", y)
                    .with_uf("d", FiniteUltrafilter::new(3, point).unwrap());
                let direct = evaluate(
                    &m,
                    &body,
                    &Assignment::new().with_var("x", point).with_var("y", y),
                )
                .unwrap();
                assert_eq!(evaluate(&m, &q, &a).unwrap(), direct);
            }
        }
    }

    #[test]
    fn ultrafilter_quantifier_is_self_dual() {
        use crate::beta::FiniteUltrafilter;
        let m = small_model();
        let body = parse_formula("R(x, y) -> P1(x)", &tau()).unwrap();
        for point in 0..3 {
            for y in 0..3 {
                let a = Assignment::new()
                    .with_var("y", y)
                    .with_uf("d", FiniteUltrafilter::new(3, point).unwrap());
                let fa = Formula::ufquant(UfMode::Forall, "d", "x", body.clone());
                let ex = Formula::ufquant(UfMode::Exists, "d", "x", body.clone());
                assert_eq!(
                    evaluate(&m, &fa, &a).unwrap(),
                    evaluate(&m, &ex, &a).unwrap()
                );
            }
        }
    }

    #[test]
    fn missing_assignment_entries_error() {
        let m = small_model();
        let f = parse_formula("P1(x)", &tau()).unwrap();
        assert_eq!(
            evaluate(&m, &f, &Assignment::new()),
            Err(EvalError::MissingVariable("x".into()))
        );
        let q = parse_formula("Uforall[d] x P1(x)", &tau()).unwrap();
        assert_eq!(
            evaluate(&m, &q, &Assignment::new()),
            Err(EvalError::MissingParameter("d".into()))
        );
    }

    #[test]
    fn wrong_universe_ultrafilter_errors() {
        use crate::beta::FiniteUltrafilter;
        let m = small_model();
        let q = parse_formula("Uforall[d] x P1(x)", &tau()).unwrap();
        let a = Assignment::new().with_uf("d", FiniteUltrafilter::new(5, 0).unwrap());
        assert!(matches!(
            evaluate(&m, &q, &a),
            Err(EvalError::ParameterUniverse { .. })
        ));
    }
}
