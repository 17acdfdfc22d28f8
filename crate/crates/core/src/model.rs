//! Symbolic constraint models over linear integer arithmetic and their
//! serialization to SMT-LIB 2 text.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => write!(f, "Int"),
            Sort::Bool => write!(f, "Bool"),
        }
    }
}

/// A concrete value of a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Int(i64),
    Bool(bool),
    Var(String),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Eq(Box<Term>, Box<Term>),
    Distinct(Vec<Term>),
    Le(Box<Term>, Box<Term>),
    Add(Vec<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn int(v: i64) -> Term {
        Term::Int(v)
    }

    pub fn not(t: Term) -> Term {
        match t {
            Term::Bool(b) => Term::Bool(!b),
            t => Term::Not(Box::new(t)),
        }
    }

    pub fn and(mut ts: Vec<Term>) -> Term {
        ts.retain(|t| *t != Term::Bool(true));
        if ts.contains(&Term::Bool(false)) {
            return Term::Bool(false);
        }
        match ts.len() {
            0 => Term::Bool(true),
            1 => ts.pop().unwrap(),
            _ => Term::And(ts),
        }
    }

    pub fn or(mut ts: Vec<Term>) -> Term {
        ts.retain(|t| *t != Term::Bool(false));
        if ts.contains(&Term::Bool(true)) {
            return Term::Bool(true);
        }
        match ts.len() {
            0 => Term::Bool(false),
            1 => ts.pop().unwrap(),
            _ => Term::Or(ts),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Bool(false), _) | (_, Term::Bool(true)) => Term::Bool(true),
            (Term::Bool(true), _) => b,
            _ => Term::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn eq(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Int(x), Term::Int(y)) => Term::Bool(x == y),
            _ => Term::Eq(Box::new(a), Box::new(b)),
        }
    }

    pub fn ne(a: Term, b: Term) -> Term {
        Term::not(Term::eq(a, b))
    }

    pub fn le(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Int(x), Term::Int(y)) => Term::Bool(x <= y),
            _ => Term::Le(Box::new(a), Box::new(b)),
        }
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::le(b, a)
    }

    pub fn distinct(ts: Vec<Term>) -> Term {
        if ts.len() < 2 {
            Term::Bool(true)
        } else {
            Term::Distinct(ts)
        }
    }

    pub fn add(mut ts: Vec<Term>) -> Term {
        match ts.len() {
            0 => Term::Int(0),
            1 => ts.pop().unwrap(),
            _ => Term::Add(ts),
        }
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        match c {
            Term::Bool(true) => a,
            Term::Bool(false) => b,
            c => Term::Ite(Box::new(c), Box::new(a), Box::new(b)),
        }
    }

    /// `1` if `t` holds, else `0`.
    pub fn indicator(t: Term) -> Term {
        Term::ite(t, Term::Int(1), Term::Int(0))
    }

    /// Evaluates the term under `lookup`; `None` on an unbound variable or a
    /// sort error.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<Value>) -> Option<Value> {
        let int = |t: &Term| match t.eval(lookup)? {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        };
        let boolean = |t: &Term| match t.eval(lookup)? {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        };
        Some(match self {
            Term::Int(v) => Value::Int(*v),
            Term::Bool(b) => Value::Bool(*b),
            Term::Var(name) => lookup(name)?,
            Term::Not(a) => Value::Bool(!boolean(a)?),
            Term::And(ts) => Value::Bool(ts.iter().map(boolean).collect::<Option<Vec<_>>>()?.into_iter().all(|b| b)),
            Term::Or(ts) => Value::Bool(ts.iter().map(boolean).collect::<Option<Vec<_>>>()?.into_iter().any(|b| b)),
            Term::Implies(a, b) => Value::Bool(!boolean(a)? || boolean(b)?),
            Term::Eq(a, b) => Value::Bool(a.eval(lookup)? == b.eval(lookup)?),
            Term::Distinct(ts) => {
                let vals = ts.iter().map(|t| t.eval(lookup)).collect::<Option<Vec<_>>>()?;
                Value::Bool((0..vals.len()).all(|i| !vals[i + 1..].contains(&vals[i])))
            }
            Term::Le(a, b) => Value::Bool(int(a)? <= int(b)?),
            Term::Add(ts) => Value::Int(ts.iter().map(int).sum::<Option<i64>>()?),
            Term::Ite(c, a, b) => {
                if boolean(c)? {
                    a.eval(lookup)?
                } else {
                    b.eval(lookup)?
                }
            }
        })
    }

    fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Term::Int(_) | Term::Bool(_) => {}
            Term::Var(name) => f(name),
            Term::Not(a) => a.visit_vars(f),
            Term::And(ts) | Term::Or(ts) | Term::Distinct(ts) | Term::Add(ts) => {
                ts.iter().for_each(|t| t.visit_vars(f))
            }
            Term::Implies(a, b) | Term::Eq(a, b) | Term::Le(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Term::Ite(c, a, b) => {
                c.visit_vars(f);
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, op: &str, ts: &[Term]) -> fmt::Result {
    write!(f, "({op}")?;
    for t in ts {
        write!(f, " {t}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) if *v < 0 => write!(f, "(- {})", v.unsigned_abs()),
            Term::Int(v) => write!(f, "{v}"),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Var(name) => write!(f, "{name}"),
            Term::Not(a) => write!(f, "(not {a})"),
            Term::And(ts) => write_list(f, "and", ts),
            Term::Or(ts) => write_list(f, "or", ts),
            Term::Implies(a, b) => write!(f, "(=> {a} {b})"),
            Term::Eq(a, b) => write!(f, "(= {a} {b})"),
            Term::Distinct(ts) => write_list(f, "distinct", ts),
            Term::Le(a, b) => write!(f, "(<= {a} {b})"),
            Term::Add(ts) => write_list(f, "+", ts),
            Term::Ite(c, a, b) => write!(f, "(ite {c} {a} {b})"),
        }
    }
}

/// Variable declarations, assertions and the decode-relevant query list of
/// one constraint model at a fixed horizon.
#[derive(Debug, Clone, Default)]
pub struct SymbolicModel {
    pub horizon: usize,
    decls: Vec<(String, Sort)>,
    names: HashSet<String>,
    assertions: Vec<Term>,
    queries: Vec<String>,
    objective: Option<String>,
}

impl SymbolicModel {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            ..Default::default()
        }
    }

    pub fn declare(&mut self, name: impl Into<String>, sort: Sort) -> Term {
        let name = name.into();
        assert!(
            self.names.insert(name.clone()),
            "variable {name} declared twice"
        );
        self.decls.push((name.clone(), sort));
        Term::Var(name)
    }

    /// Declares an integer with inclusive bounds.
    pub fn declare_int(&mut self, name: impl Into<String>, lo: i64, hi: i64) -> Term {
        let v = self.declare(name, Sort::Int);
        if lo == hi {
            self.assert(Term::eq(v.clone(), Term::int(lo)));
        } else {
            self.assert(Term::and(vec![
                Term::le(Term::int(lo), v.clone()),
                Term::le(v.clone(), Term::int(hi)),
            ]));
        }
        v
    }

    pub fn declare_bool(&mut self, name: impl Into<String>) -> Term {
        self.declare(name, Sort::Bool)
    }

    /// Adds an assertion. Literal `true` is dropped.
    pub fn assert(&mut self, t: Term) {
        if t != Term::Bool(true) {
            self.assertions.push(t);
        }
    }

    pub fn query(&mut self, name: impl Into<String>) {
        self.queries.push(name.into());
    }

    pub fn set_objective(&mut self, name: impl Into<String>) {
        self.objective = Some(name.into());
    }

    pub fn objective(&self) -> Option<&str> {
        self.objective.as_deref()
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.decls.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn decls(&self) -> &[(String, Sort)] {
        &self.decls
    }

    pub fn assertions(&self) -> &[Term] {
        &self.assertions
    }

    pub fn queries(&self) -> &[String] {
        &self.queries
    }

    /// Whether every assertion holds under `lookup`; `None` if some
    /// assertion cannot be evaluated.
    pub fn satisfied_by(&self, lookup: &dyn Fn(&str) -> Option<Value>) -> Option<bool> {
        for a in &self.assertions {
            match a.eval(lookup)? {
                Value::Bool(true) => {}
                Value::Bool(false) => return Some(false),
                Value::Int(_) => return None,
            }
        }
        Some(true)
    }

    /// Appends another fragment over the same namespace.
    pub fn merge(&mut self, other: SymbolicModel) {
        for (name, sort) in other.decls {
            self.declare(name, sort);
        }
        self.assertions.extend(other.assertions);
        self.queries.extend(other.queries);
        if other.objective.is_some() {
            self.objective = other.objective;
        }
    }
}

/// Serializes a model as a QF_LIA SMT-LIB 2 script: declarations, assertions,
/// `(check-sat)` and a `(get-value ...)` over the queried variables.
pub fn emit_solver_text(m: &SymbolicModel) -> Result<String> {
    let mut undeclared = None;
    for t in &m.assertions {
        t.visit_vars(&mut |name| {
            if undeclared.is_none() && !m.names.contains(name) {
                undeclared = Some(name.to_string());
            }
        });
    }
    if let Some(name) = undeclared.or_else(|| {
        m.queries
            .iter()
            .find(|q| !m.names.contains(q.as_str()))
            .cloned()
    }) {
        return Err(Error::Internal(format!("undeclared variable {name}")));
    }

    let mut out = String::new();
    if !m.queries.is_empty() {
        out.push_str("(set-option :produce-models true)\n");
    }
    out.push_str("(set-logic QF_LIA)\n");
    for (name, sort) in &m.decls {
        out.push_str(&format!("(declare-fun {name} () {sort})\n"));
    }
    for t in &m.assertions {
        out.push_str(&format!("(assert {t})\n"));
    }
    out.push_str("(check-sat)\n");
    if !m.queries.is_empty() {
        out.push_str("(get-value (");
        out.push_str(&m.queries.join(" "));
        out.push_str("))\n");
    }
    Ok(out)
}

/// Stable variable names shared by the encoders and the decoder.
pub mod names {
    pub fn eta(p: usize, t: usize) -> String {
        format!("eta_{p}_{t}")
    }

    pub fn en(p: usize, u: usize, t: usize) -> String {
        format!("en_{p}_{u}_{t}")
    }

    pub fn dbusy(p: usize, t: usize) -> String {
        format!("dbusy_{p}_{t}")
    }

    pub fn pi(q: usize, t: usize) -> String {
        format!("pi_{q}_{t}")
    }

    pub fn z(c: usize) -> String {
        format!("z_{c}")
    }

    pub fn loc(c: usize) -> String {
        format!("loc_{c}")
    }

    pub fn swap(p: usize, u: usize, t: usize) -> String {
        format!("swap_{p}_{u}_{t}")
    }

    pub const COST: &str = "cost";
}
