//! Name resolution and type checking from syntax trees to compiled
//! formulas. Macros are expanded here.

use std::collections::HashMap;

use super::*;
use crate::formula::{read_offsets, Formula, Term, Time, TimeSlot, VarId};
use crate::lang::{Anchor, CmpOp, FormulaAst, MacroAst, MacroBody, TermAst, TimeAst};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Ty {
    Obj(SortId),
    Num,
}

impl Ty {
    pub(crate) fn of(v: ValueType) -> Ty {
        match v {
            ValueType::Obj(s) => Ty::Obj(s),
            ValueType::Num(_) => Ty::Num,
        }
    }
}

#[derive(Clone)]
enum Binding {
    Var(VarId, Ty),
    Term(Term, Ty),
}

pub(crate) struct Scope {
    names: Vec<(String, Binding)>,
    times: Vec<(String, Time)>,
    current: Time,
}

impl Scope {
    pub(crate) fn new(current: Time) -> Self {
        Scope {
            names: vec![],
            times: vec![],
            current,
        }
    }

    pub(crate) fn time_var(&mut self, name: &str, t: Time) {
        self.times.push((name.to_string(), t));
    }

    pub(crate) fn var(&mut self, name: &str, id: VarId, sort: SortId) {
        self.names.push((name.to_string(), Binding::Var(id, Ty::Obj(sort))));
    }

}

/// Names visible while compiling; borrowed from the domain under construction.
pub(crate) struct Names<'a> {
    pub sorts: &'a SortTable,
    pub fluents: &'a [FluentDecl],
    pub fluent_by_name: &'a HashMap<String, FluentId>,
    pub resources: &'a [ResourceDecl],
    pub resource_by_name: &'a HashMap<String, ResId>,
    pub macros: &'a HashMap<String, MacroAst>,
    pub dist: &'a [DistFeature],
    pub mindist: &'a [MinDistFeature],
}

pub(crate) struct Compiler<'a> {
    pub names: Names<'a>,
    pub nvars: u32,
    pub ntimes: u32,
    /// Free variables collected so far; `None` when free variables are not allowed.
    pub free: Option<Vec<(String, VarId, SortId)>>,
    expanding: Vec<String>,
}

type R<T> = Result<T, ModelError>;

impl<'a> Compiler<'a> {
    pub(crate) fn new(names: Names<'a>, nvars: u32, ntimes: u32, allow_free: bool) -> Self {
        Compiler {
            names,
            nvars,
            ntimes,
            free: allow_free.then(Vec::new),
            expanding: vec![],
        }
    }

    pub(crate) fn new_var(&mut self) -> VarId {
        self.nvars += 1;
        self.nvars - 1
    }

    fn new_slot(&mut self) -> TimeSlot {
        self.ntimes += 1;
        self.ntimes - 1
    }

    pub(crate) fn var_sort(&self, name: &str) -> R<SortId> {
        let s = self
            .names
            .sorts
            .sort_of_var(name)
            .ok_or_else(|| ModelError::UnknownSort(strip_var(name).to_string()))?;
        if self.names.sorts.numeric(s).is_some() {
            return Err(ModelError::TypeMismatch(format!(
                "variable `{name}` ranges over a numeric sort"
            )));
        }
        Ok(s)
    }

    pub(crate) fn time(&self, sc: &Scope, t: &TimeAst) -> R<Time> {
        match &t.var {
            None => Ok(Time::Abs(t.offset)),
            Some(v) => sc
                .times
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, base)| base.shifted(t.offset))
                .ok_or_else(|| ModelError::UnknownName(v.clone())),
        }
    }

    /// Resolve an interval anchor to closed bounds.
    pub(crate) fn interval(&self, sc: &Scope, a: &Anchor) -> R<(Time, Time)> {
        match a {
            Anchor::Point(t) => {
                let t = self.time(sc, t)?;
                Ok((t, t))
            }
            Anchor::Interval {
                lo,
                hi,
                lo_open,
                hi_open,
            } => {
                let lo = self.time(sc, lo)?.shifted(*lo_open as i64);
                let hi = self.time(sc, hi)?.shifted(-(*hi_open as i64));
                Ok((lo, hi))
            }
        }
    }

    pub(crate) fn formula(&mut self, sc: &mut Scope, f: &FormulaAst) -> R<Formula> {
        Ok(match f {
            FormulaAst::True => Formula::True,
            FormulaAst::False => Formula::False,
            FormulaAst::Anchored(Anchor::Point(t), inner) => {
                let t = self.time(sc, t)?;
                let saved = sc.current;
                sc.current = t;
                let r = self.formula(sc, inner);
                sc.current = saved;
                r?
            }
            FormulaAst::Anchored(a, inner) => {
                let (lo, hi) = self.interval(sc, a)?;
                let slot = self.new_slot();
                let saved = sc.current;
                sc.current = Time::Rel(slot, 0);
                let body = self.formula(sc, inner);
                sc.current = saved;
                let body = body?;
                Formula::Interval {
                    slot,
                    lo,
                    hi,
                    offsets: read_offsets(&body, slot),
                    body: Box::new(body),
                }
            }
            FormulaAst::Not(a) => Formula::Not(Box::new(self.formula(sc, a)?)),
            FormulaAst::And(v) => Formula::And(
                v.iter()
                    .map(|x| self.formula(sc, x))
                    .collect::<R<Vec<_>>>()?,
            ),
            FormulaAst::Or(v) => Formula::Or(
                v.iter()
                    .map(|x| self.formula(sc, x))
                    .collect::<R<Vec<_>>>()?,
            ),
            FormulaAst::Implies(a, b) => Formula::Implies(
                Box::new(self.formula(sc, a)?),
                Box::new(self.formula(sc, b)?),
            ),
            FormulaAst::Exists(vars, body) | FormulaAst::Forall(vars, body) => {
                let forall = matches!(f, FormulaAst::Forall(..));
                let mark = sc.names.len();
                let mut bound = vec![];
                for v in vars {
                    let s = self.var_sort(v)?;
                    let id = self.new_var();
                    sc.var(v, id, s);
                    bound.push((id, s));
                }
                let body = self.formula(sc, body);
                sc.names.truncate(mark);
                Formula::Quant {
                    forall,
                    vars: bound,
                    body: Box::new(body?),
                }
            }
            FormulaAst::Goal(inner) => Formula::Goal(Box::new(self.formula(sc, inner)?)),
            FormulaAst::Atom(t) => self.atom(sc, t)?,
            FormulaAst::Cmp(op, a, b) => {
                let (ta, ya) = self.term(sc, a)?;
                let (tb, yb) = self.term(sc, b)?;
                match (ya, yb) {
                    (Ty::Num, Ty::Num) => {}
                    (Ty::Obj(_), Ty::Obj(_)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {}
                    _ => {
                        return Err(ModelError::TypeMismatch(format!(
                            "cannot compare {} with {}",
                            crate::lang::unparse_term(a),
                            crate::lang::unparse_term(b)
                        )))
                    }
                }
                Formula::Cmp(*op, ta, tb)
            }
        })
    }

    fn atom(&mut self, sc: &mut Scope, t: &TermAst) -> R<Formula> {
        let (name, args): (&str, &[TermAst]) = match t {
            TermAst::Ident(n) => (n, &[]),
            TermAst::App(n, a) => (n, a),
            _ => ("", &[]),
        };
        if !name.is_empty() && self.lookup(sc, name).is_none() && self.names.macros.contains_key(name) {
            let args = args
                .iter()
                .map(|a| self.term(sc, a))
                .collect::<R<Vec<_>>>()?;
            return match self.expand(sc, name, args)? {
                Expanded::Formula(f) => Ok(f),
                Expanded::Term(t, Ty::Obj(BOOL_SORT)) => Ok(Formula::Atom(t)),
                Expanded::Term(..) => Err(ModelError::TypeMismatch(format!(
                    "macro `{name}` is not boolean"
                ))),
            };
        }
        let (term, ty) = self.term(sc, t)?;
        if ty != Ty::Obj(BOOL_SORT) {
            return Err(ModelError::TypeMismatch(format!(
                "`{}` is not boolean",
                crate::lang::unparse_term(t)
            )));
        }
        Ok(Formula::Atom(term))
    }

    fn lookup(&self, sc: &Scope, name: &str) -> Option<Binding> {
        sc.names
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.clone())
    }

    fn check_arg(&self, fname: &str, declared: SortId, ty: Ty) -> R<()> {
        match ty {
            Ty::Obj(s)
                if self.names.sorts.is_subsort(s, declared)
                    || self.names.sorts.is_subsort(declared, s) =>
            {
                Ok(())
            }
            _ => Err(ModelError::TypeMismatch(format!(
                "argument of `{fname}` must be a {}",
                self.names.sorts.sort_name(declared)
            ))),
        }
    }

    fn args(&mut self, sc: &mut Scope, name: &str, sorts: &[SortId], args: &[TermAst]) -> R<Vec<Term>> {
        if sorts.len() != args.len() {
            return Err(ModelError::ArityMismatch {
                name: name.to_string(),
                expected: sorts.len(),
                found: args.len(),
            });
        }
        let mut out = vec![];
        for (&s, a) in sorts.iter().zip(args) {
            let (t, ty) = self.term(sc, a)?;
            self.check_arg(name, s, ty)?;
            out.push(t);
        }
        Ok(out)
    }

    pub(crate) fn term(&mut self, sc: &mut Scope, t: &TermAst) -> R<(Term, Ty)> {
        match t {
            TermAst::Number(n) => Ok((Term::Const(Value::Num(*n)), Ty::Num)),
            TermAst::Ident(name) => self.ident(sc, name),
            TermAst::App(name, args) => self.app(sc, name, args),
            TermAst::MinDist {
                name,
                args,
                binder,
                cond,
            } => {
                let md = self
                    .names
                    .mindist
                    .iter()
                    .position(|m| &m.name == name)
                    .ok_or_else(|| ModelError::UnknownName(name.clone()))?;
                let df = &self.names.dist[self.names.mindist[md].dist];
                let (extra, node) = (df.extra_sorts.clone(), df.node_sort);
                let mut sorts = extra;
                sorts.push(node);
                let args = self.args(sc, name, &sorts, args)?;
                let id = self.new_var();
                let mark = sc.names.len();
                sc.var(binder, id, node);
                let cond = self.formula(sc, cond);
                sc.names.truncate(mark);
                Ok((
                    Term::MinDist {
                        feature: md,
                        args,
                        binder: id,
                        cond: Box::new(cond?),
                        at: sc.current,
                    },
                    Ty::Num,
                ))
            }
            TermAst::Value(tm, inner) => {
                let at = self.time(sc, tm)?;
                let saved = sc.current;
                sc.current = at;
                let r = self.term(sc, inner);
                sc.current = saved;
                r
            }
            TermAst::Aspect(aspect, res, args) => {
                let r = *self
                    .names
                    .resource_by_name
                    .get(res)
                    .ok_or_else(|| ModelError::UnknownName(res.clone()))?;
                let sorts = self.names.resources[r as usize].args.clone();
                let args = self.args(sc, res, &sorts, args)?;
                Ok((
                    Term::Aspect {
                        aspect: *aspect,
                        res: r,
                        args,
                        at: sc.current,
                    },
                    Ty::Num,
                ))
            }
            TermAst::Sum { var, cond, term } => {
                let s = self.var_sort(var)?;
                let id = self.new_var();
                let mark = sc.names.len();
                sc.var(var, id, s);
                let c = self.formula(sc, cond);
                let t = self.term(sc, term);
                sc.names.truncate(mark);
                let (t, ty) = t?;
                if ty != Ty::Num {
                    return Err(ModelError::TypeMismatch("summed term must be numeric".into()));
                }
                Ok((
                    Term::Sum {
                        var: id,
                        sort: s,
                        cond: Box::new(c?),
                        term: Box::new(t),
                    },
                    Ty::Num,
                ))
            }
            TermAst::Arith(op, a, b) => {
                let (ta, ya) = self.term(sc, a)?;
                let (tb, yb) = self.term(sc, b)?;
                if ya != Ty::Num || yb != Ty::Num {
                    return Err(ModelError::TypeMismatch(format!(
                        "arithmetic on non-numeric term in {}",
                        crate::lang::unparse_term(t)
                    )));
                }
                Ok((Term::Arith(*op, Box::new(ta), Box::new(tb)), Ty::Num))
            }
            TermAst::Neg(a) => {
                let (ta, ya) = self.term(sc, a)?;
                if ya != Ty::Num {
                    return Err(ModelError::TypeMismatch("negation of non-numeric term".into()));
                }
                Ok((Term::Neg(Box::new(ta)), Ty::Num))
            }
        }
    }

    fn ident(&mut self, sc: &mut Scope, name: &str) -> R<(Term, Ty)> {
        if let Some(b) = self.lookup(sc, name) {
            return Ok(match b {
                Binding::Var(id, ty) => (Term::Var(id), ty),
                Binding::Term(t, ty) => (t, ty),
            });
        }
        if let Some(o) = self.names.sorts.object(name) {
            return Ok((
                Term::Const(Value::Obj(o)),
                Ty::Obj(self.names.sorts.object_sort(o)),
            ));
        }
        if self.names.fluent_by_name.contains_key(name) || self.names.macros.contains_key(name) {
            return self.app(sc, name, &[]);
        }
        if let Some(free) = &mut self.free {
            if let Some((_, id, s)) = free.iter().find(|(n, _, _)| n == name) {
                return Ok((Term::Var(*id), Ty::Obj(*s)));
            }
            if let Some(s) = self.names.sorts.sort_of_var(name) {
                if self.names.sorts.numeric(s).is_none() {
                    let id = self.nvars;
                    self.nvars += 1;
                    self.free.as_mut().unwrap().push((name.to_string(), id, s));
                    return Ok((Term::Var(id), Ty::Obj(s)));
                }
            }
        }
        Err(ModelError::UnknownName(name.to_string()))
    }

    fn app(&mut self, sc: &mut Scope, name: &str, args: &[TermAst]) -> R<(Term, Ty)> {
        if let Some(&f) = self.names.fluent_by_name.get(name) {
            let decl = &self.names.fluents[f as usize];
            let (sorts, value) = (decl.args.clone(), decl.value);
            let args = self.args(sc, name, &sorts, args)?;
            return Ok((
                Term::Fluent {
                    fluent: f,
                    args,
                    at: sc.current,
                },
                Ty::of(value),
            ));
        }
        if self.names.macros.contains_key(name) {
            let args = args
                .iter()
                .map(|a| self.term(sc, a))
                .collect::<R<Vec<_>>>()?;
            return match self.expand(sc, name, args)? {
                Expanded::Term(t, ty) => Ok((t, ty)),
                Expanded::Formula(Formula::Atom(t)) => Ok((t, Ty::Obj(BOOL_SORT))),
                Expanded::Formula(_) => Err(ModelError::TypeMismatch(format!(
                    "macro `{name}` is a formula, used as a value"
                ))),
            };
        }
        if let Some(d) = self.names.dist.iter().position(|d| d.name == name) {
            let df = &self.names.dist[d];
            let mut sorts = df.extra_sorts.clone();
            sorts.push(df.node_sort);
            sorts.push(df.node_sort);
            let args = self.args(sc, name, &sorts, args)?;
            return Ok((
                Term::Dist {
                    feature: d,
                    args,
                    at: sc.current,
                },
                Ty::Num,
            ));
        }
        if args.is_empty() {
            Err(ModelError::UnknownName(name.to_string()))
        } else {
            Err(ModelError::UnknownFluent(name.to_string()))
        }
    }

    fn expand(&mut self, sc: &mut Scope, name: &str, args: Vec<(Term, Ty)>) -> R<Expanded> {
        let m = self.names.macros[name].clone();
        if self.expanding.iter().any(|n| n == name) {
            return Err(ModelError::CyclicMacro(name.to_string()));
        }
        if m.params.len() != args.len() {
            return Err(ModelError::ArityMismatch {
                name: name.to_string(),
                expected: m.params.len(),
                found: args.len(),
            });
        }
        let mut inner = Scope::new(sc.current);
        inner.time_var(&m.time_var, sc.current);
        for (p, (t, ty)) in m.params.iter().zip(args) {
            if let Some(s) = self.names.sorts.sort_of_var(p) {
                self.check_arg(name, s, ty)?;
            }
            inner.names.push((p.clone(), Binding::Term(t, ty)));
        }
        self.expanding.push(name.to_string());
        let free = self.free.take();
        let r = match &m.body {
            MacroBody::Formula(f) => self.formula(&mut inner, f).map(Expanded::Formula),
            MacroBody::Term(t) => self.term(&mut inner, t).map(|(t, ty)| Expanded::Term(t, ty)),
        };
        self.free = free;
        self.expanding.pop();
        r
    }
}

enum Expanded {
    Formula(Formula),
    Term(Term, Ty),
}
