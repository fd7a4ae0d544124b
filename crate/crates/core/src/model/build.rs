//! Assemble a [`Domain`] and a [`Problem`] from parsed statements.

use std::collections::HashMap;
use std::sync::Arc;

use super::resolve::{Compiler, Names, Scope, Ty};
use super::*;
use crate::formula::{read_offsets, Formula, Term, Time};
use crate::lang::{
    self, Anchor, Aspect, CmpOp, DistFeatureAst, FluentDeclAst, FormulaAst, MacroBody, OperatorAst,
    ResourceDeclAst, SortDeclAst, Statement, StatementKind, TermAst, ValueSortAst,
};

type R<T> = Result<T, ModelError>;

fn num_domain(v: &ValueSortAst) -> R<Option<NumDomain>> {
    let (decimals, lo, hi) = match v {
        ValueSortAst::Named(_) => return Ok(None),
        ValueSortAst::Integer { lo, hi } => (0, *lo, *hi),
        ValueSortAst::Fixed { decimals, lo, hi } => {
            if *decimals == 0 {
                return Err(ModelError::InvalidDeclaration(
                    "fixed-point domain needs at least one decimal".into(),
                ));
            }
            (*decimals, *lo, *hi)
        }
    };
    let bad = |e: crate::fixed::FixedError| ModelError::InvalidDeclaration(e.to_string());
    let lo = lo.rescale(decimals).map_err(bad)?;
    let hi = hi.rescale(decimals).map_err(bad)?;
    if lo > hi {
        return Err(ModelError::InvalidDeclaration(format!(
            "empty numeric domain [{lo}, {hi}]"
        )));
    }
    Ok(Some(NumDomain { decimals, lo, hi }))
}

fn value_type(sorts: &SortTable, v: &ValueSortAst) -> R<ValueType> {
    if let ValueSortAst::Named(name) = v {
        let s = sorts
            .sort(name)
            .ok_or_else(|| ModelError::UnknownSort(name.clone()))?;
        return Ok(match sorts.numeric(s) {
            Some(d) => ValueType::Num(d),
            None => ValueType::Obj(s),
        });
    }
    Ok(ValueType::Num(num_domain(v)?.unwrap()))
}

fn object_sort(sorts: &SortTable, name: &str) -> R<SortId> {
    let s = sorts
        .sort(name)
        .ok_or_else(|| ModelError::UnknownSort(name.to_string()))?;
    if sorts.numeric(s).is_some() {
        return Err(ModelError::TypeMismatch(format!(
            "numeric sort `{name}` used as an argument sort"
        )));
    }
    Ok(s)
}

fn add_objects(sorts: &mut SortTable, groups: &[(Vec<String>, String)]) -> R<()> {
    for (names, sort) in groups {
        let s = sorts
            .sort(sort)
            .ok_or_else(|| ModelError::UnknownSort(sort.clone()))?;
        for n in names {
            sorts.add_object(n, s)?;
        }
    }
    Ok(())
}

fn add_sorts(sorts: &mut SortTable, decls: &[SortDeclAst]) -> R<()> {
    for d in decls {
        let numeric = match &d.numeric {
            Some(v) => Some(num_domain(v)?.ok_or_else(|| {
                ModelError::InvalidDeclaration(format!("sort `{}` aliases another sort", d.name))
            })?),
            None => None,
        };
        if numeric.is_some() && d.parent.is_some() {
            return Err(ModelError::InvalidDeclaration(format!(
                "numeric sort `{}` cannot have a parent",
                d.name
            )));
        }
        sorts.add_sort(&d.name, None, numeric)?;
    }
    Ok(())
}

fn set_parents(sorts: &mut SortTable, decls: &[SortDeclAst]) -> R<()> {
    for d in decls {
        if let Some(p) = &d.parent {
            let ps = object_sort(sorts, p)?;
            let s = sorts.sort(&d.name).unwrap();
            sorts.set_parent(s, ps)?;
        }
    }
    Ok(())
}

struct Builder {
    sorts: SortTable,
    fluents: Vec<FluentDecl>,
    fluent_by_name: HashMap<String, FluentId>,
    resources: Vec<ResourceDecl>,
    resource_by_name: HashMap<String, ResId>,
    macros: HashMap<String, lang::MacroAst>,
    dist: Vec<DistFeature>,
    mindist: Vec<MinDistFeature>,
    options: Options,
}

impl Builder {
    fn names(&self) -> Names<'_> {
        Names {
            sorts: &self.sorts,
            fluents: &self.fluents,
            fluent_by_name: &self.fluent_by_name,
            resources: &self.resources,
            resource_by_name: &self.resource_by_name,
            macros: &self.macros,
            dist: &self.dist,
            mindist: &self.mindist,
        }
    }

    fn taken(&self, name: &str) -> bool {
        self.fluent_by_name.contains_key(name)
            || self.resource_by_name.contains_key(name)
            || self.macros.contains_key(name)
            || self.dist.iter().any(|d| d.name == name)
            || self.mindist.iter().any(|d| d.name == name)
    }

    fn fluent(&mut self, d: &FluentDeclAst) -> R<()> {
        if self.taken(&d.name) {
            return Err(ModelError::DuplicateDeclaration(d.name.clone()));
        }
        let args = d
            .args
            .iter()
            .map(|a| object_sort(&self.sorts, a))
            .collect::<R<Vec<_>>>()?;
        let value = match &d.value {
            Some(v) => value_type(&self.sorts, v)?,
            None => ValueType::Obj(BOOL_SORT),
        };
        let functional = match d.functional {
            None => None,
            Some(p) if value.is_bool() && p >= 1 && p <= args.len() => Some(p - 1),
            Some(p) => {
                return Err(ModelError::InvalidDeclaration(format!(
                    "`{}`: functional position {p} needs a boolean fluent with that many arguments",
                    d.name
                )))
            }
        };
        self.fluent_by_name
            .insert(d.name.clone(), self.fluents.len() as FluentId);
        self.fluents.push(FluentDecl {
            name: d.name.clone(),
            args,
            value,
            functional,
        });
        Ok(())
    }

    fn resource(&mut self, d: &ResourceDeclAst) -> R<()> {
        if self.taken(&d.name) {
            return Err(ModelError::DuplicateDeclaration(d.name.clone()));
        }
        let args = d
            .args
            .iter()
            .map(|a| object_sort(&self.sorts, a))
            .collect::<R<Vec<_>>>()?;
        let ValueType::Num(domain) = value_type(&self.sorts, &d.domain)? else {
            return Err(ModelError::TypeMismatch(format!(
                "resource `{}` needs a numeric domain",
                d.name
            )));
        };
        let init = d.init.map(|v| domain.admit(v)).transpose()?;
        self.resource_by_name
            .insert(d.name.clone(), self.resources.len() as ResId);
        self.resources.push(ResourceDecl {
            name: d.name.clone(),
            args,
            domain,
            init,
        });
        Ok(())
    }

    fn dist_feature(&mut self, d: &DistFeatureAst) -> R<()> {
        if self.taken(&d.name) {
            return Err(ModelError::DuplicateDeclaration(d.name.clone()));
        }
        let link = *self
            .fluent_by_name
            .get(&d.link)
            .ok_or_else(|| ModelError::UnknownFluent(d.link.clone()))?;
        let ld = &self.fluents[link as usize];
        let n = ld.args.len();
        if !ld.value.is_bool() || n < 2 || ld.args[n - 1] != ld.args[n - 2] {
            return Err(ModelError::InvalidDeclaration(format!(
                "link `{}` must be a boolean fluent ending in two arguments of the same sort",
                d.link
            )));
        }
        if d.params.len() != n {
            return Err(ModelError::ArityMismatch {
                name: d.name.clone(),
                expected: n,
                found: d.params.len(),
            });
        }
        let cost = match &d.cost {
            None => None,
            Some(c) => {
                let cf = *self
                    .fluent_by_name
                    .get(c)
                    .ok_or_else(|| ModelError::UnknownFluent(c.clone()))?;
                let cd = &self.fluents[cf as usize];
                if cd.args != ld.args || !matches!(cd.value, ValueType::Num(_)) {
                    return Err(ModelError::InvalidDeclaration(format!(
                        "cost `{c}` must be numeric with the arguments of `{}`",
                        d.link
                    )));
                }
                Some(cf)
            }
        };
        let domain = match value_type(&self.sorts, &d.domain)? {
            ValueType::Num(dom) => dom,
            ValueType::Obj(_) => {
                return Err(ModelError::TypeMismatch(format!(
                    "`{}` needs a numeric domain",
                    d.name
                )))
            }
        };
        self.dist.push(DistFeature {
            name: d.name.clone(),
            link,
            cost,
            domain,
            node_sort: ld.args[n - 1],
            extra: n - 2,
            extra_sorts: ld.args[..n - 2].to_vec(),
        });
        Ok(())
    }

    fn compiler(&self, nvars: u32, ntimes: u32, free: bool) -> Compiler<'_> {
        Compiler::new(self.names(), nvars, ntimes, free)
    }

    /// Compile every macro once with its parameters as variables so that
    /// unknown names and cycles surface even in unused macros.
    fn check_macro(&self, m: &lang::MacroAst) -> R<()> {
        let mut c = self.compiler(0, 1, false);
        let mut sc = Scope::new(Time::Rel(0, 0));
        sc.time_var(&m.time_var, Time::Rel(0, 0));
        for p in &m.params {
            let s = c.var_sort(p)?;
            let id = c.new_var();
            sc.var(p, id, s);
        }
        let call = TermAst::App(
            m.name.clone(),
            m.params.iter().map(|p| TermAst::Ident(p.clone())).collect(),
        );
        match &m.body {
            MacroBody::Formula(_) => c.formula(&mut sc, &FormulaAst::Atom(call)).map(|_| ()),
            MacroBody::Term(_) => c.term(&mut sc, &call).map(|_| ()),
        }
    }

    fn operator(&self, op: &OperatorAst, scale: i64) -> R<Operator> {
        let mut c = self.compiler(0, 2, false);
        let start = Time::Rel(START_SLOT, 0);
        let mut sc = Scope::new(start);
        sc.time_var(&op.time_var, start);
        if let Some(e) = &op.end_var {
            sc.time_var(e, Time::Rel(END_SLOT, 0));
        }
        let mut params = vec![];
        for p in &op.params {
            let s = c.var_sort(p)?;
            let id = c.new_var();
            sc.var(p, id, s);
            params.push((p.clone(), s));
        }
        let precond = op
            .precond
            .as_ref()
            .map(|f| c.formula(&mut sc, f))
            .transpose()?;
        let duration = match &op.duration {
            None => None,
            Some(d) => {
                let (t, ty) = c.term(&mut sc, d)?;
                if ty != Ty::Num {
                    return Err(ModelError::TypeMismatch(format!(
                        "duration of `{}` is not numeric",
                        op.name
                    )));
                }
                Some(t)
            }
        };
        let internal = match &duration {
            None => Some(1),
            Some(Term::Const(Value::Num(d))) => {
                let v = d
                    .scaled_to_int(scale)
                    .map_err(|e| ModelError::NumericOutOfBounds(e.to_string()))?;
                if v < 1 {
                    return Err(ModelError::InvalidDeclaration(format!(
                        "duration of `{}` must be positive",
                        op.name
                    )));
                }
                Some(v)
            }
            Some(_) => None,
        };
        let check = |t: Time| -> R<()> {
            let offset = match (t, internal) {
                (Time::Rel(START_SLOT, k), _) => k,
                (Time::Rel(END_SLOT, k), Some(d)) => d + k,
                (Time::Rel(END_SLOT, k), None) if k <= 0 => return Ok(()),
                (Time::Rel(END_SLOT, k), None) => k,
                _ => {
                    return Err(ModelError::TypeMismatch(format!(
                        "`{}`: effect times must be relative to the invocation",
                        op.name
                    )))
                }
            };
            let outside = offset < 1 || internal.is_some_and(|d| offset > d);
            if outside {
                return Err(ModelError::EffectOutsideDuration {
                    op: op.name.clone(),
                    offset,
                    duration: internal.unwrap_or(0),
                });
            }
            Ok(())
        };
        let mut prevail = vec![];
        for p in &op.prevail {
            let f = c.formula(&mut sc, p)?;
            match &f {
                Formula::Interval { lo, hi, .. } => {
                    check(*lo)?;
                    check(*hi)?;
                }
                _ => {
                    let offs = read_offsets(&f, START_SLOT);
                    if let crate::formula::Offsets::Points(v) = &offs {
                        for &k in v {
                            check(Time::Rel(START_SLOT, k))?;
                        }
                    }
                }
            }
            prevail.push(f);
        }
        let mut effects = vec![];
        for e in &op.effects {
            let mut quantified = vec![];
            let mut inner = Scope::new(start);
            inner.time_var(&op.time_var, start);
            if let Some(ev) = &op.end_var {
                inner.time_var(ev, Time::Rel(END_SLOT, 0));
            }
            for (i, p) in op.params.iter().enumerate() {
                inner.var(p, i as u32, params[i].1);
            }
            for q in &e.quantified {
                let s = c.var_sort(q)?;
                let id = c.new_var();
                inner.var(q, id, s);
                quantified.push((id, s));
            }
            let condition = e
                .condition
                .as_ref()
                .map(|f| c.formula(&mut inner, f))
                .transpose()?;
            let when = match &e.anchor {
                Anchor::Point(t) => {
                    let t = c.time(&inner, t)?;
                    check(t)?;
                    When::At(t)
                }
                a => {
                    let (lo, hi) = c.interval(&inner, a)?;
                    check(lo)?;
                    check(hi)?;
                    When::Over(lo, hi)
                }
            };
            let f = *self
                .fluent_by_name
                .get(&e.fluent)
                .ok_or_else(|| ModelError::UnknownFluent(e.fluent.clone()))?;
            let decl = &self.fluents[f as usize];
            let call = TermAst::App(e.fluent.clone(), e.args.clone());
            let Term::Fluent { args, .. } = c.term(&mut inner, &call)?.0 else {
                unreachable!("fluent application compiles to a fluent read")
            };
            let (value, vty) = c.term(&mut inner, &e.value)?;
            let ok = match (decl.value, vty) {
                (ValueType::Num(_), Ty::Num) => true,
                (ValueType::Obj(s), Ty::Obj(v)) => {
                    self.sorts.is_subsort(v, s) || self.sorts.is_subsort(s, v)
                }
                _ => false,
            };
            if !ok {
                return Err(ModelError::TypeMismatch(format!(
                    "value assigned to `{}` has the wrong type",
                    e.fluent
                )));
            }
            effects.push(Effect {
                quantified,
                condition,
                when,
                fluent: f,
                args,
                value,
            });
        }
        let mut resources = vec![];
        for r in &op.resources {
            let when = match &r.anchor {
                Anchor::Point(t) => {
                    let t = c.time(&sc, t)?;
                    check(t)?;
                    When::At(t)
                }
                a => {
                    let (lo, hi) = c.interval(&sc, a)?;
                    check(lo)?;
                    check(hi)?;
                    When::Over(lo, hi)
                }
            };
            let borrow = matches!(
                r.kind,
                lang::ResourceKind::BorrowExclusive | lang::ResourceKind::BorrowNonExclusive
            );
            if !borrow && matches!(when, When::Over(..)) {
                return Err(ModelError::InvalidDeclaration(format!(
                    "`{}`: only borrows take an interval",
                    op.name
                )));
            }
            let (res_term, _) = c.term(&mut sc, &TermAst::Aspect(Aspect::Init, r.resource.clone(), r.args.clone()))?;
            let Term::Aspect { res, args, .. } = res_term else {
                unreachable!("aspect compiles to an aspect read")
            };
            let amount = match &r.amount {
                None => Term::Const(Value::Num(Decimal::new(1, 0))),
                Some(a) => {
                    let (t, ty) = c.term(&mut sc, a)?;
                    if ty != Ty::Num {
                        return Err(ModelError::TypeMismatch("resource amount must be numeric".into()));
                    }
                    t
                }
            };
            resources.push(ResourceEffect {
                when,
                kind: r.kind,
                res,
                args,
                amount,
            });
        }
        Ok(Operator {
            name: op.name.clone(),
            params,
            nvars: c.nvars as usize,
            ntimes: c.ntimes as usize,
            precond,
            prevail,
            duration,
            effects,
            resources,
        })
    }

    fn rule(&self, name: String, f: &FormulaAst) -> R<Rule> {
        let mut c = self.compiler(0, 1, true);
        let t = Time::Rel(RULE_SLOT, 0);
        let mut sc = Scope::new(t);
        sc.time_var("t", t);
        let body = c.formula(&mut sc, f)?;
        let free = c
            .free
            .take()
            .unwrap_or_default()
            .into_iter()
            .map(|(_, id, s)| (id, s))
            .collect();
        let offsets = read_offsets(&body, RULE_SLOT);
        let span = offsets.max().max(0);
        Ok(Rule {
            name,
            free,
            body,
            nvars: c.nvars as usize,
            ntimes: c.ntimes as usize,
            offsets,
            span,
        })
    }
}

/// Build a domain from parsed statements.
pub fn build_domain(statements: &[Statement]) -> Result<Domain, ModelError> {
    let mut b = Builder {
        sorts: SortTable::default(),
        fluents: vec![],
        fluent_by_name: HashMap::new(),
        resources: vec![],
        resource_by_name: HashMap::new(),
        macros: HashMap::new(),
        dist: vec![],
        mindist: vec![],
        options: Options::default(),
    };
    for st in statements {
        if let StatementKind::Sorts(d) = &st.kind {
            add_sorts(&mut b.sorts, d).map_err(|e| e.at(st.span))?;
        }
    }
    for st in statements {
        if let StatementKind::Sorts(d) = &st.kind {
            set_parents(&mut b.sorts, d).map_err(|e| e.at(st.span))?;
        }
    }
    for st in statements {
        let r = match &st.kind {
            StatementKind::Objects(g) => add_objects(&mut b.sorts, g),
            StatementKind::Fluents(v) => v.iter().try_for_each(|d| b.fluent(d)),
            StatementKind::Resources(v) => v.iter().try_for_each(|d| b.resource(d)),
            StatementKind::Option { key, value } => {
                b.options.0.insert(key.clone(), value.clone());
                Ok(())
            }
            _ => Ok(()),
        };
        r.map_err(|e| e.at(st.span))?;
    }
    for st in statements {
        let r = match &st.kind {
            StatementKind::DistFeature(d) => b.dist_feature(d),
            StatementKind::Define(m) => {
                if b.taken(&m.name) {
                    Err(ModelError::DuplicateDeclaration(m.name.clone()))
                } else {
                    b.macros.insert(m.name.clone(), m.clone());
                    Ok(())
                }
            }
            _ => Ok(()),
        };
        r.map_err(|e| e.at(st.span))?;
    }
    for st in statements {
        if let StatementKind::MinDistFeature(m) = &st.kind {
            let r = (|| {
                if b.taken(&m.name) {
                    return Err(ModelError::DuplicateDeclaration(m.name.clone()));
                }
                let dist = b
                    .dist
                    .iter()
                    .position(|d| d.name == m.dist)
                    .ok_or_else(|| ModelError::UnknownName(m.dist.clone()))?;
                let ValueType::Num(domain) = value_type(&b.sorts, &m.domain)? else {
                    return Err(ModelError::TypeMismatch(format!(
                        "`{}` needs a numeric domain",
                        m.name
                    )));
                };
                b.mindist.push(MinDistFeature {
                    name: m.name.clone(),
                    dist,
                    domain,
                });
                Ok(())
            })();
            r.map_err(|e| e.at(st.span))?;
        }
    }
    let scale = scale_option(&b.options)?;
    let mut operators: Vec<Operator> = vec![];
    let mut rules: Vec<Rule> = vec![];
    for st in statements {
        let r = match &st.kind {
            StatementKind::Define(m) => b.check_macro(m),
            StatementKind::Operator(op) => {
                if operators.iter().any(|o| o.name == op.name) {
                    Err(ModelError::DuplicateDeclaration(op.name.clone()))
                } else {
                    b.operator(op, scale).map(|o| operators.push(o))
                }
            }
            StatementKind::Control { name, formula } => {
                let name = name
                    .clone()
                    .unwrap_or_else(|| format!("rule-{}", rules.len() + 1));
                b.rule(name, formula).map(|r| rules.push(r))
            }
            StatementKind::Obs(..) | StatementKind::Goal(_) => Err(ModelError::InvalidDeclaration(
                "observations and goals belong in the problem file".into(),
            )),
            _ => Ok(()),
        };
        r.map_err(|e| e.at(st.span))?;
    }
    Ok(Domain {
        sorts: b.sorts,
        fluents: b.fluents,
        fluent_by_name: b.fluent_by_name,
        resources: b.resources,
        resource_by_name: b.resource_by_name,
        operators,
        rules,
        macros: b.macros,
        dist: b.dist,
        mindist: b.mindist,
        options: b.options,
    })
}

/// Internal time units per external unit, from the `scale` option.
pub(crate) fn scale_option(o: &Options) -> R<i64> {
    match o.get("scale") {
        None => Ok(1),
        Some(s) => match s.parse::<i64>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(ModelError::InvalidDeclaration(format!(
                "scale must be a positive integer, found `{s}`"
            ))),
        },
    }
}

struct Ground<'a> {
    domain: &'a Domain,
    sorts: &'a SortTable,
    index: &'a GroundIndex,
}

enum Target {
    Fluent(usize, ValueType),
    Resource(usize, NumDomain),
}

impl Ground<'_> {
    fn object(&self, t: &TermAst, sort: SortId) -> R<ObjId> {
        let TermAst::Ident(name) = t else {
            return Err(ModelError::UnsupportedObservation(format!(
                "`{}` is not an object",
                lang::unparse_term(t)
            )));
        };
        let o = self
            .sorts
            .object(name)
            .ok_or_else(|| ModelError::UnknownObject(name.clone()))?;
        if !self.sorts.is_member(o, sort) {
            return Err(ModelError::TypeMismatch(format!(
                "`{name}` is not a {}",
                self.sorts.sort_name(sort)
            )));
        }
        Ok(o)
    }

    fn args(&self, name: &str, sorts: &[SortId], args: &[TermAst]) -> R<Vec<ObjId>> {
        if sorts.len() != args.len() {
            return Err(ModelError::ArityMismatch {
                name: name.to_string(),
                expected: sorts.len(),
                found: args.len(),
            });
        }
        sorts
            .iter()
            .zip(args)
            .map(|(&s, a)| self.object(a, s))
            .collect()
    }

    fn target(&self, t: &TermAst) -> R<Option<Target>> {
        match t {
            TermAst::Ident(name) | TermAst::App(name, _) => {
                let args: &[TermAst] = match t {
                    TermAst::App(_, a) => a,
                    _ => &[],
                };
                let Some(f) = self.domain.fluent(name) else {
                    if matches!(t, TermAst::App(..)) {
                        return Err(ModelError::UnknownFluent(name.clone()));
                    }
                    return Ok(None);
                };
                let decl = &self.domain.fluents[f as usize];
                let objs = self.args(name, &decl.args, args)?;
                let gid = self.index.fluent(self.domain, self.sorts, f, &objs).unwrap();
                Ok(Some(Target::Fluent(gid, decl.value)))
            }
            TermAst::Aspect(Aspect::Init, name, args) => {
                let r = self
                    .domain
                    .resource(name)
                    .ok_or_else(|| ModelError::UnknownName(name.clone()))?;
                let decl = &self.domain.resources[r as usize];
                let objs = self.args(name, &decl.args, args)?;
                let gid = self.index.resource(self.domain, self.sorts, r, &objs).unwrap();
                Ok(Some(Target::Resource(gid, decl.domain)))
            }
            _ => Ok(None),
        }
    }

    fn constant(&self, t: &TermAst, ty: ValueType) -> R<Value> {
        match (ty, t) {
            (ValueType::Obj(s), _) => Ok(Value::Obj(self.object(t, s)?)),
            (ValueType::Num(d), TermAst::Number(n)) => Ok(Value::Num(d.admit(*n)?)),
            (ValueType::Num(d), TermAst::Neg(inner)) => match &**inner {
                TermAst::Number(n) => Ok(Value::Num(d.admit(
                    n.checked_neg()
                        .map_err(|e| ModelError::NumericOutOfBounds(e.to_string()))?,
                )?)),
                _ => Err(ModelError::UnsupportedObservation(lang::unparse_term(t))),
            },
            _ => Err(ModelError::UnsupportedObservation(format!(
                "`{}` is not a number",
                lang::unparse_term(t)
            ))),
        }
    }

    /// Flatten a conjunction of ground literals into `(target, value)` pairs.
    fn literals(&self, f: &FormulaAst, out: &mut Vec<(Target, Value)>) -> R<bool> {
        match f {
            FormulaAst::True => Ok(true),
            FormulaAst::And(v) => {
                for x in v {
                    if !self.literals(x, out)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            FormulaAst::Atom(t) => self.literal(t, Value::bool(true), out),
            FormulaAst::Not(inner) => match &**inner {
                FormulaAst::Atom(t) => self.literal(t, Value::bool(false), out),
                _ => Ok(false),
            },
            FormulaAst::Cmp(CmpOp::Eq, a, b) => {
                let (tgt, c) = match self.target(a)? {
                    Some(x) => (x, b),
                    None => match self.target(b)? {
                        Some(x) => (x, a),
                        None => return Ok(false),
                    },
                };
                let v = match &tgt {
                    Target::Fluent(_, ty) => self.constant(c, *ty)?,
                    Target::Resource(_, d) => self.constant(c, ValueType::Num(*d))?,
                };
                out.push((tgt, v));
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn literal(&self, t: &TermAst, v: Value, out: &mut Vec<(Target, Value)>) -> R<bool> {
        match self.target(t)? {
            Some(tgt @ Target::Fluent(_, ty)) if ty.is_bool() => {
                out.push((tgt, v));
                Ok(true)
            }
            Some(_) => Err(ModelError::TypeMismatch(format!(
                "`{}` is not boolean",
                lang::unparse_term(t)
            ))),
            None => Err(ModelError::UnknownName(lang::unparse_term(t))),
        }
    }
}

/// Add a problem's objects, initial state and goal to a domain.
pub fn build_problem(domain: Arc<Domain>, statements: &[Statement]) -> Result<Problem, ModelError> {
    let mut sorts = domain.sorts.clone();
    let mut options = domain.options.clone();
    for st in statements {
        let r = match &st.kind {
            StatementKind::Objects(g) => add_objects(&mut sorts, g),
            StatementKind::Option { key, value } => {
                options.0.insert(key.clone(), value.clone());
                Ok(())
            }
            StatementKind::Obs(..) | StatementKind::Goal(_) => Ok(()),
            _ => Err(ModelError::InvalidDeclaration(
                "a problem file holds only objects, observations, goals and options".into(),
            )),
        };
        r.map_err(|e| e.at(st.span))?;
    }
    if scale_option(&options)? != scale_option(&domain.options)? {
        return Err(ModelError::InvalidDeclaration(
            "a problem cannot change the domain's time scale".into(),
        ));
    }
    let index = GroundIndex::new(&domain, &sorts);
    let g = Ground {
        domain: &domain,
        sorts: &sorts,
        index: &index,
    };
    let mut init: Vec<Option<Value>> = vec![None; index.fluent_count()];
    let mut res_init: Vec<Option<Decimal>> = vec![None; index.resource_count()];
    let mut goals: Vec<(usize, Value)> = vec![];
    for st in statements {
        let r = match &st.kind {
            StatementKind::Obs(t, f) => (|| {
                if t.var.is_some() || t.offset != 0 {
                    return Err(ModelError::UnsupportedObservation(
                        "observations must be at time 0".into(),
                    ));
                }
                let f = match f {
                    FormulaAst::Anchored(Anchor::Point(t), inner) if t.var.is_none() && t.offset == 0 => inner,
                    f => f,
                };
                let mut lits = vec![];
                if !g.literals(f, &mut lits)? {
                    return Err(ModelError::UnsupportedObservation(lang::unparse_formula(f)));
                }
                for (tgt, v) in lits {
                    match tgt {
                        Target::Fluent(gid, _) => match init[gid] {
                            Some(old) if old != v => {
                                return Err(ModelError::ContradictoryObservation(fluent_name(
                                    &domain, &sorts, &index, gid,
                                )))
                            }
                            _ => init[gid] = Some(v),
                        },
                        Target::Resource(gid, _) => {
                            let n = v.as_num().unwrap();
                            match res_init[gid] {
                                Some(old) if old != n => {
                                    let (r, args) = index.decode_resource(&domain, &sorts, gid);
                                    return Err(ModelError::ContradictoryObservation(format!(
                                        "$init({})",
                                        atom_text(&domain.resources[r as usize].name, &args, &sorts)
                                    )));
                                }
                                _ => res_init[gid] = Some(n),
                            }
                        }
                    }
                }
                Ok(())
            })(),
            StatementKind::Goal(f) => (|| {
                let mut lits = vec![];
                if !g.literals(f, &mut lits)? {
                    return Err(ModelError::UnsupportedGoalFragment(lang::unparse_formula(f)));
                }
                for (tgt, v) in lits {
                    match tgt {
                        Target::Fluent(gid, _) => goals.push((gid, v)),
                        Target::Resource(..) => {
                            return Err(ModelError::UnsupportedGoalFragment(lang::unparse_formula(f)))
                        }
                    }
                }
                Ok(())
            })(),
            _ => Ok(()),
        };
        r.map_err(|e| e.at(st.span))?;
    }
    let mut values = Vec::with_capacity(init.len());
    for (gid, v) in init.into_iter().enumerate() {
        let v = match v {
            Some(v) => v,
            None => {
                let (f, _) = index.decode_fluent(&domain, &sorts, gid);
                if domain.fluents[f as usize].value.is_bool() {
                    Value::bool(false)
                } else {
                    return Err(ModelError::NoInitialValue(fluent_name(&domain, &sorts, &index, gid)));
                }
            }
        };
        values.push(v);
    }
    let mut resource_init = Vec::with_capacity(res_init.len());
    for (gid, v) in res_init.into_iter().enumerate() {
        let r = index.decode_resource(&domain, &sorts, gid).0 as usize;
        match v.or(domain.resources[r].init) {
            Some(v) => resource_init.push(v),
            None => {
                return Err(ModelError::NoInitialValue(format!(
                    "resource {}",
                    domain.resources[r].name
                )))
            }
        }
    }
    let goal = GoalAbstraction::new(&domain, &sorts, &index, &goals);
    Ok(Problem {
        domain,
        sorts,
        index,
        init: values,
        resource_init,
        goals,
        goal,
        options,
    })
}

fn fluent_name(domain: &Domain, sorts: &SortTable, index: &GroundIndex, gid: usize) -> String {
    let (f, args) = index.decode_fluent(domain, sorts, gid);
    atom_text(&domain.fluents[f as usize].name, &args, sorts)
}

fn parse_err(errs: Vec<lang::ParseError>) -> ModelError {
    ModelError::Parse(
        errs.iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("\n"),
    )
}

/// Parse and build a domain.
pub fn load(src: &str) -> Result<Domain, ModelError> {
    let st = lang::parse(src).map_err(parse_err)?;
    build_domain(&st)
}

/// Parse and build a problem against a domain.
pub fn load_problem(domain: Arc<Domain>, src: &str) -> Result<Problem, ModelError> {
    let st = lang::parse(src).map_err(parse_err)?;
    build_problem(domain, &st)
}

/// Compile a formula against a problem's objects. Variables named after a
/// sort are free, and `t` names the timepoint slot `RULE_SLOT`.
pub fn compile_query(problem: &Problem, src: &str) -> Result<Rule, ModelError> {
    let ast = lang::parse_formula(src).map_err(|e| ModelError::Parse(e.to_string()))?;
    let d = &problem.domain;
    let names = Names {
        sorts: &problem.sorts,
        fluents: &d.fluents,
        fluent_by_name: &d.fluent_by_name,
        resources: &d.resources,
        resource_by_name: &d.resource_by_name,
        macros: &d.macros,
        dist: &d.dist,
        mindist: &d.mindist,
    };
    let mut c = Compiler::new(names, 0, 1, true);
    let t = Time::Rel(RULE_SLOT, 0);
    let mut sc = Scope::new(t);
    sc.time_var("t", t);
    let body = c.formula(&mut sc, &ast)?;
    let free = c.free.take().unwrap_or_default().into_iter().map(|(_, id, s)| (id, s)).collect();
    let offsets = read_offsets(&body, RULE_SLOT);
    let span = offsets.max().max(0);
    Ok(Rule {
        name: "query".into(),
        free,
        body,
        nvars: c.nvars as usize,
        ntimes: c.ntimes as usize,
        offsets,
        span,
    })
}
