use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::Decimal;

/// Default bounds for a numeric domain written without explicit bounds.
pub const DEFAULT_DIST_MAX: i64 = 1_000_000;

#[derive(Debug, Clone)]
struct Fail {
    pos: usize,
    expected: Vec<String>,
}

type PResult<T> = Result<T, Fail>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    furthest: Option<Fail>,
    /// dist feature name -> parameter count
    dist: HashMap<String, usize>,
    /// min-dist feature name -> underlying dist feature
    mindist: HashMap<String, String>,
}

const KEYWORDS: &[&str] = &["true", "false", "goal", "value", "if", "then"];

pub fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || name == "forall" || name == "exists"
}

/// Parse a whole source file. All syntax errors are collected; recovery
/// resumes at the next `#` statement.
pub fn parse(src: &str) -> Result<Vec<Statement>, Vec<ParseError>> {
    let toks = match tokenize(src) {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![ParseError::Syntax {
                span: e.span,
                expected: vec![],
                found: e.message,
            }])
        }
    };
    let mut p = Parser {
        toks,
        pos: 0,
        furthest: None,
        dist: HashMap::new(),
        mindist: HashMap::new(),
    };
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut rule_names = HashSet::new();

    while !p.at_eof() {
        if !matches!(p.peek(), Tok::Directive(_)) {
            let f = p.fail_here(&["statement"]);
            errors.push(p.to_error(f));
            p.skip_to_statement();
            continue;
        }
        let span = p.toks[p.pos].span;
        let start = p.pos;
        p.furthest = None;
        match p.statement() {
            Ok(kind) => {
                if let StatementKind::Control {
                    name: Some(name), ..
                } = &kind
                {
                    if !rule_names.insert(name.clone()) {
                        errors.push(ParseError::DuplicateRuleName {
                            span,
                            name: name.clone(),
                        });
                        continue;
                    }
                }
                out.push(Statement { kind, span });
            }
            Err(f) => {
                let f = p.furthest.take().filter(|b| b.pos >= f.pos).unwrap_or(f);
                errors.push(p.to_error(f));
                p.pos = p.pos.max(start + 1);
                p.skip_to_statement();
            }
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Parse a single formula, as used by tests and the `dist` subcommand.
pub fn parse_formula(src: &str) -> Result<FormulaAst, ParseError> {
    let toks = tokenize(src).map_err(|e| ParseError::Syntax {
        span: e.span,
        expected: vec![],
        found: e.message,
    })?;
    let mut p = Parser {
        toks,
        pos: 0,
        furthest: None,
        dist: HashMap::new(),
        mindist: HashMap::new(),
    };
    let r = p.formula().and_then(|f| {
        if p.at_eof() {
            Ok(f)
        } else {
            Err(p.fail_here(&["end of input"]))
        }
    });
    r.map_err(|f| {
        let f = p.furthest.take().filter(|b| b.pos >= f.pos).unwrap_or(f);
        p.to_error(f)
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof | Tok::Directive(_))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if !matches!(t, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn skip_to_statement(&mut self) {
        while !self.at_statement_end() {
            self.pos += 1;
        }
    }

    fn fail_here(&mut self, expected: &[&str]) -> Fail {
        let f = Fail {
            pos: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        };
        match &mut self.furthest {
            Some(b) if b.pos > f.pos => {}
            Some(b) if b.pos == f.pos => {
                for e in &f.expected {
                    if !b.expected.contains(e) {
                        b.expected.push(e.clone());
                    }
                }
            }
            _ => self.furthest = Some(f.clone()),
        }
        f
    }

    fn to_error(&self, f: Fail) -> ParseError {
        let tok = &self.toks[f.pos.min(self.toks.len() - 1)];
        ParseError::Syntax {
            span: tok.span,
            expected: f.expected,
            found: tok.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.fail_here(&[what]))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_option(&mut self, name: &str) -> bool {
        if matches!(self.peek(), Tok::Option(o) if o == name) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.fail_here(&["identifier"])),
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.fail_here(&["name"])),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut v = vec![self.name()?];
        while self.eat(&Tok::Comma) {
            v.push(self.name()?);
        }
        Ok(v)
    }

    /// `(a, b, c)` or nothing.
    fn opt_params(&mut self) -> PResult<Vec<String>> {
        if self.eat(&Tok::LParen) {
            if self.eat(&Tok::RParen) {
                return Ok(vec![]);
            }
            let v = self.ident_list()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(v)
        } else {
            Ok(vec![])
        }
    }

    fn integer(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Number(s) if !s.contains('.') => {
                self.bump();
                let v: i64 = s.parse().map_err(|_| self.fail_here(&["integer"]))?;
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.fail_here(&["integer"])),
        }
    }

    fn decimal(&mut self) -> PResult<Decimal> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                let text = if neg { format!("-{s}") } else { s };
                text.parse().map_err(|_| self.fail_here(&["number"]))
            }
            _ => Err(self.fail_here(&["number"])),
        }
    }

    fn statement(&mut self) -> PResult<StatementKind> {
        let Tok::Directive(kw) = self.bump() else {
            unreachable!("caller checked for a directive")
        };
        let kind = match kw.as_str() {
            "sorts" => self.sorts()?,
            "objects" => self.objects()?,
            "fluents" => self.fluents()?,
            "resources" => self.resources()?,
            "obs" => {
                self.expect(Tok::LBracket, "`[`")?;
                let t = self.time()?;
                self.expect(Tok::RBracket, "`]`")?;
                StatementKind::Obs(t, self.formula()?)
            }
            "goal" => StatementKind::Goal(self.formula()?),
            "operator" => StatementKind::Operator(self.operator()?),
            "control" => {
                let name = if self.eat_option("name") {
                    match self.bump() {
                        Tok::Str(s) => Some(s.trim().to_string()),
                        _ => {
                            self.pos -= 1;
                            return Err(self.fail_here(&["string"]));
                        }
                    }
                } else {
                    None
                };
                StatementKind::Control {
                    name,
                    formula: self.formula()?,
                }
            }
            "define" => StatementKind::Define(self.define()?),
            "distfeature" => StatementKind::DistFeature(self.distfeature()?),
            "mindistfeature" => StatementKind::MinDistFeature(self.mindistfeature()?),
            "option" => {
                let key = self.ident()?;
                let value = match self.bump() {
                    Tok::Ident(s) | Tok::Number(s) | Tok::Str(s) => s,
                    _ => {
                        self.pos -= 1;
                        return Err(self.fail_here(&["option value"]));
                    }
                };
                StatementKind::Option { key, value }
            }
            _ => {
                self.pos -= 1;
                return Err(self.fail_here(&["statement keyword"]));
            }
        };
        if self.at_statement_end() {
            Ok(kind)
        } else {
            Err(self.fail_here(&["end of statement"]))
        }
    }

    fn value_sort(&mut self) -> PResult<ValueSortAst> {
        let name = self.ident()?;
        match name.as_str() {
            "integer" => {
                let (lo, hi) = self.bounds()?;
                Ok(ValueSortAst::Integer { lo, hi })
            }
            "fixed" => {
                let d = self.integer()?;
                if !(1..=crate::fixed::MAX_SCALE as i64).contains(&d) {
                    self.pos -= 1;
                    return Err(self.fail_here(&["decimal count 1..9"]));
                }
                let (lo, hi) = self.bounds()?;
                Ok(ValueSortAst::Fixed {
                    decimals: d as u8,
                    lo,
                    hi,
                })
            }
            _ => Ok(ValueSortAst::Named(name)),
        }
    }

    fn bounds(&mut self) -> PResult<(Decimal, Decimal)> {
        self.expect(Tok::LBracket, "`[`")?;
        let lo = self.decimal()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.decimal()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok((lo, hi))
    }

    fn sorts(&mut self) -> PResult<StatementKind> {
        let mut v = Vec::new();
        loop {
            let name = self.name()?;
            let mut decl = SortDeclAst {
                name,
                parent: None,
                numeric: None,
            };
            if self.eat(&Tok::Lt) {
                decl.parent = Some(self.name()?);
            } else if self.eat(&Tok::Eq) {
                match self.value_sort()? {
                    ValueSortAst::Named(_) => {
                        self.pos -= 1;
                        return Err(self.fail_here(&["`integer`", "`fixed`"]));
                    }
                    n => decl.numeric = Some(n),
                }
            }
            v.push(decl);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(StatementKind::Sorts(v))
    }

    fn objects(&mut self) -> PResult<StatementKind> {
        let mut v = Vec::new();
        loop {
            let names = self.ident_list()?;
            self.expect(Tok::Colon, "`:`")?;
            let sort = self.name()?;
            v.push((names, sort));
            if !self.eat(&Tok::Semi) || self.at_statement_end() {
                break;
            }
        }
        Ok(StatementKind::Objects(v))
    }

    fn fluents(&mut self) -> PResult<StatementKind> {
        let mut v = Vec::new();
        loop {
            let name = self.name()?;
            let args = self.opt_params()?;
            let value = if self.eat(&Tok::Colon) {
                Some(self.value_sort()?)
            } else {
                None
            };
            let functional = if self.eat_option("functional") {
                let k = self.integer()?;
                if k < 1 {
                    self.pos -= 1;
                    return Err(self.fail_here(&["positive argument position"]));
                }
                Some(k as usize)
            } else {
                None
            };
            v.push(FluentDeclAst {
                name,
                args,
                value,
                functional,
            });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(StatementKind::Fluents(v))
    }

    fn resources(&mut self) -> PResult<StatementKind> {
        let mut v = Vec::new();
        loop {
            let name = self.name()?;
            let args = self.opt_params()?;
            self.expect(Tok::Colon, "`:`")?;
            let domain = self.value_sort()?;
            let init = if self.eat_option("init") {
                Some(self.decimal()?)
            } else {
                None
            };
            v.push(ResourceDeclAst {
                name,
                args,
                domain,
                init,
            });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(StatementKind::Resources(v))
    }

    fn operator(&mut self) -> PResult<OperatorAst> {
        let name = self.name()?;
        let params = self.opt_params()?;
        if !self.eat_option("at") {
            return Err(self.fail_here(&["`:at`"]));
        }
        let time_var = self.name()?;
        let mut op = OperatorAst {
            name,
            params,
            time_var,
            end_var: None,
            precond: None,
            prevail: vec![],
            duration: None,
            effects: vec![],
            resources: vec![],
        };
        loop {
            if self.eat_option("end") {
                op.end_var = Some(self.name()?);
            } else if self.eat_option("precond") {
                op.precond = Some(self.formula()?);
            } else if self.eat_option("prevail") {
                op.prevail.push(self.formula()?);
                while self.eat(&Tok::Comma) {
                    op.prevail.push(self.formula()?);
                }
            } else if self.eat_option("duration") {
                op.duration = Some(self.term()?);
            } else if self.eat_option("effects") {
                op.effects.push(self.effect()?);
                while self.eat(&Tok::Comma) {
                    op.effects.push(self.effect()?);
                }
            } else if self.eat_option("resources") {
                op.resources.push(self.resource_effect()?);
                while self.eat(&Tok::Comma) {
                    op.resources.push(self.resource_effect()?);
                }
            } else if self.at_statement_end() {
                return Ok(op);
            } else {
                return Err(self.fail_here(&[
                    "`:end`",
                    "`:precond`",
                    "`:prevail`",
                    "`:duration`",
                    "`:effects`",
                    "`:resources`",
                ]));
            }
        }
    }

    fn effect(&mut self) -> PResult<EffectAst> {
        if self.eat(&Tok::Forall) {
            let vars = self.ident_list()?;
            self.expect(Tok::LBracket, "`[`")?;
            let mut inner = self.effect()?;
            self.expect(Tok::RBracket, "`]`")?;
            let mut q = vars;
            q.append(&mut inner.quantified);
            inner.quantified = q;
            return Ok(inner);
        }
        let mut condition = None;
        if matches!(self.peek(), Tok::Ident(s) if s == "if") {
            self.bump();
            condition = Some(self.formula()?);
            if !matches!(self.peek(), Tok::Ident(s) if s == "then") {
                return Err(self.fail_here(&["`then`"]));
            }
            self.bump();
        }
        let anchor = self.anchor_brackets()?;
        let fluent = self.name()?;
        let args = self.opt_args()?;
        self.expect(Tok::Assign, "`:=`")?;
        let value = self.term()?;
        Ok(EffectAst {
            quantified: vec![],
            condition,
            anchor,
            fluent,
            args,
            value,
        })
    }

    fn resource_effect(&mut self) -> PResult<ResourceEffectAst> {
        let anchor = self.anchor_brackets()?;
        let kind = match self.peek().clone() {
            Tok::Option(o) => match ResourceKind::from_keyword(&format!(":{o}")) {
                Some(k) => {
                    self.bump();
                    k
                }
                None => return Err(self.fail_here(&["resource effect kind"])),
            },
            _ => return Err(self.fail_here(&["resource effect kind"])),
        };
        let resource = self.name()?;
        let args = self.opt_args()?;
        let amount = if self.eat_option("amount") {
            Some(self.term()?)
        } else {
            None
        };
        Ok(ResourceEffectAst {
            anchor,
            kind,
            resource,
            args,
            amount,
        })
    }

    fn opt_args(&mut self) -> PResult<Vec<TermAst>> {
        if self.eat(&Tok::LParen) {
            let mut v = vec![self.term()?];
            while self.eat(&Tok::Comma) {
                v.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            Ok(v)
        } else {
            Ok(vec![])
        }
    }

    fn define(&mut self) -> PResult<MacroAst> {
        self.expect(Tok::LBracket, "`[`")?;
        let time_var = self.name()?;
        self.expect(Tok::RBracket, "`]`")?;
        let name = self.name()?;
        let params = self.opt_params()?;
        self.expect(Tok::Colon, "`:`")?;
        let start = self.pos;
        let body = match self.formula() {
            Ok(f) if self.at_statement_end() => MacroBody::Formula(f),
            _ => {
                self.pos = start;
                MacroBody::Term(self.term()?)
            }
        };
        Ok(MacroAst {
            time_var,
            name,
            params,
            body,
        })
    }

    fn numeric_domain(&mut self) -> PResult<ValueSortAst> {
        if !self.eat_option("domain") {
            return Err(self.fail_here(&["`:domain`"]));
        }
        match self.peek().clone() {
            Tok::Ident(s) if s == "integer" && *self.peek_at(1) != Tok::LBracket => {
                self.bump();
                Ok(ValueSortAst::Integer {
                    lo: Decimal::new(0, 0),
                    hi: Decimal::new(DEFAULT_DIST_MAX, 0),
                })
            }
            _ => self.value_sort(),
        }
    }

    fn distfeature(&mut self) -> PResult<DistFeatureAst> {
        let name = self.name()?;
        let params = self.opt_params()?;
        let domain = self.numeric_domain()?;
        if !self.eat_option("link") {
            return Err(self.fail_here(&["`:link`"]));
        }
        let link = self.name()?;
        let cost = if self.eat_option("cost") {
            Some(self.name()?)
        } else {
            None
        };
        self.dist.insert(name.clone(), params.len());
        Ok(DistFeatureAst {
            name,
            params,
            domain,
            link,
            cost,
        })
    }

    fn mindistfeature(&mut self) -> PResult<MinDistFeatureAst> {
        let name = self.name()?;
        if !self.eat_option("distfeature") {
            return Err(self.fail_here(&["`:distfeature`"]));
        }
        let dist = self.name()?;
        let domain = self.numeric_domain()?;
        self.mindist.insert(name.clone(), dist.clone());
        Ok(MinDistFeatureAst { name, dist, domain })
    }

    // ---- time ----

    fn time(&mut self) -> PResult<TimeAst> {
        match self.peek().clone() {
            Tok::Number(_) => Ok(TimeAst::abs(self.integer()?)),
            Tok::Ident(v) if !is_reserved(&v) => {
                self.bump();
                let offset = match self.peek() {
                    Tok::Plus => {
                        self.bump();
                        self.integer()?
                    }
                    Tok::Minus => {
                        self.bump();
                        -self.integer()?
                    }
                    _ => 0,
                };
                Ok(TimeAst { var: Some(v), offset })
            }
            _ => Err(self.fail_here(&["timepoint"])),
        }
    }

    /// `[t]`, `[a,b]` and the half-open spellings. `(` openings are only
    /// accepted when `allow_paren` is set.
    fn anchor(&mut self, allow_paren: bool) -> PResult<Anchor> {
        let lo_open = match self.peek() {
            Tok::LBracket => false,
            Tok::LParen if allow_paren => true,
            _ => return Err(self.fail_here(&["`[`"])),
        };
        self.bump();
        let lo = self.time()?;
        if !lo_open && self.eat(&Tok::RBracket) {
            return Ok(Anchor::Point(lo));
        }
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.time()?;
        let hi_open = match self.peek() {
            Tok::RBracket => false,
            Tok::RParen => true,
            _ => return Err(self.fail_here(&["`]`", "`)`"])),
        };
        self.bump();
        Ok(Anchor::Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        })
    }

    fn anchor_brackets(&mut self) -> PResult<Anchor> {
        self.anchor(true)
    }

    // ---- formulas ----

    pub(crate) fn formula(&mut self) -> PResult<FormulaAst> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.formula()?;
            Ok(FormulaAst::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> PResult<FormulaAst> {
        let mut v = vec![self.conjunction()?];
        while self.eat(&Tok::Or) {
            v.push(self.conjunction()?);
        }
        Ok(if v.len() == 1 {
            v.pop().unwrap()
        } else {
            FormulaAst::Or(v)
        })
    }

    fn conjunction(&mut self) -> PResult<FormulaAst> {
        let mut v = vec![self.unary()?];
        while self.eat(&Tok::And) {
            v.push(self.unary()?);
        }
        Ok(if v.len() == 1 {
            v.pop().unwrap()
        } else {
            FormulaAst::And(v)
        })
    }

    fn unary(&mut self) -> PResult<FormulaAst> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(FormulaAst::Not(Box::new(self.unary()?)))
            }
            Tok::LBracket => {
                let a = self.anchor(false)?;
                Ok(FormulaAst::Anchored(a, Box::new(self.unary()?)))
            }
            Tok::Forall | Tok::Exists => {
                let forall = self.bump() == Tok::Forall;
                let vars = self.ident_list()?;
                self.expect(Tok::LBracket, "`[`")?;
                let body = self.formula()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(if forall {
                    FormulaAst::Forall(vars, Box::new(body))
                } else {
                    FormulaAst::Exists(vars, Box::new(body))
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<FormulaAst> {
        match self.peek().clone() {
            Tok::Ident(s) if (s == "true" || s == "false") && !is_cmp(self.peek_at(1)) => {
                self.bump();
                Ok(if s == "true" {
                    FormulaAst::True
                } else {
                    FormulaAst::False
                })
            }
            Tok::Ident(s) if s == "goal" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(FormulaAst::Goal(Box::new(f)))
            }
            Tok::LParen => {
                let start = self.pos;
                self.bump();
                if let Ok(f) = self.formula() {
                    if self.eat(&Tok::RParen) && !is_cmp(self.peek()) && !is_arith(self.peek())
                    {
                        return Ok(f);
                    }
                }
                self.pos = start;
                if let Ok(a) = self.anchor(true) {
                    if matches!(a, Anchor::Interval { .. }) {
                        return Ok(FormulaAst::Anchored(a, Box::new(self.unary()?)));
                    }
                }
                self.pos = start;
                self.comparison()
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> PResult<FormulaAst> {
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => {
                return match lhs {
                    TermAst::App(..) | TermAst::Ident(_) => Ok(FormulaAst::Atom(lhs)),
                    _ => Err(self.fail_here(&["comparison operator"])),
                };
            }
        };
        self.bump();
        let rhs = self.term()?;
        Ok(FormulaAst::Cmp(op, lhs, rhs))
    }

    // ---- terms ----

    pub(crate) fn term(&mut self) -> PResult<TermAst> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = TermAst::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> PResult<TermAst> {
        let mut lhs = self.neg_term()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.neg_term()?;
            lhs = TermAst::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn neg_term(&mut self) -> PResult<TermAst> {
        if *self.peek() == Tok::Minus {
            if matches!(self.peek_at(1), Tok::Number(_)) {
                return Ok(TermAst::Number(self.decimal()?));
            }
            self.bump();
            return Ok(TermAst::Neg(Box::new(self.neg_term()?)));
        }
        self.atom_term()
    }

    fn atom_term(&mut self) -> PResult<TermAst> {
        match self.peek().clone() {
            Tok::Number(_) => Ok(TermAst::Number(self.decimal()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Dollar(kw) if kw == "sum" => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::Lt, "`<`")?;
                let var = self.name()?;
                self.expect(Tok::Gt, "`>`")?;
                self.expect(Tok::Comma, "`,`")?;
                let cond = self.formula()?;
                self.expect(Tok::Comma, "`,`")?;
                let term = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(TermAst::Sum {
                    var,
                    cond: Box::new(cond),
                    term: Box::new(term),
                })
            }
            Tok::Dollar(kw) => {
                let Some(aspect) = Aspect::from_keyword(&format!("${kw}")) else {
                    return Err(self.fail_here(&["resource aspect"]));
                };
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let res = self.name()?;
                let args = self.opt_args()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(TermAst::Aspect(aspect, res, args))
            }
            Tok::Ident(s) if s == "value" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let t = self.time()?;
                self.expect(Tok::Comma, "`,`")?;
                let inner = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(TermAst::Value(t, Box::new(inner)))
            }
            Tok::Ident(s) if s != "goal" && s != "if" && s != "then" && s != "value" => {
                self.bump();
                if *self.peek() != Tok::LParen {
                    return Ok(TermAst::Ident(s));
                }
                if let Some(dist) = self.mindist.get(&s).cloned() {
                    return self.mindist_call(s, &dist);
                }
                let args = self.opt_args()?;
                Ok(TermAst::App(s, args))
            }
            _ => Err(self.fail_here(&["term"])),
        }
    }

    fn mindist_call(&mut self, name: String, dist: &str) -> PResult<TermAst> {
        let n = self.dist.get(dist).copied().unwrap_or(2).saturating_sub(1);
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        for _ in 0..n {
            args.push(self.term()?);
            self.expect(Tok::Comma, "`,`")?;
        }
        let binder = self.name()?;
        self.expect(Tok::Comma, "`,`")?;
        let cond = self.formula()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(TermAst::MinDist {
            name,
            args,
            binder,
            cond: Box::new(cond),
        })
    }
}

fn is_cmp(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Eq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge
    )
}

fn is_arith(t: &Tok) -> bool {
    matches!(t, Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(src: &str) -> StatementKind {
        let mut v = parse(src).unwrap();
        assert_eq!(v.len(), 1);
        v.pop().unwrap().kind
    }

    #[test]
    fn empty_file() {
        assert_eq!(parse("").unwrap(), vec![]);
        assert_eq!(parse("// only a comment\n").unwrap(), vec![]);
    }

    #[test]
    fn load_truck_operator() {
        let src = "#operator load-truck(obj, truck, loc) :at s
            :precond [s] at(obj, loc) ∧ at(truck, loc)
            :effects [s+1] at(obj, loc) := false, [s+1] in(obj, truck) := true";
        let StatementKind::Operator(op) = one(src) else {
            panic!()
        };
        assert_eq!(op.params, vec!["obj", "truck", "loc"]);
        assert_eq!(op.effects.len(), 2);
        assert_eq!(op.effects[0].anchor, Anchor::Point(TimeAst::var("s", 1)));
        let Some(FormulaAst::And(parts)) = &op.precond else {
            panic!("{:?}", op.precond)
        };
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn anchor_binds_tightly() {
        let f = parse_formula("[t] a & b").unwrap();
        assert!(matches!(f, FormulaAst::And(ref v) if matches!(v[0], FormulaAst::Anchored(..))));
    }

    #[test]
    fn implication_is_right_associative_and_loosest() {
        let f = parse_formula("a | b -> c -> d").unwrap();
        let FormulaAst::Implies(l, r) = f else {
            panic!()
        };
        assert!(matches!(*l, FormulaAst::Or(_)));
        assert!(matches!(*r, FormulaAst::Implies(..)));
    }

    #[test]
    fn parenthesised_comparison() {
        let f = parse_formula("[t] (10000 / s(a) + 3) < (2 * f(a))").unwrap();
        let FormulaAst::Anchored(_, inner) = f else {
            panic!()
        };
        assert!(matches!(*inner, FormulaAst::Cmp(CmpOp::Lt, ..)));
    }

    #[test]
    fn half_open_interval() {
        let f = parse_formula("(t, t+5] p").unwrap();
        assert!(matches!(
            f,
            FormulaAst::Anchored(
                Anchor::Interval {
                    lo_open: true,
                    hi_open: false,
                    ..
                },
                _
            )
        ));
    }

    #[test]
    fn time_arithmetic_beyond_offset_rejected() {
        assert!(parse_formula("[t+s] p").is_err());
        assert!(parse_formula("[t*2] p").is_err());
    }

    #[test]
    fn sum_and_value() {
        let src = "#define [t] usefulness(instrument):
            value(t, $sum(<mode>, [t] supports(instrument, mode) & mode_needed_for_goal(mode), 1))";
        let StatementKind::Define(m) = one(src) else {
            panic!()
        };
        assert!(matches!(m.body, MacroBody::Term(TermAst::Value(..))));
    }

    #[test]
    fn mindist_call_takes_binder_and_formula() {
        let src = "#distfeature dd(from, to) :domain integer :link link
            #mindistfeature md :distfeature dd :domain integer
            #define [t] near(truck, location): md(location, to, [t] good(truck, to))";
        let v = parse(src).unwrap();
        let StatementKind::Define(m) = &v[2].kind else {
            panic!()
        };
        let MacroBody::Term(TermAst::MinDist { args, binder, .. }) = &m.body else {
            panic!("{:?}", m.body)
        };
        assert_eq!(args.len(), 1);
        assert_eq!(binder, "to");
    }

    #[test]
    fn duplicate_rule_names() {
        let src = "#control :name \"r\" true #control :name \"r\" false";
        let errs = parse(src).unwrap_err();
        assert!(matches!(errs[0], ParseError::DuplicateRuleName { .. }));
    }

    #[test]
    fn recovery_reports_every_bad_statement() {
        let src = "#goal at(a,\n#goal ok\n#goal )";
        let errs = parse(src).unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn rejects_dependency_statements() {
        assert!(parse("#dep foo").is_err());
    }

    #[test]
    fn declarations() {
        let src = "#sorts loc, airport < loc, n = integer [0, 10]
            #objects a1, a2 : airport; c : loc
            #fluents at(thing, loc) :functional 2, fuel(plane) : fixed 3 [0, 10000.5]
            #resources space(truck) : integer [0, 4] :init 4";
        let v = parse(src).unwrap();
        assert_eq!(v.len(), 4);
        let StatementKind::Fluents(f) = &v[2].kind else {
            panic!()
        };
        assert_eq!(f[0].functional, Some(2));
        assert!(matches!(f[1].value, Some(ValueSortAst::Fixed { decimals: 3, .. })));
    }
}
