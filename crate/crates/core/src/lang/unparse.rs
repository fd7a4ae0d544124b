//! Print statements back to source text. Composite formulas and arithmetic
//! are always parenthesised, so the output parses to the same tree.

use std::fmt::Write;

use super::ast::*;

pub fn unparse(stmt: &Statement) -> String {
    unparse_kind(&stmt.kind)
}

pub fn unparse_kind(kind: &StatementKind) -> String {
    let mut s = String::new();
    match kind {
        StatementKind::Sorts(v) => {
            s.push_str("#sorts ");
            let parts: Vec<String> = v
                .iter()
                .map(|d| match (&d.parent, &d.numeric) {
                    (Some(p), _) => format!("{} < {}", d.name, p),
                    (None, Some(n)) => format!("{} = {}", d.name, value_sort(n)),
                    (None, None) => d.name.clone(),
                })
                .collect();
            s.push_str(&parts.join(", "));
        }
        StatementKind::Objects(groups) => {
            s.push_str("#objects ");
            let parts: Vec<String> = groups
                .iter()
                .map(|(names, sort)| format!("{} : {}", names.join(", "), sort))
                .collect();
            s.push_str(&parts.join("; "));
        }
        StatementKind::Fluents(v) => {
            s.push_str("#fluents ");
            let parts: Vec<String> = v
                .iter()
                .map(|f| {
                    let mut p = signature(&f.name, &f.args);
                    if let Some(vs) = &f.value {
                        let _ = write!(p, " : {}", value_sort(vs));
                    }
                    if let Some(k) = f.functional {
                        let _ = write!(p, " :functional {k}");
                    }
                    p
                })
                .collect();
            s.push_str(&parts.join(", "));
        }
        StatementKind::Resources(v) => {
            s.push_str("#resources ");
            let parts: Vec<String> = v
                .iter()
                .map(|r| {
                    let mut p = format!("{} : {}", signature(&r.name, &r.args), value_sort(&r.domain));
                    if let Some(i) = &r.init {
                        let _ = write!(p, " :init {i}");
                    }
                    p
                })
                .collect();
            s.push_str(&parts.join(", "));
        }
        StatementKind::Obs(t, f) => {
            let _ = write!(s, "#obs [{}] {}", time(t), unparse_formula(f));
        }
        StatementKind::Goal(f) => {
            let _ = write!(s, "#goal {}", unparse_formula(f));
        }
        StatementKind::Operator(op) => operator(&mut s, op),
        StatementKind::Control { name, formula } => {
            s.push_str("#control ");
            if let Some(n) = name {
                let _ = write!(s, ":name \"{n}\" ");
            }
            s.push_str(&unparse_formula(formula));
        }
        StatementKind::Define(m) => {
            let _ = write!(s, "#define [{}] {}: ", m.time_var, signature(&m.name, &m.params));
            match &m.body {
                MacroBody::Formula(f) => s.push_str(&unparse_formula(f)),
                MacroBody::Term(t) => s.push_str(&unparse_term(t)),
            }
        }
        StatementKind::DistFeature(d) => {
            let _ = write!(
                s,
                "#distfeature {} :domain {} :link {}",
                signature(&d.name, &d.params),
                value_sort(&d.domain),
                d.link
            );
            if let Some(c) = &d.cost {
                let _ = write!(s, " :cost {c}");
            }
        }
        StatementKind::MinDistFeature(m) => {
            let _ = write!(
                s,
                "#mindistfeature {} :distfeature {} :domain {}",
                m.name,
                m.dist,
                value_sort(&m.domain)
            );
        }
        StatementKind::Option { key, value } => {
            let plain = value.parse::<crate::Decimal>().is_ok()
                || (!value.is_empty()
                    && matches!(super::lexer::tokenize(value).as_deref(),
                        Ok([t, _]) if matches!(&t.tok, super::lexer::Tok::Ident(i) if i == value)));
            if plain {
                let _ = write!(s, "#option {key} {value}");
            } else {
                let _ = write!(s, "#option {key} \"{value}\"");
            }
        }
    }
    s
}

fn signature(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{}({})", name, args.join(", "))
    }
}

fn value_sort(v: &ValueSortAst) -> String {
    match v {
        ValueSortAst::Named(n) => n.clone(),
        ValueSortAst::Integer { lo, hi } => format!("integer [{lo}, {hi}]"),
        ValueSortAst::Fixed { decimals, lo, hi } => format!("fixed {decimals} [{lo}, {hi}]"),
    }
}

fn operator(s: &mut String, op: &OperatorAst) {
    let _ = write!(s, "#operator {} :at {}", signature(&op.name, &op.params), op.time_var);
    if let Some(e) = &op.end_var {
        let _ = write!(s, " :end {e}");
    }
    if let Some(p) = &op.precond {
        let _ = write!(s, "\n  :precond {}", unparse_formula(p));
    }
    if !op.prevail.is_empty() {
        let v: Vec<String> = op.prevail.iter().map(unparse_formula).collect();
        let _ = write!(s, "\n  :prevail {}", v.join(", "));
    }
    if let Some(d) = &op.duration {
        let _ = write!(s, "\n  :duration {}", unparse_term(d));
    }
    if !op.effects.is_empty() {
        let v: Vec<String> = op.effects.iter().map(effect).collect();
        let _ = write!(s, "\n  :effects {}", v.join(", "));
    }
    if !op.resources.is_empty() {
        let v: Vec<String> = op.resources.iter().map(resource_effect).collect();
        let _ = write!(s, "\n  :resources {}", v.join(", "));
    }
}

fn effect(e: &EffectAst) -> String {
    let mut core = String::new();
    if let Some(c) = &e.condition {
        let _ = write!(core, "if {} then ", unparse_formula(c));
    }
    let _ = write!(
        core,
        "{} {} := {}",
        anchor(&e.anchor),
        application(&e.fluent, &e.args),
        unparse_term(&e.value)
    );
    if e.quantified.is_empty() {
        core
    } else {
        format!("forall {} [ {} ]", e.quantified.join(", "), core)
    }
}

fn resource_effect(r: &ResourceEffectAst) -> String {
    let mut s = format!(
        "{} {} {}",
        anchor(&r.anchor),
        r.kind.keyword(),
        application(&r.resource, &r.args)
    );
    if let Some(a) = &r.amount {
        let _ = write!(s, " :amount {}", unparse_term(a));
    }
    s
}

fn application(name: &str, args: &[TermAst]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        let v: Vec<String> = args.iter().map(unparse_term).collect();
        format!("{}({})", name, v.join(", "))
    }
}

fn time(t: &TimeAst) -> String {
    match (&t.var, t.offset) {
        (None, o) => o.to_string(),
        (Some(v), 0) => v.clone(),
        (Some(v), o) if o > 0 => format!("{v}+{o}"),
        (Some(v), o) => format!("{v}-{}", -(o as i128)),
    }
}

fn anchor(a: &Anchor) -> String {
    match a {
        Anchor::Point(t) => format!("[{}]", time(t)),
        Anchor::Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        } => format!(
            "{}{}, {}{}",
            if *lo_open { '(' } else { '[' },
            time(lo),
            time(hi),
            if *hi_open { ')' } else { ']' }
        ),
    }
}

pub fn unparse_formula(f: &FormulaAst) -> String {
    match f {
        FormulaAst::True => "true".into(),
        FormulaAst::False => "false".into(),
        FormulaAst::Anchored(a, inner) => format!("{} {}", anchor(a), unparse_formula(inner)),
        FormulaAst::Not(inner) => format!("!{}", unparse_formula(inner)),
        FormulaAst::And(v) => joined(v, " & "),
        FormulaAst::Or(v) => joined(v, " | "),
        FormulaAst::Implies(a, b) => {
            format!("({} -> {})", unparse_formula(a), unparse_formula(b))
        }
        FormulaAst::Exists(vars, body) => {
            format!("exists {} [ {} ]", vars.join(", "), unparse_formula(body))
        }
        FormulaAst::Forall(vars, body) => {
            format!("forall {} [ {} ]", vars.join(", "), unparse_formula(body))
        }
        FormulaAst::Goal(inner) => format!("goal({})", unparse_formula(inner)),
        FormulaAst::Atom(t) => unparse_term(t),
        FormulaAst::Cmp(op, a, b) => {
            format!("{} {} {}", unparse_term(a), cmp(*op), unparse_term(b))
        }
    }
}

fn joined(v: &[FormulaAst], sep: &str) -> String {
    let parts: Vec<String> = v.iter().map(unparse_formula).collect();
    format!("({})", parts.join(sep))
}

fn cmp(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "==",
        CmpOp::Ne => "!=",
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Gt => ">",
        CmpOp::Ge => ">=",
    }
}

pub fn unparse_term(t: &TermAst) -> String {
    match t {
        TermAst::Ident(s) => s.clone(),
        TermAst::Number(n) => n.to_string(),
        TermAst::App(name, args) => application(name, args),
        TermAst::MinDist {
            name,
            args,
            binder,
            cond,
        } => {
            let mut parts: Vec<String> = args.iter().map(unparse_term).collect();
            parts.push(binder.clone());
            parts.push(unparse_formula(cond));
            format!("{}({})", name, parts.join(", "))
        }
        TermAst::Value(tm, inner) => format!("value({}, {})", time(tm), unparse_term(inner)),
        TermAst::Aspect(a, res, args) => format!("{}({})", a.keyword(), application(res, args)),
        TermAst::Sum { var, cond, term } => format!(
            "$sum(<{}>, {}, {})",
            var,
            unparse_formula(cond),
            unparse_term(term)
        ),
        TermAst::Arith(op, a, b) => {
            let o = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
                ArithOp::Div => "/",
            };
            format!("({} {} {})", unparse_term(a), o, unparse_term(b))
        }
        TermAst::Neg(inner) => format!("-({})", unparse_term(inner)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn roundtrip(src: &str) {
        let a = parse(src).unwrap();
        let text: Vec<String> = a.iter().map(unparse).collect();
        let b = parse(&text.join("\n")).unwrap_or_else(|e| panic!("{e:?}\n{}", text.join("\n")));
        assert_eq!(a, b, "{}", text.join("\n"));
    }

    #[test]
    fn objects_remain_at_destinations() {
        roundtrip(
            "#control :name \"objects-remain-at-destinations\"
               [t] at(obj, loc) ∧ goal (at(obj, loc)) → [t+1] at(obj, loc)",
        );
    }

    #[test]
    fn sum_term() {
        roundtrip(
            "#define [t] usefulness(instrument):
               value(t, $sum(<mode>, [t] supports(instrument, mode) ∧ needed(mode), 1))",
        );
    }

    #[test]
    fn nested_quantifiers() {
        roundtrip(
            "#control :name \"planes-always-fly-to-goal\"
              [t] at(aircraft, city) ∧ [t+1] ¬at(aircraft, city) →
              ∃city2 [ [t+1] at(aircraft, city2) ∧
                ((goal(at(aircraft, city2)) ∧ [t] all-persons-arrived-or-in-planes ∧
                  ∀person [ [t] in(person, aircraft) → goal(at(person, city2)) ]) ∨
                  ∃person [ [t] in(person, aircraft) ∧ goal(at(person, city2)) ] ∨
                  ∃person [ [t] at(person, city2) ∧ goal(¬at(person, city2)) ]) ∧
                  ¬∃aircraft2 [ [t+1] at(aircraft2, city2) ∧ aircraft2 ≠ aircraft ]]",
        );
    }

    #[test]
    fn declarations_and_operators() {
        roundtrip(
            "#sorts thing, person < thing, level = fixed 3 [-1.5, 10]
             #objects a, b : person; c : thing
             #fluents at(thing, loc) :functional 2, fuel(p) : fixed 3 [0, 100], on
             #resources sem(p) : integer [0, 1] :init 1
             #option mode concurrent
             #option epsilon 0.001
             #option note \"two words\"
             #operator fly(p, a, b) :at t :end e
               :precond [t] at(p, a) & fuel(p) >= 2 * dist(a, b)
               :prevail [t+1, e-1] ok(p), (t, e] fine
               :duration dist(a, b) / speed(p)
               :effects [t+1] at(p, a) := false, [t+1, e-1] flying(p) := true,
                 forall x [ if near(x, a) then [e] seen(x) := true ],
                 [e] fuel(p) := value(t, fuel(p)) - -3
               :resources [t+1, e] :borrow sem(p) :amount 1, [e] :consume tank :amount -(x)",
        );
    }

    #[test]
    fn features() {
        roundtrip(
            "#distfeature dd(from, to) :domain integer :link link :cost len
             #mindistfeature md :distfeature dd :domain integer [0, 99]
             #define [t] d2(truck, location): md(location, to, [t] good(truck, to))",
        );
    }
}
