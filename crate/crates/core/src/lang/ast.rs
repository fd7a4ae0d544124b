//! Abstract syntax for domain and problem files.
//!
//! Nodes carry no source positions; only [`Statement`] does. That keeps
//! structural equality meaningful for round-trip checks.

use crate::Decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

/// A timepoint: an optional timepoint variable plus a constant offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeAst {
    pub var: Option<String>,
    pub offset: i64,
}

impl TimeAst {
    pub fn var(name: &str, offset: i64) -> Self {
        TimeAst {
            var: Some(name.to_string()),
            offset,
        }
    }

    pub fn abs(t: i64) -> Self {
        TimeAst {
            var: None,
            offset: t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Anchor {
    Point(TimeAst),
    Interval {
        lo: TimeAst,
        hi: TimeAst,
        lo_open: bool,
        hi_open: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Queryable resource aspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aspect {
    Init,
    Consumed,
    Produced,
    Borrowed,
    BorrowedNonex,
    Available,
    Minimum,
    Maximum,
}

impl Aspect {
    pub const ALL: [Aspect; 8] = [
        Aspect::Init,
        Aspect::Consumed,
        Aspect::Produced,
        Aspect::Borrowed,
        Aspect::BorrowedNonex,
        Aspect::Available,
        Aspect::Minimum,
        Aspect::Maximum,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Aspect::Init => "$init",
            Aspect::Consumed => "$consumed",
            Aspect::Produced => "$produced",
            Aspect::Borrowed => "$borrowed",
            Aspect::BorrowedNonex => "$borrowed-nonex",
            Aspect::Available => "$available",
            Aspect::Minimum => "$minimum",
            Aspect::Maximum => "$maximum",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Aspect> {
        Aspect::ALL.into_iter().find(|a| a.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormulaAst {
    True,
    False,
    Anchored(Anchor, Box<FormulaAst>),
    Not(Box<FormulaAst>),
    And(Vec<FormulaAst>),
    Or(Vec<FormulaAst>),
    Implies(Box<FormulaAst>, Box<FormulaAst>),
    Exists(Vec<String>, Box<FormulaAst>),
    Forall(Vec<String>, Box<FormulaAst>),
    Goal(Box<FormulaAst>),
    /// A boolean-valued application or identifier used as a formula.
    Atom(TermAst),
    Cmp(CmpOp, TermAst, TermAst),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermAst {
    Ident(String),
    Number(Decimal),
    App(String, Vec<TermAst>),
    /// Nearest-satisfying-node distance: extra link arguments and the
    /// origin in `args`, then the candidate variable and its condition.
    MinDist {
        name: String,
        args: Vec<TermAst>,
        binder: String,
        cond: Box<FormulaAst>,
    },
    Value(TimeAst, Box<TermAst>),
    Aspect(Aspect, String, Vec<TermAst>),
    Sum {
        var: String,
        cond: Box<FormulaAst>,
        term: Box<TermAst>,
    },
    Arith(ArithOp, Box<TermAst>, Box<TermAst>),
    Neg(Box<TermAst>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueSortAst {
    Named(String),
    Integer { lo: Decimal, hi: Decimal },
    Fixed { decimals: u8, lo: Decimal, hi: Decimal },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDeclAst {
    pub name: String,
    pub parent: Option<String>,
    pub numeric: Option<ValueSortAst>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentDeclAst {
    pub name: String,
    pub args: Vec<String>,
    pub value: Option<ValueSortAst>,
    /// 1-based argument position holding the single true value.
    pub functional: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceDeclAst {
    pub name: String,
    pub args: Vec<String>,
    pub domain: ValueSortAst,
    pub init: Option<Decimal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResourceKind {
    Consume,
    Produce,
    BorrowExclusive,
    BorrowNonExclusive,
    Assign,
}

impl ResourceKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ResourceKind::Consume => ":consume",
            ResourceKind::Produce => ":produce",
            ResourceKind::BorrowExclusive => ":borrow",
            ResourceKind::BorrowNonExclusive => ":borrow-nonex",
            ResourceKind::Assign => ":assign",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [
            ResourceKind::Consume,
            ResourceKind::Produce,
            ResourceKind::BorrowExclusive,
            ResourceKind::BorrowNonExclusive,
            ResourceKind::Assign,
        ]
        .into_iter()
        .find(|k| k.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectAst {
    pub quantified: Vec<String>,
    pub condition: Option<FormulaAst>,
    pub anchor: Anchor,
    pub fluent: String,
    pub args: Vec<TermAst>,
    pub value: TermAst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceEffectAst {
    pub anchor: Anchor,
    pub kind: ResourceKind,
    pub resource: String,
    pub args: Vec<TermAst>,
    pub amount: Option<TermAst>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorAst {
    pub name: String,
    pub params: Vec<String>,
    pub time_var: String,
    pub end_var: Option<String>,
    pub precond: Option<FormulaAst>,
    pub prevail: Vec<FormulaAst>,
    pub duration: Option<TermAst>,
    pub effects: Vec<EffectAst>,
    pub resources: Vec<ResourceEffectAst>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MacroBody {
    Formula(FormulaAst),
    Term(TermAst),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroAst {
    pub time_var: String,
    pub name: String,
    pub params: Vec<String>,
    pub body: MacroBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistFeatureAst {
    pub name: String,
    pub params: Vec<String>,
    pub domain: ValueSortAst,
    pub link: String,
    pub cost: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinDistFeatureAst {
    pub name: String,
    pub dist: String,
    pub domain: ValueSortAst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    Sorts(Vec<SortDeclAst>),
    Objects(Vec<(Vec<String>, String)>),
    Fluents(Vec<FluentDeclAst>),
    Resources(Vec<ResourceDeclAst>),
    Obs(TimeAst, FormulaAst),
    Goal(FormulaAst),
    Operator(OperatorAst),
    Control {
        name: Option<String>,
        formula: FormulaAst,
    },
    Define(MacroAst),
    DistFeature(DistFeatureAst),
    MinDistFeature(MinDistFeatureAst),
    Option {
        key: String,
        value: String,
    },
}

#[derive(Debug, Clone)]
pub struct Statement {
    pub kind: StatementKind,
    pub span: Span,
}

impl PartialEq for Statement {
    /// Spans are ignored: two statements are equal when their syntax is.
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}
