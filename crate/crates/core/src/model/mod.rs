//! Typed domain and problem representation.

mod build;
mod resolve;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::formula::{Formula, Offsets, Term, TimeSlot, VarId};
use crate::goal::GoalAbstraction;
use crate::lang::{ResourceKind, Span};
use crate::Decimal;

pub use build::{build_domain, build_problem, compile_query, load, load_problem};

pub type SortId = u32;
pub type ObjId = u32;
pub type FluentId = u32;
pub type ResId = u32;

pub const BOOL_SORT: SortId = 0;
pub const FALSE: ObjId = 0;
pub const TRUE: ObjId = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Obj(ObjId),
    Num(Decimal),
}

impl Value {
    pub fn bool(b: bool) -> Value {
        Value::Obj(if b { TRUE } else { FALSE })
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Obj(TRUE) => Some(true),
            Value::Obj(FALSE) => Some(false),
            _ => None,
        }
    }

    pub fn as_num(self) -> Option<Decimal> {
        match self {
            Value::Num(n) => Some(n),
            Value::Obj(_) => None,
        }
    }
}

/// Bounded integer or fixed-point domain; `decimals == 0` is integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NumDomain {
    pub decimals: u8,
    pub lo: Decimal,
    pub hi: Decimal,
}

impl NumDomain {
    pub fn contains(&self, v: Decimal) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Round `v` to this domain's scale and check the bounds.
    pub fn admit(&self, v: Decimal) -> Result<Decimal, ModelError> {
        let r = v
            .rescale(self.decimals)
            .map_err(|e| ModelError::TypeMismatch(e.to_string()))?;
        if self.contains(r) {
            Ok(r)
        } else {
            Err(ModelError::NumericOutOfBounds(format!(
                "{v} outside [{}, {}]",
                self.lo, self.hi
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Obj(SortId),
    Num(NumDomain),
}

impl ValueType {
    pub fn is_bool(&self) -> bool {
        *self == ValueType::Obj(BOOL_SORT)
    }
}

/// Sorts, their single-inheritance hierarchy and the objects in each.
#[derive(Debug, Clone)]
pub struct SortTable {
    names: Vec<String>,
    parent: Vec<Option<SortId>>,
    numeric: Vec<Option<NumDomain>>,
    by_name: HashMap<String, SortId>,
    obj_names: Vec<String>,
    obj_sort: Vec<SortId>,
    obj_by_name: HashMap<String, ObjId>,
    /// Members of each sort including those of subsorts, in declaration order.
    members: Vec<Vec<ObjId>>,
    /// Position of each member within `members[sort]`.
    position: Vec<HashMap<ObjId, u32>>,
}

impl Default for SortTable {
    fn default() -> Self {
        let mut t = SortTable {
            names: vec![],
            parent: vec![],
            numeric: vec![],
            by_name: HashMap::new(),
            obj_names: vec![],
            obj_sort: vec![],
            obj_by_name: HashMap::new(),
            members: vec![],
            position: vec![],
        };
        t.add_sort("boolean", None, None).unwrap();
        t.add_object("false", BOOL_SORT).unwrap();
        t.add_object("true", BOOL_SORT).unwrap();
        t
    }
}

impl SortTable {
    pub fn add_sort(
        &mut self,
        name: &str,
        parent: Option<SortId>,
        numeric: Option<NumDomain>,
    ) -> Result<SortId, ModelError> {
        if self.by_name.contains_key(name) {
            return Err(ModelError::DuplicateDeclaration(name.to_string()));
        }
        let id = self.names.len() as SortId;
        self.names.push(name.to_string());
        self.parent.push(parent);
        self.numeric.push(numeric);
        self.by_name.insert(name.to_string(), id);
        self.members.push(vec![]);
        self.position.push(HashMap::new());
        Ok(id)
    }

    /// Set a parent after declaration, rejecting cycles.
    pub fn set_parent(&mut self, sort: SortId, parent: SortId) -> Result<(), ModelError> {
        let mut p = Some(parent);
        while let Some(x) = p {
            if x == sort {
                return Err(ModelError::CyclicSortHierarchy(self.names[sort as usize].clone()));
            }
            p = self.parent[x as usize];
        }
        if !self.members[sort as usize].is_empty() {
            return Err(ModelError::InvalidDeclaration(format!(
                "sort {} already has objects",
                self.names[sort as usize]
            )));
        }
        self.parent[sort as usize] = Some(parent);
        Ok(())
    }

    pub fn add_object(&mut self, name: &str, sort: SortId) -> Result<ObjId, ModelError> {
        if self.obj_by_name.contains_key(name) {
            return Err(ModelError::DuplicateDeclaration(name.to_string()));
        }
        if self.numeric[sort as usize].is_some() {
            return Err(ModelError::TypeMismatch(format!(
                "object {name} declared in numeric sort {}",
                self.names[sort as usize]
            )));
        }
        let id = self.obj_names.len() as ObjId;
        self.obj_names.push(name.to_string());
        self.obj_sort.push(sort);
        self.obj_by_name.insert(name.to_string(), id);
        let mut s = Some(sort);
        while let Some(x) = s {
            let m = &mut self.members[x as usize];
            self.position[x as usize].insert(id, m.len() as u32);
            m.push(id);
            s = self.parent[x as usize];
        }
        Ok(id)
    }

    pub fn sort(&self, name: &str) -> Option<SortId> {
        self.by_name.get(name).copied()
    }

    pub fn sort_name(&self, s: SortId) -> &str {
        &self.names[s as usize]
    }

    pub fn sort_count(&self) -> usize {
        self.names.len()
    }

    pub fn parent(&self, s: SortId) -> Option<SortId> {
        self.parent[s as usize]
    }

    pub fn numeric(&self, s: SortId) -> Option<NumDomain> {
        self.numeric[s as usize]
    }

    pub fn object(&self, name: &str) -> Option<ObjId> {
        self.obj_by_name.get(name).copied()
    }

    pub fn object_name(&self, o: ObjId) -> &str {
        &self.obj_names[o as usize]
    }

    pub fn object_sort(&self, o: ObjId) -> SortId {
        self.obj_sort[o as usize]
    }

    pub fn object_count(&self) -> usize {
        self.obj_names.len()
    }

    pub fn members(&self, s: SortId) -> &[ObjId] {
        &self.members[s as usize]
    }

    pub fn position(&self, s: SortId, o: ObjId) -> Option<u32> {
        self.position[s as usize].get(&o).copied()
    }

    pub fn is_subsort(&self, sub: SortId, sup: SortId) -> bool {
        let mut s = Some(sub);
        while let Some(x) = s {
            if x == sup {
                return true;
            }
            s = self.parent[x as usize];
        }
        false
    }

    pub fn is_member(&self, o: ObjId, s: SortId) -> bool {
        self.is_subsort(self.obj_sort[o as usize], s)
    }

    /// Sorts an object belongs to, from its own sort upward.
    pub fn sorts_of(&self, o: ObjId) -> Vec<SortId> {
        let mut v = vec![];
        let mut s = Some(self.obj_sort[o as usize]);
        while let Some(x) = s {
            v.push(x);
            s = self.parent[x as usize];
        }
        v
    }

    /// Sort implied by a variable name: trailing digits and primes removed.
    pub fn sort_of_var(&self, var: &str) -> Option<SortId> {
        self.sort(strip_var(var))
    }
}

pub fn strip_var(name: &str) -> &str {
    name.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'')
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluentDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub value: ValueType,
    /// 0-based position of the value argument of a functional fluent.
    pub functional: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub domain: NumDomain,
    pub init: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistFeature {
    pub name: String,
    pub link: FluentId,
    pub cost: Option<FluentId>,
    pub domain: NumDomain,
    pub node_sort: SortId,
    /// Number of leading link arguments before origin and destination.
    pub extra: usize,
    pub extra_sorts: Vec<SortId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinDistFeature {
    pub name: String,
    pub dist: usize,
    pub domain: NumDomain,
}

/// Where in time an effect applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum When {
    At(crate::formula::Time),
    Over(crate::formula::Time, crate::formula::Time),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    pub quantified: Vec<(VarId, SortId)>,
    pub condition: Option<Formula>,
    pub when: When,
    pub fluent: FluentId,
    pub args: Vec<Term>,
    pub value: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceEffect {
    pub when: When,
    pub kind: ResourceKind,
    pub res: ResId,
    pub args: Vec<Term>,
    pub amount: Term,
}

/// Frame slot holding the invocation timepoint of an operator.
pub const START_SLOT: TimeSlot = 0;
/// Frame slot holding the end timepoint of an operator.
pub const END_SLOT: TimeSlot = 1;
/// Frame slot holding a control rule's timepoint variable.
pub const RULE_SLOT: TimeSlot = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub name: String,
    pub params: Vec<(String, SortId)>,
    pub nvars: usize,
    pub ntimes: usize,
    pub precond: Option<Formula>,
    pub prevail: Vec<Formula>,
    pub duration: Option<Term>,
    pub effects: Vec<Effect>,
    pub resources: Vec<ResourceEffect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub free: Vec<(VarId, SortId)>,
    pub body: Formula,
    pub nvars: usize,
    pub ntimes: usize,
    pub offsets: Offsets,
    /// Largest forward offset from the rule's timepoint that is read.
    pub span: i64,
}

/// Engine toggles carried by `#option` statements.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Options(pub BTreeMap<String, String>);

impl Options {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|s| s.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Domain {
    pub sorts: SortTable,
    pub fluents: Vec<FluentDecl>,
    pub fluent_by_name: HashMap<String, FluentId>,
    pub resources: Vec<ResourceDecl>,
    pub resource_by_name: HashMap<String, ResId>,
    pub operators: Vec<Operator>,
    pub rules: Vec<Rule>,
    pub macros: HashMap<String, crate::lang::MacroAst>,
    pub dist: Vec<DistFeature>,
    pub mindist: Vec<MinDistFeature>,
    pub options: Options,
}

impl Domain {
    /// Number of sorts other than the built-in `boolean`.
    pub fn user_sort_count(&self) -> usize {
        self.sorts.sort_count() - 1
    }

    pub fn fluent(&self, name: &str) -> Option<FluentId> {
        self.fluent_by_name.get(name).copied()
    }

    pub fn resource(&self, name: &str) -> Option<ResId> {
        self.resource_by_name.get(name).copied()
    }

    pub fn operator(&self, name: &str) -> Option<usize> {
        self.operators.iter().position(|o| o.name == name)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

/// Dense numbering of ground fluent and resource instances.
#[derive(Debug, Clone)]
pub struct GroundIndex {
    fluent_base: Vec<usize>,
    fluent_dims: Vec<Vec<usize>>,
    fluent_total: usize,
    res_base: Vec<usize>,
    res_dims: Vec<Vec<usize>>,
    res_total: usize,
}

fn layout(sorts: &SortTable, sigs: &[&[SortId]]) -> (Vec<usize>, Vec<Vec<usize>>, usize) {
    let mut base = vec![];
    let mut dims = vec![];
    let mut total = 0;
    for args in sigs {
        base.push(total);
        let d: Vec<usize> = args.iter().map(|&s| sorts.members(s).len()).collect();
        total += d.iter().product::<usize>();
        dims.push(d);
    }
    (base, dims, total)
}

fn encode(
    sorts: &SortTable,
    arg_sorts: &[SortId],
    dims: &[usize],
    base: usize,
    args: &[ObjId],
) -> Option<usize> {
    if args.len() != arg_sorts.len() {
        return None;
    }
    let mut idx = 0usize;
    for ((&s, &d), &o) in arg_sorts.iter().zip(dims).zip(args) {
        idx = idx * d + sorts.position(s, o)? as usize;
    }
    Some(base + idx)
}

fn decode(sorts: &SortTable, arg_sorts: &[SortId], dims: &[usize], mut rel: usize) -> Vec<ObjId> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        let d = dims[i];
        out[i] = sorts.members(arg_sorts[i])[rel % d];
        rel /= d;
    }
    out
}

impl GroundIndex {
    pub fn new(domain: &Domain, sorts: &SortTable) -> Self {
        let f: Vec<&[SortId]> = domain.fluents.iter().map(|f| f.args.as_slice()).collect();
        let r: Vec<&[SortId]> = domain.resources.iter().map(|r| r.args.as_slice()).collect();
        let (fluent_base, fluent_dims, fluent_total) = layout(sorts, &f);
        let (res_base, res_dims, res_total) = layout(sorts, &r);
        GroundIndex {
            fluent_base,
            fluent_dims,
            fluent_total,
            res_base,
            res_dims,
            res_total,
        }
    }

    pub fn fluent_count(&self) -> usize {
        self.fluent_total
    }

    pub fn fluent(&self, domain: &Domain, sorts: &SortTable, f: FluentId, args: &[ObjId]) -> Option<usize> {
        let f = f as usize;
        encode(sorts, &domain.fluents[f].args, &self.fluent_dims[f], self.fluent_base[f], args)
    }

    pub fn resource(&self, domain: &Domain, sorts: &SortTable, r: ResId, args: &[ObjId]) -> Option<usize> {
        let r = r as usize;
        encode(sorts, &domain.resources[r].args, &self.res_dims[r], self.res_base[r], args)
    }

    pub fn resource_count(&self) -> usize {
        self.res_total
    }

    pub fn decode_fluent(&self, domain: &Domain, sorts: &SortTable, gid: usize) -> (FluentId, Vec<ObjId>) {
        // Empty fluents share their base with the next one, so take the last match.
        let f = self.fluent_base.partition_point(|&b| b <= gid) - 1;
        let args = decode(sorts, &domain.fluents[f].args, &self.fluent_dims[f], gid - self.fluent_base[f]);
        (f as FluentId, args)
    }

    pub fn decode_resource(&self, domain: &Domain, sorts: &SortTable, gid: usize) -> (ResId, Vec<ObjId>) {
        let r = self.res_base.partition_point(|&b| b <= gid) - 1;
        let args = decode(sorts, &domain.resources[r].args, &self.res_dims[r], gid - self.res_base[r]);
        (r as ResId, args)
    }
}

/// A fully built planning problem: domain plus objects, initial state and goal.
#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: Arc<Domain>,
    pub sorts: SortTable,
    pub index: GroundIndex,
    pub init: Vec<Value>,
    pub resource_init: Vec<Decimal>,
    pub goals: Vec<(usize, Value)>,
    pub goal: GoalAbstraction,
    pub options: Options,
}

impl Problem {
    pub fn fluent_gid(&self, f: FluentId, args: &[ObjId]) -> Option<usize> {
        self.index.fluent(&self.domain, &self.sorts, f, args)
    }

    pub fn resource_gid(&self, r: ResId, args: &[ObjId]) -> Option<usize> {
        self.index.resource(&self.domain, &self.sorts, r, args)
    }

    pub fn decode_fluent(&self, gid: usize) -> (FluentId, Vec<ObjId>) {
        self.index.decode_fluent(&self.domain, &self.sorts, gid)
    }

    pub fn decode_resource(&self, gid: usize) -> (ResId, Vec<ObjId>) {
        self.index.decode_resource(&self.domain, &self.sorts, gid)
    }

    pub fn fluent_type(&self, gid: usize) -> ValueType {
        self.domain.fluents[self.decode_fluent(gid).0 as usize].value
    }

    /// Ground instances of a fluent or resource, in index order.
    pub fn ground_instances(&self, name: &str) -> Result<Vec<Vec<ObjId>>, ModelError> {
        let sorts: &[SortId] = if let Some(f) = self.domain.fluent(name) {
            &self.domain.fluents[f as usize].args
        } else if let Some(r) = self.domain.resource(name) {
            &self.domain.resources[r as usize].args
        } else {
            return Err(ModelError::UnknownName(name.to_string()));
        };
        Ok(ground_instances(&self.sorts, sorts))
    }

    pub fn format_value(&self, v: Value) -> String {
        match v {
            Value::Obj(o) => self.sorts.object_name(o).to_string(),
            Value::Num(n) => n.to_string(),
        }
    }

    pub fn fluent_text(&self, gid: usize) -> String {
        let (f, args) = self.decode_fluent(gid);
        atom_text(&self.domain.fluents[f as usize].name, &args, &self.sorts)
    }

    pub fn resource_text(&self, gid: usize) -> String {
        let (r, args) = self.decode_resource(gid);
        atom_text(&self.domain.resources[r as usize].name, &args, &self.sorts)
    }

    pub fn option(&self, key: &str) -> Option<&str> {
        self.options.get(key)
    }

    /// Internal time units per external time unit.
    pub fn scale(&self) -> i64 {
        build::scale_option(&self.options).expect("checked when the problem was built")
    }
}

pub fn atom_text(name: &str, args: &[ObjId], sorts: &SortTable) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        let a: Vec<&str> = args.iter().map(|&o| sorts.object_name(o)).collect();
        format!("{}({})", name, a.join(", "))
    }
}

/// Cartesian product of the members of each argument sort.
pub fn ground_instances(sorts: &SortTable, arg_sorts: &[SortId]) -> Vec<Vec<ObjId>> {
    let mut out = vec![vec![]];
    for &s in arg_sorts {
        let m = sorts.members(s);
        let mut next = Vec::with_capacity(out.len() * m.len());
        for prefix in &out {
            for &o in m {
                let mut p = prefix.clone();
                p.push(o);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("`{name}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("macro `{0}` expands to itself")]
    CyclicMacro(String),
    #[error("sort hierarchy has a cycle through `{0}`")]
    CyclicSortHierarchy(String),
    #[error("operator `{op}`: effect or prevail at offset {offset} lies outside duration {duration}")]
    EffectOutsideDuration {
        op: String,
        offset: i64,
        duration: i64,
    },
    #[error("contradictory observation of {0}")]
    ContradictoryObservation(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("goal outside the supported fragment: {0}")]
    UnsupportedGoalFragment(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` declared twice")]
    DuplicateDeclaration(String),
    #[error("no initial value for {0}")]
    NoInitialValue(String),
    #[error("invalid declaration: {0}")]
    InvalidDeclaration(String),
    #[error("numeric value out of bounds: {0}")]
    NumericOutOfBounds(String),
    #[error("unsupported observation: {0}")]
    UnsupportedObservation(String),
    #[error("{}:{}: {error}", span.line, span.col)]
    At { span: Span, error: Box<ModelError> },
    #[error("{0}")]
    Parse(String),
}

impl ModelError {
    /// The underlying error without location wrapping.
    pub fn kind(&self) -> &ModelError {
        match self {
            ModelError::At { error, .. } => error.kind(),
            e => e,
        }
    }

    pub fn at(self, span: Span) -> ModelError {
        match self {
            e @ ModelError::At { .. } => e,
            e => ModelError::At {
                span,
                error: Box::new(e),
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Obj(o) => write!(f, "#{o}"),
            Value::Num(n) => write!(f, "{n}"),
        }
    }
}
