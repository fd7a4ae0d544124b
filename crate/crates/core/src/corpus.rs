//! Bundled benchmark domains, problems and pinned expectations.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::model::{load, load_problem, Domain, ModelError, Problem};

macro_rules! bundled {
    ($($path:literal),* $(,)?) => {
        &[$(($path, include_str!(concat!("../corpus/", $path)))),*]
    };
}

static FILES: &[(&str, &str)] = bundled![
    "manifest.json",
    "logistics/domain.tal",
    "logistics/p1.prob",
    "zeno-strips/domain.tal",
    "zeno-strips/p1.prob",
    "zeno-strips/stages/1-base.tal",
    "zeno-strips/stages/2-all-persons-arrived.tal",
    "zeno-strips/stages/3-arrived-or-in-planes.tal",
    "zeno-strips/stages/4-one-plane-per-pickup.tal",
    "zeno-simpletime/domain.tal",
    "zeno-simpletime/domain-unit-rules.tal",
    "zeno-simpletime/p3.prob",
    "zeno-simpletime/p3-fly.plan",
    "zeno-simpletime/p3-zoom.plan",
    "zeno-timed/domain.tal",
    "zeno-timed/p1.prob",
    "satellite-strips/domain.tal",
    "satellite-strips/p1.prob",
    "satellite-simpletime/domain.tal",
    "satellite-simpletime/p1.prob",
    "driverlog-movement-fragment/domain.tal",
    "driverlog-movement-fragment/p1.prob",
];

/// Line separating the zeno-strips operators from its final rule stage.
const RULE_MARKER: &str = "// -- control rules --";

/// Number of zeno-strips rule stages, the last being the domain file itself.
pub const ZENO_STRIPS_STAGES: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("unknown corpus entry `{0}`")]
    UnknownEntry(String),
    #[error("entry `{entry}` has no {what} `{name}`")]
    Missing { entry: String, what: &'static str, name: String },
    #[error("{0}")]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Published,
    Derived,
    Constructed,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Expectation {
    Counts { sorts: usize, fluents: usize, operators: usize, origin: Origin },
    Durations { values: BTreeMap<String, i64>, origin: Origin },
    Valid { problem: String, origin: Origin },
    Plan {
        problem: String,
        #[serde(default)]
        exclude: Vec<String>,
        plan: String,
        origin: Origin,
    },
    NoPlan { problem: String, variant: String, budget: u64, origin: Origin },
}

impl Expectation {
    pub fn origin(&self) -> Origin {
        match self {
            Expectation::Counts { origin, .. }
            | Expectation::Durations { origin, .. }
            | Expectation::Valid { origin, .. }
            | Expectation::Plan { origin, .. }
            | Expectation::NoPlan { origin, .. } => *origin,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Entry {
    pub id: String,
    /// Path relative to the corpus root.
    pub domain: String,
    #[serde(default)]
    pub variants: BTreeMap<String, String>,
    pub problems: Vec<String>,
    #[serde(default)]
    pub stages: Vec<String>,
    #[serde(default)]
    pub notes: String,
    pub expectations: Vec<Expectation>,
}

impl Entry {
    pub fn domain_text(&self) -> &'static str {
        file(&self.domain).expect("manifest paths are bundled")
    }

    pub fn variant_text(&self, name: &str) -> Result<&'static str, CorpusError> {
        self.variants
            .get(name)
            .and_then(|p| file(p))
            .ok_or_else(|| self.missing("variant", name))
    }

    /// Problem text by short name (`p1`) or full path.
    pub fn problem_text(&self, name: &str) -> Result<&'static str, CorpusError> {
        self.problems
            .iter()
            .find(|p| p.as_str() == name || stem(p) == name)
            .and_then(|p| file(p))
            .ok_or_else(|| self.missing("problem", name))
    }

    pub fn problem_names(&self) -> Vec<&str> {
        self.problems.iter().map(|p| stem(p)).collect()
    }

    fn missing(&self, what: &'static str, name: &str) -> CorpusError {
        CorpusError::Missing { entry: self.id.clone(), what, name: name.to_string() }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

fn stem(path: &str) -> &str {
    let name = path.rsplit('/').next().unwrap_or(path);
    name.split('.').next().unwrap_or(name)
}

/// Contents of a bundled file, by path relative to the corpus root.
pub fn file(path: &str) -> Option<&'static str> {
    FILES.iter().find(|(p, _)| *p == path).map(|(_, t)| *t)
}

pub fn manifest() -> Manifest {
    serde_json::from_str(file("manifest.json").unwrap()).expect("bundled manifest parses")
}

pub fn ids() -> Vec<String> {
    manifest().entries.into_iter().map(|e| e.id).collect()
}

pub fn entry(id: &str) -> Result<Entry, CorpusError> {
    manifest()
        .entries
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| CorpusError::UnknownEntry(id.to_string()))
}

/// Load a domain text and a problem text.
pub fn load_texts(domain: &str, problem: &str) -> Result<Problem, ModelError> {
    load_problem(Arc::new(load(domain)?), problem)
}

/// A bundled entry with its domain and every problem loaded.
#[derive(Debug)]
pub struct Bundle {
    pub entry: Entry,
    pub domain: Arc<Domain>,
    /// `(short name, problem)` in manifest order.
    pub problems: Vec<(String, Problem)>,
}

impl Bundle {
    pub fn problem(&self, name: &str) -> Option<&Problem> {
        self.problems.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

pub fn load_bundled(id: &str) -> Result<Bundle, CorpusError> {
    let entry = entry(id)?;
    let domain = Arc::new(load(entry.domain_text())?);
    let mut problems = vec![];
    for name in entry.problem_names() {
        let p = load_problem(domain.clone(), entry.problem_text(name)?)?;
        problems.push((name.to_string(), p));
    }
    Ok(Bundle { entry, domain, problems })
}

/// Load a bundled entry's main domain with one of its problems.
pub fn load_entry_problem(id: &str, problem: &str) -> Result<Problem, CorpusError> {
    let e = entry(id)?;
    Ok(load_texts(e.domain_text(), e.problem_text(problem)?)?)
}

/// The zeno-simpletime p3 instance: two persons swapping cities with one
/// plane at city0 holding fuel level fl4.
pub fn reconstruct_zeno_simpletime_p3() -> Problem {
    load_entry_problem("zeno-simpletime", "p3").expect("bundled entry loads")
}

/// Load a bundled entry's domain variant with one of its problems.
pub fn load_variant(id: &str, variant: &str, problem: &str) -> Result<Problem, CorpusError> {
    let e = entry(id)?;
    Ok(load_texts(e.variant_text(variant)?, e.problem_text(problem)?)?)
}

/// Domain text of zeno-strips rule stage `k` (1-based). Each stage keeps
/// the operators and replaces the rule section.
pub fn zeno_strips_stage(k: usize) -> Result<String, CorpusError> {
    let e = entry("zeno-strips")?;
    let full = e.domain_text();
    if k == ZENO_STRIPS_STAGES {
        return Ok(full.to_string());
    }
    let stage = k
        .checked_sub(1)
        .and_then(|i| e.stages.get(i))
        .and_then(|p| file(p))
        .ok_or_else(|| e.missing("stage", &k.to_string()))?;
    let head = &full[..full.find(RULE_MARKER).expect("zeno-strips domain has the rule marker")];
    Ok(format!("{head}{stage}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_manifest_path_is_bundled() {
        for e in manifest().entries {
            let mut paths = vec![e.domain.clone()];
            paths.extend(e.variants.values().cloned());
            paths.extend(e.problems.iter().cloned());
            paths.extend(e.stages.iter().cloned());
            for x in &e.expectations {
                if let Expectation::Plan { plan, .. } = x {
                    paths.push(plan.clone());
                }
            }
            for p in paths {
                assert!(file(&p).is_some(), "{}: {p} not bundled", e.id);
            }
        }
    }

    #[test]
    fn unknown_entry() {
        assert!(matches!(load_bundled("nope"), Err(CorpusError::UnknownEntry(_))));
        assert!(matches!(
            load_entry_problem("logistics", "p9"),
            Err(CorpusError::Missing { what: "problem", .. })
        ));
    }

    #[test]
    fn all_entries_load() {
        for e in manifest().entries {
            let b = load_bundled(&e.id).unwrap_or_else(|err| panic!("{}: {err}", e.id));
            assert_eq!(b.problems.len(), e.problems.len());
            for v in e.variants.keys() {
                load_variant(&e.id, v, e.problem_names()[0]).unwrap();
            }
        }
        for k in 1..=ZENO_STRIPS_STAGES {
            let d = zeno_strips_stage(k).unwrap();
            load_texts(&d, file("zeno-strips/p1.prob").unwrap()).unwrap();
        }
        assert!(zeno_strips_stage(0).is_err());
        assert!(zeno_strips_stage(6).is_err());
    }
}
