//! Plans and their IPC-style text form.

use std::fmt::Write as _;

use crate::Decimal;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanStep {
    /// Invocation timepoint in internal units.
    pub start: i64,
    pub action: String,
    pub args: Vec<String>,
    /// Duration in internal units.
    pub duration: i64,
}

impl PlanStep {
    pub fn end(&self) -> i64 {
        self.start + self.duration
    }

    /// `(name arg ...)`
    pub fn text(&self) -> String {
        let mut s = format!("({}", self.action);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn makespan(&self) -> i64 {
        self.steps.iter().map(PlanStep::end).max().unwrap_or(0)
    }

    /// Distinct start timepoints, ascending.
    pub fn start_times(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.steps.iter().map(|s| s.start).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, clap::ValueEnum)]
pub enum PlanFormat {
    Strips,
    #[default]
    Timed,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("line {0}: malformed plan line")]
    MalformedLine(usize),
    #[error("time scale must be at least 1")]
    BadScale,
    #[error("epsilon must not be negative")]
    BadEpsilon,
}

/// Smallest number of decimals that shows every multiple of `1/scale`
/// at a power-of-ten resolution.
fn decimals_for(scale: i64) -> u8 {
    let mut n = 0;
    let mut p = 1i64;
    while p < scale && n < crate::fixed::MAX_SCALE {
        p *= 10;
        n += 1;
    }
    n
}

fn external(internal: i64, scale: i64, decimals: u8) -> Decimal {
    let num = Decimal::from_int(internal).expect("i64 fits");
    let den = Decimal::from_int(scale).expect("i64 fits");
    num.rescale(decimals)
        .and_then(|n| n.checked_div(&den))
        .and_then(|v| v.rescale(decimals))
        .expect("plan times stay within range")
}

/// An internal timepoint in domain units, with as many decimals as the scale needs.
pub fn format_time(internal: i64, scale: i64) -> String {
    external(internal, scale.max(1), decimals_for(scale.max(1))).to_string()
}

/// Render a plan. Each start is shifted by `epsilon` times the 1-based
/// index of its timepoint among the plan's distinct start timepoints.
pub fn format_plan(plan: &Plan, format: PlanFormat, scale: i64, epsilon: Decimal) -> Result<String, PlanError> {
    if scale < 1 {
        return Err(PlanError::BadScale);
    }
    if epsilon.is_negative() {
        return Err(PlanError::BadEpsilon);
    }
    let base = decimals_for(scale);
    let shifted = if epsilon.is_zero() {
        base
    } else {
        base.max(epsilon.normalized().scale())
    };
    let starts = plan.start_times();
    let mut out = String::new();
    for s in &plan.steps {
        let k = starts.binary_search(&s.start).expect("start is listed") as i64 + 1;
        let bump = epsilon
            .checked_mul(&Decimal::from_int(k).expect("small"))
            .expect("epsilon shift in range");
        let t = external(s.start, scale, shifted)
            .checked_add(&bump)
            .and_then(|t| t.rescale(shifted))
            .expect("plan times stay within range");
        write!(out, "{t}: {}", s.text()).unwrap();
        if format == PlanFormat::Timed {
            write!(out, " [{}]", external(s.duration, scale, base)).unwrap();
        }
        out.push('\n');
    }
    writeln!(
        out,
        ";; Plan length {}, maxtime {}",
        plan.len(),
        external(plan.makespan(), scale, base)
    )
    .unwrap();
    Ok(out)
}

/// Inverse of [`format_plan`] for the same scale and epsilon. Blank lines
/// and `;;` comments are ignored.
pub fn parse_plan(text: &str, format: PlanFormat, scale: i64, epsilon: Decimal) -> Result<Plan, PlanError> {
    if scale < 1 {
        return Err(PlanError::BadScale);
    }
    let mut raw = vec![];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(";;") {
            continue;
        }
        raw.push(parse_line(line, format).ok_or(PlanError::MalformedLine(i + 1))?);
    }
    let mut printed: Vec<Decimal> = raw.iter().map(|r| r.0).collect();
    printed.sort();
    printed.dedup();
    // Times finer than the scale are rejected rather than rounded.
    let to_internal = |d: Decimal, line: usize| -> Result<i64, PlanError> {
        Decimal::from_int(scale)
            .and_then(|s| d.checked_mul(&s))
            .ok()
            .and_then(|v| v.to_integer())
            .ok_or(PlanError::MalformedLine(line))
    };
    let mut steps = vec![];
    for (n, (t, action, args, dur)) in raw.into_iter().enumerate() {
        let k = printed.binary_search(&t).unwrap() as i64 + 1;
        let bump = epsilon
            .checked_mul(&Decimal::from_int(k).unwrap())
            .map_err(|_| PlanError::MalformedLine(n + 1))?;
        let t = t.checked_sub(&bump).map_err(|_| PlanError::MalformedLine(n + 1))?;
        steps.push(PlanStep {
            start: to_internal(t, n + 1)?,
            action,
            args,
            duration: match dur {
                Some(d) => to_internal(d, n + 1)?,
                None => scale,
            },
        });
    }
    Ok(Plan { steps })
}

type Line = (Decimal, String, Vec<String>, Option<Decimal>);

fn parse_line(line: &str, format: PlanFormat) -> Option<Line> {
    let (t, rest) = line.split_once(':')?;
    let t: Decimal = t.trim().parse().ok()?;
    let rest = rest.trim();
    let inner = rest.strip_prefix('(')?;
    let (body, tail) = inner.split_once(')')?;
    let mut words = body.split_whitespace().map(str::to_string);
    let action = words.next()?;
    let args = words.collect();
    let tail = tail.trim();
    let dur = match format {
        PlanFormat::Strips if tail.is_empty() => None,
        PlanFormat::Strips => return None,
        PlanFormat::Timed => {
            let d = tail.strip_prefix('[')?.strip_suffix(']')?;
            Some(d.trim().parse().ok()?)
        }
    };
    Some((t, action, args, dur))
}
