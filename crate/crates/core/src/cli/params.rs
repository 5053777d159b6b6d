use serde_json::{Map, Value};

/// Shape of a parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    RealList,
    Int,
    IntList,
    Text,
}

impl Kind {
    fn describe(&self) -> &'static str {
        match self {
            Kind::Real => "a number",
            Kind::RealList => "a number or a non-empty list of numbers",
            Kind::Int => "a non-negative integer",
            Kind::IntList => "a non-negative integer or a non-empty list of them",
            Kind::Text => "a string",
        }
    }
}

/// Declaration of one experiment parameter.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    /// Default as a JSON literal; `None` makes the key required.
    pub default: Option<&'static str>,
    /// Reject zero and negative values.
    pub positive: bool,
    /// Closed range check applied after the positivity check.
    pub range: Option<(f64, f64)>,
}

pub const fn required(key: &'static str, kind: Kind) -> ParamSpec {
    ParamSpec { key, kind, default: None, positive: true, range: None }
}

pub const fn optional(key: &'static str, kind: Kind, default: &'static str) -> ParamSpec {
    ParamSpec { key, kind, default: Some(default), positive: true, range: None }
}

impl ParamSpec {
    pub const fn non_negative(mut self) -> Self {
        self.positive = false;
        self
    }

    pub const fn within(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    fn check_number(&self, x: f64, problems: &mut Vec<String>) {
        if !x.is_finite() {
            problems.push(format!("`{}`: {x} is not finite", self.key));
        } else if self.positive && x <= 0.0 {
            problems.push(format!("`{}` must be positive, got {x}", self.key));
        } else if !self.positive && x < 0.0 {
            problems.push(format!("`{}` must not be negative, got {x}", self.key));
        } else if let Some((lo, hi)) = self.range {
            if x < lo || x > hi {
                problems.push(format!("`{}` must lie in [{lo}, {hi}], got {x}", self.key));
            }
        }
    }

    /// Type and range problems of `value`, if any.
    fn check(&self, value: &Value, problems: &mut Vec<String>) {
        let wrong =
            |problems: &mut Vec<String>| problems.push(format!("`{}` must be {}", self.key, self.kind.describe()));
        match self.kind {
            Kind::Real => match value.as_f64() {
                Some(x) => self.check_number(x, problems),
                None => wrong(problems),
            },
            Kind::Int => match value.as_u64() {
                Some(x) => self.check_number(x as f64, problems),
                None => wrong(problems),
            },
            Kind::RealList | Kind::IntList => {
                let items: Vec<&Value> = match value {
                    Value::Array(a) => a.iter().collect(),
                    v => vec![v],
                };
                if items.is_empty() {
                    problems.push(format!("`{}` is an empty list", self.key));
                }
                for item in items {
                    let x = if self.kind == Kind::IntList { item.as_u64().map(|v| v as f64) } else { item.as_f64() };
                    match x {
                        Some(x) => self.check_number(x, problems),
                        None => return wrong(problems),
                    }
                }
            }
            Kind::Text => {
                if !value.is_string() {
                    wrong(problems)
                }
            }
        }
    }
}

/// Parameters after defaults have been filled in and every value checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    values: Map<String, Value>,
}

/// Fills defaults and checks `given` against `specs`. Unknown keys are reported.
pub fn resolve(specs: &[ParamSpec], given: &Map<String, Value>) -> std::result::Result<Resolved, Vec<String>> {
    let mut problems = Vec::new();
    let mut values = Map::new();
    for spec in specs {
        let value = match (given.get(spec.key), spec.default) {
            (Some(v), _) => v.clone(),
            (None, Some(d)) => serde_json::from_str(d).expect("defaults are valid JSON"),
            (None, None) => {
                problems.push(format!("missing required key `{}`", spec.key));
                continue;
            }
        };
        spec.check(&value, &mut problems);
        values.insert(spec.key.to_string(), value);
    }
    for key in given.keys() {
        if !specs.iter().any(|s| s.key == key) {
            problems.push(format!("unknown key `{key}`"));
        }
    }
    if problems.is_empty() {
        Ok(Resolved { values })
    } else {
        Err(problems)
    }
}

impl Resolved {
    pub fn as_map(&self) -> &Map<String, Value> {
        &self.values
    }

    fn get(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or_else(|| panic!("parameter `{key}` was not declared"))
    }

    pub fn real(&self, key: &str) -> f64 {
        self.get(key).as_f64().expect("checked when resolving")
    }

    pub fn int(&self, key: &str) -> u64 {
        self.get(key).as_u64().expect("checked when resolving")
    }

    pub fn text(&self, key: &str) -> &str {
        self.get(key).as_str().expect("checked when resolving")
    }

    /// Sorted, de-duplicated list (a scalar counts as a one-element list).
    pub fn reals(&self, key: &str) -> Vec<f64> {
        let mut v: Vec<f64> = match self.get(key) {
            Value::Array(a) => a.iter().map(|x| x.as_f64().expect("checked when resolving")).collect(),
            x => vec![x.as_f64().expect("checked when resolving")],
        };
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn ints(&self, key: &str) -> Vec<usize> {
        let mut v: Vec<usize> = self.reals(key).into_iter().map(|x| x as usize).collect();
        v.dedup();
        v
    }
}
