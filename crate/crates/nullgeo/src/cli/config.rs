//! Strict flat key = value configuration files for the scenario runner.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored.  Every key must belong to the selected scenario's
//! key set (unknown keys are rejected with the offending line number).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    Curvature,
    Geodesic,
    Congruence,
    FocusingSweep,
    Cone,
    GraphTheta,
    Solve,
    Maxprin,
    SplittingVerify,
}

pub const SCENARIO_NAMES: [(&str, Scenario); 9] = [
    ("curvature", Scenario::Curvature),
    ("geodesic", Scenario::Geodesic),
    ("congruence", Scenario::Congruence),
    ("focusing-sweep", Scenario::FocusingSweep),
    ("cone", Scenario::Cone),
    ("graph-theta", Scenario::GraphTheta),
    ("solve", Scenario::Solve),
    ("maxprin", Scenario::Maxprin),
    ("splitting-verify", Scenario::SplittingVerify),
];

impl Scenario {
    pub fn parse(name: &str) -> Result<Scenario> {
        SCENARIO_NAMES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| *s)
            .ok_or_else(|| {
                let valid: Vec<&str> = SCENARIO_NAMES.iter().map(|(n, _)| *n).collect();
                Error::Validation(format!(
                    "unknown scenario `{name}`; valid scenarios: {}",
                    valid.join(", ")
                ))
            })
    }

    pub fn name(self) -> &'static str {
        SCENARIO_NAMES.iter().find(|(_, s)| *s == self).unwrap().0
    }

    /// Keys this scenario accepts, with their defaults (None = required).
    fn key_set(self) -> Vec<(&'static str, Option<&'static str>)> {
        match self {
            Scenario::Curvature => vec![
                ("metric", Some("minkowski{n=4}")),
                ("point", None),
                ("tol", Some("")),
            ],
            Scenario::Geodesic => vec![
                ("metric", Some("minkowski{n=4}")),
                ("point", None),
                ("tangent", None),
                ("span", Some("10")),
                ("samples", Some("100")),
            ],
            Scenario::Congruence => vec![
                ("metric", Some("minkowski{n=4}")),
                ("point", None),
                ("tangent", None),
                ("b0", Some("zero")),
                ("span", Some("10")),
                ("samples", Some("100")),
                ("tol", Some("1e-7")),
            ],
            Scenario::FocusingSweep => vec![
                ("metric", Some("minkowski{n=4}")),
                ("point", None),
                ("tangent", None),
                ("radii", Some("1,2,3,4,5,6,7,8,9,10")),
                ("tol", Some("1e-6")),
            ],
            Scenario::Cone => vec![
                ("metric", Some("minkowski{n=4}")),
                ("point", None),
                ("tangent", None),
                ("span", Some("10")),
                ("samples", Some("100")),
                ("expect_theta_times_tau", Some("")),
                ("tol", Some("1e-6")),
            ],
            Scenario::GraphTheta => vec![
                ("slab", Some("hyperplane{n=4}")),
                ("lo", None),
                ("hi", None),
                ("shape", None),
                ("graph", None),
                ("expect_theta", Some("")),
                ("theta_tol", Some("")),
            ],
            Scenario::Solve => vec![
                ("slab", Some("hyperplane{n=4}")),
                ("lo", None),
                ("hi", None),
                ("shape", None),
                ("graph", None),
                ("theta", Some("0")),
                ("max_iter", Some("50")),
                ("residual_tol", Some("1e-9")),
            ],
            Scenario::Maxprin => vec![
                ("slab", Some("hyperplane{n=4}")),
                ("lo", None),
                ("hi", None),
                ("shape", None),
                ("lower", None),
                ("upper", None),
                ("theta_tol", Some("")),
            ],
            Scenario::SplittingVerify => vec![
                ("hypersurface", None),
                ("span", Some("2")),
                ("tol", Some("1e-7")),
            ],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved scenario configuration: every accepted key has a value
/// (possibly the empty string for optional keys left unset).
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub values: BTreeMap<String, String>,
}

/// Parse and validate a configuration file.  `cli_scenario`, when given,
/// must agree with a `scenario` line in the file (either may supply it).
pub fn parse_config(text: &str, cli_scenario: Option<&str>) -> Result<ScenarioConfig> {
    let mut raw: Vec<(usize, String, String)> = Vec::new();
    let mut scenario_name: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let body = line.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `key = value`, got `{body}`"),
            });
        };
        let k = k.trim().to_string();
        let v = v.trim().to_string();
        if k == "scenario" {
            if scenario_name.is_some() {
                return Err(Error::Parse { line: lineno, msg: "duplicate `scenario` key".into() });
            }
            scenario_name = Some(v);
        } else {
            if raw.iter().any(|(_, rk, _)| *rk == k) {
                return Err(Error::Parse { line: lineno, msg: format!("duplicate key `{k}`") });
            }
            raw.push((lineno, k, v));
        }
    }
    let name = match (scenario_name, cli_scenario) {
        (Some(file), Some(cli)) if file != cli => {
            return Err(Error::Validation(format!(
                "scenario `{file}` in config does not match `{cli}` on the command line"
            )));
        }
        (Some(file), _) => file,
        (None, Some(cli)) => cli.to_string(),
        (None, None) => {
            return Err(Error::Validation("no scenario given".into()));
        }
    };
    let scenario = Scenario::parse(&name)?;

    let keys = scenario.key_set();
    let mut values = BTreeMap::new();
    for (lineno, k, v) in raw {
        if !keys.iter().any(|(known, _)| *known == k) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("unknown key `{k}` for scenario `{scenario}`"),
            });
        }
        values.insert(k, v);
    }
    for (k, default) in &keys {
        if !values.contains_key(*k) {
            match default {
                Some(d) => {
                    values.insert((*k).to_string(), (*d).to_string());
                }
                None => {
                    return Err(Error::Validation(format!(
                        "missing required key `{k}` for scenario `{scenario}`"
                    )));
                }
            }
        }
    }
    let cfg = ScenarioConfig { scenario, values };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ScenarioConfig) -> Result<()> {
    for key in ["tol", "theta_tol", "residual_tol"] {
        if let Some(v) = cfg.values.get(key) {
            if !v.is_empty() && v.parse::<f64>().map_or(true, |x| x <= 0.0) {
                return Err(Error::Validation(format!(
                    "key `{key}` must be a positive number, got `{v}`"
                )));
            }
        }
    }
    for key in ["span"] {
        if let Some(v) = cfg.values.get(key) {
            if v.parse::<f64>().map_or(true, |x| x <= 0.0) {
                return Err(Error::Validation(format!(
                    "key `{key}` must be a positive number, got `{v}`"
                )));
            }
        }
    }
    if let Some(v) = cfg.values.get("samples") {
        if v.parse::<usize>().map_or(true, |x| x < 2) {
            return Err(Error::Validation(format!(
                "key `samples` must be an integer >= 2, got `{v}`"
            )));
        }
    }
    if let Some(v) = cfg.values.get("shape") {
        let shape = parse_usize_list(v)
            .map_err(|e| Error::Validation(format!("key `shape`: {e}")))?;
        if shape.is_empty() || shape.iter().any(|&s| s < 5) {
            return Err(Error::Validation(format!(
                "key `shape` needs >= 5 nodes per axis (>= 3 interior), got `{v}`"
            )));
        }
    }
    if let Some(v) = cfg.values.get("radii") {
        let radii = parse_f64_list(v)
            .map_err(|e| Error::Validation(format!("key `radii`: {e}")))?;
        if radii.is_empty() || radii.iter().any(|&r| r <= 0.0) {
            return Err(Error::Validation(format!(
                "key `radii` must list positive radii, got `{v}`"
            )));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "key `radii` must be strictly increasing, got `{v}`"
            )));
        }
    }
    if let Some(v) = cfg.values.get("max_iter") {
        if v.parse::<usize>().map_or(true, |x| x == 0) {
            return Err(Error::Validation(format!(
                "key `max_iter` must be a positive integer, got `{v}`"
            )));
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.str(key)
            .parse()
            .map_err(|_| Error::Validation(format!("key `{key}`: expected a number, got `{}`", self.str(key))))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.str(key)
            .parse()
            .map_err(|_| Error::Validation(format!("key `{key}`: expected an integer, got `{}`", self.str(key))))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        parse_f64_list(self.str(key))
            .map_err(|e| Error::Validation(format!("key `{key}`: {e}")))
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        parse_usize_list(self.str(key))
            .map_err(|e| Error::Validation(format!("key `{key}`: {e}")))
    }

    /// Optional float: empty string means unset.
    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        let s = self.str(key);
        if s.is_empty() {
            return Ok(None);
        }
        self.f64(key).map(Some)
    }
}

fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

fn parse_usize_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("`{t}` is not an integer")))
        .collect()
}
