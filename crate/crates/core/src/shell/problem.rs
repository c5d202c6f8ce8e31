//! Problem files: JSON with a schema version, expressions as text.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::odemodel::{LienardForm, PointMap, PointSymmetry, SecondOrderOde};
use crate::symcore::{parse, Expr, ParseError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub parameters: Vec<ParameterDecl>,
    pub ode: OdeSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symmetries: Vec<SymmetrySpec>,
    /// Extra generators written as linear combinations of the listed ones.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub combinations: Vec<CombinationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linearization: Vec<MapSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    pub label: String,
    pub tau: String,
    pub xi: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinationSpec {
    pub label: String,
    /// e.g. `"G2 - G8"`.
    pub of: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default)]
    pub multipliers: Vec<GoldenSpec>,
    #[serde(default)]
    pub lagrangians: Vec<GoldenSpec>,
    #[serde(default)]
    pub integrals: Vec<GoldenSpec>,
}

/// Either bare expression text or an annotated entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GoldenSpec {
    Text(String),
    Entry(GoldenEntry),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenEntry {
    #[serde(default)]
    pub label: Option<String>,
    pub expr: String,
    /// Multipliers: the symmetry pair that must reproduce it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[String; 2]>,
    /// Multipliers: require equality rather than a constant ratio.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
    /// Lagrangians: dimension reported by the Noether solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noether_dimension: Option<usize>,
    /// Integrals: the golden Lagrangian whose Noether basis must explain it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericSpec {
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub ic: [f64; 3],
    pub t_end: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub label: String,
    pub t: String,
    pub x: String,
    /// Right-hand side of the target equation in the new variables.
    #[serde(default = "zero_text")]
    pub target: String,
    #[serde(default)]
    pub expect: MapExpectation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn zero_text() -> String {
    "0".into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapExpectation {
    #[default]
    Linearizes,
    Fails,
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("schema violation at {pointer}: {msg}")]
    Schema { pointer: String, msg: String },
    #[error("cannot parse expression at {pointer}: {source}")]
    Parse { pointer: String, source: ParseError },
}

impl ProblemError {
    fn schema(pointer: &str, msg: impl Into<String>) -> ProblemError {
        ProblemError::Schema {
            pointer: pointer.to_string(),
            msg: msg.into(),
        }
    }
}

/// A golden with its expression parsed.
#[derive(Clone, Debug, PartialEq)]
pub struct Golden {
    pub label: String,
    pub expr: Expr,
    pub spec: GoldenEntry,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationMap {
    pub label: String,
    pub map: PointMap,
    pub target: SecondOrderOde,
    pub expect: MapExpectation,
    pub note: Option<String>,
}

/// A validated problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub file: ProblemFile,
    pub ode: SecondOrderOde,
    /// Set when the file gave `f`, `g` instead of `F`.
    pub lienard: Option<LienardForm>,
    pub symmetries: Vec<PointSymmetry>,
    /// Generators from `combinations`, used alongside `symmetries`.
    pub combined: Vec<PointSymmetry>,
    pub multipliers: Vec<Golden>,
    pub lagrangians: Vec<Golden>,
    pub integrals: Vec<Golden>,
    pub maps: Vec<LinearizationMap>,
}

impl Problem {
    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn numeric(&self) -> Option<&NumericSpec> {
        self.file.numeric.as_ref()
    }

    /// Listed generators followed by the combined ones.
    pub fn all_symmetries(&self) -> Vec<PointSymmetry> {
        self.symmetries.iter().chain(&self.combined).cloned().collect()
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        use serde_path_to_error::Segment;
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

pub fn load_problem(path: &Path) -> Result<Problem, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    problem_from_str(&text)
}

pub fn problem_from_str(text: &str) -> Result<Problem, ProblemError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        ProblemError::schema(&pointer, e.into_inner().to_string())
    })?;
    compile(file)
}

pub fn compile(file: ProblemFile) -> Result<Problem, ProblemError> {
    if file.schema != SCHEMA_VERSION {
        return Err(ProblemError::schema(
            "/schema",
            format!("unsupported schema version {}, expected {SCHEMA_VERSION}", file.schema),
        ));
    }
    let mut params: Vec<String> = Vec::new();
    for (i, p) in file.parameters.iter().enumerate() {
        let ok = p.name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && p.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok || ["t", "x", "xdot", "xddot"].contains(&p.name.as_str()) {
            return Err(ProblemError::schema(
                &format!("/parameters/{i}/name"),
                format!("`{}` is not a valid parameter name", p.name),
            ));
        }
        if params.contains(&p.name) {
            return Err(ProblemError::schema(
                &format!("/parameters/{i}/name"),
                format!("parameter `{}` declared twice", p.name),
            ));
        }
        params.push(p.name.clone());
    }
    let ex = |text: &str, pointer: String| -> Result<Expr, ProblemError> {
        parse(text, &params).map_err(|source| ProblemError::Parse { pointer, source })
    };

    let (f_rhs, lienard) = match (&file.ode.rhs, &file.ode.f, &file.ode.g) {
        (Some(rhs), None, None) => (ex(rhs, "/ode/F".into())?, None),
        (None, Some(f), Some(g)) => {
            let lf = LienardForm {
                f: ex(f, "/ode/f".into())?,
                g: ex(g, "/ode/g".into())?,
            };
            for (name, e) in [("f", &lf.f), ("g", &lf.g)] {
                if e.contains(&crate::symcore::Symbol::v()) || e.contains(&crate::symcore::Symbol::t()) {
                    return Err(ProblemError::schema(
                        &format!("/ode/{name}"),
                        "a Lienard coefficient may depend on x only",
                    ));
                }
            }
            (lf.rhs(), Some(lf))
        }
        (Some(_), _, _) => {
            return Err(ProblemError::schema("/ode", "give either F or the pair f, g, not both"))
        }
        _ => return Err(ProblemError::schema("/ode", "give either F or the pair f, g")),
    };
    if f_rhs.contains(&crate::symcore::Symbol::xddot()) {
        return Err(ProblemError::schema("/ode/F", "F may not contain xddot"));
    }
    let ode = SecondOrderOde {
        name: file.name.clone(),
        params: params.clone(),
        f: f_rhs,
    };

    let mut symmetries = Vec::new();
    for (i, s) in file.symmetries.iter().enumerate() {
        if symmetries.iter().any(|p: &PointSymmetry| p.label == s.label) {
            return Err(ProblemError::schema(
                &format!("/symmetries/{i}/label"),
                format!("duplicate label `{}`", s.label),
            ));
        }
        let sym = PointSymmetry::new(
            &s.label,
            ex(&s.tau, format!("/symmetries/{i}/tau"))?,
            ex(&s.xi, format!("/symmetries/{i}/xi"))?,
        );
        if !sym.is_point() {
            return Err(ProblemError::schema(
                &format!("/symmetries/{i}"),
                "tau and xi may depend on t and x only",
            ));
        }
        symmetries.push(sym);
    }
    let labels: Vec<String> = symmetries.iter().map(|s| s.label.clone()).collect();
    let mut combined = Vec::new();
    for (i, c) in file.combinations.iter().enumerate() {
        let pointer = format!("/combinations/{i}/of");
        let mut scope = params.clone();
        scope.extend(labels.iter().cloned());
        let lin = parse(&c.of, &scope).map_err(|source| ProblemError::Parse {
            pointer: pointer.clone(),
            source,
        })?;
        let sym = combine(&lin, &symmetries, &c.label)
            .ok_or_else(|| ProblemError::schema(&pointer, "not a linear combination of listed generators"))?;
        combined.push(sym);
    }

    let expected = file.expected.clone().unwrap_or_default();
    let goldens = |list: &[GoldenSpec], kind: &str, prefix: &str| -> Result<Vec<Golden>, ProblemError> {
        list.iter()
            .enumerate()
            .map(|(i, g)| {
                let entry = match g {
                    GoldenSpec::Text(s) => GoldenEntry {
                        expr: s.clone(),
                        ..Default::default()
                    },
                    GoldenSpec::Entry(e) => e.clone(),
                };
                let pointer = match g {
                    GoldenSpec::Text(_) => format!("/expected/{kind}/{i}"),
                    GoldenSpec::Entry(_) => format!("/expected/{kind}/{i}/expr"),
                };
                let expr = ex(&entry.expr, pointer)?;
                Ok(Golden {
                    label: entry.label.clone().unwrap_or_else(|| format!("{prefix}{}", i + 1)),
                    expr,
                    spec: entry,
                })
            })
            .collect()
    };
    let multipliers = goldens(&expected.multipliers, "multipliers", "expected M")?;
    let lagrangians = goldens(&expected.lagrangians, "lagrangians", "expected L")?;
    let integrals = goldens(&expected.integrals, "integrals", "expected I")?;
    let all_labels: Vec<String> = labels.iter().chain(combined.iter().map(|s| &s.label)).cloned().collect();
    for (i, g) in multipliers.iter().enumerate() {
        if let Some(pair) = &g.spec.pair {
            for (j, l) in pair.iter().enumerate() {
                if !all_labels.contains(l) {
                    return Err(ProblemError::schema(
                        &format!("/expected/multipliers/{i}/pair/{j}"),
                        format!("unknown symmetry `{l}`"),
                    ));
                }
            }
        }
    }
    for (i, g) in integrals.iter().enumerate() {
        if let Some(l) = &g.spec.lagrangian {
            if !lagrangians.iter().any(|x| &x.label == l) {
                return Err(ProblemError::schema(
                    &format!("/expected/integrals/{i}/lagrangian"),
                    format!("unknown golden Lagrangian `{l}`"),
                ));
            }
        }
    }

    if let Some(n) = &file.numeric {
        if !(n.h > 0.0 && n.h.is_finite()) {
            return Err(ProblemError::schema("/numeric/h", "step must be positive"));
        }
        if !(n.t_end > n.ic[0]) {
            return Err(ProblemError::schema("/numeric/t_end", "t_end must exceed the initial time"));
        }
        for p in &params {
            let declared = file.parameters.iter().find(|d| &d.name == p).and_then(|d| d.value);
            if !n.params.contains_key(p) && declared.is_none() {
                return Err(ProblemError::schema(
                    "/numeric/params",
                    format!("no numeric value for parameter `{p}`"),
                ));
            }
        }
        for k in n.params.keys() {
            if !params.contains(k) {
                return Err(ProblemError::schema(
                    &format!("/numeric/params/{k}"),
                    format!("`{k}` is not a declared parameter"),
                ));
            }
        }
    }

    let mut maps = Vec::new();
    for (i, m) in file.linearization.iter().enumerate() {
        let target = ex(&m.target, format!("/linearization/{i}/target"))?;
        maps.push(LinearizationMap {
            label: m.label.clone(),
            map: PointMap {
                t: ex(&m.t, format!("/linearization/{i}/t"))?,
                x: ex(&m.x, format!("/linearization/{i}/x"))?,
            },
            target: SecondOrderOde {
                name: format!("{} target", m.label),
                params: params.clone(),
                f: target,
            },
            expect: m.expect,
            note: m.note.clone(),
        });
    }

    Ok(Problem {
        ode,
        lienard,
        symmetries,
        combined,
        multipliers,
        lagrangians,
        integrals,
        maps,
        file,
    })
}

/// `sum c_i G_i` for an expression linear in the generator labels.
fn combine(lin: &Expr, syms: &[PointSymmetry], label: &str) -> Option<PointSymmetry> {
    use crate::symcore::{diff, is_zero, simplify, Symbol};
    let mut tau = Vec::new();
    let mut xi = Vec::new();
    let mut rest = lin.clone();
    for s in syms {
        let g = Symbol::new(&s.label);
        let c = simplify(&diff(lin, &g));
        if [Symbol::t(), Symbol::x(), Symbol::v()].iter().any(|s| c.contains(s)) {
            return None;
        }
        if syms.iter().any(|o| c.contains(&Symbol::new(&o.label))) {
            return None;
        }
        tau.push(c.clone() * s.tau.clone());
        xi.push(c.clone() * s.xi.clone());
        rest = rest.subst1(&g, &Expr::zero());
    }
    if !is_zero(&rest).is_zero() {
        return None;
    }
    Some(PointSymmetry::new(
        label,
        simplify(&Expr::add_all(tau)),
        simplify(&Expr::add_all(xi)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_pointer(text: &str) -> String {
        match problem_from_str(text) {
            Err(ProblemError::Schema { pointer, .. }) | Err(ProblemError::Parse { pointer, .. }) => pointer,
            other => panic!("expected an error, got {other:?}"),
        }
    }

    #[test]
    fn both_forms_rejected() {
        let p = r#"{"schema":1,"name":"b","ode":{"F":"0","f":"x","g":"x"}}"#;
        assert_eq!(err_pointer(p), "/ode");
    }

    #[test]
    fn pointers() {
        let p = r#"{"schema":1,"name":"b","ode":{"F":"x +"}}"#;
        assert_eq!(err_pointer(p), "/ode/F");
        let p = r#"{"schema":1,"name":"b","ode":{"F":"0"},"symmetries":[{"label":"a","tau":1,"xi":"0"}]}"#;
        assert_eq!(err_pointer(p), "/symmetries/0/tau");
        let p = r#"{"schema":1,"name":"b","ode":{"F":"k*x"}}"#;
        assert_eq!(err_pointer(p), "/ode/F");
        let p = r#"{"schema":2,"name":"b","ode":{"F":"0"}}"#;
        assert_eq!(err_pointer(p), "/schema");
        let p = r#"{"schema":1,"name":"b","ode":{"F":"0"},"extra":1}"#;
        assert_eq!(err_pointer(p), "/extra");
    }

    #[test]
    fn lienard_pair_and_combinations() {
        let p = r#"{"schema":1,"name":"l","parameters":[{"name":"k"}],
            "ode":{"f":"k*x","g":"x^3"},
            "symmetries":[{"label":"A","tau":"1","xi":"0"},{"label":"B","tau":"t","xi":"-x"}],
            "combinations":[{"label":"C","of":"A - 2*B"}]}"#;
        let pr = problem_from_str(p).unwrap();
        assert!(pr.lienard.is_some());
        assert_eq!(pr.ode.f.to_string(), pr.lienard.as_ref().unwrap().rhs().to_string());
        let c = &pr.combined[0];
        let same = |a: &Expr, b: &str| crate::symcore::is_zero(&(a.clone() - parse(b, &[]).unwrap())).is_zero();
        assert!(same(&c.tau, "1 - 2*t"), "{}", c.tau);
        assert!(same(&c.xi, "2*x"), "{}", c.xi);
    }
}
