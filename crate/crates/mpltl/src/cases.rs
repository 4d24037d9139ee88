//! Bundled case studies, shipped as templated problem files.
//!
//! A case is a base file plus an optional property file, both with `${NAME}`
//! placeholders filled from the parameters.

use crate::parser::{parse_problem, ParseError, Problem};
use std::collections::BTreeMap;

struct Param {
    name: &'static str,
    placeholder: &'static str,
    default: i64,
    min: i64,
    max: i64,
}

struct CaseDef {
    name: &'static str,
    variant: &'static str,
    base: &'static str,
    params: &'static [Param],
    /// Property name and file; `sat` is the plain specification unless listed.
    properties: &'static [(&'static str, &'static str)],
}

const K: Param = Param { name: "k", placeholder: "K", default: 30, min: 1, max: 5000 };

const CASES: &[CaseDef] = &[
    CaseDef {
        name: "trl",
        variant: "de",
        base: include_str!("../cases/trl.mpltl"),
        params: &[K, Param { name: "delta", placeholder: "DELTA", default: 10, min: 1, max: 100 }],
        properties: &[
            ("p1", include_str!("../cases/trl.p1.mpltl")),
            ("p2", include_str!("../cases/trl.p2.mpltl")),
        ],
    },
    CaseDef {
        name: "shiftsync",
        variant: "de",
        base: include_str!("../cases/shiftsync.mpltl"),
        params: &[K, Param { name: "d", placeholder: "D", default: 3, min: 1, max: 1000 }],
        properties: &[],
    },
    CaseDef {
        name: "shiftasync",
        variant: "op",
        base: include_str!("../cases/shiftasync.mpltl"),
        params: &[K, Param { name: "n", placeholder: "N", default: 16, min: 2, max: 64 }],
        properties: &[("timed", include_str!("../cases/shiftasync.timed.mpltl"))],
    },
    CaseDef {
        name: "fischer",
        variant: "de",
        base: include_str!("../cases/fischer.mpltl"),
        params: &[
            K,
            Param { name: "processes", placeholder: "N", default: 3, min: 2, max: 8 },
            Param { name: "delay", placeholder: "DELTA", default: 5, min: 1, max: 40 },
        ],
        properties: &[
            ("sat", include_str!("../cases/fischer.sat.mpltl")),
            ("safety", include_str!("../cases/fischer.safety.mpltl")),
        ],
    },
    CaseDef {
        name: "krc",
        variant: "de",
        base: include_str!("../cases/krc.mpltl"),
        params: &[K, Param { name: "set", placeholder: "SET", default: 1, min: 1, max: 2 }],
        properties: &[("safety", include_str!("../cases/krc.safety.mpltl"))],
    },
    CaseDef {
        name: "rta",
        variant: "de",
        base: include_str!("../cases/rta.mpltl"),
        params: &[
            K,
            Param { name: "processes", placeholder: "N", default: 3, min: 2, max: 6 },
            Param { name: "t", placeholder: "T", default: 3, min: 1, max: 20 },
        ],
        properties: &[("fairness", include_str!("../cases/rta.fairness.mpltl"))],
    },
];

/// KRC time constants: (dMax, dmin, hMax, hmin, gamma).
pub const KRC_SETS: [(i64, i64, i64, i64, i64); 2] = [(9, 5, 6, 3, 3), (19, 15, 16, 13, 10)];

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("unknown case `{0}` (known: {1})")]
    UnknownCase(String, String),
    #[error("case `{case}` has no parameter `{param}`")]
    UnknownParam { case: String, param: String },
    #[error("case `{case}` has no property `{property}` (known: {known})")]
    UnknownProperty { case: String, property: String, known: String },
    #[error("parameter `{param}` must be an integer in {min}..={max}, got `{value}`")]
    OutOfRange { param: String, value: String, min: i64, max: i64 },
    #[error("case `{case}` does not parse: {error}")]
    Parse { case: String, error: ParseError },
}

#[derive(Clone, Debug)]
pub struct Case {
    pub name: String,
    pub variant: String,
    pub property: String,
    /// Instantiated problem text.
    pub source: String,
    pub problem: Problem,
}

pub fn case_names() -> Vec<&'static str> {
    CASES.iter().map(|c| c.name).collect()
}

/// Property names accepted by a case, `sat` first.
pub fn case_properties(name: &str) -> Option<Vec<&'static str>> {
    let def = CASES.iter().find(|c| c.name == name)?;
    let mut out = vec!["sat"];
    out.extend(def.properties.iter().map(|(p, _)| *p).filter(|p| *p != "sat"));
    Some(out)
}

fn fill(text: &str, values: &BTreeMap<&str, i64>) -> String {
    let mut out = text.to_string();
    for (k, v) in values {
        out = out.replace(&format!("${{{k}}}"), &v.to_string());
    }
    out
}

/// Build a case from `name=value` parameters. `property` selects the
/// property; everything else is numeric.
pub fn build_case(name: &str, params: &BTreeMap<String, String>) -> Result<Case, CaseError> {
    let def = CASES
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| CaseError::UnknownCase(name.to_string(), case_names().join(", ")))?;
    let mut values: BTreeMap<&str, i64> = BTreeMap::new();
    for p in def.params {
        values.insert(p.placeholder, p.default);
    }
    let mut property = "sat".to_string();
    for (key, value) in params {
        if key == "property" {
            property = value.clone();
            continue;
        }
        let p = def.params.iter().find(|p| p.name == key).ok_or_else(|| CaseError::UnknownParam {
            case: name.to_string(),
            param: key.clone(),
        })?;
        let v = value
            .parse::<i64>()
            .ok()
            .filter(|v| (p.min..=p.max).contains(v))
            .ok_or_else(|| CaseError::OutOfRange {
                param: key.clone(),
                value: value.clone(),
                min: p.min,
                max: p.max,
            })?;
        values.insert(p.placeholder, v);
    }
    if let Some(set) = values.get("SET").copied() {
        let (dmax, dmin, hmax, hmin, gamma) = KRC_SETS[set as usize - 1];
        values.extend([("DMAX", dmax), ("DMIN", dmin), ("HMAX", hmax), ("HMIN", hmin), ("GAMMA", gamma)]);
    }
    let extra = match def.properties.iter().find(|(p, _)| *p == property) {
        Some((_, text)) => *text,
        None if property == "sat" => "",
        None => {
            return Err(CaseError::UnknownProperty {
                case: name.to_string(),
                property,
                known: case_properties(name).unwrap_or_default().join(", "),
            })
        }
    };
    let source = fill(&format!("{}\n{}", def.base, extra), &values);
    let problem = parse_problem(&source).map_err(|error| CaseError::Parse {
        case: name.to_string(),
        error,
    })?;
    Ok(Case {
        name: name.to_string(),
        variant: def.variant.to_string(),
        property,
        source,
        problem,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Formula, MetricOp};
    use crate::TimeModel;

    fn params(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn every_case_and_property_parses() {
        for name in case_names() {
            for prop in case_properties(name).unwrap() {
                let c = build_case(name, &params(&[("property", prop)])).unwrap();
                assert!(!c.source.contains("${"), "{name}/{prop}");
                assert_eq!(c.problem.bound, 30);
                assert_eq!(c.problem.property.is_some(), prop != "sat", "{name}/{prop}");
            }
        }
    }

    #[test]
    fn trl_axiom() {
        let c = build_case("trl", &params(&[("delta", "10")])).unwrap();
        assert_eq!(c.problem.time_model, TimeModel::Bi);
        let text = c.problem.spec[0].to_string();
        assert!(text.contains("(not (and ON OFF))"), "{text}");
        let on = Formula::atom("ON");
        let off = Formula::atom("OFF");
        let disj = Formula::or_all((1..=10).map(|x| {
            Formula::and(
                Formula::metric(MetricOp::PastEvEq, x, on.clone()),
                Formula::not(Formula::metric(MetricOp::PastEvLt, x, off.clone())),
            )
        }));
        let want = Formula::alwt(Formula::and(
            Formula::not(Formula::and(on.clone(), off.clone())),
            Formula::iff(Formula::atom("L"), disj),
        ));
        assert_eq!(c.problem.spec, vec![want]);
    }

    #[test]
    fn shiftsync_spec() {
        let c = build_case("shiftsync", &params(&[("d", "7"), ("k", "12")])).unwrap();
        assert_eq!(c.problem.bound, 12);
        assert_eq!(c.problem.spec[0].to_string(), "(alwt (iff in (ev= out 7)))");
    }

    #[test]
    fn krc_sets() {
        assert_eq!(KRC_SETS[0], (9, 5, 6, 3, 3));
        assert_eq!(KRC_SETS[1], (19, 15, 16, 13, 10));
        let c = build_case("krc", &params(&[("set", "2")])).unwrap();
        assert_eq!(c.problem.time_model, TimeModel::Mono);
        assert!(c.source.contains("(palw<= R 16)"));
        assert!(c.source.contains("(palw<= (or R I) 19)"));
        assert!(c.source.contains("(- 13 10)"));
    }

    #[test]
    fn errors() {
        assert!(matches!(build_case("nope", &params(&[])), Err(CaseError::UnknownCase(..))));
        assert!(matches!(
            build_case("trl", &params(&[("delta", "0")])),
            Err(CaseError::OutOfRange { .. })
        ));
        assert!(matches!(
            build_case("trl", &params(&[("delta", "x")])),
            Err(CaseError::OutOfRange { .. })
        ));
        assert!(matches!(
            build_case("trl", &params(&[("gamma", "3")])),
            Err(CaseError::UnknownParam { .. })
        ));
        assert!(matches!(
            build_case("krc", &params(&[("property", "p9")])),
            Err(CaseError::UnknownProperty { .. })
        ));
    }
}
