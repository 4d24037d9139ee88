use mpltl::cases::{build_case, case_names, case_properties};
use mpltl::check::{check, CheckConfig, Verdict};
use mpltl::EncoderKind;
use std::collections::BTreeMap;

/// Small parameters so every case runs quickly at the bounds below.
fn small(name: &str) -> Vec<(&'static str, &'static str)> {
    match name {
        "trl" => vec![("delta", "4")],
        "shiftsync" => vec![("d", "3")],
        "shiftasync" => vec![("n", "4")],
        "fischer" => vec![("processes", "2"), ("delay", "3")],
        "rta" => vec![("processes", "2"), ("t", "2")],
        _ => vec![],
    }
}

#[test]
fn encoders_agree_on_every_case() {
    for name in case_names() {
        for prop in case_properties(name).unwrap() {
            let mut params: BTreeMap<String, String> =
                small(name).into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
            params.insert("property".into(), prop.into());
            let case = build_case(name, &params).unwrap();
            let f = case.problem.checked_formula();
            for k in [10, 20, 30] {
                let verdicts: Vec<Verdict> = [EncoderKind::Metric, EncoderKind::Nonmetric]
                    .into_iter()
                    .map(|enc| {
                        let r = check(&f, &case.problem.alphabet, &CheckConfig::new(k, case.problem.time_model, enc))
                            .unwrap();
                        if let Some(audit) = &r.audit {
                            assert!(audit.is_ok(), "{name}/{prop} k={k} {enc:?}: {audit:?}");
                        }
                        r.verdict
                    })
                    .collect();
                assert_eq!(verdicts[0], verdicts[1], "{name}/{prop} k={k}");
            }
        }
    }
}
