//! Compares every oracle against outputs recorded by running the Python
//! listings themselves (see `fixtures/gen_python_reference.py`).

use codesim::algolib::{entry, oracle_run, OracleError, OracleInput, OracleOutput, Style};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    name: String,
    style: String,
    input: serde_json::Value,
    ok: Option<serde_json::Value>,
    raised: Option<String>,
}

#[test]
fn oracles_match_recorded_python_outputs() {
    let cases: Vec<Case> =
        serde_json::from_str(include_str!("fixtures/python_reference.json")).unwrap();
    assert!(cases.len() > 700);
    for case in cases {
        let style: Style = case.style.parse().unwrap();
        let e = entry(&case.name, style).unwrap_or_else(|| panic!("missing {}", case.name));
        let input = match &case.input {
            serde_json::Value::Array(_) => OracleInput::Vector(serde_json::from_value(case.input.clone()).unwrap()),
            v => OracleInput::Integer(v.as_i64().unwrap()),
        };
        let got = oracle_run(e, &input);
        match (&case.ok, &case.raised) {
            (Some(expected), None) => {
                let expected = match expected {
                    serde_json::Value::Bool(b) => OracleOutput::Bool(*b),
                    serde_json::Value::Array(_) => OracleOutput::Vector(serde_json::from_value(expected.clone()).unwrap()),
                    v => OracleOutput::Integer(v.as_i64().unwrap()),
                };
                assert_eq!(got.unwrap(), expected, "{} {} {:?}", case.name, case.style, input);
            }
            (None, Some(_)) => {
                assert!(matches!(got, Err(OracleError::Raised(_))), "{} {} {:?}", case.name, case.style, input)
            }
            _ => panic!("malformed case"),
        }
    }
}
