use randcrypto_web::{generate_json, score_json, solve_json, subtypes_json, GeneratedView};
use serde_json::{json, Value};

#[test]
fn lists_every_subtype() {
    let list: Vec<Value> = serde_json::from_str(&subtypes_json()).unwrap();
    assert_eq!(list.len(), 49);
    assert!(list.iter().all(|s| s["difficulty"].is_string() && s["name"].is_string()));
}

#[test]
fn generate_then_solve_recovers_flag() {
    let list: Vec<Value> = serde_json::from_str(&subtypes_json()).unwrap();
    for entry in list.iter().step_by(7) {
        let name = entry["name"].as_str().unwrap();
        let view: GeneratedView = serde_json::from_str(&generate_json(name, 3).unwrap()).unwrap();
        assert!(!view.question.contains(&view.flag), "{name} leaks its flag");
        let solved: Value = serde_json::from_str(&solve_json(name, &view.question).unwrap()).unwrap();
        assert_eq!(solved["flag"], view.flag, "{name}");
    }
}

#[test]
fn unknown_subtype_and_broken_question_are_errors() {
    assert!(generate_json("no_such_thing", 0).is_err());
    let name = serde_json::from_str::<Vec<Value>>(&subtypes_json()).unwrap()[0]["name"].as_str().unwrap().to_string();
    assert!(solve_json(&name, "no artifacts here").is_err());
}

#[test]
fn scores_a_transcript() {
    let call = json!({"name": "execute_python", "inputs": {"code": "print(1)", "reset": false}});
    let call = serde_json::to_string_pretty(&call).unwrap();
    let req = json!({
        "expected_flag": "flag{abc}",
        "messages": [
            {"role": "user", "content": "Question: ..."},
            {"role": "assistant", "content": call},
            {"role": "tool", "content": "Output: 1"},
            {"role": "assistant", "content": "\\boxed{flag{abc}}"},
        ],
    });
    let out: Value = serde_json::from_str(&score_json(&req.to_string()).unwrap()).unwrap();
    assert_eq!(out["total"], 1.6);
    assert_eq!(out["strict_calls"], 1);

    let mut failed = req.clone();
    failed["execution_results"] = json!([false]);
    let out: Value = serde_json::from_str(&score_json(&failed.to_string()).unwrap()).unwrap();
    assert_eq!(out["total"], 1.3);

    failed["execution_results"] = json!([]);
    assert!(score_json(&failed.to_string()).is_err());
}
