use std::io::Cursor;
use std::sync::Arc;
use std::time::Duration;

use randcrypto_core::transcript::{ToolCall, ToolName};
use randcrypto_toolserver::wire::{serve_stream, Response};
use randcrypto_toolserver::{spawn_tcp, ServerConfig, StubFactory, TcpClient, ToolDispatch, ToolError, ToolOutput, ToolServer};
use serde_json::{json, Value};

fn stub_server() -> Arc<ToolServer> {
    let factory = StubFactory::new(|code| match code.strip_prefix("echo ") {
        Some(rest) => Ok(format!("{rest}\n")),
        None => Err(format!("cannot run {code:?}")),
    });
    Arc::new(ToolServer::new(ServerConfig::default(), Box::new(factory)))
}

#[test]
fn ndjson_over_tcp() {
    let addr = spawn_tcp(stub_server(), "127.0.0.1:0").unwrap();
    let client = TcpClient::new(addr, Duration::from_secs(5)).unwrap();

    let resp = client.request("s1", "execute_python", json!({"code": "echo hi", "reset": false})).unwrap();
    assert!(resp.ok);
    assert_eq!(resp.result.unwrap()["stdout"], "hi\n");

    let out = client.dispatch("s1", &ToolCall::execute("x = 1", false)).unwrap().unwrap();
    assert!(matches!(out, ToolOutput::Execution(r) if !r.ok));

    let listed = ToolCall { name: ToolName::ListVariables, code: String::new(), reset: false };
    match client.dispatch("s1", &listed).unwrap().unwrap() {
        ToolOutput::Variables { variables } => assert!(variables.is_empty()),
        other => panic!("{other:?}"),
    }

    assert!(client.dispatch("s1", &ToolCall::execute("echo 4", false)).unwrap().is_ok());
    let err = client.dispatch("s1", &ToolCall::execute("echo 5", false)).unwrap().unwrap_err();
    assert_eq!(err, ToolError::Quota { used: 4, max: 4 });

    client.close("s1").unwrap();
    assert!(client.dispatch("s1", &ToolCall::execute("echo again", false)).unwrap().is_ok());
}

#[test]
fn protocol_errors_keep_connection_usable() {
    let server = stub_server();
    let input = [
        "not json",
        r#"{"id": "7", "session": "s", "name": "delete_everything", "inputs": {}}"#,
        r#"{"id": "8", "session": "s", "name": "execute_python", "inputs": {"code": 5}}"#,
        r#"{"id": "9", "session": "s", "name": "install_package", "inputs": {"package": "pkg; rm -rf /"}}"#,
        r#"{"id": "10", "session": "s", "name": "install_package", "inputs": {"package": "requests"}}"#,
        r#"{"id": "11", "session": "s", "name": "execute_python", "inputs": {"code": "echo ok", "reset": true}}"#,
    ]
    .join("\n");
    let mut out = Vec::new();
    serve_stream(&server, Cursor::new(input), &mut out).unwrap();
    let resps: Vec<Response> =
        String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(resps.len(), 6);
    let kind = |r: &Response| r.error.as_ref().map(|e| e["kind"].clone()).unwrap_or(Value::Null);
    assert_eq!(kind(&resps[0]), "invalid_request");
    assert_eq!((resps[1].id.as_str(), kind(&resps[1])), ("7", json!("unknown_tool")));
    assert_eq!(kind(&resps[2]), "invalid_request");
    assert_eq!(kind(&resps[3]), "invalid_package");
    assert!(resps[4].ok);
    assert_eq!(resps[4].result.as_ref().unwrap()["status"], "denied");
    assert_eq!(resps[5].result.as_ref().unwrap()["stdout"], "ok\n");
}

#[test]
fn dead_session_error_is_restartable_on_the_wire() {
    let mut cfg = ServerConfig::default();
    cfg.python = "/nonexistent/python".into();
    let server = ToolServer::subprocess(cfg);
    let line = r#"{"id": "1", "session": "s", "name": "list_variables", "inputs": {}}"#;
    let resp = randcrypto_toolserver::wire::handle_line(&server, line);
    let err = resp.error.unwrap();
    assert_eq!(err["kind"], "session_dead");
    assert_eq!(err["restartable"], true);
}
