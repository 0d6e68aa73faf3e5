//! Starts the control API on an ephemeral port, records a session through
//! it and prints the summary, a page of samples and the verdict.
//!
//! cargo run -p recorder-server --example control_api

use std::time::Duration;

use recorder_core::sim::generate::demo_scenario;
use recorder_server::{app, AppState, ServerConfig};
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = std::env::temp_dir().join("recorder-control-api");
    let state = AppState::open(&ServerConfig::new(&data))?;
    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let base = format!("http://{}", listener.local_addr()?);
    rt.spawn(async move { axum::serve(listener, app(state, None)).await });
    println!("control API at {base}, data in {}", data.display());

    let get = |path: &str| -> Result<Value, ureq::Error> {
        ureq::get(&format!("{base}{path}"))
            .call()?
            .body_mut()
            .read_json()
    };
    let created: Value = ureq::post(&format!("{base}/sessions"))
        .send_json(json!({
            "scenario": demo_scenario(2, 10_000),
            "clock": {"mode": "virtual", "step_ms": 100},
        }))?
        .body_mut()
        .read_json()?;
    let id = created["session_id"]
        .as_str()
        .ok_or("no session id")?
        .to_string();
    let summary = loop {
        let s = get(&format!("/sessions/{id}"))?;
        if s["status"] != "recording" {
            break s;
        }
        std::thread::sleep(Duration::from_millis(50));
    };
    for key in [
        "status",
        "duration_ms",
        "segments",
        "unattested",
        "quarantined",
    ] {
        println!("{key}: {}", summary[key]);
    }
    let page = get(&format!(
        "/sessions/{id}/samples?streams=gsr,cognition&limit=4"
    ))?;
    for item in page["items"].as_array().into_iter().flatten() {
        println!("sample: {item}");
    }
    println!("verify: {}", get(&format!("/sessions/{id}/verify"))?);
    Ok(())
}
