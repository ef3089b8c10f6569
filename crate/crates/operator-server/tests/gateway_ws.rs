//! UI gateway over a real WebSocket connection.

use std::net::TcpStream;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::Value;
use teleop_robot::AgentEvent;
use teleop_server::{GatewayHub, Runner, Scenario, ScenarioConfig, TraceEvent, WsServer};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn runner(script: &str) -> Runner {
    let text = format!(
        r#"{{"schema":1,"world":"worlds/corridor.json","duration":20,"seed":1,
            "link":{{"base_latency":0.02}},"script":{script}}}"#
    );
    let config = ScenarioConfig::from_json(&text).unwrap();
    let base = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    Runner::new(Scenario::with_base(config, &base).unwrap()).unwrap()
}

fn advance(runner: &mut Runner, hub: &GatewayHub, until: f64) {
    while runner.time() < until - 1e-9 {
        for (_, input) in hub.drain_inputs() {
            runner.submit(input);
        }
        if let Some(f) = runner.step() {
            hub.broadcast(&f);
        }
    }
}

fn connect(server: &WsServer) -> Client {
    let (ws, _) = tungstenite::connect(format!("ws://{}", server.local_addr())).unwrap();
    ws
}

fn next_json(ws: &mut Client) -> Value {
    loop {
        match ws.read().unwrap() {
            Message::Text(t) => return serde_json::from_str(&t).unwrap(),
            _ => continue,
        }
    }
}

fn wait_for_sessions(hub: &GatewayHub, n: usize) {
    let deadline = Instant::now() + Duration::from_secs(5);
    while hub.session_count() < n {
        assert!(Instant::now() < deadline, "session never registered");
        std::thread::sleep(Duration::from_millis(5));
    }
}

#[test]
fn snapshot_first_then_frames_in_order() {
    let hub = Arc::new(GatewayHub::default());
    let server = WsServer::bind("127.0.0.1:0", hub.clone()).unwrap();
    let mut runner = runner("[]");
    advance(&mut runner, &hub, 1.5);

    let mut ws = connect(&server);
    wait_for_sessions(&hub, 1);
    let snap = next_json(&mut ws);
    assert_eq!(snap["type"], "snapshot");
    assert!(snap["map"]["cells"].is_array(), "snapshot carries the map");
    assert_eq!(snap["mode"], "Remote");

    advance(&mut runner, &hub, 2.0);
    let mut last = snap["seq"].as_u64().unwrap();
    for _ in 0..5 {
        let f = next_json(&mut ws);
        assert_eq!(f["type"], "frame");
        let seq = f["seq"].as_u64().unwrap();
        assert!(seq > last);
        last = seq;
    }
    ws.close(None).unwrap();
}

#[test]
fn goal_from_ui_reaches_the_robot() {
    let hub = Arc::new(GatewayHub::default());
    let server = WsServer::bind("127.0.0.1:0", hub.clone()).unwrap();
    let mut runner = runner("[]");
    advance(&mut runner, &hub, 1.2);

    let mut ws = connect(&server);
    wait_for_sessions(&hub, 1);
    ws.send(Message::Text(r#"{"type":"goal","x":6.0,"y":1.5}"#.into())).unwrap();

    let deadline = Instant::now() + Duration::from_secs(5);
    let mut inputs = Vec::new();
    while inputs.is_empty() {
        assert!(Instant::now() < deadline, "goal never reached the hub");
        inputs = hub.drain_inputs();
        std::thread::sleep(Duration::from_millis(5));
    }
    for (_, input) in inputs {
        runner.submit(input);
    }
    advance(&mut runner, &hub, 2.0);
    let accepted = runner.trace().records().iter().any(|r| {
        matches!(&r.event, TraceEvent::Robot(AgentEvent::GoalAccepted { goal }) if goal.pose.x == 6.0)
    });
    assert!(accepted);
    let frame = runner.current_frame();
    assert_eq!(frame.goal.map(|g| (g.x, g.y)), Some((6.0, 1.5)));
    assert!(!frame.plan.is_empty());
}

#[test]
fn malformed_input_gets_an_error_reply_and_session_survives() {
    let hub = Arc::new(GatewayHub::default());
    let server = WsServer::bind("127.0.0.1:0", hub.clone()).unwrap();
    let mut ws = connect(&server);
    wait_for_sessions(&hub, 1);
    ws.send(Message::Text(r#"{"type":"teleport","x":1}"#.into())).unwrap();
    let reply = next_json(&mut ws);
    assert_eq!(reply["type"], "error");
    assert!(reply["message"].as_str().unwrap().contains("teleport"));

    ws.send(Message::Text(r#"{"type":"control","command":"pause"}"#.into())).unwrap();
    let deadline = Instant::now() + Duration::from_secs(5);
    loop {
        let got = hub.drain_inputs();
        if !got.is_empty() {
            assert_eq!(got.len(), 1);
            break;
        }
        assert!(Instant::now() < deadline, "control never arrived");
        std::thread::sleep(Duration::from_millis(5));
    }
}

#[test]
fn goal_outside_the_map_is_reported_to_the_ui() {
    let hub = Arc::new(GatewayHub::default());
    let _server = WsServer::bind("127.0.0.1:0", hub.clone()).unwrap();
    let mut runner = runner(r#"[{"action":"goal","at":1.5,"x":40.0,"y":1.5}]"#);
    let session = hub.connect();
    advance(&mut runner, &hub, 1.6);
    let mut notices = Vec::new();
    while let Some(text) = session.try_next() {
        let f: Value = serde_json::from_str(&text).unwrap();
        notices.extend(f["notices"].as_array().cloned().unwrap_or_default());
    }
    assert_eq!(notices.len(), 1, "{notices:?}");
    assert_eq!(notices[0]["kind"], "goal_rejected");
    assert_eq!(notices[0]["x"], 40.0);
}
