use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use mas_planner::scenario::{bundled, Overrides, Scenario};
use mas_planner::session::server::{bind, ServerConfig};
use mas_planner::session::{
    ClientMessage, EndReason, ServerMessage, Session, SessionSummary, StateMessage, TraceEvent,
};
use tokio::net::TcpStream;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

struct Running {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    handle: JoinHandle<Result<SessionSummary, mas_planner::Error>>,
}

async fn start(scenario: Scenario, tick_hz: f64) -> Running {
    let server = bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let addr = server.local_addr().unwrap();
    let (tx, rx) = oneshot::channel::<()>();
    let session = Session::new(&scenario).unwrap();
    let handle = tokio::spawn(server.serve(session, ServerConfig { tick_hz }, async {
        let _ = rx.await;
    }));
    Running { addr, stop: Some(tx), handle }
}

fn unscripted(name: &str) -> Scenario {
    bundled::load(name).unwrap().with_overrides(&Overrides { no_operator_script: true, ..Default::default() }).unwrap()
}

async fn connect(addr: SocketAddr) -> Ws {
    tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn next(ws: &mut Ws) -> ServerMessage {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server went quiet")
            .expect("socket closed")
            .unwrap();
        if let Message::Text(t) = frame {
            return ServerMessage::from_json(&t).unwrap();
        }
    }
}

async fn next_state(ws: &mut Ws) -> StateMessage {
    loop {
        if let ServerMessage::State(s) = next(ws).await {
            return *s;
        }
    }
}

async fn send(ws: &mut Ws, m: ClientMessage) {
    ws.send(Message::Text(m.to_json())).await.unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn first_message_is_a_full_snapshot() {
    let mut run = start(unscripted("wall-with-window"), 30.0).await;
    let mut ws = connect(run.addr).await;
    let first = next(&mut ws).await;
    let ServerMessage::State(s) = first else { panic!("{first:?}") };
    let scene = s.scene.expect("scene in first message");
    assert_eq!(scene.obstacles.len(), 4);
    assert!(s.steering);
    assert_eq!(s.agents.len(), 5);
    assert!(s.cone_half_angle > 0.0);
    // Later messages leave the scene out.
    assert!(next_state(&mut ws).await.scene.is_none());
    run.stop.take().unwrap().send(()).unwrap();
    let summary = run.handle.await.unwrap().unwrap();
    assert_eq!(summary.reason, EndReason::Stopped);
}

#[tokio::test(flavor = "multi_thread")]
async fn simulation_runs_without_clients() {
    let mut run = start(unscripted("concave-pocket"), 200.0).await;
    tokio::time::sleep(Duration::from_millis(300)).await;
    let mut ws = connect(run.addr).await;
    let s = next_state(&mut ws).await;
    assert!(s.tick > 10, "tick {}", s.tick);
    let op = s.agents.iter().find(|a| a.config.agent_id == "operator").unwrap();
    let last = op.last.clone().unwrap();
    assert_eq!((last.d_xy, last.d_theta), ([0.0, 0.0], 0.0));
    run.stop.take().unwrap().send(()).unwrap();
    run.handle.await.unwrap().unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn only_the_first_client_steers() {
    let mut run = start(unscripted("concave-pocket"), 60.0).await;
    let mut a = connect(run.addr).await;
    assert!(next_state(&mut a).await.steering);
    let mut b = connect(run.addr).await;
    let sb = next_state(&mut b).await;
    assert!(!sb.steering);

    send(&mut b, ClientMessage::Pause { agent: "attraction".into() }).await;
    loop {
        match next(&mut b).await {
            ServerMessage::TraceEvent(TraceEvent::Rejected { reason }) => {
                assert!(reason.contains("authority"));
                break;
            }
            ServerMessage::State(s) => assert!(s.agents.iter().all(|x| x.config.active)),
            _ => {}
        }
    }
    // Both keep receiving state; the observer's request changed nothing.
    let (sa, sb) = (next_state(&mut a).await, next_state(&mut b).await);
    assert!(sa.agents.iter().all(|x| x.config.active) && sb.agents.iter().all(|x| x.config.active));
    assert!(sb.diagnostics.unauthorized >= 1);

    // Authority passes on when the holder leaves.
    a.close(None).await.unwrap();
    drop(a);
    let mut took_over = false;
    for _ in 0..200 {
        if next_state(&mut b).await.steering {
            took_over = true;
            break;
        }
    }
    assert!(took_over);
    run.stop.take().unwrap().send(()).unwrap();
    run.handle.await.unwrap().unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn pause_round_trips_and_silences_the_agent() {
    let mut run = start(unscripted("concave-pocket"), 30.0).await;
    let mut ws = connect(run.addr).await;
    next_state(&mut ws).await;
    send(&mut ws, ClientMessage::Pause { agent: "head".into() }).await;
    let paused_at = loop {
        let s = next_state(&mut ws).await;
        let head = s.agents.iter().find(|a| a.config.agent_id == "head").unwrap();
        if !head.config.active {
            break s;
        }
    };
    let last_before = paused_at.agents.iter().find(|a| a.config.agent_id == "head").unwrap().last.clone();
    for _ in 0..5 {
        let s = next_state(&mut ws).await;
        let head = s.agents.iter().find(|a| a.config.agent_id == "head").unwrap();
        assert_eq!(head.last, last_before, "paused agent contributed");
    }
    send(&mut ws, ClientMessage::Work { agent: "head".into() }).await;
    loop {
        let s = next_state(&mut ws).await;
        if s.agents.iter().find(|a| a.config.agent_id == "head").unwrap().config.active {
            break;
        }
    }
    run.stop.take().unwrap().send(()).unwrap();
    run.handle.await.unwrap().unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn steering_shows_up_within_two_ticks() {
    let mut run = start(unscripted("concave-pocket"), 30.0).await;
    let mut ws = connect(run.addr).await;
    let s = next_state(&mut ws).await;
    send(&mut ws, ClientMessage::Steer { vx: 0.0, vy: 1.0, omega: 0.0 }).await;
    let sent_after = s.tick;
    loop {
        let s = next_state(&mut ws).await;
        let op = s.agents.iter().find(|a| a.config.agent_id == "operator").unwrap();
        if op.last.as_ref().is_some_and(|d| d.d_xy != [0.0, 0.0]) {
            assert!(s.tick <= sent_after + 2, "took until tick {} (sent after {sent_after})", s.tick);
            break;
        }
        assert!(s.tick <= sent_after + 2, "no operator contribution by tick {}", s.tick);
    }
    run.stop.take().unwrap().send(()).unwrap();
    run.handle.await.unwrap().unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn reconnecting_gets_the_server_state() {
    let mut run = start(unscripted("single-wall"), 40.0).await;
    let mut watcher = connect(run.addr).await;
    next_state(&mut watcher).await;
    tokio::time::sleep(Duration::from_millis(150)).await;
    let mut again = connect(run.addr).await;
    let fresh = next_state(&mut again).await;
    assert!(fresh.scene.is_some());
    // The watcher sees the same tick with identical contents.
    loop {
        let s = next_state(&mut watcher).await;
        if s.tick == fresh.tick {
            assert_eq!(s.body, fresh.body);
            assert_eq!(s.agents, fresh.agents);
            assert_eq!(s.flags, fresh.flags);
            break;
        }
        assert!(s.tick < fresh.tick);
    }
    run.stop.take().unwrap().send(()).unwrap();
    run.handle.await.unwrap().unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn bad_frames_are_rejected_and_counted() {
    let mut run = start(unscripted("concave-pocket"), 60.0).await;
    let mut ws = connect(run.addr).await;
    next_state(&mut ws).await;
    for bad in ["{", r#"{"v":1,"type":"teleport"}"#, r#"{"v":9,"type":"stop"}"#, r#"{"v":1,"type":"delta","param":"pos","value":-1}"#] {
        ws.send(Message::Text(bad.into())).await.unwrap();
    }
    let mut rejected = 0;
    while rejected < 4 {
        if let ServerMessage::TraceEvent(TraceEvent::Rejected { .. }) = next(&mut ws).await {
            rejected += 1;
        }
    }
    assert_eq!(next_state(&mut ws).await.diagnostics.malformed, 4);
    run.stop.take().unwrap().send(()).unwrap();
    run.handle.await.unwrap().unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn stop_ends_the_session_for_everyone() {
    let run = start(unscripted("concave-pocket"), 60.0).await;
    let mut a = connect(run.addr).await;
    let mut b = connect(run.addr).await;
    next_state(&mut a).await;
    next_state(&mut b).await;
    send(&mut a, ClientMessage::Stop).await;
    for ws in [&mut a, &mut b] {
        loop {
            if let ServerMessage::Ended { reason, .. } = next(ws).await {
                assert_eq!(reason, EndReason::Stopped);
                break;
            }
        }
    }
    let summary = run.handle.await.unwrap().unwrap();
    assert_eq!(summary.trace.records.len() as u64, summary.ticks);
}

#[tokio::test(flavor = "multi_thread")]
async fn converging_ends_the_session() {
    let run = start(bundled::load("empty-plane").unwrap(), 500.0).await;
    let mut ws = connect(run.addr).await;
    let ended = loop {
        if let ServerMessage::Ended { reason, ticks } = next(&mut ws).await {
            break (reason, ticks);
        }
    };
    assert_eq!(ended.0, EndReason::Converged);
    let summary = run.handle.await.unwrap().unwrap();
    assert_eq!(summary.ticks, ended.1);
    assert!(summary.trace.end.is_some());
}

#[tokio::test]
async fn busy_port_is_a_startup_error() {
    let first = bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let addr = first.local_addr().unwrap();
    assert!(matches!(bind(addr).await, Err(mas_planner::Error::Io(_))));
}
