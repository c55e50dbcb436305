//! Host a live session and drive it from a web-socket client, the way the
//! operator console does.
//!
//! ```text
//! cargo run --example live_session
//! ```

use futures_util::{SinkExt, StreamExt};
use mas_planner::scenario::{bundled, Overrides};
use mas_planner::session::server::{bind, ServerConfig};
use mas_planner::session::{ClientMessage, ServerMessage, Session, TraceEvent};
use tokio_tungstenite::tungstenite::Message;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Without its script the window scene needs a human to find the opening.
    let scenario = bundled::load("wall-with-window")?
        .with_overrides(&Overrides { no_operator_script: true, ..Default::default() })?;
    let server = bind("127.0.0.1:0".parse()?).await?;
    let addr = server.local_addr()?;
    let session = Session::new(&scenario)?;
    let serving = tokio::spawn(server.serve(session, ServerConfig { tick_hz: 60.0 }, std::future::pending()));

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await?;
    let steer = |vx: f64, vy: f64| Message::Text(ClientMessage::Steer { vx, vy, omega: 0.0 }.to_json());
    let mut done_pushing = false;
    while let Some(frame) = ws.next().await {
        let Message::Text(text) = frame? else { continue };
        match ServerMessage::from_json(&text)? {
            ServerMessage::State(s) => {
                if s.scene.is_some() {
                    println!("connected, steering authority: {}", s.steering);
                }
                if s.tick % 10 == 0 {
                    println!("tick {:>3}  x {:>6.2}  y {:>6.2}  flags {:?}", s.tick, s.body.x, s.body.y, s.flags);
                }
                // A joystick streams samples; each one is held only until
                // the operator agent's next firing. Push sideways until the
                // trunk is level with the window.
                if s.tick >= 30 && s.body.y < 1.0 && !done_pushing {
                    ws.send(steer(0.0, 1.0)).await?;
                } else if s.body.y >= 1.0 {
                    done_pushing = true;
                }
            }
            ServerMessage::TraceEvent(TraceEvent::Stalled { tick }) => {
                println!("stalled at tick {tick}, giving up");
                ws.send(Message::Text(ClientMessage::Stop.to_json())).await?;
            }
            ServerMessage::TraceEvent(e) => println!("event {e:?}"),
            ServerMessage::Ended { reason, ticks } => {
                println!("session ended: {reason:?} at tick {ticks}");
                break;
            }
        }
    }
    let summary = serving.await??;
    println!("trace has {} records; diagnostics {:?}", summary.trace.records.len(), summary.diagnostics);
    Ok(())
}
