//! Wire grammar. One record per WebSocket text frame, fields separated by a
//! single tab, field order fixed per kind. See `PROTOCOL.md`.

use rfd::env::RenderDescriptor;
use rfd::perception::Feedback;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClientMessage {
    Create { env: String, seed: u64 },
    Act { action: u8 },
    Save { name: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ServerMessage {
    Created {
        session: u64,
        actions: Vec<String>,
        descriptor: RenderDescriptor,
    },
    State {
        feedback: Feedback,
        descriptor: RenderDescriptor,
    },
    Saved {
        path: String,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed record: {0}")]
pub struct ParseError(pub String);

fn bad(message: impl Into<String>) -> ParseError {
    ParseError(message.into())
}

fn fields<const N: usize>(record: &str, kind: &str) -> Result<[String; N], ParseError> {
    let parts: Vec<&str> = record.split('\t').skip(1).collect();
    if parts.len() != N {
        return Err(bad(format!("{kind} takes {N} field(s), got {}", parts.len())));
    }
    Ok(std::array::from_fn(|i| parts[i].to_string()))
}

fn kind(record: &str) -> &str {
    record.split('\t').next().unwrap_or("")
}

/// Tabs and line breaks inside free text would break the framing.
fn clean(text: &str) -> String {
    text.replace(['\t', '\n', '\r'], " ")
}

impl ClientMessage {
    pub fn parse(record: &str) -> Result<Self, ParseError> {
        match kind(record) {
            "CREATE" => {
                let [env, seed] = fields(record, "CREATE")?;
                let seed = seed.parse().map_err(|_| bad(format!("bad seed `{seed}`")))?;
                Ok(ClientMessage::Create { env, seed })
            }
            "ACT" => {
                let [action] = fields(record, "ACT")?;
                let action = action.parse().map_err(|_| bad(format!("bad action id `{action}`")))?;
                Ok(ClientMessage::Act { action })
            }
            "SAVE" => {
                let [name] = fields(record, "SAVE")?;
                Ok(ClientMessage::Save { name })
            }
            other => Err(bad(format!("unknown client message `{other}`"))),
        }
    }

    pub fn encode(&self) -> String {
        match self {
            ClientMessage::Create { env, seed } => format!("CREATE\t{}\t{seed}", clean(env)),
            ClientMessage::Act { action } => format!("ACT\t{action}"),
            ClientMessage::Save { name } => format!("SAVE\t{}", clean(name)),
        }
    }
}

fn descriptor(json: &str) -> Result<RenderDescriptor, ParseError> {
    serde_json::from_str(json).map_err(|e| bad(format!("bad render descriptor: {e}")))
}

fn json(d: &RenderDescriptor) -> String {
    serde_json::to_string(d).expect("descriptor serializes")
}

impl ServerMessage {
    pub fn encode(&self) -> String {
        match self {
            ServerMessage::Created {
                session,
                actions,
                descriptor,
            } => format!("CREATED\t{session}\t{}\t{}", actions.join(","), json(descriptor)),
            ServerMessage::State { feedback, descriptor } => format!("STATE\t{}\t{}", feedback.tag(), json(descriptor)),
            ServerMessage::Saved { path } => format!("SAVED\t{}", clean(path)),
            ServerMessage::Error { message } => format!("ERROR\t{}", clean(message)),
        }
    }

    pub fn parse(record: &str) -> Result<Self, ParseError> {
        match kind(record) {
            "CREATED" => {
                let [session, actions, d] = fields(record, "CREATED")?;
                Ok(ServerMessage::Created {
                    session: session.parse().map_err(|_| bad(format!("bad session id `{session}`")))?,
                    actions: actions.split(',').map(String::from).collect(),
                    descriptor: descriptor(&d)?,
                })
            }
            "STATE" => {
                let [feedback, d] = fields(record, "STATE")?;
                Ok(ServerMessage::State {
                    feedback: Feedback::from_tag(&feedback).ok_or_else(|| bad(format!("bad feedback `{feedback}`")))?,
                    descriptor: descriptor(&d)?,
                })
            }
            "SAVED" => {
                let [path] = fields(record, "SAVED")?;
                Ok(ServerMessage::Saved { path })
            }
            "ERROR" => {
                let [message] = fields(record, "ERROR")?;
                Ok(ServerMessage::Error { message })
            }
            other => Err(bad(format!("unknown server message `{other}`"))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ServerMessage::Created { .. } => "CREATED",
            ServerMessage::State { .. } => "STATE",
            ServerMessage::Saved { .. } => "SAVED",
            ServerMessage::Error { .. } => "ERROR",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rfd::env::{EnvKind, Environment};

    #[test]
    fn client_records_round_trip() {
        for m in [
            ClientMessage::Create { env: "taxi".into(), seed: 7 },
            ClientMessage::Act { action: 5 },
            ClientMessage::Save { name: "run one".into() },
        ] {
            assert_eq!(ClientMessage::parse(&m.encode()).unwrap(), m);
        }
        assert_eq!(ClientMessage::Act { action: 3 }.encode(), "ACT\t3");
        assert_eq!(ClientMessage::Create { env: "courier".into(), seed: 0 }.encode(), "CREATE\tcourier\t0");
    }

    #[test]
    fn malformed_client_records() {
        for r in ["", "HELLO", "CREATE\ttaxi", "CREATE\ttaxi\t-1", "ACT", "ACT\t256", "ACT\t1\t2", "SAVE", "act\t1"] {
            assert!(ClientMessage::parse(r).is_err(), "{r:?}");
        }
    }

    #[test]
    fn server_records_round_trip() {
        let mut env = EnvKind::Taxi.make();
        env.reset(7);
        let d = env.render();
        for m in [
            ServerMessage::Created {
                session: 4,
                actions: env.action_names().iter().map(|s| s.to_string()).collect(),
                descriptor: d.clone(),
            },
            ServerMessage::State {
                feedback: Feedback::Success,
                descriptor: d,
            },
            ServerMessage::Saved { path: "demos/a.demo".into() },
            ServerMessage::Error { message: "nope".into() },
        ] {
            let text = m.encode();
            assert!(!text.contains('\n'));
            assert_eq!(ServerMessage::parse(&text).unwrap(), m);
        }
    }

    #[test]
    fn descriptor_feedback_uses_the_record_tags() {
        let mut env = EnvKind::Courier.make();
        env.reset(2);
        assert!(json(&env.render()).contains("\"feedback\":\"NONE\""));
    }

    #[test]
    fn free_text_cannot_break_framing() {
        let m = ServerMessage::Error { message: "a\tb\nc".into() };
        assert_eq!(m.encode(), "ERROR\ta b c");
    }
}
