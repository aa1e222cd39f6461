//! Recording sessions and the per-connection message handler.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use rfd::demo::write_demo;
use rfd::env::{ActionId, AnyEnv, CourierConfig, CourierEnv, EnvError, EnvKind, Environment, RenderDescriptor, TaxiEnv};
use rfd::perception::PerceivedState;
use thiserror::Error;

use crate::protocol::{ClientMessage, ServerMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Live,
    Ended,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("session {0} has ended")]
    Ended(u64),
    #[error("no session on this connection; send CREATE first")]
    NoSession,
    #[error("a demonstration needs at least 2 states, the session has {0}")]
    TooShort(usize),
    #[error("bad demonstration name `{0}`")]
    BadName(String),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// One environment instance and every state it has shown the demonstrator.
#[derive(Debug)]
pub struct Session {
    id: u64,
    env: AnyEnv,
    states: Vec<PerceivedState>,
    status: Status,
}

impl Session {
    pub fn new(id: u64, kind: EnvKind, courier: &CourierConfig, seed: u64) -> Self {
        let mut env = match kind {
            EnvKind::Taxi => AnyEnv::Taxi(TaxiEnv::new()),
            EnvKind::Courier => AnyEnv::Courier(CourierEnv::new(courier.clone())),
        };
        let states = vec![env.reset(seed)];
        Session {
            id,
            env,
            states,
            status: Status::Live,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn states(&self) -> &[PerceivedState] {
        &self.states
    }

    pub fn action_names(&self) -> &'static [&'static str] {
        self.env.action_names()
    }

    pub fn render(&self) -> RenderDescriptor {
        self.env.render()
    }

    /// Steps the environment; on error the buffer is untouched.
    pub fn act(&mut self, action: ActionId) -> Result<RenderDescriptor, SessionError> {
        if self.status == Status::Ended {
            return Err(SessionError::Ended(self.id));
        }
        let t = self.env.step(action)?;
        if t.state.terminal {
            self.status = Status::Ended;
        }
        self.states.push(t.state);
        Ok(self.env.render())
    }

    /// The buffer in demonstration-file form.
    pub fn demo_text(&self) -> Result<String, SessionError> {
        if self.states.len() < 2 {
            return Err(SessionError::TooShort(self.states.len()));
        }
        Ok(write_demo(self.env.kind(), &self.states))
    }

    /// Writes the buffer to `<dir>/<name>.demo` and returns the path.
    pub fn save(&self, dir: &Path, name: &str) -> Result<PathBuf, SessionError> {
        let text = self.demo_text()?;
        let path = dir.join(file_name(name)?);
        let io = |source| SessionError::Io { path: path.clone(), source };
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(&path, text).map_err(io)?;
        Ok(path)
    }
}

fn file_name(name: &str) -> Result<String, SessionError> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if !ok {
        return Err(SessionError::BadName(name.to_string()));
    }
    Ok(if name.ends_with(".demo") { name.to_string() } else { format!("{name}.demo") })
}

/// Server-wide state: where demonstrations go and the next session id.
#[derive(Debug)]
pub struct Recorder {
    demos_dir: PathBuf,
    courier: CourierConfig,
    next_id: AtomicU64,
}

impl Recorder {
    pub fn new(demos_dir: impl Into<PathBuf>) -> Self {
        Self::with_courier(demos_dir, CourierConfig::default())
    }

    pub fn with_courier(demos_dir: impl Into<PathBuf>, courier: CourierConfig) -> Self {
        Recorder {
            demos_dir: demos_dir.into(),
            courier,
            next_id: AtomicU64::new(1),
        }
    }

    pub fn demos_dir(&self) -> &Path {
        &self.demos_dir
    }

    pub fn create(&self, env: &str, seed: u64) -> Result<Session, SessionError> {
        let kind: EnvKind = env.parse()?;
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        Ok(Session::new(id, kind, &self.courier, seed))
    }
}

/// Message handling for one connection. It owns at most one session; a
/// new CREATE replaces it.
#[derive(Debug)]
pub struct Connection<'a> {
    recorder: &'a Recorder,
    session: Option<Session>,
}

impl<'a> Connection<'a> {
    pub fn new(recorder: &'a Recorder) -> Self {
        Connection { recorder, session: None }
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    /// Exactly one reply per record.
    pub fn handle(&mut self, record: &str) -> ServerMessage {
        let reply = ClientMessage::parse(record)
            .map_err(|e| e.to_string())
            .and_then(|m| self.dispatch(m).map_err(|e| e.to_string()));
        reply.unwrap_or_else(|message| ServerMessage::Error { message })
    }

    fn live(&mut self) -> Result<&mut Session, SessionError> {
        self.session.as_mut().ok_or(SessionError::NoSession)
    }

    fn dispatch(&mut self, message: ClientMessage) -> Result<ServerMessage, SessionError> {
        match message {
            ClientMessage::Create { env, seed } => {
                let session = self.recorder.create(&env, seed)?;
                let reply = ServerMessage::Created {
                    session: session.id(),
                    actions: session.action_names().iter().map(|s| s.to_string()).collect(),
                    descriptor: session.render(),
                };
                self.session = Some(session);
                Ok(reply)
            }
            ClientMessage::Act { action } => {
                let descriptor = self.live()?.act(ActionId(action))?;
                Ok(ServerMessage::State {
                    feedback: descriptor.feedback,
                    descriptor,
                })
            }
            ClientMessage::Save { name } => {
                let dir = self.recorder.demos_dir().to_path_buf();
                let path = self.live()?.save(&dir, &name)?;
                Ok(ServerMessage::Saved {
                    path: path.display().to_string(),
                })
            }
        }
    }
}
