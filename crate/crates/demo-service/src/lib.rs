//! Session server for recording human demonstrations in the browser.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ClientMessage, ServerMessage};
pub use session::{Connection, Recorder, Session, SessionError, Status};
