use std::fmt;
use std::io;

/// A failure ready for the one-line `error: kind=… message=…` report.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub io: bool,
}

impl Failure {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            kind: kind.to_string(),
            message: message.into(),
            io: false,
        }
    }

    pub fn io(context: impl fmt::Display, err: io::Error) -> Self {
        Failure {
            kind: "Io".to_string(),
            message: format!("{context}: {err}"),
            io: true,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.io {
            2
        } else {
            1
        }
    }

    pub fn line(&self) -> String {
        let flat: String = self
            .message
            .chars()
            .map(|c| if c.is_control() { ' ' } else { c })
            .collect();
        format!("error: kind={} message={}", self.kind, flat.trim())
    }
}

impl From<mvreturn::Error> for Failure {
    fn from(e: mvreturn::Error) -> Self {
        Failure {
            kind: if e.is_io() { "Io" } else { e.kind() }.to_string(),
            message: e.to_string(),
            io: e.is_io(),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;
