//! Cross-process transport: one compact JSON envelope per line over any byte
//! stream (TCP in practice), with the same fault model as the in-process link.

use std::io::{BufRead, Write};

use teleop_core::Envelope;

use crate::config::LinkConfig;
use crate::error::LinkError;
use crate::link::{Direction, Link, LinkStats, SendOutcome};

pub fn write_envelope<W: Write>(w: &mut W, env: &Envelope) -> Result<(), LinkError> {
    let mut line = env.to_json()?;
    line.push('\n');
    w.write_all(line.as_bytes())?;
    Ok(())
}

/// Iterates the envelopes of a newline-delimited stream. Blank lines are
/// skipped; a malformed line yields an error and reading continues after it.
pub struct EnvelopeReader<R> {
    inner: R,
    line: String,
}

impl<R: BufRead> EnvelopeReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for EnvelopeReader<R> {
    type Item = Result<Envelope, LinkError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line.clear();
            match self.inner.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) if self.line.trim().is_empty() => continue,
                Ok(_) => return Some(Envelope::from_json(self.line.trim_end()).map_err(LinkError::from)),
                Err(e) => return Some(Err(e.into())),
            }
        }
    }
}

/// Writer half of a faulty stream: envelopes pass through the link model and
/// reach the underlying writer only once their delivery time has come.
pub struct FaultyWriter<W> {
    inner: W,
    link: Link,
    dir: Direction,
}

impl<W: Write> FaultyWriter<W> {
    pub fn new(inner: W, config: LinkConfig, dir: Direction) -> Result<Self, LinkError> {
        Ok(Self {
            inner,
            link: Link::new(config)?,
            dir,
        })
    }

    pub fn send(&mut self, env: Envelope, now: f64) -> SendOutcome {
        self.link.send(self.dir, env, now)
    }

    /// Writes everything due by `now` and flushes; returns how many
    /// envelopes went out.
    pub fn pump(&mut self, now: f64) -> Result<usize, LinkError> {
        let due = self.link.deliver(self.dir, now);
        for (_, env) in &due {
            write_envelope(&mut self.inner, env)?;
        }
        self.inner.flush()?;
        Ok(due.len())
    }

    pub fn pending(&self) -> usize {
        self.link.in_flight(self.dir)
    }

    pub fn stats(&self) -> LinkStats {
        self.link.stats(self.dir)
    }

    pub fn link_mut(&mut self) -> &mut Link {
        &mut self.link
    }
}
