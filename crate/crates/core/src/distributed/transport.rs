//! Point-to-point message passing between ranks.

use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::sync::Mutex;
use std::time::Duration;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("rank {from} could not send to rank {to}: {reason}")]
    Send {
        from: usize,
        to: usize,
        reason: String,
    },
    #[error("rank {to} got no message from rank {from}: {reason}")]
    Recv {
        to: usize,
        from: usize,
        reason: String,
    },
}

/// Reliable transport with FIFO order per ordered rank pair and blocking
/// receive.
pub trait Transport: Sync {
    fn n_ranks(&self) -> usize;
    fn send(&self, from: usize, to: usize, msg: Vec<Complex64>) -> Result<(), TransportError>;
    fn recv(&self, to: usize, from: usize) -> Result<Vec<Complex64>, TransportError>;
}

/// In-process transport: one unbounded queue per ordered rank pair.
pub struct ChannelTransport {
    n: usize,
    senders: Vec<Sender<Vec<Complex64>>>,
    receivers: Vec<Mutex<Receiver<Vec<Complex64>>>>,
    timeout: Duration,
}

impl ChannelTransport {
    pub fn new(n_ranks: usize) -> Self {
        ChannelTransport::with_timeout(n_ranks, Duration::from_secs(600))
    }

    /// A receive that waits longer than `timeout` fails instead of hanging.
    pub fn with_timeout(n_ranks: usize, timeout: Duration) -> Self {
        let (senders, receivers) = (0..n_ranks * n_ranks)
            .map(|_| {
                let (s, r) = channel();
                (s, Mutex::new(r))
            })
            .unzip();
        ChannelTransport {
            n: n_ranks,
            senders,
            receivers,
            timeout,
        }
    }

    fn slot(&self, from: usize, to: usize) -> usize {
        from * self.n + to
    }
}

impl Transport for ChannelTransport {
    fn n_ranks(&self) -> usize {
        self.n
    }

    fn send(&self, from: usize, to: usize, msg: Vec<Complex64>) -> Result<(), TransportError> {
        if from >= self.n || to >= self.n {
            return Err(TransportError::Send {
                from,
                to,
                reason: "no such rank".into(),
            });
        }
        self.senders[self.slot(from, to)]
            .send(msg)
            .map_err(|e| TransportError::Send {
                from,
                to,
                reason: e.to_string(),
            })
    }

    fn recv(&self, to: usize, from: usize) -> Result<Vec<Complex64>, TransportError> {
        if from >= self.n || to >= self.n {
            return Err(TransportError::Recv {
                to,
                from,
                reason: "no such rank".into(),
            });
        }
        let rx = self.receivers[self.slot(from, to)]
            .lock()
            .expect("receiver lock");
        rx.recv_timeout(self.timeout)
            .map_err(|e| TransportError::Recv {
                to,
                from,
                reason: match e {
                    RecvTimeoutError::Timeout => "timed out".into(),
                    RecvTimeoutError::Disconnected => "channel closed".into(),
                },
            })
    }
}
