//! Minimal blocking JSON-over-HTTP client shared by the remote planner and
//! the chat-completion formalizer.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::Value;

#[derive(Debug)]
pub(crate) struct HttpFailure {
    pub timed_out: bool,
    pub message: String,
}

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::new_with_config(
        ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build(),
    )
}

/// Sends one POST and returns the status code and body text.
pub(crate) fn post_json(
    agent: &ureq::Agent,
    url: &str,
    headers: &[(&str, String)],
    body: &Value,
) -> Result<(u16, String), HttpFailure> {
    let mut req = agent.post(url);
    for (k, v) in headers {
        req = req.header(*k, v.as_str());
    }
    match req.send_json(body) {
        Ok(mut resp) => {
            let status = resp.status().as_u16();
            let text = resp.body_mut().read_to_string().map_err(|e| HttpFailure {
                timed_out: matches!(e, ureq::Error::Timeout(_)),
                message: format!("reading response from {url}: {e}"),
            })?;
            Ok((status, text))
        }
        Err(e) => Err(HttpFailure {
            timed_out: matches!(e, ureq::Error::Timeout(_)),
            message: format!("request to {url} failed: {e}"),
        }),
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
pub(crate) struct Semaphore {
    free: Mutex<usize>,
    cond: Condvar,
}

pub(crate) struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    pub fn new(n: usize) -> Self {
        Semaphore {
            free: Mutex::new(n.max(1)),
            cond: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cond.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut free = self.0.free.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.0.cond.notify_one();
    }
}
