//! Exponential backoff with jitter, shared by the OCR and model clients.

use std::future::Future;
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Retries after the first attempt; total attempts = max_retries + 1.
    pub max_retries: u32,
    #[serde(with = "millis")]
    pub base_delay: Duration,
    #[serde(with = "millis")]
    pub max_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 2,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
            jitter: true,
        }
    }
}

/// What the operation wants after a failed attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Retry,
    /// Retry, but wait at least this long (e.g. from `Retry-After`).
    RetryAfter(Duration),
    Fail,
}

/// Result of a retried operation plus how many attempts it took.
#[derive(Debug)]
pub struct Outcome<T, E> {
    pub result: Result<T, E>,
    pub attempts: u32,
}

impl RetryPolicy {
    pub fn no_delay(max_retries: u32) -> Self {
        RetryPolicy {
            max_retries,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
            jitter: false,
        }
    }

    pub fn max_attempts(&self) -> u32 {
        self.max_retries.saturating_add(1)
    }

    /// Delay before retry number `retry` (1-based).
    pub fn delay_for(&self, retry: u32) -> Duration {
        let exp = self
            .base_delay
            .saturating_mul(2u32.saturating_pow(retry.saturating_sub(1)));
        let capped = exp.min(self.max_delay);
        if self.jitter && !capped.is_zero() {
            let half = capped / 2;
            half + rand::rng().random_range(Duration::ZERO..=half)
        } else {
            capped
        }
    }

    pub async fn run<T, E, F, Fut>(&self, mut op: F, classify: impl Fn(&E) -> Verdict) -> Outcome<T, E>
    where
        F: FnMut(u32) -> Fut,
        Fut: Future<Output = Result<T, E>>,
    {
        let mut attempt = 1;
        loop {
            let result = op(attempt).await;
            let err = match result {
                Ok(v) => {
                    return Outcome {
                        result: Ok(v),
                        attempts: attempt,
                    }
                }
                Err(e) => e,
            };
            let wait = match classify(&err) {
                Verdict::Fail => None,
                Verdict::Retry => Some(self.delay_for(attempt)),
                Verdict::RetryAfter(d) => Some(self.delay_for(attempt).max(d.min(self.max_delay))),
            };
            match wait {
                Some(d) if attempt < self.max_attempts() => {
                    tracing::debug!(attempt, delay_ms = d.as_millis() as u64, "retrying");
                    if !d.is_zero() {
                        tokio::time::sleep(d).await;
                    }
                    attempt += 1;
                }
                _ => {
                    return Outcome {
                        result: Err(err),
                        attempts: attempt,
                    }
                }
            }
        }
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// Parses a `Retry-After` header given in whole seconds.
pub fn retry_after(headers: &reqwest::header::HeaderMap) -> Option<Duration> {
    headers
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<u64>()
        .ok()
        .map(Duration::from_secs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    #[test]
    fn delays_grow_and_cap() {
        let p = RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_millis(100),
            max_delay: Duration::from_millis(350),
            jitter: false,
        };
        let d: Vec<_> = (1..=4).map(|r| p.delay_for(r).as_millis()).collect();
        assert_eq!(d, vec![100, 200, 350, 350]);
    }

    #[test]
    fn jitter_stays_within_bounds() {
        let p = RetryPolicy {
            jitter: true,
            ..RetryPolicy::default()
        };
        for retry in 1..6 {
            let full = p.base_delay.saturating_mul(1 << (retry - 1)).min(p.max_delay);
            let d = p.delay_for(retry);
            assert!(d >= full / 2 && d <= full, "{d:?} vs {full:?}");
        }
    }

    #[tokio::test]
    async fn retries_until_budget_exhausted() {
        let calls = AtomicU32::new(0);
        let out: Outcome<(), &str> = RetryPolicy::no_delay(3)
            .run(
                |_| {
                    calls.fetch_add(1, Ordering::SeqCst);
                    async { Err("boom") }
                },
                |_| Verdict::Retry,
            )
            .await;
        assert_eq!(out.attempts, 4);
        assert_eq!(calls.load(Ordering::SeqCst), 4);
    }

    #[tokio::test]
    async fn fatal_errors_stop_immediately() {
        let out: Outcome<(), &str> = RetryPolicy::no_delay(3)
            .run(|_| async { Err("fatal") }, |_| Verdict::Fail)
            .await;
        assert_eq!(out.attempts, 1);
    }

    #[tokio::test]
    async fn succeeds_after_transient_failures() {
        let out: Outcome<u32, &str> = RetryPolicy::no_delay(3)
            .run(
                |attempt| async move { if attempt < 3 { Err("flaky") } else { Ok(attempt) } },
                |_| Verdict::Retry,
            )
            .await;
        assert_eq!(out.result, Ok(3));
        assert_eq!(out.attempts, 3);
    }
}
