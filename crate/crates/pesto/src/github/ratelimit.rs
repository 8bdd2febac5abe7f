use chrono::{DateTime, TimeZone, Utc};
use reqwest::header::HeaderMap;

const WINDOW_SLACK_SECS: i64 = 1;

/// Last known quota for the session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateLimitState {
    pub remaining: u64,
    pub reset_at: DateTime<Utc>,
    pub last_observed: DateTime<Utc>,
}

impl RateLimitState {
    /// Reads `x-ratelimit-remaining` / `x-ratelimit-reset` (epoch seconds).
    pub fn from_headers(headers: &HeaderMap, now: DateTime<Utc>) -> Option<Self> {
        let num = |name: &str| {
            headers
                .get(name)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<i64>().ok())
        };
        let remaining = u64::try_from(num("x-ratelimit-remaining")?).ok()?;
        let reset_at = Utc.timestamp_opt(num("x-ratelimit-reset")?, 0).single()?;
        Some(RateLimitState {
            remaining,
            reset_at,
            last_observed: now,
        })
    }

    /// Folds a freshly observed state into the known one.
    ///
    /// Responses reporting the same reset (within a second) belong to one
    /// window, where the remaining count only goes down, so late responses
    /// arriving out of order cannot inflate it. A later reset starts a new
    /// window. An earlier reset is accepted only if it is no more optimistic.
    pub fn merge(known: Option<Self>, observed: Self) -> Self {
        let Some(k) = known else { return observed };
        let drift = (observed.reset_at - k.reset_at).num_seconds();
        if drift.abs() <= WINDOW_SLACK_SECS {
            RateLimitState {
                remaining: k.remaining.min(observed.remaining),
                reset_at: k.reset_at.max(observed.reset_at),
                last_observed: observed.last_observed.max(k.last_observed),
            }
        } else if drift > 0 || observed.remaining <= k.remaining {
            observed
        } else {
            k
        }
    }

    /// How long to hold off before the next request, if quota is below `headroom`.
    pub fn wait_needed(&self, headroom: u64, now: DateTime<Utc>) -> Option<std::time::Duration> {
        if self.remaining < headroom && now < self.reset_at {
            (self.reset_at - now).to_std().ok()
        } else {
            None
        }
    }

    /// Local bookkeeping for a request about to be sent.
    pub fn spend_one(&mut self) {
        self.remaining = self.remaining.saturating_sub(1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use reqwest::header::HeaderValue;

    fn at(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(secs, 0).unwrap()
    }

    fn state(remaining: u64, reset: i64) -> RateLimitState {
        RateLimitState {
            remaining,
            reset_at: at(reset),
            last_observed: at(0),
        }
    }

    #[test]
    fn parses_headers() {
        let mut h = HeaderMap::new();
        h.insert("x-ratelimit-remaining", HeaderValue::from_static("42"));
        h.insert("x-ratelimit-reset", HeaderValue::from_static("1700000000"));
        let s = RateLimitState::from_headers(&h, at(5)).unwrap();
        assert_eq!(s.remaining, 42);
        assert_eq!(s.reset_at, at(1_700_000_000));
        assert!(RateLimitState::from_headers(&HeaderMap::new(), at(5)).is_none());
    }

    #[test]
    fn remaining_never_grows_within_window() {
        let merged = RateLimitState::merge(Some(state(10, 100)), state(50, 100));
        assert_eq!(merged.remaining, 10);
        let merged = RateLimitState::merge(Some(state(10, 100)), state(4, 100));
        assert_eq!(merged.remaining, 4);
        let next_window = RateLimitState::merge(Some(state(0, 100)), state(5000, 3700));
        assert_eq!(next_window.remaining, 5000);
        let jitter = RateLimitState::merge(Some(state(10, 100)), state(50, 101));
        assert_eq!((jitter.remaining, jitter.reset_at), (10, at(101)));
    }

    #[test]
    fn sooner_reset_accepted_only_if_not_more_optimistic() {
        let exhausted = RateLimitState::merge(Some(state(4999, 3600)), state(0, 5));
        assert_eq!((exhausted.remaining, exhausted.reset_at), (0, at(5)));
        let stale = RateLimitState::merge(Some(state(3, 3600)), state(4000, 5));
        assert_eq!(stale, state(3, 3600));
    }

    #[test]
    fn waits_only_below_headroom_before_reset() {
        assert_eq!(state(100, 60).wait_needed(50, at(0)), None);
        assert_eq!(
            state(3, 60).wait_needed(50, at(0)),
            Some(std::time::Duration::from_secs(60))
        );
        assert_eq!(state(3, 60).wait_needed(50, at(61)), None);
        assert_eq!(state(0, 60).wait_needed(0, at(0)), None);
    }
}
