use std::sync::Mutex;

use chrono::{DateTime, Utc};

use super::Frequency;

/// When the next scheduled post is due: one period after the last post,
/// or immediately for a channel that has never been posted to.
pub fn next_post_time(
    frequency: Frequency,
    last_post_ts: Option<DateTime<Utc>>,
    now: DateTime<Utc>,
) -> DateTime<Utc> {
    match last_post_ts {
        Some(t) => t + frequency.period(),
        None => now,
    }
}

/// Source of the current time. The service reads the wall clock; replay and
/// tests drive a [`ManualClock`].
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

#[derive(Debug)]
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(at: DateTime<Utc>) -> Self {
        ManualClock(Mutex::new(at))
    }

    pub fn set(&self, at: DateTime<Utc>) {
        *self.0.lock().unwrap() = at;
    }

    pub fn advance(&self, by: chrono::TimeDelta) {
        let mut t = self.0.lock().unwrap();
        *t += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeDelta, TimeZone};

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap()
    }

    #[test]
    fn next_post_adds_one_period() {
        let now = t0() + TimeDelta::days(30);
        assert_eq!(next_post_time(Frequency::Weekly, Some(t0()), now), t0() + TimeDelta::days(7));
        assert_eq!(
            next_post_time(Frequency::EveryOtherDay, Some(t0()), now),
            t0() + TimeDelta::days(2)
        );
        assert_eq!(next_post_time(Frequency::Daily, Some(t0()), now), t0() + TimeDelta::days(1));
        assert_eq!(next_post_time(Frequency::Weekly, None, now), now);
    }

    #[test]
    fn frequency_change_uses_new_period_from_last_post() {
        // posted weekly, then switched to daily: due one day after the last post
        let last = t0();
        assert_eq!(
            next_post_time(Frequency::Daily, Some(last), last + TimeDelta::hours(3)),
            last + TimeDelta::days(1)
        );
    }

    #[test]
    fn manual_clock_advances() {
        let c = ManualClock::new(t0());
        c.advance(TimeDelta::hours(2));
        assert_eq!(c.now(), t0() + TimeDelta::hours(2));
        c.set(t0());
        assert_eq!(c.now(), t0());
    }
}
