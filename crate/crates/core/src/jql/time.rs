use chrono::{DateTime, Datelike, Duration, Months, NaiveDate, NaiveTime, TimeZone, Utc};

use super::ast::{DateFunction, DateFunctionKind, DateLiteral, OffsetUnit};

/// The reference instant date functions resolve against.
///
/// All instants are UTC. Weeks start on Monday.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clock {
    now: DateTime<Utc>,
}

impl Clock {
    pub fn fixed(now: DateTime<Utc>) -> Self {
        Clock { now }
    }

    pub fn system() -> Self {
        Clock { now: Utc::now() }
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.now
    }
}

/// A date operand after resolution.
///
/// Literals cover a span (a whole day or minute) and every comparison is made
/// against that span. Functions denote an instant for ordering comparisons;
/// the period anchors additionally match their whole day/week/month under
/// `=` and `!=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DateOperand {
    Span {
        start: DateTime<Utc>,
        end: DateTime<Utc>,
    },
    Instant {
        at: DateTime<Utc>,
        period: Option<(DateTime<Utc>, DateTime<Utc>)>,
    },
}

pub(crate) fn midnight(d: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&d.and_time(NaiveTime::MIN))
}

fn add_months(t: DateTime<Utc>, n: i32) -> DateTime<Utc> {
    let shifted = if n >= 0 {
        t.checked_add_months(Months::new(n as u32))
    } else {
        t.checked_sub_months(Months::new(n.unsigned_abs()))
    };
    shifted.unwrap_or(t)
}

fn add_offset(t: DateTime<Utc>, amount: i32, unit: OffsetUnit) -> DateTime<Utc> {
    match unit {
        OffsetUnit::Day => t + Duration::days(amount as i64),
        OffsetUnit::Week => t + Duration::weeks(amount as i64),
        OffsetUnit::Month => add_months(t, amount),
    }
}

#[derive(Clone, Copy)]
enum Granularity {
    Day,
    Week,
    Month,
}

fn period_containing(t: DateTime<Utc>, g: Granularity) -> (DateTime<Utc>, DateTime<Utc>) {
    let date = t.date_naive();
    match g {
        Granularity::Day => {
            let start = midnight(date);
            (start, start + Duration::days(1))
        }
        Granularity::Week => {
            let monday = date - Duration::days(date.weekday().num_days_from_monday() as i64);
            let start = midnight(monday);
            (start, start + Duration::weeks(1))
        }
        Granularity::Month => {
            let first = NaiveDate::from_ymd_opt(date.year(), date.month(), 1).unwrap();
            let start = midnight(first);
            (start, add_months(start, 1))
        }
    }
}

impl DateLiteral {
    pub fn resolve(&self) -> DateOperand {
        match self.time {
            None => {
                let start = midnight(self.date);
                DateOperand::Span {
                    start,
                    end: start + Duration::days(1),
                }
            }
            Some(t) => {
                let start = Utc.from_utc_datetime(&self.date.and_time(t));
                DateOperand::Span {
                    start,
                    end: start + Duration::minutes(1),
                }
            }
        }
    }
}

impl DateFunction {
    /// Resolve against `clock`.
    ///
    /// Month offsets shift the reference before anchoring, so
    /// `endOfMonth(-1M)` is the end of last month. Day and week offsets are
    /// added after anchoring, so `startOfMonth(+14d)` is the 15th.
    pub fn resolve(&self, clock: &Clock) -> DateOperand {
        let now = clock.now();
        let granularity = match self.kind {
            DateFunctionKind::StartOfDay | DateFunctionKind::EndOfDay => Some(Granularity::Day),
            DateFunctionKind::StartOfWeek | DateFunctionKind::EndOfWeek => {
                Some(Granularity::Week)
            }
            DateFunctionKind::StartOfMonth | DateFunctionKind::EndOfMonth => {
                Some(Granularity::Month)
            }
            DateFunctionKind::Now => None,
        };
        let Some(granularity) = granularity else {
            let at = match self.offset {
                Some(o) => add_offset(now, o.amount, o.unit),
                None => now,
            };
            return DateOperand::Instant { at, period: None };
        };
        let is_start = matches!(
            self.kind,
            DateFunctionKind::StartOfDay
                | DateFunctionKind::StartOfWeek
                | DateFunctionKind::StartOfMonth
        );
        let anchor = |reference: DateTime<Utc>| {
            let (start, end) = period_containing(reference, granularity);
            if is_start {
                start
            } else {
                end - Duration::milliseconds(1)
            }
        };
        let at = match self.offset {
            None => anchor(now),
            Some(o) if o.unit == OffsetUnit::Month => anchor(add_months(now, o.amount)),
            Some(o) => add_offset(anchor(now), o.amount, o.unit),
        };
        DateOperand::Instant {
            at,
            period: Some(period_containing(at, granularity)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jql::ast::Offset;

    fn clock() -> Clock {
        // Monday
        Clock::fixed(Utc.with_ymd_and_hms(2023, 10, 16, 10, 0, 0).unwrap())
    }

    fn f(kind: DateFunctionKind, offset: Option<(i32, OffsetUnit)>) -> DateOperand {
        DateFunction {
            kind,
            offset: offset.map(|(amount, unit)| Offset { amount, unit }),
        }
        .resolve(&clock())
    }

    fn ts(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
    }

    #[test]
    fn start_of_month_covers_october() {
        assert_eq!(
            f(DateFunctionKind::StartOfMonth, None),
            DateOperand::Instant {
                at: ts(2023, 10, 1),
                period: Some((ts(2023, 10, 1), ts(2023, 11, 1)))
            }
        );
    }

    #[test]
    fn end_of_month_last_millisecond() {
        match f(DateFunctionKind::EndOfMonth, Some((-1, OffsetUnit::Month))) {
            DateOperand::Instant { at, period } => {
                assert_eq!(at, ts(2023, 10, 1) - Duration::milliseconds(1));
                assert_eq!(period, Some((ts(2023, 9, 1), ts(2023, 10, 1))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn week_starts_monday() {
        match f(DateFunctionKind::StartOfWeek, Some((-1, OffsetUnit::Week))) {
            DateOperand::Instant { at, .. } => assert_eq!(at, ts(2023, 10, 9)),
            other => panic!("{other:?}"),
        }
        match f(DateFunctionKind::EndOfWeek, None) {
            DateOperand::Instant { period, .. } => {
                assert_eq!(period, Some((ts(2023, 10, 16), ts(2023, 10, 23))))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn day_offsets_after_anchor() {
        match f(DateFunctionKind::StartOfMonth, Some((14, OffsetUnit::Day))) {
            DateOperand::Instant { at, .. } => assert_eq!(at, ts(2023, 10, 15)),
            other => panic!("{other:?}"),
        }
        match f(DateFunctionKind::StartOfDay, Some((-7, OffsetUnit::Day))) {
            DateOperand::Instant { at, .. } => assert_eq!(at, ts(2023, 10, 9)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn now_is_an_instant_without_period() {
        assert_eq!(
            f(DateFunctionKind::Now, None),
            DateOperand::Instant {
                at: clock().now(),
                period: None
            }
        );
    }

    #[test]
    fn literal_spans() {
        let day = DateLiteral {
            date: NaiveDate::from_ymd_opt(2023, 8, 31).unwrap(),
            time: None,
        };
        assert_eq!(
            day.resolve(),
            DateOperand::Span {
                start: ts(2023, 8, 31),
                end: ts(2023, 9, 1)
            }
        );
    }
}
