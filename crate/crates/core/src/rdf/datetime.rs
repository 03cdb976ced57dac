//! ISO-8601 date-time values at reduced precision.
//!
//! Publication dates frequently carry only a year, so `2007`, `2007-03`,
//! `2007-03-14` and `2007-03-14T09:30:00Z` are all accepted. Ordering
//! between two values falls back to the year component whenever either side
//! is year-precision.

use std::cmp::Ordering;
use std::fmt;

use chrono::{NaiveDate, NaiveDateTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Precision {
    Year,
    Month,
    Day,
    Time,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DateTimeValue {
    year: i32,
    month: u32,
    day: u32,
    hour: u32,
    minute: u32,
    second: u32,
    nanos: u32,
    offset_minutes: Option<i32>,
    precision: Precision,
}

impl DateTimeValue {
    pub fn from_year(year: i32) -> Option<Self> {
        if !(0..=9999).contains(&year) {
            return None;
        }
        Some(DateTimeValue {
            year,
            month: 1,
            day: 1,
            hour: 0,
            minute: 0,
            second: 0,
            nanos: 0,
            offset_minutes: None,
            precision: Precision::Year,
        })
    }

    /// Strict parse of the stored lexical form (`T` separator).
    pub fn parse(s: &str) -> Option<Self> {
        parse_with(s, false)
    }

    /// Accepts a space between date and time, as ingestion logs often do.
    pub fn parse_lenient(s: &str) -> Option<Self> {
        parse_with(s.trim(), true)
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    fn instant(&self) -> NaiveDateTime {
        let date = NaiveDate::from_ymd_opt(self.year, self.month, self.day).expect("validated on construction");
        let dt = date
            .and_hms_nano_opt(self.hour, self.minute, self.second, self.nanos)
            .expect("validated on construction");
        match self.offset_minutes {
            Some(off) => dt - chrono::Duration::minutes(off as i64),
            None => dt,
        }
    }

    /// Chronological comparison, at year precision when either side only
    /// carries a year.
    pub fn compare(&self, other: &DateTimeValue) -> Ordering {
        if self.precision == Precision::Year || other.precision == Precision::Year {
            return self.year.cmp(&other.year);
        }
        self.instant().cmp(&other.instant())
    }
}

impl fmt::Display for DateTimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if self.precision >= Precision::Month {
            write!(f, "-{:02}", self.month)?;
        }
        if self.precision >= Precision::Day {
            write!(f, "-{:02}", self.day)?;
        }
        if self.precision == Precision::Time {
            write!(f, "T{:02}:{:02}:{:02}", self.hour, self.minute, self.second)?;
            if self.nanos > 0 {
                let frac = format!("{:09}", self.nanos);
                write!(f, ".{}", frac.trim_end_matches('0'))?;
            }
            match self.offset_minutes {
                Some(0) => f.write_str("Z")?,
                Some(off) => {
                    let sign = if off < 0 { '-' } else { '+' };
                    let off = off.abs();
                    write!(f, "{}{:02}:{:02}", sign, off / 60, off % 60)?;
                }
                None => {}
            }
        }
        Ok(())
    }
}

fn digits(s: &str, n: usize) -> Option<u32> {
    if s.len() != n || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_with(s: &str, lenient: bool) -> Option<DateTimeValue> {
    let (date_part, time_part) = match s.find(|c| c == 'T' || (lenient && c == ' ')) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let mut fields = date_part.split('-');
    let year = digits(fields.next()?, 4)? as i32;
    let month = match fields.next() {
        Some(m) => Some(digits(m, 2)?),
        None => None,
    };
    let day = match fields.next() {
        Some(d) => Some(digits(d, 2)?),
        None => None,
    };
    if fields.next().is_some() {
        return None;
    }
    let mut value = DateTimeValue::from_year(year)?;
    if let Some(m) = month {
        value.month = m;
        value.precision = Precision::Month;
    }
    if let Some(d) = day {
        value.day = d;
        value.precision = Precision::Day;
    }
    NaiveDate::from_ymd_opt(value.year, value.month, value.day)?;

    if let Some(time) = time_part {
        if value.precision != Precision::Day {
            return None;
        }
        let (clock, offset) = split_offset(time)?;
        let mut parts = clock.split(':');
        value.hour = digits(parts.next()?, 2)?;
        value.minute = digits(parts.next()?, 2)?;
        if let Some(sec) = parts.next() {
            let (whole, frac) = match sec.split_once('.') {
                Some((w, f)) => (w, Some(f)),
                None => (sec, None),
            };
            value.second = digits(whole, 2)?;
            if let Some(frac) = frac {
                if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                value.nanos = format!("{:0<9}", frac).parse().ok()?;
            }
        }
        if parts.next().is_some() || value.hour > 23 || value.minute > 59 || value.second > 59 {
            return None;
        }
        value.offset_minutes = offset;
        value.precision = Precision::Time;
    }
    Some(value)
}

fn split_offset(time: &str) -> Option<(&str, Option<i32>)> {
    if let Some(clock) = time.strip_suffix('Z') {
        return Some((clock, Some(0)));
    }
    if let Some(i) = time.rfind(['+', '-']) {
        let (clock, off) = time.split_at(i);
        let sign = if off.starts_with('-') { -1 } else { 1 };
        let (h, m) = off[1..].split_once(':')?;
        let (h, m) = (digits(h, 2)?, digits(m, 2)?);
        if h > 23 || m > 59 {
            return None;
        }
        return Some((clock, Some(sign * (h as i32 * 60 + m as i32))));
    }
    Some((time, None))
}
