//! Text formats shared by the command line, configuration files and stored
//! records: exact rationals as `"p/q"`, comma-separated number lists.

use crate::error::{Error, Result};
use num_rational::Ratio;

/// Parses `"p/q"` or a bare integer `"p"` into a reduced rational.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: u64 = p.parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let q: u64 = q.parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if q == 0 {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Ratio::new(p, q))
}

pub fn format_ratio(r: &Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| item.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {what} {item:?}"))))
        .collect()
}

/// Comma-separated finite reals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = parse_list(s, "number")?;
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("non-finite value {x}")));
    }
    Ok(v)
}

/// Comma-separated nonnegative integers.
pub fn parse_uint_list(s: &str) -> Result<Vec<u64>> {
    parse_list(s, "integer")
}

/// Comma-separated signed integers.
pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    parse_list(s, "integer")
}

/// Serde adapter storing a `Ratio<u64>` as `"p/q"`.
pub mod ratio_str {
    use num_rational::Ratio;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u64>, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_ratio(&s).map_err(D::Error::custom)
    }
}
