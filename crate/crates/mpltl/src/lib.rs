//! Bounded satisfiability checking for metric past/future LTL.

pub mod cases;
pub mod check;
pub mod cnf;
pub mod constraint;
pub mod difftest;
pub mod encode;
pub mod formula;
pub mod oracle;
pub mod parser;
pub mod random;
pub mod sat;
pub mod trace;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Whether time starts at instant 0 or extends infinitely in both directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeModel {
    Mono,
    Bi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    /// Metric operators get dedicated constraints.
    Metric,
    /// Metric operators are unrolled into next/yesterday chains first.
    Nonmetric,
}

impl fmt::Display for TimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeModel::Mono => "mono",
            TimeModel::Bi => "bi",
        })
    }
}

impl FromStr for TimeModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mono" => Ok(TimeModel::Mono),
            "bi" => Ok(TimeModel::Bi),
            _ => Err(format!("unknown time model `{s}` (expected mono or bi)")),
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncoderKind::Metric => "metric",
            EncoderKind::Nonmetric => "nonmetric",
        })
    }
}

impl FromStr for EncoderKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "metric" => Ok(EncoderKind::Metric),
            "nonmetric" => Ok(EncoderKind::Nonmetric),
            _ => Err(format!("unknown encoder `{s}` (expected metric or nonmetric)")),
        }
    }
}
