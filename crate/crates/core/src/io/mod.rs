//! Model file formats and the statistics document.

mod native;
mod report;
mod uai;

pub use native::{parse_native, write_native};
pub use report::{emit_report, BoundReport, ReportDocument};
pub use uai::{parse_uai_lg, write_uai_lg};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::GraphicalModel;
use crate::scalar::Cost;

/// Input format of a model file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Native,
    UaiLg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Native => "native",
            Format::UaiLg => "uai-lg",
        }
    }

    pub fn parse<T: Cost>(self, text: &str) -> Result<GraphicalModel<T>> {
        match self {
            Format::Native => parse_native(text),
            Format::UaiLg => parse_uai_lg(text),
        }
    }

    pub fn write<T: Cost>(self, model: &GraphicalModel<T>) -> String {
        match self {
            Format::Native => write_native(model),
            Format::UaiLg => write_uai_lg(model),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(Format::Native),
            "uai-lg" => Ok(Format::UaiLg),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// A whitespace-separated token with its 1-based position.
#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn parse_usize(&self, what: &str) -> Result<usize> {
        self.text
            .parse()
            .map_err(|_| self.error(format!("expected {what}, found `{}`", self.text)))
    }
}

/// Splits `line` into tokens, dropping everything after `#` when `comments`.
fn tokenize(line: &str, line_no: usize, comments: bool) -> Vec<Token<'_>> {
    let body = match (comments, line.find('#')) {
        (true, Some(i)) => &line[..i],
        _ => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &body[s..i],
                    line: line_no,
                    column: body[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}
