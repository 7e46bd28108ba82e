//! Canonical records.
//!
//! A [`Record`] is the element type of every weighted dataset. Records are
//! structural values with a derived total order, so two equal records always
//! compare, hash and encode identically, and iteration over ordered containers
//! is reproducible across runs.
//!
//! The textual encoding produced by `Display` is canonical and is parsed back
//! by `FromStr`; it is the record column of serialized measurements.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;

/// One canonical record.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Record {
    Int(i64),
    Str(Arc<str>),
    Node(u32),
    /// Directed edge `(src, dst)`.
    Edge(u32, u32),
    Tuple(Arc<[Record]>),
    /// A record paired with a position, as produced by `shave`.
    Indexed(Arc<Record>, u64),
}

impl Record {
    pub fn int(value: i64) -> Self {
        Record::Int(value)
    }

    pub fn str(value: &str) -> Self {
        Record::Str(Arc::from(value))
    }

    pub fn node(id: u32) -> Self {
        Record::Node(id)
    }

    pub fn edge(src: u32, dst: u32) -> Self {
        Record::Edge(src, dst)
    }

    pub fn tuple<I: IntoIterator<Item = Record>>(items: I) -> Self {
        Record::Tuple(items.into_iter().collect::<Vec<_>>().into())
    }

    pub fn pair(first: Record, second: Record) -> Self {
        Record::Tuple(Arc::from([first, second]))
    }

    pub fn indexed(inner: Record, index: u64) -> Self {
        Record::Indexed(Arc::new(inner), index)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Record::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_node(&self) -> Option<u32> {
        match self {
            Record::Node(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_edge(&self) -> Option<(u32, u32)> {
        match self {
            Record::Edge(a, b) => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Record]> {
        match self {
            Record::Tuple(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_indexed(&self) -> Option<(&Record, u64)> {
        match self {
            Record::Indexed(inner, index) => Some((inner, *index)),
            _ => None,
        }
    }

    /// Field `index` of a tuple record.
    ///
    /// Panics when the record is not a tuple with that many fields; query
    /// closures use this on records whose shape the plan itself determines.
    pub fn field(&self, index: usize) -> &Record {
        match self {
            Record::Tuple(items) if index < items.len() => &items[index],
            other => panic!("record {other} has no field {index}"),
        }
    }

    /// Canonical text encoding; identical to `to_string()`.
    pub fn encode(&self) -> String {
        self.to_string()
    }
}

impl From<i64> for Record {
    fn from(value: i64) -> Self {
        Record::Int(value)
    }
}

impl From<&str> for Record {
    fn from(value: &str) -> Self {
        Record::str(value)
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Record::Int(v) => write!(f, "{v}"),
            Record::Str(s) => {
                f.write_str("\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        '\r' => f.write_str("\\r")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Record::Node(v) => write!(f, "n{v}"),
            Record::Edge(a, b) => write!(f, "e({a},{b})"),
            Record::Tuple(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
            Record::Indexed(inner, index) => write!(f, "<{inner}#{index}>"),
        }
    }
}

impl FromStr for Record {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser { text, pos: 0 };
        let record = parser.record()?;
        if parser.pos != text.len() {
            return Err(parser.error("trailing characters"));
        }
        Ok(record)
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("record {:?} at byte {}: {what}", self.text, self.pos))
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8) -> Result<(), Error> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", byte as char)))
        }
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn unsigned<T: FromStr>(&mut self) -> Result<T, Error> {
        let digits = self.digits();
        digits.parse().map_err(|_| self.error("expected unsigned integer"))
    }

    fn record(&mut self) -> Result<Record, Error> {
        match self.peek() {
            Some(b'-') | Some(b'0'..=b'9') => {
                let start = self.pos;
                if self.peek() == Some(b'-') {
                    self.pos += 1;
                }
                self.digits();
                self.text[start..self.pos]
                    .parse()
                    .map(Record::Int)
                    .map_err(|_| self.error("bad integer"))
            }
            Some(b'"') => {
                self.pos += 1;
                let mut out = String::new();
                let mut chars = self.text[self.pos..].char_indices();
                loop {
                    let Some((offset, ch)) = chars.next() else {
                        return Err(self.error("unterminated string"));
                    };
                    match ch {
                        '"' => {
                            self.pos += offset + 1;
                            return Ok(Record::Str(Arc::from(out.as_str())));
                        }
                        '\\' => match chars.next() {
                            Some((_, 'n')) => out.push('\n'),
                            Some((_, 't')) => out.push('\t'),
                            Some((_, 'r')) => out.push('\r'),
                            Some((_, c @ ('"' | '\\'))) => out.push(c),
                            _ => return Err(self.error("bad escape")),
                        },
                        c => out.push(c),
                    }
                }
            }
            Some(b'n') => {
                self.pos += 1;
                Ok(Record::Node(self.unsigned()?))
            }
            Some(b'e') => {
                self.pos += 1;
                self.expect(b'(')?;
                let src = self.unsigned()?;
                self.expect(b',')?;
                let dst = self.unsigned()?;
                self.expect(b')')?;
                Ok(Record::Edge(src, dst))
            }
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    return Ok(Record::tuple(items));
                }
                loop {
                    items.push(self.record()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Record::tuple(items));
                        }
                        _ => return Err(self.error("expected ',' or ')'")),
                    }
                }
            }
            Some(b'<') => {
                self.pos += 1;
                let inner = self.record()?;
                self.expect(b'#')?;
                let index = self.unsigned()?;
                self.expect(b'>')?;
                Ok(Record::indexed(inner, index))
            }
            _ => Err(self.error("unexpected character")),
        }
    }
}
