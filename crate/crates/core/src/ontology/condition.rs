//! Question conditions and their compact text form.
//!
//! ```text
//! concept:<http://ex.org/Movie>
//! exists:<http://ex.org/isDirectedBy>={<http://ex.org/alejandro>}
//! exists:<http://ex.org/starring>.<http://ex.org/Actor>
//! exists:<http://ex.org/hasReleaseDate>={"Aug 27 2014"}
//! ```
//!
//! A condition list joins these with `;`.

use std::fmt;
use std::str::FromStr;

use super::{Iri, Literal};
use crate::{Error, Result};

/// One condition of a question: a named concept or an existential
/// restriction whose filler is an individual, a concept or a literal.
///
/// The derived ordering is the canonical condition order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionExpr {
    NamedConcept(Iri),
    ExistsRoleIndividual { role: Iri, individual: Iri },
    ExistsRoleConcept { role: Iri, concept: Iri },
    ExistsDataValue { role: Iri, value: Literal },
}

impl ConditionExpr {
    pub fn role(&self) -> Option<&Iri> {
        match self {
            ConditionExpr::NamedConcept(_) => None,
            ConditionExpr::ExistsRoleIndividual { role, .. }
            | ConditionExpr::ExistsRoleConcept { role, .. }
            | ConditionExpr::ExistsDataValue { role, .. } => Some(role),
        }
    }

    pub fn thing() -> Self {
        ConditionExpr::NamedConcept(Iri::thing())
    }
}

impl fmt::Display for ConditionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionExpr::NamedConcept(c) => write!(f, "concept:<{c}>"),
            ConditionExpr::ExistsRoleIndividual { role, individual } => {
                write!(f, "exists:<{role}>={{<{individual}>}}")
            }
            ConditionExpr::ExistsRoleConcept { role, concept } => {
                write!(f, "exists:<{role}>.<{concept}>")
            }
            ConditionExpr::ExistsDataValue { role, value } => {
                write!(f, "exists:<{role}>={{{value}}}")
            }
        }
    }
}

/// Formats a condition list in canonical order.
pub fn format_conditions<'a>(conditions: impl IntoIterator<Item = &'a ConditionExpr>) -> String {
    conditions
        .into_iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// Parses a `;`-separated condition list.
pub fn parse_conditions(text: &str) -> Result<Vec<ConditionExpr>> {
    let mut cursor = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        cursor.skip_ws();
        out.push(cursor.condition()?);
        cursor.skip_ws();
        match cursor.next() {
            None => break,
            Some(';') => continue,
            Some(c) => return Err(cursor.error(&format!("expected ';' but found '{c}'"))),
        }
    }
    Ok(out)
}

impl FromStr for ConditionExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cursor = Cursor::new(s);
        cursor.skip_ws();
        let condition = cursor.condition()?;
        cursor.skip_ws();
        if cursor.peek().is_some() {
            return Err(cursor.error("trailing characters after condition"));
        }
        Ok(condition)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { text, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.next();
        }
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            line: 1,
            column: self.text[..self.pos].chars().count() + 1,
            message: format!("condition: {message}"),
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.text[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{s}'")))
        }
    }

    fn iri(&mut self) -> Result<Iri> {
        self.expect("<")?;
        let rest = &self.text[self.pos..];
        let end = rest.find('>').ok_or_else(|| self.error("unterminated IRI"))?;
        let iri = Iri::new(&rest[..end]).map_err(|_| self.error("empty IRI"))?;
        self.pos += end + 1;
        Ok(iri)
    }

    fn literal(&mut self) -> Result<Literal> {
        self.expect("\"")?;
        let mut lexical = String::new();
        loop {
            match self.next() {
                None => return Err(self.error("unterminated literal")),
                Some('"') => break,
                Some('\\') => match self.next() {
                    Some('"') => lexical.push('"'),
                    Some('\\') => lexical.push('\\'),
                    Some('n') => lexical.push('\n'),
                    Some('r') => lexical.push('\r'),
                    Some('t') => lexical.push('\t'),
                    _ => return Err(self.error("bad escape in literal")),
                },
                Some(c) => lexical.push(c),
            }
        }
        if self.eat("^^") {
            Ok(Literal::typed(lexical, self.iri()?))
        } else if self.eat("@") {
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                self.next();
            }
            Ok(Literal::lang(lexical, &self.text[start..self.pos]))
        } else {
            Ok(Literal::string(lexical))
        }
    }

    fn condition(&mut self) -> Result<ConditionExpr> {
        if self.eat("concept:") {
            return Ok(ConditionExpr::NamedConcept(self.iri()?));
        }
        self.expect("exists:")?;
        let role = self.iri()?;
        if self.eat(".") {
            let concept = self.iri()?;
            return Ok(ConditionExpr::ExistsRoleConcept { role, concept });
        }
        self.expect("={")?;
        let condition = if self.peek() == Some('"') {
            ConditionExpr::ExistsDataValue {
                role,
                value: self.literal()?,
            }
        } else {
            ConditionExpr::ExistsRoleIndividual {
                role,
                individual: self.iri()?,
            }
        };
        self.expect("}")?;
        Ok(condition)
    }
}
