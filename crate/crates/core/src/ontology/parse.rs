//! Tokenizer and parsers for N-Triples and the supported Turtle subset.
//!
//! The Turtle subset covers `@prefix`/`PREFIX`, `@base`/`BASE`, prefixed
//! names, the `a` keyword, `;` and `,` lists, quoted literals (short and
//! long forms) with datatypes or language tags, and bare numeric and
//! boolean literals. Blank nodes and collections are rejected.

use std::collections::HashMap;

use super::{vocab, Iri, Literal, Term, Triple};
use crate::{Error, Result};

/// A parsed triple together with the line it started on.
#[derive(Debug, Clone)]
pub struct Located {
    pub triple: Triple,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    IriRef(String),
    PName(String, String),
    Literal(String),
    LangTag(String),
    Carets,
    Number(String, &'static str),
    Boolean(bool),
    A,
    PrefixDirective,
    BaseDirective,
    SparqlPrefix,
    SparqlBase,
    Dot,
    Semicolon,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn peek(&self) -> Option<char> {
        self.peek_at(0)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        while let Some(token) = self.token()? {
            out.push(token);
        }
        Ok(out)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }

    fn token(&mut self) -> Result<Option<Token>> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '<' => {
                self.bump();
                Tok::IriRef(self.iri_body(line, column)?)
            }
            '"' | '\'' => Tok::Literal(self.string(line, column)?),
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                match word.as_str() {
                    "prefix" => Tok::PrefixDirective,
                    "base" => Tok::BaseDirective,
                    "" => return Err(syntax(line, column, "expected language tag after '@'")),
                    _ => Tok::LangTag(word),
                }
            }
            '^' => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(syntax(line, column, "expected '^^'"));
                }
                Tok::Carets
            }
            '.' if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => self.number(line, column)?,
            '.' => {
                self.bump();
                Tok::Dot
            }
            ';' => {
                self.bump();
                Tok::Semicolon
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '[' | ']' | '(' | ')' => {
                return Err(syntax(line, column, "blank nodes and collections are not supported"))
            }
            '_' if self.peek_at(1) == Some(':') => {
                return Err(syntax(line, column, "blank nodes are not supported"))
            }
            c if c.is_ascii_digit() || c == '+' || c == '-' => self.number(line, column)?,
            _ => self.name(line, column)?,
        };
        Ok(Some(Token { tok, line, column }))
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Tok> {
        let mut text = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            text.push(sign);
            self.bump();
        }
        text.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut datatype = vocab::XSD_INTEGER;
        // `1.` followed by a non-digit is an integer then a statement end.
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            text.push('.');
            text.push_str(&self.take_while(|c| c.is_ascii_digit()));
            datatype = vocab::XSD_DECIMAL;
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            self.bump();
            text.push(e);
            if let Some(sign @ ('+' | '-')) = self.peek() {
                self.bump();
                text.push(sign);
            }
            let exp = self.take_while(|c| c.is_ascii_digit());
            if exp.is_empty() {
                return Err(syntax(line, column, "malformed exponent"));
            }
            text.push_str(&exp);
            datatype = vocab::XSD_DOUBLE;
        }
        if !text.chars().any(|c| c.is_ascii_digit()) {
            return Err(syntax(line, column, "malformed number"));
        }
        Ok(Tok::Number(text, datatype))
    }

    fn name(&mut self, line: usize, column: usize) -> Result<Tok> {
        let start = self.pos;
        let mut end = start;
        while let Some(c) = self.chars.get(end) {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.' | '%') {
                end += 1;
            } else {
                break;
            }
        }
        // A trailing dot terminates the statement rather than the name.
        while end > start && self.chars[end - 1] == '.' {
            end -= 1;
        }
        if end == start {
            let found = self.peek().unwrap_or(' ');
            return Err(syntax(line, column, format!("unexpected character '{found}'")));
        }
        let word: String = self.chars[start..end].iter().collect();
        for _ in start..end {
            self.bump();
        }
        Ok(if word == "a" {
            Tok::A
        } else if word == "true" || word == "false" {
            Tok::Boolean(word == "true")
        } else if word.eq_ignore_ascii_case("prefix") {
            Tok::SparqlPrefix
        } else if word.eq_ignore_ascii_case("base") {
            Tok::SparqlBase
        } else if let Some((prefix, local)) = word.split_once(':') {
            Tok::PName(prefix.to_owned(), local.to_owned())
        } else {
            return Err(syntax(line, column, format!("unexpected bare word '{word}'")));
        })
    }

    fn iri_body(&mut self, line: usize, column: usize) -> Result<String> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(syntax(line, column, "unterminated IRI")),
                Some('>') => return Ok(out),
                Some('\\') => out.push(self.unicode_escape(line, column)?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(syntax(line, column, format!("invalid character {c:?} in IRI")))
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn unicode_escape(&mut self, line: usize, column: usize) -> Result<char> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(syntax(line, column, "invalid escape")),
        };
        let hex: String = (0..width).filter_map(|_| self.bump()).collect();
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| syntax(line, column, format!("invalid unicode escape '{hex}'")))
    }

    fn string(&mut self, line: usize, column: usize) -> Result<String> {
        let quote = self.bump().unwrap_or('"');
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        } else if self.peek() == Some(quote) {
            self.bump();
            return Ok(String::new());
        }
        let mut out = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(syntax(line, column, "unterminated literal"));
            };
            match c {
                '\\' => {
                    let escaped = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            out.push(self.unicode_escape(line, column)?);
                            continue;
                        }
                        _ => return Err(syntax(self.line, self.column, "invalid escape in literal")),
                    };
                    self.bump();
                    out.push(escaped);
                }
                '\n' if !long => return Err(syntax(line, column, "unterminated literal")),
                c if c == quote => {
                    if !long {
                        return Ok(out);
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(out);
                    }
                    out.push(c);
                }
                c => out.push(c),
            }
        }
    }
}

struct TokenStream {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl TokenStream {
    fn new(src: &str) -> Result<Self> {
        let tokens = Lexer::new(src).tokens()?;
        let lines = src.split('\n').count().max(1);
        let last = src.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        Ok(TokenStream {
            tokens,
            pos: 0,
            eof: (lines, last),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token> {
        let token = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| syntax(self.eof.0, self.eof.1, "unexpected end of input"))?;
        self.pos += 1;
        Ok(token)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token> {
        let token = self.next()?;
        if token.tok == tok {
            Ok(token)
        } else {
            Err(syntax(token.line, token.column, format!("expected {what}")))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().is_some_and(|t| &t.tok == tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

fn make_iri(value: String, token: &Token) -> Result<Iri> {
    Iri::new(value).map_err(|_| syntax(token.line, token.column, "empty IRI"))
}

/// Parses N-Triples: one `<s> <p> <o> .` statement per line.
pub fn parse_ntriples(src: &str) -> Result<Vec<Located>> {
    let mut stream = TokenStream::new(src)?;
    let mut out = Vec::new();
    while let Some(first) = stream.peek().cloned() {
        let subject = match stream.next()?.tok {
            Tok::IriRef(s) => make_iri(s, &first)?,
            _ => return Err(syntax(first.line, first.column, "expected subject IRI")),
        };
        let token = stream.next()?;
        let predicate = match token.tok.clone() {
            Tok::IriRef(s) => make_iri(s, &token)?,
            _ => return Err(syntax(token.line, token.column, "expected predicate IRI")),
        };
        let token = stream.next()?;
        let object = match token.tok.clone() {
            Tok::IriRef(s) => Term::Iri(make_iri(s, &token)?),
            Tok::Literal(lexical) => Term::Literal(literal_suffix(&mut stream, lexical, &|t, tok| {
                match t {
                    Tok::IriRef(s) => make_iri(s, tok),
                    _ => Err(syntax(tok.line, tok.column, "expected datatype IRI")),
                }
            })?),
            _ => return Err(syntax(token.line, token.column, "expected object IRI or literal")),
        };
        let dot = stream.expect(Tok::Dot, "'.'")?;
        if dot.line != first.line {
            return Err(syntax(dot.line, dot.column, "an N-Triples statement must fit on one line"));
        }
        out.push(Located {
            triple: Triple::new(subject, predicate, object),
            line: first.line,
        });
    }
    Ok(out)
}

fn literal_suffix(
    stream: &mut TokenStream,
    lexical: String,
    datatype: &dyn Fn(Tok, &Token) -> Result<Iri>,
) -> Result<Literal> {
    match stream.peek().map(|t| t.tok.clone()) {
        Some(Tok::LangTag(lang)) => {
            stream.next()?;
            Ok(Literal::lang(lexical, lang))
        }
        Some(Tok::Carets) => {
            stream.next()?;
            let token = stream.next()?;
            Ok(Literal::typed(lexical, datatype(token.tok.clone(), &token)?))
        }
        _ => Ok(Literal::string(lexical)),
    }
}

struct TurtleParser {
    stream: TokenStream,
    prefixes: HashMap<String, String>,
    base: Option<String>,
    out: Vec<Located>,
}

/// Parses the supported Turtle subset.
pub fn parse_turtle(src: &str) -> Result<Vec<Located>> {
    let mut parser = TurtleParser {
        stream: TokenStream::new(src)?,
        prefixes: HashMap::new(),
        base: None,
        out: Vec::new(),
    };
    while parser.stream.peek().is_some() {
        parser.statement()?;
    }
    Ok(parser.out)
}

impl TurtleParser {
    fn statement(&mut self) -> Result<()> {
        let token = self.stream.next()?;
        match token.tok {
            Tok::PrefixDirective => {
                self.prefix_decl()?;
                self.stream.expect(Tok::Dot, "'.' after @prefix")?;
            }
            Tok::SparqlPrefix => self.prefix_decl()?,
            Tok::BaseDirective => {
                self.base_decl()?;
                self.stream.expect(Tok::Dot, "'.' after @base")?;
            }
            Tok::SparqlBase => self.base_decl()?,
            _ => {
                let line = token.line;
                let subject = self.iri_term(token)?;
                self.predicate_object_list(&subject, line)?;
                self.stream.expect(Tok::Dot, "'.' at end of statement")?;
            }
        }
        Ok(())
    }

    fn prefix_decl(&mut self) -> Result<()> {
        let token = self.stream.next()?;
        let Tok::PName(prefix, local) = token.tok else {
            return Err(syntax(token.line, token.column, "expected prefix name"));
        };
        if !local.is_empty() {
            return Err(syntax(token.line, token.column, "prefix name must end with ':'"));
        }
        let token = self.stream.next()?;
        let Tok::IriRef(iri) = token.tok else {
            return Err(syntax(token.line, token.column, "expected namespace IRI"));
        };
        let iri = self.resolve(iri);
        self.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn base_decl(&mut self) -> Result<()> {
        let token = self.stream.next()?;
        let Tok::IriRef(iri) = token.tok else {
            return Err(syntax(token.line, token.column, "expected base IRI"));
        };
        self.base = Some(self.resolve(iri));
        Ok(())
    }

    fn resolve(&self, iri: String) -> String {
        match &self.base {
            Some(base) if !iri.contains(':') => format!("{base}{iri}"),
            _ => iri,
        }
    }

    fn iri_term(&self, token: Token) -> Result<Iri> {
        let (line, column) = (token.line, token.column);
        let value = match token.tok {
            Tok::IriRef(iri) => self.resolve(iri),
            Tok::PName(prefix, local) => {
                let ns = self
                    .prefixes
                    .get(&prefix)
                    .ok_or_else(|| syntax(line, column, format!("undeclared prefix '{prefix}:'")))?;
                format!("{ns}{local}")
            }
            _ => return Err(syntax(line, column, "expected IRI or prefixed name")),
        };
        Iri::new(value).map_err(|_| syntax(line, column, "empty IRI"))
    }

    fn predicate_object_list(&mut self, subject: &Iri, line: usize) -> Result<()> {
        loop {
            let token = self.stream.next()?;
            let predicate = if token.tok == Tok::A {
                Iri::new(vocab::RDF_TYPE)?
            } else {
                self.iri_term(token)?
            };
            loop {
                let object = self.object()?;
                self.out.push(Located {
                    triple: Triple::new(subject.clone(), predicate.clone(), object),
                    line,
                });
                if !self.stream.eat(&Tok::Comma) {
                    break;
                }
            }
            if !self.stream.eat(&Tok::Semicolon) {
                return Ok(());
            }
            // Repeated or trailing semicolons are allowed.
            while self.stream.eat(&Tok::Semicolon) {}
            if self.stream.peek().is_none_or(|t| t.tok == Tok::Dot) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term> {
        let token = self.stream.next()?;
        match token.tok.clone() {
            Tok::Literal(lexical) => {
                let prefixes = &self.prefixes;
                let base = &self.base;
                let resolve = |t: Tok, tok: &Token| -> Result<Iri> {
                    match t {
                        Tok::IriRef(iri) => {
                            let iri = match base {
                                Some(b) if !iri.contains(':') => format!("{b}{iri}"),
                                _ => iri,
                            };
                            make_iri(iri, tok)
                        }
                        Tok::PName(prefix, local) => {
                            let ns = prefixes.get(&prefix).ok_or_else(|| {
                                syntax(tok.line, tok.column, format!("undeclared prefix '{prefix}:'"))
                            })?;
                            make_iri(format!("{ns}{local}"), tok)
                        }
                        _ => Err(syntax(tok.line, tok.column, "expected datatype IRI")),
                    }
                };
                Ok(Term::Literal(literal_suffix(&mut self.stream, lexical, &resolve)?))
            }
            Tok::Number(text, datatype) => Ok(Term::Literal(Literal::typed(text, Iri::new(datatype)?))),
            Tok::Boolean(b) => Ok(Term::Literal(Literal::typed(
                b.to_string(),
                Iri::new(vocab::XSD_BOOLEAN)?,
            ))),
            _ => Ok(Term::Iri(self.iri_term(token)?)),
        }
    }
}
