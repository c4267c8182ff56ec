//! Reader and writer for the Turtle subset used by model files.
//!
//! Supported: `@prefix`, prefixed names and `<IRI>`s, `a`, `;` and `,`
//! lists, `#` comments, typed and plain string literals, bare integers,
//! decimals and booleans, and exactly one blank-node form:
//!
//! ```text
//! S rdfs:subClassOf [ owl:onProperty P ; owl:someValuesFrom C ] .
//! ```
//!
//! which records `∃P.C ⊑ S`. Anything else is rejected with
//! [`KbError::UnsupportedConstruct`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::KbError;
use crate::iri::Iri;
use crate::kb::{Assertion, Axiom, AxiomKind, KnowledgeBase, TermKind};
use crate::literal::{Datatype, Literal};
use crate::vocab::{owl, rdf, rdfs, xsd};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    PrefixDirective,
    IriRef(String),
    /// `prefix:local`, prefix possibly empty
    Name(String, String),
    A,
    Str(String),
    Carets,
    Bare(String, Datatype),
    Dot,
    Semicolon,
    Comma,
    Open,
    Close,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> KbError {
    KbError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn unsupported(what: impl Into<String>) -> KbError {
    KbError::UnsupportedConstruct(what.into())
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')
}

/// Whether `local` can be written after `prefix:` without escaping.
pub fn is_plain_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn tokenize(mut self) -> Result<Vec<Token>, KbError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, column) = (self.line, self.column);
            let Some(&c) = self.chars.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    column,
                });
                return Ok(out);
            };
            let tok = match c {
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
                '[' => {
                    self.bump();
                    Tok::Open
                }
                ']' => {
                    self.bump();
                    Tok::Close
                }
                '(' | ')' => return Err(unsupported("RDF collection")),
                '{' | '}' => return Err(unsupported("formula / graph block")),
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(syntax(line, column, "expected `^^`"));
                    }
                    Tok::Carets
                }
                '<' => self.iri_ref(line, column)?,
                '"' => self.string(line, column)?,
                '\'' => return Err(unsupported("single-quoted literal")),
                '@' => {
                    self.bump();
                    let mut word = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '-' {
                            word.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match word.as_str() {
                        "prefix" => Tok::PrefixDirective,
                        "base" => return Err(unsupported("@base")),
                        _ => return Err(unsupported("language-tagged literal")),
                    }
                }
                c if c == '+' || c == '-' || c.is_ascii_digit() => self.number(line, column)?,
                c if is_name_char(c) => {
                    let (tok, trailing_dots) = self.word(line, column)?;
                    out.push(Token { tok, line, column });
                    for _ in 0..trailing_dots {
                        out.push(Token {
                            tok: Tok::Dot,
                            line: self.line,
                            column: self.column - 1,
                        });
                    }
                    continue;
                }
                other => return Err(syntax(line, column, format!("unexpected character `{other}`"))),
            };
            out.push(Token { tok, line, column });
        }
    }

    fn iri_ref(&mut self, line: usize, column: usize) -> Result<Tok, KbError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() || c == '<' || c == '"' || c == '\\' => {
                    return Err(syntax(line, column, format!("illegal character `{c:?}` in IRI")));
                }
                Some(c) => value.push(c),
                None => return Err(syntax(line, column, "unterminated IRI")),
            }
        }
        Ok(Tok::IriRef(value))
    }

    fn string(&mut self, line: usize, column: usize) -> Result<Tok, KbError> {
        self.bump();
        if self.chars.peek() == Some(&'"') {
            self.bump();
            if self.chars.peek() == Some(&'"') {
                return Err(unsupported("long string literal"));
            }
            return Ok(Tok::Str(String::new()));
        }
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\n') | None => return Err(syntax(line, column, "unterminated string")),
                Some('\\') => {
                    let escaped = match self.bump() {
                        Some('t') => '\t',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some(u @ ('u' | 'U')) => {
                            let width = if u == 'u' { 4 } else { 8 };
                            let hex: String = (0..width).filter_map(|_| self.bump()).collect();
                            u32::from_str_radix(&hex, 16)
                                .ok()
                                .filter(|_| hex.len() == width)
                                .and_then(char::from_u32)
                                .ok_or_else(|| syntax(self.line, self.column, "bad unicode escape"))?
                        }
                        _ => return Err(syntax(self.line, self.column, "bad escape sequence")),
                    };
                    value.push(escaped);
                }
                Some(c) => value.push(c),
            }
        }
        Ok(Tok::Str(value))
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Tok, KbError> {
        let mut text = String::new();
        if let Some(&c) = self.chars.peek() {
            if c == '+' || c == '-' {
                text.push(c);
                self.bump();
            }
        }
        let mut seen_dot = false;
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                self.bump();
            } else if c == '.' && !seen_dot {
                // a dot only belongs to the number when a digit follows
                let mut ahead = self.chars.clone();
                ahead.next();
                if ahead.peek().is_some_and(|d| d.is_ascii_digit()) {
                    seen_dot = true;
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            } else if c == 'e' || c == 'E' {
                return Err(unsupported("xsd:double literal"));
            } else {
                break;
            }
        }
        if !text.chars().any(|c| c.is_ascii_digit()) {
            return Err(syntax(line, column, "malformed number"));
        }
        let datatype = if seen_dot {
            Datatype::Decimal
        } else {
            Datatype::Integer
        };
        Ok(Tok::Bare(text, datatype))
    }

    fn word(&mut self, line: usize, column: usize) -> Result<(Tok, usize), KbError> {
        let mut word = String::new();
        while let Some(&c) = self.chars.peek() {
            if is_name_char(c) {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        // trailing dots terminate the statement, they are not part of the name
        let mut trailing = 0;
        while word.ends_with('.') {
            word.pop();
            trailing += 1;
        }
        let tok = match word.split_once(':') {
            Some((prefix, local)) => {
                if prefix == "_" {
                    return Err(unsupported("blank node label"));
                }
                Tok::Name(prefix.to_string(), local.to_string())
            }
            None => match word.as_str() {
                "a" => Tok::A,
                "true" | "false" => Tok::Bare(word.clone(), Datatype::Boolean),
                "PREFIX" | "BASE" | "prefix" | "base" => {
                    return Err(unsupported("SPARQL-style directive"))
                }
                _ => return Err(syntax(line, column, format!("unexpected word `{word}`"))),
            },
        };
        Ok((tok, trailing))
    }
}

/// Object position of a parsed statement.
enum Object {
    Iri(Iri),
    Literal(Literal),
    Restriction { property: Iri, filler: Iri },
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    kb: KnowledgeBase,
    explicit_kinds: BTreeMap<Iri, TermKind>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), KbError> {
        let token = self.next();
        if token.tok == tok {
            Ok(())
        } else {
            Err(syntax(token.line, token.column, format!("expected {what}, found {:?}", token.tok)))
        }
    }

    fn resolve(&self, token: &Token) -> Result<Iri, KbError> {
        match &token.tok {
            Tok::IriRef(value) => Iri::new(value)
                .map_err(|_| syntax(token.line, token.column, format!("invalid IRI <{value}>"))),
            Tok::Name(prefix, local) => {
                let ns = self.kb.prefixes().get(prefix).ok_or_else(|| {
                    syntax(token.line, token.column, format!("undeclared prefix `{prefix}:`"))
                })?;
                Iri::new(format!("{ns}{local}")).map_err(|_| {
                    syntax(token.line, token.column, format!("invalid IRI {prefix}:{local}"))
                })
            }
            Tok::A => Ok(rdf::TYPE.clone()),
            other => Err(syntax(token.line, token.column, format!("expected IRI, found {other:?}"))),
        }
    }

    fn document(mut self) -> Result<KnowledgeBase, KbError> {
        loop {
            match self.peek().tok {
                Tok::Eof => break,
                Tok::PrefixDirective => self.prefix()?,
                Tok::Open => return Err(unsupported("blank node subject")),
                _ => self.statement()?,
            }
        }
        for (iri, kind) in std::mem::take(&mut self.explicit_kinds) {
            self.kb.set_kind(&iri, kind);
        }
        Ok(self.kb)
    }

    fn prefix(&mut self) -> Result<(), KbError> {
        self.next();
        let name_token = self.next();
        let Tok::Name(name, local) = &name_token.tok else {
            return Err(syntax(name_token.line, name_token.column, "expected prefix name"));
        };
        if !local.is_empty() {
            return Err(syntax(name_token.line, name_token.column, "prefix name must end with `:`"));
        }
        let iri_token = self.next();
        let Tok::IriRef(ns) = &iri_token.tok else {
            return Err(syntax(iri_token.line, iri_token.column, "expected namespace IRI"));
        };
        self.kb.bind_prefix(name.clone(), ns.clone());
        self.expect(Tok::Dot, "`.` after @prefix")
    }

    fn statement(&mut self) -> Result<(), KbError> {
        let subject_token = self.next();
        if subject_token.tok == Tok::A {
            return Err(syntax(subject_token.line, subject_token.column, "`a` cannot be a subject"));
        }
        let subject = self.resolve(&subject_token)?;
        loop {
            let verb_token = self.next();
            let verb = self.resolve(&verb_token)?;
            loop {
                let object = self.object(&verb)?;
                self.apply(&subject, &verb, object, &verb_token)?;
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            match self.peek().tok {
                Tok::Semicolon => {
                    while self.peek().tok == Tok::Semicolon {
                        self.next();
                    }
                    if self.peek().tok == Tok::Dot {
                        break;
                    }
                }
                _ => break,
            }
        }
        self.expect(Tok::Dot, "`.` at end of statement")
    }

    fn object(&mut self, verb: &Iri) -> Result<Object, KbError> {
        let token = self.next();
        match &token.tok {
            Tok::Open => {
                if verb != &*rdfs::SUB_CLASS_OF {
                    return Err(unsupported("blank node outside the subClassOf restriction pattern"));
                }
                self.restriction()
            }
            Tok::Str(value) => {
                let value = value.clone();
                if self.peek().tok == Tok::Carets {
                    self.next();
                    let dt_token = self.next();
                    let dt_iri = self.resolve(&dt_token)?;
                    let datatype = Datatype::from_iri(&dt_iri)
                        .ok_or_else(|| unsupported(format!("datatype <{dt_iri}>")))?;
                    let literal = Literal::new(value, datatype).map_err(|e| {
                        syntax(token.line, token.column, e.to_string())
                    })?;
                    Ok(Object::Literal(literal))
                } else {
                    Ok(Object::Literal(Literal::string(value)))
                }
            }
            Tok::Bare(text, datatype) => Literal::new(text.clone(), *datatype)
                .map(Object::Literal)
                .map_err(|e| syntax(token.line, token.column, e.to_string())),
            _ => Ok(Object::Iri(self.resolve(&token)?)),
        }
    }

    fn restriction(&mut self) -> Result<Object, KbError> {
        let mut property = None;
        let mut filler = None;
        loop {
            if self.peek().tok == Tok::Close {
                self.next();
                break;
            }
            let key_token = self.next();
            let key = self.resolve(&key_token)?;
            let value_token = self.next();
            let value = self.resolve(&value_token)?;
            if key == *rdf::TYPE && value == *owl::RESTRICTION {
                // optional `a owl:Restriction`
            } else if key == *owl::ON_PROPERTY && property.is_none() {
                property = Some(value);
            } else if key == *owl::SOME_VALUES_FROM && filler.is_none() {
                filler = Some(value);
            } else {
                return Err(unsupported(format!(
                    "restriction member {}",
                    self.kb.compact(&key)
                )));
            }
            match self.peek().tok {
                Tok::Semicolon => {
                    self.next();
                }
                Tok::Close => {}
                _ => {
                    let t = self.peek();
                    return Err(syntax(t.line, t.column, "expected `;` or `]` in restriction"));
                }
            }
        }
        match (property, filler) {
            (Some(property), Some(filler)) => Ok(Object::Restriction { property, filler }),
            _ => Err(unsupported(
                "restriction without both owl:onProperty and owl:someValuesFrom",
            )),
        }
    }

    fn declare(&mut self, iri: &Iri, kind: TermKind) {
        self.explicit_kinds.insert(iri.clone(), kind);
        self.kb.declare(iri, kind);
    }

    fn apply(&mut self, subject: &Iri, verb: &Iri, object: Object, at: &Token) -> Result<(), KbError> {
        let in_reserved = |iri: &Iri| {
            [rdf::NS, rdfs::NS, owl::NS, xsd::NS]
                .iter()
                .any(|ns| iri.as_str().starts_with(ns))
        };
        let need_iri = |object: Object| -> Result<Iri, KbError> {
            match object {
                Object::Iri(i) => Ok(i),
                _ => Err(syntax(at.line, at.column, "expected an IRI object")),
            }
        };
        if verb == &*rdf::TYPE {
            let class = need_iri(object)?;
            let kind = if class == *owl::CLASS || class == *rdfs::CLASS {
                Some(TermKind::Class)
            } else if class == *owl::OBJECT_PROPERTY || class == *rdf::PROPERTY {
                Some(TermKind::ObjectProperty)
            } else if class == *owl::DATATYPE_PROPERTY {
                Some(TermKind::DataProperty)
            } else if class == *owl::NAMED_INDIVIDUAL {
                Some(TermKind::Individual)
            } else if in_reserved(&class) {
                return Err(unsupported(format!("rdf:type {}", self.kb.compact(&class))));
            } else {
                None
            };
            match kind {
                Some(kind) => self.declare(subject, kind),
                None => {
                    self.kb.assert(Assertion::typed(subject, &class));
                }
            }
        } else if verb == &*rdfs::SUB_CLASS_OF {
            match object {
                Object::Iri(o) => {
                    self.kb.add_axiom(Axiom::sub_class_of(subject.clone(), o));
                }
                Object::Restriction { property, filler } => {
                    self.kb.add_axiom(Axiom::existential(subject.clone(), property, filler));
                }
                Object::Literal(_) => {
                    return Err(syntax(at.line, at.column, "rdfs:subClassOf needs a class"))
                }
            }
        } else if verb == &*owl::EQUIVALENT_CLASS {
            let o = need_iri(object)?;
            self.kb.add_axiom(Axiom::equivalent_class(subject.clone(), o));
        } else if verb == &*rdfs::SUB_PROPERTY_OF {
            let o = need_iri(object)?;
            self.kb.add_axiom(Axiom::sub_property_of(subject.clone(), o));
        } else if in_reserved(verb) {
            return Err(unsupported(format!("predicate {}", self.kb.compact(verb))));
        } else {
            match object {
                Object::Iri(o) => {
                    self.kb.assert(Assertion::link(subject, verb, &o));
                }
                Object::Literal(l) => {
                    self.kb.assert(Assertion::data(subject, verb, l));
                }
                Object::Restriction { .. } => unreachable!("restriction only parsed for subClassOf"),
            }
        }
        Ok(())
    }
}

/// Parses a Turtle-subset document into a fresh knowledge base.
pub fn parse_turtle(text: &str) -> Result<KnowledgeBase, KbError> {
    let tokens = Lexer::new(text).tokenize()?;
    Parser {
        tokens,
        pos: 0,
        kb: KnowledgeBase::new(),
        explicit_kinds: BTreeMap::new(),
    }
    .document()
}

/// Parses `text` and merges it into `kb`.
pub fn load_into(kb: &mut KnowledgeBase, text: &str) -> Result<(), KbError> {
    let parsed = parse_turtle(text)?;
    kb.merge(&parsed)
}

fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_literal(kb: &KnowledgeBase, literal: &Literal) -> String {
    format!(
        "{}^^{}",
        escape(literal.lexical()),
        kb.compact(&literal.datatype().iri())
    )
}

/// Writes `kb` as a Turtle-subset document. Statements are grouped by
/// subject and sorted, so equal knowledge bases produce identical text.
pub fn serialize_turtle(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for (name, ns) in kb.prefixes() {
        let _ = writeln!(out, "@prefix {name}: <{ns}> .");
    }

    let mut groups: BTreeMap<&Iri, Vec<(String, String)>> = BTreeMap::new();
    let a = "a".to_string();
    for (iri, kind) in kb.vocabulary() {
        let class = match kind {
            TermKind::Class => &*owl::CLASS,
            TermKind::ObjectProperty => &*owl::OBJECT_PROPERTY,
            TermKind::DataProperty => &*owl::DATATYPE_PROPERTY,
            TermKind::Individual => &*owl::NAMED_INDIVIDUAL,
        };
        groups
            .entry(iri)
            .or_default()
            .push((a.clone(), kb.compact(class)));
    }
    for axiom in kb.axioms() {
        let (verb, object) = match axiom.kind() {
            AxiomKind::SubClassOf => (&*rdfs::SUB_CLASS_OF, kb.compact(axiom.object())),
            AxiomKind::EquivalentClass => (&*owl::EQUIVALENT_CLASS, kb.compact(axiom.object())),
            AxiomKind::SubPropertyOf => (&*rdfs::SUB_PROPERTY_OF, kb.compact(axiom.object())),
            AxiomKind::ExistentialRestrictionSubClass => (
                &*rdfs::SUB_CLASS_OF,
                format!(
                    "[ {} {} ; {} {} ]",
                    kb.compact(&owl::ON_PROPERTY),
                    kb.compact(axiom.on_property().expect("existential axiom has a property")),
                    kb.compact(&owl::SOME_VALUES_FROM),
                    kb.compact(axiom.object()),
                ),
            ),
        };
        groups
            .entry(axiom.subject())
            .or_default()
            .push((kb.compact(verb), object));
    }
    let assertions: Vec<Assertion> = kb.assertions().collect();
    for assertion in &assertions {
        let entry = match assertion {
            Assertion::Type { class, .. } => (a.clone(), kb.compact(class)),
            Assertion::ObjectLink {
                property, object, ..
            } => (kb.compact(property), kb.compact(object)),
            Assertion::DataLink {
                property, literal, ..
            } => (kb.compact(property), write_literal(kb, literal)),
        };
        groups.entry(assertion.subject()).or_default().push(entry);
    }

    for (subject, mut entries) in groups {
        entries.sort();
        out.push('\n');
        out.push_str(&kb.compact(subject));
        let last = entries.len() - 1;
        for (i, (verb, object)) in entries.iter().enumerate() {
            let sep = if i == last { " ." } else { " ;" };
            if i == 0 {
                let _ = writeln!(out, " {verb} {object}{sep}");
            } else {
                let _ = writeln!(out, "    {verb} {object}{sep}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::aur;

    const HEAD: &str = "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n\
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
        @prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
        @prefix aur: <https://w3id.org/aur/core#> .\n";

    #[test]
    fn empty_document() {
        let kb = parse_turtle("").unwrap();
        assert_eq!(kb.axiom_count(), 0);
        assert_eq!(kb.assertion_count(), 0);
    }

    #[test]
    fn subclass_statement() {
        let kb = parse_turtle(&format!("{HEAD}aur:AutonomousRobot rdfs:subClassOf aur:Robot .")).unwrap();
        assert_eq!(kb.axiom_count(), 1);
        assert!(kb.contains_axiom(&Axiom::sub_class_of(
            aur::AUTONOMOUS_ROBOT.clone(),
            aur::ROBOT.clone()
        )));
    }

    #[test]
    fn restriction_pattern_and_lists() {
        let text = format!(
            "{HEAD}aur:AutonomousRobot rdfs:subClassOf [ a owl:Restriction ; owl:onProperty aur:consistsOf ; owl:someValuesFrom aur:Platform ] , aur:Robot .\n\
             aur:q1 a aur:Robot ; aur:robotPart aur:rotor1, aur:cam1 ; aur:positionX \"1.5\"^^xsd:decimal ; aur:count 4 ; aur:flag true .\n"
        );
        let kb = parse_turtle(&text).unwrap();
        assert_eq!(kb.axiom_count(), 2);
        assert_eq!(kb.assertion_count(), 6);
        assert!(kb.contains_axiom(&Axiom::existential(
            aur::AUTONOMOUS_ROBOT.clone(),
            aur::CONSISTS_OF.clone(),
            aur::PLATFORM.clone()
        )));
    }

    #[test]
    fn statement_ending_directly_after_name() {
        let kb = parse_turtle(&format!("{HEAD}aur:A rdfs:subClassOf aur:B.\naur:C rdfs:subClassOf aur:D.")).unwrap();
        assert_eq!(kb.axiom_count(), 2);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_turtle(&format!("{HEAD}aur:A rdfs:subClassOf aur:B\naur:C a aur:D .")).unwrap_err();
        match err {
            KbError::Syntax { line, .. } => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_turtle("nope:A nope:b nope:C ."),
            Err(KbError::Syntax { line: 1, column: 1, .. })
        ));
        assert!(matches!(
            parse_turtle(&format!("{HEAD}aur:A aur:p \"abc .")),
            Err(KbError::Syntax { .. })
        ));
    }

    #[test]
    fn unsupported_constructs() {
        for body in [
            "aur:A rdfs:label \"x\" .",
            "aur:A owl:disjointWith aur:B .",
            "aur:A a owl:Restriction .",
            "aur:A aur:p ( aur:B ) .",
            "_:b aur:p aur:C .",
            "aur:A aur:p \"x\"@en .",
            "aur:A aur:p \"x\"^^xsd:dateTime .",
            "aur:A aur:p [ aur:q aur:C ] .",
            "[ owl:onProperty aur:p ; owl:someValuesFrom aur:C ] rdfs:subClassOf aur:A .",
            "aur:A rdfs:subClassOf [ owl:onProperty aur:p ] .",
            "aur:A aur:p 1.5e3 .",
        ] {
            let result = parse_turtle(&format!("{HEAD}{body}"));
            assert!(
                matches!(result, Err(KbError::UnsupportedConstruct(_))),
                "{body} -> {result:?}"
            );
        }
        assert!(matches!(
            parse_turtle("@base <http://x/> ."),
            Err(KbError::UnsupportedConstruct(_))
        ));
    }

    #[test]
    fn invalid_literal_is_syntax_error() {
        assert!(matches!(
            parse_turtle(&format!("{HEAD}aur:A aur:p \"ten\"^^xsd:integer .")),
            Err(KbError::Syntax { .. })
        ));
    }

    #[test]
    fn empty_kb_serializes_to_prefixes_only() {
        let text = serialize_turtle(&KnowledgeBase::new());
        assert!(text.lines().all(|l| l.starts_with("@prefix")));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn equivalence_axiom_serializes() {
        let mut kb = KnowledgeBase::with_model_prefixes();
        kb.add_axiom(Axiom::equivalent_class(
            crate::vocab::cask::SKILL.clone(),
            crate::vocab::ieee::FUNCTION_EXECUTION.clone(),
        ));
        let text = serialize_turtle(&kb);
        assert!(text.contains("\ncask:Skill a owl:Class ;\n    owl:equivalentClass ieee:FunctionExecution ."), "{text}");
        assert_eq!(parse_turtle(&text).unwrap(), kb);
    }

    #[test]
    fn escapes_roundtrip() {
        let mut kb = KnowledgeBase::with_model_prefixes();
        kb.assert(Assertion::data(
            &aur::ROBOT,
            &aur::POSITION_X,
            Literal::string("quote \" back \\ nl \n tab \t bell \u{7} é"),
        ));
        let text = serialize_turtle(&kb);
        assert_eq!(parse_turtle(&text).unwrap(), kb);
    }

    #[test]
    fn explicit_declaration_wins_over_inferred_kind() {
        let kb = parse_turtle(&format!(
            "{HEAD}aur:x aur:p aur:Thing .\naur:Thing a owl:Class ."
        ))
        .unwrap();
        assert_eq!(
            kb.term_kind(&Iri::new("https://w3id.org/aur/core#Thing").unwrap()),
            Some(TermKind::Class)
        );
    }
}
