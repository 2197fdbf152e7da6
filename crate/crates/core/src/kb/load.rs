//! Triple store loader.
//!
//! Two line formats are supported, selected by a flag:
//!
//! - [`KbFormat::Tsv`]: three tab-separated fields per line. Objects
//!   wrapped in double quotes are literals, everything else is a URI.
//! - [`KbFormat::NTriples`]: whitespace-separated `<uri>` terms and
//!   `"literal"` objects with an optional trailing `.`.
//!
//! Both formats accept `@prefix name: expansion` declarations and `#`
//! comment lines. Prefixed names (`dbr:New_York`) are kept verbatim
//! unless their prefix was declared, in which case they are expanded so
//! that prefixed and absolute spellings unify.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};

use crate::error::StoreError;

use super::{Term, Triple, TripleStore};

/// Input format flag for [`load_triples`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KbFormat {
    #[default]
    Tsv,
    NTriples,
}

/// Parses triples from `source` and builds an indexed store. Duplicate
/// lines collapse to a single triple; an empty source yields a valid
/// empty store.
pub fn load_triples(source: impl Read, format: KbFormat) -> Result<TripleStore, StoreError> {
    let reader = BufReader::new(source);
    let mut prefixes: BTreeMap<String, String> = BTreeMap::new();
    let mut triples = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("@prefix") {
            let (name, expansion) = parse_prefix(rest, line_no)?;
            prefixes.insert(name, expansion);
            continue;
        }
        let triple = match format {
            KbFormat::Tsv => parse_tsv_line(trimmed, line_no, &prefixes)?,
            KbFormat::NTriples => parse_nt_line(trimmed, line_no, &prefixes)?,
        };
        triples.push(triple);
    }

    let mut store = TripleStore::from_triples(triples);
    store.set_prefixes(prefixes);
    Ok(store)
}

fn parse_prefix(rest: &str, line: usize) -> Result<(String, String), StoreError> {
    // "@prefix dbr: http://dbpedia.org/resource/"
    let rest = rest.trim().trim_end_matches('.').trim();
    let mut parts = rest.split_whitespace();
    let name = parts.next().ok_or(StoreError::MalformedPrefix { line })?;
    let expansion = parts.next().ok_or(StoreError::MalformedPrefix { line })?;
    let name = name
        .strip_suffix(':')
        .ok_or(StoreError::MalformedPrefix { line })?;
    let expansion = expansion.trim_start_matches('<').trim_end_matches('>');
    if name.is_empty() || expansion.is_empty() {
        return Err(StoreError::MalformedPrefix { line });
    }
    Ok((name.to_string(), expansion.to_string()))
}

fn expand(token: &str, prefixes: &BTreeMap<String, String>) -> String {
    if let Some((prefix, local)) = token.split_once(':') {
        if let Some(expansion) = prefixes.get(prefix) {
            return format!("{expansion}{local}");
        }
    }
    token.to_string()
}

fn parse_tsv_line(
    line: &str,
    line_no: usize,
    prefixes: &BTreeMap<String, String>,
) -> Result<Triple, StoreError> {
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
        return Err(StoreError::MalformedLine {
            line: line_no,
            reason: format!("expected 3 tab-separated fields, got {}", fields.len()),
        });
    }
    let object = if fields[2].starts_with('"') {
        if fields[2].len() < 2 || !fields[2].ends_with('"') {
            return Err(StoreError::MalformedLine {
                line: line_no,
                reason: "unterminated literal".into(),
            });
        }
        Term::literal(&fields[2][1..fields[2].len() - 1])
    } else {
        Term::uri(expand(fields[2], prefixes))
    };
    Ok(Triple::new(
        expand(fields[0], prefixes),
        expand(fields[1], prefixes),
        object,
    ))
}

fn parse_nt_line(
    line: &str,
    line_no: usize,
    prefixes: &BTreeMap<String, String>,
) -> Result<Triple, StoreError> {
    let line = line.trim_end_matches('.').trim_end();
    let malformed = |reason: &str| StoreError::MalformedLine {
        line: line_no,
        reason: reason.into(),
    };

    let mut rest = line;
    let mut terms: Vec<String> = Vec::new();
    let mut literal: Option<String> = None;
    while !rest.is_empty() {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        if let Some(stripped) = rest.strip_prefix('<') {
            let end = stripped
                .find('>')
                .ok_or_else(|| malformed("unclosed <uri>"))?;
            terms.push(stripped[..end].to_string());
            rest = &stripped[end + 1..];
        } else if let Some(stripped) = rest.strip_prefix('"') {
            let end = stripped
                .find('"')
                .ok_or_else(|| malformed("unterminated literal"))?;
            if terms.len() != 2 {
                return Err(malformed("literal allowed only in object position"));
            }
            literal = Some(stripped[..end].to_string());
            rest = &stripped[end + 1..];
        } else {
            // bare token (prefixed name)
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            terms.push(expand(&rest[..end], prefixes));
            rest = &rest[end..];
        }
    }

    match (terms.len(), literal) {
        (3, None) => Ok(Triple::new(
            terms[0].clone(),
            terms[1].clone(),
            Term::uri(terms[2].clone()),
        )),
        (2, Some(lit)) => Ok(Triple::new(
            terms[0].clone(),
            terms[1].clone(),
            Term::literal(lit),
        )),
        (n, _) => Err(malformed(&format!("expected 3 terms, got {n}"))),
    }
}
