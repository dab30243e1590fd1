//! On-disk model format: a line-oriented text form and a JSON mirror.
//!
//! ```text
//! # comment
//! vocab
//! pred P1 1
//! pred R1 2
//! func F 2
//! end
//! universe 3
//! rel P1: 0 2
//! rel R1: 0,1 1,2
//! fun F: (0,0)->0
//! ...
//! ```
//!
//! Tuples on a `rel` line are comma-separated index groups; `fun` rows carry
//! one argument tuple each and every function must be total. The same content
//! is accepted and emitted as JSON for tooling; see [`model_from_json`].

use crate::model::{Model, ModelError, Vocabulary};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error("function {symbol} is not total: no row for {args:?}")]
    NotTotal { symbol: String, args: Vec<usize> },
    #[error("invalid structured model: {0}")]
    Json(String),
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

fn semantic(line: usize, err: ModelError) -> FormatError {
    FormatError::Semantic {
        line,
        msg: err.to_string(),
    }
}

/// Splits a line into whitespace-separated tokens with 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_index(lineno: usize, col: usize, text: &str) -> Result<usize, FormatError> {
    text.parse::<usize>()
        .map_err(|_| syntax(lineno, col, format!("expected an index, found `{text}`")))
}

fn parse_tuple(lineno: usize, col: usize, text: &str) -> Result<Vec<usize>, FormatError> {
    text.split(',')
        .map(|part| parse_index(lineno, col, part.trim()))
        .collect()
}

/// Parses the line-oriented text format into a model.
///
/// Rejects syntax errors (with line and column), unknown symbols, arity
/// mismatches, duplicate function rows, and non-total functions. Indices
/// beyond the declared universe are accepted here and reported by
/// [`Model::validate`].
pub fn parse_model(text: &str) -> Result<Model, FormatError> {
    enum State {
        ExpectVocab,
        InVocab,
        ExpectUniverse,
        Body,
    }
    let mut state = State::ExpectVocab;
    let mut preds: Vec<(String, usize)> = Vec::new();
    let mut funcs: Vec<(String, usize)> = Vec::new();
    let mut vocab_line = 0usize;
    let mut model: Option<Model> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        let (col0, head) = toks[0];
        match state {
            State::ExpectVocab => {
                if head != "vocab" || toks.len() != 1 {
                    return Err(syntax(lineno, col0, "expected `vocab`"));
                }
                vocab_line = lineno;
                state = State::InVocab;
            }
            State::InVocab => match head {
                "pred" | "func" => {
                    if toks.len() != 3 {
                        return Err(syntax(
                            lineno,
                            col0,
                            format!("`{head} NAME ARITY` expected"),
                        ));
                    }
                    let name = toks[1].1.to_string();
                    let arity = parse_index(lineno, toks[2].0, toks[2].1)?;
                    if head == "pred" {
                        preds.push((name, arity));
                    } else {
                        funcs.push((name, arity));
                    }
                }
                "end" => state = State::ExpectUniverse,
                _ => {
                    return Err(syntax(
                        lineno,
                        col0,
                        "expected `pred`, `func`, or `end` inside the vocab block",
                    ))
                }
            },
            State::ExpectUniverse => {
                if head != "universe" || toks.len() != 2 {
                    return Err(syntax(lineno, col0, "expected `universe N`"));
                }
                let n = parse_index(lineno, toks[1].0, toks[1].1)?;
                let vocab = Vocabulary::new(std::mem::take(&mut preds), std::mem::take(&mut funcs))
                    .map_err(|e| semantic(vocab_line, e))?;
                model = Some(Model::new(vocab, n).map_err(|e| semantic(lineno, e))?);
                state = State::Body;
            }
            State::Body => {
                let m = model.as_mut().unwrap();
                match head {
                    "rel" => {
                        if toks.len() < 2 || !toks[1].1.ends_with(':') {
                            return Err(syntax(lineno, col0, "expected `rel NAME: tuples...`"));
                        }
                        let name = toks[1].1.trim_end_matches(':');
                        if name.is_empty() {
                            return Err(syntax(lineno, toks[1].0, "missing relation name"));
                        }
                        for &(col, tok) in &toks[2..] {
                            let tuple = parse_tuple(lineno, col, tok)?;
                            m.add_tuple(name, tuple).map_err(|e| semantic(lineno, e))?;
                        }
                        if toks.len() == 2 && m.vocab().predicate(name).is_none() {
                            return Err(semantic(
                                lineno,
                                ModelError::UnknownSymbol {
                                    kind: crate::model::SymbolKind::Predicate,
                                    name: name.to_string(),
                                },
                            ));
                        }
                    }
                    "fun" => {
                        if toks.len() != 3 || !toks[1].1.ends_with(':') {
                            return Err(syntax(lineno, col0, "expected `fun NAME: (args)->val`"));
                        }
                        let name = toks[1].1.trim_end_matches(':');
                        let (col, row) = toks[2];
                        let (args_text, val_text) = row
                            .split_once("->")
                            .ok_or_else(|| syntax(lineno, col, "expected `(args)->val`"))?;
                        let args_text = args_text
                            .strip_prefix('(')
                            .and_then(|s| s.strip_suffix(')'))
                            .ok_or_else(|| {
                                syntax(lineno, col, "arguments must be parenthesized")
                            })?;
                        let args = parse_tuple(lineno, col, args_text)?;
                        let value = parse_index(lineno, col, val_text)?;
                        if m.function(name).is_some_and(|t| t.contains_key(&args)) {
                            return Err(FormatError::Semantic {
                                line: lineno,
                                msg: format!("duplicate row for {name}{args:?}"),
                            });
                        }
                        m.set_value(name, args, value)
                            .map_err(|e| semantic(lineno, e))?;
                    }
                    _ => {
                        return Err(syntax(lineno, col0, "expected `rel` or `fun`"));
                    }
                }
            }
        }
    }

    let model = match (state, model) {
        (State::Body, Some(m)) => m,
        _ => {
            return Err(syntax(
                text.lines().count() + 1,
                1,
                "incomplete model: vocab block and `universe N` are required",
            ))
        }
    };
    for v in model.validate() {
        if let crate::model::Violation::FunctionRowMissing { symbol, args } = v {
            return Err(FormatError::NotTotal { symbol, args });
        }
    }
    Ok(model)
}

/// Renders a model in the text format. `parse_model` inverts this exactly.
pub fn serialize_model(m: &Model) -> String {
    serialize_model_impl(m, &[])
}

/// As [`serialize_model`], prefixed with comment lines naming each point.
pub fn serialize_model_with_names(m: &Model, names: &[String]) -> String {
    serialize_model_impl(m, names)
}

fn serialize_model_impl(m: &Model, names: &[String]) -> String {
    let mut out = String::new();
    for (i, name) in names.iter().enumerate() {
        let _ = writeln!(out, "# point {i} = {name}");
    }
    out.push_str("vocab\n");
    for s in m.vocab().predicates() {
        let _ = writeln!(out, "pred {} {}", s.name, s.arity);
    }
    for s in m.vocab().functions() {
        let _ = writeln!(out, "func {} {}", s.name, s.arity);
    }
    out.push_str("end\n");
    let _ = writeln!(out, "universe {}", m.size());
    for s in m.vocab().predicates() {
        let _ = write!(out, "rel {}:", s.name);
        for tuple in m.relation(&s.name).unwrap() {
            let parts: Vec<String> = tuple.iter().map(|i| i.to_string()).collect();
            let _ = write!(out, " {}", parts.join(","));
        }
        out.push('\n');
    }
    for s in m.vocab().functions() {
        for (args, v) in m.function(&s.name).unwrap() {
            let parts: Vec<String> = args.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "fun {}: ({})->{}", s.name, parts.join(","), v);
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    predicates: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    vocab: VocabRepr,
    universe: usize,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    functions: BTreeMap<String, Vec<(Vec<usize>, usize)>>,
}

/// Emits the JSON mirror of the text format.
pub fn model_to_json(m: &Model) -> String {
    let repr = ModelRepr {
        vocab: VocabRepr {
            predicates: m
                .vocab()
                .predicates()
                .iter()
                .map(|s| (s.name.clone(), s.arity))
                .collect(),
            functions: m
                .vocab()
                .functions()
                .iter()
                .map(|s| (s.name.clone(), s.arity))
                .collect(),
        },
        universe: m.size(),
        relations: m
            .vocab()
            .predicates()
            .iter()
            .map(|s| (s.name.clone(), m.relation(&s.name).unwrap().clone()))
            .collect(),
        functions: m
            .vocab()
            .functions()
            .iter()
            .map(|s| {
                let rows = m
                    .function(&s.name)
                    .unwrap()
                    .iter()
                    .map(|(a, &v)| (a.clone(), v))
                    .collect();
                (s.name.clone(), rows)
            })
            .collect(),
    };
    serde_json::to_string_pretty(&repr).expect("model serialization cannot fail")
}

/// Parses the JSON mirror, with the same acceptance rules as the text form.
pub fn model_from_json(text: &str) -> Result<Model, FormatError> {
    let repr: ModelRepr =
        serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    let vocab = Vocabulary::new(repr.vocab.predicates, repr.vocab.functions)
        .map_err(|e| FormatError::Json(e.to_string()))?;
    let mut m = Model::new(vocab, repr.universe).map_err(|e| FormatError::Json(e.to_string()))?;
    for (name, tuples) in repr.relations {
        for t in tuples {
            m.add_tuple(&name, t)
                .map_err(|e| FormatError::Json(e.to_string()))?;
        }
    }
    for (name, rows) in repr.functions {
        for (args, v) in rows {
            m.set_value(&name, args, v)
                .map_err(|e| FormatError::Json(e.to_string()))?;
        }
    }
    for v in m.validate() {
        if let crate::model::Violation::FunctionRowMissing { symbol, args } = v {
            return Err(FormatError::NotTotal { symbol, args });
        }
    }
    Ok(m)
}

/// Accepts either the text format or its JSON mirror, sniffing the content.
pub fn parse_model_auto(text: &str) -> Result<Model, FormatError> {
    if text.trim_start().starts_with('{') {
        model_from_json(text)
    } else {
        parse_model(text)
    }
}
