//! Vocabularies, finite models, and classification of structure maps.
//!
//! A [`Model`] interprets a relational-functional [`Vocabulary`] over the
//! universe `0..n`. Relations are explicit tuple sets and functions are
//! explicit row maps, so a model can be held in an invalid state (missing
//! rows, out-of-range indices) and diagnosed with [`Model::validate`].

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("symbol name `{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("duplicate symbol name `{0}` in vocabulary")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` declared with arity 0; arities must be positive")]
    ZeroArity(String),
    #[error("unknown {kind} symbol `{name}`")]
    UnknownSymbol { kind: SymbolKind, name: String },
    #[error("symbol `{name}` has arity {expected}, got a tuple of length {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("universe size must be positive")]
    EmptyUniverse,
    #[error("map must cover the source universe: expected {expected} entries, got {got}")]
    MapNotTotal { expected: usize, got: usize },
    #[error("map value {value} out of range for target universe of size {size}")]
    MapOutOfRange { value: usize, size: usize },
    #[error("source and target vocabularies differ")]
    VocabularyMismatch,
    #[error("witnesses do not compose: inner target differs from outer source")]
    ComposeMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Predicate,
    Function,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Predicate => write!(f, "predicate"),
            SymbolKind::Function => write!(f, "function"),
        }
    }
}

fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A declared predicate or function symbol with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finite relational-functional signature. Equality is built in and is
/// never declared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    predicates: Vec<Symbol>,
    functions: Vec<Symbol>,
}

impl Vocabulary {
    pub fn new(
        predicates: Vec<(String, usize)>,
        functions: Vec<(String, usize)>,
    ) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        let mut check = |name: String, arity: usize| -> Result<Symbol, ModelError> {
            if !is_valid_name(&name) {
                return Err(ModelError::InvalidName(name));
            }
            if arity == 0 {
                return Err(ModelError::ZeroArity(name));
            }
            if !seen.insert(name.clone()) {
                return Err(ModelError::DuplicateSymbol(name));
            }
            Ok(Symbol { name, arity })
        };
        let predicates = predicates
            .into_iter()
            .map(|(n, a)| check(n, a))
            .collect::<Result<Vec<_>, _>>()?;
        let functions = functions
            .into_iter()
            .map(|(n, a)| check(n, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Vocabulary {
            predicates,
            functions,
        })
    }

    pub fn empty() -> Self {
        Vocabulary {
            predicates: Vec::new(),
            functions: Vec::new(),
        }
    }

    pub fn predicates(&self) -> &[Symbol] {
        &self.predicates
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn predicate(&self, name: &str) -> Option<&Symbol> {
        self.predicates.iter().find(|s| s.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Symbol> {
        self.functions.iter().find(|s| s.name == name)
    }

    /// Extends the vocabulary with one more predicate, keeping uniqueness.
    pub fn with_predicate(&self, name: &str, arity: usize) -> Result<Self, ModelError> {
        let mut preds: Vec<(String, usize)> = self
            .predicates
            .iter()
            .map(|s| (s.name.clone(), s.arity))
            .collect();
        preds.push((name.to_string(), arity));
        let funcs = self
            .functions
            .iter()
            .map(|s| (s.name.clone(), s.arity))
            .collect();
        Vocabulary::new(preds, funcs)
    }
}

/// One invariant violation found by [`Model::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    RelationOutOfRange {
        symbol: String,
        tuple: Vec<usize>,
    },
    FunctionValueOutOfRange {
        symbol: String,
        args: Vec<usize>,
        value: usize,
    },
    FunctionRowMissing {
        symbol: String,
        args: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RelationOutOfRange { symbol, tuple } => {
                write!(f, "relation {symbol}: tuple {tuple:?} out of range")
            }
            Violation::FunctionValueOutOfRange {
                symbol,
                args,
                value,
            } => {
                write!(
                    f,
                    "function {symbol}: value {value} at {args:?} out of range"
                )
            }
            Violation::FunctionRowMissing { symbol, args } => {
                write!(f, "function {symbol}: no row for {args:?}")
            }
        }
    }
}

/// A finite model over a [`Vocabulary`], with universe `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    vocab: Vocabulary,
    size: usize,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    functions: BTreeMap<String, BTreeMap<Vec<usize>, usize>>,
}

impl Model {
    pub fn new(vocab: Vocabulary, size: usize) -> Result<Self, ModelError> {
        if size == 0 {
            return Err(ModelError::EmptyUniverse);
        }
        let relations = vocab
            .predicates()
            .iter()
            .map(|s| (s.name.clone(), BTreeSet::new()))
            .collect();
        let functions = vocab
            .functions()
            .iter()
            .map(|s| (s.name.clone(), BTreeMap::new()))
            .collect();
        Ok(Model {
            vocab,
            size,
            relations,
            functions,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(name)
    }

    pub fn function(&self, name: &str) -> Option<&BTreeMap<Vec<usize>, usize>> {
        self.functions.get(name)
    }

    pub fn holds(&self, pred: &str, tuple: &[usize]) -> bool {
        self.relations
            .get(pred)
            .is_some_and(|set| set.contains(tuple))
    }

    pub fn value(&self, func: &str, args: &[usize]) -> Option<usize> {
        self.functions.get(func).and_then(|m| m.get(args)).copied()
    }

    pub fn add_tuple(&mut self, pred: &str, tuple: Vec<usize>) -> Result<(), ModelError> {
        let sym = self
            .vocab
            .predicate(pred)
            .ok_or_else(|| ModelError::UnknownSymbol {
                kind: SymbolKind::Predicate,
                name: pred.to_string(),
            })?;
        if tuple.len() != sym.arity {
            return Err(ModelError::ArityMismatch {
                name: pred.to_string(),
                expected: sym.arity,
                got: tuple.len(),
            });
        }
        self.relations.get_mut(pred).unwrap().insert(tuple);
        Ok(())
    }

    /// Replaces the whole tuple set of one relation.
    pub fn set_relation(
        &mut self,
        pred: &str,
        tuples: BTreeSet<Vec<usize>>,
    ) -> Result<(), ModelError> {
        let sym = self
            .vocab
            .predicate(pred)
            .ok_or_else(|| ModelError::UnknownSymbol {
                kind: SymbolKind::Predicate,
                name: pred.to_string(),
            })?;
        if let Some(t) = tuples.iter().find(|t| t.len() != sym.arity) {
            return Err(ModelError::ArityMismatch {
                name: pred.to_string(),
                expected: sym.arity,
                got: t.len(),
            });
        }
        *self.relations.get_mut(pred).unwrap() = tuples;
        Ok(())
    }

    pub fn set_value(
        &mut self,
        func: &str,
        args: Vec<usize>,
        value: usize,
    ) -> Result<(), ModelError> {
        let sym = self
            .vocab
            .function(func)
            .ok_or_else(|| ModelError::UnknownSymbol {
                kind: SymbolKind::Function,
                name: func.to_string(),
            })?;
        if args.len() != sym.arity {
            return Err(ModelError::ArityMismatch {
                name: func.to_string(),
                expected: sym.arity,
                got: args.len(),
            });
        }
        self.functions.get_mut(func).unwrap().insert(args, value);
        Ok(())
    }

    /// Checks ranges and function totality. Empty output means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for sym in self.vocab.predicates() {
            for tuple in &self.relations[&sym.name] {
                if tuple.iter().any(|&i| i >= self.size) {
                    out.push(Violation::RelationOutOfRange {
                        symbol: sym.name.clone(),
                        tuple: tuple.clone(),
                    });
                }
            }
        }
        for sym in self.vocab.functions() {
            let table = &self.functions[&sym.name];
            for args in index_tuples(self.size, sym.arity) {
                match table.get(&args) {
                    None => out.push(Violation::FunctionRowMissing {
                        symbol: sym.name.clone(),
                        args,
                    }),
                    Some(&v) if v >= self.size => out.push(Violation::FunctionValueOutOfRange {
                        symbol: sym.name.clone(),
                        args,
                        value: v,
                    }),
                    Some(_) => {}
                }
            }
            // Rows keyed by an out-of-range argument tuple are unreachable
            // from the enumeration above; flag them as range violations.
            for (args, &v) in table {
                if args.iter().any(|&i| i >= self.size) {
                    out.push(Violation::FunctionValueOutOfRange {
                        symbol: sym.name.clone(),
                        args: args.clone(),
                        value: v,
                    });
                }
            }
        }
        out
    }
}

/// Every tuple over `0..size` of the given arity, in lexicographic order.
pub(crate) fn index_tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    debug_assert!(size > 0);
    let mut out = Vec::with_capacity(size.pow(arity as u32));
    let mut cur = vec![0usize; arity];
    loop {
        out.push(cur.clone());
        let mut i = arity;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < size {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// A total map between the universes of two models in the same vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapWitness {
    source: Model,
    target: Model,
    map: Vec<usize>,
}

impl MapWitness {
    pub fn new(source: Model, target: Model, map: Vec<usize>) -> Result<Self, ModelError> {
        if map.len() != source.size() {
            return Err(ModelError::MapNotTotal {
                expected: source.size(),
                got: map.len(),
            });
        }
        if let Some(&v) = map.iter().find(|&&v| v >= target.size()) {
            return Err(ModelError::MapOutOfRange {
                value: v,
                size: target.size(),
            });
        }
        Ok(MapWitness {
            source,
            target,
            map,
        })
    }

    pub fn identity(m: &Model) -> Self {
        MapWitness {
            map: (0..m.size()).collect(),
            source: m.clone(),
            target: m.clone(),
        }
    }

    /// `second` after `first`; the inner target must equal the outer source.
    pub fn compose(second: &MapWitness, first: &MapWitness) -> Result<Self, ModelError> {
        if first.target != second.source {
            return Err(ModelError::ComposeMismatch);
        }
        let map = first.map.iter().map(|&i| second.map[i]).collect();
        MapWitness::new(first.source.clone(), second.target.clone(), map)
    }

    pub fn source(&self) -> &Model {
        &self.source
    }

    pub fn target(&self) -> &Model {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    fn apply_tuple(&self, tuple: &[usize]) -> Vec<usize> {
        tuple.iter().map(|&i| self.map[i]).collect()
    }
}

/// How a map relates two structures, from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Classification {
    NotHomomorphism,
    Homomorphism,
    Epimorphism,
    IsomorphicEmbedding,
    Isomorphism,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::NotHomomorphism => "not-homomorphism",
            Classification::Homomorphism => "homomorphism",
            Classification::Epimorphism => "epimorphism",
            Classification::IsomorphicEmbedding => "isomorphic-embedding",
            Classification::Isomorphism => "isomorphism",
        };
        write!(f, "{s}")
    }
}

/// The individual notions behind [`Classification`], kept separate so that
/// lift reports can compare them notion by notion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapProfile {
    pub homomorphism: bool,
    pub epimorphism: bool,
    pub embedding: bool,
    pub isomorphism: bool,
}

impl MapProfile {
    pub fn strongest(&self) -> Classification {
        if self.isomorphism {
            Classification::Isomorphism
        } else if self.embedding {
            Classification::IsomorphicEmbedding
        } else if self.epimorphism {
            Classification::Epimorphism
        } else if self.homomorphism {
            Classification::Homomorphism
        } else {
            Classification::NotHomomorphism
        }
    }
}

/// Computes which map notions hold of a witness.
///
/// A homomorphism carries relation tuples and function values forward; an
/// isomorphic embedding is an injective homomorphism that also reflects
/// relations; an epimorphism is a surjective homomorphism.
pub fn map_profile(w: &MapWitness) -> Result<MapProfile, ModelError> {
    let (src, tgt) = (w.source(), w.target());
    if src.vocab() != tgt.vocab() {
        return Err(ModelError::VocabularyMismatch);
    }
    let distinct: BTreeSet<usize> = w.map().iter().copied().collect();
    let injective = distinct.len() == src.size();
    let surjective = distinct.len() == tgt.size();

    let mut preserves = true;
    'preserve: for sym in src.vocab().predicates() {
        for tuple in src.relation(&sym.name).unwrap() {
            if !tgt.holds(&sym.name, &w.apply_tuple(tuple)) {
                preserves = false;
                break 'preserve;
            }
        }
    }
    if preserves {
        'funcs: for sym in src.vocab().functions() {
            for (args, &v) in src.function(&sym.name).unwrap() {
                if tgt.value(&sym.name, &w.apply_tuple(args)) != Some(w.apply(v)) {
                    preserves = false;
                    break 'funcs;
                }
            }
        }
    }

    let mut reflects = true;
    'reflect: for sym in src.vocab().predicates() {
        for tuple in index_tuples(src.size(), sym.arity) {
            if tgt.holds(&sym.name, &w.apply_tuple(&tuple)) && !src.holds(&sym.name, &tuple) {
                reflects = false;
                break 'reflect;
            }
        }
    }

    let homomorphism = preserves;
    let embedding = preserves && injective && reflects;
    let epimorphism = preserves && surjective;
    Ok(MapProfile {
        homomorphism,
        epimorphism,
        embedding,
        isomorphism: embedding && epimorphism,
    })
}

/// The strongest label that applies to the witness.
pub fn classify_map(w: &MapWitness) -> Result<Classification, ModelError> {
    Ok(map_profile(w)?.strongest())
}
