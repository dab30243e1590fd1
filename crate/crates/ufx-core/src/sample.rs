//! Deterministic random generators for models, maps, formulas, and
//! eventually periodic sets. The verification batteries and the acceptance
//! suite draw from these with explicitly seeded generators.

use crate::beta::FiniteUltrafilter;
use crate::epset::EPSet;
use crate::formula::{Assignment, Formula, Term, UfMode};
use crate::model::{index_tuples, MapWitness, Model, Vocabulary};
use rand::seq::SliceRandom;
use rand::Rng;

/// Bounds for sampled vocabularies.
#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub max_predicates: usize,
    pub max_functions: usize,
    pub max_arity: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            max_predicates: 2,
            max_functions: 2,
            max_arity: 2,
        }
    }
}

pub fn vocabulary(rng: &mut impl Rng, spec: &SampleSpec) -> Vocabulary {
    let n_preds = rng.gen_range(0..=spec.max_predicates);
    let n_funcs = rng.gen_range(0..=spec.max_functions);
    let preds = (0..n_preds)
        .map(|i| (format!("P{i}"), rng.gen_range(1..=spec.max_arity)))
        .collect();
    let funcs = (0..n_funcs)
        .map(|i| (format!("F{i}"), rng.gen_range(1..=spec.max_arity)))
        .collect();
    Vocabulary::new(preds, funcs).expect("generated names are unique")
}

/// A random valid model: each relation tuple is present with probability
/// one half, each function row takes a uniform value.
pub fn model(rng: &mut impl Rng, vocab: &Vocabulary, size: usize) -> Model {
    let mut m = Model::new(vocab.clone(), size).expect("positive size");
    for sym in vocab.predicates() {
        for tuple in index_tuples(size, sym.arity) {
            if rng.gen_bool(0.5) {
                m.add_tuple(&sym.name, tuple).unwrap();
            }
        }
    }
    for sym in vocab.functions() {
        for args in index_tuples(size, sym.arity) {
            let v = rng.gen_range(0..size);
            m.set_value(&sym.name, args, v).unwrap();
        }
    }
    m
}

pub fn sized_model(rng: &mut impl Rng, spec: &SampleSpec, max_size: usize) -> Model {
    let vocab = vocabulary(rng, spec);
    let size = rng.gen_range(1..=max_size);
    model(rng, &vocab, size)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Homomorphism,
    Epimorphism,
    Embedding,
}

/// Builds a source model and a structure-preserving map into `target`.
///
/// For `Embedding` the source is carved out of the target along a random
/// injection: relations are the exact preimage and the target function rows
/// over the image are redirected into the image, so the result reflects as
/// well as preserves. For the surjective kinds the source is spread over
/// the target along a random surjection (onto a random subuniverse for
/// plain homomorphisms, onto everything for epimorphisms), with function
/// values chosen inside the fibers.
pub fn witness_into(
    rng: &mut impl Rng,
    target: &Model,
    kind: WitnessKind,
    max_source: usize,
) -> MapWitness {
    match kind {
        WitnessKind::Embedding => {
            let n_t = target.size();
            let n_s = rng.gen_range(1..=n_t);
            let mut slots: Vec<usize> = (0..n_t).collect();
            slots.shuffle(rng);
            let map: Vec<usize> = slots.into_iter().take(n_s).collect();
            let mut tgt = target.clone();
            let mut src = Model::new(target.vocab().clone(), n_s).unwrap();
            for sym in target.vocab().functions() {
                for args in index_tuples(n_s, sym.arity) {
                    let v = rng.gen_range(0..n_s);
                    let image_args: Vec<usize> = args.iter().map(|&i| map[i]).collect();
                    tgt.set_value(&sym.name, image_args, map[v]).unwrap();
                    src.set_value(&sym.name, args, v).unwrap();
                }
            }
            for sym in target.vocab().predicates() {
                for tuple in index_tuples(n_s, sym.arity) {
                    let image: Vec<usize> = tuple.iter().map(|&i| map[i]).collect();
                    if tgt.holds(&sym.name, &image) {
                        src.add_tuple(&sym.name, tuple).unwrap();
                    }
                }
            }
            MapWitness::new(src, tgt, map).unwrap()
        }
        WitnessKind::Homomorphism | WitnessKind::Epimorphism => {
            let n_t = target.size();
            let mut tgt = target.clone();
            // image subuniverse: everything for an epimorphism
            let image: Vec<usize> = if kind == WitnessKind::Epimorphism {
                (0..n_t).collect()
            } else {
                let m = rng.gen_range(1..=n_t);
                let mut all: Vec<usize> = (0..n_t).collect();
                all.shuffle(rng);
                let mut image: Vec<usize> = all.into_iter().take(m).collect();
                image.sort_unstable();
                image
            };
            // close the target functions over the image
            for sym in target.vocab().functions() {
                for args in index_tuples(image.len(), sym.arity) {
                    let image_args: Vec<usize> = args.iter().map(|&i| image[i]).collect();
                    let current = tgt.value(&sym.name, &image_args).unwrap_or(0);
                    if !image.contains(&current) {
                        let v = image[rng.gen_range(0..image.len())];
                        tgt.set_value(&sym.name, image_args, v).unwrap();
                    }
                }
            }
            let n_s = rng.gen_range(image.len()..=max_source.max(image.len()));
            let mut slots: Vec<usize> = (0..n_s).collect();
            slots.shuffle(rng);
            let mut map = vec![0usize; n_s];
            for (rank, &slot) in slots.iter().enumerate() {
                map[slot] = if rank < image.len() {
                    image[rank]
                } else {
                    image[rng.gen_range(0..image.len())]
                };
            }
            let mut src = Model::new(target.vocab().clone(), n_s).unwrap();
            for sym in target.vocab().functions() {
                for args in index_tuples(n_s, sym.arity) {
                    let image_args: Vec<usize> = args.iter().map(|&i| map[i]).collect();
                    let tv = tgt.value(&sym.name, &image_args).unwrap();
                    let fiber: Vec<usize> = (0..n_s).filter(|&s| map[s] == tv).collect();
                    let v = fiber[rng.gen_range(0..fiber.len())];
                    src.set_value(&sym.name, args, v).unwrap();
                }
            }
            for sym in target.vocab().predicates() {
                for tuple in index_tuples(n_s, sym.arity) {
                    let image_tuple: Vec<usize> = tuple.iter().map(|&i| map[i]).collect();
                    if tgt.holds(&sym.name, &image_tuple) && rng.gen_bool(0.6) {
                        src.add_tuple(&sym.name, tuple).unwrap();
                    }
                }
            }
            MapWitness::new(src, tgt, map).unwrap()
        }
    }
}

pub fn hom_witness(
    rng: &mut impl Rng,
    spec: &SampleSpec,
    kind: WitnessKind,
    max_size: usize,
) -> MapWitness {
    let target = sized_model(rng, spec, max_size);
    witness_into(rng, &target, kind, max_size)
}

/// A homomorphism into `target` exactly as given: the map lands on a
/// subuniverse closed under the target functions, so nothing needs to be
/// rewritten. Useful for composing witnesses.
pub fn witness_onto_closed(rng: &mut impl Rng, target: &Model, max_source: usize) -> MapWitness {
    let n_t = target.size();
    // close a random seed point under all functions
    let mut image: Vec<usize> = vec![rng.gen_range(0..n_t)];
    loop {
        let mut grew = false;
        for sym in target.vocab().functions() {
            for args in index_tuples(image.len(), sym.arity) {
                let real_args: Vec<usize> = args.iter().map(|&i| image[i]).collect();
                let v = target.value(&sym.name, &real_args).unwrap();
                if !image.contains(&v) {
                    image.push(v);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    image.sort_unstable();
    let n_s = rng.gen_range(image.len()..=max_source.max(image.len()));
    let mut slots: Vec<usize> = (0..n_s).collect();
    slots.shuffle(rng);
    let mut map = vec![0usize; n_s];
    for (rank, &slot) in slots.iter().enumerate() {
        map[slot] = if rank < image.len() {
            image[rank]
        } else {
            image[rng.gen_range(0..image.len())]
        };
    }
    let mut src = Model::new(target.vocab().clone(), n_s).unwrap();
    for sym in target.vocab().functions() {
        for args in index_tuples(n_s, sym.arity) {
            let image_args: Vec<usize> = args.iter().map(|&i| map[i]).collect();
            let tv = target.value(&sym.name, &image_args).unwrap();
            let fiber: Vec<usize> = (0..n_s).filter(|&s| map[s] == tv).collect();
            let v = fiber[rng.gen_range(0..fiber.len())];
            src.set_value(&sym.name, args, v).unwrap();
        }
    }
    for sym in target.vocab().predicates() {
        for tuple in index_tuples(n_s, sym.arity) {
            let image_tuple: Vec<usize> = tuple.iter().map(|&i| map[i]).collect();
            if target.holds(&sym.name, &image_tuple) && rng.gen_bool(0.6) {
                src.add_tuple(&sym.name, tuple).unwrap();
            }
        }
    }
    MapWitness::new(src, target.clone(), map).unwrap()
}

/// Bounds for sampled formulas.
#[derive(Debug, Clone, Copy)]
pub struct FormulaSpec {
    pub max_quant_depth: usize,
    pub max_nodes: usize,
    pub classical_only: bool,
}

impl Default for FormulaSpec {
    fn default() -> Self {
        FormulaSpec {
            max_quant_depth: 3,
            max_nodes: 12,
            classical_only: false,
        }
    }
}

const FREE_VARS: [&str; 2] = ["v0", "v1"];
const UF_PARAMS: [&str; 3] = ["u0", "u1", "u2"];

struct FormulaGen<'a, R: Rng> {
    rng: &'a mut R,
    vocab: &'a Vocabulary,
    spec: FormulaSpec,
    next_bound: usize,
}

impl<'a, R: Rng> FormulaGen<'a, R> {
    fn term(&mut self, scope: &[String], fuel: usize) -> Term {
        let funcs = self.vocab.functions();
        if fuel > 0 && !funcs.is_empty() && self.rng.gen_bool(0.3) {
            let sym = &funcs[self.rng.gen_range(0..funcs.len())];
            let args = (0..sym.arity).map(|_| self.term(scope, fuel - 1)).collect();
            return Term::App {
                func: sym.name.clone(),
                args,
            };
        }
        let mut pool: Vec<&str> = FREE_VARS.to_vec();
        pool.extend(scope.iter().map(|s| s.as_str()));
        Term::Var(pool[self.rng.gen_range(0..pool.len())].to_string())
    }

    fn atom(&mut self, scope: &[String]) -> Formula {
        let preds = self.vocab.predicates();
        if !preds.is_empty() && self.rng.gen_bool(0.7) {
            let sym = &preds[self.rng.gen_range(0..preds.len())];
            let args = (0..sym.arity).map(|_| self.term(scope, 1)).collect();
            Formula::Pred {
                pred: sym.name.clone(),
                args,
            }
        } else {
            Formula::Equal(self.term(scope, 1), self.term(scope, 1))
        }
    }

    fn formula(&mut self, scope: &mut Vec<String>, depth: usize, nodes: usize) -> Formula {
        if nodes <= 1 {
            return self.atom(scope);
        }
        match self.rng.gen_range(0..10) {
            0..=3 => self.atom(scope),
            4 => Formula::not(self.formula(scope, depth, nodes - 1)),
            5 => Formula::and(
                self.formula(scope, depth, nodes / 2),
                self.formula(scope, depth, nodes / 2),
            ),
            6 => Formula::or(
                self.formula(scope, depth, nodes / 2),
                self.formula(scope, depth, nodes / 2),
            ),
            7 => Formula::implies(
                self.formula(scope, depth, nodes / 2),
                self.formula(scope, depth, nodes / 2),
            ),
            8 if depth > 0 => {
                let var = format!("b{}", self.next_bound);
                self.next_bound += 1;
                scope.push(var.clone());
                let body = self.formula(scope, depth - 1, nodes - 1);
                scope.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                }
            }
            9 if depth > 0 && !self.spec.classical_only => {
                let var = format!("b{}", self.next_bound);
                self.next_bound += 1;
                let param = UF_PARAMS[self.rng.gen_range(0..UF_PARAMS.len())];
                let mode = if self.rng.gen_bool(0.5) {
                    UfMode::Forall
                } else {
                    UfMode::Exists
                };
                scope.push(var.clone());
                let body = self.formula(scope, depth - 1, nodes - 1);
                scope.pop();
                Formula::ufquant(mode, param, var, body)
            }
            _ => self.atom(scope),
        }
    }
}

/// A random formula over the vocabulary; free variables come from a small
/// fixed pool and bound variables are freshly numbered, so no variable is
/// bound twice on a path.
pub fn formula(rng: &mut impl Rng, vocab: &Vocabulary, spec: &FormulaSpec) -> Formula {
    let mut gen = FormulaGen {
        rng,
        vocab,
        spec: *spec,
        next_bound: 0,
    };
    let mut scope = Vec::new();
    gen.formula(&mut scope, spec.max_quant_depth, spec.max_nodes)
}

/// A random assignment covering exactly the free names of `f` over a
/// universe of the given size, with principal ultrafilters for parameters.
pub fn assignment_for(rng: &mut impl Rng, f: &Formula, size: usize) -> Assignment {
    let names = f.free_names();
    let mut a = Assignment::new();
    for v in names.vars {
        a.vars.insert(v, rng.gen_range(0..size));
    }
    for u in names.ufs {
        let point = rng.gen_range(0..size);
        a.ufs
            .insert(u, FiniteUltrafilter::new(size, point).unwrap());
    }
    a
}

/// A random eventually periodic set with small parameters.
pub fn epset(rng: &mut impl Rng) -> EPSet {
    let period = rng.gen_range(1..=8u64);
    let residues: Vec<u64> = (0..period).filter(|_| rng.gen_bool(0.4)).collect();
    let threshold = rng.gen_range(0..=6u64);
    let prefix: Vec<u64> = (0..threshold).filter(|_| rng.gen_bool(0.3)).collect();
    EPSet::new(threshold, prefix, period, residues).unwrap()
}

/// A random set that is infinite with an infinite complement.
pub fn coinfinite_split(rng: &mut impl Rng) -> EPSet {
    let period = rng.gen_range(2..=12u64);
    let mut residues: Vec<u64> = Vec::new();
    while residues.is_empty() || residues.len() as u64 == period {
        residues = (0..period).filter(|_| rng.gen_bool(0.5)).collect();
    }
    let threshold = rng.gen_range(0..=8u64);
    let prefix: Vec<u64> = (0..threshold).filter(|_| rng.gen_bool(0.5)).collect();
    EPSet::new(threshold, prefix, period, residues).unwrap()
}
