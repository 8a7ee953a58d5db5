//! Randomized verification of the model-structure axioms and of the
//! comparison functors, reproducible from `(seed, trial)`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::field::Field;

mod checks;
pub mod gen;

pub use checks::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub seed: u64,
    /// Supports stay inside `|p|, |q| ≤ window`.
    pub window: i32,
    /// Bound on the number of elementary pieces, hence on every dimension.
    pub max_dim: usize,
    pub trials: usize,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            seed: 42,
            window: 4,
            max_dim: 3,
            trials: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    TwoOutOfThree,
    AxiomC,
    AxiomD,
    PartialBrown,
    Lifting,
    FunctorE,
    FunctorEprime,
    MultiPath,
    Homotopy,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::TwoOutOfThree,
        Check::AxiomC,
        Check::AxiomD,
        Check::PartialBrown,
        Check::Lifting,
        Check::FunctorE,
        Check::FunctorEprime,
        Check::MultiPath,
        Check::Homotopy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::TwoOutOfThree => "two-out-of-three",
            Check::AxiomC => "axiom-c",
            Check::AxiomD => "axiom-d",
            Check::PartialBrown => "partial-brown",
            Check::Lifting => "lifting",
            Check::FunctorE => "functor-e",
            Check::FunctorEprime => "functor-eprime",
            Check::MultiPath => "multicomplex-path",
            Check::Homotopy => "homotopy",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Deliberate corruptions used to confirm the checks can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Weak equivalences become their complement.
    NegateWeq,
    /// Nothing is an r-fibration.
    NoFibrations,
}

impl Mutation {
    pub fn name(self) -> &'static str {
        match self {
            Mutation::None => "none",
            Mutation::NegateWeq => "negate-weq",
            Mutation::NoFibrations => "no-fibrations",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Mutation::None, Mutation::NegateWeq, Mutation::NoFibrations].into_iter().find(|m| m.name() == s)
    }
}

/// Independent generator for one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub trial: usize,
    pub message: String,
    /// Named documents in the text format.
    pub documents: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub check: Check,
    pub r: usize,
    pub spec: GenSpec,
    pub mutation: Mutation,
    pub field: String,
    /// How often each labelled situation came up.
    pub coverage: BTreeMap<String, usize>,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Human-readable lines followed by a `trailer` line.
    pub fn render(&self, with_documents: bool) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "check {} r={} seed={} trials={} field={} mutation={}",
            self.check,
            self.r,
            self.spec.seed,
            self.spec.trials,
            self.field,
            self.mutation.name()
        )
        .unwrap();
        for (label, n) in &self.coverage {
            writeln!(out, "  covered {label}: {n}").unwrap();
        }
        for f in &self.failures {
            writeln!(out, "  counterexample trial={}: {}", f.trial, f.message).unwrap();
            if with_documents {
                for (name, doc) in &f.documents {
                    writeln!(out, "  --- {name}").unwrap();
                    for line in doc.lines() {
                        writeln!(out, "  | {line}").unwrap();
                    }
                }
            }
        }
        let ids: Vec<String> = self.failures.iter().map(|f| f.trial.to_string()).collect();
        writeln!(
            out,
            "trailer check={} r={} seed={} trials={} counterexamples={} failures=[{}]",
            self.check,
            self.r,
            self.spec.seed,
            self.spec.trials,
            self.failures.len(),
            ids.join(",")
        )
        .unwrap();
        out
    }
}

/// One trial, isolated: panics inside are reported as failures.
pub fn run_trial<F: Field>(check: Check, spec: &GenSpec, r: usize, mutation: Mutation, trial: usize) -> Outcome {
    let result = catch_unwind(AssertUnwindSafe(|| {
        let mut ctx = checks::Ctx::new(trial_rng(spec.seed, trial), *spec, r, mutation);
        checks::run::<F>(check, &mut ctx)
    }));
    result.unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        Outcome::failed(Vec::new(), format!("panic: {msg}"), Vec::new())
    })
}

/// Runs every trial in parallel and merges by trial index.
pub fn run<F: Field>(check: Check, spec: &GenSpec, r: usize, mutation: Mutation) -> Report {
    let outcomes: Vec<Outcome> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial::<F>(check, spec, r, mutation, t))
        .collect();
    let mut coverage = BTreeMap::new();
    let mut failures = Vec::new();
    for (trial, o) in outcomes.into_iter().enumerate() {
        for label in o.labels {
            *coverage.entry(label).or_insert(0) += 1;
        }
        if let Some((message, documents)) = o.failure {
            failures.push(Failure { trial, message, documents });
        }
    }
    Report {
        check,
        r,
        spec: *spec,
        mutation,
        field: F::descriptor(),
        coverage,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F7;

    fn small(trials: usize) -> GenSpec {
        GenSpec {
            trials,
            ..GenSpec::default()
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run::<F7>(Check::TwoOutOfThree, &small(10), 1, Mutation::None);
        let b = run::<F7>(Check::TwoOutOfThree, &small(10), 1, Mutation::None);
        assert_eq!(a.render(true), b.render(true));
        assert!(a.passed());
    }

    #[test]
    fn mutations_are_caught() {
        for (check, m) in [
            (Check::TwoOutOfThree, Mutation::NegateWeq),
            (Check::PartialBrown, Mutation::NegateWeq),
            (Check::AxiomD, Mutation::NoFibrations),
            (Check::Lifting, Mutation::NoFibrations),
        ] {
            let rep = run::<F7>(check, &small(20), 1, m);
            assert!(!rep.passed(), "{check} under {}", m.name());
            let first = &rep.failures[0];
            let again = run_trial::<F7>(check, &small(20), 1, m, first.trial);
            assert_eq!(again.failure.map(|f| f.0), Some(first.message.clone()));
            assert!(!first.documents.is_empty());
        }
    }

    #[test]
    fn zero_dimension_bound_gives_zero_objects() {
        let spec = GenSpec {
            max_dim: 0,
            ..GenSpec::default()
        };
        let mut rng = trial_rng(1, 0);
        assert!(gen::gen_spectral::<F7, _>(&mut rng, &spec).is_zero());
        assert!(gen::gen_multicomplex::<F7, _>(&mut rng, &spec).module().is_zero());
    }

    #[test]
    fn names_round_trip() {
        for c in Check::ALL {
            assert_eq!(Check::from_name(c.name()), Some(c));
        }
        assert_eq!(Mutation::from_name("negate-weq"), Some(Mutation::NegateWeq));
    }
}
