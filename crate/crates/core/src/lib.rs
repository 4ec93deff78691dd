//! Prefixed tableaux for conditional logics.
//!
//! The crate implements the tableau calculus for Chellas's `Ck` together
//! with the extension rules that give calculi for `CK`, `Vc`, `VC` and
//! `VCS`. Open saturated branches are turned into formula-indexed
//! (Priest) countermodels, which are then checked by an independent
//! evaluator.
//!
//! ```
//! use condtab::{prove, Formula, Limits, Logic, LogicPreset, Verdict};
//!
//! let goal: Formula = "[p]p".parse().unwrap();
//! let verdict = prove(&[], &goal, &LogicPreset::new(Logic::Vc), Limits::default());
//! assert!(matches!(verdict, Verdict::Closed { .. }));
//! ```

pub mod cli;
pub mod corpus;
pub mod engine;
pub mod formula;
pub mod prefixed;
pub mod rulesets;
pub mod semantics;

pub use engine::{prove, replay, saturate, Limits, Proof, Saturation, Stats, Verdict};
pub use formula::{Formula, ParseError};
pub use prefixed::{Branch, ClosureWitness, Index, PrefixedFormula};
pub use rulesets::{CutPolicy, Logic, LogicPreset, RuleId, RuleInstance};
pub use semantics::{Assignment, PriestModel, World};
