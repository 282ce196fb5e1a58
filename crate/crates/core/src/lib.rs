//! Contracts as code: a small declarative contract language with an exact
//! evaluator, an ambiguity linter, a force-majeure classifier and a corpus
//! of case encodings.

pub mod corpus;
pub mod eval;
pub mod force_majeure;
pub mod lint;
pub mod model;
pub mod parser;
pub mod span;

pub use eval::{run, EvalError, EvalErrorKind, OutcomeLedger, RunOptions};
pub use lint::{lint, Finding, Severity};
pub use model::{ContractAst, Value, ValueType};
pub use parser::{parse, parse_checked, parse_scenario, ParseError, Scenario};
pub use span::Span;
