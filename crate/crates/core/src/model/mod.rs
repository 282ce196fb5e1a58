pub mod ast;
pub mod graph;
pub mod print;
pub mod validate;
pub mod value;

pub use ast::*;
pub use graph::{dependency_graph, DependencyGraph};
pub use print::{print_canonical, print_expr};
pub use validate::{validate, StructuralError, StructuralErrorKind};
pub use value::*;
