//! Ultimate pit and nested pit shells by maximum closure.

mod closure;
mod maxflow;
mod shells;

pub use closure::{is_closed, max_closure, max_closure_containing, to_cents, Closure, ClosureProblem};
pub use shells::{default_revenue_factors, load_shells, nested_shells, save_shells, ShellAssignment};
