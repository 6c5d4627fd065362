//! Oracles for testing taskframe: a direct AST interpreter, a random
//! program generator and checks on parallel execution traces.

pub mod campaign;
pub mod gen;
pub mod oracle;
pub mod traces;

pub use campaign::{run_campaign, CampaignStats};
pub use gen::{generate, GenConfig, Generated};
pub use oracle::{run_oracle, OracleError, OracleResult};
pub use traces::{check_trace, TraceStats};
