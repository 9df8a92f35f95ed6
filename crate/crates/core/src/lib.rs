pub mod corpus;
pub mod genrepair;
pub mod metrics;
pub mod mutate;
pub mod pipeline;
pub mod syntax;
pub mod transforms;
pub mod triage;
pub mod verify;
