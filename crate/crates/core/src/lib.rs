pub mod classtable;
pub mod grammar;
pub mod pipeline;
pub mod reduction;
pub mod simper;
pub mod simper2tm;
pub mod subtyper;
pub mod turing;
