pub mod corpus;
pub mod qa;
pub mod rank;
pub mod select;
