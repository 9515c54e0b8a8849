//! Labelled natural deduction with proof terms: checking, β-normalization
//! with computational paths, a particle-rule dialogue engine and an
//! evaluation game over finite models.

pub mod syntax;
pub mod typecheck;
pub mod reduce;
pub mod gen;
pub mod enumerate;
pub mod dialogue;
pub mod evalgame;
