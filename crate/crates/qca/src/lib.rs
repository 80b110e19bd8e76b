//! Simulation and verification toolkit for qubit quantum cellular automata
//! on hypercubic lattices `Z^s` with von Neumann neighbourhoods.

pub mod circuit;
pub mod cli;
pub mod clifford;
pub mod cone;
pub mod lattice;
pub mod ops;
pub mod rules;
pub mod statevector;
pub mod support_algebra;
pub mod sweeps;

/// Chapters of the guide in `book/`, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/clifford.md")]
    mod clifford {}
    #[doc = include_str!("../../../book/src/support_algebras.md")]
    mod support_algebras {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
}
