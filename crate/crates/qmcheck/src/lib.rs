//! Approximate model checking of quantum Markov chains against
//! measurement-based temporal logic.
//!
//! A quantum Markov chain is a quantum channel iterated from an initial
//! state. Its single trajectory of density matrices is checked against
//! linear-time formulas whose atoms constrain measurement probabilities
//! to intervals. Exact verification is undecidable in general, so the
//! checker works with a precision parameter: it decomposes the channel
//! spectrally, truncates the trajectory once it is within epsilon of its
//! periodic limit cycle, replaces the tail with epsilon-neighborhoods of
//! the limit states, and decides the resulting finite abstraction with
//! standard automata constructions. Verdicts are `True`, `False`, or
//! `Unknown`; definite verdicts are sound for the original chain, and
//! `Unknown` can often be resolved by halving epsilon.
//!
//! Modules, bottom up:
//!
//! * [`linalg`]: complex matrices, density operators, Kraus channels.
//! * [`spectral`]: peripheral spectrum, stability, truncation bounds.
//! * [`mltl`]: the temporal logic, its parser, and trajectory labeling.
//! * [`neighborhood`]: interval status of atoms near a limit state.
//! * [`automata`]: Buchi constructions and the emptiness check.
//! * [`models`]: quantum/classical random walks and chain encodings.
//! * [`checker`]: the end-to-end decision procedure.
//! * [`cli`]: the command-line front end and the model file format.

pub mod automata;
pub mod checker;
pub mod cli;
pub mod linalg;
pub mod mltl;
pub mod models;
pub mod neighborhood;
pub mod spectral;
