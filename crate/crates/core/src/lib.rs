//! Optimal coordinated routing for homogeneous robot teams on dynamic
//! topological graphs.
//!
//! Edge costs depend on where the whole team is: robots moving together share
//! a teaming discount, vulnerable edges charge for missing escorts, and robots
//! parked at vantage nodes reduce the cost of traffic on the edges they watch.
//! A planning instance ([`scenario::Scenario`]) is compiled into a
//! mixed-integer linear program over aggregate occupancy counts
//! ([`model::build_model`]), solved to proven optimality with an in-crate
//! simplex and branch-and-bound ([`bnb::solve_milp`]), and decomposed into one
//! itinerary per robot ([`assign::assign_paths`]). An exhaustive dynamic
//! program over team states ([`oracle::oracle_solve`]) provides ground truth
//! on small instances.

#![allow(clippy::needless_range_loop)]

pub mod scenario;
pub mod model;
pub mod lp;
pub mod bnb;
pub mod generate;
pub mod oracle;
pub mod assign;
pub mod solution;
pub mod export;
pub mod cli;
