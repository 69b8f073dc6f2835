//! Command-line front end for `fbsplit`: gallery listing, single runs with
//! CSV/JSON output and multi-scheme comparisons.

pub mod config;
pub mod inline;
pub mod run;
