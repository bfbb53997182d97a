//! Oracles and randomized property runners shared by the integration suites
//! and the acceptance target.
#![allow(dead_code)]

pub mod oracles;
pub mod props;
