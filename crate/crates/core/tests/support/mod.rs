#![allow(dead_code)]

pub mod data;
pub mod lp;
pub mod oracles;
