#![allow(dead_code)]

pub use hilbert_dedekind::sample::*;
