#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod gaussian;
pub mod gdof;
pub mod gf2;
pub mod ldc;
pub mod tolerances;
