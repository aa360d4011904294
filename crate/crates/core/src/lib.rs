//! Symbol lengths of quadratic forms over fields with finitely many square
//! classes, modelled by finite quadratic form schemes.

pub mod bounds;
pub mod builders;
pub mod decompose;
pub mod f2space;
pub mod milnor;
pub mod scheme;
pub mod verify;
