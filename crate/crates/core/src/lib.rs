pub mod ball;
pub mod decomp;
pub mod error;
pub mod field;
pub mod hensel;
pub mod logic;
pub mod poly;
pub mod rv;
pub mod valq;

pub use error::{Error, Result};
pub use field::{LaurentCtx, LaurentQ, PAdic, PAdicCtx, ValuedField};
pub use poly::Poly;
pub use rv::{RVElem, SumAnalysis};
pub use valq::ValQ;

pub type LaurentPoly = Poly<LaurentQ>;
pub type PAdicPoly = Poly<PAdic>;
