//! Arithmetic in `Z_q`, the unramified extension of `Z_p` containing a
//! chosen group of roots of unity.

mod analytic;
mod context;
mod elem;
pub(crate) mod field;
mod jet;
pub mod modint;

pub use analytic::{angle_bracket, frobenius, hensel_root, iwasawa_log, padic_exp, teichmuller};
pub use context::{make_context, PadicContext};
pub use elem::{rational_valuation, PadicElem, PadicElemJson};
pub use jet::{jet_eval, Jet};
pub use modint::{Modulus, Res};

