//! p-adic numerics for Kubota–Leopoldt L-functions: measures via Amice
//! transforms, trivial zeros, L-invariants, Morita's Γ_p and the local
//! trivial-zero classification for modular forms.
//!
//! ```
//! use lpadic::amice::default_truncation;
//! use lpadic::dirichlet::DirichletChar;
//! use lpadic::harness::{lp_context, Env};
//! use lpadic::{Jet, PadicElem};
//!
//! let eta = DirichletChar::parse("quad3")?;
//! let ctx = lp_context(&eta, 5, 20)?;
//! let engine = Env::new(1, None)?.engine(&eta, &ctx, default_truncation(5, 20), false)?;
//! let v = engine.measure_route(1, &Jet::variable(PadicElem::zero(&ctx)))?;
//! assert!(v.value.value.agreement(&PadicElem::from_ratio(&ctx, 2, 3)) >= 18);
//! # Ok::<(), lpadic::Error>(())
//! ```

pub mod amice;
pub mod arith;
pub mod classical;
pub mod dirichlet;
pub mod gamma;
pub mod harness;
pub mod kubota_leopoldt;
pub mod modular;
pub mod error;
pub mod padic;

pub use error::{Error, Result};
pub use padic::{make_context, Jet, PadicContext, PadicElem};
