//! The class Conc, the functional affine surface area Z_ζ and the valuations
//! c0 + c1 V_n(dom u) + Z_ζ(u).
//!
//! Z_ζ is evaluated with ζ applied to the Hessian determinant:
//! Z_ζ(½⟨x,Ax⟩ + affine + I_P) = ζ(det A) V_n(P).

mod checks;
mod conc;
mod zeta;

pub use checks::{apply, extract_zeta, invariance_check, valuation_identity_check, ExtractedZeta, Transform, Valuation};
pub use conc::{validate_conc, validate_zeta, zeta_dual, ConcCertificate, ConcFn, ConcKind, TAIL_RATIO, TAIL_T};
pub use zeta::{z_zeta, z_zeta_numeric, z_zeta_plq, z_zeta_with, QuadOpts};
pub use crate::report::{CheckReport, Witness};
