//! Legendre transforms, infimal convolution, Moreau-box envelopes and
//! tangential extensions.

mod envelope;
mod extension;
mod identities;
mod infconv;
mod legendre;

pub use envelope::{moreau, moreau_box, EnvelopeEval, EnvelopeFn};
pub use extension::{tangential_extension, ExtensionFn};
pub use identities::{conjugate_identities, conjugate_identities_check, lattice_duality, IDENTITY_TOL};
pub use infconv::inf_conv_pa;
pub use legendre::{conjugate_value, legendre_pa, legendre_quadratic};

#[cfg(test)]
mod tests;
