use super::legendre::{conjugate_of_sum, legendre_pa};
use crate::error::{Error, Result};
use crate::funcs::PaFn;

/// (u □ v)(x) = inf_y u(y) + v(x - y), computed as (u* + v*)*.
pub fn inf_conv_pa(u: &PaFn, v: &PaFn) -> Result<PaFn> {
    if u.dim() != v.dim() {
        return Err(Error::DimMismatch { expected: u.dim(), got: v.dim() });
    }
    if u.domain().is_none() || v.domain().is_none() {
        return Err(Error::BadInput("inf-convolution needs compact domains".into()));
    }
    let us = legendre_pa(u)?;
    let vs = legendre_pa(v)?;
    conjugate_of_sum(&[&us, &vs])
}
