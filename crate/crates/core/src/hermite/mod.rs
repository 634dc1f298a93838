//! Polynomials of Gaussians in the monomial and orthonormal Hermite bases.
//!
//! The Hermite convention is the probabilists' one (weight `exp(-x^2/2)/sqrt(2 pi)`),
//! normalized so that `h_a = prod He_{a_i}(x_i) / sqrt(a_i!)` is orthonormal under the
//! standard Gaussian.

mod expansion;
mod format;
mod polynomial;
mod tables;

pub use expansion::{
    degree_part, derivative_moment_rhs, from_hermite, l2_norm, to_hermite, HermiteExpansion,
};
pub use format::{PolynomialJson, TermJson};
pub use polynomial::{Exponents, SparsePolynomial};
pub use tables::{gaussian_moment, hermite_1d};

/// All exponent vectors in `num_vars` variables with `|a|_1 <= max_total`,
/// ordered by total degree, then lexicographically.
pub fn multi_indices(num_vars: usize, max_total: u32) -> Vec<Exponents> {
    fn rec(pos: usize, left: u32, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    if num_vars == 0 {
        return out;
    }
    for total in 0..=max_total {
        let mut cur = vec![0; num_vars];
        rec(0, total, &mut cur, &mut out);
    }
    out
}
