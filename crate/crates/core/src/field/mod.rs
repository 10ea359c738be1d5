//! Finite fields, their extension towers, and polynomials over them.

pub mod factor;
pub mod gf;
pub mod linalg;
pub mod poly;

use std::sync::Arc;

pub use factor::{factor_poly, is_irreducible};
pub use gf::{Elem, Embedding, GF};
pub use poly::Poly;

use crate::error::Result;

/// F_{q^m} together with its embedding of F_q.
#[derive(Clone, Debug)]
pub struct Extension {
    pub base: Arc<GF>,
    pub field: Arc<GF>,
    pub degree: u32,
    pub embedding: Embedding,
}

impl Extension {
    pub fn embed(&self, a: Elem) -> Elem {
        self.embedding.apply(a)
    }

    /// The preimage in F_q, if `z` lies in the embedded base field.
    pub fn restrict(&self, z: Elem) -> Option<Elem> {
        self.embedding.preimage(&self.field, &self.base, z)
    }

    /// x ↦ x^q.
    pub fn frobenius_q(&self, x: Elem) -> Elem {
        self.field.pow(x, self.base.size() as u64)
    }
}

/// Builds F_{q^m} over F_q = `base`.
pub fn build_extension(base: &Arc<GF>, m: u32) -> Result<Extension> {
    let field = if m == 1 {
        base.clone()
    } else {
        Arc::new(GF::new(base.characteristic(), base.degree() * m)?)
    };
    let embedding = Embedding::new(base, &field);
    Ok(Extension {
        base: base.clone(),
        field,
        degree: m,
        embedding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f3_to_f9() {
        let f3 = Arc::new(GF::new(3, 1).unwrap());
        let e = build_extension(&f3, 2).unwrap();
        assert_eq!(e.field.size(), 9);
        assert_eq!(e.field.modulus(), &[1, 0, 1]);
        // t -> t^3 = -t
        assert_eq!(e.frobenius_q(3), e.field.neg(3));
        let id = build_extension(&f3, 1).unwrap();
        for a in f3.elements() {
            assert_eq!(id.embed(a), a);
        }
    }

    #[test]
    fn f9_to_f729() {
        let f9 = Arc::new(GF::new(3, 2).unwrap());
        let e = build_extension(&f9, 3).unwrap();
        assert_eq!(e.field.size(), 729);
        for (a, b) in [
            (1, 5),
            (3, 7),
            (8, 8),
            (2, 4),
            (6, 3),
            (4, 4),
            (5, 1),
            (7, 2),
            (3, 3),
            (2, 6),
        ] {
            assert_eq!(e.embed(f9.mul(a, b)), e.field.mul(e.embed(a), e.embed(b)));
        }
        for x in e.field.elements() {
            let mut y = x;
            for _ in 0..3 {
                y = e.frobenius_q(y);
            }
            assert_eq!(y, x);
            assert_eq!(e.frobenius_q(x) == x, e.restrict(x).is_some());
        }
    }
}
