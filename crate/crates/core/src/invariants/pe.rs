use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::InvariantError;
use crate::graph::Graph;

/// Largest graph accepted by [`pe`].
pub const PE_MAX_NODES: usize = 64;

/// Coefficients of `det(λI - L)` for the Laplacian `L = D - A`, highest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaplacianPolynomial(pub Vec<BigInt>);

impl Serialize for LaplacianPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|c| c.to_string()))
    }
}

impl fmt::Display for LaplacianPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Characteristic polynomial of the Laplacian by Faddeev–LeVerrier over the
/// integers. Every intermediate matrix is integral and each division by `k` is
/// exact, so no rounding occurs.
pub fn pe(g: &Graph) -> Result<LaplacianPolynomial, InvariantError> {
    let n = g.node_count();
    if n > PE_MAX_NODES {
        return Err(InvariantError::TooLarge { invariant: "pe", n, max: PE_MAX_NODES });
    }
    // (L M)[i][j] = deg(i) M[i][j] - Σ_{u ~ i} M[u][j]
    let lap_mul = |m: &[Vec<BigInt>]| -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = &m[i][j] * BigInt::from(g.degree(i));
                        for &u in g.neighbors(i) {
                            acc -= &m[u][j];
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };
    let mut coeffs = vec![BigInt::one()];
    let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        let mut next = lap_mul(&m);
        let c_prev = coeffs.last().unwrap().clone();
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c_prev;
        }
        let lm = lap_mul(&next);
        let trace: BigInt = (0..n).map(|i| lm[i][i].clone()).sum();
        let c = -(trace / BigInt::from(k));
        coeffs.push(c);
        m = next;
    }
    Ok(LaplacianPolynomial(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    fn ints(p: &LaplacianPolynomial) -> Vec<i64> {
        p.0.iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn k2() {
        assert_eq!(ints(&pe(&complete(2)).unwrap()), vec![1, -2, 0]);
    }

    #[test]
    fn edgeless() {
        assert_eq!(ints(&pe(&empty(4)).unwrap()), vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn union_multiplies() {
        // (λ² - 2λ)² = λ⁴ - 4λ³ + 4λ²
        let g = disjoint_union(&complete(2), &complete(2));
        assert_eq!(ints(&pe(&g).unwrap()), vec![1, -4, 4, 0, 0]);
    }

    #[test]
    fn known_spectra() {
        // K3 Laplacian spectrum {0, 3, 3}: λ(λ-3)² = λ³ - 6λ² + 9λ.
        assert_eq!(ints(&pe(&complete(3)).unwrap()), vec![1, -6, 9, 0]);
        // P3 spectrum {0, 1, 3}: λ³ - 4λ² + 3λ.
        assert_eq!(ints(&pe(&path(3)).unwrap()), vec![1, -4, 3, 0]);
    }

    #[test]
    fn large_complete_graph_is_exact() {
        // K_n spectrum {0, n^(n-1)}; coefficient of λ^{n-1} is -n(n-1).
        let p = pe(&complete(40)).unwrap();
        assert_eq!(p.0.len(), 41);
        assert_eq!(p.0[1], BigInt::from(-40 * 39));
        assert!(p.0[40].is_zero());
        let last = &p.0[39];
        // λ(λ-40)^39 → coefficient of λ is (-40)^39.
        assert_eq!(*last, BigInt::from(-40).pow(39));
    }

    #[test]
    fn limit() {
        assert!(matches!(pe(&empty(65)), Err(InvariantError::TooLarge { .. })));
    }
}
