//! Exact linear solves over the rationals.
//!
//! Systems are scaled row-wise to integer matrices and reduced with
//! Bareiss' fraction-free elimination, so every intermediate entry is an
//! integer minor of the scaled matrix. The last pivot is the determinant of
//! the scaled system, which bounds every denominator of the solution.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Rational;

/// Solution of a square system together with the determinant of the
/// integer-scaled matrix the elimination actually ran on.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<Rational>,
    /// Determinant (up to sign) of the row-scaled integer system. Every
    /// denominator of `x` divides it.
    pub det: BigInt,
}

/// Solves `a · x = b` exactly. Returns `None` when `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Solution> {
    let n = a.len();
    assert_eq!(b.len(), n, "right-hand side has wrong length");
    if n == 0 {
        return Some(Solution { x: Vec::new(), det: BigInt::one() });
    }

    // Row-scale to integers: multiply row i (and b_i) by the lcm of its
    // denominators.
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (row, rhs) in a.iter().zip(b) {
        assert_eq!(row.len(), n, "matrix is not square");
        let mut l = rhs.denom().clone();
        for v in row {
            l = l.lcm(v.denom());
        }
        let mut int_row: Vec<BigInt> = row
            .iter()
            .map(|v| v.numer() * (&l / v.denom()))
            .collect();
        int_row.push(rhs.numer() * (&l / rhs.denom()));
        m.push(int_row);
    }

    let mut prev = BigInt::one();
    let mut sign_flip = false;
    for k in 0..n {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !m[r][k].is_zero())?;
            m.swap(k, swap);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                // Bareiss: the division is exact.
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = if sign_flip { -prev } else { prev };

    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rational::from_integer(m[i][n].clone());
        for j in i + 1..n {
            acc -= Rational::from_integer(m[i][j].clone()) * &x[j];
        }
        x[i] = acc / Rational::from_integer(m[i][i].clone());
    }
    Some(Solution { x, det: det.abs() })
}
