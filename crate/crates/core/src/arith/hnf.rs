//! Hermite normal form of rank-4 Z[w]-modules.
//!
//! A module is given by generator vectors in Z[w]⁴. The normal form is a list of four
//! basis vectors b₀..b₃ where bᵢ has zero coordinates before position i (so, written
//! as rows, the matrix is upper triangular). Each pivot is the canonical associate of
//! its ideal and entries above a pivot are reduced by norm-Euclidean division, which
//! makes the form a function of the module alone.

use num_traits::Zero;

use super::quad::QuadInt;
use crate::error::CoreError;

pub type ZwVec = [QuadInt; 4];

fn sub_mul(v: &ZwVec, q: &QuadInt, p: &ZwVec) -> ZwVec {
    std::array::from_fn(|i| &v[i] - &(q * &p[i]))
}

fn scale(v: &ZwVec, s: &QuadInt) -> ZwVec {
    std::array::from_fn(|i| &v[i] * s)
}

pub fn hnf_of(gens: &[ZwVec]) -> Result<[ZwVec; 4], CoreError> {
    let mut pool: Vec<ZwVec> = gens.iter().filter(|v| v.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut basis: Vec<ZwVec> = Vec::with_capacity(4);
    for c in 0..4 {
        // Euclidean elimination on column c among pool vectors
        loop {
            let nz: Vec<usize> = (0..pool.len()).filter(|&i| !pool[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&i| pool[i][c].norm().magnitude().clone()).unwrap();
            let pv = pool[piv].clone();
            for &i in &nz {
                if i == piv {
                    continue;
                }
                let (q, _) = pool[i][c].div_rem(&pv[c]);
                pool[i] = sub_mul(&pool[i], &q, &pv);
            }
            pool.retain(|v| v.iter().any(|x| !x.is_zero()));
        }
        let Some(pi) = (0..pool.len()).find(|&i| !pool[i][c].is_zero()) else {
            return Err(CoreError::DegenerateLattice(format!("no pivot in column {c}")));
        };
        let mut pv = pool.remove(pi);
        // normalize pivot to its canonical associate
        let canon = pv[c].canonical_associate();
        let unit = canon.exact_div(&pv[c]).expect("associate differs by a unit");
        pv = scale(&pv, &unit);
        basis.push(pv);
    }
    if pool.iter().any(|v| v.iter().any(|x| !x.is_zero())) {
        return Err(CoreError::Internal("HNF left a nonzero remainder".into()));
    }
    // reduce entries above each pivot
    for c in 0..4 {
        let pv = basis[c].clone();
        for r in 0..c {
            let (q, _) = basis[r][c].div_rem(&pv[c]);
            if !q.is_zero() {
                basis[r] = sub_mul(&basis[r], &q, &pv);
            }
        }
    }
    Ok([basis[0].clone(), basis[1].clone(), basis[2].clone(), basis[3].clone()])
}

/// Express v as a Z[w]-combination of an HNF basis, if possible.
pub fn hnf_coords(basis: &[ZwVec; 4], v: &ZwVec) -> Option<[QuadInt; 4]> {
    let mut rest = v.clone();
    let mut coeffs: [QuadInt; 4] = std::array::from_fn(|_| QuadInt::zero());
    for c in 0..4 {
        if rest[c].is_zero() {
            continue;
        }
        let q = rest[c].exact_div(&basis[c][c])?;
        rest = sub_mul(&rest, &q, &basis[c]);
        coeffs[c] = q;
    }
    if rest.iter().all(|x| x.is_zero()) {
        Some(coeffs)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn qi(a: i64, b: i64) -> QuadInt {
        QuadInt::new(a, b)
    }

    fn unit_vec(i: usize) -> ZwVec {
        std::array::from_fn(|j| if i == j { QuadInt::one() } else { QuadInt::zero() })
    }

    #[test]
    fn identity_is_fixed() {
        let id: Vec<ZwVec> = (0..4).map(unit_vec).collect();
        let h = hnf_of(&id).unwrap();
        for i in 0..4 {
            assert_eq!(h[i], unit_vec(i));
        }
    }

    #[test]
    fn idempotent_and_span_preserving() {
        let gens = vec![
            [qi(2, 1), qi(3, 0), qi(0, 1), qi(1, 1)],
            [qi(0, 0), qi(5, 0), qi(7, -2), qi(1, 0)],
            [qi(4, 2), qi(6, 0), qi(0, 2), qi(2, 2)],
            [qi(0, 0), qi(0, 0), qi(3, 0), qi(2, -1)],
            [qi(1, 0), qi(1, 1), qi(1, 0), qi(0, 0)],
            [qi(0, 0), qi(0, 0), qi(0, 0), qi(11, 0)],
        ];
        let h = hnf_of(&gens).unwrap();
        let h2 = hnf_of(&h).unwrap();
        assert_eq!(h, h2);
        for g in &gens {
            assert!(hnf_coords(&h, g).is_some());
        }
        for i in 0..4 {
            for j in 0..i {
                assert!(h[i][j].is_zero());
            }
        }
    }

    #[test]
    fn degenerate_rank() {
        let gens = vec![unit_vec(0), unit_vec(1), unit_vec(2)];
        assert!(matches!(hnf_of(&gens), Err(CoreError::DegenerateLattice(_))));
    }
}
