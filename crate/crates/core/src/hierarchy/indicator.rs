//! Graphs of indicator functions: the known `d_y <= 1` data already determine
//! every moment, since `y^k = y` on `{0, 1}`.

use crate::error::{Error, Result};
use crate::momentmodel::{
    moment_matrix, order_rows, KnownMoments, MomentBasis, MomentSequence, MomentSupport, SymMatrix,
};
use crate::polycore::{enumerate_indices, legendre_values, MultiIndex};

fn check(linear: &KnownMoments, target_order: usize) -> Result<()> {
    if linear.support() != MomentSupport::GraphLinear {
        return Err(Error::usage(
            "indicator expansion needs graph-linear moments",
        ));
    }
    if linear.degree_cap() < 2 * target_order {
        return Err(Error::usage(format!(
            "known moments go to degree {}, order {target_order} needs {}",
            linear.degree_cap(),
            2 * target_order
        )));
    }
    Ok(())
}

fn with_y(d: &MultiIndex, y: u32) -> MultiIndex {
    let mut e = d.exponents().to_vec();
    *e.last_mut().unwrap() = y;
    MultiIndex::new(e)
}

/// Monomial moments with `phi_(dx, dy) = mu_(dx, 1)` for every `dy >= 1`.
/// Values are copied, so duplicated columns of `M_r` agree bit for bit.
pub fn expand_indicator_moments(
    linear: &KnownMoments,
    target_order: usize,
) -> Result<MomentSequence> {
    check(linear, target_order)?;
    let nv = linear.n() + 1;
    let basis = enumerate_indices(nv, 2 * target_order);
    let mut values = Vec::with_capacity(basis.len());
    for d in basis.iter() {
        let src = if d.last() >= 1 {
            with_y(d, 1)
        } else {
            d.clone()
        };
        let v = linear
            .value(&src)
            .ok_or_else(|| Error::usage(format!("missing known moment {:?}", src.exponents())))?;
        values.push(v);
    }
    MomentSequence::new(MomentBasis::Monomial, nv, target_order, values)
}

/// Same expansion in the Legendre basis of the graph box (needs `gamma = 1`).
/// With `A_k = L(p_k)` and `B_k` the integral of `p_k` over the set,
/// `psi_(k,j) = P_j(0) (A_k - B_k) + P_j(1) B_k`.
pub fn expand_indicator_legendre(
    linear: &KnownMoments,
    target_order: usize,
) -> Result<MomentSequence> {
    check(linear, target_order)?;
    if (linear.gamma() - 1.0).abs() > 1e-12 {
        return Err(Error::usage("indicator graphs need gamma = 1"));
    }
    let nv = linear.n() + 1;
    let deg = 2 * target_order;
    let frame = linear.frame()?;
    let known = linear.legendre_moments()?;
    let mut at0 = vec![0.0; deg + 1];
    let mut at1 = vec![0.0; deg + 1];
    legendre_values(0.0, deg, &mut at0);
    legendre_values(1.0, deg, &mut at1);
    let basis = enumerate_indices(nv, deg);
    let mut values = Vec::with_capacity(basis.len());
    for d in basis.iter() {
        let get = |y| {
            let m = with_y(d, y);
            known
                .get(&m)
                .copied()
                .ok_or_else(|| Error::usage(format!("missing known moment {:?}", m.exponents())))
        };
        let a = get(0)?;
        let j = d.last() as usize;
        if j == 0 {
            values.push(a);
            continue;
        }
        let b = (get(1)? - at0[1] * a) / (at1[1] - at0[1]);
        values.push(at0[j] * (a - b) + at1[j] * b);
    }
    MomentSequence::new(MomentBasis::Legendre(frame), nv, target_order, values)
}

/// Positions in the order-`r` row list of `x^dx` (`|dx| <= r`) and `x^dx y`
/// (`|dx| <= r - 1`).
pub fn reduced_indicator_rows(n_vars: usize, r: usize) -> Vec<usize> {
    order_rows(n_vars, r)
        .iter()
        .enumerate()
        .filter(|(_, d)| d.last() <= 1)
        .map(|(k, _)| k)
        .collect()
}

/// Principal submatrix of `M_r` on the rows of [`reduced_indicator_rows`].
pub fn reduced_indicator_matrix(seq: &MomentSequence, r: usize) -> Result<SymMatrix> {
    if r > seq.order() {
        return Err(Error::Degree {
            needed: 2 * r,
            available: 2 * seq.order(),
        });
    }
    let full = moment_matrix(seq, r)?;
    Ok(full.principal_submatrix(&reduced_indicator_rows(seq.n_vars(), r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{indicator_moments, IntervalUnion};
    use crate::polycore::binomial;

    fn two_intervals(cap: usize) -> KnownMoments {
        let k = IntervalUnion::new(vec![(0.2, 0.4), (0.6, 0.8)]).unwrap();
        indicator_moments(&k, cap).unwrap()
    }

    #[test]
    fn higher_y_moments_copy_the_linear_one() {
        let seq = expand_indicator_moments(&two_intervals(6), 3).unwrap();
        let v = seq.get(&MultiIndex::new(vec![0, 3])).unwrap();
        assert!((v - 0.4).abs() < 1e-14);
        assert_eq!(v, seq.get(&MultiIndex::new(vec![0, 1])).unwrap());
        assert!(expand_indicator_moments(&two_intervals(5), 3).is_err());
    }

    #[test]
    fn legendre_expansion_matches_monomial() {
        let k = two_intervals(8);
        let mono = expand_indicator_moments(&k, 4).unwrap();
        let leg = expand_indicator_legendre(&k, 4).unwrap();
        let back = leg.to_monomial().unwrap();
        for (a, b) in mono.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn reduced_size() {
        let seq = expand_indicator_moments(&two_intervals(4), 2).unwrap();
        let m = reduced_indicator_matrix(&seq, 2).unwrap();
        assert_eq!(m.size(), 5);
        assert_eq!(m.size() as f64, binomial(3, 1) + binomial(2, 1));
        assert!(reduced_indicator_matrix(&seq, 3).is_err());
    }

    #[test]
    fn empty_set_has_zero_y_block() {
        let k = indicator_moments(&IntervalUnion::empty(), 4).unwrap();
        let seq = expand_indicator_moments(&k, 2).unwrap();
        let m = reduced_indicator_matrix(&seq, 2).unwrap();
        let rows = order_rows(2, 2);
        let keep: Vec<&MultiIndex> = reduced_indicator_rows(2, 2)
            .iter()
            .map(|&k| &rows[k])
            .collect();
        for (i, a) in keep.iter().enumerate() {
            for (j, b) in keep.iter().enumerate() {
                if a.last() + b.last() > 0 {
                    assert_eq!(m.get(i, j), 0.0);
                }
            }
        }
    }
}
