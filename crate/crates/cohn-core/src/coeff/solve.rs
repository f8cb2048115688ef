//! Linear solving: elimination over fields, Smith normal form over Z.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{CoeffError, Ring, RingElement, RingKind, Value};

/// Outcome of [`solve_linear`].
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOutcome {
    Solution(Vec<RingElement>),
    NoSolution,
    /// The ring is verification-only (no linear-solving capability).
    Unsupported,
}

/// Solve `system * x = rhs` for a column `x`.
///
/// Over a field this is a complete decision via elimination; over the
/// integers via Smith normal form with back-substitution. Rings without the
/// linear-solving capability report [`LinearOutcome::Unsupported`].
pub fn solve_linear(
    ring: &Ring,
    system: &[Vec<RingElement>],
    rhs: &[RingElement],
) -> Result<LinearOutcome, CoeffError> {
    let rows = system.len();
    if rows != rhs.len() {
        return Err(CoeffError::DimensionMismatch(format!(
            "system has {} rows but rhs has {}",
            rows,
            rhs.len()
        )));
    }
    let cols = system.first().map_or(0, |r| r.len());
    for r in system {
        if r.len() != cols {
            return Err(CoeffError::DimensionMismatch("ragged system matrix".into()));
        }
    }
    match ring.kind() {
        RingKind::Rationals | RingKind::RationalFunctionsQ => {
            Ok(solve_field(ring, system, rhs, cols))
        }
        RingKind::Integers => Ok(solve_integers(ring, system, rhs, cols)),
        _ => Ok(LinearOutcome::Unsupported),
    }
}

fn solve_field(
    ring: &Ring,
    system: &[Vec<RingElement>],
    rhs: &[RingElement],
    cols: usize,
) -> LinearOutcome {
    let mut a: Vec<Vec<RingElement>> = system.to_vec();
    let mut b: Vec<RingElement> = rhs.to_vec();
    let rows = a.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].try_invert().expect("nonzero field element");
        for j in col..cols {
            a[row][j] = a[row][j].mul(&inv).unwrap();
        }
        b[row] = b[row].mul(&inv).unwrap();
        for i in 0..rows {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..cols {
                    let v = a[row][j].mul(&f).unwrap();
                    a[i][j] = a[i][j].sub(&v).unwrap();
                }
                let v = b[row].mul(&f).unwrap();
                b[i] = b[i].sub(&v).unwrap();
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    // consistency on the zero rows
    for i in row..rows {
        if !b[i].is_zero() {
            return LinearOutcome::NoSolution;
        }
    }
    let mut x = vec![ring.zero(); cols];
    for (r, &c) in pivot_cols.iter().enumerate() {
        x[c] = b[r].clone();
    }
    LinearOutcome::Solution(x)
}

fn to_bigints(system: &[Vec<RingElement>], rhs: &[RingElement]) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let conv = |e: &RingElement| match e.value() {
        Value::Int(n) => n.clone(),
        _ => unreachable!("integer ring"),
    };
    (
        system
            .iter()
            .map(|r| r.iter().map(conv).collect())
            .collect(),
        rhs.iter().map(conv).collect(),
    )
}

/// Smith normal form: returns `(d, u, v)` with `u * a * v` diagonal `d` and
/// `u`, `v` unimodular over the integers.
pub fn smith_normal_form(
    a: &[Vec<BigInt>],
) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut d: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..rows)
        .map(|i| (0..rows).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    let mut v: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| (0..cols).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();

    let mut t = 0usize;
    while t < rows.min(cols) {
        // smallest nonzero entry in the remaining block becomes the pivot
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[i][j].is_zero()
                    && pivot.map_or(true, |(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        for r in d.iter_mut() {
            r.swap(t, pj);
        }
        for r in v.iter_mut() {
            r.swap(t, pj);
        }

        let mut dirty = true;
        while dirty {
            dirty = false;
            for i in (t + 1)..rows {
                if !d[i][t].is_zero() {
                    let q = num_integer::Integer::div_floor(&d[i][t], &d[t][t]);
                    for j in 0..cols {
                        let w = &d[i][j] - &q * &d[t][j];
                        d[i][j] = w;
                    }
                    for j in 0..rows {
                        let w = &u[i][j] - &q * &u[t][j];
                        u[i][j] = w;
                    }
                    if !d[i][t].is_zero() {
                        d.swap(t, i);
                        u.swap(t, i);
                        dirty = true;
                    }
                }
            }
            for j in (t + 1)..cols {
                if !d[t][j].is_zero() {
                    let q = num_integer::Integer::div_floor(&d[t][j], &d[t][t]);
                    for i in 0..rows {
                        let w = &d[i][j] - &q * &d[i][t];
                        d[i][j] = w;
                    }
                    for i in 0..cols {
                        let w = &v[i][j] - &q * &v[i][t];
                        v[i][j] = w;
                    }
                    if !d[t][j].is_zero() {
                        for r in d.iter_mut() {
                            r.swap(t, j);
                        }
                        for r in v.iter_mut() {
                            r.swap(t, j);
                        }
                        dirty = true;
                    }
                }
            }
        }

        // enforce the divisibility chain d_t | rest of the block
        let mut fixed = false;
        'scan: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if !(&d[i][j] % &d[t][t]).is_zero() {
                    for k in 0..cols {
                        let w = &d[t][k] + &d[i][k];
                        d[t][k] = w;
                    }
                    for k in 0..rows {
                        let w = &u[t][k] + &u[i][k];
                        u[t][k] = w;
                    }
                    fixed = true;
                    break 'scan;
                }
            }
        }
        if fixed {
            continue;
        }
        if d[t][t].is_negative() {
            for k in 0..cols {
                d[t][k] = -d[t][k].clone();
            }
            for k in 0..rows {
                u[t][k] = -u[t][k].clone();
            }
        }
        t += 1;
    }
    (d, u, v)
}

fn solve_integers(
    ring: &Ring,
    system: &[Vec<RingElement>],
    rhs: &[RingElement],
    cols: usize,
) -> LinearOutcome {
    let rows = system.len();
    let (a, b) = to_bigints(system, rhs);
    let (d, u, v) = smith_normal_form(&a);
    // f = u * b
    let f: Vec<BigInt> = (0..rows)
        .map(|i| (0..rows).map(|j| &u[i][j] * &b[j]).sum())
        .collect();
    let mut y = vec![BigInt::zero(); cols];
    for i in 0..rows {
        let di = if i < cols {
            d[i][i].clone()
        } else {
            BigInt::zero()
        };
        if di.is_zero() {
            if !f[i].is_zero() {
                return LinearOutcome::NoSolution;
            }
        } else {
            let (q, r) = num_integer::Integer::div_rem(&f[i], &di);
            if !r.is_zero() {
                return LinearOutcome::NoSolution;
            }
            y[i] = q;
        }
    }
    let x: Vec<BigInt> = (0..cols)
        .map(|i| (0..cols).map(|j| &v[i][j] * &y[j]).sum())
        .collect();
    LinearOutcome::Solution(
        x.into_iter()
            .map(|n| RingElement::new(ring.clone(), Value::Int(n)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(ring: &Ring, rows: &[&[i64]]) -> Vec<Vec<RingElement>> {
        rows.iter()
            .map(|r| r.iter().map(|&n| ring.from_i64(n)).collect())
            .collect()
    }

    fn col(ring: &Ring, entries: &[i64]) -> Vec<RingElement> {
        entries.iter().map(|&n| ring.from_i64(n)).collect()
    }

    #[test]
    fn rational_back_substitution() {
        let q = Ring::rationals();
        let a = mat(&q, &[&[1, 2], &[0, 1]]);
        let b = col(&q, &[3, 1]);
        let LinearOutcome::Solution(x) = solve_linear(&q, &a, &b).unwrap() else {
            panic!("expected a solution");
        };
        assert_eq!(x, col(&q, &[1, 1]));
    }

    #[test]
    fn integer_divisibility_obstruction() {
        let z = Ring::integers();
        let a = mat(&z, &[&[2]]);
        assert_eq!(
            solve_linear(&z, &a, &col(&z, &[1])).unwrap(),
            LinearOutcome::NoSolution
        );
        assert_eq!(
            solve_linear(&z, &a, &col(&z, &[6])).unwrap(),
            LinearOutcome::Solution(col(&z, &[3]))
        );
    }

    #[test]
    fn integer_system_with_mixing() {
        let z = Ring::integers();
        // [[2, 3], [4, 7]] x = (1, 3): solution x = (-1, 1)
        let a = mat(&z, &[&[2, 3], &[4, 7]]);
        let LinearOutcome::Solution(x) = solve_linear(&z, &a, &col(&z, &[1, 3])).unwrap() else {
            panic!("expected a solution");
        };
        assert_eq!(x, col(&z, &[-1, 1]));
    }

    #[test]
    fn free_algebra_unsupported() {
        let f = Ring::free_algebra(vec!["x", "y"]);
        let a = vec![vec![f.one()]];
        assert_eq!(
            solve_linear(&f, &a, &[f.one()]).unwrap(),
            LinearOutcome::Unsupported
        );
    }

    #[test]
    fn smith_form_diagonalizes() {
        let a: Vec<Vec<BigInt>> = vec![
            vec![2.into(), 4.into(), 4.into()],
            vec![(-6).into(), 6.into(), 12.into()],
            vec![10.into(), 4.into(), 16.into()],
        ];
        let (d, u, v) = smith_normal_form(&a);
        // u * a * v == d, diagonal with the divisibility chain
        let mut ua = vec![vec![BigInt::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                ua[i][j] = (0..3).map(|k| &u[i][k] * &a[k][j]).sum();
            }
        }
        let mut uav = vec![vec![BigInt::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                uav[i][j] = (0..3).map(|k| &ua[i][k] * &v[k][j]).sum();
            }
        }
        assert_eq!(uav, d);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(d[i][j].is_zero());
                }
            }
        }
        assert!((&d[1][1] % &d[0][0]).is_zero());
        assert!((&d[2][2] % &d[1][1]).is_zero());
    }
}
