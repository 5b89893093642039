//! Dense Gaussian elimination over any [`Scalar`]; pivoting uses real parts.

use crate::scalar::Scalar;

/// LU factorisation with partial pivoting, stored in place.
struct Lu<S> {
    a: Vec<Vec<S>>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

fn factor<S: Scalar>(mut a: Vec<Vec<S>>) -> Lu<S> {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, a[i][k].value().abs()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            singular = true;
            continue;
        }
        if piv != k {
            a.swap(piv, k);
            perm.swap(piv, k);
            sign = -sign;
        }
        for i in (k + 1)..n {
            let m = a[i][k].clone() / a[k][k].clone();
            for j in k..n {
                let upd = m.clone() * a[k][j].clone();
                a[i][j] = a[i][j].clone() - upd;
            }
            a[i][k] = m;
        }
    }
    Lu {
        a,
        perm,
        sign,
        singular,
    }
}

/// Determinant of a square matrix.
pub fn det<S: Scalar>(a: &[Vec<S>]) -> S {
    let lu = factor(a.to_vec());
    if lu.singular {
        return S::zero();
    }
    let mut d = S::from_f64(lu.sign);
    for (k, row) in lu.a.iter().enumerate() {
        d = d * row[k].clone();
    }
    d
}

/// Solves `a x = b`; `None` when a zero pivot is met.
pub fn solve<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = a.len();
    let lu = factor(a.to_vec());
    if lu.singular {
        return None;
    }
    let mut y: Vec<S> = lu.perm.iter().map(|&p| b[p].clone()).collect();
    for i in 0..n {
        for j in 0..i {
            let upd = lu.a[i][j].clone() * y[j].clone();
            y[i] = y[i].clone() - upd;
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            let upd = lu.a[i][j].clone() * y[j].clone();
            y[i] = y[i].clone() - upd;
        }
        y[i] = y[i].clone() / lu.a[i][i].clone();
    }
    Some(y)
}

/// Max-row-sum norm of the real parts.
pub fn norm_inf<S: Scalar>(a: &[Vec<S>]) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.value().abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_determinant() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(det(&a), -1.0);
        let x = solve(&a, &[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);

        let a = vec![
            vec![4.0, -2.0, 1.0],
            vec![-2.0, 4.0, -2.0],
            vec![1.0, -2.0, 4.0],
        ];
        let b = [11.0, -16.0, 17.0];
        let x = solve(&a, &b).unwrap();
        for (row, bi) in a.iter().zip(b) {
            let lhs: f64 = row.iter().zip(&x).map(|(p, q)| p * q).sum();
            assert!((lhs - bi).abs() < 1e-12);
        }
        assert!((det(&a) - 36.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 1.0]).is_none());
        assert_eq!(det(&a), 0.0);
    }
}
