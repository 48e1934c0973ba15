use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Thin QR factors: `q` is m×p with orthonormal columns, `r` is p×n upper
/// triangular with a non-negative diagonal, `p = min(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QrFactors<T = f64> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

/// Householder QR. Rank deficiency shows up as small diagonal entries of `r`.
pub fn qr<T: Scalar>(a: &Matrix<T>) -> QrFactors<T> {
    let (m, n) = a.shape();
    let p = m.min(n);
    let mut w = a.clone();
    let mut reflectors: Vec<(Vec<T>, T)> = Vec::with_capacity(p);

    for j in 0..p {
        let x: Vec<T> = (j..m).map(|i| w[(i, j)]).collect();
        let norm = x.iter().map(|&t| t * t).sum::<T>().sqrt();
        if norm == T::zero() {
            reflectors.push((x, T::zero()));
            continue;
        }
        let alpha = if x[0] >= T::zero() { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vtv: T = v.iter().map(|&t| t * t).sum();
        let beta = if vtv == T::zero() {
            T::zero()
        } else {
            T::of(2.0) / vtv
        };
        for c in j..n {
            let s: T = (j..m).map(|i| v[i - j] * w[(i, c)]).sum();
            let s = s * beta;
            for i in j..m {
                w[(i, c)] -= s * v[i - j];
            }
        }
        reflectors.push((v, beta));
    }

    let mut r = Matrix::zeros(p, n);
    for i in 0..p {
        for c in i..n {
            r[(i, c)] = w[(i, c)];
        }
    }

    // Q = H_0 H_1 … H_{p-1} applied to the first p columns of the identity.
    let mut q = Matrix::from_fn(m, p, |i, j| if i == j { T::one() } else { T::zero() });
    for (j, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta == T::zero() {
            continue;
        }
        for c in 0..p {
            let s: T = (j..m).map(|i| v[i - j] * q[(i, c)]).sum();
            let s = s * *beta;
            for i in j..m {
                q[(i, c)] -= s * v[i - j];
            }
        }
    }

    for i in 0..p {
        if r[(i, i)] < T::zero() {
            for c in 0..n {
                r[(i, c)] = -r[(i, c)];
            }
            for row in 0..m {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    QrFactors { q, r }
}
