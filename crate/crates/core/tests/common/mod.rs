#![allow(dead_code)]

use ndarray::Array2;
use probenet::laplacian::laplacian_from_edge_weights;
use probenet::rng::XorShift64Star;
use probenet::{erdos_renyi, Laplacian};

/// Connected ER graph with edge weights uniform in [0.5, 1.5].
pub fn random_laplacian(r: &mut XorShift64Star, n: usize, m: usize) -> Laplacian {
    let g = erdos_renyi(n, m, r.next_u64()).unwrap();
    let w: Vec<f64> = (0..g.edge_count()).map(|_| r.uniform(0.5, 1.5)).collect();
    laplacian_from_edge_weights(&g, &w).unwrap()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[[x, c]].abs().total_cmp(&m[[y, c]].abs())).unwrap();
        for k in 0..n {
            m.swap([c, k], [p, k]);
            inv.swap([c, k], [p, k]);
        }
        let d = m[[c, c]];
        assert!(d.abs() > 1e-300, "singular");
        for k in 0..n {
            m[[c, k]] /= d;
            inv[[c, k]] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[[r, c]];
                if f != 0.0 {
                    for k in 0..n {
                        m[[r, k]] -= f * m[[c, k]];
                        inv[[r, k]] -= f * inv[[c, k]];
                    }
                }
            }
        }
    }
    inv
}

/// Pseudo-inverse of a connected Laplacian: `(L + 11^T/n)^{-1} - 11^T/n`.
pub fn laplacian_pinv(l: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let ones = Array2::from_elem((n, n), 1.0 / n as f64);
    invert(&(l + &ones)) - ones
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
