use crate::sparse::{axpy, dot};

/// Outcome of a Krylov solve.
#[derive(Debug, Clone, Copy)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Restarted GMRES in the inner product `⟨x, y⟩ = xᵀ M y`.
///
/// Solves `T x = b` for `apply(v) = T v`, starting from `x`, where `metric(v) = M v`
/// for a symmetric positive definite `M`. Stops when `‖b − T x‖_M ≤ tol ‖b‖_M`.
/// Left-preconditioned systems are passed in already composed.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    metric: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> KrylovStats {
    let m_norm = |v: &[f64]| dot(v, &metric(v)).max(0.0).sqrt();
    let b_norm = m_norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return KrylovStats {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let residual = |x: &[f64]| -> Vec<f64> {
        let tx = apply(x);
        b.iter().zip(&tx).map(|(bi, ti)| bi - ti).collect()
    };
    let mut total = 0;
    let mut r = residual(x);
    let mut rel = m_norm(&r) / b_norm;
    while rel > tol && total < max_iter {
        let beta = rel * b_norm;
        let q0: Vec<f64> = r.iter().map(|v| v / beta).collect();
        let mq0 = metric(&q0);
        let mut basis: Vec<(Vec<f64>, Vec<f64>)> = vec![(q0, mq0)];
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        for k in 0..restart {
            let mut w = apply(&basis[k].0);
            let mut h = vec![0.0; k + 2];
            // two Gram–Schmidt passes keep the basis orthogonal at tight tolerances
            for _ in 0..2 {
                for (i, (q, mq)) in basis.iter().enumerate() {
                    let c = dot(&w, mq);
                    h[i] += c;
                    axpy(-c, q, &mut w);
                }
            }
            let mw = metric(&w);
            h[k + 1] = dot(&w, &mw).max(0.0).sqrt();
            for i in 0..k {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let next = h[k + 1];
            let denom = h[k].hypot(next);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[k] / denom, next / denom) };
            cs.push(c);
            sn.push(s);
            h[k] = denom;
            h[k + 1] = 0.0;
            g.push(-s * g[k]);
            g[k] *= c;
            hess.push(h);
            total += 1;
            if g[k + 1].abs() / b_norm <= tol || total >= max_iter || next == 0.0 {
                break;
            }
            let q: Vec<f64> = w.iter().map(|v| v / next).collect();
            let mq: Vec<f64> = mw.iter().map(|v| v / next).collect();
            basis.push((q, mq));
        }
        let m = hess.len();
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for j in i + 1..m {
                acc -= hess[j][i] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        for (yi, (q, _)) in y.iter().zip(&basis) {
            axpy(*yi, q, x);
        }
        r = residual(x);
        let new_rel = m_norm(&r) / b_norm;
        let stalled = new_rel >= rel;
        rel = new_rel;
        if m == 0 || stalled {
            break;
        }
    }
    KrylovStats {
        iterations: total,
        relative_residual: rel,
        converged: rel <= tol,
    }
}


#[cfg(test)]
mod metric_tests {
    use super::*;

    #[test]
    fn weighted_metric_converges() {
        let n = 30;
        let weights: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| v[i] + if i > 0 { 0.4 * v[i - 1] } else { 0.0 })
                .collect()
        };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let stats = gmres(
            apply,
            |v| v.iter().zip(&weights).map(|(a, w)| a * w).collect(),
            &b,
            &mut x,
            1e-13,
            8,
            400,
        );
        assert!(stats.converged, "{stats:?}");
    }
}
