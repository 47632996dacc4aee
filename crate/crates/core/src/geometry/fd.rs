//! Central finite differences with step `cbrt(eps) * max(1, |x_k|)`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

pub fn step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Applies `f` at `x ± h e_k` and returns `(f(x + h e_k) - f(x - h e_k)) / 2h`
/// for every coordinate `k`.
pub fn partials<T, F>(x: &[f64], mut f: F, combine: impl Fn(T, T, f64) -> T) -> Result<Vec<T>>
where
    F: FnMut(&[f64]) -> Result<T>,
{
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let h = step(x[k]);
        probe[k] = x[k] + h;
        let plus = f(&probe)?;
        probe[k] = x[k] - h;
        let minus = f(&probe)?;
        probe[k] = x[k];
        // the realized step, not the nominal one
        let width = (x[k] + h) - (x[k] - h);
        out.push(combine(plus, minus, width));
    }
    Ok(out)
}

pub fn gradient<F>(x: &[f64], f: F) -> Result<DVector<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let parts = partials(x, f, |p, m, w| (p - m) / w)?;
    Ok(DVector::from_vec(parts))
}

/// Jacobian with `J[(k, j)] = d f^k / d x^j`.
pub fn jacobian<F>(x: &[f64], rows: usize, f: F) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<DVector<f64>>,
{
    let cols = partials(x, f, |p, m, w| (p - m) / w)?;
    let mut jac = DMatrix::zeros(rows, x.len());
    for (j, col) in cols.iter().enumerate() {
        jac.set_column(j, col);
    }
    Ok(jac)
}

pub fn matrix_partials<F>(x: &[f64], f: F) -> Result<Vec<DMatrix<f64>>>
where
    F: FnMut(&[f64]) -> Result<DMatrix<f64>>,
{
    partials(x, f, |p, m, w| (p - m) / w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_smooth_function() {
        let g = gradient(&[1.0, 2.0], |x| Ok(x[0].sin() * x[1].exp())).unwrap();
        assert!((g[0] - 1f64.cos() * 2f64.exp()).abs() < 1e-9);
        assert!((g[1] - 1f64.sin() * 2f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn jacobian_layout() {
        let j = jacobian(&[1.0, 3.0], 2, |x| Ok(DVector::from_vec(vec![x[0] * x[1], x[1]])))
            .unwrap();
        assert!((j[(0, 0)] - 3.0).abs() < 1e-10);
        assert!((j[(0, 1)] - 1.0).abs() < 1e-10);
        assert!(j[(1, 0)].abs() < 1e-10);
        assert!((j[(1, 1)] - 1.0).abs() < 1e-10);
    }
}
