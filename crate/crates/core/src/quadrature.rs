//! Adaptive Gauss-Legendre quadrature over any [`Scalar`].

use crate::scalar::Scalar;

/// Gauss-Legendre rule on [-1, 1], nodes computed by Newton iteration.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(order: usize) -> Self {
        let n = order.max(1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let one = T::one();
        let two = T::from_i64(2);
        for i in 0..n {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = T::from_f64(guess);
            let mut dp = one;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::from_f64(4.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            nodes.push(x);
            weights.push(two / ((one - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<E, F: FnMut(T) -> Result<T, E>>(&self, f: &mut F, a: T, b: T) -> Result<T, E> {
        let two = T::from_i64(2);
        let half = (b - a) / two;
        let mid = (a + b) / two;
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * f(mid + half * *x)?;
        }
        Ok(acc * half)
    }
}

fn legendre<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kk = T::from_i64(k as i64);
        let p2 = ((T::from_i64(2 * k as i64 - 1)) * x * p1 - (kk - T::one()) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    let nn = T::from_i64(n as i64);
    let d = nn * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError<E> {
    Integrand(E),
    NotConverged { estimate: f64, error: f64 },
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
}

/// Integrate `f` over `[a, b]`, bisecting panels until each agrees with its
/// halves to `tol` (absolute, scaled by the panel's share of the interval).
pub fn adaptive<T: Scalar, E, F: FnMut(T) -> Result<T, E>>(
    rule: &GaussLegendre<T>,
    f: &mut F,
    a: T,
    b: T,
    tol: T,
    max_depth: u32,
) -> Result<Quadrature<T>, QuadError<E>> {
    if a == b {
        return Ok(Quadrature { value: T::zero(), error: T::zero() });
    }
    let width = (b - a).abs();
    let two = T::from_i64(2);
    let mut total = T::zero();
    let mut err = T::zero();
    let mut stack = vec![(a, b, rule.integrate(f, a, b).map_err(QuadError::Integrand)?, 0u32)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = (lo + hi) / two;
        let left = rule.integrate(f, lo, mid).map_err(QuadError::Integrand)?;
        let right = rule.integrate(f, mid, hi).map_err(QuadError::Integrand)?;
        let diff = (whole - left - right).abs();
        let share = tol * (hi - lo).abs() / width;
        if diff <= share || diff <= T::epsilon() * T::from_i64(16) * (left + right).abs() {
            total = total + left + right;
            err = err + diff;
        } else if depth >= max_depth {
            return Err(QuadError::NotConverged { estimate: (total + left + right).to_f64(), error: diff.to_f64() });
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(Quadrature { value: total, error: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;

    #[test]
    fn polynomial_exactness() {
        let rule = GaussLegendre::<f64>::new(5);
        let mut f = |x: f64| -> Result<f64, ()> { Ok(x.powi(9) + x * x) };
        let v = rule.integrate(&mut f, 0.0, 1.0).unwrap();
        assert!((v - (0.1 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_double_double() {
        let rule = GaussLegendre::<DoubleDouble>::new(20);
        let mut f = |x: DoubleDouble| -> Result<DoubleDouble, ()> { Ok(x.exp()) };
        let one = DoubleDouble::from(1.0);
        let q = adaptive(&rule, &mut f, DoubleDouble::from(0.0), one, DoubleDouble::from(1e-29), 30).unwrap();
        let exact = one.exp() - one;
        assert!((q.value - exact).abs().to_f64() < 1e-29);
    }

    #[test]
    fn adaptive_peaked_integrand() {
        let rule = GaussLegendre::<f64>::new(10);
        let mut f = |x: f64| -> Result<f64, ()> { Ok(1.0 / (1e-4 + x * x)) };
        let q = adaptive(&rule, &mut f, -1.0, 1.0, 1e-10, 40).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((q.value - exact).abs() / exact < 1e-10);
    }
}
