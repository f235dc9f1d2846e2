use crate::error::{Error, Result};

/// Configuration for the fixed-order Gauss-Legendre rule used to evaluate
/// kernel-constant integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Number of Gauss-Legendre nodes. The integrands here are smooth, so the
    /// default is far past the point where doubling changes anything.
    pub node_count: usize,
    /// Absolute accuracy the rule is expected to deliver.
    pub abs_tol: f64,
}

impl QuadratureSpec {
    pub fn new(node_count: usize, abs_tol: f64) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::InvalidInput(format!(
                "quadrature node count must be at least 2, got {node_count}"
            )));
        }
        if !(abs_tol.is_finite() && abs_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerance must be a positive number, got {abs_tol}"
            )));
        }
        Ok(QuadratureSpec {
            node_count,
            abs_tol,
        })
    }

    pub fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.node_count)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            node_count: 200,
            abs_tol: 1e-10,
        }
    }
}

/// A Gauss-Legendre rule on [-1, 1], mapped affinely to arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build an `n`-point rule. Nodes are the roots of the Legendre
    /// polynomial P_n, found by Newton iteration from the Chebyshev-based
    /// initial guesses; weights follow from the derivative values.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least two nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() <= 1e-15 * x.abs().max(1.0) {
                    let (_, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // The middle node of an odd rule is exactly zero.
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_with_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        GaussLegendre { nodes, weights }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over [a, b]. Degenerate or inverted intervals integrate
    /// to zero.
    ///
    /// Terms are accumulated with Neumaier compensation so the sum stays
    /// accurate to ~1 ulp even when the integrand takes large values of both
    /// signs that cancel to an order-one result.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        // Negated so NaN endpoints yield the empty integral rather than NaN.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(b > a) {
            return 0.0;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        let mut comp = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let term = w * f(mid + half * x);
            let next = acc + term;
            comp += if acc.abs() >= term.abs() {
                (acc - next) + term
            } else {
                (term - next) + acc
            };
            acc = next;
        }
        (acc + comp) * half
    }
}

/// Evaluate (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1); at |x| = 1 the nodes never
    // land, so the denominator is safe for quadrature use.
    let d = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}
