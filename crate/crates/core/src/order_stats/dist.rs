use crate::numeric::{ln_binomial, ln_q_func, q_func, q_inv};
use std::f64::consts::PI;

/// Which hard-decision outcome a reliability is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// The hard decision at the position is wrong.
    Error,
    /// The hard decision at the position is right.
    Correct,
}

/// Distributions of the reliability `|y|` of one position, conditioned on the
/// hard decision there being wrong or right. With `+1` transmitted,
/// `y = 1 + z`; an error means `y < 0`, so its reliability has density
/// `q(x + 1) / Q(1)` on `x >= 0`, and a correct position has
/// `q(x - 1) / (1 - Q(1))` (`q`, `Q` the `N(0, sigma^2)` density and tail).
///
/// Reliabilities are on the channel-output scale; LLR magnitudes are the
/// same up to the positive factor `2 / sigma^2`, so orderings agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityDistributions {
    sigma: f64,
    /// `Q(1/sigma)`, the hard-decision flip probability.
    q1: f64,
    ln_q1: f64,
    ln_one_minus_q1: f64,
}

impl ReliabilityDistributions {
    pub fn new(sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        let q1 = q_func(1.0 / sigma);
        Self { sigma, q1, ln_q1: ln_q_func(1.0 / sigma), ln_one_minus_q1: (-q1).ln_1p() }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn flip_probability(&self) -> f64 {
        self.q1
    }

    /// Upper integration limit used by the quadrature-based evaluators.
    pub fn x_max(&self) -> f64 {
        1.0 + 8.0 * self.sigma
    }

    fn ln_gauss(&self, u: f64) -> f64 {
        -0.5 * (u / self.sigma).powi(2) - (self.sigma * (2.0 * PI).sqrt()).ln()
    }

    pub fn ln_density(&self, kind: Kind, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        match kind {
            Kind::Error => self.ln_gauss(x + 1.0) - self.ln_q1,
            Kind::Correct => self.ln_gauss(x - 1.0) - self.ln_one_minus_q1,
        }
    }

    pub fn density(&self, kind: Kind, x: f64) -> f64 {
        self.ln_density(kind, x).exp()
    }

    pub fn density_error(&self, x: f64) -> f64 {
        self.density(Kind::Error, x)
    }

    pub fn density_correct(&self, x: f64) -> f64 {
        self.density(Kind::Correct, x)
    }

    /// Survival function `1 - F(x)`.
    pub fn sf(&self, kind: Kind, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match kind {
            Kind::Error => (ln_q_func((x + 1.0) / self.sigma) - self.ln_q1).exp(),
            Kind::Correct => q_func((x - 1.0) / self.sigma) / (1.0 - self.q1),
        }
    }

    pub fn cdf(&self, kind: Kind, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match kind {
            Kind::Error => {
                let sf = self.sf(kind, x);
                if sf < 0.5 {
                    1.0 - sf
                } else {
                    (self.q1 - q_func((x + 1.0) / self.sigma)) / self.q1
                }
            }
            Kind::Correct => {
                if x < 1.0 {
                    (q_func((1.0 - x) / self.sigma) - self.q1) / (1.0 - self.q1)
                } else {
                    1.0 - self.sf(kind, x)
                }
            }
        }
    }

    pub fn cdf_error(&self, x: f64) -> f64 {
        self.cdf(Kind::Error, x)
    }

    pub fn cdf_correct(&self, x: f64) -> f64 {
        self.cdf(Kind::Correct, x)
    }

    /// `ln F(x)` and `ln(1 - F(x))`.
    pub fn ln_cdf_sf(&self, kind: Kind, x: f64) -> (f64, f64) {
        let ln_sf = match kind {
            Kind::Error if x > 0.0 => ln_q_func((x + 1.0) / self.sigma) - self.ln_q1,
            _ => self.sf(kind, x).ln(),
        };
        (self.cdf(kind, x).ln(), ln_sf)
    }

    /// Quantile function: `x` with `F(x) = u`.
    pub fn inverse_cdf(&self, kind: Kind, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        match kind {
            Kind::Error => self.inverse_sf(kind, 1.0 - u),
            Kind::Correct => {
                // Q((1 - x)/sigma) = Q(1/sigma) + u (1 - Q(1/sigma)).
                let lower = self.q1 + u * (1.0 - self.q1);
                if lower <= 0.5 {
                    (1.0 - self.sigma * q_inv(lower)).max(0.0)
                } else {
                    self.inverse_sf(kind, 1.0 - u)
                }
            }
        }
    }

    /// Upper quantile: `x` with `1 - F(x) = s`; precise deep in the upper tail.
    pub fn inverse_sf(&self, kind: Kind, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        if s <= 0.0 {
            return f64::INFINITY;
        }
        match kind {
            // Q((x + 1)/sigma) = s Q(1/sigma).
            Kind::Error => (self.sigma * q_inv(s * self.q1) - 1.0).max(0.0),
            Kind::Correct => {
                // Q((x - 1)/sigma) = s (1 - Q(1/sigma)).
                let upper = s * (1.0 - self.q1);
                if upper < 0.5 {
                    1.0 + self.sigma * q_inv(upper)
                } else {
                    self.inverse_cdf(kind, 1.0 - s)
                }
            }
        }
    }

    /// Density of the `index`-th smallest of `count` i.i.d. reliabilities:
    /// `count C(count-1, index-1) f F^(index-1) (1-F)^(count-index)`.
    pub fn os_density(&self, kind: Kind, count: usize, index: usize, x: f64) -> f64 {
        self.ln_os_density(kind, count, index, x).exp()
    }

    pub fn ln_os_density(&self, kind: Kind, count: usize, index: usize, x: f64) -> f64 {
        assert!(index >= 1 && index <= count, "order-statistic index {index} outside 1..={count}");
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let (ln_f, ln_s) = self.ln_cdf_sf(kind, x);
        let mut ln = (count as f64).ln()
            + ln_binomial(count as u64 - 1, index as u64 - 1)
            + self.ln_density(kind, x);
        if index > 1 {
            ln += (index - 1) as f64 * ln_f;
        }
        if count > index {
            ln += (count - index) as f64 * ln_s;
        }
        ln
    }

    /// `P(X_(index) > x)` for the `index`-th smallest of `count`: fewer than
    /// `index` samples fall at or below `x`.
    pub fn os_sf(&self, kind: Kind, count: usize, index: usize, x: f64) -> f64 {
        let (ln_f, ln_s) = self.ln_cdf_sf(kind, x);
        (0..index.min(count + 1))
            .map(|k| binomial_term(count, k, ln_f, ln_s))
            .sum::<f64>()
            .min(1.0)
    }

    /// `P(X_(index) <= x)`.
    pub fn os_cdf(&self, kind: Kind, count: usize, index: usize, x: f64) -> f64 {
        let (ln_f, ln_s) = self.ln_cdf_sf(kind, x);
        (index..=count)
            .map(|k| binomial_term(count, k, ln_f, ln_s))
            .sum::<f64>()
            .min(1.0)
    }
}

/// `C(n,k) F^k (1-F)^(n-k)` from logs, with `0^0 = 1`.
fn binomial_term(n: usize, k: usize, ln_f: f64, ln_s: f64) -> f64 {
    let mut ln = ln_binomial(n as u64, k as u64);
    if k > 0 {
        ln += k as f64 * ln_f;
    }
    if n > k {
        ln += (n - k) as f64 * ln_s;
    }
    ln.exp()
}
