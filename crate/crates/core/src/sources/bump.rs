/// Derivatives up to third order of a scalar function of the plane.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
    pub third: [[[f64; 2]; 2]; 2],
}

impl Jet3 {
    pub fn scale(mut self, a: f64) -> Self {
        self.value *= a;
        for i in 0..2 {
            self.grad[i] *= a;
            for j in 0..2 {
                self.hess[i][j] *= a;
                for k in 0..2 {
                    self.third[i][j][k] *= a;
                }
            }
        }
        self
    }

    /// Product with the affine function `p(x) = p0 + pg·x`, given its value at the point.
    pub fn times_affine(self, p: f64, pg: [f64; 2]) -> Self {
        let mut out = Jet3 {
            value: p * self.value,
            ..Default::default()
        };
        for i in 0..2 {
            out.grad[i] = p * self.grad[i] + pg[i] * self.value;
            for j in 0..2 {
                out.hess[i][j] = p * self.hess[i][j] + pg[i] * self.grad[j] + pg[j] * self.grad[i];
                for k in 0..2 {
                    out.third[i][j][k] = p * self.third[i][j][k]
                        + pg[i] * self.hess[j][k]
                        + pg[j] * self.hess[i][k]
                        + pg[k] * self.hess[i][j];
                }
            }
        }
        out
    }
}

/// The mollifier `exp(1/(q − 1))`, `q = |x − x0|² / ρ²`, supported in `|x − x0| < ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Bump {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let q = self.q(x, y);
        if q < 1.0 {
            (1.0 / (q - 1.0)).exp()
        } else {
            0.0
        }
    }

    fn q(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        (dx * dx + dy * dy) / (self.radius * self.radius)
    }

    pub fn jet(&self, x: f64, y: f64) -> Jet3 {
        let q = self.q(x, y);
        if q >= 1.0 {
            return Jet3::default();
        }
        // derivatives of g(q) = e^t, t = 1/(q − 1)
        let t = 1.0 / (q - 1.0);
        let g = t.exp();
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t2 * t2;
        let g1 = -t2 * g;
        let g2 = (2.0 * t3 + t4) * g;
        let g3 = -(6.0 * t4 + 6.0 * t4 * t + t4 * t2) * g;
        // f(s) = g(s/ρ²), s = |d|²
        let inv = 1.0 / (self.radius * self.radius);
        let (f1, f2, f3) = (g1 * inv, g2 * inv * inv, g3 * inv * inv * inv);
        let d = [x - self.center[0], y - self.center[1]];
        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let mut jet = Jet3 {
            value: g,
            ..Default::default()
        };
        for i in 0..2 {
            jet.grad[i] = 2.0 * f1 * d[i];
            for j in 0..2 {
                jet.hess[i][j] = 4.0 * f2 * d[i] * d[j] + 2.0 * f1 * delta(i, j);
                for k in 0..2 {
                    jet.third[i][j][k] = 8.0 * f3 * d[i] * d[j] * d[k]
                        + 4.0 * f2 * (delta(i, j) * d[k] + delta(i, k) * d[j] + delta(j, k) * d[i]);
                }
            }
        }
        jet
    }
}
