//! Filtered-derivative velocity estimate λs/(s + λ), backward-Euler
//! discretization:
//!
//! y_k = (y_{k−1} + λ (x_k − x_{k−1})) / (1 + λT)

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeFilter {
    pub lambda: f64,
    pub period: f64,
    output: f64,
}

impl DerivativeFilter {
    pub fn new(lambda: f64, period: f64) -> Self {
        Self {
            lambda,
            period,
            output: 0.0,
        }
    }

    /// Advance one sample and return the velocity estimate.
    pub fn update(&mut self, new_angle: f64, prev_angle: f64) -> f64 {
        let lt = self.lambda * self.period;
        self.output = (self.output + self.lambda * (new_angle - prev_angle)) / (1.0 + lt);
        self.output
    }

    pub fn output(&self) -> f64 {
        self.output
    }

    /// Discrete pole of the recursion.
    pub fn pole(&self) -> f64 {
        1.0 / (1.0 + self.lambda * self.period)
    }

    pub fn reset(&mut self) {
        self.output = 0.0;
    }
}
