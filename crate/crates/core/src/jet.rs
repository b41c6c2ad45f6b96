/// A scalar together with its first two derivatives along one input.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Jet::new(value, 0.0, 0.0)
    }

    /// The identity map `x ↦ x` evaluated at `x`.
    pub const fn variable(x: f64) -> Self {
        Jet::new(x, 1.0, 0.0)
    }

    /// Derivative of the given order (0, 1 or 2).
    pub fn derivative(&self, order: usize) -> f64 {
        match order {
            0 => self.value,
            1 => self.d1,
            2 => self.d2,
            _ => 0.0,
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Jet::new(k * self.value, k * self.d1, k * self.d2)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}
