use serde::{Deserialize, Serialize};

/// Kernels supported on `[0, 1]`, evaluated at `z = |x_i - x| / h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    /// `(1 - z^2)_+`
    #[default]
    Epanechnikov,
    /// `(1 - z)_+`
    Triangular,
    /// `((1 - z^2)_+)^2`
    Biweight,
    /// `(1 - z^3)_+^3`
    Tricube,
    /// Indicator of `z < 1`; not Lipschitz.
    Uniform,
}

impl Kernel {
    pub fn eval(&self, z: f64) -> f64 {
        if !(0.0..1.0).contains(&z) {
            return 0.0;
        }
        match self {
            Kernel::Epanechnikov => 1.0 - z * z,
            Kernel::Triangular => 1.0 - z,
            Kernel::Biweight => (1.0 - z * z).powi(2),
            Kernel::Tricube => (1.0 - z * z * z).powi(3),
            Kernel::Uniform => 1.0,
        }
    }

    /// Upper bound `c_ker` of the kernel.
    pub fn upper_bound(&self) -> f64 {
        1.0
    }

    pub fn support_radius(&self) -> f64 {
        1.0
    }

    pub fn is_lipschitz(&self) -> bool {
        !matches!(self, Kernel::Uniform)
    }

    pub fn parse(name: &str) -> Option<Kernel> {
        match name {
            "epanechnikov" => Some(Kernel::Epanechnikov),
            "triangular" => Some(Kernel::Triangular),
            "biweight" => Some(Kernel::Biweight),
            "tricube" => Some(Kernel::Tricube),
            "uniform" => Some(Kernel::Uniform),
            _ => None,
        }
    }
}
