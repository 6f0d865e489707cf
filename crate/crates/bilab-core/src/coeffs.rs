//! Closed-form coefficient presets for the vector field B and the potential q.
//!
//! Coefficients are supplied as sums of named presets with parameters and
//! evaluated analytically wherever a closed form is needed (probe sources,
//! reconstruction oracles); the discrete operator samples them on the grid.
//! The smooth compactly supported building block is the standard mollifier
//! bump exp(1 - 1/(1 - r²/w²)).

use serde::{Deserialize, Serialize};

/// C^∞ bump of unit height at `center`, supported on |x-center| < width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub width: f64,
}

impl Bump {
    #[inline]
    fn s(&self, x: [f64; 2]) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        (dx * dx + dy * dy) / (self.width * self.width)
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let s = self.s(x);
        if s >= 1.0 - 1e-14 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        let s = self.s(x);
        if s >= 1.0 - 1e-14 {
            return [0.0, 0.0];
        }
        let chi = (1.0 - 1.0 / (1.0 - s)).exp();
        let fp = -1.0 / ((1.0 - s) * (1.0 - s));
        let w2 = self.width * self.width;
        let gx = 2.0 * (x[0] - self.center[0]) / w2;
        let gy = 2.0 * (x[1] - self.center[1]) / w2;
        [chi * fp * gx, chi * fp * gy]
    }

    pub fn laplacian(&self, x: [f64; 2]) -> f64 {
        let s = self.s(x);
        if s >= 1.0 - 1e-14 {
            return 0.0;
        }
        let chi = (1.0 - 1.0 / (1.0 - s)).exp();
        let om = 1.0 - s;
        let fp = -1.0 / (om * om);
        let fpp = -2.0 / (om * om * om);
        let w2 = self.width * self.width;
        let g2 = 4.0 * s / w2; // |∇s|²
        chi * ((fp * fp + fpp) * g2 + fp * 4.0 / w2)
    }

    /// Hessian entries (xx, xy, yy).
    pub fn hessian(&self, x: [f64; 2]) -> [f64; 3] {
        let s = self.s(x);
        if s >= 1.0 - 1e-14 {
            return [0.0; 3];
        }
        let chi = (1.0 - 1.0 / (1.0 - s)).exp();
        let om = 1.0 - s;
        let fp = -1.0 / (om * om);
        let fpp = -2.0 / (om * om * om);
        let w2 = self.width * self.width;
        let gx = 2.0 * (x[0] - self.center[0]) / w2;
        let gy = 2.0 * (x[1] - self.center[1]) / w2;
        let c = fp * fp + fpp;
        [
            chi * (c * gx * gx + fp * 2.0 / w2),
            chi * (c * gx * gy),
            chi * (c * gy * gy + fp * 2.0 / w2),
        ]
    }
}

/// One additive term of a scalar coefficient (the potential q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarTerm {
    Zero,
    Constant {
        value: f64,
    },
    Bump {
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
    /// amplitude · cos(2π m1 x/L1) · cos(2π m2 y/L2)
    Trig {
        modes: [i32; 2],
        amplitude: f64,
        lengths: [f64; 2],
    },
}

impl ScalarTerm {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            ScalarTerm::Zero => 0.0,
            ScalarTerm::Constant { value } => *value,
            ScalarTerm::Bump {
                center,
                width,
                amplitude,
            } => {
                amplitude
                    * Bump {
                        center: *center,
                        width: *width,
                    }
                    .value(x)
            }
            ScalarTerm::Trig {
                modes,
                amplitude,
                lengths,
            } => {
                let tx = 2.0 * std::f64::consts::PI * modes[0] as f64 * x[0] / lengths[0];
                let ty = 2.0 * std::f64::consts::PI * modes[1] as f64 * x[1] / lengths[1];
                amplitude * tx.cos() * ty.cos()
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> ScalarTerm {
        match self.clone() {
            ScalarTerm::Zero => ScalarTerm::Zero,
            ScalarTerm::Constant { value } => ScalarTerm::Constant {
                value: value * factor,
            },
            ScalarTerm::Bump {
                center,
                width,
                amplitude,
            } => ScalarTerm::Bump {
                center,
                width,
                amplitude: amplitude * factor,
            },
            ScalarTerm::Trig {
                modes,
                amplitude,
                lengths,
            } => ScalarTerm::Trig {
                modes,
                amplitude: amplitude * factor,
                lengths,
            },
        }
    }
}

/// One additive term of the vector field B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorTerm {
    Zero,
    Constant {
        value: [f64; 2],
    },
    /// Divergence-free field amplitude·(-∂₂χ, ∂₁χ) with scalar curl amplitude·Δχ.
    PerpGradBump {
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
    /// Gradient field amplitude·∇χ = ∇ψ with ψ = amplitude·χ (curl-free,
    /// ψ = |∇ψ| = 0 on Γ when the bump support avoids the boundary).
    GradBump {
        center: [f64; 2],
        width: f64,
        amplitude: f64,
    },
}

impl VectorTerm {
    fn bump(center: [f64; 2], width: f64) -> Bump {
        Bump { center, width }
    }

    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            VectorTerm::Zero => [0.0, 0.0],
            VectorTerm::Constant { value } => *value,
            VectorTerm::PerpGradBump {
                center,
                width,
                amplitude,
            } => {
                let g = Self::bump(*center, *width).grad(x);
                [-amplitude * g[1], amplitude * g[0]]
            }
            VectorTerm::GradBump {
                center,
                width,
                amplitude,
            } => {
                let g = Self::bump(*center, *width).grad(x);
                [amplitude * g[0], amplitude * g[1]]
            }
        }
    }

    pub fn div(&self, x: [f64; 2]) -> f64 {
        match self {
            VectorTerm::Zero | VectorTerm::Constant { .. } | VectorTerm::PerpGradBump { .. } => 0.0,
            VectorTerm::GradBump {
                center,
                width,
                amplitude,
            } => amplitude * Self::bump(*center, *width).laplacian(x),
        }
    }

    /// Scalar curl ∂₁B₂ - ∂₂B₁.
    pub fn curl(&self, x: [f64; 2]) -> f64 {
        match self {
            VectorTerm::Zero | VectorTerm::Constant { .. } | VectorTerm::GradBump { .. } => 0.0,
            VectorTerm::PerpGradBump {
                center,
                width,
                amplitude,
            } => amplitude * Self::bump(*center, *width).laplacian(x),
        }
    }

    /// Scalar potential when the term is a gradient field.
    pub fn psi(&self, x: [f64; 2]) -> Option<f64> {
        match self {
            VectorTerm::Zero => Some(0.0),
            VectorTerm::GradBump {
                center,
                width,
                amplitude,
            } => Some(amplitude * Self::bump(*center, *width).value(x)),
            _ => None,
        }
    }

    pub fn scaled(&self, factor: f64) -> VectorTerm {
        match self.clone() {
            VectorTerm::Zero => VectorTerm::Zero,
            VectorTerm::Constant { value } => VectorTerm::Constant {
                value: [value[0] * factor, value[1] * factor],
            },
            VectorTerm::PerpGradBump {
                center,
                width,
                amplitude,
            } => VectorTerm::PerpGradBump {
                center,
                width,
                amplitude: amplitude * factor,
            },
            VectorTerm::GradBump {
                center,
                width,
                amplitude,
            } => VectorTerm::GradBump {
                center,
                width,
                amplitude: amplitude * factor,
            },
        }
    }
}

/// A full coefficient specification: q and B as sums of preset terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSpec {
    #[serde(default)]
    pub q: Vec<ScalarTerm>,
    #[serde(default)]
    pub b: Vec<VectorTerm>,
}

impl CoefficientSpec {
    pub fn free() -> Self {
        CoefficientSpec::default()
    }

    pub fn with_q(mut self, t: ScalarTerm) -> Self {
        self.q.push(t);
        self
    }

    pub fn with_b(mut self, t: VectorTerm) -> Self {
        self.b.push(t);
        self
    }

    pub fn q_eval(&self, x: [f64; 2]) -> f64 {
        self.q.iter().map(|t| t.eval(x)).sum()
    }

    pub fn b_eval(&self, x: [f64; 2]) -> [f64; 2] {
        let mut v = [0.0, 0.0];
        for t in &self.b {
            let w = t.eval(x);
            v[0] += w[0];
            v[1] += w[1];
        }
        v
    }

    pub fn div_b_eval(&self, x: [f64; 2]) -> f64 {
        self.b.iter().map(|t| t.div(x)).sum()
    }

    pub fn curl_b_eval(&self, x: [f64; 2]) -> f64 {
        self.b.iter().map(|t| t.curl(x)).sum()
    }

    /// Stable content signature for snapshot headers.
    pub fn signature(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("spec serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}
