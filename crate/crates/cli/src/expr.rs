//! Closed-form data understood by configs: fields of position, time profiles and scalar growth laws.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Scalar field `x ↦ value` on the unit interval or square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldExpr {
    Constant(f64),
    /// `c + x·x₀ + y·x₁`
    Affine {
        c: f64,
        #[serde(default)]
        x: f64,
        #[serde(default)]
        y: f64,
    },
    /// `amplitude · Π sin(kπxᵢ)` over the mesh dimension.
    SineProduct { amplitude: f64, k: f64 },
    /// `amplitude · Π xᵢ(1 − xᵢ)`
    Bubble { amplitude: f64 },
    /// `base + amplitude · sin(2π·frequency·x₀)`
    SineModulated { base: f64, amplitude: f64, frequency: f64 },
    /// `base + slope · |x₀ − 1/2|`, even about the midpoint.
    Tent { base: f64, slope: f64 },
    Sum(Vec<FieldExpr>),
}

impl FieldExpr {
    pub fn eval(&self, x: &[f64; 2], dim: usize) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Affine { c, x: a, y: b } => c + a * x[0] + b * x[1],
            Self::SineProduct { amplitude, k } => amplitude * x[..dim].iter().map(|&s| (k * PI * s).sin()).product::<f64>(),
            Self::Bubble { amplitude } => amplitude * x[..dim].iter().map(|&s| s * (1.0 - s)).product::<f64>(),
            Self::SineModulated { base, amplitude, frequency } => base + amplitude * (2.0 * PI * frequency * x[0]).sin(),
            Self::Tent { base, slope } => base + slope * (x[0] - 0.5).abs(),
            Self::Sum(parts) => parts.iter().map(|p| p.eval(x, dim)).sum(),
        }
    }
}

/// Time factor multiplying the spatial part of a source.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeProfile {
    #[default]
    Constant,
    /// `a + b·t`
    Linear { a: f64, b: f64 },
    /// `sin(ω t + φ)`
    Sine { omega: f64, phase: f64 },
    /// `e^{rate·t}`
    Exp { rate: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Linear { a, b } => a + b * t,
            Self::Sine { omega, phase } => (omega * t + phase).sin(),
            Self::Exp { rate } => (rate * t).exp(),
        }
    }
}

/// Scalar growth law `v ↦ Σ cₖ sᵏ` with `s = |v|` when `abs` is set, else `s = v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthExpr {
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub abs: bool,
}

/// Named growth laws accepted by `barrier --growth`.
pub const GROWTH_IDS: [&str; 7] = ["zero", "one", "linear", "affine", "quadratic", "cubic", "quartic"];

impl GrowthExpr {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients, abs: false }
    }

    pub fn named(id: &str) -> Option<Self> {
        let c = match id {
            "zero" => vec![0.0],
            "one" => vec![1.0],
            "linear" => vec![0.0, 1.0],
            "affine" => vec![1.0, 1.0],
            "quadratic" => vec![0.0, 0.0, 1.0],
            "cubic" => vec![0.0, 0.0, 0.0, 1.0],
            "quartic" => vec![0.0, 0.0, 0.0, 0.0, 1.0],
            _ => return None,
        };
        Some(Self::new(c))
    }

    pub fn eval(&self, v: f64) -> f64 {
        let s = if self.abs { v.abs() } else { v };
        // Horner
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_evaluate() {
        let x = [0.25, 0.5];
        assert_eq!(FieldExpr::Constant(2.0).eval(&x, 1), 2.0);
        assert_eq!(FieldExpr::Affine { c: 1.0, x: 2.0, y: 4.0 }.eval(&x, 2), 3.5);
        assert!((FieldExpr::SineProduct { amplitude: 2.0, k: 1.0 }.eval(&x, 2) - 2.0 * (PI / 4.0).sin()).abs() < 1e-15);
        assert_eq!(FieldExpr::Bubble { amplitude: 16.0 }.eval(&x, 2), 16.0 * 0.1875 * 0.25);
        assert_eq!(FieldExpr::Tent { base: 2.0, slope: 1.0 }.eval(&[0.75, 0.0], 1), 2.25);
        let s = FieldExpr::Sum(vec![FieldExpr::Constant(1.0), FieldExpr::Constant(2.0)]);
        assert_eq!(s.eval(&x, 1), 3.0);
    }

    #[test]
    fn growth_laws() {
        assert_eq!(GrowthExpr::named("quartic").unwrap().eval(2.0), 16.0);
        assert_eq!(GrowthExpr::named("affine").unwrap().eval(-3.0), -2.0);
        assert_eq!(GrowthExpr { coefficients: vec![0.0, 1.0], abs: true }.eval(-3.0), 3.0);
        assert!(GROWTH_IDS.iter().all(|id| GrowthExpr::named(id).is_some()));
        assert!(GrowthExpr::named("sextic").is_none());
    }

    #[test]
    fn serde_shapes() {
        let f: FieldExpr = serde_json::from_str(r#"{"affine": {"c": 1.8, "x": 0.4}}"#).unwrap();
        assert_eq!(f, FieldExpr::Affine { c: 1.8, x: 0.4, y: 0.0 });
        assert!(serde_json::from_str::<FieldExpr>(r#"{"affine": {"c": 1.8, "z": 0.4}}"#).is_err());
        let t: TimeProfile = serde_json::from_str(r#""constant""#).unwrap();
        assert_eq!(t, TimeProfile::Constant);
    }
}
