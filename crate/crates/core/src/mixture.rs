//! Ternary mixture parameters and the per-node 2×2 flux relation.
//!
//! With ξ₃ = 1 − ξ₁ − ξ₂ and N₃ = −N₁ − N₂ eliminated, the Maxwell–Stefan
//! relations at a single node reduce to
//!
//! ```text
//! [ 1/D₁₃ + α ξ₂      −α ξ₁      ] [N₁]   [−∂ₓξ₁]
//! [   −β ξ₂       1/D₂₃ + β ξ₁   ] [N₂] = [−∂ₓξ₂]
//! ```
//!
//! with α = 1/D₁₂ − 1/D₁₃ and β = 1/D₁₂ − 1/D₂₃. The inverse is available in
//! closed form, so nothing here ever assembles a global matrix.

use crate::error::{Error, Result};

/// Smallest admissible magnitude of the determinant factor
/// `1 + α D₁₃ ξ₂ + β D₂₃ ξ₁` before the node is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Tolerance for simplex membership of solver-produced compositions.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Binary Maxwell–Stefan diffusivities of the three species pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    d12: f64,
    d13: f64,
    d23: f64,
}

impl MixtureSpec {
    pub fn new(d12: f64, d13: f64, d23: f64) -> Result<Self> {
        for (name, value) in [("d12", d12), ("d13", d13), ("d23", d23)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidDiffusivity { name, value });
            }
        }
        Ok(Self { d12, d13, d23 })
    }

    pub fn d12(&self) -> f64 {
        self.d12
    }

    pub fn d13(&self) -> f64 {
        self.d13
    }

    pub fn d23(&self) -> f64 {
        self.d23
    }

    /// Largest of the three binary diffusivities; sets the explicit step bound.
    pub fn max_diffusivity(&self) -> f64 {
        self.d12.max(self.d13).max(self.d23)
    }

    /// α = 1/D₁₂ − 1/D₁₃ and β = 1/D₁₂ − 1/D₂₃.
    pub fn coefficients(&self) -> MixtureCoefficients {
        derive_coefficients(self)
    }
}

/// Reduced reciprocal-diffusivity differences α and β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

pub fn derive_coefficients(spec: &MixtureSpec) -> MixtureCoefficients {
    let inv12 = 1.0 / spec.d12;
    MixtureCoefficients {
        alpha: inv12 - 1.0 / spec.d13,
        beta: inv12 - 1.0 / spec.d23,
    }
}

/// Mole fractions of species 1 and 2 at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeComposition {
    pub xi1: f64,
    pub xi2: f64,
}

impl NodeComposition {
    pub fn new(xi1: f64, xi2: f64) -> Self {
        Self { xi1, xi2 }
    }

    pub fn xi3(&self) -> f64 {
        1.0 - self.xi1 - self.xi2
    }

    /// Simplex membership with slack `tol` on each bound.
    pub fn is_admissible(&self, tol: f64) -> bool {
        self.xi1.is_finite()
            && self.xi2.is_finite()
            && self.xi1 >= -tol
            && self.xi2 >= -tol
            && self.xi1 + self.xi2 <= 1.0 + tol
    }
}

/// A real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxMatrix2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl FluxMatrix2 {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    #[inline]
    pub fn apply(&self, v1: f64, v2: f64) -> (f64, f64) {
        (self.a * v1 + self.b * v2, self.c * v1 + self.d * v2)
    }

    /// Largest entry-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

/// The forward flux-relation matrix at `node`.
pub fn flux_system_matrix(
    coeffs: &MixtureCoefficients,
    node: NodeComposition,
    spec: &MixtureSpec,
) -> FluxMatrix2 {
    let MixtureCoefficients { alpha, beta } = *coeffs;
    FluxMatrix2 {
        a: 1.0 / spec.d13 + alpha * node.xi2,
        b: -alpha * node.xi1,
        c: -beta * node.xi2,
        d: 1.0 / spec.d23 + beta * node.xi1,
    }
}

/// Closed-form inverse of [`flux_system_matrix`]:
/// γ·[[1/D₂₃ + βξ₁, αξ₁], [βξ₂, 1/D₁₃ + αξ₂]] with
/// γ = D₁₃D₂₃ / (1 + αD₁₃ξ₂ + βD₂₃ξ₁).
pub fn flux_system_inverse(
    coeffs: &MixtureCoefficients,
    node: NodeComposition,
    spec: &MixtureSpec,
) -> Result<FluxMatrix2> {
    let MixtureCoefficients { alpha, beta } = *coeffs;
    let denominator = 1.0 + alpha * spec.d13 * node.xi2 + beta * spec.d23 * node.xi1;
    // NaN compositions fail this comparison too.
    if !(denominator.abs() >= SINGULAR_THRESHOLD) {
        return Err(Error::SingularSystem {
            node: None,
            denominator,
        });
    }
    let gamma = spec.d13 * spec.d23 / denominator;
    Ok(FluxMatrix2 {
        a: gamma * (1.0 / spec.d23 + beta * node.xi1),
        b: gamma * alpha * node.xi1,
        c: gamma * beta * node.xi2,
        d: gamma * (1.0 / spec.d13 + alpha * node.xi2),
    })
}

/// Fluxes (N₁, N₂) at a node given the negated gradients (−∂ₓξ₁, −∂ₓξ₂).
pub fn solve_node_fluxes(
    coeffs: &MixtureCoefficients,
    node: NodeComposition,
    spec: &MixtureSpec,
    rhs1: f64,
    rhs2: f64,
) -> Result<(f64, f64)> {
    Ok(flux_system_inverse(coeffs, node, spec)?.apply(rhs1, rhs2))
}

/// A mixture spec bundled with its derived coefficients so the two can never
/// drift apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSystem {
    spec: MixtureSpec,
    coeffs: MixtureCoefficients,
}

impl FluxSystem {
    pub fn new(spec: MixtureSpec) -> Self {
        Self {
            spec,
            coeffs: derive_coefficients(&spec),
        }
    }

    pub fn spec(&self) -> &MixtureSpec {
        &self.spec
    }

    pub fn coefficients(&self) -> &MixtureCoefficients {
        &self.coeffs
    }

    pub fn matrix(&self, node: NodeComposition) -> FluxMatrix2 {
        flux_system_matrix(&self.coeffs, node, &self.spec)
    }

    pub fn inverse(&self, node: NodeComposition) -> Result<FluxMatrix2> {
        flux_system_inverse(&self.coeffs, node, &self.spec)
    }

    pub fn solve(&self, node: NodeComposition, rhs1: f64, rhs2: f64) -> Result<(f64, f64)> {
        solve_node_fluxes(&self.coeffs, node, &self.spec, rhs1, rhs2)
    }
}
