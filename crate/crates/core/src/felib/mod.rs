//! Lagrange finite elements: reference bases, quadrature, DOF maps and fields.

mod element;
mod field;
mod quadrature;
mod space;

pub use element::{
    default_registry, reference_element, ElementRegistry, LagrangeP1, LagrangeP2, LagrangeP3,
    ReferenceElement,
};
pub use field::{interpolate, FeField, QuadValues};
pub use quadrature::{quadrature_rule, QuadratureRule, MAX_DEGREE};
pub use space::{build_space, CellGeometry, FeSpace, Tabulation};
