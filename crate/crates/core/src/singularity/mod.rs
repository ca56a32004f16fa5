//! Singularity structure at the edge: frequency cutoffs, the residue
//! inverse, the closed-form singular basis, high-frequency expansion of the
//! solution and least-squares fitting of the singular profile.

pub mod basis;
pub mod expansion;
pub mod fit;
pub mod poly;
pub mod residue;

pub use basis::{phi_basis, phi_constant, phi_y2_derivative_check, quadratic, LogArcForm, SingularBasis};
pub use expansion::{expand_jets, expand_terms, AsymptoticTerm, EdgeJets, Expansion, TermSource};
pub use fit::{
    edge_gradient, edge_slice, fit_samples, fit_singularities, singular_function, subtract_singular, FitWindow,
    SingularFit,
};
pub use poly::Poly2;
pub use residue::{residue_inverse, residue_quadrature, residue_table, ResidueRow};

use ndarray::Zip;

use crate::cutoff::plateau;
use crate::spectral::{SpectralField, SpectralKind};
use crate::{EdgeError, Result};

/// Radii of the smooth cutoffs `χ` (one inside `inner`, zero past `outer`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            inner: 4.0,
            outer: 8.0,
        }
    }
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner > 0.0 && self.outer > self.inner && self.outer.is_finite()) {
            return Err(EdgeError::InvalidArgument(format!(
                "cutoff radii need 0 < inner < outer, got {} and {}",
                self.inner, self.outer
            )));
        }
        Ok(())
    }

    /// `χ(η)` on one axis.
    pub fn chi(&self, eta: f64) -> f64 {
        plateau(eta.abs(), self.inner, self.outer)
    }

    /// `χ` of the radius `|(η1, η2)|`.
    pub fn chi_radial(&self, eta1: f64, eta2: f64) -> f64 {
        plateau(eta1.hypot(eta2), self.inner, self.outer)
    }
}

/// `F = low + seam + high` with `low = χ_η F` and `high = χ'_{η1} χ'_{η2} F`.
#[derive(Clone, Debug)]
pub struct CutoffSplit {
    pub low: SpectralField,
    pub seam: SpectralField,
    pub high: SpectralField,
}

pub fn cutoff_split(field: &SpectralField, spec: &CutoffSpec) -> Result<CutoffSplit> {
    spec.validate()?;
    if field.kind != SpectralKind::Full {
        return Err(EdgeError::InvalidArgument(
            "cutoff split needs a field transformed in both Y variables".into(),
        ));
    }
    let eta = &field.grid.eta;
    let mut low = field.clone();
    let mut high = field.clone();
    for ((_, _, m1, m2), v) in low.data.indexed_iter_mut() {
        *v *= spec.chi_radial(eta[m1], eta[m2]);
    }
    for ((_, _, m1, m2), v) in high.data.indexed_iter_mut() {
        *v *= (1.0 - spec.chi(eta[m1])) * (1.0 - spec.chi(eta[m2]));
    }
    let mut seam = field.clone();
    Zip::from(&mut seam.data)
        .and(&low.data)
        .and(&high.data)
        .for_each(|s, &l, &h| *s -= l + h);
    Ok(CutoffSplit { low, seam, high })
}
