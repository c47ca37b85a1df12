//! Scalar, (0,1) and (0,2) fields on a lattice window.
//!
//! Fields are stored over the whole window of their grid so that operator
//! images, which reach one layer past the mask, need no reindexing. Inner
//! products carry the weight `h^4` per node.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::stencil::{dot, norm_sqr};
use crate::error::{Error, Result};
use crate::geometry::{GridDomain, Point4};

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

fn weight(grid: &GridDomain) -> f64 {
    grid.h().powi(4)
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn check(grid: &GridDomain, v: &[Complex64], what: &str) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "{what} has {} entries, the grid window has {}",
            v.len(),
            grid.len()
        )));
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} has non-finite entries")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &GridDomain) -> Self {
        ScalarField { values: zeros(grid.len()) }
    }

    /// Checked constructor: right length, finite, supported on the mask.
    pub fn from_values(grid: &GridDomain, values: Vec<Complex64>) -> Result<Self> {
        check(grid, &values, "scalar field")?;
        if values.iter().zip(grid.mask()).any(|(v, &m)| !m && *v != Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidParameter("scalar field is not supported on the mask".into()));
        }
        Ok(ScalarField { values })
    }

    /// Samples `f` at mask nodes.
    pub fn sample<F: Fn(&Point4) -> Complex64>(grid: &GridDomain, f: F) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                if grid.in_mask(i) {
                    f(&grid.lattice.coord(i))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        ScalarField { values }
    }

    pub fn random<R: Rng>(grid: &GridDomain, rng: &mut R) -> Self {
        let values = (0..grid.len())
            .map(|i| if grid.in_mask(i) { gaussian(rng) } else { Complex64::new(0.0, 0.0) })
            .collect();
        ScalarField { values }
    }

    pub fn inner(&self, other: &ScalarField, grid: &GridDomain) -> Complex64 {
        dot(&self.values, &other.values) * weight(grid)
    }

    pub fn norm_sqr(&self, grid: &GridDomain) -> f64 {
        norm_sqr(&self.values) * weight(grid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormField01 {
    /// `dz̄1` component.
    pub f1: Vec<Complex64>,
    /// `dz̄2` component.
    pub f2: Vec<Complex64>,
}

impl FormField01 {
    pub fn zeros(grid: &GridDomain) -> Self {
        FormField01 {
            f1: zeros(grid.len()),
            f2: zeros(grid.len()),
        }
    }

    /// Checked constructor: each component finite and supported on its dofs.
    pub fn from_components(grid: &GridDomain, f1: Vec<Complex64>, f2: Vec<Complex64>) -> Result<Self> {
        check(grid, &f1, "dz̄1 component")?;
        check(grid, &f2, "dz̄2 component")?;
        let f = FormField01 { f1, f2 };
        if f.clone().projected(grid) != f {
            return Err(Error::InvalidParameter("form is not supported on its degrees of freedom".into()));
        }
        Ok(f)
    }

    /// Samples `f` at the degrees of freedom of each component.
    pub fn sample<F: Fn(&Point4) -> (Complex64, Complex64)>(grid: &GridDomain, f: F) -> Self {
        let mut out = FormField01::zeros(grid);
        for i in 0..grid.len() {
            if grid.in_mask(i) {
                let (a, b) = f(&grid.lattice.coord(i));
                out.f1[i] = a;
                out.f2[i] = b;
            }
        }
        out.projected(grid)
    }

    /// Independent standard complex normal entries on the degrees of freedom.
    pub fn random<R: Rng>(grid: &GridDomain, rng: &mut R) -> Self {
        let mut out = FormField01::zeros(grid);
        for i in 0..grid.len() {
            if grid.in_mask(i) {
                out.f1[i] = gaussian(rng);
                out.f2[i] = gaussian(rng);
            }
        }
        out.projected(grid)
    }

    /// Zeroes entries that are not degrees of freedom of their component.
    pub fn projected(mut self, grid: &GridDomain) -> Self {
        let (k1, k2) = dof_masks(grid);
        for i in 0..grid.len() {
            if !k1[i] {
                self.f1[i] = Complex64::new(0.0, 0.0);
            }
            if !k2[i] {
                self.f2[i] = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        self.f1.iter_mut().chain(self.f2.iter_mut()).for_each(|v| *v *= c);
        self
    }

    pub fn inner(&self, other: &FormField01, grid: &GridDomain) -> Complex64 {
        (dot(&self.f1, &other.f1) + dot(&self.f2, &other.f2)) * weight(grid)
    }

    pub fn norm_sqr(&self, grid: &GridDomain) -> f64 {
        (norm_sqr(&self.f1) + norm_sqr(&self.f2)) * weight(grid)
    }
}

/// Degree-of-freedom indicators for the two components of a (0,1)-form.
pub(crate) fn dof_masks(grid: &GridDomain) -> (Vec<bool>, Vec<bool>) {
    let k1 = grid.mask().to_vec();
    let mut k2 = vec![false; grid.len()];
    for i in grid.dof_nodes(2) {
        k2[i] = true;
    }
    (k1, k2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormField02 {
    /// `dz̄1 ∧ dz̄2` component.
    pub f12: Vec<Complex64>,
}

impl FormField02 {
    pub fn zeros(grid: &GridDomain) -> Self {
        FormField02 { f12: zeros(grid.len()) }
    }

    pub fn random<R: Rng>(grid: &GridDomain, rng: &mut R) -> Self {
        FormField02 {
            f12: (0..grid.len()).map(|_| gaussian(rng)).collect(),
        }
    }

    pub fn inner(&self, other: &FormField02, grid: &GridDomain) -> Complex64 {
        dot(&self.f12, &other.f12) * weight(grid)
    }

    pub fn norm_sqr(&self, grid: &GridDomain) -> f64 {
        norm_sqr(&self.f12) * weight(grid)
    }
}

/// A field of any grade.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Form01(FormField01),
    Form02(FormField02),
}

impl Field {
    fn components(&self) -> Vec<&[Complex64]> {
        match self {
            Field::Scalar(u) => vec![&u.values],
            Field::Form01(f) => vec![&f.f1, &f.f2],
            Field::Form02(w) => vec![&w.f12],
        }
    }
}

/// Writes `node component re im` lines for the nonzero entries of `field`.
///
/// Debugging aid only; the format may change.
pub fn write_dump<W: Write>(mut w: W, field: &Field) -> Result<()> {
    for (c, comp) in field.components().into_iter().enumerate() {
        for (i, v) in comp.iter().enumerate() {
            if *v != Complex64::new(0.0, 0.0) {
                writeln!(w, "{i} {c} {:.17e} {:.17e}", v.re, v.im)?;
            }
        }
    }
    Ok(())
}
