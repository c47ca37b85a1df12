//! Domains in C^2 = R^4 with coordinates `(x1, y1, x2, y2)`, `z_k = x_k + i y_k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::region::{HalfPlaneSide, PlanarRegion};
use crate::error::{Error, Result};

pub type Point4 = [f64; 4];

#[inline]
pub fn z1(p: &Point4) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[inline]
pub fn z2(p: &Point4) -> Complex64 {
    Complex64::new(p[2], p[3])
}

/// An open region of R^4 that can be laid onto a lattice.
pub trait Region4: Send + Sync {
    fn contains(&self, p: &Point4) -> bool;

    /// Bounding box per real coordinate.
    fn bounding_box(&self) -> [(f64, f64); 4];

    /// Whether the lattice arm from `p` to `p + step * e_{y2}` leaves the
    /// domain through a flat boundary piece `{Im z2 = const}`.
    fn crosses_flat(&self, _p: &Point4, _step: f64) -> bool {
        false
    }
}

/// A flat piece `{Im z2 = y2, x2_min < Re z2 < x2_max}` of the boundary with the
/// domain lying below it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatPiece {
    pub y2: f64,
    pub x2: (f64, f64),
}

impl FlatPiece {
    fn crossed_by(&self, p: &Point4, step: f64) -> bool {
        p[3] < self.y2 && p[3] + step >= self.y2 && p[2] > self.x2.0 && p[2] < self.x2.1
    }
}

/// `factor1 × factor2`, with the flat pieces of its boundary declared explicitly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductDomain {
    pub factor1: PlanarRegion,
    pub factor2: PlanarRegion,
    pub flat_pieces: Vec<FlatPiece>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProductDomain {
    factor1: PlanarRegion,
    factor2: PlanarRegion,
    flat_pieces: Option<Vec<FlatPiece>>,
}

impl<'de> Deserialize<'de> for ProductDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawProductDomain::deserialize(d)?;
        let dom = match raw.flat_pieces {
            Some(pieces) => ProductDomain::with_flat_pieces(raw.factor1, raw.factor2, pieces),
            None => ProductDomain::new(raw.factor1, raw.factor2),
        };
        dom.validate().map_err(serde::de::Error::custom)?;
        Ok(dom)
    }
}

impl ProductDomain {
    /// Product with flat pieces detected from a lower half-disc second factor.
    pub fn new(factor1: PlanarRegion, factor2: PlanarRegion) -> Self {
        let flat_pieces = match &factor2 {
            PlanarRegion::HalfDisc {
                radius,
                side: HalfPlaneSide::Lower,
            } => vec![FlatPiece {
                y2: 0.0,
                x2: (-radius, *radius),
            }],
            _ => Vec::new(),
        };
        ProductDomain {
            factor1,
            factor2,
            flat_pieces,
        }
    }

    pub fn with_flat_pieces(factor1: PlanarRegion, factor2: PlanarRegion, flat_pieces: Vec<FlatPiece>) -> Self {
        ProductDomain {
            factor1,
            factor2,
            flat_pieces,
        }
    }

    /// Unit-free cube `[0, side]^4` as a product of two squares.
    pub fn cube(side: f64) -> Self {
        let sq = PlanarRegion::rect((0.0, side), (0.0, side));
        ProductDomain::new(sq.clone(), sq)
    }

    pub fn validate(&self) -> Result<()> {
        self.factor1.validate()?;
        self.factor2.validate()?;
        let bb = self.factor2.bounding_box();
        for fp in &self.flat_pieces {
            let ok = fp.x2.0 < fp.x2.1
                && fp.y2 >= bb[1].0 - 1e-12
                && fp.y2 <= bb[1].1 + 1e-12
                && fp.x2.0 >= bb[0].0 - 1e-12
                && fp.x2.1 <= bb[0].1 + 1e-12;
            if !ok {
                return Err(Error::InvalidRegion(format!(
                    "flat piece {fp:?} does not lie in the closure of the second factor"
                )));
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> Result<f64> {
        Ok(self.factor1.area()? * self.factor2.area()?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Region4 for ProductDomain {
    fn contains(&self, p: &Point4) -> bool {
        self.factor1.contains(z1(p)) && self.factor2.contains(z2(p))
    }

    fn bounding_box(&self) -> [(f64, f64); 4] {
        let a = self.factor1.bounding_box();
        let b = self.factor2.bounding_box();
        [a[0], a[1], b[0], b[1]]
    }

    fn crosses_flat(&self, p: &Point4, step: f64) -> bool {
        self.flat_pieces.iter().any(|fp| fp.crossed_by(p, step))
    }
}

/// `{Im z2 < -|z1|^2}` inside the cube `(-half_width, half_width)^4`.
///
/// The top surface is strictly pseudoconvex; every lattice arm leaving upward
/// through it counts as a flat-piece face for the trace policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoconvexModel {
    pub half_width: f64,
}

impl PseudoconvexModel {
    fn in_box(&self, p: &Point4) -> bool {
        p.iter().all(|x| x.abs() < self.half_width)
    }
}

impl Region4 for PseudoconvexModel {
    fn contains(&self, p: &Point4) -> bool {
        self.in_box(p) && p[3] < -(p[0] * p[0] + p[1] * p[1])
    }

    fn bounding_box(&self) -> [(f64, f64); 4] {
        let w = self.half_width;
        [(-w, w), (-w, w), (-w, w), (-w, 0.0)]
    }

    fn crosses_flat(&self, p: &Point4, step: f64) -> bool {
        let top = -(p[0] * p[0] + p[1] * p[1]);
        self.in_box(p) && p[3] < top && p[3] + step >= top
    }
}

/// Euclidean ball in R^4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball4 {
    pub center: Point4,
    pub radius: f64,
}

impl Region4 for Ball4 {
    fn contains(&self, p: &Point4) -> bool {
        let d2: f64 = p.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 < self.radius * self.radius
    }

    fn bounding_box(&self) -> [(f64, f64); 4] {
        let c = self.center;
        let r = self.radius;
        [(c[0] - r, c[0] + r), (c[1] - r, c[1] + r), (c[2] - r, c[2] + r), (c[3] - r, c[3] + r)]
    }
}

/// Open axis-aligned box in R^4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box4 {
    pub bounds: [(f64, f64); 4],
}

impl Region4 for Box4 {
    fn contains(&self, p: &Point4) -> bool {
        p.iter().zip(&self.bounds).all(|(x, (a, b))| x > a && x < b)
    }

    fn bounding_box(&self) -> [(f64, f64); 4] {
        self.bounds
    }
}

/// Constants of the model domain around the analytic disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            a1: 0.5,
            a2: 1.0,
            a3: 0.5,
        }
    }
}

impl ModelConstants {
    /// `D1 = {|z| < 2/3}`
    pub fn d1(&self) -> PlanarRegion {
        PlanarRegion::centered_disc(2.0 / 3.0)
    }

    /// `D2 = {|z| < 2}`
    pub fn d2(&self) -> PlanarRegion {
        PlanarRegion::centered_disc(2.0)
    }

    /// `W1 = {0 < r < a1, -2π/3 < θ < -π/3}`
    pub fn w1(&self) -> PlanarRegion {
        PlanarRegion::sector(self.a1, -2.0 * PI / 3.0, -PI / 3.0)
    }

    /// `W2 = {0 < r < a2, -4π/3 < θ < π/3}`
    pub fn w2(&self) -> PlanarRegion {
        PlanarRegion::sector(self.a2, -4.0 * PI / 3.0, PI / 3.0)
    }

    /// `W = {Im z < 0, |z| < a3}`
    pub fn w(&self) -> PlanarRegion {
        PlanarRegion::lower_half_disc(self.a3)
    }

    /// The model domain `{|z1| < 2} × {|z2| < 1, Im z2 < 0}`; its boundary
    /// contains the disc `{Im z2 = 0, |z2| < 1}` as a flat piece.
    pub fn omega(&self) -> ProductDomain {
        ProductDomain::new(self.d2(), PlanarRegion::lower_half_disc(1.0))
    }
}

/// The shrinking neighbourhoods `U_j` of the limit set
/// `K = {|z1| <= 1/2, z2 = 0}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeighborhoodFamily;

impl NeighborhoodFamily {
    /// `U_j = {|z1| < 1/2 + 1/j} × {|z2| < j^-2}`.
    pub fn neighborhood(&self, j: u32) -> ProductDomain {
        assert!(j >= 1, "neighbourhood index starts at 1");
        let jf = j as f64;
        ProductDomain::new(
            PlanarRegion::centered_disc(0.5 + 1.0 / jf),
            PlanarRegion::centered_disc(1.0 / (jf * jf)),
        )
    }

    /// `D1 × {|z2| < 1/j}`, the smallest product of discs containing the
    /// support of the j-th witness form.
    pub fn witness_neighborhood(&self, j: u32) -> ProductDomain {
        assert!(j >= 1, "neighbourhood index starts at 1");
        ProductDomain::new(
            ModelConstants::default().d1(),
            PlanarRegion::centered_disc(1.0 / j as f64),
        )
    }

    pub fn limit_set_contains(&self, p: &Point4) -> bool {
        z1(p).norm() <= 0.5 && p[2] == 0.0 && p[3] == 0.0
    }
}
