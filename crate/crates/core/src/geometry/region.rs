//! Analytic planar regions in the z-plane.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlaneSide {
    /// `Im z < 0`
    Lower,
    /// `Im z > 0`
    Upper,
}

/// A bounded open region of the complex plane.
///
/// Sectors and half-discs have their apex/center at the origin. Every
/// membership test is strict, so boundary points are never inside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanarRegion {
    Disc {
        #[serde(default = "origin")]
        center: Complex64,
        radius: f64,
    },
    Sector {
        radius: f64,
        theta_min: f64,
        theta_max: f64,
        /// Points with `|z| <= inner_radius` are excluded.
        #[serde(default)]
        inner_radius: f64,
    },
    HalfDisc {
        radius: f64,
        side: HalfPlaneSide,
    },
    Box {
        x: (f64, f64),
        y: (f64, f64),
    },
    Intersection {
        parts: Vec<PlanarRegion>,
    },
}

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Reduces `theta` into `[base, base + 2π)`.
pub(crate) fn unwrap_angle(theta: f64, base: f64) -> f64 {
    let mut t = (theta - base).rem_euclid(TAU) + base;
    if t >= base + TAU {
        t -= TAU;
    }
    t
}

impl PlanarRegion {
    pub fn disc(center: Complex64, radius: f64) -> Self {
        PlanarRegion::Disc { center, radius }
    }

    pub fn centered_disc(radius: f64) -> Self {
        PlanarRegion::Disc {
            center: origin(),
            radius,
        }
    }

    pub fn sector(radius: f64, theta_min: f64, theta_max: f64) -> Self {
        PlanarRegion::Sector {
            radius,
            theta_min,
            theta_max,
            inner_radius: 0.0,
        }
    }

    pub fn annular_sector(inner_radius: f64, radius: f64, theta_min: f64, theta_max: f64) -> Self {
        PlanarRegion::Sector {
            radius,
            theta_min,
            theta_max,
            inner_radius,
        }
    }

    pub fn lower_half_disc(radius: f64) -> Self {
        PlanarRegion::HalfDisc {
            radius,
            side: HalfPlaneSide::Lower,
        }
    }

    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        PlanarRegion::Box { x, y }
    }

    pub fn intersection(parts: Vec<PlanarRegion>) -> Self {
        PlanarRegion::Intersection { parts }
    }

    /// Checks the structural invariants of the region.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRegion(msg));
        match self {
            PlanarRegion::Disc { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return bad(format!("disc radius must be positive, got {radius}"));
                }
                if !center.re.is_finite() || !center.im.is_finite() {
                    return bad("disc center must be finite".into());
                }
            }
            PlanarRegion::Sector {
                radius,
                theta_min,
                theta_max,
                inner_radius,
            } => {
                if !(*radius > 0.0) {
                    return bad(format!("sector radius must be positive, got {radius}"));
                }
                if !(theta_min < theta_max) || theta_max - theta_min > TAU {
                    return bad(format!(
                        "sector angles must satisfy theta_min < theta_max <= theta_min + 2pi, got ({theta_min}, {theta_max})"
                    ));
                }
                if !(*inner_radius >= 0.0 && inner_radius < radius) {
                    return bad(format!("sector inner radius {inner_radius} outside [0, {radius})"));
                }
            }
            PlanarRegion::HalfDisc { radius, .. } => {
                if !(*radius > 0.0) {
                    return bad(format!("half-disc radius must be positive, got {radius}"));
                }
            }
            PlanarRegion::Box { x, y } => {
                if !(x.0 < x.1) || !(y.0 < y.1) {
                    return bad(format!("box intervals must be nonempty, got {x:?} x {y:?}"));
                }
            }
            PlanarRegion::Intersection { parts } => {
                if parts.is_empty() {
                    return bad("intersection needs at least one part".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            PlanarRegion::Disc { center, radius } => (z - center).norm_sqr() < radius * radius,
            PlanarRegion::Sector {
                radius,
                theta_min,
                theta_max,
                inner_radius,
            } => {
                let r2 = z.norm_sqr();
                if r2 >= radius * radius || r2 <= inner_radius * inner_radius || r2 == 0.0 {
                    return false;
                }
                let t = unwrap_angle(z.arg(), *theta_min);
                t > *theta_min && t < *theta_max
            }
            PlanarRegion::HalfDisc { radius, side } => {
                let inside = z.norm_sqr() < radius * radius;
                inside
                    && match side {
                        HalfPlaneSide::Lower => z.im < 0.0,
                        HalfPlaneSide::Upper => z.im > 0.0,
                    }
            }
            PlanarRegion::Box { x, y } => z.re > x.0 && z.re < x.1 && z.im > y.0 && z.im < y.1,
            PlanarRegion::Intersection { parts } => parts.iter().all(|p| p.contains(z)),
        }
    }

    /// Axis-aligned bounding box `[(x_min, x_max), (y_min, y_max)]`.
    pub fn bounding_box(&self) -> [(f64, f64); 2] {
        match self {
            PlanarRegion::Disc { center, radius } => [
                (center.re - radius, center.re + radius),
                (center.im - radius, center.im + radius),
            ],
            PlanarRegion::Sector { radius, .. } => [(-radius, *radius), (-radius, *radius)],
            PlanarRegion::HalfDisc { radius, side } => match side {
                HalfPlaneSide::Lower => [(-radius, *radius), (-radius, 0.0)],
                HalfPlaneSide::Upper => [(-radius, *radius), (0.0, *radius)],
            },
            PlanarRegion::Box { x, y } => [*x, *y],
            PlanarRegion::Intersection { parts } => {
                let mut bb = [(f64::NEG_INFINITY, f64::INFINITY); 2];
                for p in parts {
                    let pb = p.bounding_box();
                    for a in 0..2 {
                        bb[a].0 = bb[a].0.max(pb[a].0);
                        bb[a].1 = bb[a].1.min(pb[a].1);
                    }
                }
                bb
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bounding_box()
            .iter()
            .all(|(a, b)| a.is_finite() && b.is_finite())
    }

    /// Lebesgue area. Exact for primitive kinds, by quadrature for intersections.
    pub fn area(&self) -> Result<f64> {
        if !self.is_bounded() {
            return Err(Error::UnboundedRegion);
        }
        Ok(match self {
            PlanarRegion::Disc { radius, .. } => PI * radius * radius,
            PlanarRegion::Sector {
                radius,
                theta_min,
                theta_max,
                inner_radius,
            } => 0.5 * (theta_max - theta_min) * (radius * radius - inner_radius * inner_radius),
            PlanarRegion::HalfDisc { radius, .. } => 0.5 * PI * radius * radius,
            PlanarRegion::Box { x, y } => (x.1 - x.0) * (y.1 - y.0),
            PlanarRegion::Intersection { .. } => {
                let opts = crate::quadrature::QuadOptions::new(1e-7);
                crate::quadrature::integrate_real(self, |_| 1.0, &opts)?.value
            }
        })
    }

    /// Polar parameterisation for the kinds that have one.
    pub(crate) fn polar_frame(&self) -> Option<PolarFrame> {
        match self {
            PlanarRegion::Disc { center, radius } => Some(PolarFrame {
                center: *center,
                r: (0.0, *radius),
                theta: (-PI, PI),
            }),
            PlanarRegion::Sector {
                radius,
                theta_min,
                theta_max,
                inner_radius,
            } => Some(PolarFrame {
                center: origin(),
                r: (*inner_radius, *radius),
                theta: (*theta_min, *theta_max),
            }),
            PlanarRegion::HalfDisc { radius, side } => Some(PolarFrame {
                center: origin(),
                r: (0.0, *radius),
                theta: match side {
                    HalfPlaneSide::Lower => (-PI, 0.0),
                    HalfPlaneSide::Upper => (0.0, PI),
                },
            }),
            _ => None,
        }
    }
}

/// Exact polar parameterisation `center + r e^{iθ}` of a primitive region.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PolarFrame {
    pub center: Complex64,
    pub r: (f64, f64),
    pub theta: (f64, f64),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disc_membership() {
        let d1 = PlanarRegion::centered_disc(2.0 / 3.0);
        assert!(d1.contains(c(0.5, 0.0)));
        assert!(!d1.contains(c(2.0 / 3.0, 0.0)));
    }

    #[test]
    fn sector_membership() {
        let w1 = PlanarRegion::sector(1.0, -2.0 * PI / 3.0, -PI / 3.0);
        let z = Complex64::from_polar(0.5, -PI / 2.0);
        assert!(w1.contains(z));
        assert!(!w1.contains(Complex64::from_polar(0.5, 0.0)));
        assert!(!w1.contains(c(0.0, 0.0)));
        // W2 wraps through -π.
        let w2 = PlanarRegion::sector(1.0, -4.0 * PI / 3.0, PI / 3.0);
        assert!(w2.contains(Complex64::from_polar(0.5, 3.0)));
        assert!(w2.contains(Complex64::from_polar(0.5, -3.0)));
        assert!(!w2.contains(c(0.0, 0.5)));
    }

    #[test]
    fn half_disc_excludes_upper_half() {
        let h = PlanarRegion::lower_half_disc(1.0);
        assert!(!h.contains(c(0.0, 0.5)));
        assert!(h.contains(c(0.0, -0.5)));
        assert!(!h.contains(c(0.3, 0.0)));
    }

    #[test]
    fn primitive_areas() {
        let a = PlanarRegion::centered_disc(2.0 / 3.0).area().unwrap();
        assert!((a - 4.0 * PI / 9.0).abs() < 1e-15);
        let s = PlanarRegion::sector(1.0, -2.0 * PI / 3.0, -PI / 3.0).area().unwrap();
        assert!((s - PI / 6.0).abs() < 1e-15);
        let h = PlanarRegion::lower_half_disc(1.0).area().unwrap();
        assert!((h - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn intersection_area_by_quadrature() {
        let r = PlanarRegion::intersection(vec![
            PlanarRegion::centered_disc(1.0),
            PlanarRegion::rect((-2.0, 2.0), (-2.0, 0.0)),
        ]);
        let a = r.area().unwrap();
        assert!((a - PI / 2.0).abs() < 1e-5, "{a}");
    }

    #[test]
    fn unbounded_box_is_rejected() {
        let r = PlanarRegion::rect((0.0, f64::INFINITY), (0.0, 1.0));
        assert!(matches!(r.area(), Err(Error::UnboundedRegion)));
    }

    #[test]
    fn validation_catches_bad_parameters() {
        assert!(PlanarRegion::centered_disc(-1.0).validate().is_err());
        assert!(PlanarRegion::sector(1.0, 1.0, 0.5).validate().is_err());
        assert!(PlanarRegion::rect((1.0, 0.0), (0.0, 1.0)).validate().is_err());
        assert!(PlanarRegion::lower_half_disc(1.0).validate().is_ok());
    }
}
