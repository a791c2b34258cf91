//! CSDR geometry: single-pass matrix, stability, and Gaussian eigenmode radii along z.
//!
//! The axial coordinate starts at M1 (z = 0) and runs through the SHG crystal,
//! L1, the gain medium, L2, the M2 substrate, L3, the air gap, L4 and on to M3.
//! Positions inside slabs are geometric lengths.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::CsdrConfig;
use crate::error::{Error, Result, UnstableKind};
use crate::matrix::{compose, slab, thin_lens, RayMatrix};

/// |g| below this counts as zero for the confocal special case.
pub const CONFOCAL_TOLERANCE: f64 = 1e-9;

/// Products this close to 0 or 1 are treated as on the stability boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Default number of uniform samples in a radius profile.
pub const DEFAULT_PROFILE_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Element {
    Medium { length: f64, index: f64 },
    Lens { focal: f64 },
}

/// Component surface positions along z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoints {
    pub z_sr: f64,
    pub z_l1: f64,
    pub z_gl: f64,
    pub z_gr: f64,
    pub z_l2: f64,
    pub z_ml: f64,
    pub z_mr: f64,
    pub z_l3: f64,
    pub z_l4: f64,
    pub z_m3: f64,
}

impl Breakpoints {
    pub fn named(&self) -> [(&'static str, f64); 11] {
        [
            ("M1", 0.0),
            ("SHG_r", self.z_sr),
            ("L1", self.z_l1),
            ("gain_l", self.z_gl),
            ("gain_r", self.z_gr),
            ("L2", self.z_l2),
            ("M2_l", self.z_ml),
            ("M2_r", self.z_mr),
            ("L3", self.z_l3),
            ("L4", self.z_l4),
            ("M3", self.z_m3),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilityReport {
    pub g1_star: f64,
    pub g2_star: f64,
    pub l_star: f64,
    pub product: f64,
    pub stable: bool,
}

impl StabilityReport {
    pub fn from_matrix(m: &RayMatrix) -> Self {
        let (g1, g2) = (m.a, m.d);
        let product = g1 * g2;
        let confocal = g1.abs() < CONFOCAL_TOLERANCE && g2.abs() < CONFOCAL_TOLERANCE;
        StabilityReport {
            g1_star: g1,
            g2_star: g2,
            l_star: m.b,
            product,
            stable: (product > BOUNDARY_TOLERANCE && product < 1.0 - BOUNDARY_TOLERANCE)
                || confocal,
        }
    }

    pub fn is_confocal(&self) -> bool {
        self.g1_star.abs() < CONFOCAL_TOLERANCE && self.g2_star.abs() < CONFOCAL_TOLERANCE
    }
}

/// Complex beam parameter at an axial position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamState {
    pub q: Complex64,
    pub z: f64,
    pub wavelength: f64,
}

impl BeamState {
    /// TEM00 radius `sqrt(-lambda / (pi Im(1/q)))`.
    pub fn radius(&self) -> Result<f64> {
        let inv = self.q.inv();
        if !(inv.im < 0.0) || !inv.im.is_finite() {
            return Err(Error::DegeneratePropagation { z: self.z });
        }
        Ok((-self.wavelength / (PI * inv.im)).sqrt())
    }
}

/// The optical train of one configuration, ready for matrix and mode queries.
#[derive(Debug, Clone)]
pub struct Cavity {
    elements: Vec<Element>,
    breakpoints: Breakpoints,
    single_pass: RayMatrix,
    wavelength: f64,
}

impl Cavity {
    pub fn new(config: &CsdrConfig) -> Result<Self> {
        config.validate()?;
        let c = config;
        let elements = vec![
            Element::Medium {
                length: c.l_s,
                index: c.n_s,
            },
            Element::Medium {
                length: c.d1,
                index: 1.0,
            },
            Element::Lens { focal: c.f_l1 },
            Element::Medium {
                length: c.d2,
                index: 1.0,
            },
            Element::Medium {
                length: c.l_g,
                index: c.n_g,
            },
            Element::Medium {
                length: c.d3,
                index: 1.0,
            },
            Element::Lens { focal: c.f_l2 },
            Element::Medium {
                length: c.d4,
                index: 1.0,
            },
            Element::Medium {
                length: c.l_m,
                index: c.n_m,
            },
            Element::Medium {
                length: c.d5,
                index: 1.0,
            },
            Element::Lens { focal: c.f_l3 },
            Element::Medium {
                length: c.d_w,
                index: 1.0,
            },
            Element::Lens { focal: c.f_l4 },
            Element::Medium {
                length: c.d6,
                index: 1.0,
            },
        ];

        let mut surfaces = Vec::with_capacity(10);
        let mut z = 0.0;
        let mut single_pass = RayMatrix::IDENTITY;
        for e in &elements {
            let m = element_matrix(e)?;
            single_pass = compose(&m, &single_pass);
            if let Element::Medium { length, .. } = e {
                z += length;
                surfaces.push(z);
            }
        }
        // media end at: sr, L1, gl, gr, L2, ml, mr, L3, L4, M3
        let breakpoints = Breakpoints {
            z_sr: surfaces[0],
            z_l1: surfaces[1],
            z_gl: surfaces[2],
            z_gr: surfaces[3],
            z_l2: surfaces[4],
            z_ml: surfaces[5],
            z_mr: surfaces[6],
            z_l3: surfaces[7],
            z_l4: surfaces[8],
            z_m3: surfaces[9],
        };
        Ok(Cavity {
            elements,
            breakpoints,
            single_pass,
            wavelength: c.lambda_nu,
        })
    }

    pub fn single_pass(&self) -> RayMatrix {
        self.single_pass
    }

    pub fn breakpoints(&self) -> &Breakpoints {
        &self.breakpoints
    }

    pub fn stability(&self) -> StabilityReport {
        StabilityReport::from_matrix(&self.single_pass)
    }

    /// Ray-transfer matrix from M1 to `z`. A lens sitting exactly at `z` is not yet applied.
    pub fn transfer_to(&self, z: f64) -> Result<RayMatrix> {
        let end = self.breakpoints.z_m3;
        if !(z >= 0.0) || z > end * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "z = {z} m outside the cavity [0, {end}]"
            )));
        }
        let z = z.min(end);
        let mut m = RayMatrix::IDENTITY;
        let mut pos = 0.0;
        for e in &self.elements {
            match *e {
                Element::Lens { .. } => m = compose(&element_matrix(e)?, &m),
                Element::Medium { length, index } => {
                    if z <= pos + length {
                        return Ok(compose(&slab(z - pos, index)?, &m));
                    }
                    m = compose(&element_matrix(e)?, &m);
                    pos += length;
                }
            }
        }
        Ok(m)
    }

    /// TEM00 radius on M1. Fails for cavities without a Gaussian eigenmode.
    pub fn radius_at_m1(&self) -> Result<f64> {
        let s = self.stability();
        if !s.stable {
            return Err(Error::UnstableCavity {
                kind: UnstableKind::OutsideStableRegion,
                product: s.product,
            });
        }
        if s.is_confocal() {
            return Err(Error::UnstableCavity {
                kind: UnstableKind::ConfocalIndeterminate,
                product: s.product,
            });
        }
        let radicand = s.g2_star / (s.g1_star * (1.0 - s.product));
        let w2 = self.wavelength * s.l_star.abs() / PI * radicand.sqrt();
        if !(radicand > 0.0) || !(w2 > 0.0) || !w2.is_finite() {
            return Err(Error::UnstableCavity {
                kind: UnstableKind::NegativeRadicand,
                product: s.product,
            });
        }
        Ok(w2.sqrt())
    }

    /// Solves the eigenmode: q on M1 and the multimode scale factor at the gain aperture.
    pub fn eigenmode(&self, gain_aperture: f64) -> Result<Eigenmode<'_>> {
        let w0 = self.radius_at_m1()?;
        let q0 = Complex64::new(0.0, PI * w0 * w0 / self.wavelength);
        let mut mode = Eigenmode {
            cavity: self,
            q0,
            w0,
            m_factor: 1.0,
        };
        mode.m_factor = gain_aperture / mode.mode_radius(self.breakpoints.z_gl)?;
        Ok(mode)
    }

    /// Breakpoints plus `samples` uniform points over [0, z_M3], sorted and deduplicated.
    pub fn profile_grid(&self, samples: usize) -> Vec<f64> {
        let end = self.breakpoints.z_m3;
        let mut zs: Vec<f64> = self.breakpoints.named().iter().map(|(_, z)| *z).collect();
        if samples >= 2 {
            zs.extend((0..samples).map(|i| end * i as f64 / (samples - 1) as f64));
        }
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        zs
    }
}

fn element_matrix(e: &Element) -> Result<RayMatrix> {
    match *e {
        Element::Medium { length, index } => slab(length, index),
        Element::Lens { focal } => thin_lens(focal),
    }
}

/// Gaussian eigenmode of a stable cavity.
#[derive(Debug, Clone, Copy)]
pub struct Eigenmode<'a> {
    cavity: &'a Cavity,
    q0: Complex64,
    w0: f64,
    m_factor: f64,
}

impl Eigenmode<'_> {
    pub fn q0(&self) -> Complex64 {
        self.q0
    }

    pub fn radius_at_m1(&self) -> f64 {
        self.w0
    }

    /// Beam propagation factor `a_g / w00(z_gl)`.
    pub fn m_factor(&self) -> f64 {
        self.m_factor
    }

    pub fn propagate_q(&self, z: f64) -> Result<BeamState> {
        let m = self.cavity.transfer_to(z)?;
        let q = m
            .transform_q(self.q0)
            .ok_or(Error::DegeneratePropagation { z })?;
        Ok(BeamState {
            q,
            z,
            wavelength: self.cavity.wavelength,
        })
    }

    pub fn mode_radius(&self, z: f64) -> Result<f64> {
        self.propagate_q(z)?.radius()
    }

    pub fn multimode_radius(&self, z: f64) -> Result<f64> {
        Ok(self.m_factor * self.mode_radius(z)?)
    }
}

/// One sample of a radius profile.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProfilePoint {
    pub z: f64,
    pub w00: f64,
    pub w: f64,
}

pub fn radius_profile(config: &CsdrConfig, zs: &[f64]) -> Result<Vec<ProfilePoint>> {
    let cavity = Cavity::new(config)?;
    let mode = cavity.eigenmode(config.a_g)?;
    zs.iter()
        .map(|&z| {
            let w00 = mode.mode_radius(z)?;
            Ok(ProfilePoint {
                z,
                w00,
                w: mode.m_factor() * w00,
            })
        })
        .collect()
}

pub fn single_pass_matrix(config: &CsdrConfig) -> Result<RayMatrix> {
    Ok(Cavity::new(config)?.single_pass())
}

pub fn stability(config: &CsdrConfig) -> Result<StabilityReport> {
    Ok(Cavity::new(config)?.stability())
}

pub fn fundamental_radius_at_m1(config: &CsdrConfig) -> Result<f64> {
    Cavity::new(config)?.radius_at_m1()
}

pub fn transfer_to(config: &CsdrConfig, z: f64) -> Result<RayMatrix> {
    Cavity::new(config)?.transfer_to(z)
}

pub fn propagate_q(config: &CsdrConfig, z: f64) -> Result<BeamState> {
    Cavity::new(config)?.eigenmode(config.a_g)?.propagate_q(z)
}

pub fn mode_radius(config: &CsdrConfig, z: f64) -> Result<f64> {
    Cavity::new(config)?.eigenmode(config.a_g)?.mode_radius(z)
}

pub fn multimode_radius(config: &CsdrConfig, z: f64) -> Result<f64> {
    Cavity::new(config)?
        .eigenmode(config.a_g)?
        .multimode_radius(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(d_w: f64) -> CsdrConfig {
        CsdrConfig::default().with("d_w", d_w).unwrap()
    }

    /// Explicit 2x2 product written out by hand, element by element, in propagation order.
    fn hand_product(c: &CsdrConfig) -> [f64; 4] {
        let mul = |x: [f64; 4], y: [f64; 4]| {
            [
                x[0] * y[0] + x[1] * y[2],
                x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2],
                x[2] * y[1] + x[3] * y[3],
            ]
        };
        let p = |d: f64| [1.0, d, 0.0, 1.0];
        let l = |f: f64| [1.0, 0.0, -1.0 / f, 1.0];
        let factors = [
            p(c.d6),
            l(c.f_l4),
            p(c.d_w),
            l(c.f_l3),
            p(c.d5),
            p(c.l_m / c.n_m),
            p(c.d4),
            l(c.f_l2),
            p(c.d3),
            p(c.l_g / c.n_g),
            p(c.d2),
            l(c.f_l1),
            p(c.d1),
            p(c.l_s / c.n_s),
        ];
        factors
            .iter()
            .skip(1)
            .fold(factors[0], |acc, f| mul(acc, *f))
    }

    #[test]
    fn single_pass_matches_hand_product() {
        let c = at(1.0);
        let m = single_pass_matrix(&c).unwrap();
        let h = hand_product(&c);
        let got = [m.a, m.b, m.c, m.d];
        for (g, e) in got.iter().zip(h) {
            assert!((g - e).abs() < 1e-12 * (1.0 + e.abs()), "{got:?} vs {h:?}");
        }
        assert!((m.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stable_at_six_metres() {
        let s = stability(&at(6.0)).unwrap();
        assert!(s.stable, "{s:?}");
        assert_eq!(s.product, s.g1_star * s.g2_star);
    }

    #[test]
    fn short_distances_unstable_for_some_d5() {
        let c = at(0.12).with("d5", 0.098).unwrap();
        assert!(!stability(&c).unwrap().stable);
        let c = at(0.12).with("d5", 0.097).unwrap();
        assert!(!stability(&c).unwrap().stable);
    }

    #[test]
    fn imaging_spacing_sits_on_the_boundary_at_every_distance() {
        // at d5 = 96 mm the product is 1 up to rounding
        for i in 1..=100 {
            let c = at(0.1 * i as f64).with("d5", 0.096).unwrap();
            let s = stability(&c).unwrap();
            assert!((s.product - 1.0).abs() < 1e-12);
            assert!(!s.stable, "d_w = {}", c.d_w);
        }
    }

    #[test]
    fn confocal_is_stable_but_has_no_m1_radius() {
        let m = RayMatrix::new(0.0, 0.1, -10.0, 0.0);
        let s = StabilityReport::from_matrix(&m);
        assert!(s.stable && s.is_confocal());
        let m = RayMatrix::new(5e-10, 0.1, -10.0, -5e-10);
        assert!(StabilityReport::from_matrix(&m).stable);
    }

    #[test]
    fn unstable_radius_is_typed_error() {
        let c = at(0.1);
        let err = fundamental_radius_at_m1(&c).unwrap_err();
        assert!(matches!(
            err,
            Error::UnstableCavity {
                kind: UnstableKind::OutsideStableRegion,
                ..
            }
        ));
        assert!(mode_radius(&c, 0.01).is_err());
    }

    #[test]
    fn radius_at_m1_matches_scalar_formula() {
        // independent evaluation from the hand product at d_w = 3 m
        let c = at(3.0);
        let h = hand_product(&c);
        let (g1, g2, l) = (h[0], h[3], h[1]);
        let expect = (c.lambda_nu * l.abs() / PI * (g2 / (g1 * (1.0 - g1 * g2))).sqrt()).sqrt();
        let got = fundamental_radius_at_m1(&c).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);
        // self consistency with q propagation at z = 0
        let at0 = mode_radius(&c, 0.0).unwrap();
        assert!((at0 - got).abs() < 1e-15);
    }

    #[test]
    fn radius_at_m1_diverges_towards_the_boundary() {
        // product -> 1 as d_w approaches ~148 mm from above
        let mut last = 0.0;
        for d_w in [1.0, 0.5, 0.3, 0.2, 0.16, 0.15] {
            let w = fundamental_radius_at_m1(&at(d_w)).unwrap();
            assert!(w > last, "d_w = {d_w}");
            last = w;
        }
    }

    #[test]
    fn q0_is_imaginary() {
        let c = at(1.0);
        let b = propagate_q(&c, 0.0).unwrap();
        let w0 = fundamental_radius_at_m1(&c).unwrap();
        assert_eq!(b.q.re, 0.0);
        assert!((b.q.im - PI * w0 * w0 / c.lambda_nu).abs() < 1e-15 * b.q.im);
    }

    #[test]
    fn transfer_endpoints() {
        let c = at(2.0);
        let cav = Cavity::new(&c).unwrap();
        assert_eq!(cav.transfer_to(0.0).unwrap(), RayMatrix::IDENTITY);
        let end = cav.transfer_to(cav.breakpoints().z_m3).unwrap();
        assert!(end.max_abs_diff(&cav.single_pass()) < 1e-12);
        assert!(cav.transfer_to(-1e-6).is_err());
        assert!(cav.transfer_to(cav.breakpoints().z_m3 + 1e-3).is_err());
    }

    #[test]
    fn breakpoints_follow_geometry() {
        let c = at(1.0);
        let b = *Cavity::new(&c).unwrap().breakpoints();
        let expect = c.l_s + c.d1 + c.d2 + c.l_g + c.d3 + c.d4 + c.l_m + c.d5 + c.d_w + c.d6;
        assert!((b.z_m3 - expect).abs() < 1e-15);
        assert!((b.z_l1 - 0.05 - c.l_s + c.l_s / c.n_s).abs() < 1e-15);
        assert!((b.z_l4 - b.z_l3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_is_continuous_across_slab_faces_and_jumps_by_the_lens() {
        let c = at(1.0);
        let cav = Cavity::new(&c).unwrap();
        let b = *cav.breakpoints();
        let eps = 1e-15;
        for z in [b.z_sr, b.z_gl, b.z_gr, b.z_ml, b.z_mr] {
            let left = cav.transfer_to(z).unwrap();
            let right = cav.transfer_to(z + eps).unwrap();
            assert!(left.max_abs_diff(&right) < 1e-12, "z = {z}");
        }
        // just past L1: the lens factor composed explicitly onto M_t(z_L1)
        let explicit = compose(
            &thin_lens(c.f_l1).unwrap(),
            &cav.transfer_to(b.z_l1).unwrap(),
        );
        let right = cav.transfer_to(b.z_l1 + eps).unwrap();
        assert!(right.max_abs_diff(&explicit) < 1e-12);
    }

    #[test]
    fn mode_radius_is_continuous_across_lenses() {
        let c = at(3.0);
        let cav = Cavity::new(&c).unwrap();
        let mode = cavity_mode(&cav, &c);
        let b = *cav.breakpoints();
        for z in [b.z_l1, b.z_l2, b.z_l3, b.z_l4] {
            let l = mode.mode_radius(z).unwrap();
            let r = mode.mode_radius(z + 1e-12).unwrap();
            assert!((l - r).abs() < 1e-9 * l);
        }
    }

    fn cavity_mode<'a>(cav: &'a Cavity, c: &CsdrConfig) -> Eigenmode<'a> {
        cav.eigenmode(c.a_g).unwrap()
    }

    #[test]
    fn eigenmode_has_flat_wavefront_on_m3() {
        for d_w in [1.0, 3.0, 6.0] {
            let c = at(d_w);
            let cav = Cavity::new(&c).unwrap();
            let mode = cavity_mode(&cav, &c);
            let q = mode.propagate_q(cav.breakpoints().z_m3).unwrap().q;
            let inv = q.inv();
            assert!(inv.re.abs() < 1e-6 * inv.im.abs(), "d_w = {d_w}: {inv}");
        }
    }

    #[test]
    fn finite_positive_radius_on_dense_grid() {
        let c = at(6.0);
        let cav = Cavity::new(&c).unwrap();
        let mode = cavity_mode(&cav, &c);
        let end = cav.breakpoints().z_m3;
        for i in 0..1000 {
            let z = end * i as f64 / 999.0;
            let b = mode.propagate_q(z).unwrap();
            assert!(b.q.im > 0.0);
            let w = b.radius().unwrap();
            assert!(w.is_finite() && w > 0.0);
        }
    }

    #[test]
    fn multimode_scaling() {
        let c = at(1.0);
        let cav = Cavity::new(&c).unwrap();
        let mode = cavity_mode(&cav, &c);
        let b = *cav.breakpoints();
        let at_gl = mode.multimode_radius(b.z_gl).unwrap();
        assert!((at_gl - c.a_g).abs() < 1e-15);
        assert!(mode.mode_radius(b.z_gl).unwrap() <= c.a_g);
        assert!(mode.m_factor() >= 1.0);
        for z in [0.0, b.z_l2, b.z_l4 + 0.01] {
            let ratio = mode.multimode_radius(z).unwrap() / mode.mode_radius(z).unwrap();
            assert!((ratio - mode.m_factor()).abs() < 1e-12 * ratio);
        }
    }

    #[test]
    fn telescope_halves_the_intra_radius() {
        for d_w in [1.0, 3.0, 6.0] {
            let c = at(d_w);
            let cav = Cavity::new(&c).unwrap();
            let mode = cavity_mode(&cav, &c);
            let b = *cav.breakpoints();
            let ratio = mode.mode_radius(b.z_l2).unwrap() / mode.mode_radius(b.z_l3).unwrap();
            assert!(ratio > 0.4 && ratio < 0.6, "d_w = {d_w}: {ratio}");
        }
    }

    #[test]
    fn collimated_sections_grow_with_distance() {
        // gain medium and the air gap midpoint: w00 rises with d_w
        let probe = |d_w: f64| {
            let c = at(d_w);
            let cav = Cavity::new(&c).unwrap();
            let mode = cavity_mode(&cav, &c);
            let b = *cav.breakpoints();
            [
                mode.mode_radius(b.z_gl).unwrap(),
                mode.mode_radius(b.z_l2).unwrap(),
                mode.mode_radius(b.z_l3).unwrap(),
                mode.mode_radius(0.5 * (b.z_l3 + b.z_l4)).unwrap(),
            ]
        };
        let (a, b, c) = (probe(1.0), probe(3.0), probe(6.0));
        for i in 0..4 {
            assert!(a[i] < b[i] && b[i] < c[i], "probe {i}");
        }
    }

    #[test]
    fn free_space_q_matches_closed_form() {
        // A single long free-space stretch starting at a waist: compare the
        // q-law radius to w0 sqrt(1 + (z lambda / (pi w0^2))^2).
        let lambda = 1064e-9;
        let w0 = 0.4e-3;
        let q0 = Complex64::new(0.0, PI * w0 * w0 / lambda);
        let zr = PI * w0 * w0 / lambda;
        for z in [0.0, 0.1, 0.47, 1.0, 3.3, 10.0] {
            let q = slab(z, 1.0).unwrap().transform_q(q0).unwrap();
            let w = BeamState {
                q,
                z,
                wavelength: lambda,
            }
            .radius()
            .unwrap();
            let expect = w0 * (1.0 + (z / zr).powi(2)).sqrt();
            assert!(((w - expect) / expect).abs() < 1e-10);
        }
    }

    #[test]
    fn profile_grid_contains_breakpoints() {
        let cav = Cavity::new(&at(1.0)).unwrap();
        let grid = cav.profile_grid(DEFAULT_PROFILE_SAMPLES);
        for (_, z) in cav.breakpoints().named() {
            assert!(grid.contains(&z));
        }
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.len() >= DEFAULT_PROFILE_SAMPLES);
    }
}
