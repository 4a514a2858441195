//! Uniform planar array geometry and steering vectors.
//!
//! The array has `n_az` elements along its horizontal axis and `n_el`
//! elements along its vertical axis. Directions are expressed in the array's
//! local spherical chart: `theta` is the angle measured from the vertical
//! element axis (so the broadside direction is `theta = 90`, `phi = 0`) and
//! `phi` is the azimuth around that axis. In this chart the response depends
//! on the direction cosines `sin(theta) sin(phi)` and `cos(theta)`, which
//! makes it even under joint negation of both angles: steering a null at
//! `(theta, phi)` equally affects `(-theta, -phi)`, the mirror direction
//! through the array plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::numerics::ComplexMatrix;
use crate::vec3::{self, Vec3};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Elements along the horizontal axis.
    pub n_az: usize,
    /// Elements along the vertical axis.
    pub n_el: usize,
    /// Element spacing in wavelengths.
    pub element_spacing_wl: f64,
    /// Boresight azimuth in the site frame (deg, clockwise from north).
    pub boresight_az_deg: f64,
    /// Mechanical downtilt (deg, positive tilts the boresight below the horizon).
    pub downtilt_deg: f64,
}

impl ArrayGeometry {
    pub fn new(n_az: usize, n_el: usize) -> Self {
        Self {
            n_az,
            n_el,
            element_spacing_wl: 0.5,
            boresight_az_deg: 0.0,
            downtilt_deg: 0.0,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.n_az * self.n_el
    }

    /// Unit-norm steering vector toward local direction `(theta, phi)`.
    ///
    /// Entry for element `(p, q)` is
    /// `exp(j 2 pi d (p sin(phi) sin(theta) + q cos(theta))) / sqrt(N)`.
    pub fn steering_vector(&self, theta_deg: f64, phi_deg: f64) -> ComplexMatrix {
        let n = self.n_elements();
        let scale = 1.0 / (n as f64).sqrt();
        let theta = theta_deg.to_radians();
        let phi = phi_deg.to_radians();
        let horiz = self.element_spacing_wl * phi.sin() * theta.sin();
        let vert = self.element_spacing_wl * theta.cos();
        let mut entries = Vec::with_capacity(n);
        for p in 0..self.n_az {
            for q in 0..self.n_el {
                let phase = TAU * (p as f64 * horiz + q as f64 * vert);
                entries.push(Complex64::from_polar(scale, phase));
            }
        }
        ComplexMatrix::col_vector(entries)
    }

    /// Orthonormal array axes in the east/north/up site frame:
    /// boresight normal, horizontal axis, vertical axis.
    pub fn axes_enu(&self) -> (Vec3, Vec3, Vec3) {
        let beta = self.boresight_az_deg.to_radians();
        let delta = self.downtilt_deg.to_radians();
        let normal = [
            delta.cos() * beta.sin(),
            delta.cos() * beta.cos(),
            -delta.sin(),
        ];
        let vertical = [
            delta.sin() * beta.sin(),
            delta.sin() * beta.cos(),
            delta.cos(),
        ];
        let horizontal = vec3::cross(&vertical, &normal);
        (normal, horizontal, vertical)
    }

    /// Convert a site-frame direction (elevation above the horizon, azimuth
    /// clockwise from north) into the array's local `(theta, phi)` chart.
    pub fn local_angles(&self, elevation_deg: f64, azimuth_deg: f64) -> (f64, f64) {
        let el = elevation_deg.to_radians();
        let az = azimuth_deg.to_radians();
        let u = [el.cos() * az.sin(), el.cos() * az.cos(), el.sin()];
        let (normal, horizontal, vertical) = self.axes_enu();
        let uz = vec3::dot(&u, &vertical).clamp(-1.0, 1.0);
        let ux = vec3::dot(&u, &normal);
        let uy = vec3::dot(&u, &horizontal);
        let theta = uz.acos().to_degrees();
        let phi = uy.atan2(ux).to_degrees();
        (theta, phi)
    }

    /// Steering vector toward a site-frame direction.
    pub fn steering_vector_site(&self, elevation_deg: f64, azimuth_deg: f64) -> ComplexMatrix {
        let (theta, phi) = self.local_angles(elevation_deg, azimuth_deg);
        self.steering_vector(theta, phi)
    }
}
