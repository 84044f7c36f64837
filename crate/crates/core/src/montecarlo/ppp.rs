use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn norm2(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }
}

fn check(density: f64, radius: f64) -> Result<()> {
    if !(density.is_finite() && density >= 0.0) {
        return Err(Error::domain(format!("density must be >= 0, got {density}")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Homogeneous PPP in the disk of radius `radius`: Poisson count, uniform
/// positions.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Result<Vec<Point>> {
    check(density, radius)?;
    let mean = density * PI * radius * radius;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::domain(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    Ok((0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
            Point { x: r * c, y: r * s }
        })
        .collect())
}

/// Homogeneous PPP in the annulus `inner < r <= radius`, generated outwards
/// in order of distance: `r_i² = inner² + (E_1 + … + E_i)/(πλ)`.
///
/// Returns `(r², point)` pairs sorted by distance.
pub fn sample_radial<R: Rng + ?Sized>(density: f64, inner: f64, radius: f64, rng: &mut R) -> Result<Vec<(f64, Point)>> {
    check(density, radius)?;
    let mut out = Vec::new();
    if density == 0.0 {
        return Ok(out);
    }
    let scale = 1.0 / (PI * density);
    let r2_max = radius * radius;
    let mut r2 = inner * inner;
    loop {
        let e: f64 = Exp1.sample(rng);
        r2 += e * scale;
        if r2 > r2_max {
            break;
        }
        let r = r2.sqrt();
        let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
        out.push((r2, Point { x: r * c, y: r * s }));
    }
    Ok(out)
}
