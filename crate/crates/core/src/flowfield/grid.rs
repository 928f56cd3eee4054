use alloc::vec::Vec;

use super::{FieldError, FlowField};
use crate::geom::{Rect, Vec2};
use crate::math;

/// Velocities on a regular grid, bilinearly interpolated between nodes.
///
/// Node `(i, j)` sits at `origin + (i, j) * spacing` and is stored row-major
/// at index `j * nx + i`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridField {
    pub origin: Vec2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl GridField {
    pub fn new(
        origin: Vec2,
        spacing: f64,
        nx: usize,
        ny: usize,
        u: Vec<f64>,
        v: Vec<f64>,
    ) -> Result<Self, FieldError> {
        let g = Self {
            origin,
            spacing,
            nx,
            ny,
            u,
            v,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks the structural invariants; use after deserializing.
    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(FieldError::Invalid("grid spacing must be positive"));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(FieldError::Invalid("grid needs at least 2x2 nodes"));
        }
        let n = self.nx * self.ny;
        if self.u.len() != n || self.v.len() != n {
            return Err(FieldError::Invalid("grid arrays must hold nx*ny values"));
        }
        if !self.origin.is_finite() || self.u.iter().chain(&self.v).any(|x| !x.is_finite()) {
            return Err(FieldError::Invalid("grid values must be finite"));
        }
        Ok(())
    }

    /// Rasterizes `field` at time `t` over the largest grid with the given
    /// spacing that fits in its workspace.
    pub fn rasterize<F: FlowField + ?Sized>(
        field: &F,
        spacing: f64,
        t: f64,
    ) -> Result<Self, FieldError> {
        let (origin, nx, ny) = Self::layout(&field.workspace(), spacing)?;
        let mut u = Vec::with_capacity(nx * ny);
        let mut v = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p = origin + Vec2::new(i as f64 * spacing, j as f64 * spacing);
                let w = field.velocity(p, t)?;
                u.push(w.x);
                v.push(w.y);
            }
        }
        Self::new(origin, spacing, nx, ny, u, v)
    }

    /// Grid origin and node counts covering `ws` at `spacing`.
    pub fn layout(ws: &Rect, spacing: f64) -> Result<(Vec2, usize, usize), FieldError> {
        if !(spacing > 0.0) {
            return Err(FieldError::Invalid("grid spacing must be positive"));
        }
        let nx = math::floor(ws.width() / spacing + 1e-9) as usize + 1;
        let ny = math::floor(ws.height() / spacing + 1e-9) as usize + 1;
        if nx < 2 || ny < 2 {
            return Err(FieldError::Invalid("workspace smaller than one grid cell"));
        }
        Ok((ws.min, nx, ny))
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        let k = j * self.nx + i;
        Vec2::new(self.u[k], self.v[k])
    }

    pub fn node_position(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn max_speed(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&a, &b)| math::hypot(a, b))
            .fold(0.0, f64::max)
    }
}

impl FlowField for GridField {
    fn workspace(&self) -> Rect {
        Rect::new(self.origin, self.node_position(self.nx - 1, self.ny - 1))
    }

    fn sample(&self, p: Vec2, _t: f64) -> Result<Vec2, FieldError> {
        let gx = (p.x - self.origin.x) / self.spacing;
        let gy = (p.y - self.origin.y) / self.spacing;
        let i = (math::floor(gx).max(0.0) as usize).min(self.nx - 2);
        let j = (math::floor(gy).max(0.0) as usize).min(self.ny - 2);
        let fx = gx - i as f64;
        let fy = gy - j as f64;
        let a = self.node(i, j).lerp(self.node(i + 1, j), fx);
        let b = self.node(i, j + 1).lerp(self.node(i + 1, j + 1), fx);
        Ok(a.lerp(b, fy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_by_two() -> GridField {
        GridField::new(
            Vec2::new(10.0, 20.0),
            1.0,
            2,
            2,
            vec![0.1, 0.3, -0.2, 0.4],
            vec![0.0, 0.2, 0.4, 0.6],
        )
        .unwrap()
    }

    #[test]
    fn cell_center_is_corner_mean() {
        let g = two_by_two();
        let v = g.velocity(Vec2::new(10.5, 20.5), 0.0).unwrap();
        assert!((v.x - 0.15).abs() < 1e-15);
        assert!((v.y - 0.3).abs() < 1e-15);
    }

    #[test]
    fn nodes_are_reproduced() {
        let g = two_by_two();
        for j in 0..2 {
            for i in 0..2 {
                let v = g.velocity(g.node_position(i, j), 0.0).unwrap();
                assert_eq!(v, g.node(i, j));
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridField::new(Vec2::ZERO, 0.0, 2, 2, vec![0.0; 4], vec![0.0; 4]).is_err());
        assert!(GridField::new(Vec2::ZERO, 1.0, 2, 2, vec![0.0; 3], vec![0.0; 4]).is_err());
        assert!(GridField::new(Vec2::ZERO, 1.0, 1, 2, vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn outside_query_fails() {
        let g = two_by_two();
        assert!(g.velocity(Vec2::new(11.5, 20.5), 0.0).is_err());
    }
}
