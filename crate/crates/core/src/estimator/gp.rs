use alloc::vec;
use alloc::vec::Vec;

use super::{EstimatorError, Hyperparams, Measurement};
use crate::flowfield::{FieldError, FlowField, GridField};
use crate::geom::{Rect, Vec2};
use crate::math;

/// Relative diagonal jitter, in units of the signal variance.
pub const JITTER: f64 = 1e-8;

/// 2x2 covariance between velocities at `a` and `b`.
///
/// The stream function has covariance `sf^2 l^2 exp(-r^2 / 2 l^2)`; taking
/// `(d/dy, -d/dx)` on both arguments gives
///
/// ```text
/// K(d) = sf^2 exp(-|d|^2 / 2 l^2) [ 1 - dy^2/l^2   dx dy/l^2   ]
///                                  [ dx dy/l^2     1 - dx^2/l^2 ]
/// ```
///
/// with `d = a - b`, so the velocity prior variance is `sf^2` per component.
pub fn kernel_block(a: Vec2, b: Vec2, hp: &Hyperparams) -> [[f64; 2]; 2] {
    let d = a - b;
    let l2 = hp.length_scale * hp.length_scale;
    let e = hp.signal_std * hp.signal_std * math::exp(-d.norm_sq() / (2.0 * l2));
    let xy = e * d.x * d.y / l2;
    [
        [e * (1.0 - d.y * d.y / l2), xy],
        [xy, e * (1.0 - d.x * d.x / l2)],
    ]
}

/// Dense lower Cholesky factor, row-major.
#[derive(Clone, Debug, PartialEq)]
struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(mut a: Vec<f64>, n: usize) -> Result<Self, EstimatorError> {
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= a[j * n + k] * a[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(EstimatorError::KernelSingular { index: j });
            }
            let d = math::sqrt(d);
            a[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= a[i * n + k] * a[j * n + k];
                }
                a[i * n + j] = s / d;
            }
            for i in 0..j {
                a[i * n + j] = 0.0;
            }
        }
        Ok(Self { n, l: a })
    }

    fn forward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    fn backward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}

/// Posterior of a divergence-free GP fitted to velocity measurements.
///
/// Implements [`FlowField`] through its posterior mean, which is
/// divergence-free everywhere and time-invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatedField {
    workspace: Rect,
    hp: Hyperparams,
    measurements: Vec<Measurement>,
    alpha: Vec<f64>,
    chol: Cholesky,
}

/// Divergence-free GP regression with noise `hp.noise_std` on every
/// velocity component.
pub fn fit_divergence_free_gp(
    measurements: &[Measurement],
    hp: Hyperparams,
    workspace: Rect,
) -> Result<EstimatedField, EstimatorError> {
    if measurements.is_empty() {
        return Err(EstimatorError::NoMeasurements);
    }
    if !hp.is_valid() {
        return Err(EstimatorError::InvalidHyperparams);
    }
    if !workspace.is_valid() {
        return Err(FieldError::Invalid("workspace must be a non-empty rectangle").into());
    }
    let m = measurements.len();
    let n = 2 * m;
    let mut gram = vec![0.0; n * n];
    for (i, a) in measurements.iter().enumerate() {
        for (j, b) in measurements.iter().enumerate().take(i + 1) {
            let k = kernel_block(a.position, b.position, &hp);
            for c in 0..2 {
                for d in 0..2 {
                    let (r, s) = (2 * i + c, 2 * j + d);
                    gram[r * n + s] = k[c][d];
                    gram[s * n + r] = k[c][d];
                }
            }
        }
    }
    let diag = hp.noise_std * hp.noise_std + JITTER * hp.signal_std * hp.signal_std;
    for r in 0..n {
        gram[r * n + r] += diag;
    }
    let chol = Cholesky::factor(gram, n)?;
    let mut alpha: Vec<f64> = measurements
        .iter()
        .flat_map(|m| [m.velocity.x, m.velocity.y])
        .collect();
    chol.forward(&mut alpha);
    chol.backward(&mut alpha);
    Ok(EstimatedField {
        workspace,
        hp,
        measurements: measurements.to_vec(),
        alpha,
        chol,
    })
}

impl EstimatedField {
    pub fn hyperparams(&self) -> Hyperparams {
        self.hp
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    /// Posterior mean velocity at any point (no workspace check).
    pub fn mean(&self, p: Vec2) -> Vec2 {
        self.measurements
            .iter()
            .enumerate()
            .fold(Vec2::ZERO, |acc, (i, m)| {
                let k = kernel_block(p, m.position, &self.hp);
                let (a0, a1) = (self.alpha[2 * i], self.alpha[2 * i + 1]);
                acc + Vec2::new(k[0][0] * a0 + k[0][1] * a1, k[1][0] * a0 + k[1][1] * a1)
            })
    }

    /// Trace of the 2x2 posterior velocity covariance at `p`, in (m/s)^2.
    pub fn covariance_trace(&self, p: Vec2) -> f64 {
        let n = 2 * self.measurements.len();
        let mut cu = vec![0.0; n];
        let mut cv = vec![0.0; n];
        for (i, m) in self.measurements.iter().enumerate() {
            let k = kernel_block(m.position, p, &self.hp);
            cu[2 * i] = k[0][0];
            cu[2 * i + 1] = k[1][0];
            cv[2 * i] = k[0][1];
            cv[2 * i + 1] = k[1][1];
        }
        self.chol.forward(&mut cu);
        self.chol.forward(&mut cv);
        let explained: f64 = cu.iter().chain(&cv).map(|x| x * x).sum();
        let prior = 2.0 * self.hp.signal_std * self.hp.signal_std;
        (prior - explained).max(0.0)
    }

    /// Posterior mean on a regular grid over the workspace.
    pub fn rasterize(&self, spacing: f64) -> Result<GridField, FieldError> {
        GridField::rasterize(self, spacing, 0.0)
    }

    /// Covariance trace on a regular grid over the workspace.
    pub fn covariance_raster(&self, spacing: f64) -> Result<ScalarRaster, FieldError> {
        let (origin, nx, ny) = GridField::layout(&self.workspace, spacing)?;
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p = origin + Vec2::new(i as f64 * spacing, j as f64 * spacing);
                values.push(self.covariance_trace(p));
            }
        }
        Ok(ScalarRaster {
            origin,
            spacing,
            nx,
            ny,
            values,
        })
    }
}

impl FlowField for EstimatedField {
    fn workspace(&self) -> Rect {
        self.workspace
    }

    fn sample(&self, p: Vec2, _t: f64) -> Result<Vec2, FieldError> {
        Ok(self.mean(p))
    }
}

/// A scalar quantity on the same row-major layout as [`GridField`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalarRaster {
    pub origin: Vec2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}
