//! Torus grids, scalar fields, Fourier multipliers and snapshot I/O.
//!
//! Everything lives on the periodic box [-1/2, 1/2]^dim sampled with `m`
//! nodes per axis at `x_j = -1/2 + j/m`. Fields are stored row major with
//! the first axis slowest. The forward transform is normalized by `1/N`,
//! so the zero mode is the field mean and Parseval reads
//! `mean(u^2) = sum_k |u_hat_k|^2`.
//!
//! Integer wavenumbers run through `0, 1, ..., m/2-1, -m/2, ..., -1`; a
//! Fourier multiplier is a real vector over that layout. The central
//! operators of the model are diagonal here:
//!
//! ```text
//! A_hat(k) = 1 / (1 + 4 pi^2 eps^2 |k|^2)          smoothing operator
//! B_hat(k) = 1 - A_hat(k)                          eps^2 (-Delta) A
//! R_hat(k) = 1 / (1 + l1 dt 16 pi^4 |k|^4 A_hat^2) implicit resolvent
//! ```
//!
//! The resolvent is the inverse of `Id + (l1 dt / eps^4) B^2`; the `eps^4`
//! cancels against `B_hat^2`, which is why it does not appear above.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftPlanner};

pub use rustfft::num_complex::Complex64;

#[derive(Debug)]
pub enum SpectralError {
    /// An inverse transform produced a significant imaginary part; the
    /// multiplier was not conjugate-symmetric.
    NonRealOutput { imag_norm: f64, real_norm: f64 },
    /// A snapshot file violated the expected layout.
    SnapshotFormat { reason: String },
    Io(std::io::Error),
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::NonRealOutput {
                imag_norm,
                real_norm,
            } => write!(
                f,
                "inverse transform is not real: |imag| = {imag_norm}, |real| = {real_norm}"
            ),
            SpectralError::SnapshotFormat { reason } => {
                write!(f, "malformed snapshot: {reason}")
            }
            SpectralError::Io(e) => write!(f, "snapshot i/o failed: {e}"),
        }
    }
}

impl std::error::Error for SpectralError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SpectralError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for SpectralError {
    fn from(e: std::io::Error) -> Self {
        SpectralError::Io(e)
    }
}

/// Uniform grid on the periodic box [-1/2, 1/2]^dim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub dim: usize,
    pub m: usize,
    pub eps: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, m: usize, eps: f64) -> Self {
        assert!((1..=3).contains(&dim), "dim must be 1, 2 or 3");
        assert!(m >= 2 && m.is_power_of_two(), "m must be a power of two");
        assert!(eps.is_finite() && eps > 0.0, "eps must be positive");
        TorusGrid { dim, m, eps }
    }

    /// Total number of nodes `m^dim`.
    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `1/m`.
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Coordinate of node `j` along any axis.
    pub fn axis_coord(&self, j: usize) -> f64 {
        -0.5 + j as f64 / self.m as f64
    }

    /// Integer wavenumber of slot `j` along any axis, with the Nyquist
    /// slot mapped to `-m/2`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j < self.m / 2 {
            j as i64
        } else {
            j as i64 - self.m as i64
        }
    }

    /// Per-node axis indices of linear index `idx`, first axis slowest.
    pub fn decompose(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    /// Linear index of the given axis indices.
    pub fn index(&self, ix: &[usize]) -> usize {
        assert_eq!(ix.len(), self.dim);
        let mut idx = 0;
        for &i in ix {
            debug_assert!(i < self.m);
            idx = idx * self.m + i;
        }
        idx
    }

    /// `|k|^2` for every spectral slot, in grid layout.
    pub fn ksquared(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for (idx, slot) in out.iter_mut().enumerate() {
            let ix = self.decompose(idx);
            let mut s = 0i64;
            for a in 0..self.dim {
                let k = self.wavenumber(ix[a]);
                s += k * k;
            }
            *slot = s as f64;
        }
        out
    }
}

/// Real scalar field sampled on a torus grid, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Builds a field from a function of the node coordinates.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(grid: TorusGrid, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        let mut coords = [0.0f64; 3];
        for idx in 0..grid.len() {
            let ix = grid.decompose(idx);
            for a in 0..grid.dim {
                coords[a] = grid.axis_coord(ix[a]);
            }
            values.push(f(&coords[..grid.dim]));
        }
        ScalarField { grid, values }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `sqrt(mean(u^2))`, the L2 norm for unit box volume.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Process-wide FFT plan cache keyed by length and direction.
fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Reusable transform state for one grid: plans plus line scratch.
pub struct Transformer {
    grid: TorusGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Transformer {
    pub fn new(grid: TorusGrid) -> Self {
        let fwd = plan(grid.m, false);
        let inv = plan(grid.m, true);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Transformer {
            grid,
            fwd,
            inv,
            line: vec![Complex64::default(); grid.m],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    fn transform_axes(&mut self, buf: &mut [Complex64], inverse: bool) {
        let m = self.grid.m;
        let dim = self.grid.dim;
        let n = buf.len();
        let fft = if inverse {
            self.inv.clone()
        } else {
            self.fwd.clone()
        };
        for axis in 0..dim {
            let stride = m.pow((dim - 1 - axis) as u32);
            let block = stride * m;
            if stride == 1 {
                for chunk in buf.chunks_exact_mut(m) {
                    fft.process_with_scratch(chunk, &mut self.scratch);
                }
            } else {
                for block_start in (0..n).step_by(block) {
                    for offset in 0..stride {
                        let base = block_start + offset;
                        for j in 0..m {
                            self.line[j] = buf[base + j * stride];
                        }
                        fft.process_with_scratch(&mut self.line, &mut self.scratch);
                        for j in 0..m {
                            buf[base + j * stride] = self.line[j];
                        }
                    }
                }
            }
        }
    }

    /// Forward transform of real samples, normalized by `1/N`.
    pub fn forward(&mut self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.grid.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_axes(&mut buf, false);
        let scale = 1.0 / values.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform back to real samples.
    ///
    /// The imaginary residual is checked against `1e-10` times the real
    /// magnitude (both as L2 norms, with an absolute floor for near-zero
    /// fields); a larger residual means the spectrum was not conjugate
    /// symmetric and the result would be garbage, so it is an error.
    pub fn inverse(&mut self, mut spec: Vec<Complex64>) -> Result<Vec<f64>, SpectralError> {
        assert_eq!(spec.len(), self.grid.len());
        self.transform_axes(&mut spec, true);
        let n = spec.len() as f64;
        let mut re2 = 0.0;
        let mut im2 = 0.0;
        for c in &spec {
            re2 += c.re * c.re;
            im2 += c.im * c.im;
        }
        let real_norm = (re2 / n).sqrt();
        let imag_norm = (im2 / n).sqrt();
        // Both gates are needed: a conjugate-symmetry bug makes the
        // imaginary part comparable to the real one, while a field that
        // is legitimately close to zero (a converged residual, say) has
        // roundoff-level imaginary mass that the relative gate alone
        // would misclassify.
        if imag_norm > 1e-10 * real_norm && imag_norm > 1e-13 {
            return Err(SpectralError::NonRealOutput {
                imag_norm,
                real_norm,
            });
        }
        Ok(spec.into_iter().map(|c| c.re).collect())
    }
}

/// Symbol of the smoothing operator `A = (-eps^2 Delta + Id)^{-1}`.
pub fn multiplier_a(grid: TorusGrid) -> Vec<f64> {
    let e2 = grid.eps * grid.eps;
    grid.ksquared()
        .into_iter()
        .map(|k2| 1.0 / (1.0 + 4.0 * std::f64::consts::PI.powi(2) * e2 * k2))
        .collect()
}

/// Symbol of `B = eps^2 (-Delta) A = Id - A`.
pub fn multiplier_b(grid: TorusGrid) -> Vec<f64> {
    multiplier_a(grid).into_iter().map(|a| 1.0 - a).collect()
}

/// Symbol of `-Delta`.
pub fn multiplier_neg_laplacian(grid: TorusGrid) -> Vec<f64> {
    grid.ksquared()
        .into_iter()
        .map(|k2| 4.0 * std::f64::consts::PI.powi(2) * k2)
        .collect()
}

/// Symbol of the implicit resolvent `(Id + (l1 dt / eps^4) B^2)^{-1}`.
///
/// Every value lies in (0, 1]; the zero mode is exactly 1, so means pass
/// through untouched.
pub fn resolvent_symbol(grid: TorusGrid, lambda1: f64, dt: f64) -> Vec<f64> {
    assert!(lambda1 >= 0.0 && dt >= 0.0);
    let e2 = grid.eps * grid.eps;
    let pi2 = std::f64::consts::PI.powi(2);
    grid.ksquared()
        .into_iter()
        .map(|k2| {
            let lap = 4.0 * pi2 * k2;
            let a = 1.0 / (1.0 + e2 * lap);
            1.0 / (1.0 + lambda1 * dt * lap * lap * a * a)
        })
        .collect()
}

/// 2/3-rule mask: 1 on modes with every `|k_axis| <= m/3`, else 0.
pub fn dealias_mask(grid: TorusGrid) -> Vec<f64> {
    let cutoff = (grid.m / 3) as i64;
    let n = grid.len();
    let mut out = vec![1.0; n];
    for (idx, slot) in out.iter_mut().enumerate() {
        let ix = grid.decompose(idx);
        for a in 0..grid.dim {
            if grid.wavenumber(ix[a]).abs() > cutoff {
                *slot = 0.0;
                break;
            }
        }
    }
    out
}

/// Applies a diagonal Fourier multiplier to a field.
pub fn apply_multiplier(field: &ScalarField, symbol: &[f64]) -> Result<ScalarField, SpectralError> {
    assert_eq!(symbol.len(), field.grid.len(), "symbol/grid size mismatch");
    let mut tr = Transformer::new(field.grid);
    let mut spec = tr.forward(&field.values);
    for (c, &s) in spec.iter_mut().zip(symbol) {
        *c *= s;
    }
    let values = tr.inverse(spec)?;
    Ok(ScalarField {
        grid: field.grid,
        values,
    })
}

#[derive(Serialize, Deserialize)]
struct SnapshotHeader {
    dim: usize,
    m: usize,
    eps: f64,
    time: f64,
}

/// Writes a field as a one-line JSON header followed by raw little-endian
/// f64 values in row-major order. The format round-trips bit exactly.
pub fn write_snapshot(path: &Path, field: &ScalarField, time: f64) -> Result<(), SpectralError> {
    let header = SnapshotHeader {
        dim: field.grid.dim,
        m: field.grid.m,
        eps: field.grid.eps,
        time,
    };
    let mut out = BufWriter::new(File::create(path)?);
    let text = serde_json::to_string(&header)
        .map_err(|e| SpectralError::SnapshotFormat {
            reason: format!("header encoding failed: {e}"),
        })?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    for v in &field.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<(ScalarField, f64), SpectralError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: SnapshotHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| SpectralError::SnapshotFormat {
            reason: format!("bad header: {e}"),
        })?;
    if !(1..=3).contains(&header.dim) {
        return Err(SpectralError::SnapshotFormat {
            reason: format!("dim {} out of range", header.dim),
        });
    }
    if header.m < 2 || !header.m.is_power_of_two() {
        return Err(SpectralError::SnapshotFormat {
            reason: format!("m {} is not a power of two", header.m),
        });
    }
    if !(header.eps.is_finite() && header.eps > 0.0) {
        return Err(SpectralError::SnapshotFormat {
            reason: format!("eps {} is not positive", header.eps),
        });
    }
    let grid = TorusGrid::new(header.dim, header.m, header.eps);
    let n = grid.len();
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * n {
        return Err(SpectralError::SnapshotFormat {
            reason: format!("expected {} value bytes, found {}", 8 * n, bytes.len()),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ScalarField { grid, values }, header.time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Deterministic uniform samples in [0, 1).
    fn rand_unit(seed: u64, i: u64) -> f64 {
        let mut x = seed.wrapping_add((i + 1).wrapping_mul(0x9e3779b97f4a7c15));
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
        x ^= x >> 31;
        (x >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_field(grid: TorusGrid, seed: u64) -> ScalarField {
        let values = (0..grid.len())
            .map(|i| 2.0 * rand_unit(seed, i as u64) - 1.0)
            .collect();
        ScalarField { grid, values }
    }

    #[test]
    fn zero_mode_is_the_mean_and_parseval_holds() {
        for &(dim, m) in &[(1usize, 64usize), (2, 32), (3, 8)] {
            let grid = TorusGrid::new(dim, m, 0.05);
            let u = random_field(grid, 7);
            let mut tr = Transformer::new(grid);
            let spec = tr.forward(&u.values);
            assert!((spec[0].re - u.mean()).abs() < 1e-13);
            assert!(spec[0].im.abs() < 1e-15);
            let sum_sq: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
            let mean_sq = u.l2_norm().powi(2);
            assert!(
                (sum_sq - mean_sq).abs() < 1e-12,
                "dim {dim}: {sum_sq} vs {mean_sq}"
            );
        }
    }

    #[test]
    fn roundtrip_recovers_the_field() {
        for &(dim, m) in &[(1usize, 128usize), (2, 32), (3, 16)] {
            let grid = TorusGrid::new(dim, m, 0.02);
            let u = random_field(grid, 3);
            let mut tr = Transformer::new(grid);
            let spec = tr.forward(&u.values);
            let back = tr.inverse(spec).unwrap();
            let err = back
                .iter()
                .zip(&u.values)
                .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
            assert!(err < 1e-13, "dim {dim}: roundtrip error {err}");
        }
    }

    #[test]
    fn multiplier_scales_plane_waves_by_symbol_value() {
        let grid = TorusGrid::new(2, 64, 1.0 / 64.0);
        let u = ScalarField::from_fn(grid, |x| {
            (2.0 * PI * 3.0 * x[0]).cos() * (2.0 * PI * 5.0 * x[1]).sin()
        });
        let a = multiplier_a(grid);
        let au = apply_multiplier(&u, &a).unwrap();
        let k2 = 9.0 + 25.0;
        let expect = 1.0 / (1.0 + 4.0 * PI * PI * grid.eps * grid.eps * k2);
        for (x, y) in au.values.iter().zip(&u.values) {
            assert!((x - expect * y).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothing_operator_inverts_screened_laplacian() {
        // (-eps^2 Delta + Id) A u = u for band-limited u.
        let grid = TorusGrid::new(2, 32, 0.03);
        let u = random_field(grid, 11);
        let au = apply_multiplier(&u, &multiplier_a(grid)).unwrap();
        let e2 = grid.eps * grid.eps;
        let screened: Vec<f64> = multiplier_neg_laplacian(grid)
            .iter()
            .map(|l| 1.0 + e2 * l)
            .collect();
        let back = apply_multiplier(&au, &screened).unwrap();
        let num: f64 = back
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let den: f64 = u.values.iter().map(|v| v * v).sum();
        assert!((num / den).sqrt() < 1e-12);
    }

    #[test]
    fn b_symbol_complements_a_and_resolvent_is_bounded() {
        let grid = TorusGrid::new(2, 64, 1.0 / 64.0);
        let a = multiplier_a(grid);
        let b = multiplier_b(grid);
        for (x, y) in a.iter().zip(&b) {
            assert!((x + y - 1.0).abs() < 1e-15);
        }
        let dt = 10.0 * grid.eps.powi(4);
        let r = resolvent_symbol(grid, 1.0, dt);
        let lap = multiplier_neg_laplacian(grid);
        assert_eq!(r[0], 1.0);
        for i in 0..r.len() {
            assert!(r[i] > 0.0 && r[i] <= 1.0);
            let direct = 1.0 / (1.0 + dt * (lap[i] * a[i]).powi(2));
            assert!((r[i] - direct).abs() < 1e-12);
        }
        // Same thing written with the eps^4 factored out, as the stepper
        // uses it: d * B_hat^2 with d = l1 dt / eps^4.
        let d = dt / grid.eps.powi(4);
        for i in 0..r.len() {
            let direct = 1.0 / (1.0 + d * b[i] * b[i]);
            assert!((r[i] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let grid = TorusGrid::new(1, 32, 0.1);
        let u = ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).cos());
        let mut symbol = vec![0.0; grid.len()];
        symbol[1] = 1.0;
        match apply_multiplier(&u, &symbol) {
            Err(SpectralError::NonRealOutput { .. }) => {}
            other => panic!("expected NonRealOutput, got {other:?}"),
        }
    }

    #[test]
    fn dealias_mask_cuts_high_modes_only() {
        let grid = TorusGrid::new(1, 32, 0.1);
        let mask = dealias_mask(grid);
        for j in 0..32 {
            let k = grid.wavenumber(j).abs();
            let expect = if k <= 10 { 1.0 } else { 0.0 };
            assert_eq!(mask[j], expect, "k = {k}");
        }
    }

    #[test]
    fn wavenumber_layout_matches_conventions() {
        let grid = TorusGrid::new(1, 8, 0.1);
        let ks: Vec<i64> = (0..8).map(|j| grid.wavenumber(j)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(grid.axis_coord(0), -0.5);
        assert_eq!(grid.axis_coord(4), 0.0);
        let g3 = TorusGrid::new(3, 4, 0.1);
        assert_eq!(g3.index(&[1, 2, 3]), 1 * 16 + 2 * 4 + 3);
        assert_eq!(g3.decompose(27)[..3], [1, 2, 3]);
    }

    #[test]
    fn snapshot_roundtrips_bit_exactly() {
        let dir = std::env::temp_dir().join("phaseflow_snapshot_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.snap");
        let grid = TorusGrid::new(2, 16, 1.0 / 64.0);
        let u = random_field(grid, 99);
        write_snapshot(&path, &u, 0.125).unwrap();
        let (v, time) = read_snapshot(&path).unwrap();
        assert_eq!(time, 0.125);
        assert_eq!(v.grid, grid);
        assert_eq!(v.values, u.values);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn snapshot_rejects_corruption() {
        let dir = std::env::temp_dir().join("phaseflow_snapshot_reject");
        std::fs::create_dir_all(&dir).unwrap();
        let bad_header = dir.join("bad_header.snap");
        std::fs::write(&bad_header, b"not json\n").unwrap();
        assert!(matches!(
            read_snapshot(&bad_header),
            Err(SpectralError::SnapshotFormat { .. })
        ));
        let truncated = dir.join("truncated.snap");
        let grid = TorusGrid::new(1, 8, 0.1);
        let u = ScalarField::zeros(grid);
        write_snapshot(&truncated, &u, 0.0).unwrap();
        let bytes = std::fs::read(&truncated).unwrap();
        std::fs::write(&truncated, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(
            read_snapshot(&truncated),
            Err(SpectralError::SnapshotFormat { .. })
        ));
        std::fs::remove_dir_all(&dir).ok();
    }
}
