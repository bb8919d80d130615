//! Periodic spectral representation of real fields.
//!
//! A [`Field`] stores the Fourier-series coefficients
//!
//! ```text
//! c_k = (1/L) ∫_0^L u(x) e^{-i ξ_k x} dx,     ξ_k = 2πk/L,
//! ```
//!
//! of a real function on the torus `[0, L)`, in FFT order: storage index `j`
//! holds wavenumber `k = j` for `j <= n/2` and `k = j - n` otherwise. With
//! this normalization `∫ u v w dx = L · Σ_{k1+k2+k3=0} a_{k1} b_{k2} c_{k3}`,
//! so every quadratic or cubic functional carries a single factor of `L`.

use std::cell::RefCell;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized forward DFT, `X_j = Σ_m x_m e^{-2πi jm/len}`.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Unnormalized inverse DFT, `x_m = Σ_j X_j e^{+2πi jm/len}`.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Uniform periodic grid with `n` nodes on `[0, length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    n: usize,
    length: f64,
}

impl SpectralGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "grid size must be a power of two >= 2, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::config(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    /// Grid on the standard period `2π`, where `ξ_k = k`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, std::f64::consts::TAU)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| j as f64 * self.length / self.n as f64)
            .collect()
    }

    /// Storage index of the unpaired Nyquist mode `k = n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Wavenumber `k` stored at index `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Storage index of wavenumber `k`, if `-n/2 < k <= n/2`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k > half || k <= -half {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + self.n as i64) as usize })
    }

    pub fn xi_of(&self, k: i64) -> f64 {
        std::f64::consts::TAU * k as f64 / self.length
    }

    /// Frequency `ξ = 2πk/L` at storage index `j`.
    pub fn frequency(&self, j: usize) -> f64 {
        self.xi_of(self.wavenumber(j))
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.frequency(j)).collect()
    }

    /// Largest retained `|k|` under the 2/3 rule; `3K < n` so quadratic
    /// products of retained modes never alias back into retained modes.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Same period, `n` replaced by `n_new`.
    pub fn with_n(&self, n_new: usize) -> Result<Self> {
        Self::new(n_new, self.length)
    }
}

/// A real field stored by its Fourier-series coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    /// Build a field from coefficients in FFT order.
    pub fn from_coeffs(grid: SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n {
            return Err(Error::config(format!(
                "expected {} coefficients, got {}",
                grid.n,
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of real nodal samples `u(x_j)`.
    pub fn from_samples(grid: SpectralGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::config(format!(
                "expected {} samples, got {}",
                grid.n,
                samples.len()
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&u| Complex64::new(u, 0.0)).collect();
        fft_forward(&mut buf);
        let scale = 1.0 / grid.n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Ok(Self { grid, coeffs: buf })
    }

    /// Sample `f` on the grid nodes and transform.
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        Self::from_samples(grid, &samples).expect("sample count matches grid")
    }

    /// Field with the given `(k, c_k)` pairs and their Hermitian partners.
    ///
    /// A `k = 0` entry must be real; entries outside the grid are an error.
    pub fn from_modes(grid: SpectralGrid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(k, c) in modes {
            if k == 0 {
                f.coeffs[0] += Complex64::new(c.re, 0.0);
                continue;
            }
            let (Some(j), Some(jm)) = (grid.index_of(k), grid.index_of(-k)) else {
                return Err(Error::config(format!("mode k = {k} is not representable")));
            };
            f.coeffs[j] += c;
            f.coeffs[jm] += c.conj();
        }
        Ok(f)
    }

    /// `a cos(ξ_k x)` with exactly two nonzero coefficients.
    pub fn cosine(grid: SpectralGrid, k: i64, a: f64) -> Result<Self> {
        Self::from_modes(grid, &[(k, Complex64::new(a / 2.0, 0.0))])
    }

    /// `a sin(ξ_k x)` with exactly two nonzero coefficients.
    pub fn sine(grid: SpectralGrid, k: i64, a: f64) -> Result<Self> {
        Self::from_modes(grid, &[(k, Complex64::new(0.0, -a / 2.0))])
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero for unrepresentable `k`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |j| self.coeffs[j])
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Nodal values `u(x_j)`; the imaginary part of the inverse transform
    /// (round-off for Hermitian coefficients) is discarded.
    pub fn to_samples(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft_inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Nodal values on a finer grid with `factor * n` points (spectral interpolation).
    pub fn to_samples_refined(&self, factor: usize) -> Vec<f64> {
        let fine = self
            .resampled(self.grid.n * factor.max(1))
            .expect("power-of-two refinement");
        fine.to_samples()
    }

    /// Same function on a grid with `n_new` points: zero-padded when
    /// refining, truncated when coarsening. The Nyquist mode of the target
    /// grid is zeroed.
    pub fn resampled(&self, n_new: usize) -> Result<Field> {
        let grid = self.grid.with_n(n_new)?;
        let mut out = Field::zeros(grid);
        for (j, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            if k.unsigned_abs() as usize * 2 >= n_new && k != 0 {
                continue;
            }
            if j == self.grid.nyquist_index() {
                continue;
            }
            if let Some(i) = grid.index_of(k) {
                out.coeffs[i] = c;
            }
        }
        out.coeffs[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        Ok(out)
    }

    /// Multiply every coefficient by `m(ξ_k)`; the Nyquist mode is zeroed.
    ///
    /// Returns [`Error::NonFiniteMultiplier`] naming the first offending `ξ_k`.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Result<Field> {
        let nyq = self.grid.nyquist_index();
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            if j == nyq {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let xi = self.grid.frequency(j);
            let mj = m(xi);
            if !(mj.re.is_finite() && mj.im.is_finite()) {
                return Err(Error::NonFiniteMultiplier { xi });
            }
            *c *= mj;
        }
        Ok(out)
    }

    /// [`Field::apply_multiplier`] for real-valued symbols.
    pub fn apply_real_multiplier(&self, m: impl Fn(f64) -> f64) -> Result<Field> {
        self.apply_multiplier(|xi| Complex64::new(m(xi), 0.0))
    }

    /// `∂ₓ u`, the multiplier `iξ`.
    pub fn derivative(&self) -> Field {
        self.apply_multiplier(|xi| Complex64::new(0.0, xi))
            .expect("iξ is finite on the grid")
    }

    /// Zero every `|k| > K` with `K = floor(n/3)`, and the Nyquist mode.
    pub fn truncated(&self, kmax: i64) -> Field {
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            if self.grid.wavenumber(j).abs() > kmax || j == self.grid.nyquist_index() {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// `u²` with 2/3-rule truncation before and after the pointwise product.
    ///
    /// For inputs band-limited to `|k| <= n/3` this equals the exact
    /// Fourier convolution restricted to `|k| <= n/3`.
    pub fn dealiased_square(&self) -> Field {
        let kmax = self.grid.dealias_cutoff();
        let trunc = self.truncated(kmax);
        let mut buf = trunc.coeffs;
        fft_inverse(&mut buf);
        for c in &mut buf {
            *c = Complex64::new(c.re * c.re, 0.0);
        }
        fft_forward(&mut buf);
        let scale = 1.0 / self.grid.n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Field {
            grid: self.grid,
            coeffs: buf,
        }
        .truncated(kmax)
    }

    /// Dealiased product `u v` (same truncation policy as [`Field::dealiased_square`]).
    pub fn dealiased_product(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let kmax = self.grid.dealias_cutoff();
        let mut a = self.truncated(kmax).coeffs;
        let mut b = other.truncated(kmax).coeffs;
        fft_inverse(&mut a);
        fft_inverse(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x = Complex64::new(x.re * y.re, 0.0);
        }
        fft_forward(&mut a);
        let scale = 1.0 / self.grid.n as f64;
        for c in &mut a {
            *c *= scale;
        }
        Field {
            grid: self.grid,
            coeffs: a,
        }
        .truncated(kmax)
    }

    /// `‖u‖_{H^s} = (L Σ ⟨ξ_k⟩^{2s} |c_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let xi = self.grid.frequency(j);
                (1.0 + xi * xi).powf(s) * c.norm_sqr()
            })
            .sum();
        (self.grid.length * sum).sqrt()
    }

    /// Homogeneous `‖u‖_{Ḣ^s}`; the mean mode is excluded.
    pub fn homogeneous_sobolev_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != 0)
            .map(|(j, c)| self.grid.frequency(j).abs().powf(2.0 * s) * c.norm_sqr())
            .sum();
        (self.grid.length * sum).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// `∫ u v dx = L Re Σ c_k conj(d_k)`.
    pub fn inner(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.grid.length
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|c_{-k} - conj(c_k)|` over the grid.
    pub fn hermitian_defect(&self) -> f64 {
        let half = (self.grid.n / 2) as i64;
        (1..half)
            .map(|k| (self.coeff(-k) - self.coeff(k).conj()).norm())
            .chain(std::iter::once(self.coeffs[0].im.abs()))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// Serialize as CSV `k,re_ck,im_ck` under a one-line JSON header.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let header = serde_json::json!({ "n": self.grid.n, "length": self.grid.length });
        writeln!(w, "# {header}")?;
        writeln!(w, "k,re_ck,im_ck")?;
        let half = (self.grid.n / 2) as i64;
        for k in (-half + 1)..=half {
            let c = self.coeff(k);
            writeln!(w, "{k},{},{}", fmt_f64(c.re), fmt_f64(c.im))?;
        }
        Ok(())
    }

    /// Inverse of [`Field::write_csv`].
    pub fn read_csv(r: impl BufRead) -> Result<Field> {
        #[derive(Deserialize)]
        struct Header {
            n: usize,
            length: f64,
        }
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field file".into()))??;
        let json = first
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("field file must start with a '# {json}' header".into()))?;
        let header: Header = serde_json::from_str(json.trim())?;
        let grid = SpectralGrid::new(header.n, header.length)?;
        let cols = lines
            .next()
            .ok_or_else(|| Error::Parse("missing column header".into()))??;
        if cols.trim() != "k,re_ck,im_ck" {
            return Err(Error::Parse(format!("unexpected column header {cols:?}")));
        }
        let mut field = Field::zeros(grid);
        let mut seen = 0usize;
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse(format!("line {}: expected k,re,im", lineno + 3));
            if parts.len() != 3 {
                return Err(bad());
            }
            let k: i64 = parts[0].trim().parse().map_err(|_| bad())?;
            let re: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let im: f64 = parts[2].trim().parse().map_err(|_| bad())?;
            let j = grid
                .index_of(k)
                .ok_or_else(|| Error::Parse(format!("wavenumber {k} outside the grid")))?;
            field.coeffs[j] = Complex64::new(re, im);
            seen += 1;
        }
        if seen != grid.n {
            return Err(Error::Parse(format!(
                "expected {} coefficient rows, found {seen}",
                grid.n
            )));
        }
        Ok(field)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "fields live on different grids");
        Field {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        assert_eq!(self.grid, rhs.grid, "fields live on different grids");
        Field {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, a: f64) -> Field {
        self.scaled(a)
    }
}

/// Forward transform of nodal samples.
pub fn transform(grid: SpectralGrid, samples: &[f64]) -> Result<Field> {
    Field::from_samples(grid, samples)
}

/// Free-form description of how a trajectory was produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordMetadata {
    pub symbol: Option<crate::dispersion::DispersionSymbol>,
    pub solver: Option<crate::solver::SolverConfig>,
}

/// Snapshots `u(·, t_i)` of one solution on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    grid: SpectralGrid,
    times: Vec<f64>,
    snapshots: Vec<Field>,
    pub metadata: RecordMetadata,
}

impl TrajectoryRecord {
    pub fn new(grid: SpectralGrid) -> Self {
        Self {
            grid,
            times: Vec::new(),
            snapshots: Vec::new(),
            metadata: RecordMetadata::default(),
        }
    }

    pub fn with_metadata(mut self, metadata: RecordMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    /// Append a snapshot; times must increase strictly and grids must agree.
    pub fn push(&mut self, t: f64, u: Field) -> Result<()> {
        if u.grid != self.grid {
            return Err(Error::config("snapshot grid differs from the record grid"));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::config(format!(
                    "snapshot times must increase strictly ({t} after {last})"
                )));
            }
        }
        self.times.push(t);
        self.snapshots.push(u);
        Ok(())
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Field] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &Field)> {
        self.times.last().map(|&t| (t, self.snapshots.last().unwrap()))
    }

    /// Uniform sampling step, or a configuration error if the times are not
    /// equispaced to relative `1e-9`.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::config("need at least two snapshots for a time transform"));
        }
        let dt = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
                return Err(Error::config("time sampling is not uniform"));
            }
        }
        Ok(dt)
    }

    /// Apply `f` to every snapshot, keeping times and metadata.
    pub fn map_snapshots(&self, mut f: impl FnMut(&Field) -> Field) -> TrajectoryRecord {
        TrajectoryRecord {
            grid: self.grid,
            times: self.times.clone(),
            snapshots: self.snapshots.iter().map(&mut f).collect(),
            metadata: self.metadata.clone(),
        }
    }
}
