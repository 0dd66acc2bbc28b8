//! Synthetic location encoders: positional encodings of known intrinsic
//! dimension, plus random linear / sinusoidal network heads.

pub mod sh;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::embedding::{EmbeddingMatrix, Provenance};
use crate::error::{Error, Result};
use crate::geo::GeoPointSet;
use crate::linalg::dgemm_nt;
use crate::rng::{normal, substream, IndexedRng};

pub use sh::encode_spherical_harmonics;

const HEAD_ROW_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    Raw,
    SphericalHarmonics,
    RffHierarchical,
    SinusoidalMultiscale,
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EncoderKind::Raw => "raw",
            EncoderKind::SphericalHarmonics => "sh",
            EncoderKind::RffHierarchical => "rff",
            EncoderKind::SinusoidalMultiscale => "sinusoidal",
        };
        write!(f, "{s}")
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(EncoderKind::Raw),
            "sh" | "spherical-harmonics" => Ok(EncoderKind::SphericalHarmonics),
            "rff" => Ok(EncoderKind::RffHierarchical),
            "sinusoidal" | "multiscale" | "grid-encoding" => Ok(EncoderKind::SinusoidalMultiscale),
            other => Err(Error::InvalidParameter(format!(
                "unknown encoder '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadKind {
    None,
    Linear,
    Siren,
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HeadKind::None => "none",
            HeadKind::Linear => "linear",
            HeadKind::Siren => "siren",
        };
        write!(f, "{s}")
    }
}

impl FromStr for HeadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(HeadKind::None),
            "linear" => Ok(HeadKind::Linear),
            "siren" => Ok(HeadKind::Siren),
            other => Err(Error::InvalidParameter(format!("unknown head '{other}'"))),
        }
    }
}

/// Full description of a synthetic encoder pipeline.
#[derive(Debug, Clone)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    /// SH degree bound.
    pub l: usize,
    /// RFF frequency range and hierarchy.
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub m_levels: usize,
    pub features_per_level: usize,
    /// Multiscale sinusoidal component count and wavelength range (degrees).
    pub s_scales: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub head: HeadKind,
    pub head_width: usize,
    pub head_depth: usize,
    pub omega0: f64,
    pub seed: u64,
}

impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec {
            kind: EncoderKind::Raw,
            l: 40,
            sigma_min: 1.0,
            sigma_max: 256.0,
            m_levels: 3,
            features_per_level: 32,
            s_scales: 16,
            lambda_min: 1.0,
            lambda_max: 360.0,
            head: HeadKind::None,
            head_width: 256,
            head_depth: 2,
            omega0: 30.0,
            seed: 0,
        }
    }
}

impl EncoderSpec {
    pub fn describe(&self) -> String {
        let base = match self.kind {
            EncoderKind::Raw => "raw".to_string(),
            EncoderKind::SphericalHarmonics => format!("sh(L={})", self.l),
            EncoderKind::RffHierarchical => format!(
                "rff(sigma={}..{},M={},f={})",
                self.sigma_min, self.sigma_max, self.m_levels, self.features_per_level
            ),
            EncoderKind::SinusoidalMultiscale => format!(
                "sinusoidal(S={},lambda={}..{})",
                self.s_scales, self.lambda_min, self.lambda_max
            ),
        };
        match self.head {
            HeadKind::None => base,
            HeadKind::Linear => format!("{base}+linear(w={})", self.head_width),
            HeadKind::Siren => format!(
                "{base}+siren(w={},depth={},omega0={})",
                self.head_width, self.head_depth, self.omega0
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_levels == 0 {
            return Err(Error::InvalidParameter("RFF hierarchy M must be >= 1".into()));
        }
        if self.s_scales == 0 {
            return Err(Error::InvalidParameter("multiscale S must be >= 1".into()));
        }
        if self.sigma_min > self.sigma_max {
            return Err(Error::InvalidParameter(
                "sigma_min must not exceed sigma_max".into(),
            ));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidParameter("omega0 must be positive".into()));
        }
        if self.lambda_min <= 0.0 {
            return Err(Error::InvalidParameter("lambda_min must be positive".into()));
        }
        Ok(())
    }

    /// Run the positional encoding and, if configured, the random head.
    pub fn encode(&self, points: &GeoPointSet) -> Result<EmbeddingMatrix<f64>> {
        self.validate()?;
        let base = match self.kind {
            EncoderKind::Raw => encode_raw(points)?,
            EncoderKind::SphericalHarmonics => encode_spherical_harmonics(points, self.l)?,
            EncoderKind::RffHierarchical => encode_rff(
                points,
                self.sigma_min,
                self.sigma_max,
                self.m_levels,
                self.features_per_level,
                substream(self.seed, "encoder.rff"),
            )?,
            EncoderKind::SinusoidalMultiscale => encode_sinusoidal_multiscale(
                points,
                self.s_scales,
                self.lambda_min,
                self.lambda_max,
            )?,
        };
        match self.head {
            HeadKind::None => Ok(base),
            HeadKind::Linear | HeadKind::Siren => apply_head(
                &base,
                self.head,
                self.head_width,
                self.head_depth,
                self.omega0,
                substream(self.seed, "encoder.head"),
            ),
        }
    }
}

/// Raw coordinates: two columns `(lon, lat)` in degrees, each shifted to
/// zero mean.
pub fn encode_raw(points: &GeoPointSet) -> Result<EmbeddingMatrix<f64>> {
    let n = points.n();
    if n == 0 {
        return Err(Error::EmptyInput("encode_raw: no points"));
    }
    let mut lon_mean = 0.0;
    let mut lat_mean = 0.0;
    for p in points.points() {
        lon_mean += p.lon();
        lat_mean += p.lat();
    }
    lon_mean /= n as f64;
    lat_mean /= n as f64;
    let mut data = Vec::with_capacity(n * 2);
    for p in points.points() {
        data.push(p.lon() - lon_mean);
        data.push(p.lat() - lat_mean);
    }
    EmbeddingMatrix::new(data, n, 2, Provenance::Encoder("raw".into()))
}

/// Hierarchical random Fourier features of the unit 3-vector: `M` log-spaced
/// frequency scales between `sigma_min` and `sigma_max` (a single level uses
/// `sigma_max`), each with its own Gaussian projection and phase.
pub fn encode_rff(
    points: &GeoPointSet,
    sigma_min: f64,
    sigma_max: f64,
    m_levels: usize,
    features_per_level: usize,
    seed: u64,
) -> Result<EmbeddingMatrix<f64>> {
    if points.n() == 0 {
        return Err(Error::EmptyInput("encode_rff: no points"));
    }
    if m_levels == 0 {
        return Err(Error::InvalidParameter("RFF hierarchy M must be >= 1".into()));
    }
    if features_per_level == 0 {
        return Err(Error::InvalidParameter(
            "RFF features_per_level must be >= 1".into(),
        ));
    }
    if sigma_min > sigma_max {
        return Err(Error::InvalidParameter(
            "sigma_min must not exceed sigma_max".into(),
        ));
    }

    let gammas: Vec<f64> = (0..m_levels)
        .map(|m| {
            if m_levels == 1 {
                sigma_max
            } else {
                sigma_min * (sigma_max / sigma_min).powf(m as f64 / (m_levels - 1) as f64)
            }
        })
        .collect();

    // Per-level weights W_m (features x 3, N(0,1)) and phases b_m in [0, 2pi).
    let mut rng = IndexedRng::new(seed).at(0);
    let mut weights = Vec::with_capacity(m_levels);
    for _ in 0..m_levels {
        let w: Vec<f64> = (0..features_per_level * 3).map(|_| normal(&mut rng)).collect();
        let b: Vec<f64> = (0..features_per_level)
            .map(|_| std::f64::consts::TAU * rng.random::<f64>())
            .collect();
        weights.push((w, b));
    }

    let n = points.n();
    let d = 2 * m_levels * features_per_level;
    let mut data = vec![0.0f64; n * d];
    data.par_chunks_mut(d)
        .zip(points.points().par_iter())
        .for_each(|(row, p)| {
            let u = p.unit3();
            let mut off = 0;
            for (level, (w, b)) in weights.iter().enumerate() {
                let gamma = gammas[level];
                for f in 0..features_per_level {
                    let proj = w[f * 3] * u[0] + w[f * 3 + 1] * u[1] + w[f * 3 + 2] * u[2];
                    let t = gamma * proj + b[f];
                    let (s, c) = t.sin_cos();
                    row[off + f] = s;
                    row[off + features_per_level + f] = c;
                }
                off += 2 * features_per_level;
            }
        });
    EmbeddingMatrix::new(
        data,
        n,
        d,
        Provenance::Encoder(format!(
            "rff(sigma={sigma_min}..{sigma_max},M={m_levels},f={features_per_level})"
        )),
    )
}

/// Multi-scale sinusoidal encoding of raw degrees: for each coordinate and
/// each of `S` log-spaced wavelengths, the pair `sin(c / lambda_s)`,
/// `cos(c / lambda_s)`; `D = 4S`. Applied to raw degrees on purpose, date
/// line and all.
pub fn encode_sinusoidal_multiscale(
    points: &GeoPointSet,
    s_scales: usize,
    lambda_min: f64,
    lambda_max: f64,
) -> Result<EmbeddingMatrix<f64>> {
    if points.n() == 0 {
        return Err(Error::EmptyInput("encode_sinusoidal_multiscale: no points"));
    }
    if s_scales == 0 {
        return Err(Error::InvalidParameter("multiscale S must be >= 1".into()));
    }
    if lambda_min <= 0.0 {
        return Err(Error::InvalidParameter("lambda_min must be positive".into()));
    }
    let lambdas: Vec<f64> = (0..s_scales)
        .map(|s| {
            if s_scales == 1 {
                lambda_min
            } else {
                lambda_min * (lambda_max / lambda_min).powf(s as f64 / (s_scales - 1) as f64)
            }
        })
        .collect();
    let n = points.n();
    let d = 4 * s_scales;
    let mut data = vec![0.0f64; n * d];
    data.par_chunks_mut(d)
        .zip(points.points().par_iter())
        .for_each(|(row, p)| {
            let mut off = 0;
            for &c in &[p.lon(), p.lat()] {
                for &lambda in &lambdas {
                    let (s, co) = (c / lambda).sin_cos();
                    row[off] = s;
                    row[off + 1] = co;
                    off += 2;
                }
            }
        });
    EmbeddingMatrix::new(
        data,
        n,
        d,
        Provenance::Encoder(format!(
            "sinusoidal(S={s_scales},lambda={lambda_min}..{lambda_max})"
        )),
    )
}

/// One dense layer of a random head.
#[derive(Debug, Clone)]
pub struct HeadLayer {
    /// Row-major `out x in` weight matrix.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
    /// Apply `sin(omega0 * z)` to the pre-activation.
    pub sine: bool,
}

/// A randomly initialized network head applied on top of an encoding.
#[derive(Debug, Clone)]
pub struct Head {
    layers: Vec<HeadLayer>,
    omega0: f64,
    label: String,
}

impl Head {
    /// Single linear layer `y = Wx + b`, entries uniform in
    /// `(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn linear(in_dim: usize, width: usize, seed: u64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParameter("head width must be >= 1".into()));
        }
        let mut rng = IndexedRng::new(seed).at(0);
        let bound = 1.0 / (in_dim as f64).sqrt();
        let layer = HeadLayer {
            weights: uniform_vec(&mut rng, width * in_dim, bound),
            bias: uniform_vec(&mut rng, width, bound),
            in_dim,
            out_dim: width,
            sine: false,
        };
        Ok(Head {
            layers: vec![layer],
            omega0: 1.0,
            label: format!("linear(w={width})"),
        })
    }

    /// `depth` sinusoidal layers `y = sin(omega0 (Wx + b))`. First-layer
    /// weights are uniform in `(-1/fan_in, 1/fan_in)`, later layers in
    /// `(-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0)`.
    pub fn siren(in_dim: usize, width: usize, depth: usize, omega0: f64, seed: u64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParameter("head width must be >= 1".into()));
        }
        if depth == 0 {
            return Err(Error::InvalidParameter("siren depth must be >= 1".into()));
        }
        if omega0 <= 0.0 {
            return Err(Error::InvalidParameter("omega0 must be positive".into()));
        }
        let mut rng = IndexedRng::new(seed).at(0);
        let mut layers = Vec::with_capacity(depth);
        let mut fan_in = in_dim;
        for layer_idx in 0..depth {
            let w_bound = if layer_idx == 0 {
                1.0 / fan_in as f64
            } else {
                (6.0 / fan_in as f64).sqrt() / omega0
            };
            let b_bound = 1.0 / (fan_in as f64).sqrt();
            layers.push(HeadLayer {
                weights: uniform_vec(&mut rng, width * fan_in, w_bound),
                bias: uniform_vec(&mut rng, width, b_bound),
                in_dim: fan_in,
                out_dim: width,
                sine: true,
            });
            fan_in = width;
        }
        Ok(Head {
            layers,
            omega0,
            label: format!("siren(w={width},depth={depth},omega0={omega0})"),
        })
    }

    /// Build a head from explicit layers (test injection).
    pub fn from_layers(layers: Vec<HeadLayer>, omega0: f64, label: &str) -> Self {
        Head {
            layers,
            omega0,
            label: label.to_string(),
        }
    }

    pub fn apply(&self, emb: &EmbeddingMatrix<f64>) -> Result<EmbeddingMatrix<f64>> {
        let first = self
            .layers
            .first()
            .ok_or(Error::EmptyInput("head with no layers"))?;
        if first.in_dim != emb.cols() {
            return Err(Error::InvalidParameter(format!(
                "head expects {} inputs, embedding has {}",
                first.in_dim,
                emb.cols()
            )));
        }
        let n = emb.rows();
        let mut current: Vec<f64> = emb.data().to_vec();
        let mut cur_dim = emb.cols();
        for layer in &self.layers {
            debug_assert_eq!(layer.in_dim, cur_dim);
            let mut next = vec![0.0f64; n * layer.out_dim];
            next.par_chunks_mut(HEAD_ROW_BLOCK * layer.out_dim)
                .zip(current.par_chunks(HEAD_ROW_BLOCK * layer.in_dim))
                .for_each(|(out_block, in_block)| {
                    let rows = in_block.len() / layer.in_dim;
                    dgemm_nt(
                        rows,
                        layer.out_dim,
                        layer.in_dim,
                        in_block,
                        &layer.weights,
                        &mut out_block[..rows * layer.out_dim],
                    );
                    for row in out_block.chunks_exact_mut(layer.out_dim) {
                        for (v, b) in row.iter_mut().zip(&layer.bias) {
                            let z = *v + b;
                            *v = if layer.sine { (self.omega0 * z).sin() } else { z };
                        }
                    }
                });
            current = next;
            cur_dim = layer.out_dim;
        }
        EmbeddingMatrix::new(
            current,
            n,
            cur_dim,
            Provenance::Encoder(format!("{:?}+{}", emb.provenance(), self.label)),
        )
    }
}

/// Apply a freshly initialized random head of the given kind.
pub fn apply_head(
    emb: &EmbeddingMatrix<f64>,
    kind: HeadKind,
    width: usize,
    depth: usize,
    omega0: f64,
    seed: u64,
) -> Result<EmbeddingMatrix<f64>> {
    let head = match kind {
        HeadKind::None => return Ok(emb.clone()),
        HeadKind::Linear => Head::linear(emb.cols(), width, seed)?,
        HeadKind::Siren => Head::siren(emb.cols(), width, depth, omega0, seed)?,
    };
    head.apply(emb)
}

fn uniform_vec(rng: &mut impl Rng, len: usize, bound: f64) -> Vec<f64> {
    (0..len)
        .map(|_| bound * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::sampling::sample_uniform_sphere;
    use approx::assert_relative_eq;

    fn ring() -> GeoPointSet {
        GeoPointSet::new(
            (0..8).map(|i| GeoPoint::new(-180.0 + 45.0 * i as f64, 0.0)).collect(),
            None,
            0,
        )
    }

    #[test]
    fn raw_shape_and_centering() {
        let pts = ring();
        let emb = encode_raw(&pts).unwrap();
        assert_eq!((emb.rows(), emb.cols()), (8, 2));
        // Equator ring: lat column is all zeros before centering, so it
        // stays all zeros after subtracting its (zero) mean.
        for i in 0..8 {
            assert_relative_eq!(emb.row(i)[1], 0.0);
        }
        let lon_mean: f64 = (0..8).map(|i| emb.row(i)[0]).sum::<f64>() / 8.0;
        assert_relative_eq!(lon_mean, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rff_dimension_and_range() {
        let pts = sample_uniform_sphere(64, 5).unwrap();
        let emb = encode_rff(&pts, 1.0, 16.0, 1, 1, 3).unwrap();
        assert_eq!(emb.cols(), 2);
        let emb = encode_rff(&pts, 1.0, 16.0, 4, 8, 3).unwrap();
        assert_eq!(emb.cols(), 64);
        assert!(emb.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn rff_is_seeded() {
        let pts = sample_uniform_sphere(16, 5).unwrap();
        let a = encode_rff(&pts, 1.0, 8.0, 2, 4, 7).unwrap();
        let b = encode_rff(&pts, 1.0, 8.0, 2, 4, 7).unwrap();
        let c = encode_rff(&pts, 1.0, 8.0, 2, 4, 8).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn multiscale_dimensions() {
        let pts = ring();
        assert_eq!(
            encode_sinusoidal_multiscale(&pts, 1, 1.0, 360.0).unwrap().cols(),
            4
        );
        assert_eq!(
            encode_sinusoidal_multiscale(&pts, 16, 1.0, 360.0).unwrap().cols(),
            64
        );
        assert!(encode_sinusoidal_multiscale(&pts, 0, 1.0, 360.0).is_err());
        assert!(encode_sinusoidal_multiscale(&pts, 4, 0.0, 360.0).is_err());
    }

    #[test]
    fn identity_linear_head_passes_through() {
        let pts = ring();
        let emb = encode_raw(&pts).unwrap();
        let mut w = vec![0.0; 4];
        w[0] = 1.0;
        w[3] = 1.0;
        let head = Head::from_layers(
            vec![HeadLayer {
                weights: w,
                bias: vec![0.0, 0.0],
                in_dim: 2,
                out_dim: 2,
                sine: false,
            }],
            1.0,
            "identity",
        );
        let out = head.apply(&emb).unwrap();
        assert_eq!(out.data(), emb.data());
    }

    #[test]
    fn siren_outputs_bounded() {
        let pts = sample_uniform_sphere(128, 2).unwrap();
        let emb = sh::encode_spherical_harmonics(&pts, 8).unwrap();
        let out = apply_head(&emb, HeadKind::Siren, 32, 3, 30.0, 11).unwrap();
        assert_eq!(out.cols(), 32);
        assert!(out.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn zero_width_head_rejected() {
        let pts = ring();
        let emb = encode_raw(&pts).unwrap();
        assert!(apply_head(&emb, HeadKind::Linear, 0, 1, 30.0, 0).is_err());
    }
}
