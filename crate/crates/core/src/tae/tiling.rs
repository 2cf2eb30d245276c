use super::latent_frame_count;
use crate::error::{Error, Result};
use crate::numerics::{convex_blend, Tensor};

/// Raw-frame tile length used for both encoding and decoding by default.
pub const DEFAULT_TILE_RAW_FRAMES: usize = 32;
/// Raw-frame overlap between decoder tiles by default (encoder tiles do not overlap).
pub const DEFAULT_DECODE_OVERLAP_RAW_FRAMES: usize = 16;

/// Shape parameters of a temporal autoencoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecSpec {
    pub temporal_factor: usize,
    pub spatial_factor: usize,
    pub channels: usize,
}

impl Default for CodecSpec {
    fn default() -> Self {
        Self {
            temporal_factor: 8,
            spatial_factor: 8,
            channels: 16,
        }
    }
}

impl CodecSpec {
    /// Latent `[T', C, H', W']` for a raw `[T, _, H, W]` video.
    pub fn latent_shape(&self, frames: usize, height: usize, width: usize) -> Result<[usize; 4]> {
        let s = self.spatial_factor;
        if s == 0 || !height.is_multiple_of(s) || !width.is_multiple_of(s) {
            return Err(Error::invalid(format!(
                "{height}x{width} not divisible by spatial factor {s}"
            )));
        }
        Ok([
            latent_frame_count(frames, self.temporal_factor)?,
            self.channels,
            height / s,
            width / s,
        ])
    }
}

/// Encoder/decoder pair acting along the frame axis (axis 0).
///
/// `encode` maps `T` frames to `ceil(T / f)` latent frames; `decode` maps `L`
/// latent frames to `f·L` frames.
pub trait Codec {
    fn temporal_factor(&self) -> usize;
    fn encode(&self, x: &Tensor) -> Result<Tensor>;
    fn decode(&self, z: &Tensor) -> Result<Tensor>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityCodec;

impl Codec for IdentityCodec {
    fn temporal_factor(&self) -> usize {
        1
    }
    fn encode(&self, x: &Tensor) -> Result<Tensor> {
        Ok(x.clone())
    }
    fn decode(&self, z: &Tensor) -> Result<Tensor> {
        Ok(z.clone())
    }
}

/// Per-frame scaling: encode multiplies by `encode_scale`, decode by `decode_scale`.
#[derive(Debug, Clone, Copy)]
pub struct ScaleCodec {
    pub encode_scale: f64,
    pub decode_scale: f64,
}

impl Codec for ScaleCodec {
    fn temporal_factor(&self) -> usize {
        1
    }
    fn encode(&self, x: &Tensor) -> Result<Tensor> {
        Ok(x.scale(self.encode_scale))
    }
    fn decode(&self, z: &Tensor) -> Result<Tensor> {
        Ok(z.scale(self.decode_scale))
    }
}

/// Temporal average pooling by `factor` on encode (a trailing partial group
/// averages the frames it has) and frame repetition on decode.
#[derive(Debug, Clone, Copy)]
pub struct PoolCodec {
    pub factor: usize,
}

impl Codec for PoolCodec {
    fn temporal_factor(&self) -> usize {
        self.factor
    }

    fn encode(&self, x: &Tensor) -> Result<Tensor> {
        let t = x.frames();
        let groups = latent_frame_count(t, self.factor)?;
        let fs = x.frame_size();
        let mut data = Vec::with_capacity(groups * fs);
        for g in 0..groups {
            let lo = g * self.factor;
            let hi = (lo + self.factor).min(t);
            let n = (hi - lo) as f64;
            for k in 0..fs {
                let s: f64 = (lo..hi).map(|i| x.frame(i)[k]).sum();
                data.push(s / n);
            }
        }
        let mut shape = x.shape().to_vec();
        shape[0] = groups;
        Tensor::new(shape, data)
    }

    fn decode(&self, z: &Tensor) -> Result<Tensor> {
        let mut data = Vec::with_capacity(z.len() * self.factor);
        for i in 0..z.frames() {
            for _ in 0..self.factor {
                data.extend_from_slice(z.frame(i));
            }
        }
        let mut shape = z.shape().to_vec();
        shape[0] *= self.factor;
        Tensor::new(shape, data)
    }
}

/// Tiles along the frame axis. Consecutive spans share `overlap` frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    tile_len: usize,
    overlap: usize,
    spans: Vec<(usize, usize)>,
}

impl TilePlan {
    pub fn tile_len(&self) -> usize {
        self.tile_len
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn spans(&self) -> &[(usize, usize)] {
        &self.spans
    }

    /// Total frames covered.
    pub fn frames(&self) -> usize {
        self.spans.last().map_or(0, |s| s.1)
    }

    fn scaled(&self, factor: usize, clip: usize) -> TilePlan {
        TilePlan {
            tile_len: self.tile_len * factor,
            overlap: self.overlap * factor,
            spans: self
                .spans
                .iter()
                .map(|&(s, e)| (s * factor, (e * factor).min(clip)))
                .collect(),
        }
    }
}

pub fn plan_tiles(t_frames: usize, tile_len: usize, overlap: usize) -> Result<TilePlan> {
    if t_frames == 0 || tile_len == 0 || overlap >= tile_len {
        return Err(Error::invalid(format!(
            "need t_frames >= 1, tile_len >= 1 and overlap < tile_len \
             (got {t_frames}, {tile_len}, {overlap})"
        )));
    }
    let hop = tile_len - overlap;
    let mut spans = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + tile_len).min(t_frames);
        spans.push((start, end));
        if end == t_frames {
            break;
        }
        start += hop;
    }
    Ok(TilePlan {
        tile_len,
        overlap,
        spans,
    })
}

/// Crossfade weights on the earlier tile across an `n`-frame overlap:
/// `1 - j / (n - 1)` for `j = 0..n`, descending from 1 to 0; a single
/// overlapping frame gets 0.5. The later tile gets the complement.
pub fn blend_weights(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => {
            let d = (n - 1) as f64;
            (0..n).map(|j| 1.0 - j as f64 / d).collect()
        }
    }
}

/// Stitches per-tile outputs back into one sequence, crossfading overlaps.
pub fn blend_stitch(tiles: &[Tensor], plan: &TilePlan) -> Result<Tensor> {
    if tiles.len() != plan.spans.len() {
        return Err(Error::invalid(format!(
            "{} tiles for {} spans",
            tiles.len(),
            plan.spans.len()
        )));
    }
    let first = tiles.first().ok_or(Error::EmptyInput("tiles"))?;
    for (tile, &(s, e)) in tiles.iter().zip(&plan.spans) {
        if tile.rank() == 0 || tile.frames() != e - s || tile.shape()[1..] != first.shape()[1..] {
            return Err(Error::ShapeMismatch {
                expected: [&[e - s], &first.shape()[1.min(first.rank())..]].concat(),
                found: tile.shape().to_vec(),
            });
        }
    }

    let mut shape = first.shape().to_vec();
    shape[0] = plan.frames();
    let mut out = Tensor::zeros(&shape);
    out.write_frames(0, first)?;
    for (pair, tile) in plan.spans.windows(2).zip(&tiles[1..]) {
        let (prev_end, (start, end)) = (pair[0].1, pair[1]);
        let ov = prev_end.saturating_sub(start).min(end - start);
        for (j, w) in blend_weights(ov).into_iter().enumerate() {
            let src = tile.frame(j);
            for (o, &v) in out.frame_mut(start + j).iter_mut().zip(src) {
                *o = convex_blend(*o, v, w);
            }
        }
        if ov < end - start {
            out.write_frames(start + ov, &tile.slice_frames(ov, end - start)?)?;
        }
    }
    Ok(out)
}

/// The default encoder (no overlap) and decoder (overlapping) plans for a
/// raw sequence of `t_raw` frames.
pub fn default_plans(t_raw: usize, factor: usize) -> Result<(TilePlan, TilePlan)> {
    if factor == 0 || !DEFAULT_TILE_RAW_FRAMES.is_multiple_of(factor) {
        return Err(Error::invalid(format!(
            "temporal factor {factor} does not divide the {DEFAULT_TILE_RAW_FRAMES}-frame tile"
        )));
    }
    let encode = plan_tiles(t_raw, DEFAULT_TILE_RAW_FRAMES, 0)?;
    let latent_tile = DEFAULT_TILE_RAW_FRAMES / factor;
    let latent_overlap = (DEFAULT_DECODE_OVERLAP_RAW_FRAMES / factor).min(latent_tile - 1);
    let decode = plan_tiles(latent_frame_count(t_raw, factor)?, latent_tile, latent_overlap)?;
    Ok((encode, decode))
}

/// `decode(encode(x))` in one pass, with spurious trailing frames dropped.
pub fn untiled_apply(codec: &dyn Codec, x: &Tensor) -> Result<Tensor> {
    let z = codec.encode(x)?;
    let y = codec.decode(&z)?;
    y.slice_frames(0, x.frames())
}

/// Encodes `x` tile by tile under `encode_plan` (raw frames), decodes the
/// latent tile by tile under `decode_plan` (latent frames) and blends.
///
/// Encoder tiles must start on multiples of the temporal factor, and any
/// encoder overlap must be a multiple of it, so that each tile sees the same
/// frame groups as a one-pass encode.
pub fn tiled_apply(
    codec: &dyn Codec,
    x: &Tensor,
    encode_plan: &TilePlan,
    decode_plan: &TilePlan,
) -> Result<Tensor> {
    let f = codec.temporal_factor();
    let t = x.frames();
    if f == 0 {
        return Err(Error::invalid("codec temporal factor must be >= 1"));
    }
    if encode_plan.frames() != t {
        return Err(Error::invalid(format!(
            "encode plan covers {} frames, input has {t}",
            encode_plan.frames()
        )));
    }
    if !encode_plan.overlap.is_multiple_of(f) {
        return Err(Error::invalid(format!(
            "encoder overlap {} not a multiple of temporal factor {f}",
            encode_plan.overlap
        )));
    }

    let mut latent_tiles = Vec::with_capacity(encode_plan.spans.len());
    let mut latent_spans = Vec::with_capacity(encode_plan.spans.len());
    for &(s, e) in &encode_plan.spans {
        if s % f != 0 || (e % f != 0 && e != t) {
            return Err(Error::invalid(format!(
                "encoder tile {s}..{e} not aligned to temporal factor {f}"
            )));
        }
        let z = codec.encode(&x.slice_frames(s, e)?)?;
        let expect = (e - s).div_ceil(f);
        if z.frames() != expect {
            return Err(Error::ShapeMismatch {
                expected: vec![expect],
                found: z.shape().to_vec(),
            });
        }
        latent_tiles.push(z);
        latent_spans.push((s / f, e.div_ceil(f)));
    }
    let latent_plan = TilePlan {
        tile_len: encode_plan.tile_len.div_ceil(f),
        overlap: encode_plan.overlap / f,
        spans: latent_spans,
    };
    let z = blend_stitch(&latent_tiles, &latent_plan)?;

    let lz = z.frames();
    if decode_plan.frames() != lz {
        return Err(Error::invalid(format!(
            "decode plan covers {} latent frames, latent has {lz}",
            decode_plan.frames()
        )));
    }
    let mut decoded = Vec::with_capacity(decode_plan.spans.len());
    for &(s, e) in &decode_plan.spans {
        let y = codec.decode(&z.slice_frames(s, e)?)?;
        if y.frames() != f * (e - s) {
            return Err(Error::ShapeMismatch {
                expected: vec![f * (e - s)],
                found: y.shape().to_vec(),
            });
        }
        decoded.push(y);
    }
    let y = blend_stitch(&decoded, &decode_plan.scaled(f, f * lz))?;
    y.slice_frames(0, t)
}
