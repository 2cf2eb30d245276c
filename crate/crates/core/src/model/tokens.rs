use crate::error::{Error, Result};
use crate::numerics::{sample_standard_normal, Rng, Tensor};

/// Non-overlapping patch kernel over a `[T, C, H, W]` latent; stride equals
/// the kernel size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchSpec {
    pub k_t: usize,
    pub k_h: usize,
    pub k_w: usize,
}

impl PatchSpec {
    pub fn new(k_t: usize, k_h: usize, k_w: usize) -> Result<Self> {
        if k_t == 0 || k_h == 0 || k_w == 0 {
            return Err(Error::invalid(format!("patch kernel {k_t}x{k_h}x{k_w} must be >= 1")));
        }
        Ok(Self { k_t, k_h, k_w })
    }

    pub fn volume(&self) -> usize {
        self.k_t * self.k_h * self.k_w
    }

    fn check(&self, t: usize, h: usize, w: usize) -> Result<(usize, usize, usize)> {
        if self.k_t == 0 || self.k_h == 0 || self.k_w == 0 {
            return Err(Error::invalid("patch kernel entries must be >= 1"));
        }
        for (name, n, k) in [("T", t, self.k_t), ("H", h, self.k_h), ("W", w, self.k_w)] {
            if n % k != 0 {
                return Err(Error::invalid(format!("{name} = {n} is not divisible by patch size {k}")));
            }
        }
        Ok((t / self.k_t, h / self.k_h, w / self.k_w))
    }
}

impl std::str::FromStr for PatchSpec {
    type Err = Error;

    /// Parses `kt,kh,kw`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::invalid(format!("patch `{s}`: {e}")))?;
        match parts[..] {
            [t, h, w] => PatchSpec::new(t, h, w),
            _ => Err(Error::invalid(format!("patch `{s}` must be kt,kh,kw"))),
        }
    }
}

/// Number of tokens `T·H·W / (k_t·k_h·k_w)` for a latent of extent `T × H × W`.
pub fn token_count(t: usize, h: usize, w: usize, spec: &PatchSpec) -> Result<usize> {
    let (nt, nh, nw) = spec.check(t, h, w)?;
    Ok(nt * nh * nw)
}

fn dims4(x: &Tensor) -> Result<[usize; 4]> {
    match *x.shape() {
        [t, c, h, w] => Ok([t, c, h, w]),
        _ => Err(Error::invalid(format!("expected [T, C, H, W], got {:?}", x.shape()))),
    }
}

/// Index pairs `(latent offset, token offset)` of the patch layout. Tokens are
/// ordered `(t, h, w)` row-major over the patch grid; each token's features
/// are ordered `(c, dt, dh, dw)`.
fn layout(dims: [usize; 4], spec: &PatchSpec) -> Result<Vec<(usize, usize)>> {
    let [t, c, h, w] = dims;
    let (nt, nh, nw) = spec.check(t, h, w)?;
    let feat = c * spec.volume();
    let mut pairs = Vec::with_capacity(t * c * h * w);
    for (tok, (pt, ph, pw)) in (0..nt)
        .flat_map(|a| (0..nh).flat_map(move |b| (0..nw).map(move |d| (a, b, d))))
        .enumerate()
    {
        let mut f = 0;
        for ch in 0..c {
            for dt in 0..spec.k_t {
                for dh in 0..spec.k_h {
                    for dw in 0..spec.k_w {
                        let (ti, hi, wi) = (pt * spec.k_t + dt, ph * spec.k_h + dh, pw * spec.k_w + dw);
                        let src = ((ti * c + ch) * h + hi) * w + wi;
                        pairs.push((src, tok * feat + f));
                        f += 1;
                    }
                }
            }
        }
    }
    Ok(pairs)
}

/// `[T, C, H, W]` → `[tokens, C·k_t·k_h·k_w]`.
pub fn patchify(x: &Tensor, spec: &PatchSpec) -> Result<Tensor> {
    let dims = dims4(x)?;
    let pairs = layout(dims, spec)?;
    let mut out = vec![0.0; x.len()];
    for (src, dst) in pairs {
        out[dst] = x.data()[src];
    }
    let feat = dims[1] * spec.volume();
    let tokens = token_count(dims[0], dims[2], dims[3], spec)?;
    Tensor::new(vec![tokens, feat], out)
}

/// Inverse of [`patchify`] for a latent of shape `dims = [T, C, H, W]`.
pub fn unpatchify(tokens: &Tensor, spec: &PatchSpec, dims: [usize; 4]) -> Result<Tensor> {
    let [t, c, h, w] = dims;
    let expected = vec![token_count(t, h, w, spec)?, c * spec.volume()];
    if tokens.shape() != expected.as_slice() {
        return Err(Error::ShapeMismatch {
            expected,
            found: tokens.shape().to_vec(),
        });
    }
    let mut out = vec![0.0; tokens.len()];
    for (src, dst) in layout(dims, spec)? {
        out[src] = tokens.data()[dst];
    }
    Tensor::new(dims.to_vec(), out)
}

/// Factorized positional embedding: three tables of shape `[max, D]` whose
/// rows are summed per `(t, h, w)` position.
#[derive(Debug, Clone, PartialEq)]
pub struct PosEmbedSpec {
    phi_t: Tensor,
    phi_h: Tensor,
    phi_w: Tensor,
}

impl PosEmbedSpec {
    pub fn new(phi_t: Tensor, phi_h: Tensor, phi_w: Tensor) -> Result<Self> {
        let dim = |x: &Tensor| match x.shape() {
            [_, d] => Ok(*d),
            other => Err(Error::invalid(format!("embedding table must be [max, D], got {other:?}"))),
        };
        let d = dim(&phi_t)?;
        if dim(&phi_h)? != d || dim(&phi_w)? != d {
            return Err(Error::ShapeMismatch {
                expected: vec![d],
                found: vec![dim(&phi_h)?, dim(&phi_w)?],
            });
        }
        Ok(Self { phi_t, phi_h, phi_w })
    }

    pub fn zeros(t_max: usize, h_max: usize, w_max: usize, dim: usize) -> Self {
        Self {
            phi_t: Tensor::zeros(&[t_max, dim]),
            phi_h: Tensor::zeros(&[h_max, dim]),
            phi_w: Tensor::zeros(&[w_max, dim]),
        }
    }

    /// Tables drawn from `N(0, scale²)`.
    pub fn random(t_max: usize, h_max: usize, w_max: usize, dim: usize, scale: f64, rng: &mut Rng) -> Self {
        let mut draw = |n: usize| sample_standard_normal(rng, &[n, dim]).scale(scale);
        let phi_t = draw(t_max);
        let phi_h = draw(h_max);
        let phi_w = draw(w_max);
        Self { phi_t, phi_h, phi_w }
    }

    pub fn dim(&self) -> usize {
        self.phi_t.shape()[1]
    }

    pub fn maxima(&self) -> (usize, usize, usize) {
        (self.phi_t.frames(), self.phi_h.frames(), self.phi_w.frames())
    }
}

/// `φ_t[t] + φ_h[h] + φ_w[w]`.
pub fn pos_embed(t: usize, h: usize, w: usize, spec: &PosEmbedSpec) -> Result<Vec<f64>> {
    for (index, table) in [(t, &spec.phi_t), (h, &spec.phi_h), (w, &spec.phi_w)] {
        if index >= table.frames() {
            return Err(Error::IndexOutOfRange {
                index,
                len: table.frames(),
            });
        }
    }
    Ok(spec
        .phi_t
        .frame(t)
        .iter()
        .zip(spec.phi_h.frame(h))
        .zip(spec.phi_w.frame(w))
        .map(|((a, b), c)| a + b + c)
        .collect())
}
