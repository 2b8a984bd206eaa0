//! Synthetic manipulations: elliptical lesions, per-pixel Poisson noise,
//! random-dot fields with one scalable target dot, and a simple phantom
//! generator used as the base corpus for lesion experiments.

use std::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::image::{ImageBuffer, ImageError};
use crate::rng::{self, SomRng};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("lesion bounding box {x0}..={x1} x {y0}..={y1} does not fit a {width}x{height} image")]
    OutOfBounds { x0: i64, x1: i64, y0: i64, y1: i64, width: usize, height: usize },
    #[error("operation requires a grayscale image, got {0} channels")]
    NotGrayscale(u8),
    #[error("dot placement gave up after {attempts} attempts with {placed} of {requested} dots placed")]
    PlacementExhausted { placed: usize, requested: usize, attempts: usize },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LesionPattern {
    /// 2-pixel checkerboard alternating the two gray levels.
    #[default]
    Checker2,
    /// First gray level only.
    Solid,
}

/// An axis-aligned filled ellipse. The defaults give a 44×26 bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct LesionSpec {
    pub center: (usize, usize),
    pub semi_axis_a: u32,
    pub semi_axis_b: u32,
    pub pattern: LesionPattern,
    pub gray_levels: (u16, u16),
}

impl LesionSpec {
    pub fn at(cx: usize, cy: usize) -> Self {
        LesionSpec {
            center: (cx, cy),
            semi_axis_a: 22,
            semi_axis_b: 13,
            pattern: LesionPattern::Checker2,
            gray_levels: (96, 160),
        }
    }

    /// Lattice membership test `((x-cx)/a)² + ((y-cy)/b)² <= 1`, evaluated in
    /// integers.
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let (a, b) = (self.semi_axis_a as i64, self.semi_axis_b as i64);
        let dx = x as i64 - self.center.0 as i64;
        let dy = y as i64 - self.center.1 as i64;
        dx * dx * b * b + dy * dy * a * a <= a * a * b * b
    }

    fn level_at(&self, x: usize, y: usize) -> u16 {
        match self.pattern {
            LesionPattern::Solid => self.gray_levels.0,
            LesionPattern::Checker2 => {
                if (x / 2 + y / 2).is_multiple_of(2) {
                    self.gray_levels.0
                } else {
                    self.gray_levels.1
                }
            }
        }
    }

    pub fn manifest(&self) -> String {
        format!(
            "kind=lesion\ncenter_x={}\ncenter_y={}\nsemi_axis_a={}\nsemi_axis_b={}\npattern={}\ngray_level_0={}\ngray_level_1={}\n",
            self.center.0,
            self.center.1,
            self.semi_axis_a,
            self.semi_axis_b,
            match self.pattern {
                LesionPattern::Checker2 => "checker2",
                LesionPattern::Solid => "solid",
            },
            self.gray_levels.0,
            self.gray_levels.1
        )
    }
}

/// Overwrites the ellipse interior with the lesion pattern. Pixels outside
/// are left untouched.
pub fn inject_lesion(img: &ImageBuffer, spec: &LesionSpec) -> Result<ImageBuffer> {
    if img.channels() != 1 {
        return Err(SynthError::NotGrayscale(img.channels()));
    }
    if spec.semi_axis_a == 0 || spec.semi_axis_b == 0 {
        return Err(SynthError::InvalidSpec("semi-axes must be positive".into()));
    }
    let max = img.max_value();
    if spec.gray_levels.0 > max || spec.gray_levels.1 > max {
        return Err(SynthError::InvalidSpec(format!("gray levels exceed {max}")));
    }
    let (cx, cy) = (spec.center.0 as i64, spec.center.1 as i64);
    let (a, b) = (spec.semi_axis_a as i64, spec.semi_axis_b as i64);
    let (x0, x1, y0, y1) = (cx - a, cx + a, cy - b, cy + b);
    if x0 < 0 || y0 < 0 || x1 >= img.width() as i64 || y1 >= img.height() as i64 {
        return Err(SynthError::OutOfBounds { x0, x1, y0, y1, width: img.width(), height: img.height() });
    }
    let mut out = img.clone();
    for y in y0 as usize..=y1 as usize {
        for x in x0 as usize..=x1 as usize {
            if spec.contains(x, y) {
                out.set_gray(x, y, spec.level_at(x, y));
            }
        }
    }
    Ok(out)
}

const KNUTH_LIMIT: f64 = 30.0;

/// One Poisson draw: Knuth's product method below λ = 30, otherwise a
/// rounded normal approximation clamped at zero.
pub fn poisson_sample(rng: &mut SomRng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda < KNUTH_LIMIT {
        let limit = (-lambda).exp();
        let mut k = 0;
        let mut p = rng::unit(rng);
        while p > limit {
            k += 1;
            p *= rng::unit(rng);
        }
        k
    } else {
        let z: f64 = StandardNormal.sample(rng);
        (lambda + lambda.sqrt() * z).round().max(0.0) as u64
    }
}

/// Replaces every intensity with a Poisson draw of that mean, clamped to the
/// bit depth. Pixels are visited in storage order.
pub fn add_poisson_noise(img: &ImageBuffer, seed: u64) -> ImageBuffer {
    let mut rng = rng::seeded(seed);
    let max = img.max_value() as u64;
    let mut out = img.clone();
    for p in out.pixels_mut() {
        *p = poisson_sample(&mut rng, *p as f64).min(max) as u16;
    }
    out
}

/// Random-dot stimulus: dark discs on a light background, one of which (the
/// target) can be enlarged.
#[derive(Debug, Clone, PartialEq)]
pub struct DotFieldSpec {
    pub width: usize,
    pub height: usize,
    pub n_dots: usize,
    pub base_radius: f64,
    pub background: u16,
    pub michelson: f64,
    pub target_index: usize,
    pub scale: f64,
    /// Largest target scale the layout reserves room for. Placement depends
    /// only on this, never on `scale`.
    pub reserve_scale: f64,
    /// Sub-samples per pixel side for edge coverage; 1 renders hard edges.
    pub supersample: usize,
}

impl Default for DotFieldSpec {
    fn default() -> Self {
        DotFieldSpec {
            width: 512,
            height: 512,
            n_dots: 50,
            base_radius: 5.0,
            background: 255,
            michelson: 0.7,
            target_index: 0,
            scale: 1.0,
            reserve_scale: 1.30,
            supersample: 8,
        }
    }
}

impl DotFieldSpec {
    pub fn with_scale(&self, scale: f64) -> Self {
        DotFieldSpec { scale, ..self.clone() }
    }

    /// Dot intensity `d` solving `(background - d) / (background + d) = michelson`.
    pub fn dot_intensity(&self) -> u16 {
        dot_intensity(self.background, self.michelson)
    }

    pub fn manifest(&self, seed: u64) -> String {
        let mut s = String::from("kind=dots\n");
        let _ = write!(
            s,
            "width={}\nheight={}\nn_dots={}\nbase_radius={:?}\nbackground={}\nmichelson={:?}\ntarget_index={}\nscale={:?}\nreserve_scale={:?}\nsupersample={}\nseed={}\n",
            self.width,
            self.height,
            self.n_dots,
            self.base_radius,
            self.background,
            self.michelson,
            self.target_index,
            self.scale,
            self.reserve_scale,
            self.supersample,
            seed
        );
        s
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.width == 0 || self.height == 0 || self.n_dots == 0 {
            return bad("width, height and n_dots must be positive");
        }
        if self.base_radius.is_nan() || self.base_radius <= 0.0 {
            return bad("base_radius must be positive");
        }
        if !(self.michelson > 0.0 && self.michelson < 1.0) {
            return bad("michelson contrast must lie in (0, 1)");
        }
        if self.target_index >= self.n_dots {
            return bad("target_index out of range");
        }
        if !(self.scale >= 1.0 && self.scale <= self.reserve_scale) {
            return bad("scale must lie in [1, reserve_scale]");
        }
        if self.supersample == 0 {
            return bad("supersample must be at least 1");
        }
        if self.background > 255 {
            return bad("background must fit in 8 bits");
        }
        Ok(())
    }
}

pub fn dot_intensity(background: u16, michelson: f64) -> u16 {
    (background as f64 * (1.0 - michelson) / (1.0 + michelson)).round() as u16
}

/// Placed dot: integer center and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dot {
    pub cx: usize,
    pub cy: usize,
    pub radius: f64,
}

impl Dot {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let dx = x as f64 - self.cx as f64;
        let dy = y as f64 - self.cy as f64;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    /// Fraction of the pixel square covered by the disc, estimated on an
    /// `n × n` grid of sub-sample centers. `n = 1` tests the pixel center.
    pub fn coverage(&self, x: usize, y: usize, n: usize) -> f64 {
        if n == 1 {
            return if self.contains(x, y) { 1.0 } else { 0.0 };
        }
        let r2 = self.radius * self.radius;
        let mut hits = 0;
        for sy in 0..n {
            let dy = y as f64 - 0.5 + (sy as f64 + 0.5) / n as f64 - self.cy as f64;
            for sx in 0..n {
                let dx = x as f64 - 0.5 + (sx as f64 + 0.5) / n as f64 - self.cx as f64;
                if dx * dx + dy * dy <= r2 {
                    hits += 1;
                }
            }
        }
        hits as f64 / (n * n) as f64
    }
}

const PLACEMENT_ATTEMPTS_PER_DOT: usize = 10_000;

/// Dot layout for a seed. Every dot reserves room for
/// `base_radius * reserve_scale` plus a one-pixel gap, so enlarging the
/// target never touches another dot or the border.
pub fn layout_dots(spec: &DotFieldSpec, seed: u64) -> Result<Vec<Dot>> {
    spec.validate()?;
    let mut rng = rng::seeded(seed);
    let reserve = spec.base_radius * spec.reserve_scale;
    let margin = reserve.ceil() as usize + 2;
    if 2 * margin >= spec.width || 2 * margin >= spec.height {
        return Err(SynthError::InvalidSpec("image too small for dot radius".into()));
    }
    let span_x = spec.width - 2 * margin;
    let span_y = spec.height - 2 * margin;
    let min_sep = 2.0 * reserve + 2.0;
    let mut centers: Vec<(usize, usize)> = Vec::with_capacity(spec.n_dots);
    let budget = PLACEMENT_ATTEMPTS_PER_DOT * spec.n_dots;
    let mut attempts = 0;
    while centers.len() < spec.n_dots {
        if attempts == budget {
            return Err(SynthError::PlacementExhausted { placed: centers.len(), requested: spec.n_dots, attempts });
        }
        attempts += 1;
        let cx = margin + rng::index(&mut rng, span_x);
        let cy = margin + rng::index(&mut rng, span_y);
        let clear = centers.iter().all(|&(x, y)| {
            let dx = x as f64 - cx as f64;
            let dy = y as f64 - cy as f64;
            (dx * dx + dy * dy).sqrt() >= min_sep
        });
        if clear {
            centers.push((cx, cy));
        }
    }
    Ok(centers
        .into_iter()
        .enumerate()
        .map(|(i, (cx, cy))| {
            let radius = if i == spec.target_index { spec.base_radius * spec.scale } else { spec.base_radius };
            Dot { cx, cy, radius }
        })
        .collect())
}

/// Renders an 8-bit grayscale dot field. Fully covered pixels take the dot
/// intensity; partially covered edge pixels blend linearly with the
/// background.
pub fn generate_dot_field(spec: &DotFieldSpec, seed: u64) -> Result<ImageBuffer> {
    let dots = layout_dots(spec, seed)?;
    let ink = spec.dot_intensity() as f64;
    let bg = spec.background as f64;
    let mut img = ImageBuffer::filled(spec.width, spec.height, 8, spec.background)?;
    for dot in &dots {
        let r = dot.radius.ceil() as usize + 1;
        for y in dot.cy - r..=dot.cy + r {
            for x in dot.cx - r..=dot.cx + r {
                let c = dot.coverage(x, y, spec.supersample);
                if c > 0.0 {
                    img.set_gray(x, y, (bg + (ink - bg) * c).round() as u16);
                }
            }
        }
    }
    Ok(img)
}

/// Base images for lesion experiments: a dark field holding a bright
/// elliptical "tissue" region with a vertical shading ramp, a few darker
/// inclusions, and uniform texture noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub background: u16,
    pub tissue: u16,
    pub inclusion: u16,
    pub n_inclusions: usize,
    pub shading: f64,
    pub texture: u16,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            width: 128,
            height: 128,
            background: 20,
            tissue: 200,
            inclusion: 235,
            n_inclusions: 4,
            shading: 12.0,
            texture: 6,
        }
    }
}

impl PhantomSpec {
    pub fn manifest(&self, seed: u64) -> String {
        format!(
            "kind=phantom\nwidth={}\nheight={}\nbackground={}\ntissue={}\ninclusion={}\nn_inclusions={}\nshading={:?}\ntexture={}\nseed={}\n",
            self.width, self.height, self.background, self.tissue, self.inclusion, self.n_inclusions, self.shading, self.texture, seed
        )
    }
}

pub fn generate_phantom(spec: &PhantomSpec, seed: u64) -> Result<ImageBuffer> {
    if spec.width < 16 || spec.height < 16 {
        return Err(SynthError::InvalidSpec("phantom needs at least 16x16 pixels".into()));
    }
    let mut rng = rng::seeded(seed);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let jitter = |rng: &mut SomRng, span: f64| (rng::unit(rng) - 0.5) * span;
    let tissue_c = (w / 2.0 + jitter(&mut rng, w * 0.05), h / 2.0 + jitter(&mut rng, h * 0.05));
    let tissue_r = (w * (0.40 + jitter(&mut rng, 0.04)), h * (0.42 + jitter(&mut rng, 0.04)));
    let inclusions: Vec<((f64, f64), (f64, f64))> = (0..spec.n_inclusions)
        .map(|_| {
            let c = (tissue_c.0 + jitter(&mut rng, tissue_r.0), tissue_c.1 + jitter(&mut rng, tissue_r.1));
            let r = (w * (0.05 + 0.05 * rng::unit(&mut rng)), h * (0.05 + 0.05 * rng::unit(&mut rng)));
            (c, r)
        })
        .collect();
    let inside = |x: f64, y: f64, c: (f64, f64), r: (f64, f64)| {
        let dx = (x - c.0) / r.0;
        let dy = (y - c.1) / r.1;
        dx * dx + dy * dy <= 1.0
    };
    let max = 255.0;
    let mut pixels = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let (fx, fy) = (x as f64, y as f64);
            let mut v = if inside(fx, fy, tissue_c, tissue_r) {
                let mut t = spec.tissue as f64 + spec.shading * ((fy / h) - 0.5) * 2.0;
                if inclusions.iter().any(|&(c, r)| inside(fx, fy, c, r)) {
                    t = spec.inclusion as f64;
                }
                t
            } else {
                spec.background as f64
            };
            if spec.texture > 0 {
                let span = 2 * spec.texture as usize + 1;
                v += rng::index(&mut rng, span) as f64 - spec.texture as f64;
            }
            pixels.push(v.round().clamp(0.0, max) as u16);
        }
    }
    Ok(ImageBuffer::new(spec.width, spec.height, 1, 8, pixels)?)
}
