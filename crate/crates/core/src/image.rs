//! Raster buffers, binary PNM / PNG codecs, and conversion of a raster into
//! per-pixel feature vectors.

use std::fmt;
use std::io::Cursor;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::som::{SampleSet, SomError};

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("malformed header at byte {offset}: {msg}")]
    Header { offset: usize, msg: String },
    #[error("truncated payload at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated { offset: usize, expected: usize, found: usize },
    #[error("unsupported variant at byte {offset}: {msg}")]
    Unsupported { offset: usize, msg: String },
    #[error("cannot encode {channels}-channel {bit_depth}-bit image as {format}")]
    Unrepresentable { channels: u8, bit_depth: u8, format: ImageFormat },
    #[error("invalid image: {0}")]
    Invalid(String),
    #[error("png: {0}")]
    Png(String),
    #[error(transparent)]
    Samples(#[from] SomError),
}

pub type Result<T> = std::result::Result<T, ImageError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Ppm,
    Png,
}

impl ImageFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(ImageFormat::Pgm),
            "ppm" => Some(ImageFormat::Ppm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }

    /// Sniffs the format from the leading magic bytes.
    pub fn sniff(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(b"P5") {
            Some(ImageFormat::Pgm)
        } else if bytes.starts_with(b"P6") {
            Some(ImageFormat::Ppm)
        } else if bytes.starts_with(b"\x89PNG") {
            Some(ImageFormat::Png)
        } else {
            None
        }
    }
}

impl fmt::Display for ImageFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Ppm => "ppm",
            ImageFormat::Png => "png",
        })
    }
}

/// Decoded raster, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: u8,
    bit_depth: u8,
    pixels: Vec<u16>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: u8, bit_depth: u8, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(ImageError::Invalid("width and height must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::Invalid(format!("channels must be 1 or 3, got {channels}")));
        }
        if bit_depth != 8 && bit_depth != 16 {
            return Err(ImageError::Invalid(format!("bit depth must be 8 or 16, got {bit_depth}")));
        }
        let expected = width * height * channels as usize;
        if pixels.len() != expected {
            return Err(ImageError::Invalid(format!(
                "expected {expected} intensities, got {}",
                pixels.len()
            )));
        }
        let max = max_value(bit_depth);
        if let Some(i) = pixels.iter().position(|&p| p > max) {
            return Err(ImageError::Invalid(format!("intensity {} at {i} exceeds {max}", pixels[i])));
        }
        Ok(ImageBuffer { width, height, channels, bit_depth, pixels })
    }

    /// Uniform grayscale image.
    pub fn filled(width: usize, height: usize, bit_depth: u8, value: u16) -> Result<Self> {
        Self::new(width, height, 1, bit_depth, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn max_value(&self) -> u16 {
        max_value(self.bit_depth)
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    /// Intensity of channel `c` at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize, c: usize) -> u16 {
        self.pixels[(y * self.width + x) * self.channels as usize + c]
    }

    /// Grayscale-only setter; callers keep values within the bit depth.
    pub(crate) fn set_gray(&mut self, x: usize, y: usize, v: u16) {
        debug_assert_eq!(self.channels, 1);
        debug_assert!(v <= self.max_value());
        self.pixels[y * self.width + x] = v;
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u16] {
        &mut self.pixels
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

fn max_value(bit_depth: u8) -> u16 {
    if bit_depth == 8 {
        255
    } else {
        u16::MAX
    }
}

pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<ImageBuffer> {
    match format {
        ImageFormat::Pgm => decode_pnm(bytes, b"P5", 1),
        ImageFormat::Ppm => decode_pnm(bytes, b"P6", 3),
        ImageFormat::Png => decode_png(bytes),
    }
}

/// Reads a file, choosing the codec from the magic bytes.
pub fn read_image(path: impl AsRef<Path>) -> std::result::Result<ImageBuffer, crate::Error> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path, e))?;
    let format = ImageFormat::sniff(&bytes)
        .or_else(|| ImageFormat::from_path(path))
        .ok_or_else(|| crate::Error::Decode {
            path: path.to_path_buf(),
            source: ImageError::Unsupported { offset: 0, msg: "unrecognized magic".into() },
        })?;
    decode_image(&bytes, format).map_err(|source| crate::Error::Decode { path: path.to_path_buf(), source })
}

pub fn write_image(img: &ImageBuffer, path: impl AsRef<Path>) -> std::result::Result<(), crate::Error> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path).unwrap_or(if img.channels == 3 {
        ImageFormat::Ppm
    } else {
        ImageFormat::Pgm
    });
    let bytes = encode_image(img, format)?;
    std::fs::write(path, bytes).map_err(|e| crate::Error::io(path, e))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    // start offset of the most recent token
    last: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        self.last = start;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::Header { offset: start, msg: format!("expected {what}") });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Header { offset: start, msg: format!("{what} out of range") })
    }
}

fn decode_pnm(bytes: &[u8], magic: &[u8; 2], channels: u8) -> Result<ImageBuffer> {
    if !bytes.starts_with(magic) {
        if bytes.len() >= 2 && bytes[0] == b'P' {
            return Err(ImageError::Unsupported {
                offset: 0,
                msg: format!(
                    "magic `{}` (only binary {} is supported)",
                    String::from_utf8_lossy(&bytes[..2]),
                    String::from_utf8_lossy(magic)
                ),
            });
        }
        return Err(ImageError::Header {
            offset: 0,
            msg: format!("expected magic `{}`", String::from_utf8_lossy(magic)),
        });
    }
    let mut cur = HeaderCursor { bytes, pos: 2, last: 0 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    let maxval_at = cur.last;
    if width == 0 || height == 0 {
        return Err(ImageError::Header { offset: maxval_at, msg: "zero image dimension".into() });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(ImageError::Unsupported { offset: maxval_at, msg: format!("maxval {maxval}") });
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(ImageError::Header {
                offset: cur.pos,
                msg: "expected single whitespace before payload".into(),
            })
        }
    }
    let wide = maxval > 255;
    let bit_depth = if wide { 16 } else { 8 };
    let count = width * height * channels as usize;
    let expected = count * if wide { 2 } else { 1 };
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(ImageError::Truncated { offset: cur.pos, expected, found: payload.len() });
    }
    let pixels: Vec<u16> = if wide {
        payload[..expected].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        payload[..expected].iter().map(|&b| b as u16).collect()
    };
    if let Some(i) = pixels.iter().position(|&p| p as usize > maxval) {
        let stride = if wide { 2 } else { 1 };
        return Err(ImageError::Header {
            offset: cur.pos + i * stride,
            msg: format!("sample {} exceeds maxval {maxval}", pixels[i]),
        });
    }
    ImageBuffer::new(width, height, channels, bit_depth, pixels)
}

fn decode_png(bytes: &[u8]) -> Result<ImageBuffer> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| ImageError::Png(e.to_string()))?;
    let info = reader.info();
    let (color, depth) = (info.color_type, info.bit_depth);
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(ImageError::Unsupported { offset: 0, msg: format!("png color type {other:?}") })
        }
    };
    let bit_depth = match depth {
        png::BitDepth::Eight => 8,
        png::BitDepth::Sixteen => 16,
        other => {
            return Err(ImageError::Unsupported { offset: 0, msg: format!("png bit depth {other:?}") })
        }
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| ImageError::Png(e.to_string()))?;
    let data = &buf[..frame.buffer_size()];
    let pixels = if bit_depth == 16 {
        data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        data.iter().map(|&b| b as u16).collect()
    };
    ImageBuffer::new(frame.width as usize, frame.height as usize, channels, bit_depth, pixels)
}

/// Canonical encoding: `P5`/`P6`, single spaces and newlines in the header,
/// maxval 255 or 65535, big-endian 16-bit samples.
pub fn encode_image(img: &ImageBuffer, format: ImageFormat) -> Result<Vec<u8>> {
    let unrepresentable = || ImageError::Unrepresentable { channels: img.channels, bit_depth: img.bit_depth, format };
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => {
            let (magic, channels) = if format == ImageFormat::Pgm { ("P5", 1) } else { ("P6", 3) };
            if img.channels != channels {
                return Err(unrepresentable());
            }
            let mut out = format!("{magic}\n{} {}\n{}\n", img.width, img.height, img.max_value()).into_bytes();
            if img.bit_depth == 16 {
                for p in &img.pixels {
                    out.extend_from_slice(&p.to_be_bytes());
                }
            } else {
                out.extend(img.pixels.iter().map(|&p| p as u8));
            }
            Ok(out)
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            {
                let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
                enc.set_color(if img.channels == 3 { png::ColorType::Rgb } else { png::ColorType::Grayscale });
                enc.set_depth(if img.bit_depth == 16 { png::BitDepth::Sixteen } else { png::BitDepth::Eight });
                let mut writer = enc.write_header().map_err(|e| ImageError::Png(e.to_string()))?;
                let data: Vec<u8> = if img.bit_depth == 16 {
                    img.pixels.iter().flat_map(|p| p.to_be_bytes()).collect()
                } else {
                    img.pixels.iter().map(|&p| p as u8).collect()
                };
                writer.write_image_data(&data).map_err(|e| ImageError::Png(e.to_string()))?;
                writer.finish().map_err(|e| ImageError::Png(e.to_string()))?;
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalize {
    #[default]
    None,
    /// Divide by `2^bit_depth - 1`.
    UnitRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureKind {
    /// The pixel's channel values.
    #[default]
    Pixel,
    /// The `side × side` neighborhood centered on the pixel, clamped at the
    /// borders, row-major with channels interleaved.
    Patch { side: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureMode {
    pub kind: FeatureKind,
    pub normalize: Normalize,
}

impl FeatureMode {
    pub fn pixel() -> Self {
        FeatureMode::default()
    }

    pub fn patch(side: usize) -> Result<Self> {
        if side == 0 || side.is_multiple_of(2) {
            return Err(ImageError::Invalid(format!("patch side must be odd and positive, got {side}")));
        }
        Ok(FeatureMode { kind: FeatureKind::Patch { side }, normalize: Normalize::None })
    }

    pub fn normalized(mut self, normalize: Normalize) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn dim(&self, channels: u8) -> usize {
        match self.kind {
            FeatureKind::Pixel => channels as usize,
            FeatureKind::Patch { side } => channels as usize * side * side,
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FeatureKind::Pixel => f.write_str("pixel")?,
            FeatureKind::Patch { side } => write!(f, "patch:{side}")?,
        }
        if self.normalize == Normalize::UnitRange {
            f.write_str("+unit_range")?;
        }
        Ok(())
    }
}

/// Parses `pixel`, `patch:K`, optionally suffixed with `+unit_range`.
impl FromStr for FeatureMode {
    type Err = ImageError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, normalize) = match s.strip_suffix("+unit_range") {
            Some(k) => (k, Normalize::UnitRange),
            None => (s, Normalize::None),
        };
        let mode = if kind == "pixel" {
            FeatureMode::pixel()
        } else if let Some(k) = kind.strip_prefix("patch:") {
            let side = k
                .parse()
                .map_err(|_| ImageError::Invalid(format!("bad patch side `{k}`")))?;
            FeatureMode::patch(side)?
        } else {
            return Err(ImageError::Invalid(format!("unknown feature mode `{s}`")));
        };
        Ok(mode.normalized(normalize))
    }
}

/// One feature vector per pixel, in row-major pixel order.
pub fn extract_samples(img: &ImageBuffer, mode: FeatureMode) -> Result<SampleSet> {
    if let FeatureKind::Patch { side } = mode.kind {
        if side == 0 || side % 2 == 0 {
            return Err(ImageError::Invalid(format!("patch side must be odd and positive, got {side}")));
        }
    }
    let scale = match mode.normalize {
        Normalize::None => 1.0,
        Normalize::UnitRange => 1.0 / img.max_value() as f64,
    };
    let ch = img.channels as usize;
    let dim = mode.dim(img.channels);
    let mut data = Vec::with_capacity(img.width * img.height * dim);
    match mode.kind {
        FeatureKind::Pixel => data.extend(img.pixels.iter().map(|&p| p as f64 * scale)),
        FeatureKind::Patch { side } => {
            let half = (side / 2) as isize;
            let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
            for y in 0..img.height as isize {
                for x in 0..img.width as isize {
                    for dy in -half..=half {
                        let yy = clamp(y + dy, img.height);
                        for dx in -half..=half {
                            let xx = clamp(x + dx, img.width);
                            for c in 0..ch {
                                data.push(img.get(xx, yy, c) as f64 * scale);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(SampleSet::from_flat(dim, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_p5_8bit() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend([0, 64, 128, 255]);
        let img = decode_image(&bytes, ImageFormat::Pgm).unwrap();
        assert_eq!((img.width(), img.height(), img.channels(), img.bit_depth()), (2, 2, 1, 8));
        assert_eq!(img.pixels(), &[0, 64, 128, 255]);
    }

    #[test]
    fn decodes_p5_16bit_big_endian() {
        let mut bytes = b"P5\n2 2\n65535\n".to_vec();
        bytes.extend([0x01, 0x02, 0x00, 0xff, 0xff, 0xff, 0x80, 0x00]);
        let img = decode_image(&bytes, ImageFormat::Pgm).unwrap();
        assert_eq!(img.bit_depth(), 16);
        assert_eq!(img.pixels(), &[0x0102, 0x00ff, 0xffff, 0x8000]);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n1 1\n255\n".to_vec();
        bytes.push(7);
        assert_eq!(decode_image(&bytes, ImageFormat::Pgm).unwrap().pixels(), &[7]);
    }

    #[test]
    fn encodes_canonical_pgm() {
        let img = ImageBuffer::new(1, 1, 1, 8, vec![0]).unwrap();
        let bytes = encode_image(&img, ImageFormat::Pgm).unwrap();
        assert_eq!(bytes, b"P5\n1 1\n255\n\0");
        assert_eq!(bytes, encode_image(&img, ImageFormat::Pgm).unwrap());
    }

    #[test]
    fn ppm_round_trip() {
        let img = ImageBuffer::new(2, 1, 3, 8, vec![1, 2, 3, 250, 251, 252]).unwrap();
        let bytes = encode_image(&img, ImageFormat::Ppm).unwrap();
        assert!(bytes.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(decode_image(&bytes, ImageFormat::Ppm).unwrap(), img);
    }

    #[test]
    fn png_round_trip_gray_and_rgb() {
        let gray = ImageBuffer::new(3, 2, 1, 8, vec![0, 10, 20, 30, 40, 255]).unwrap();
        let bytes = encode_image(&gray, ImageFormat::Png).unwrap();
        assert_eq!(ImageFormat::sniff(&bytes), Some(ImageFormat::Png));
        assert_eq!(decode_image(&bytes, ImageFormat::Png).unwrap(), gray);
        let rgb = ImageBuffer::new(1, 2, 3, 16, vec![0, 1, 2, 60000, 3, 65535]).unwrap();
        let bytes = encode_image(&rgb, ImageFormat::Png).unwrap();
        assert_eq!(decode_image(&bytes, ImageFormat::Png).unwrap(), rgb);
    }

    #[test]
    fn malformed_inputs_report_offsets() {
        match decode_image(b"P5 2 2 255\n\x01\x02", ImageFormat::Pgm) {
            Err(ImageError::Truncated { offset, expected, found }) => {
                assert_eq!((offset, expected, found), (11, 4, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        match decode_image(b"P5 2 x 255\n", ImageFormat::Pgm) {
            Err(ImageError::Header { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            decode_image(b"P2 1 1 255\n0", ImageFormat::Pgm),
            Err(ImageError::Unsupported { offset: 0, .. })
        ));
        assert!(matches!(
            decode_image(b"P5 1 1 70000\n\0\0", ImageFormat::Pgm),
            Err(ImageError::Unsupported { offset: 7, .. })
        ));
        assert!(matches!(
            decode_image(b"P5 1 1 100\n\xff", ImageFormat::Pgm),
            Err(ImageError::Header { offset: 11, .. })
        ));
    }

    #[test]
    fn encoder_rejects_channel_mismatch() {
        let rgb = ImageBuffer::new(1, 1, 3, 8, vec![1, 2, 3]).unwrap();
        assert!(matches!(encode_image(&rgb, ImageFormat::Pgm), Err(ImageError::Unrepresentable { .. })));
    }

    #[test]
    fn buffer_invariants_enforced() {
        assert!(ImageBuffer::new(2, 2, 1, 8, vec![0; 3]).is_err());
        assert!(ImageBuffer::new(1, 1, 1, 8, vec![256]).is_err());
        assert!(ImageBuffer::new(1, 1, 2, 8, vec![0, 0]).is_err());
        assert!(ImageBuffer::new(1, 1, 1, 12, vec![0]).is_err());
    }

    #[test]
    fn pixel_samples() {
        let img = ImageBuffer::new(2, 2, 1, 8, vec![0, 64, 128, 255]).unwrap();
        let s = extract_samples(&img, FeatureMode::pixel()).unwrap();
        assert_eq!((s.len(), s.dim()), (4, 1));
        assert_eq!(s.as_flat(), &[0.0, 64.0, 128.0, 255.0]);

        let s = extract_samples(&img, FeatureMode::pixel().normalized(Normalize::UnitRange)).unwrap();
        let expect = [0.0, 0.2510, 0.5020, 1.0];
        for (got, want) in s.as_flat().iter().zip(expect) {
            assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        }
    }

    #[test]
    fn patch_center_is_whole_image() {
        let px: Vec<u16> = (1..=9).collect();
        let img = ImageBuffer::new(3, 3, 1, 8, px).unwrap();
        let s = extract_samples(&img, FeatureMode::patch(3).unwrap()).unwrap();
        assert_eq!((s.len(), s.dim()), (9, 9));
        assert_eq!(s.get(4), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        // top-left corner clamps to the edge
        assert_eq!(s.get(0), &[1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 4.0, 4.0, 5.0]);
    }

    #[test]
    fn feature_mode_parsing() {
        assert_eq!("pixel".parse::<FeatureMode>().unwrap(), FeatureMode::pixel());
        assert_eq!("patch:5".parse::<FeatureMode>().unwrap(), FeatureMode::patch(5).unwrap());
        let m: FeatureMode = "patch:3+unit_range".parse().unwrap();
        assert_eq!(m.normalize, Normalize::UnitRange);
        assert_eq!(m.to_string(), "patch:3+unit_range");
        assert!("patch:4".parse::<FeatureMode>().is_err());
        assert!("blob".parse::<FeatureMode>().is_err());
    }
}
