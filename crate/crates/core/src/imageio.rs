//! Grayscale image files and seeded Gaussian noise.
//!
//! Supported files are binary PGM (`P5`, maxval 255) and 8-bit grayscale
//! PNG. A stored byte `v` maps to the intensity `v / 255`. Writing clamps to
//! `[0, 1]`, scales by 255 and rounds half away from zero.
//!
//! Noise is drawn from ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`).
//! Each normal pair uses two consecutive 64-bit outputs `a, b` through the
//! Box-Muller transform with `u₁ = ((a >> 11) + 1) · 2⁻⁵³ ∈ (0, 1]` and
//! `u₂ = (b >> 11) · 2⁻⁵³ ∈ [0, 1)`, giving `r cos(2πu₂)` then `r sin(2πu₂)`
//! with `r = √(−2 ln u₁)`. Samples fill the image in row-major order.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be nonnegative, got {sigma}"),
            });
        }
        Ok(Self { sigma, seed })
    }
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Stream of standard normal samples, as documented at module level.
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53;
        let u2 = (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53;
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }
}

/// `u + σ g` with `g` i.i.d. standard normal. The result is not clamped.
pub fn add_gaussian_noise(u: &ScalarField, spec: NoiseSpec) -> ScalarField {
    if spec.sigma == 0.0 {
        return u.clone();
    }
    let mut stream = NormalStream::new(spec.seed);
    let data = u.as_slice().iter().map(|&v| v + spec.sigma * stream.next_normal()).collect();
    u.with_data(data)
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn from_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<ScalarField> {
    ScalarField::new(rows, cols, bytes.iter().map(|&b| b as f64 / 255.0).collect())
}

/// Quantizes to the 8-bit grid used by the writers.
pub fn quantize(u: &ScalarField) -> ScalarField {
    u.map(|v| to_byte(v) as f64 / 255.0)
}

/// Reads the next header token of a PNM file, skipping whitespace and
/// `#` comments.
fn pnm_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::Image("truncated PGM header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        *pos += 1;
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn pnm_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = pnm_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| Error::Image(format!("bad PGM {what} `{tok}`")))
}

/// Decodes a binary PGM.
pub fn decode_pgm(bytes: &[u8]) -> Result<ScalarField> {
    let mut pos = 0;
    let magic = pnm_token(bytes, &mut pos)?;
    match magic.as_str() {
        "P5" => {}
        "P2" => return Err(Error::Image("ASCII PGM (P2) is not supported; convert to binary P5".into())),
        "P3" | "P6" => {
            return Err(Error::Image(
                "color PPM input is not supported; convert to grayscale first (e.g. `magick in.ppm -colorspace Gray out.pgm`)"
                    .into(),
            ))
        }
        _ => return Err(Error::Image(format!("not a PGM file (magic `{magic}`)"))),
    }
    let cols = pnm_number(bytes, &mut pos, "width")?;
    let rows = pnm_number(bytes, &mut pos, "height")?;
    let maxval = pnm_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::Image(format!(
            "unsupported PGM maxval {maxval}; only 8-bit images with maxval 255 are read"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::Image("missing whitespace after PGM header".into()));
    }
    pos += 1;
    let need = rows * cols;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(Error::Image(format!("PGM raster has {} bytes, expected {need}", raster.len())));
    }
    from_bytes(rows, cols, &raster[..need])
}

/// Encodes as binary PGM: `P5\n<cols> <rows>\n255\n` then row-major bytes.
pub fn encode_pgm(u: &ScalarField) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", u.cols(), u.rows()).into_bytes();
    out.extend(u.as_slice().iter().map(|&v| to_byte(v)));
    out
}

pub fn decode_png(bytes: &[u8]) -> Result<ScalarField> {
    let err = |e: png::DecodingError| Error::Image(format!("PNG decode: {e}"));
    let mut reader = png::Decoder::new(Cursor::new(bytes)).read_info().map_err(err)?;
    let info = reader.info();
    let (color, depth) = (info.color_type, info.bit_depth);
    if color != png::ColorType::Grayscale {
        return Err(Error::Image(format!(
            "PNG color type {color:?} is not supported; convert to 8-bit grayscale first (e.g. `magick in.png -colorspace Gray -depth 8 out.png`)"
        )));
    }
    if depth != png::BitDepth::Eight {
        return Err(Error::Image(format!("unsupported PNG bit depth {depth:?}; only 8-bit grayscale is read")));
    }
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| Error::Image("PNG too large".into()))?];
    let frame = reader.next_frame(&mut buf).map_err(err)?;
    let (rows, cols) = (frame.height as usize, frame.width as usize);
    from_bytes(rows, cols, &buf[..rows * cols])
}

pub fn encode_png(u: &ScalarField) -> Result<Vec<u8>> {
    let err = |e: png::EncodingError| Error::Image(format!("PNG encode: {e}"));
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, u.cols() as u32, u.rows() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(err)?;
        let bytes: Vec<u8> = u.as_slice().iter().map(|&v| to_byte(v)).collect();
        w.write_image_data(&bytes).map_err(err)?;
    }
    Ok(out)
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Reads a PGM or PNG file, detected from its leading bytes.
pub fn read_image(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(&bytes)
    } else if bytes.first() == Some(&b'P') {
        decode_pgm(&bytes)
    } else {
        Err(Error::Image(format!("{}: neither PGM nor PNG", path.display())))
    }
}

/// Writes a PGM or PNG file chosen by extension (`.pgm` or `.png`).
pub fn write_image(path: impl AsRef<Path>, u: &ScalarField) -> Result<()> {
    let path = path.as_ref();
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let bytes = match ext.as_deref() {
        Some("pgm") => encode_pgm(u),
        Some("png") => encode_png(u)?,
        _ => {
            return Err(Error::Image(format!(
                "{}: output extension must be .pgm or .png",
                path.display()
            )))
        }
    };
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_small_p5() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 255, 128, 64]);
        let u = decode_pgm(&bytes).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn header_comments() {
        let mut bytes = b"P5 # made by hand\n# another\n3 2 # size\n255\n".to_vec();
        bytes.extend([1, 2, 3, 4, 5, 6]);
        let u = decode_pgm(&bytes).unwrap();
        assert_eq!(u.shape(), (2, 3));
        assert_eq!(u.get(1, 0), 4.0 / 255.0);
    }

    #[test]
    fn rejects_sixteen_bit_and_truncation() {
        let mut bytes = b"P5\n2 2\n65535\n".to_vec();
        bytes.extend([0; 8]);
        assert!(matches!(decode_pgm(&bytes), Err(Error::Image(m)) if m.contains("maxval")));
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00\x01").is_err());
        assert!(decode_pgm(b"P6\n2 2\n255\n").is_err());
    }

    #[test]
    fn writer_rounds_and_clamps() {
        let u = ScalarField::new(2, 2, vec![-0.5, 1.5, 0.5, 2.5 / 255.0]).unwrap();
        let bytes = encode_pgm(&u);
        assert_eq!(&bytes[..11], b"P5\n2 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 255, 128, 3]);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let u = ScalarField::from_fn(3, 3, |i, j| (i + 2 * j) as f64 * 0.1).unwrap();
        assert_eq!(add_gaussian_noise(&u, NoiseSpec::new(0.0, 3).unwrap()), u);
        assert!(NoiseSpec::new(-1.0, 0).is_err());
    }
}
