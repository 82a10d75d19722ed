use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;

use thiserror::Error;

use crate::color::Rgb;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("malformed PPM: {0}")]
    Ppm(&'static str),
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
    #[error("unknown image format '{0}' (expected png or ppm)")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    #[default]
    Png,
    Ppm,
}

impl ImageFormat {
    /// Guesses from the file extension; anything but `.ppm` is PNG.
    pub fn from_path(path: &Path) -> ImageFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ppm") => ImageFormat::Ppm,
            _ => ImageFormat::Png,
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ImageFormat::Png => "image/png",
            ImageFormat::Ppm => "image/x-portable-pixmap",
        }
    }
}

impl std::str::FromStr for ImageFormat {
    type Err = ImageError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(ImageFormat::Png),
            "ppm" => Ok(ImageFormat::Ppm),
            _ => Err(ImageError::UnknownFormat(s.to_string())),
        }
    }
}

/// Row-major RGB raster, top row first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Self {
        Self { width, height, pixels: vec![fill; width as usize * height as usize] }
    }

    /// Panics if `pixels.len() != width * height`.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb>) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize, "pixel count must match dimensions");
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        self.pixels[y as usize * self.width as usize + x as usize] = c;
    }

    /// Pixel count per distinct colour.
    pub fn histogram(&self) -> BTreeMap<Rgb, usize> {
        let mut h = BTreeMap::new();
        for &p in &self.pixels {
            *h.entry(p).or_insert(0) += 1;
        }
        h
    }

    pub fn count_not(&self, background: Rgb) -> usize {
        self.pixels.iter().filter(|&&p| p != background).count()
    }

    pub fn flipped_horizontally(&self) -> Image {
        let mut out = self.clone();
        for row in out.pixels.chunks_mut(self.width.max(1) as usize) {
            row.reverse();
        }
        out
    }

    /// Nearest-neighbour resampling; never introduces new colours.
    pub fn resized_nearest(&self, width: u32, height: u32) -> Image {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            let sy = ((y as u64 * 2 + 1) * self.height as u64 / (height as u64 * 2)) as u32;
            for x in 0..width {
                let sx = ((x as u64 * 2 + 1) * self.width as u64 / (width as u64 * 2)) as u32;
                pixels.push(self.get(sx.min(self.width - 1), sy.min(self.height - 1)));
            }
        }
        Image { width, height, pixels }
    }

    /// Copies `src` with its top-left corner at `(x, y)`, clipping at the edges.
    pub fn blit(&mut self, src: &Image, x: i64, y: i64) {
        for sy in 0..src.height as i64 {
            let ty = y + sy;
            if ty < 0 || ty >= self.height as i64 {
                continue;
            }
            for sx in 0..src.width as i64 {
                let tx = x + sx;
                if tx < 0 || tx >= self.width as i64 {
                    continue;
                }
                self.set(tx as u32, ty as u32, src.get(sx as u32, sy as u32));
            }
        }
    }

    /// Binary PPM (`P6`, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.pixels.len() * 3);
        out.extend_from_slice(header.as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(&p.0);
        }
        out
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Image, ImageError> {
        let mut pos = 0;
        let mut fields = [0u32; 3];
        let magic = next_token(bytes, &mut pos).ok_or(ImageError::Ppm("missing magic"))?;
        if magic != b"P6" {
            return Err(ImageError::Ppm("not a P6 file"));
        }
        for f in &mut fields {
            let tok = next_token(bytes, &mut pos).ok_or(ImageError::Ppm("truncated header"))?;
            *f = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or(ImageError::Ppm("bad header number"))?;
        }
        let [width, height, maxval] = fields;
        if maxval != 255 {
            return Err(ImageError::Ppm("only maxval 255 is supported"));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let n = width as usize * height as usize;
        let raster = bytes.get(pos..pos + n * 3).ok_or(ImageError::Ppm("truncated raster"))?;
        let pixels = raster.chunks_exact(3).map(|c| Rgb([c[0], c[1], c[2]])).collect();
        Ok(Image { width, height, pixels })
    }

    pub fn to_png(&self) -> Result<Vec<u8>, ImageError> {
        let raw: Vec<u8> = self.pixels.iter().flat_map(|p| p.0).collect();
        let buf = image::RgbImage::from_raw(self.width, self.height, raw).expect("buffer size matches");
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn from_png(bytes: &[u8]) -> Result<Image, ImageError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
        let (width, height) = img.dimensions();
        let pixels = img.pixels().map(|p| Rgb(p.0)).collect();
        Ok(Image { width, height, pixels })
    }

    pub fn encode(&self, format: ImageFormat) -> Result<Vec<u8>, ImageError> {
        match format {
            ImageFormat::Png => self.to_png(),
            ImageFormat::Ppm => Ok(self.to_ppm()),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>, format: ImageFormat) -> Result<(), ImageError> {
        let bytes = self.encode(format)?;
        std::fs::write(path, bytes)?;
        Ok(())
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Image {
        let mut img = Image::new(3, 2, Rgb::WHITE);
        img.set(0, 0, Rgb::new(255, 0, 0));
        img.set(2, 1, Rgb::new(0, 0, 255));
        img
    }

    #[test]
    fn ppm_layout() {
        let img = Image::new(1, 1, Rgb::new(1, 2, 3));
        let bytes = img.to_ppm();
        assert_eq!(bytes, b"P6\n1 1\n255\n\x01\x02\x03");
        assert_eq!(bytes.len() - b"P6\n1 1\n255\n".len(), 3);
    }

    #[test]
    fn ppm_and_png_round_trip() {
        let img = sample();
        assert_eq!(Image::from_ppm(&img.to_ppm()).unwrap(), img);
        assert_eq!(Image::from_png(&img.to_png().unwrap()).unwrap(), img);
        assert!(Image::from_ppm(b"P3\n1 1\n255\n").is_err());
        assert!(Image::from_ppm(b"P6\n2 2\n255\n\x00").is_err());
    }

    #[test]
    fn write_to_bad_path_fails() {
        let err = sample().write("/nonexistent-dir/x/y.ppm", ImageFormat::Ppm);
        assert!(matches!(err, Err(ImageError::Io(_))));
    }

    #[test]
    fn flips_and_resizes() {
        let img = sample();
        let f = img.flipped_horizontally();
        assert_eq!(f.get(2, 0), Rgb::new(255, 0, 0));
        assert_eq!(f.flipped_horizontally(), img);
        let big = img.resized_nearest(6, 4);
        assert_eq!(big.get(0, 0), Rgb::new(255, 0, 0));
        assert_eq!(big.get(1, 1), Rgb::new(255, 0, 0));
        assert_eq!(big.get(5, 3), Rgb::new(0, 0, 255));
        assert_eq!(img.resized_nearest(3, 2), img);
        assert!(big.histogram().keys().all(|c| img.histogram().contains_key(c)));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(ImageFormat::from_path(Path::new("a.PPM")), ImageFormat::Ppm);
        assert_eq!(ImageFormat::from_path(Path::new("a.png")), ImageFormat::Png);
        assert_eq!(ImageFormat::from_path(Path::new("a")), ImageFormat::Png);
    }
}
