//! Preset catalogue and the image transforms that turn a render into a
//! printable repeat.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::color::Rgb;
use crate::expr::{Expr, ParamBinding};
use crate::render::{Image, Palette, Scene};

/// Largest copy count accepted by [`fibonacci_layout`]; `F₆₄` still fits
/// comfortably in a `u64`.
pub const MAX_FIBONACCI_COPIES: u32 = 64;

#[derive(Debug, Error, PartialEq)]
pub enum MotifError {
    #[error("unknown preset '{name}' (available: {})", available.join(", "))]
    UnknownPreset { name: String, available: Vec<&'static str> },
    #[error("copy count must be between 1 and {MAX_FIBONACCI_COPIES}, got {0}")]
    InvalidCount(u32),
    #[error("grid needs at least one row and one column, got {0}×{1}")]
    InvalidGrid(u32, u32),
    #[error(
        "canvas {width}×{height} is too small for {count} Fibonacci copies (needs at least {min_width}×{min_height})"
    )]
    CanvasTooSmall { width: u32, height: u32, count: u32, min_width: u64, min_height: u64 },
    #[error("palette has no entry for colour {0}")]
    UncoveredColor(Rgb),
    #[error("palette maps both {0} and {1} to {2}")]
    NotInjective(Rgb, Rgb, Rgb),
}

const fn rgb(hex: u32) -> Rgb {
    Rgb::new((hex >> 16) as u8, (hex >> 8) as u8, hex as u8)
}

const fn palette(front: u32, back: u32, background: u32) -> Palette {
    Palette { front: rgb(front), back: rgb(back), background: rgb(background) }
}

/// A named scene from the catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub title: &'static str,
    pub equation: &'static str,
    #[serde(serialize_with = "params_as_map")]
    pub params: &'static [(&'static str, f64)],
    pub zoom: f64,
    #[serde(rename = "colors")]
    pub palette: Palette,
}

fn params_as_map<S: Serializer>(params: &[(&str, f64)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(params.iter().copied())
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "poke-planet",
        title: "Poke Planet Ball",
        equation: "((x^2+y^2+z^2-100))*((x^4+y^4-2)*(x^3+y^3-4)*(x^4+y^4-8)*(x^3+y^3-16)*(x^4+y^4-32)*(x^3+y^3+36))",
        params: &[],
        zoom: 0.04,
        palette: palette(0x8b4513, 0x2f1b0c, 0xf5e6c8),
    },
    Preset {
        name: "ding-dong",
        title: "Ding dong",
        equation: "x^2+y^2+z^3-z^2",
        params: &[],
        zoom: 0.5,
        palette: palette(0xc9a227, 0x5c3a12, 0xfaf3e0),
    },
    Preset {
        name: "atom-fish",
        title: "Atom Fish",
        equation: "(x^2+y^2+z^3-z^2)*((x-y)(x+y)-a)((x+y)(x-y)+a)=0",
        params: &[("a", 0.02)],
        zoom: 0.91,
        palette: palette(0x1f4e79, 0x0b1d2e, 0xf2e8cf),
    },
    Preset {
        name: "ring-blaster",
        title: "Ring Blaster",
        equation: "((x^2+y^2-1)^2+(y^2+z^2-1)^2-a)*((x-y)(x+y)-a)((x+y)(x-y)+a)=0",
        params: &[("a", 0.02)],
        zoom: 0.47,
        palette: palette(0xa0522d, 0x3b1f0f, 0xfdf5e6),
    },
    Preset {
        name: "cylinder-cross",
        title: "Cylinder cross-section",
        equation: "(x^2+y^2-1)^2+(z^2+(y+3-6*b)^2-1)^2-0.01*a=0",
        params: &[("a", 0.26), ("b", 0.56)],
        zoom: 0.71,
        palette: palette(0x6b8e23, 0x2e3b10, 0xfffaf0),
    },
    Preset {
        name: "fig8-pair",
        title: "Cayley pair",
        equation: "(x^2+y^2+z^2+2*x*y*z-1)*((x-1)^2+(y-1)^2+(z-1)^2+2*(x-1)*(y-1)*(z-1)-2)=0",
        params: &[],
        zoom: 0.4,
        palette: palette(0x7b2d26, 0x2b0f0c, 0xf7ead1),
    },
    Preset {
        name: "fig8-scaled",
        title: "Cayley with a dilated copy",
        equation: "(x^2+y^2+z^2+2*x*y*z-1)*((x/2)^2+(y/2)^2+(z/2)^2-2*x/2*y/2*z/2-1)=0",
        params: &[],
        zoom: 0.3,
        palette: palette(0x264653, 0x10201f, 0xe9d8a6),
    },
    Preset {
        name: "fig8-family",
        title: "Cayley family at scales 1, 2, 3, 5",
        equation: "(x^2+y^2+z^2+2*x*y*z-1)*((x/2)^2+(y/2)^2+(z/2)^2-2*x/2*y/2*z/2-1)*((x/3)^2+(y/3)^2+(z/3)^2-2*x/3*y/3*z/3-1)*((x/5)^2+(y/5)^2+(z/5)^2-2*x/5*y/5*z/5-1)=0",
        params: &[],
        zoom: 0.15,
        palette: palette(0x9b2226, 0x3d0c0e, 0xfefae0),
    },
];

/// Looks a preset up by name.
pub fn preset(name: &str) -> Result<&'static Preset, MotifError> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| MotifError::UnknownPreset {
        name: name.to_string(),
        available: PRESETS.iter().map(|p| p.name).collect(),
    })
}

/// The catalogue as a JSON array of `{name, title, equation, params, zoom, colors}`.
pub fn catalog_json() -> String {
    serde_json::to_string_pretty(PRESETS).expect("catalogue serializes")
}

impl Preset {
    pub fn expr(&self) -> Expr {
        Expr::parse(self.equation).expect("catalogue equations parse")
    }

    pub fn param_binding(&self) -> ParamBinding {
        self.params.iter().copied().collect()
    }

    pub fn scene(&self, width: u32, height: u32) -> Scene {
        let mut scene = Scene::new(self.expr(), self.param_binding(), self.zoom, width, height);
        scene.palette = self.palette;
        scene
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutMode {
    #[default]
    #[serde(alias = "fib")]
    Fibonacci,
    Grid,
}

/// How a single render is repeated into a motif.
///
/// For [`LayoutMode::Grid`], `count` is the number of rows and of columns
/// and each cell is `canvas / count` pixels. For [`LayoutMode::Fibonacci`],
/// `count` is the number of copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotifLayout {
    #[serde(default)]
    pub mode: LayoutMode,
    pub count: u32,
    #[serde(default)]
    pub mirror: bool,
    pub canvas_width: u32,
    pub canvas_height: u32,
}

impl MotifLayout {
    /// Size at which the source tile should be rendered.
    pub fn tile_size(&self) -> Result<(u32, u32), MotifError> {
        match self.mode {
            LayoutMode::Grid => {
                if self.count == 0 {
                    return Err(MotifError::InvalidGrid(0, 0));
                }
                let (w, h) = (self.canvas_width / self.count, self.canvas_height / self.count);
                if w == 0 || h == 0 {
                    return Err(MotifError::InvalidGrid(self.count, self.count));
                }
                Ok((w, h))
            }
            LayoutMode::Fibonacci => {
                let u = fibonacci_unit(self.count, self.canvas_width, self.canvas_height)?;
                let side = fibonacci(self.count) * u;
                Ok((side as u32, side as u32))
            }
        }
    }

    pub fn apply(&self, tile: &Image) -> Result<Image, MotifError> {
        match self.mode {
            LayoutMode::Grid => grid_tile(tile, self.count, self.count, self.mirror),
            LayoutMode::Fibonacci => fibonacci_layout(tile, self.count, self.canvas_width, self.canvas_height),
        }
    }
}

/// `F₁ = F₂ = 1`.
pub fn fibonacci(n: u32) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

/// A square of the spiral in unit cells: top-left corner and side `F_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpiralSquare {
    pub x: i64,
    pub y: i64,
    pub side: u64,
}

/// Golden-spiral packing of squares with sides `F₁…F_n`. Each new square is
/// attached to the right, bottom, left, then top of everything placed so
/// far, cycling. Returns the squares (shifted so the bounding box starts at
/// the origin) and the bounding box size.
pub fn fibonacci_squares(n: u32) -> (Vec<SpiralSquare>, u64, u64) {
    let mut squares = Vec::with_capacity(n as usize);
    let (mut x0, mut y0, mut x1, mut y1) = (0i64, 0i64, 0i64, 0i64);
    for i in 1..=n {
        let side = fibonacci(i) as i64;
        let (x, y) = if i == 1 {
            (0, 0)
        } else {
            match (i - 2) % 4 {
                0 => (x1, y0),
                1 => (x0, y1),
                2 => (x0 - side, y0),
                _ => (x0, y0 - side),
            }
        };
        squares.push(SpiralSquare { x, y, side: side as u64 });
        (x0, y0, x1, y1) = (x0.min(x), y0.min(y), x1.max(x + side), y1.max(y + side));
    }
    for s in &mut squares {
        s.x -= x0;
        s.y -= y0;
    }
    (squares, (x1 - x0) as u64, (y1 - y0) as u64)
}

/// Pixels per unit cell: the largest integer `u` with the spiral's bounding
/// box times `u` inside the canvas (floor rounding, so every copy side is
/// exactly `F_i · u` pixels).
pub fn fibonacci_unit(n: u32, canvas_w: u32, canvas_h: u32) -> Result<u64, MotifError> {
    if n == 0 || n > MAX_FIBONACCI_COPIES {
        return Err(MotifError::InvalidCount(n));
    }
    let (_, bw, bh) = fibonacci_squares(n);
    let u = (canvas_w as u64 / bw).min(canvas_h as u64 / bh);
    if u == 0 {
        return Err(MotifError::CanvasTooSmall {
            width: canvas_w,
            height: canvas_h,
            count: n,
            min_width: bw,
            min_height: bh,
        });
    }
    Ok(u)
}

/// `n` copies of `tile` with sides `F₁·u … F_n·u`, spiral-packed and centred
/// on a canvas filled with the tile's top-left pixel. Non-square tiles keep
/// their aspect ratio and are centred in their square.
pub fn fibonacci_layout(tile: &Image, n: u32, canvas_w: u32, canvas_h: u32) -> Result<Image, MotifError> {
    let u = fibonacci_unit(n, canvas_w, canvas_h)?;
    let (squares, bw, bh) = fibonacci_squares(n);
    let ox = (canvas_w as u64 - bw * u) / 2;
    let oy = (canvas_h as u64 - bh * u) / 2;
    let mut out = Image::new(canvas_w, canvas_h, tile.get(0, 0));
    let longest = tile.width().max(tile.height()) as u64;
    for s in &squares {
        let side = s.side * u;
        let w = (side * tile.width() as u64 / longest).max(1);
        let h = (side * tile.height() as u64 / longest).max(1);
        let copy = tile.resized_nearest(w as u32, h as u32);
        let x = ox + s.x as u64 * u + (side - w) / 2;
        let y = oy + s.y as u64 * u + (side - h) / 2;
        out.blit(&copy, x as i64, y as i64);
    }
    Ok(out)
}

/// `rows × cols` repeat. With `mirror`, cells whose `row + col` is odd are
/// flipped horizontally.
pub fn grid_tile(tile: &Image, rows: u32, cols: u32, mirror: bool) -> Result<Image, MotifError> {
    if rows == 0 || cols == 0 {
        return Err(MotifError::InvalidGrid(rows, cols));
    }
    let (w, h) = (tile.width(), tile.height());
    let flipped = mirror.then(|| tile.flipped_horizontally());
    let mut out = Image::new(cols * w, rows * h, tile.get(0, 0));
    for r in 0..rows {
        for c in 0..cols {
            let cell = match &flipped {
                Some(f) if (r + c) % 2 == 1 => f,
                _ => tile,
            };
            out.blit(cell, (c * w) as i64, (r * h) as i64);
        }
    }
    Ok(out)
}

/// Replaces every colour through `mapping`. Each colour in the image must be
/// covered, and distinct colours must stay distinct.
pub fn apply_palette(img: &Image, mapping: &BTreeMap<Rgb, Rgb>) -> Result<Image, MotifError> {
    let present: BTreeSet<Rgb> = img.histogram().into_keys().collect();
    let mut seen: BTreeMap<Rgb, Rgb> = BTreeMap::new();
    for &c in &present {
        let to = *mapping.get(&c).ok_or(MotifError::UncoveredColor(c))?;
        if let Some(&other) = seen.get(&to) {
            return Err(MotifError::NotInjective(other, c, to));
        }
        seen.insert(to, c);
    }
    let pixels = img.pixels().iter().map(|p| mapping[p]).collect();
    Ok(Image::from_pixels(img.width(), img.height(), pixels))
}

/// Maps one palette's three colours onto another's.
pub fn palette_mapping(from: &Palette, to: &Palette) -> BTreeMap<Rgb, Rgb> {
    BTreeMap::from([(from.front, to.front), (from.back, to.back), (from.background, to.background)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker() -> Image {
        let mut img = Image::new(4, 2, Rgb::WHITE);
        img.set(0, 0, Rgb::BLACK);
        img.set(3, 1, Rgb::new(9, 9, 9));
        img
    }

    #[test]
    fn fibonacci_numbers() {
        let f: Vec<_> = (1..=10).map(fibonacci).collect();
        assert_eq!(f, [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]);
        assert_eq!(fibonacci(64), 10_610_209_857_723);
    }

    #[test]
    fn spiral_tiles_its_bounding_box() {
        for n in 1..=12 {
            let (sq, bw, bh) = fibonacci_squares(n);
            let area: u64 = sq.iter().map(|s| s.side * s.side).sum();
            assert_eq!(area, bw * bh, "n = {n}");
            for (i, a) in sq.iter().enumerate() {
                for b in &sq[..i] {
                    let overlap_x = a.x < b.x + b.side as i64 && b.x < a.x + a.side as i64;
                    let overlap_y = a.y < b.y + b.side as i64 && b.y < a.y + a.side as i64;
                    assert!(!(overlap_x && overlap_y));
                }
            }
        }
        assert_eq!(fibonacci_squares(5).1, 5);
        assert_eq!(fibonacci_squares(5).2, 8);
    }

    #[test]
    fn unit_uses_floor() {
        // n = 5 needs 5×8 cells
        assert_eq!(fibonacci_unit(5, 59, 99), Ok(11));
        assert!(matches!(fibonacci_unit(5, 4, 100), Err(MotifError::CanvasTooSmall { .. })));
        assert_eq!(fibonacci_unit(0, 10, 10), Err(MotifError::InvalidCount(0)));
    }

    #[test]
    fn single_copy_is_centred() {
        let tile = Image::new(2, 2, Rgb::BLACK);
        let mut tile = tile;
        tile.set(1, 1, Rgb::WHITE);
        let out = fibonacci_layout(&tile, 1, 5, 3).unwrap();
        // u = 3, copy occupies x 1..4
        assert_eq!(out.get(0, 0), Rgb::BLACK);
        assert_eq!(out.get(3, 2), Rgb::WHITE);
        assert_eq!(out.get(4, 2), Rgb::BLACK);
    }

    #[test]
    fn grid_dimensions_and_mirroring() {
        let t = checker();
        assert_eq!(grid_tile(&t, 1, 1, false).unwrap(), t);
        let g = grid_tile(&t, 2, 3, true).unwrap();
        assert_eq!((g.width(), g.height()), (12, 4));
        assert_eq!(g.get(4 + 3, 0), Rgb::BLACK);
        assert_eq!(g.get(0, 2 + 1), Rgb::new(9, 9, 9));
        assert!(grid_tile(&t, 0, 1, false).is_err());
    }

    #[test]
    fn palette_rules() {
        let t = checker();
        let id: BTreeMap<_, _> = t.histogram().keys().map(|&c| (c, c)).collect();
        assert_eq!(apply_palette(&t, &id).unwrap(), t);
        let mut m = id.clone();
        m.remove(&Rgb::WHITE);
        assert_eq!(apply_palette(&t, &m), Err(MotifError::UncoveredColor(Rgb::WHITE)));
        let mut m = id;
        m.insert(Rgb::WHITE, Rgb::BLACK);
        assert!(matches!(apply_palette(&t, &m), Err(MotifError::NotInjective(..))));
    }

    #[test]
    fn preset_lookup() {
        let p = preset("ding-dong").unwrap();
        assert_eq!(p.equation, "x^2+y^2+z^3-z^2");
        assert!(p.params.is_empty());
        let err = preset("nope").unwrap_err();
        assert!(err.to_string().contains("ring-blaster"));
    }

    #[test]
    fn presets_are_well_formed() {
        let mut names = BTreeSet::new();
        for p in PRESETS {
            assert!(names.insert(p.name));
            let e = p.expr();
            assert!(p.param_binding().missing_for(&e).is_empty(), "{}", p.name);
            assert!(p.scene(8, 8).validate().is_ok(), "{}", p.name);
        }
    }

    #[test]
    fn catalog_json_shape() {
        let v: serde_json::Value = serde_json::from_str(&catalog_json()).unwrap();
        let rb = v.as_array().unwrap().iter().find(|p| p["name"] == "ring-blaster").unwrap();
        assert_eq!(rb["zoom"], 0.47);
        assert_eq!(rb["params"]["a"], 0.02);
        assert!(rb["colors"]["background"].as_str().unwrap().starts_with('#'));
    }

    #[test]
    fn layout_json() {
        let l: MotifLayout =
            serde_json::from_str(r#"{"mode":"fib","count":5,"canvas_width":100,"canvas_height":160}"#).unwrap();
        assert_eq!(l.mode, LayoutMode::Fibonacci);
        assert_eq!(l.tile_size().unwrap(), (100, 100));
        assert!(serde_json::from_str::<MotifLayout>(r#"{"count":1,"canvas_width":1,"canvas_height":1,"x":0}"#).is_err());
    }
}
