//! Raster and point-cloud output: slice images and limit sets.
//!
//! Slice scans become binary PGM (grayscale) or PPM (color, when overlays
//! are requested) with the top pixel row at `im_max`.  Limit sets are made
//! by pushing the attracting fixed points of the two generators around the
//! reduced-word tree of the free group, deduplicating on a fine grid and
//! sorting, so the cloud is identical regardless of enumeration order.

use std::fs;
use std::io::Write;
use std::path::Path;

use qfslice_core::mobius::{compose, Mat2C, SpherePoint};
use qfslice_core::repr::{matrices, FNPoint};
use qfslice_core::Complex64;

use crate::slicescan::{pp_bound, RaySegment, SliceScan, Verdict};
use crate::SliceError;

/// An 8-bit raster, one or three channels, row major, top row first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn gray(width: usize, height: usize, fill: u8) -> RasterImage {
        RasterImage {
            width,
            height,
            channels: 1,
            pixels: vec![fill; width * height],
        }
    }

    pub fn rgb(width: usize, height: usize, fill: [u8; 3]) -> RasterImage {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&fill);
        }
        RasterImage {
            width,
            height,
            channels: 3,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_color(&self) -> bool {
        self.channels == 3
    }

    pub fn set_gray(&mut self, x: usize, y: usize, v: u8) {
        debug_assert_eq!(self.channels, 1);
        self.pixels[y * self.width + x] = v;
    }

    pub fn set_rgb(&mut self, x: usize, y: usize, v: [u8; 3]) {
        debug_assert_eq!(self.channels, 3);
        let k = (y * self.width + x) * 3;
        self.pixels[k..k + 3].copy_from_slice(&v);
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Widen to three channels.
    pub fn to_rgb(&self) -> RasterImage {
        if self.channels == 3 {
            return self.clone();
        }
        let mut out = RasterImage::rgb(self.width, self.height, [0, 0, 0]);
        for (k, v) in self.pixels.iter().enumerate() {
            out.pixels[3 * k] = *v;
            out.pixels[3 * k + 1] = *v;
            out.pixels[3 * k + 2] = *v;
        }
        out
    }
}

/// Gray shades for the three verdicts.  The quasi-Fuchsian region is the
/// dark "shaded" one by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    pub qf: u8,
    pub not_qf: u8,
    pub unknown: u8,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            qf: 64,
            not_qf: 255,
            unknown: 208,
        }
    }
}

impl Palette {
    fn shade(&self, v: Verdict) -> u8 {
        match v {
            Verdict::Qf => self.qf,
            Verdict::NotQf => self.not_qf,
            Verdict::Unknown => self.unknown,
        }
    }
}

/// Grayscale image of a scan; the top pixel row is the row with the
/// largest `Im τ`.
pub fn rasterize(scan: &SliceScan, palette: &Palette) -> RasterImage {
    let (nx, ny) = (scan.window.nx, scan.window.ny);
    let mut img = RasterImage::gray(nx, ny, 0);
    for j in 0..ny {
        let y = ny - 1 - j;
        for i in 0..nx {
            img.set_gray(i, y, palette.shade(scan.verdict(i, j)));
        }
    }
    img
}

/// Color image of a scan with optional overlays: the Parker-Parkkonen
/// band boundary in blue, pleating-ray polylines in red.
pub fn rasterize_with_overlays(
    scan: &SliceScan,
    palette: &Palette,
    draw_pp_bound: bool,
    rays: &[RaySegment],
) -> RasterImage {
    let mut img = rasterize(scan, palette).to_rgb();
    let w = &scan.window;
    if draw_pp_bound {
        let bound = pp_bound(scan.l);
        for sign in [-1.0, 1.0] {
            let b = sign * bound;
            if b <= w.im_min || b >= w.im_max {
                continue;
            }
            let j = ((b - w.im_min) / w.dy()) as usize;
            let y = w.ny - 1 - j.min(w.ny - 1);
            for x in 0..w.nx {
                img.set_rgb(x, y, [48, 80, 255]);
            }
        }
    }
    for seg in rays {
        for pair in seg.points.windows(2) {
            draw_line(&mut img, w, pair[0], pair[1], [230, 40, 40]);
        }
        if seg.points.len() == 1 {
            draw_line(&mut img, w, seg.points[0], seg.points[0], [230, 40, 40]);
        }
    }
    img
}

fn to_pixel(w: &crate::slicescan::Window, p: Complex64) -> Option<(usize, usize)> {
    let (i, j) = w.cell_of(p)?;
    Some((i, w.ny - 1 - j))
}

fn draw_line(
    img: &mut RasterImage,
    w: &crate::slicescan::Window,
    a: Complex64,
    b: Complex64,
    color: [u8; 3],
) {
    let steps = {
        let di = ((b.re - a.re) / w.dx()).abs();
        let dj = ((b.im - a.im) / w.dy()).abs();
        di.max(dj).ceil() as usize + 1
    };
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let p = a + (b - a) * t;
        if let Some((x, y)) = to_pixel(w, p) {
            img.set_rgb(x, y, color);
        }
    }
}

/// Encode as binary PNM: `P5` for grayscale, `P6` for color.
pub fn pnm_bytes(img: &RasterImage) -> Result<Vec<u8>, SliceError> {
    if img.width == 0 || img.height == 0 {
        return Err(SliceError::InvalidParam(
            "cannot encode a zero-size image".into(),
        ));
    }
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    Ok(out)
}

/// Write a PGM/PPM file; IO failures carry the path.
pub fn write_pnm(img: &RasterImage, path: &Path) -> Result<(), SliceError> {
    let bytes = pnm_bytes(img)?;
    fs::write(path, bytes).map_err(|source| SliceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A deduplicated, sorted limit-set sample with word-length tags.
#[derive(Debug, Clone)]
pub struct PointCloud {
    /// Finite points with the length of the shortest producing word,
    /// sorted by `(re, im)`.
    pub points: Vec<(Complex64, u32)>,
    /// Whether some orbit point was `∞`.
    pub has_infinity: bool,
}

/// Orbit of the generator fixed points under all freely reduced words up
/// to `max_word_len` (at most 20), deduplicated on a `1e-6` grid.
pub fn limit_set(pt: &FNPoint, max_word_len: usize) -> Result<PointCloud, SliceError> {
    if max_word_len > 20 {
        return Err(SliceError::InvalidParam(format!(
            "max_word_len {max_word_len} exceeds the supported bound 20"
        )));
    }
    let rep = matrices(pt)?;
    let gens = [rep.a, rep.a.inverse(), rep.b, rep.b.inverse()];
    let seeds = [attracting_fixed_point(&rep.a), attracting_fixed_point(&rep.b)];

    let mut raw: Vec<(Complex64, u32)> = Vec::new();
    let mut has_infinity = false;
    let record = |m: &Mat2C, depth: u32, raw: &mut Vec<(Complex64, u32)>, has_inf: &mut bool| {
        for seed in seeds {
            match m.apply(seed) {
                SpherePoint::Finite(z) if z.is_finite() => raw.push((z, depth)),
                _ => *has_inf = true,
            }
        }
    };

    record(&Mat2C::IDENTITY, 0, &mut raw, &mut has_infinity);
    // Depth-first over reduced words; 4·3^(L−1) leaves at depth L.
    let mut stack: Vec<(Mat2C, usize, u32)> = Vec::new();
    if max_word_len > 0 {
        for (g, m) in gens.iter().enumerate() {
            stack.push((*m, g, 1));
        }
    }
    while let Some((m, last, depth)) = stack.pop() {
        record(&m, depth, &mut raw, &mut has_infinity);
        if (depth as usize) < max_word_len {
            for (g, gm) in gens.iter().enumerate() {
                // Skip the inverse of the last letter (indices pair 0↔1, 2↔3).
                if g ^ 1 == last {
                    continue;
                }
                stack.push((compose(&m, gm), g, depth + 1));
            }
        }
    }

    // Keep the smallest word length per 1e-6 grid cell, then sort by
    // position for a scheduling-independent cloud.
    raw.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(a.0.re.total_cmp(&b.0.re))
            .then(a.0.im.total_cmp(&b.0.im))
    });
    let mut seen = std::collections::HashSet::new();
    let mut points: Vec<(Complex64, u32)> = Vec::new();
    for (z, depth) in raw {
        let key = (
            (z.re * 1e6).round() as i64,
            (z.im * 1e6).round() as i64,
        );
        if seen.insert(key) {
            points.push((z, depth));
        }
    }
    points.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(PointCloud {
        points,
        has_infinity,
    })
}

/// Attracting fixed point on the sphere (the multiplier at it has modulus
/// below one); for parabolics this is the unique fixed point.
fn attracting_fixed_point(m: &Mat2C) -> SpherePoint {
    if m.c.norm_sqr() == 0.0 {
        if m.a.norm() > m.d.norm() || (m.d - m.a).norm_sqr() == 0.0 {
            return SpherePoint::Infinity;
        }
        return SpherePoint::Finite(m.b / (m.d - m.a));
    }
    let tr = m.trace();
    let disc = (tr * tr - 4.0).sqrt();
    // cz + d at the fixed point is (tr ± disc)/2; attracting needs the
    // larger modulus.
    let pick = if (tr + disc).norm_sqr() >= (tr - disc).norm_sqr() {
        disc
    } else {
        -disc
    };
    SpherePoint::Finite((m.a - m.d + pick) / (2.0 * m.c))
}

/// Scatter a point cloud onto a grayscale raster (dark points on white).
pub fn rasterize_points(
    cloud: &PointCloud,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    width: usize,
    height: usize,
) -> Result<RasterImage, SliceError> {
    if width == 0 || height == 0 || !(re_min < re_max) || !(im_min < im_max) {
        return Err(SliceError::InvalidParam("invalid point raster geometry".into()));
    }
    let mut img = RasterImage::gray(width, height, 255);
    let dx = (re_max - re_min) / width as f64;
    let dy = (im_max - im_min) / height as f64;
    for (z, _) in &cloud.points {
        let i = (z.re - re_min) / dx;
        let j = (z.im - im_min) / dy;
        if i < 0.0 || j < 0.0 {
            continue;
        }
        let (i, j) = (i as usize, j as usize);
        if i < width && j < height {
            img.set_gray(i, height - 1 - j, 0);
        }
    }
    Ok(img)
}

/// CSV rows `re,im,wordlen`.
pub fn write_points_csv<W: Write>(cloud: &PointCloud, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "re,im,wordlen")?;
    for (z, depth) in &cloud.points {
        writeln!(out, "{},{},{}", z.re, z.im, depth)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slicescan::Window;
    use qfslice_core::Complex64 as C;

    #[test]
    fn one_by_one_white_pgm_exact_bytes() {
        let img = RasterImage::gray(1, 1, 255);
        let bytes = pnm_bytes(&img).unwrap();
        assert_eq!(bytes, b"P5\n1 1\n255\n\xff");
        assert_eq!(bytes.len(), "P5\n1 1\n255\n".len() + 1);
    }

    #[test]
    fn zero_size_image_is_rejected() {
        let img = RasterImage::gray(0, 3, 0);
        assert!(pnm_bytes(&img).is_err());
    }

    #[test]
    fn ppm_header_and_payload() {
        let mut img = RasterImage::rgb(2, 1, [0, 0, 0]);
        img.set_rgb(1, 0, [255, 10, 1]);
        let bytes = pnm_bytes(&img).unwrap();
        assert_eq!(&bytes[..9], b"P6\n2 1\n25");
        assert_eq!(&bytes[bytes.len() - 6..], &[0, 0, 0, 255, 10, 1]);
    }

    #[test]
    fn uniform_scan_rasterizes_uniformly() {
        let w = Window::strip(-1.0, 1.0, 4, 3).unwrap();
        let scan = SliceScan {
            l: 1.0,
            window: w,
            cells: vec![Verdict::Qf; 12],
            labels: vec![0; 12],
            standard_id: Some(0),
        };
        let img = rasterize(&scan, &Palette::default());
        assert!(img.pixels().iter().all(|p| *p == Palette::default().qf));
    }

    #[test]
    fn raster_orientation_top_is_im_max() {
        let w = Window::strip(-1.0, 1.0, 1, 2).unwrap();
        let mut cells = vec![Verdict::NotQf; 2];
        cells[1] = Verdict::Qf; // j = 1, the upper half
        let scan = SliceScan {
            l: 1.0,
            window: w,
            cells,
            labels: vec![-1, 0],
            standard_id: None,
        };
        let img = rasterize(&scan, &Palette::default());
        let p = Palette::default();
        assert_eq!(img.pixels()[0], p.qf); // top pixel row
        assert_eq!(img.pixels()[1], p.not_qf);
    }

    #[test]
    fn fuchsian_limit_set_is_real() {
        let pt = FNPoint::real(6.0, C::new(0.5, 0.0));
        let cloud = limit_set(&pt, 6).unwrap();
        assert!(cloud.has_infinity);
        assert!(!cloud.points.is_empty());
        for (z, _) in &cloud.points {
            assert!(z.im.abs() <= 1e-6 * (1.0 + z.norm()), "point {z}");
        }
    }

    #[test]
    fn word_length_zero_gives_seeds() {
        let pt = FNPoint::real(2.0, C::new(0.3, 0.2));
        let cloud = limit_set(&pt, 0).unwrap();
        // fix⁺(a) is ∞ for Re λ > 0; fix⁺(b) is finite.
        assert!(cloud.has_infinity);
        assert_eq!(cloud.points.len(), 1);
        assert_eq!(cloud.points[0].1, 0);
    }

    #[test]
    fn point_count_monotone_in_depth() {
        let pt = FNPoint::real(2.0, C::new(0.4, 0.4));
        let mut last = 0;
        for depth in [0, 2, 4, 6] {
            let n = limit_set(&pt, depth).unwrap().points.len();
            assert!(n >= last, "depth {depth}: {n} < {last}");
            last = n;
        }
    }

    #[test]
    fn depth_cap_enforced() {
        let pt = FNPoint::real(2.0, C::new(0.4, 0.4));
        assert!(limit_set(&pt, 21).is_err());
    }

    #[test]
    fn attracting_fixed_points() {
        // Hyperbolic diagonal-ish matrix: z ↦ 4z has attracting ∞.
        let m = Mat2C::new(
            C::new(2.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.5, 0.0),
        );
        assert_eq!(attracting_fixed_point(&m), SpherePoint::Infinity);
        // Conjugate by z ↦ 1/z: attracting point becomes 0.
        let s = Mat2C::new(
            C::new(0.0, 0.0),
            C::new(-1.0, 0.0),
            C::new(1.0, 0.0),
            C::new(0.0, 0.0),
        );
        let m2 = compose(&compose(&s, &m), &s.inverse());
        match attracting_fixed_point(&m2) {
            SpherePoint::Finite(z) => assert!(z.norm() < 1e-12),
            other => panic!("expected finite, got {other:?}"),
        }
    }
}
