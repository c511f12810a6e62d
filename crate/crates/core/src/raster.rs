//! Skeleton rendering, face-center alignment and frame blending on planar RGB rasters.

use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::{PoseFrame, JOINT_COUNT};

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("shift ({dx}, {dy}) does not fit a {width}x{height} image")]
    ShiftTooLarge { dx: i64, dy: i64, width: u32, height: u32 },
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("{frames} frames but {faces} face annotations")]
    LengthMismatch { frames: usize, faces: usize },
    #[error("blend alpha {0} is outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("invalid skeleton style: {0}")]
    InvalidStyle(String),
    #[error("image dimensions must be positive")]
    EmptyImage,
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    #[serde(alias = "r")]
    Red,
    #[serde(alias = "g")]
    Green,
    #[serde(alias = "b")]
    Blue,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Red, Channel::Green, Channel::Blue];

    pub fn plane(self) -> usize {
        match self {
            Channel::Red => 0,
            Channel::Green => 1,
            Channel::Blue => 2,
        }
    }
}

/// An 8-bit RGB raster stored as three row-major planes, origin top-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    planes: [Vec<u8>; 3],
}

impl RasterImage {
    /// A black image.
    pub fn new(width: u32, height: u32) -> Self {
        let len = width as usize * height as usize;
        Self {
            width,
            height,
            planes: [vec![0; len], vec![0; len], vec![0; len]],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut img = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.put(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn plane(&self, channel: Channel) -> &[u8] {
        &self.planes[channel.plane()]
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.planes[0][i], self.planes[1][i], self.planes[2][i]]
    }

    pub fn put(&mut self, x: u32, y: u32, px: [u8; 3]) {
        let i = self.offset(x, y);
        for (plane, v) in self.planes.iter_mut().zip(px) {
            plane[i] = v;
        }
    }

    pub fn channel_value(&self, channel: Channel, x: u32, y: u32) -> u8 {
        self.planes[channel.plane()][self.offset(x, y)]
    }

    /// Writes `value` into one channel; coordinates outside the image are ignored.
    pub fn set_channel(&mut self, channel: Channel, x: i64, y: i64, value: u8) {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            return;
        }
        let i = self.offset(x as u32, y as u32);
        self.planes[channel.plane()][i] = value;
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        RgbImage::from_fn(self.width, self.height, |x, y| image::Rgb(self.get(x, y)))
    }

    pub fn from_rgb_image(img: &RgbImage) -> Self {
        Self::from_fn(img.width(), img.height(), |x, y| img.get_pixel(x, y).0)
    }

    pub fn read_png(path: &Path) -> Result<Self, RasterError> {
        let img = image::open(path).map_err(|source| RasterError::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_rgb_image(&img.to_rgb8()))
    }

    pub fn write_png(&self, path: &Path) -> Result<(), RasterError> {
        self.to_rgb_image()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| RasterError::Image {
                path: path.to_path_buf(),
                source,
            })
    }
}

/// `dir/frame_%06d.png`
pub fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{index:06}.png"))
}

/// Frame files named `frame_<digits>.png` in `dir`, ordered by their number.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>, RasterError> {
    let io_err = |source| RasterError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut frames = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let number = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("frame_"))
            .and_then(|n| n.strip_suffix(".png"))
            .filter(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|n| n.parse::<u64>().ok());
        if let Some(number) = number {
            frames.push((number, path));
        }
    }
    frames.sort();
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

/// Writes `frames` as `frame_000000.png`, `frame_000001.png`, ... creating `dir` if needed.
pub fn write_frames(dir: &Path, frames: &[RasterImage]) -> Result<(), RasterError> {
    fs::create_dir_all(dir).map_err(|source| RasterError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(i, img)| img.write_png(&frame_path(dir, i)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundingBox {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contour {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

/// A detected face: its bounding box and named landmark polylines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceAnnotation {
    pub bbox: BoundingBox,
    #[serde(default)]
    pub contours: Vec<Contour>,
}

impl FaceAnnotation {
    pub fn from_bbox(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self {
            bbox: BoundingBox {
                left,
                top,
                right,
                bottom,
            },
            contours: Vec::new(),
        }
    }
}

pub fn face_center(face: &FaceAnnotation) -> (f64, f64) {
    let b = &face.bbox;
    ((b.left + b.right) / 2.0, (b.top + b.bottom) / 2.0)
}

/// The 17 bones of the COCO-18 skeleton.
pub const COCO_LIMBS: [(usize, usize); 17] = [
    (1, 2),
    (1, 5),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (1, 8),
    (8, 9),
    (9, 10),
    (1, 11),
    (11, 12),
    (12, 13),
    (1, 0),
    (0, 14),
    (14, 16),
    (0, 15),
    (15, 17),
];

const REFERENCE_HEIGHT: f64 = 512.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonStyle {
    pub limb_pairs: Vec<(usize, usize)>,
    pub joint_radius: u32,
    pub line_thickness: u32,
    pub face_line_thickness: u32,
    pub skeleton_channel: Channel,
    pub face_channel: Channel,
    /// Kept empty; it stands in for an edge-map channel this pipeline does not render.
    pub reserved_channel: Channel,
}

impl Default for SkeletonStyle {
    fn default() -> Self {
        Self {
            limb_pairs: COCO_LIMBS.to_vec(),
            joint_radius: 4,
            line_thickness: 4,
            face_line_thickness: 1,
            skeleton_channel: Channel::Red,
            face_channel: Channel::Green,
            reserved_channel: Channel::Blue,
        }
    }
}

impl SkeletonStyle {
    /// Default stroke sizes scaled from their 512 px reference to a frame `height` pixels tall.
    pub fn for_height(height: u32) -> Self {
        let scale = |v: u32| ((f64::from(v) * f64::from(height) / REFERENCE_HEIGHT).round() as u32).max(1);
        let base = Self::default();
        Self {
            joint_radius: scale(base.joint_radius),
            line_thickness: scale(base.line_thickness),
            ..base
        }
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        let (s, f, r) = (self.skeleton_channel, self.face_channel, self.reserved_channel);
        if s == f || s == r || f == r {
            return Err(RasterError::InvalidStyle("channel assignments must be distinct".into()));
        }
        if let Some(&(i, j)) = self
            .limb_pairs
            .iter()
            .find(|&&(i, j)| i >= JOINT_COUNT || j >= JOINT_COUNT)
        {
            return Err(RasterError::InvalidStyle(format!(
                "limb ({i}, {j}) references a joint outside 0..=17"
            )));
        }
        Ok(())
    }
}

fn round_px(v: f64) -> i64 {
    v.round() as i64
}

fn stamp_disc(img: &mut RasterImage, channel: Channel, cx: i64, cy: i64, radius: i64) {
    let r2 = radius * radius;
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            if dx * dx + dy * dy <= r2 {
                img.set_channel(channel, cx + dx, cy + dy, 255);
            }
        }
    }
}

/// Bresenham line between pixel centers, each step stamped with a disc of the stroke's half width.
fn draw_line(img: &mut RasterImage, channel: Channel, from: (i64, i64), to: (i64, i64), thickness: u32) {
    let radius = i64::from(thickness / 2);
    let (mut x, mut y) = from;
    let dx = (to.0 - x).abs();
    let dy = -(to.1 - y).abs();
    let sx = if x < to.0 { 1 } else { -1 };
    let sy = if y < to.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        stamp_disc(img, channel, x, y, radius);
        if (x, y) == to {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Renders a pose skeleton (and optional face contours) on a black `width`×`height` canvas.
///
/// Joints and bones go to `style.skeleton_channel` only, face polylines to
/// `style.face_channel` only; the reserved channel stays zero. A bone is drawn only when
/// both its joints are present. Geometry outside the frame is clipped.
pub fn render_skeleton(
    pose: &PoseFrame,
    face: Option<&FaceAnnotation>,
    width: u32,
    height: u32,
    style: &SkeletonStyle,
) -> Result<RasterImage, RasterError> {
    style.validate()?;
    if width == 0 || height == 0 {
        return Err(RasterError::EmptyImage);
    }
    let mut img = RasterImage::new(width, height);
    let px = |j: usize| pose.joints[j].map(|p| (round_px(p.x), round_px(p.y)));

    for &(i, j) in &style.limb_pairs {
        if let (Some(a), Some(b)) = (px(i), px(j)) {
            draw_line(&mut img, style.skeleton_channel, a, b, style.line_thickness);
        }
    }
    for (cx, cy) in (0..JOINT_COUNT).filter_map(px) {
        stamp_disc(&mut img, style.skeleton_channel, cx, cy, i64::from(style.joint_radius));
    }

    if let Some(face) = face {
        for contour in &face.contours {
            let pts: Vec<_> = contour
                .points
                .iter()
                .map(|p| (round_px(p[0]), round_px(p[1])))
                .collect();
            match pts.as_slice() {
                [] => {}
                [single] => draw_line(
                    &mut img,
                    style.face_channel,
                    *single,
                    *single,
                    style.face_line_thickness,
                ),
                _ => {
                    for w in pts.windows(2) {
                        draw_line(&mut img, style.face_channel, w[0], w[1], style.face_line_thickness);
                    }
                }
            }
        }
    }
    Ok(img)
}

/// Shifts content by (`dx`, `dy`) and fills the exposed margin with copies of the nearest
/// edge row or column: `out(x, y) = in(clamp(x - dx), clamp(y - dy))`.
pub fn translate_edge_replicate(img: &RasterImage, dx: i64, dy: i64) -> Result<RasterImage, RasterError> {
    let (w, h) = (i64::from(img.width), i64::from(img.height));
    if dx.abs() >= w || dy.abs() >= h {
        return Err(RasterError::ShiftTooLarge {
            dx,
            dy,
            width: img.width,
            height: img.height,
        });
    }
    if dx == 0 && dy == 0 {
        return Ok(img.clone());
    }
    let src_x: Vec<usize> = (0..w).map(|x| (x - dx).clamp(0, w - 1) as usize).collect();
    let mut out = RasterImage::new(img.width, img.height);
    for y in 0..h {
        let sy = (y - dy).clamp(0, h - 1) as usize;
        let src_row = sy * w as usize;
        let dst_row = y as usize * w as usize;
        for (dst, src) in out.planes.iter_mut().zip(img.planes.iter()) {
            for (x, &sx) in src_x.iter().enumerate() {
                dst[dst_row + x] = src[src_row + sx];
            }
        }
    }
    Ok(out)
}

/// Whole-pixel offset that moves `face`'s center onto `anchor`.
pub fn alignment_offset(anchor: (f64, f64), face: &FaceAnnotation) -> (i64, i64) {
    let (cx, cy) = face_center(face);
    (round_px(anchor.0 - cx), round_px(anchor.1 - cy))
}

/// Shifts every frame so its face center lands on the first frame's face center.
pub fn align_sequence(frames: &[RasterImage], faces: &[FaceAnnotation]) -> Result<Vec<RasterImage>, RasterError> {
    if frames.len() != faces.len() {
        return Err(RasterError::LengthMismatch {
            frames: frames.len(),
            faces: faces.len(),
        });
    }
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    if let Some(bad) = frames.iter().find(|f| f.dims() != first.dims()) {
        return Err(RasterError::DimensionMismatch(
            first.width,
            first.height,
            bad.width,
            bad.height,
        ));
    }
    let anchor = face_center(&faces[0]);
    frames
        .par_iter()
        .zip(faces.par_iter())
        .map(|(frame, face)| {
            let (dx, dy) = alignment_offset(anchor, face);
            translate_edge_replicate(frame, dx, dy)
        })
        .collect()
}

/// Per-pixel crossfade `round((1 - alpha) * a + alpha * b)`.
pub fn blend_frames(a: &RasterImage, b: &RasterImage, alpha: f64) -> Result<RasterImage, RasterError> {
    if a.dims() != b.dims() {
        return Err(RasterError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(RasterError::InvalidAlpha(alpha));
    }
    let mut out = RasterImage::new(a.width, a.height);
    for ((dst, pa), pb) in out.planes.iter_mut().zip(&a.planes).zip(&b.planes) {
        for ((d, &va), &vb) in dst.iter_mut().zip(pa).zip(pb) {
            let v = (1.0 - alpha) * f64::from(va) + alpha * f64::from(vb);
            *d = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::Joint;

    fn gray(width: u32, height: u32, values: &[u8]) -> RasterImage {
        RasterImage::from_fn(width, height, |x, y| {
            let v = values[(y * width + x) as usize];
            [v, v, v]
        })
    }

    fn reds(img: &RasterImage) -> Vec<u8> {
        img.plane(Channel::Red).to_vec()
    }

    #[test]
    fn single_joint_renders_disc_in_skeleton_channel() {
        let mut pose = PoseFrame::empty();
        pose.joints[0] = Some(Joint::new(50.0, 50.0, 1.0));
        let style = SkeletonStyle {
            joint_radius: 1,
            limb_pairs: vec![],
            ..SkeletonStyle::default()
        };
        let img = render_skeleton(&pose, None, 100, 100, &style).unwrap();
        for y in 0..100 {
            for x in 0..100 {
                let inside = (i64::from(x) - 50).pow(2) + (i64::from(y) - 50).pow(2) <= 1;
                assert_eq!(img.channel_value(Channel::Red, x, y), if inside { 255 } else { 0 });
            }
        }
        assert!(img.plane(Channel::Green).iter().all(|&v| v == 0));
        assert!(img.plane(Channel::Blue).iter().all(|&v| v == 0));
    }

    #[test]
    fn empty_pose_renders_black() {
        let img = render_skeleton(&PoseFrame::empty(), None, 32, 24, &SkeletonStyle::default()).unwrap();
        assert_eq!(img, RasterImage::new(32, 24));
    }

    #[test]
    fn face_contours_go_to_face_channel() {
        let face = FaceAnnotation {
            bbox: BoundingBox {
                left: 2.0,
                top: 2.0,
                right: 8.0,
                bottom: 8.0,
            },
            contours: vec![Contour {
                name: "jaw".into(),
                points: vec![[2.0, 5.0], [8.0, 5.0]],
            }],
        };
        let img = render_skeleton(&PoseFrame::empty(), Some(&face), 10, 10, &SkeletonStyle::default()).unwrap();
        for x in 2..=8 {
            assert_eq!(img.get(x, 5), [0, 255, 0]);
        }
        assert_eq!(img.plane(Channel::Green).iter().filter(|&&v| v > 0).count(), 7);
    }

    #[test]
    fn horizontal_limb_is_continuous() {
        let mut pose = PoseFrame::empty();
        pose.joints[3] = Some(Joint::new(2.0, 4.0, 1.0));
        pose.joints[4] = Some(Joint::new(12.0, 4.0, 1.0));
        let style = SkeletonStyle {
            joint_radius: 0,
            line_thickness: 1,
            ..SkeletonStyle::default()
        };
        let img = render_skeleton(&pose, None, 16, 8, &style).unwrap();
        for x in 0..16 {
            assert_eq!(img.channel_value(Channel::Red, x, 4) == 255, (2..=12).contains(&x));
        }
    }

    #[test]
    fn style_validation() {
        let dup = SkeletonStyle {
            face_channel: Channel::Red,
            ..SkeletonStyle::default()
        };
        assert!(matches!(dup.validate(), Err(RasterError::InvalidStyle(_))));
        let bad_limb = SkeletonStyle {
            limb_pairs: vec![(0, 18)],
            ..SkeletonStyle::default()
        };
        assert!(matches!(bad_limb.validate(), Err(RasterError::InvalidStyle(_))));
        assert_eq!(SkeletonStyle::for_height(512).joint_radius, 4);
        assert_eq!(SkeletonStyle::for_height(1024).line_thickness, 8);
        assert_eq!(SkeletonStyle::for_height(64).joint_radius, 1);
    }

    #[test]
    fn face_center_midpoints() {
        assert_eq!(
            face_center(&FaceAnnotation::from_bbox(40.0, 40.0, 60.0, 60.0)),
            (50.0, 50.0)
        );
        assert_eq!(
            face_center(&FaceAnnotation::from_bbox(0.0, 0.0, 10.0, 20.0)),
            (5.0, 10.0)
        );
        assert_eq!(
            face_center(&FaceAnnotation::from_bbox(47.0, 44.0, 59.0, 52.0)),
            (53.0, 48.0)
        );
    }

    #[test]
    fn translate_single_row() {
        let img = gray(3, 1, &[10, 20, 30]);
        assert_eq!(reds(&translate_edge_replicate(&img, 1, 0).unwrap()), vec![10, 10, 20]);
        assert_eq!(reds(&translate_edge_replicate(&img, -1, 0).unwrap()), vec![20, 30, 30]);
        assert_eq!(translate_edge_replicate(&img, 0, 0).unwrap(), img);
    }

    #[test]
    fn translate_matches_clamp_oracle() {
        let values: Vec<u8> = (1..=9).collect();
        let img = gray(3, 3, &values);
        let out = translate_edge_replicate(&img, -1, 1).unwrap();
        // Oracle: out(x, y) = in(clamp(x + 1), clamp(y - 1)).
        let expected = [[2, 3, 3], [2, 3, 3], [5, 6, 6]];
        for y in 0..3 {
            for x in 0..3 {
                assert_eq!(out.channel_value(Channel::Red, x, y), expected[y as usize][x as usize]);
            }
        }
    }

    #[test]
    fn translate_rejects_oversized_shift() {
        let img = RasterImage::new(4, 2);
        assert!(matches!(
            translate_edge_replicate(&img, 4, 0),
            Err(RasterError::ShiftTooLarge { .. })
        ));
        assert!(matches!(
            translate_edge_replicate(&img, 0, -2),
            Err(RasterError::ShiftTooLarge { .. })
        ));
        assert!(translate_edge_replicate(&img, -3, 1).is_ok());
    }

    #[test]
    fn alignment_offset_arithmetic() {
        let anchor = (50.0, 50.0);
        let face = FaceAnnotation::from_bbox(47.0, 44.0, 59.0, 52.0);
        assert_eq!(alignment_offset(anchor, &face), (-3, 2));
    }

    #[test]
    fn align_checks_inputs() {
        let a = RasterImage::new(4, 4);
        let b = RasterImage::new(5, 4);
        let face = FaceAnnotation::from_bbox(0.0, 0.0, 2.0, 2.0);
        assert!(matches!(
            align_sequence(&[a.clone(), b], &[face.clone(), face.clone()]),
            Err(RasterError::DimensionMismatch(..))
        ));
        assert!(matches!(
            align_sequence(std::slice::from_ref(&a), &[face.clone(), face]),
            Err(RasterError::LengthMismatch { .. })
        ));
        assert!(align_sequence(&[], &[]).unwrap().is_empty());
    }

    #[test]
    fn blend_endpoints_and_midpoint() {
        let a = gray(2, 1, &[0, 200]);
        let b = gray(2, 1, &[100, 201]);
        assert_eq!(reds(&blend_frames(&a, &b, 0.5).unwrap()), vec![50, 201]);
        assert_eq!(blend_frames(&a, &b, 0.0).unwrap(), a);
        assert_eq!(blend_frames(&a, &b, 1.0).unwrap(), b);
        assert!(matches!(blend_frames(&a, &b, 1.5), Err(RasterError::InvalidAlpha(_))));
        assert!(matches!(
            blend_frames(&a, &RasterImage::new(1, 1), 0.5),
            Err(RasterError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn png_round_trip_and_listing() {
        let dir = tempfile::tempdir().unwrap();
        let img = RasterImage::from_fn(5, 3, |x, y| [x as u8 * 40, y as u8 * 80, 7]);
        write_frames(dir.path(), &[img.clone(), RasterImage::new(5, 3)]).unwrap();
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let listed = list_frames(dir.path()).unwrap();
        assert_eq!(listed, vec![frame_path(dir.path(), 0), frame_path(dir.path(), 1)]);
        assert_eq!(RasterImage::read_png(&listed[0]).unwrap(), img);
    }
}
