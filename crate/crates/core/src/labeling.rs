//! Human-drawn region labels.
//!
//! A label file is UTF-8 JSON:
//!
//! ```json
//! {
//!   "video_ref": "subject_001/overlap/manifest.json",
//!   "author": "rr",
//!   "created_at": "2021-09-30T10:00:00Z",
//!   "regions": [
//!     {"id": "v1", "label": "vein", "polygon": [[10, 10], [20, 10], [20, 18]],
//!      "frame_range": [0, 300]}
//!   ]
//! }
//! ```
//!
//! Coordinates are in the padded (magnified / overlap) frame space. A pixel
//! `(x, y)` belongs to a region when its center `(x + 0.5, y + 0.5)` is
//! inside the polygon under the even-odd rule. `frame_range` is half-open
//! and defaults to the whole video.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// The four motion categories. The declaration order is the fixed class
/// order used for confusion matrices and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionLabel {
    HandFinger,
    Vein,
    Background,
    Respiration,
}

impl MotionLabel {
    pub const ALL: [MotionLabel; 4] = [
        MotionLabel::HandFinger,
        MotionLabel::Vein,
        MotionLabel::Background,
        MotionLabel::Respiration,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MotionLabel::HandFinger => "hand_finger",
            MotionLabel::Vein => "vein",
            MotionLabel::Background => "background",
            MotionLabel::Respiration => "respiration",
        }
    }
}

impl fmt::Display for MotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown motion label `{0}` (expected hand_finger, vein, background or respiration)")]
pub struct UnknownLabel(pub String);

impl FromStr for MotionLabel {
    type Err = UnknownLabel;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MotionLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub id: String,
    pub label: MotionLabel,
    pub polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_range: Option<[usize; 2]>,
}

impl RegionLabel {
    /// Frames covered by the region in a video of `frame_count` frames.
    pub fn frames(&self, frame_count: usize) -> Range<usize> {
        match self.frame_range {
            Some([start, end]) => start..end,
            None => 0..frame_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelFile {
    pub video_ref: String,
    pub author: String,
    pub created_at: String,
    #[serde(default)]
    pub regions: Vec<RegionLabel>,
}

/// One validation failure. `region` is the region id, or `#<index>` when the
/// region has no usable id; `None` only for file-level problems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub region: Option<String>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.region {
            Some(r) => write!(f, "region `{r}`: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

struct Violations(Vec<Violation>);

impl Violations {
    fn file(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Violation {
            region: None,
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn region(&mut self, region: &str, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            region: Some(region.to_string()),
            field: field.into(),
            message: message.into(),
        });
    }
}

/// Checks a parsed label file against a video of `dims` and `frame_count`.
pub fn validate_label_file(
    file: LabelFile,
    dims: (u32, u32),
    frame_count: usize,
) -> Result<LabelFile, Vec<Violation>> {
    let mut v = Violations(Vec::new());
    let mut seen = HashSet::new();
    for (index, region) in file.regions.iter().enumerate() {
        let id = if region.id.is_empty() {
            let fallback = format!("#{index}");
            v.region(&fallback, "id", "must not be empty");
            fallback
        } else {
            region.id.clone()
        };
        if !seen.insert(id.clone()) {
            v.region(&id, "id", "duplicate region id");
        }
        check_polygon(&mut v, &id, &region.polygon, dims);
        if let Some(range) = region.frame_range {
            check_range(&mut v, &id, range, frame_count);
        }
    }
    if v.0.is_empty() {
        Ok(file)
    } else {
        Err(v.0)
    }
}

/// Validates raw JSON text. Never panics: any input yields either a valid
/// [`LabelFile`] or a non-empty list of violations.
pub fn validate_label_json(
    text: &str,
    dims: (u32, u32),
    frame_count: usize,
) -> Result<LabelFile, Vec<Violation>> {
    let mut v = Violations(Vec::new());
    let root: Value = match serde_json::from_str(text) {
        Ok(root) => root,
        Err(e) => {
            v.file("json", e.to_string());
            return Err(v.0);
        }
    };
    let Some(obj) = root.as_object() else {
        v.file("json", "top level must be an object");
        return Err(v.0);
    };
    let mut string_field = |name: &str| match obj.get(name) {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            v.file(name, "must be a string");
            String::new()
        }
        None => {
            v.file(name, "missing");
            String::new()
        }
    };
    let video_ref = string_field("video_ref");
    let author = string_field("author");
    let created_at = string_field("created_at");

    let raw_regions = match obj.get("regions") {
        None => &[][..],
        Some(Value::Array(items)) => items.as_slice(),
        Some(_) => {
            v.file("regions", "must be an array");
            &[][..]
        }
    };

    let mut regions = Vec::with_capacity(raw_regions.len());
    let mut seen = HashSet::new();
    for (index, raw) in raw_regions.iter().enumerate() {
        let fallback = format!("#{index}");
        let Some(r) = raw.as_object() else {
            v.region(&fallback, "region", "must be an object");
            continue;
        };
        let id = match r.get("id") {
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            Some(Value::String(_)) => {
                v.region(&fallback, "id", "must not be empty");
                fallback.clone()
            }
            Some(_) => {
                v.region(&fallback, "id", "must be a string");
                fallback.clone()
            }
            None => {
                v.region(&fallback, "id", "missing");
                fallback.clone()
            }
        };
        if !seen.insert(id.clone()) {
            v.region(&id, "id", "duplicate region id");
        }

        let label = match r.get("label") {
            Some(Value::String(s)) => match s.parse::<MotionLabel>() {
                Ok(l) => Some(l),
                Err(e) => {
                    v.region(&id, "label", e.to_string());
                    None
                }
            },
            Some(_) => {
                v.region(&id, "label", "must be a string");
                None
            }
            None => {
                v.region(&id, "label", "missing");
                None
            }
        };

        let polygon = match r.get("polygon") {
            Some(Value::Array(points)) => {
                let mut out = Vec::with_capacity(points.len());
                let mut ok = true;
                for (i, p) in points.iter().enumerate() {
                    match p.as_array().map(|a| a.as_slice()) {
                        Some([Value::Number(x), Value::Number(y)]) => {
                            match (x.as_f64(), y.as_f64()) {
                                (Some(x), Some(y)) => out.push([x, y]),
                                _ => {
                                    v.region(
                                        &id,
                                        format!("polygon[{i}]"),
                                        "coordinates must be finite numbers",
                                    );
                                    ok = false;
                                }
                            }
                        }
                        _ => {
                            v.region(&id, format!("polygon[{i}]"), "vertex must be [x, y]");
                            ok = false;
                        }
                    }
                }
                if ok {
                    check_polygon(&mut v, &id, &out, dims);
                }
                ok.then_some(out)
            }
            Some(_) => {
                v.region(&id, "polygon", "must be an array of [x, y] vertices");
                None
            }
            None => {
                v.region(&id, "polygon", "missing");
                None
            }
        };

        let frame_range = match r.get("frame_range") {
            None | Some(Value::Null) => Some(None),
            Some(Value::Array(a)) => match a.as_slice() {
                [s, e] => match (s.as_u64(), e.as_u64()) {
                    (Some(s), Some(e)) => {
                        let range = [s as usize, e as usize];
                        check_range(&mut v, &id, range, frame_count);
                        Some(Some(range))
                    }
                    _ => {
                        v.region(&id, "frame_range", "bounds must be non-negative integers");
                        None
                    }
                },
                _ => {
                    v.region(&id, "frame_range", "must be [start, end]");
                    None
                }
            },
            Some(_) => {
                v.region(&id, "frame_range", "must be [start, end]");
                None
            }
        };

        if let (Some(label), Some(polygon), Some(frame_range)) = (label, polygon, frame_range) {
            regions.push(RegionLabel {
                id,
                label,
                polygon,
                frame_range,
            });
        }
    }

    if v.0.is_empty() {
        Ok(LabelFile {
            video_ref,
            author,
            created_at,
            regions,
        })
    } else {
        Err(v.0)
    }
}

fn check_range(v: &mut Violations, id: &str, [start, end]: [usize; 2], frame_count: usize) {
    if start >= end {
        v.region(id, "frame_range", format!("empty range [{start}, {end})"));
    } else if end > frame_count {
        v.region(
            id,
            "frame_range",
            format!("end {end} exceeds frame count {frame_count}"),
        );
    }
}

fn check_polygon(v: &mut Violations, id: &str, polygon: &[[f64; 2]], (w, h): (u32, u32)) {
    if polygon.len() < 3 {
        v.region(
            id,
            "polygon",
            format!("needs at least 3 vertices, got {}", polygon.len()),
        );
        return;
    }
    let mut in_bounds = true;
    for (i, &[x, y]) in polygon.iter().enumerate() {
        if !(x.is_finite() && y.is_finite()) {
            v.region(id, format!("polygon[{i}]"), "coordinates must be finite");
            in_bounds = false;
        } else if x < 0.0 || y < 0.0 || x > w as f64 || y > h as f64 {
            v.region(
                id,
                format!("polygon[{i}]"),
                format!("vertex ({x}, {y}) outside {w}x{h} frame"),
            );
            in_bounds = false;
        }
    }
    if !in_bounds {
        return;
    }
    if let Err(e) = check_simple(polygon) {
        v.region(id, "polygon", e.to_string());
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PolygonError {
    #[error("needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("zero area")]
    ZeroArea,
    #[error("edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("non-finite coordinate")]
    NonFinite,
}

/// Shoelace signed area.
pub fn signed_area(polygon: &[[f64; 2]]) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|i| {
            let [x0, y0] = polygon[i];
            let [x1, y1] = polygon[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
        / 2.0
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_touch(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Rejects polygons with fewer than three vertices, zero area, or any pair
/// of edges meeting anywhere other than their shared vertex.
pub fn check_simple(polygon: &[[f64; 2]]) -> Result<(), PolygonError> {
    let n = polygon.len();
    if n < 3 {
        return Err(PolygonError::TooFewVertices(n));
    }
    if polygon.iter().flatten().any(|c| !c.is_finite()) {
        return Err(PolygonError::NonFinite);
    }
    let edge = |i: usize| (polygon[i], polygon[(i + 1) % n]);
    for i in 0..n {
        let (a, b) = edge(i);
        if a == b {
            return Err(PolygonError::SelfIntersecting(i, i));
        }
        for j in i + 1..n {
            let (c, d) = edge(j);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges share one vertex; they may only overlap if
                // they fold back along the same line.
                let (shared, other_i, other_j) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if orient(other_i, shared, other_j) == 0.0 {
                    let dot = (other_i[0] - shared[0]) * (other_j[0] - shared[0])
                        + (other_i[1] - shared[1]) * (other_j[1] - shared[1]);
                    if dot > 0.0 {
                        return Err(PolygonError::SelfIntersecting(i, j));
                    }
                }
            } else if segments_touch(a, b, c, d) {
                return Err(PolygonError::SelfIntersecting(i, j));
            }
        }
    }
    if signed_area(polygon).abs() <= 1e-12 {
        return Err(PolygonError::ZeroArea);
    }
    Ok(())
}

/// Integer pixel coordinate `(x, y)`.
pub type Pixel = (u32, u32);

/// Pixels of a `dims`-sized frame whose centers lie inside the region's
/// polygon (even-odd rule), in row-major order.
pub fn rasterize_region(
    region: &RegionLabel,
    dims: (u32, u32),
) -> Result<Vec<Pixel>, PolygonError> {
    rasterize_polygon(&region.polygon, dims)
}

pub fn rasterize_polygon(
    polygon: &[[f64; 2]],
    (w, h): (u32, u32),
) -> Result<Vec<Pixel>, PolygonError> {
    let n = polygon.len();
    if n < 3 {
        return Err(PolygonError::TooFewVertices(n));
    }
    if polygon.iter().flatten().any(|c| !c.is_finite()) {
        return Err(PolygonError::NonFinite);
    }
    if signed_area(polygon).abs() <= 1e-12 {
        return Err(PolygonError::ZeroArea);
    }
    let mut pixels = Vec::new();
    let mut crossings = Vec::with_capacity(n);
    for y in 0..h {
        let cy = y as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let [xi, yi] = polygon[i];
            let [xj, yj] = polygon[(i + n - 1) % n];
            if (yi > cy) != (yj > cy) {
                crossings.push((xj - xi) * (cy - yi) / (yj - yi) + xi);
            }
        }
        crossings.sort_by(f64::total_cmp);
        // A center is inside when an odd number of crossings lie strictly to
        // its right, i.e. it sits in [c[2k], c[2k + 1]).
        for pair in crossings.chunks_exact(2) {
            let (lo, hi) = (pair[0], pair[1]);
            // One pixel of slack absorbs rounding in `lo - 0.5`.
            let start = ((lo - 0.5).ceil() - 1.0).max(0.0);
            if start >= w as f64 {
                continue;
            }
            let mut x = start as u32;
            while x < w && (x as f64 + 0.5) < hi {
                if x as f64 + 0.5 >= lo {
                    pixels.push((x, y));
                }
                x += 1;
            }
        }
    }
    Ok(pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // W. Randolph Franklin's pnpoly, evaluated per pixel.
    fn pnpoly(poly: &[[f64; 2]], px: f64, py: f64) -> bool {
        let mut inside = false;
        let mut j = poly.len() - 1;
        for i in 0..poly.len() {
            let [xi, yi] = poly[i];
            let [xj, yj] = poly[j];
            if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    fn brute_force(poly: &[[f64; 2]], (w, h): (u32, u32)) -> Vec<Pixel> {
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if pnpoly(poly, x as f64 + 0.5, y as f64 + 0.5) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    fn region(id: &str, polygon: Vec<[f64; 2]>) -> RegionLabel {
        RegionLabel {
            id: id.into(),
            label: MotionLabel::Vein,
            polygon,
            frame_range: None,
        }
    }

    fn file(regions: Vec<RegionLabel>) -> LabelFile {
        LabelFile {
            video_ref: "v".into(),
            author: "a".into(),
            created_at: "2021-10-13T00:00:00Z".into(),
            regions,
        }
    }

    fn square() -> Vec<[f64; 2]> {
        vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]]
    }

    #[test]
    fn labels_parse_and_print() {
        for l in MotionLabel::ALL {
            assert_eq!(l.as_str().parse::<MotionLabel>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{l}\""));
        }
        assert!("tremor".parse::<MotionLabel>().is_err());
        assert_eq!(MotionLabel::Respiration.index(), 3);
    }

    #[test]
    fn empty_file_is_valid() {
        assert!(validate_label_file(file(vec![]), (64, 64), 10).is_ok());
    }

    #[test]
    fn vertex_out_of_bounds() {
        let r = region("r7", vec![[69.0, 0.0], [10.0, 10.0], [0.0, 10.0]]);
        let errs = validate_label_file(file(vec![r]), (64, 64), 10).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].region.as_deref(), Some("r7"));
        assert_eq!(errs[0].field, "polygon[0]");
    }

    #[test]
    fn duplicate_ids() {
        let errs = validate_label_file(
            file(vec![region("a", square()), region("a", square())]),
            (8, 8),
            2,
        )
        .unwrap_err();
        assert_eq!(errs[0].region.as_deref(), Some("a"));
        assert!(errs[0].message.contains("duplicate"));
    }

    #[test]
    fn bad_frame_ranges() {
        let mut r = region("late", square());
        r.frame_range = Some([5, 12]);
        let errs = validate_label_file(file(vec![r.clone()]), (8, 8), 10).unwrap_err();
        assert_eq!(errs[0].field, "frame_range");
        r.frame_range = Some([3, 3]);
        assert!(validate_label_file(file(vec![r.clone()]), (8, 8), 10).is_err());
        r.frame_range = Some([3, 10]);
        assert!(validate_label_file(file(vec![r]), (8, 8), 10).is_ok());
    }

    #[test]
    fn bowtie_is_rejected() {
        let bowtie = vec![[0.0, 0.0], [4.0, 4.0], [4.0, 0.0], [0.0, 4.0]];
        assert!(matches!(
            check_simple(&bowtie),
            Err(PolygonError::SelfIntersecting(..))
        ));
        let folded = vec![[0.0, 0.0], [4.0, 0.0], [2.0, 0.0], [2.0, 3.0]];
        assert!(check_simple(&folded).is_err());
        assert!(check_simple(&square()).is_ok());
        let concave = vec![[0.0, 0.0], [6.0, 0.0], [6.0, 6.0], [3.0, 2.0], [0.0, 6.0]];
        assert!(check_simple(&concave).is_ok());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let text = r#"{
            "video_ref": "s1/overlap/manifest.json",
            "author": "rr",
            "created_at": "2021-09-30T10:00:00Z",
            "regions": [
                {"id": "v1", "label": "vein", "polygon": [[1, 1], [5, 1], [5, 5]], "frame_range": [0, 4]},
                {"id": "h1", "label": "hand_finger", "polygon": [[0, 0], [8, 0], [8, 8], [0, 8]]}
            ]
        }"#;
        let f = validate_label_json(text, (8, 8), 4).unwrap();
        assert_eq!(f.regions.len(), 2);
        assert_eq!(f.regions[1].label, MotionLabel::HandFinger);
        assert_eq!(f.regions[1].frames(4), 0..4);
        let strict: LabelFile = serde_json::from_str(text).unwrap();
        assert_eq!(strict, f);
        let again = serde_json::to_string(&f).unwrap();
        assert_eq!(validate_label_json(&again, (8, 8), 4).unwrap(), f);
    }

    #[test]
    fn json_violations_name_regions() {
        let text = r#"{"video_ref": "v", "author": "a", "created_at": "t", "regions": [
            {"id": "x", "label": "tremor", "polygon": [[0, 0], [1, 0], [1, 1]]},
            {"label": "vein", "polygon": [[0, 0], [1, 0], [1, 1]]},
            {"id": "z", "label": "vein", "polygon": [[0, 0], [1, "a"], [1, 1]], "frame_range": [-1, 2]}
        ]}"#;
        let errs = validate_label_json(text, (8, 8), 4).unwrap_err();
        let regions: Vec<_> = errs.iter().map(|e| e.region.clone().unwrap()).collect();
        assert_eq!(regions, vec!["x", "#1", "z", "z"]);
        assert!(validate_label_json("not json", (8, 8), 4).unwrap_err()[0]
            .region
            .is_none());
    }

    #[test]
    fn square_rasterizes_to_sixteen_pixels() {
        let px = rasterize_region(&region("s", square()), (10, 10)).unwrap();
        let want: Vec<Pixel> = (0..4).flat_map(|y| (0..4).map(move |x| (x, y))).collect();
        assert_eq!(px, want);
        assert_eq!(px, brute_force(&square(), (10, 10)));
    }

    #[test]
    fn full_frame_and_degenerate() {
        let full = vec![[0.0, 0.0], [7.0, 0.0], [7.0, 5.0], [0.0, 5.0]];
        assert_eq!(rasterize_polygon(&full, (7, 5)).unwrap().len(), 35);
        let flat = vec![[0.0, 0.0], [2.0, 2.0], [4.0, 4.0]];
        assert_eq!(
            rasterize_polygon(&flat, (8, 8)),
            Err(PolygonError::ZeroArea)
        );
    }

    #[test]
    fn clipped_to_frame() {
        // Vertices beyond the frame are not rasterized outside it.
        let big = vec![[-3.0, -3.0], [20.0, -3.0], [20.0, 20.0], [-3.0, 20.0]];
        assert_eq!(rasterize_polygon(&big, (6, 4)).unwrap().len(), 24);
    }

    proptest! {
        #[test]
        fn matches_pnpoly(
            pts in prop::collection::vec((0.0f64..24.0, 0.0f64..24.0), 3..9)
        ) {
            let poly: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            prop_assume!(signed_area(&poly).abs() > 1e-9);
            // Self-intersecting input is fine here: the even-odd rule is
            // still well defined and both sides must agree.
            let got = rasterize_polygon(&poly, (24, 24)).unwrap();
            prop_assert_eq!(&got, &brute_force(&poly, (24, 24)));
            prop_assert_eq!(got, rasterize_polygon(&poly, (24, 24)).unwrap());
        }

        #[test]
        fn integer_vertices_match_pnpoly(
            pts in prop::collection::vec((0u32..12, 0u32..12), 3..7)
        ) {
            let poly: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x as f64, y as f64]).collect();
            prop_assume!(signed_area(&poly).abs() > 1e-9);
            prop_assert_eq!(rasterize_polygon(&poly, (12, 12)).unwrap(), brute_force(&poly, (12, 12)));
        }

        #[test]
        fn validation_is_total(text in ".{0,200}") {
            match validate_label_json(&text, (16, 16), 8) {
                Ok(_) => {}
                Err(v) => prop_assert!(!v.is_empty()),
            }
        }
    }
}
