//! Finite spaces and rasterised plane regions.
//!
//! Rasters use pixel-centre membership and 4-connectivity throughout: the
//! complement flood fill, the boundary test and hole detection all look at
//! the four axis neighbours of a pixel. Every raster keeps a one-pixel empty
//! margin so the unbounded complement component always reaches the border.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::report::{Check, ValidationReport};

const METRIC_TOL: f64 = 1e-12;

/// A finite (hence compact Hausdorff) space with optional planar coordinates
/// and an optional explicit metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    pub points: Vec<String>,
    #[serde(default, with = "crate::json::complex_vec_opt", skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
}

impl FiniteSpace {
    /// Points of the plane with their Euclidean metric, labelled `x0, x1, …`.
    pub fn from_coords(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParams("space must be nonempty".into()));
        }
        let points = (0..coords.len()).map(|i| format!("x{i}")).collect();
        Ok(FiniteSpace { points, coords: Some(coords), metric: None })
    }

    /// Points of the real line.
    pub fn on_line(xs: &[f64]) -> Result<Self> {
        Self::from_coords(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// An abstract metric space; fails unless the metric validates.
    pub fn from_metric(points: Vec<String>, metric: Vec<Vec<f64>>) -> Result<Self> {
        let space = FiniteSpace { points, coords: None, metric: Some(metric) };
        let report = space.validate_metric()?;
        if !report.passed() {
            return Err(Error::InvalidParams(format!("invalid metric: {:?}", report.failures().next())));
        }
        Ok(space)
    }

    /// A space with no geometry at all.
    pub fn discrete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("space must be nonempty".into()));
        }
        Ok(FiniteSpace { points: (0..n).map(|i| format!("x{i}")).collect(), coords: None, metric: None })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_metric(&self) -> bool {
        self.metric.is_some() || self.coords.is_some()
    }

    pub fn coord(&self, x: usize) -> Result<Complex64> {
        let coords = self.coords.as_ref().ok_or(Error::MissingCoords)?;
        coords.get(x).copied().ok_or(Error::UnknownPoint(x))
    }

    /// `d(x, y)`: the explicit metric when present, else Euclidean distance.
    pub fn distance(&self, x: usize, y: usize) -> Result<f64> {
        let n = self.len();
        if x >= n {
            return Err(Error::UnknownPoint(x));
        }
        if y >= n {
            return Err(Error::UnknownPoint(y));
        }
        match (&self.metric, &self.coords) {
            (Some(m), _) => Ok(m[x][y]),
            (None, Some(c)) => Ok((c[x] - c[y]).norm()),
            (None, None) => Err(Error::MissingMetric),
        }
    }

    /// Checks `d(x,x)=0`, symmetry, positivity and the triangle inequality;
    /// a failure names the first violating pair or triple.
    pub fn validate_metric(&self) -> Result<ValidationReport> {
        let n = self.len();
        if let Some(m) = &self.metric {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: m.len() });
            }
        }
        if !self.has_metric() {
            return Err(Error::MissingMetric);
        }
        let d = |x, y| self.distance(x, y).expect("indices in range");
        let mut report = ValidationReport::new("metric");

        let diag = (0..n).find(|&x| d(x, x).abs() > METRIC_TOL);
        report.push(match diag {
            Some(x) => Check::fail("zero_diagonal", d(x, x).abs(), vec![x], format!("d({0},{0}) ≠ 0", self.points[x])),
            None => Check::pass("zero_diagonal", 0.0),
        });

        let mut sym = None;
        let mut pos = None;
        for x in 0..n {
            for y in (x + 1)..n {
                if sym.is_none() && (d(x, y) - d(y, x)).abs() > METRIC_TOL {
                    sym = Some((x, y));
                }
                if pos.is_none() && !(d(x, y) > 0.0) {
                    pos = Some((x, y));
                }
            }
        }
        report.push(match sym {
            Some((x, y)) => Check::fail("symmetry", (d(x, y) - d(y, x)).abs(), vec![x, y], format!("d({0},{1}) ≠ d({1},{0})", self.points[x], self.points[y])),
            None => Check::pass("symmetry", 0.0),
        });
        report.push(match pos {
            Some((x, y)) => Check::fail("positivity", d(x, y), vec![x, y], format!("d({},{}) is not positive", self.points[x], self.points[y])),
            None => Check::pass("positivity", 0.0),
        });

        let mut tri = None;
        'outer: for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let excess = d(a, c) - d(a, b) - d(b, c);
                    if excess > METRIC_TOL {
                        tri = Some((a, b, c, excess));
                        break 'outer;
                    }
                }
            }
        }
        report.push(match tri {
            Some((a, b, c, e)) => Check::fail(
                "triangle",
                e,
                vec![a, b, c],
                format!("d({0},{2}) > d({0},{1}) + d({1},{2})", self.points[a], self.points[b], self.points[c]),
            ),
            None => Check::pass("triangle", 0.0),
        });
        Ok(report)
    }

    /// Disjoint union of point lists (coordinates are kept when both have them).
    pub fn concat(&self, other: &FiniteSpace) -> FiniteSpace {
        let points = self.points.iter().chain(&other.points).cloned().collect();
        let coords = match (&self.coords, &other.coords) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        FiniteSpace { points, coords, metric: None }
    }

    /// Same point set, compared by labels and coordinates.
    pub fn same_points(&self, other: &FiniteSpace) -> bool {
        self.points == other.points && self.coords == other.coords
    }
}

/// Plane shapes used to build rasters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Disk {
        #[serde(with = "crate::json::complex")]
        center: Complex64,
        radius: f64,
    },
    Annulus {
        #[serde(with = "crate::json::complex")]
        center: Complex64,
        inner: f64,
        outer: f64,
    },
    Union(Vec<Shape>),
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Disk { radius, .. } if !(*radius > 0.0) => Err(Error::InvalidRadii(format!("disk radius {radius} must be positive"))),
            Shape::Annulus { inner, outer, .. } if !(*outer > *inner && *inner > 0.0) => {
                Err(Error::InvalidRadii(format!("annulus needs outer > inner > 0, got inner {inner}, outer {outer}")))
            }
            Shape::Union(parts) if parts.is_empty() => Err(Error::InvalidRadii("empty union".into())),
            Shape::Union(parts) => parts.iter().try_for_each(Shape::validate),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        const EPS: f64 = 1e-12;
        match self {
            Shape::Disk { center, radius } => (z - center).norm() <= radius + EPS,
            Shape::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                r >= inner - EPS && r <= outer + EPS
            }
            Shape::Union(parts) => parts.iter().any(|s| s.contains(z)),
        }
    }

    /// `(xmin, xmax, ymin, ymax)`.
    fn bbox(&self) -> (f64, f64, f64, f64) {
        match self {
            Shape::Disk { center, radius: r } | Shape::Annulus { center, outer: r, .. } => {
                (center.re - r, center.re + r, center.im - r, center.im + r)
            }
            Shape::Union(parts) => parts.iter().map(Shape::bbox).fold(
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
                |a, b| (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3)),
            ),
        }
    }
}

/// A bitmap plane region. Pixel `(col, row)` has centre
/// `origin + pixel_size · (col + i·row)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterRegion {
    width: usize,
    height: usize,
    cells: Vec<bool>,
    pub origin: Complex64,
    pub pixel_size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl RasterRegion {
    /// Fails unless the region is nonempty and keeps an empty one-pixel margin.
    pub fn new(width: usize, height: usize, cells: Vec<bool>, origin: Complex64, pixel_size: f64) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, found: cells.len() });
        }
        if !(pixel_size > 0.0) {
            return Err(Error::InvalidParams("pixel_size must be positive".into()));
        }
        let r = RasterRegion { width, height, cells, origin, pixel_size };
        if r.count() == 0 {
            return Err(Error::InvalidParams("raster region is empty".into()));
        }
        let margin_set = (0..width).any(|c| r.get(c, 0) || r.get(c, height - 1))
            || (0..height).any(|row| r.get(0, row) || r.get(width - 1, row));
        if margin_set {
            return Err(Error::InvalidParams("raster must keep an empty one-pixel margin".into()));
        }
        Ok(r)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn center(&self, col: usize, row: usize) -> Complex64 {
        self.origin + Complex64::new(col as f64, row as f64) * self.pixel_size
    }

    /// Pixel containing `z`, if inside the grid.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let rel = (z - self.origin) / self.pixel_size;
        let (c, r) = (rel.re.round(), rel.im.round());
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((c as usize, r as usize))
    }

    /// True when the pixel containing `z`, or one of its 8 neighbours, is set.
    pub fn near(&self, z: Complex64) -> bool {
        let Some((c, r)) = self.pixel_of(z) else { return false };
        self.neighbors(c, r, Connectivity::Eight).any(|(nc, nr)| self.get(nc, nr)) || self.get(c, r)
    }

    fn neighbors(&self, col: usize, row: usize, conn: Connectivity) -> impl Iterator<Item = (usize, usize)> + '_ {
        const FOUR: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const EIGHT: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        let offsets: &'static [(i64, i64)] = match conn {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        };
        let (w, h) = (self.width as i64, self.height as i64);
        offsets.iter().filter_map(move |(dc, dr)| {
            let (c, r) = (col as i64 + dc, row as i64 + dr);
            (c >= 0 && r >= 0 && c < w && r < h).then_some((c as usize, r as usize))
        })
    }

    /// Set pixels with all four axis neighbours set.
    pub fn is_interior_pixel(&self, col: usize, row: usize) -> bool {
        self.get(col, row) && self.neighbors(col, row, Connectivity::Four).all(|(c, r)| self.get(c, r))
    }

    fn with_cells(&self, cells: Vec<bool>) -> RasterRegion {
        RasterRegion { cells, ..self.clone() }
    }

    pub fn is_subset_of(&self, other: &RasterRegion) -> bool {
        self.cells.len() == other.cells.len() && self.cells.iter().zip(&other.cells).all(|(a, b)| !a || *b)
    }

    /// Number of connected components of the set (`value = true`) or unset
    /// (`value = false`) pixels.
    pub fn count_components(&self, value: bool, conn: Connectivity) -> usize {
        count_components(self.width, self.height, |c, r| self.get(c, r) == value, conn)
    }
}

/// Connected-component count of a predicate on a `width × height` grid.
pub fn count_components(width: usize, height: usize, mask: impl Fn(usize, usize) -> bool, conn: Connectivity) -> usize {
    let probe = RasterRegion { width, height, cells: vec![false; width * height], origin: Complex64::new(0.0, 0.0), pixel_size: 1.0 };
    let mut seen = vec![false; width * height];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..width * height {
        let (c0, r0) = (start % width, start / width);
        if seen[start] || !mask(c0, r0) {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back((c0, r0));
        while let Some((c, r)) = queue.pop_front() {
            for (nc, nr) in probe.neighbors(c, r, conn) {
                let idx = nr * width + nc;
                if !seen[idx] && mask(nc, nr) {
                    seen[idx] = true;
                    queue.push_back((nc, nr));
                }
            }
        }
    }
    count
}

/// Rasterises `shape` with `resolution` pixels per unit length. Pixel centres
/// lie on the lattice `(ℤ + iℤ) / resolution`, so shapes with the same
/// bounding box share their grid.
pub fn raster_from_shape(shape: &Shape, resolution: f64) -> Result<RasterRegion> {
    shape.validate()?;
    if !(resolution >= 8.0) {
        return Err(Error::InvalidParams(format!("resolution {resolution} must be at least 8")));
    }
    let ps = 1.0 / resolution;
    let (xmin, xmax, ymin, ymax) = shape.bbox();
    let c0 = (xmin / ps).floor() as i64 - 2;
    let c1 = (xmax / ps).ceil() as i64 + 2;
    let r0 = (ymin / ps).floor() as i64 - 2;
    let r1 = (ymax / ps).ceil() as i64 + 2;
    let width = (c1 - c0 + 1) as usize;
    let height = (r1 - r0 + 1) as usize;
    let origin = Complex64::new(c0 as f64 * ps, r0 as f64 * ps);
    let cells = (0..height)
        .flat_map(|r| (0..width).map(move |c| (c, r)))
        .map(|(c, r)| shape.contains(origin + Complex64::new(c as f64, r as f64) * ps))
        .collect();
    RasterRegion::new(width, height, cells, origin, ps)
}

/// `R` together with every bounded component of its complement: the
/// complement is flood-filled from the border and unreached pixels are set.
pub fn polynomial_hull_raster(region: &RasterRegion) -> RasterRegion {
    let (w, h) = (region.width, region.height);
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    for c in 0..w {
        for r in [0, h - 1] {
            if !region.get(c, r) && !outside[r * w + c] {
                outside[r * w + c] = true;
                queue.push_back((c, r));
            }
        }
    }
    for r in 0..h {
        for c in [0, w - 1] {
            if !region.get(c, r) && !outside[r * w + c] {
                outside[r * w + c] = true;
                queue.push_back((c, r));
            }
        }
    }
    while let Some((c, r)) = queue.pop_front() {
        for (nc, nr) in region.neighbors(c, r, Connectivity::Four) {
            let idx = nr * w + nc;
            if !outside[idx] && !region.get(nc, nr) {
                outside[idx] = true;
                queue.push_back((nc, nr));
            }
        }
    }
    region.with_cells(outside.into_iter().map(|o| !o).collect())
}

/// The rationally convex hull of a plane set is the set itself.
pub fn rational_hull_raster(region: &RasterRegion) -> RasterRegion {
    region.clone()
}

/// Set pixels with at least one unset 4-neighbour, as a raster mask.
pub fn boundary_mask(region: &RasterRegion) -> Vec<bool> {
    (0..region.height)
        .flat_map(|r| (0..region.width).map(move |c| (c, r)))
        .map(|(c, r)| region.get(c, r) && !region.is_interior_pixel(c, r))
        .collect()
}

/// Centres of the topological-boundary pixels, in row-major order.
pub fn topological_boundary_raster(region: &RasterRegion) -> Vec<Complex64> {
    boundary_mask(region)
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| region.center(i % region.width, i / region.width))
        .collect()
}

/// Discretisations of a raster region into a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStrategy {
    /// `n` boundary pixels, roughly equally spaced in angle about the centroid.
    BoundaryUniform { n: usize },
    /// Lattice points `step·(a + ib)` lying on interior pixels.
    InteriorGrid { step: f64 },
    /// `c + r·exp(2πik/n)`, which must lie in the region (up to one pixel).
    Circle {
        #[serde(with = "crate::json::complex")]
        center: Complex64,
        radius: f64,
        n: usize,
    },
}

impl SampleStrategy {
    fn prefix(&self) -> &'static str {
        match self {
            SampleStrategy::BoundaryUniform { .. } => "b",
            SampleStrategy::InteriorGrid { .. } => "g",
            SampleStrategy::Circle { .. } => "c",
        }
    }
}

pub fn sample_raster(region: &RasterRegion, strategy: &SampleStrategy) -> Result<FiniteSpace> {
    let points: Vec<Complex64> = match strategy {
        SampleStrategy::BoundaryUniform { n } => {
            let boundary = topological_boundary_raster(region);
            if *n == 0 || boundary.len() < *n {
                return Err(Error::EmptySample(format!("{} boundary pixels, {n} requested", boundary.len())));
            }
            let set: Vec<Complex64> = (0..region.height)
                .flat_map(|r| (0..region.width).map(move |c| (c, r)))
                .filter(|&(c, r)| region.get(c, r))
                .map(|(c, r)| region.center(c, r))
                .collect();
            let centroid = set.iter().sum::<Complex64>() / set.len() as f64;
            let mut sorted = boundary;
            sorted.sort_by(|a, b| {
                let (pa, pb) = ((a - centroid).arg(), (b - centroid).arg());
                pa.total_cmp(&pb).then((a - centroid).norm().total_cmp(&(b - centroid).norm()))
            });
            (0..*n).map(|k| sorted[k * sorted.len() / n]).collect()
        }
        SampleStrategy::InteriorGrid { step } => {
            if !(*step > 0.0) {
                return Err(Error::InvalidParams("grid step must be positive".into()));
            }
            let lo = region.origin;
            let hi = region.center(region.width - 1, region.height - 1);
            let (a0, a1) = ((lo.re / step).ceil() as i64, (hi.re / step).floor() as i64);
            let (b0, b1) = ((lo.im / step).ceil() as i64, (hi.im / step).floor() as i64);
            let mut pts = Vec::new();
            for b in b0..=b1 {
                for a in a0..=a1 {
                    let z = Complex64::new(a as f64 * step, b as f64 * step);
                    if let Some((c, r)) = region.pixel_of(z) {
                        if region.is_interior_pixel(c, r) {
                            pts.push(z);
                        }
                    }
                }
            }
            pts
        }
        SampleStrategy::Circle { center, radius, n } => {
            if *n == 0 || !(*radius > 0.0) {
                return Err(Error::InvalidParams("circle needs n >= 1 and radius > 0".into()));
            }
            let pts: Vec<Complex64> = (0..*n)
                .map(|k| center + Complex64::from_polar(*radius, 2.0 * PI * k as f64 / *n as f64))
                .collect();
            if let Some(bad) = pts.iter().position(|z| !region.near(*z)) {
                return Err(Error::EmptySample(format!("circle sample {bad} at {} lies outside the region", pts[bad])));
            }
            pts
        }
    };
    if points.is_empty() {
        return Err(Error::EmptySample(format!("{strategy:?} produced no points")));
    }
    let mut space = FiniteSpace::from_coords(points)?;
    let prefix = strategy.prefix();
    for (i, p) in space.points.iter_mut().enumerate() {
        *p = format!("{prefix}{i}");
    }
    Ok(space)
}

/// Plain PGM (`P2`) with the given gray level per pixel. The first line of
/// pixel data is the top row (largest imaginary part).
pub fn write_pgm(width: usize, height: usize, levels: &[u8]) -> String {
    let mut out = format!("P2\n{width} {height}\n255\n");
    for r in (0..height).rev() {
        let row: Vec<String> = (0..width).map(|c| levels[r * width + c].to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Sidecar metadata for a raster PGM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterSidecar {
    pub origin: [f64; 2],
    pub pixel_size: f64,
}

impl RasterRegion {
    /// `P2` encoding with 0 = unset and 255 = set.
    pub fn to_pgm(&self) -> String {
        let levels: Vec<u8> = self.cells.iter().map(|&c| if c { 255 } else { 0 }).collect();
        write_pgm(self.width, self.height, &levels)
    }

    pub fn sidecar(&self) -> RasterSidecar {
        RasterSidecar { origin: [self.origin.re, self.origin.im], pixel_size: self.pixel_size }
    }

    pub fn from_pgm(text: &str, sidecar: &RasterSidecar) -> Result<Self> {
        let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
        let mut next = |what: &str| tokens.next().ok_or_else(|| Error::Parse(format!("missing {what}")));
        if next("magic")? != "P2" {
            return Err(Error::Parse("expected P2 magic".into()));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
        let width = num(next("width")?)?;
        let height = num(next("height")?)?;
        let maxval = num(next("maxval")?)?;
        let mut cells = vec![false; width * height];
        for r in (0..height).rev() {
            for c in 0..width {
                cells[r * width + c] = num(next("pixel")?)? * 2 > maxval;
            }
        }
        RasterRegion::new(width, height, cells, Complex64::new(sidecar.origin[0], sidecar.origin[1]), sidecar.pixel_size)
    }
}
