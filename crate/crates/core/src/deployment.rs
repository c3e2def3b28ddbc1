//! Planar base-station deployments and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Mean Earth radius in meters, for the local projection of `lon,lat` input.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Region a deployment lives in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Bounds {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disc { cx: f64, cy: f64, radius: f64 },
}

impl Bounds {
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 >= x0 && y1 >= y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!("degenerate rectangle [{x0}, {x1}] × [{y0}, {y1}]")));
        }
        Ok(Bounds::Rect { x0, y0, x1, y1 })
    }

    pub fn disc(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || ![cx, cy, radius].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid disc radius {radius}")));
        }
        Ok(Bounds::Disc { cx, cy, radius })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Bounds::Rect { x0, y0, x1, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Bounds::Disc { cx, cy, radius } => (x - cx).hypot(y - cy) <= radius * (1.0 + 1e-12),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Bounds::Rect { x0, y0, x1, y1 } => (x1 - x0) * (y1 - y0),
            Bounds::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn center(&self) -> (f64, f64) {
        match *self {
            Bounds::Rect { x0, y0, x1, y1 } => (0.5 * (x0 + x1), 0.5 * (y0 + y1)),
            Bounds::Disc { cx, cy, .. } => (cx, cy),
        }
    }

    /// Linear shrink about the center by `factor ∈ (0, 1]`.
    pub fn shrink(&self, factor: f64) -> Self {
        let (cx, cy) = self.center();
        match *self {
            Bounds::Rect { x0, y0, x1, y1 } => Bounds::Rect {
                x0: cx + (x0 - cx) * factor,
                y0: cy + (y0 - cy) * factor,
                x1: cx + (x1 - cx) * factor,
                y1: cy + (y1 - cy) * factor,
            },
            Bounds::Disc { radius, .. } => Bounds::Disc { cx, cy, radius: radius * factor },
        }
    }

    /// A uniform point inside the region.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            Bounds::Rect { x0, y0, x1, y1 } => {
                (x0 + (x1 - x0) * rng.random::<f64>(), y0 + (y1 - y0) * rng.random::<f64>())
            }
            Bounds::Disc { cx, cy, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let phi = std::f64::consts::TAU * rng.random::<f64>();
                (cx + r * phi.cos(), cy + r * phi.sin())
            }
        }
    }
}

/// A finite set of base-station positions in meters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deployment {
    points: Vec<(f64, f64)>,
    bounds: Bounds,
}

impl Deployment {
    /// Fails if a point is non-finite or outside `bounds`.
    pub fn new(points: Vec<(f64, f64)>, bounds: Bounds) -> Result<Self> {
        for &(x, y) in &points {
            if !x.is_finite() || !y.is_finite() || !bounds.contains(x, y) {
                return Err(Error::OutsideBounds(x, y));
            }
        }
        Ok(Self { points, bounds })
    }

    /// Uses the bounding box of the points as the region.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDeployment);
        }
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for &(x, y) in &points {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Format(format!("non-finite coordinate ({x}, {y})")));
            }
            b = [b[0].min(x), b[1].min(y), b[2].max(x), b[3].max(y)];
        }
        let bounds = Bounds::rect(b[0], b[1], b[2], b[3])?;
        Ok(Self { points, bounds })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same deployment shifted by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let points = self.points.iter().map(|&(x, y)| (x + dx, y + dy)).collect();
        let bounds = match self.bounds {
            Bounds::Rect { x0, y0, x1, y1 } => Bounds::Rect { x0: x0 + dx, y0: y0 + dy, x1: x1 + dx, y1: y1 + dy },
            Bounds::Disc { cx, cy, radius } => Bounds::Disc { cx: cx + dx, cy: cy + dy, radius },
        };
        Self { points, bounds }
    }

    /// Reads a CSV with header `x_m,y_m`, or `lon,lat` when `geo` is set
    /// (degrees, projected equirectangularly about the centroid).
    pub fn read_csv<R: Read>(reader: R, geo: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected: [&str; 2] = if geo { ["lon", "lat"] } else { ["x_m", "y_m"] };
        let cols: Vec<usize> = expected
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == *name)
                    .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
            })
            .collect::<Result<_>>()?;
        let mut points = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                let raw = rec.get(cols[i]).unwrap_or("");
                raw.parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: `{raw}` is not a number", line + 2)))
            };
            points.push((field(0)?, field(1)?));
        }
        if geo {
            points = project_equirectangular(&points)?;
        }
        Self::from_points(points)
    }

    pub fn read_csv_path(path: &Path, geo: bool) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, geo)
    }

    /// Writes `x_m,y_m` rows with shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = String::with_capacity(16 + 24 * self.points.len());
        out.push_str("x_m,y_m\n");
        for &(x, y) in &self.points {
            out.push_str(&format!("{x:?},{y:?}\n"));
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }
}

/// Local equirectangular projection of `(lon, lat)` degrees to meters
/// about the centroid.
pub fn project_equirectangular(lonlat: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if lonlat.is_empty() {
        return Err(Error::EmptyDeployment);
    }
    for &(lon, lat) in lonlat {
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::Format(format!("({lon}, {lat}) is not a longitude/latitude pair")));
        }
    }
    let n = lonlat.len() as f64;
    let lon0 = lonlat.iter().map(|p| p.0).sum::<f64>() / n;
    let lat0 = lonlat.iter().map(|p| p.1).sum::<f64>() / n;
    let k = lat0.to_radians().cos();
    Ok(lonlat
        .iter()
        .map(|&(lon, lat)| {
            (EARTH_RADIUS_M * (lon - lon0).to_radians() * k, EARTH_RADIUS_M * (lat - lat0).to_radians())
        })
        .collect())
}
