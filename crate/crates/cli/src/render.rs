//! Deterministic SVG rendering of maps, scenarios, and driving paths.
//!
//! All coordinates are written with fixed precision so identical inputs
//! produce byte-identical files.

use pathdrift_core::oracle::{covered_grids, GridSpec};
use pathdrift_core::scenario::{DrivingPath, RoadMap, Scenario};
use pathdrift_core::Point2;
use std::fmt::Write;

const MARGIN: f64 = 6.0;
const SCALE: f64 = 8.0;

pub struct RenderOptions {
    pub grid_overlay: bool,
    pub grid_cell: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            grid_overlay: false,
            grid_cell: 2.0,
        }
    }
}

struct Frame {
    min: Point2,
    max: Point2,
}

impl Frame {
    fn of(map: &RoadMap) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for lane in &map.lanes {
            for p in &lane.centerline {
                min.x = min.x.min(p.x - 0.5 * lane.width_m);
                min.y = min.y.min(p.y - 0.5 * lane.width_m);
                max.x = max.x.max(p.x + 0.5 * lane.width_m);
                max.y = max.y.max(p.y + 0.5 * lane.width_m);
            }
        }
        Self { min, max }
    }

    /// Map world coordinates to SVG coordinates (y grows downward).
    fn tx(&self, p: &Point2) -> (f64, f64) {
        (
            (p.x - self.min.x + MARGIN) * SCALE,
            (self.max.y - p.y + MARGIN) * SCALE,
        )
    }

    fn size(&self) -> (f64, f64) {
        (
            (self.max.x - self.min.x + 2.0 * MARGIN) * SCALE,
            (self.max.y - self.min.y + 2.0 * MARGIN) * SCALE,
        )
    }
}

fn fmt_pt(v: f64) -> String {
    format!("{v:.2}")
}

fn polyline(frame: &Frame, pts: impl Iterator<Item = Point2>) -> String {
    pts.map(|p| {
        let (x, y) = frame.tx(&p);
        format!("{},{}", fmt_pt(x), fmt_pt(y))
    })
    .collect::<Vec<_>>()
    .join(" ")
}

/// Render a scenario with optional recorded paths. `paths` pairs a stroke
/// color with a driving path; the first is conventionally the original
/// path, the second a candidate's.
pub fn render_svg(
    map: &RoadMap,
    scenario: Option<&Scenario>,
    paths: &[(&str, &DrivingPath)],
    opts: &RenderOptions,
) -> String {
    let frame = Frame::of(map);
    let (w, h) = frame.size();
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt_pt(w),
        fmt_pt(h),
        fmt_pt(w),
        fmt_pt(h)
    )
    .unwrap();
    writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>").unwrap();

    // lanes as wide gray strokes along the centerline
    for lane in &map.lanes {
        writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#d4d4d4\" stroke-width=\"{}\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>",
            polyline(&frame, lane.centerline.iter().copied()),
            fmt_pt(lane.width_m * SCALE)
        )
        .unwrap();
        writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#a3a3a3\" stroke-width=\"1\" stroke-dasharray=\"6,6\"/>",
            polyline(&frame, lane.centerline.iter().copied())
        )
        .unwrap();
    }

    // covered-grid overlays under the paths
    if opts.grid_overlay {
        let spec = GridSpec::new(opts.grid_cell, map.bounding_box_min());
        let colors = ["#3b82f6", "#ef4444", "#10b981"];
        for (k, (_, path)) in paths.iter().enumerate() {
            let cells = covered_grids(path, &spec);
            for (i, j) in &cells.cells {
                let p = Point2::new(
                    spec.origin.x + *i as f64 * spec.cell_size,
                    spec.origin.y + (*j as f64 + 1.0) * spec.cell_size,
                );
                let (x, y) = frame.tx(&p);
                writeln!(
                    svg,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.15\"/>",
                    fmt_pt(x),
                    fmt_pt(y),
                    fmt_pt(spec.cell_size * SCALE),
                    fmt_pt(spec.cell_size * SCALE),
                    colors[k % colors.len()]
                )
                .unwrap();
            }
        }
    }

    if let Some(s) = scenario {
        // participants: footprint rectangle at t=0 plus trajectory
        for p in &s.participants {
            if p.trajectory.len() > 1 {
                writeln!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"#f59e0b\" stroke-width=\"1.5\" stroke-dasharray=\"3,3\"/>",
                    polyline(&frame, p.trajectory.iter().map(|w| w.position))
                )
                .unwrap();
            }
            let rect = p.footprint.corners(&p.initial().pose());
            writeln!(
                svg,
                "<polygon points=\"{}\" fill=\"#f59e0b\" fill-opacity=\"0.8\" stroke=\"#92400e\" stroke-width=\"1\"/>",
                polyline(&frame, rect.iter().copied())
            )
            .unwrap();
        }
        // ego start footprint and destination
        let ego_rect = pathdrift_core::scenario::ego_footprint().corners(&s.task.start);
        writeln!(
            svg,
            "<polygon points=\"{}\" fill=\"#2563eb\" fill-opacity=\"0.8\" stroke=\"#1e3a8a\" stroke-width=\"1\"/>",
            polyline(&frame, ego_rect.iter().copied())
        )
        .unwrap();
        let (gx, gy) = frame.tx(&s.task.destination);
        writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#16a34a\" stroke-width=\"2\"/>",
            fmt_pt(gx),
            fmt_pt(gy),
            fmt_pt(s.task.goal_radius * SCALE)
        )
        .unwrap();
    }

    let styles = ["#3b82f6", "#ef4444", "#10b981"];
    for (k, (color, path)) in paths.iter().enumerate() {
        let stroke = if color.is_empty() {
            styles[k % styles.len()]
        } else {
            color
        };
        writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>",
            polyline(&frame, path.points.iter().copied()),
            stroke
        )
        .unwrap();
    }

    writeln!(svg, "</svg>").unwrap();
    svg
}
