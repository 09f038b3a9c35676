//! SVG rendering of planar paths: the [-1, 1]^2 workspace, obstacle
//! rectangles, and one polyline per endpoint pair with waypoint
//! markers (start and goal larger, every eighth waypoint emphasized).
//!
//! Output is plain text assembled in a fixed order, so identical inputs
//! give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};

use midpoint_core::geometry::{Environment, StatePoint};

const CANVAS: f64 = 640.0;
const MARGIN: f64 = 20.0;

/// Color cycle for the path polylines.
const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn to_px(v: f64) -> f64 {
    // Map [-1, 1] to the canvas with a margin; y is flipped so that
    // larger manifold y is drawn higher.
    MARGIN + (v + 1.0) / 2.0 * (CANVAS - 2.0 * MARGIN)
}

fn fmt_px(v: f64) -> String {
    format!("{:.2}", v)
}

/// Renders paths over a planar environment. Only environments whose
/// representation is two plain coordinates can be drawn.
pub fn render_paths(env: &Environment, paths: &[Vec<StatePoint>]) -> anyhow::Result<String> {
    if env.rep_dim() != 2 || env.man_dim() != 2 {
        bail!(
            "plotting supports planar environments only, not `{}`",
            env.kind_name()
        );
    }
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" \
         viewBox=\"0 0 {c} {c}\">",
        c = CANVAS
    )?;
    writeln!(
        svg,
        "  <rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{w}\" fill=\"#ffffff\" \
         stroke=\"#000000\" stroke-width=\"1\"/>",
        m = fmt_px(to_px(-1.0)),
        w = fmt_px(to_px(1.0) - to_px(-1.0))
    )?;
    for rect in env.obstacle_rects() {
        writeln!(
            svg,
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#b0b0b0\"/>",
            fmt_px(to_px(rect.x_min)),
            // The y axis is flipped: the top edge is y_max.
            fmt_px(CANVAS - to_px(rect.y_max)),
            fmt_px(to_px(rect.x_max) - to_px(rect.x_min)),
            fmt_px(to_px(rect.y_max) - to_px(rect.y_min))
        )?;
    }
    for (pi, path) in paths.iter().enumerate() {
        if path.is_empty() {
            bail!("path {pi} is empty");
        }
        let color = COLORS[pi % COLORS.len()];
        let points: Vec<String> = path
            .iter()
            .map(|p| format!("{},{}", fmt_px(to_px(p.coords[0])), fmt_px(CANVAS - to_px(p.coords[1]))))
            .collect();
        writeln!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points.join(" ")
        )?;
        for (i, p) in path.iter().enumerate() {
            let endpoint = i == 0 || i == path.len() - 1;
            let emphasized = endpoint || i % 8 == 0;
            let r = if endpoint { 5.0 } else if emphasized { 3.0 } else { 1.5 };
            writeln!(
                svg,
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{r}\" fill=\"{color}\"/>",
                fmt_px(to_px(p.coords[0])),
                fmt_px(CANVAS - to_px(p.coords[1]))
            )?;
        }
    }
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

pub fn write_paths(
    path: &Path,
    env: &Environment,
    paths: &[Vec<StatePoint>],
) -> anyhow::Result<()> {
    let svg = render_paths(env, paths)?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> StatePoint {
        StatePoint { coords: vec![x, y] }
    }

    #[test]
    fn renders_obstacles_and_paths() {
        let env = Environment::euclid2d_default_map();
        let path = vec![p(-0.9, -0.9), p(0.0, -0.5), p(0.9, 0.9)];
        let svg = render_paths(&env, &[path]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        // Two obstacle rectangles plus the workspace border.
        assert_eq!(svg.matches("<rect").count(), 3);
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn identical_inputs_render_identically() {
        let env = Environment::euclid2d_free();
        let paths = vec![vec![p(0.0, 0.0), p(0.5, 0.5)], vec![p(-1.0, 1.0), p(1.0, -1.0)]];
        assert_eq!(
            render_paths(&env, &paths).unwrap(),
            render_paths(&env, &paths).unwrap()
        );
    }

    #[test]
    fn refuses_non_planar_environments() {
        let env = Environment::arm3();
        assert!(render_paths(&env, &[]).is_err());
        assert!(render_paths(&Environment::carlike(), &[]).is_err());
    }
}
