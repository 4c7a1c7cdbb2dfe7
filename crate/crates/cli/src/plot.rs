//! Static SVG figures: orthographic views of the great circles `v_j^⊥ ∩ S²`
//! (or diameters on the circle in the plane) with the extremal points.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::anyhow;
use polarize_core::extrema::ExtremaSet;
use polarize_core::numerics::{dot, norm};
use polarize_core::systems::VectorSystem;

use crate::commands::{enumerate, load_extrema, load_system, write_output};
use crate::{CliResult, Failure, PlotArgs, Status};

/// Segments per half great circle.
const ARC_SEGMENTS: usize = 128;
const STROKE: f64 = 0.006;
const DOT_MIN: f64 = 0.012;
const DOT_MAX: f64 = 0.04;

pub fn parse_view(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| format!("`{p}` is not a number"))?;
    }
    let len = norm(&v);
    if !len.is_finite() || len == 0.0 {
        return Err("view direction must be a finite nonzero vector".into());
    }
    Ok(v.map(|x| x / len))
}

/// Coordinates rounded to 1e-6, without a negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let l = norm(&v);
    v.map(|x| x / l)
}

/// Screen basis `(right, up)` for looking at the origin from `view`, with
/// the z axis pointing up whenever it is not the view direction itself.
fn screen_frame(view: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut up_hint = [0.0, 0.0, 1.0];
    if dot(view, &up_hint).abs() > 1.0 - 1e-9 {
        up_hint = [0.0, 1.0, 0.0];
    }
    let along = dot(&up_hint, view);
    let up = unit([
        up_hint[0] - along * view[0],
        up_hint[1] - along * view[1],
        up_hint[2] - along * view[2],
    ]);
    (cross(&up, view), up)
}

/// SVG y grows downward.
fn point(x: f64, y: f64) -> String {
    format!("{} {}", num(x), num(-y))
}

fn polyline(points: &[(f64, f64)], closed: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        d.push_str(if i == 0 { "M " } else { " L " });
        d.push_str(&point(*x, *y));
    }
    if closed {
        d.push_str(" Z");
    }
    d
}

struct Dot {
    x: f64,
    y: f64,
    r: f64,
    front: bool,
}

/// Dot radii grow with the square root of μ so dot area tracks the weight.
fn dots(es: &ExtremaSet, project: impl Fn(&[f64]) -> (f64, f64, bool)) -> Vec<Dot> {
    let mu_max = es.points.iter().map(|p| p.weight_mu).fold(0.0, f64::max);
    es.points
        .iter()
        .map(|p| {
            let (x, y, front) = project(&p.u);
            let scale = if mu_max > 0.0 {
                (p.weight_mu / mu_max).sqrt()
            } else {
                1.0
            };
            Dot {
                x,
                y,
                r: DOT_MIN + (DOT_MAX - DOT_MIN) * scale,
                front,
            }
        })
        .collect()
}

fn write_dots(out: &mut String, dots: &[Dot], front: bool) {
    let (class, opacity) = if front {
        ("front", "1")
    } else {
        ("back", "0.35")
    };
    let _ = writeln!(
        out,
        "  <g class=\"extrema {class}\" fill=\"#c0392b\" fill-opacity=\"{opacity}\">"
    );
    for d in dots.iter().filter(|d| d.front == front) {
        let _ = writeln!(
            out,
            "    <circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
            num(d.x),
            num(-d.y),
            num(d.r)
        );
    }
    out.push_str("  </g>\n");
}

fn header(out: &mut String, sys: &VectorSystem, desc: &str) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" \
         viewBox=\"-1.15 -1.15 2.3 2.3\">\n",
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(sys.label()));
    let _ = writeln!(out, "  <desc>{}</desc>", escape(desc));
    out.push_str("  <rect x=\"-1.15\" y=\"-1.15\" width=\"2.3\" height=\"2.3\" fill=\"white\"/>\n");
}

fn outline(out: &mut String) {
    let _ = writeln!(
        out,
        "  <circle class=\"outline\" cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#555555\" stroke-width=\"{}\"/>",
        num(STROKE)
    );
}

/// Unit circle, one diameter along each line `v_j^⊥`, and the extrema.
pub fn render_planar(sys: &VectorSystem, es: &ExtremaSet) -> String {
    let mut out = String::new();
    header(
        &mut out,
        sys,
        &format!("{} lines in the plane, {} extrema", sys.n(), es.len()),
    );
    outline(&mut out);
    let _ = writeln!(
        out,
        "  <g class=\"hyperplanes\" fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"{}\">",
        num(STROKE)
    );
    for (j, v) in sys.vectors().iter().enumerate() {
        let (tx, ty) = (-v[1], v[0]);
        let _ = writeln!(
            out,
            "    <path class=\"diameter\" data-index=\"{j}\" d=\"{}\"/>",
            polyline(&[(-tx, -ty), (tx, ty)], false)
        );
    }
    out.push_str("  </g>\n");
    let ds = dots(es, |u| (u[0], u[1], true));
    write_dots(&mut out, &ds, true);
    out.push_str("</svg>\n");
    out
}

/// Orthographic view of the sphere from `view`: front arcs solid, back arcs
/// dashed, extrema on the far side faded.
pub fn render_sphere(sys: &VectorSystem, es: &ExtremaSet, view: &[f64; 3]) -> String {
    let (right, up) = screen_frame(view);
    let project = |c: &[f64]| (dot(c, &right), dot(c, &up));

    let mut front = Vec::new();
    let mut back = Vec::new();
    for (j, v) in sys.vectors().iter().enumerate() {
        let along = dot(view, v);
        let w_perp = [
            view[0] - along * v[0],
            view[1] - along * v[1],
            view[2] - along * v[2],
        ];
        if norm(&w_perp) < 1e-9 {
            // The circle is the silhouette itself.
            let p = unit(cross(v, &right));
            let q = cross(v, &p);
            let pts: Vec<(f64, f64)> = (0..2 * ARC_SEGMENTS)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / (2 * ARC_SEGMENTS) as f64;
                    project(&arc_point(&p, &q, t))
                })
                .collect();
            front.push((j, polyline(&pts, true)));
            continue;
        }
        let p = unit(w_perp);
        let q = cross(v, &p);
        let half = |offset: f64| -> Vec<(f64, f64)> {
            (0..=ARC_SEGMENTS)
                .map(|k| {
                    let t = offset - PI / 2.0 + PI * k as f64 / ARC_SEGMENTS as f64;
                    project(&arc_point(&p, &q, t))
                })
                .collect()
        };
        front.push((j, polyline(&half(0.0), false)));
        back.push((j, polyline(&half(PI), false)));
    }

    let ds = dots(es, |u| {
        let (x, y) = project(u);
        (x, y, dot(u, view) >= 0.0)
    });

    let mut out = String::new();
    header(
        &mut out,
        sys,
        &format!(
            "{} great circles, {} extrema, view ({}, {}, {})",
            sys.n(),
            es.len(),
            num(view[0]),
            num(view[1]),
            num(view[2])
        ),
    );
    let _ = writeln!(
        out,
        "  <g class=\"hyperplanes back\" fill=\"none\" stroke=\"#1f4e79\" stroke-opacity=\"0.5\" \
         stroke-width=\"{}\" stroke-dasharray=\"0.03 0.02\">",
        num(STROKE)
    );
    for (j, d) in &back {
        let _ = writeln!(
            out,
            "    <path class=\"back\" data-index=\"{j}\" d=\"{d}\"/>"
        );
    }
    out.push_str("  </g>\n");
    write_dots(&mut out, &ds, false);
    outline(&mut out);
    let _ = writeln!(
        out,
        "  <g class=\"hyperplanes front\" fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"{}\">",
        num(STROKE)
    );
    for (j, d) in &front {
        let _ = writeln!(
            out,
            "    <path class=\"front\" data-index=\"{j}\" d=\"{d}\"/>"
        );
    }
    out.push_str("  </g>\n");
    write_dots(&mut out, &ds, true);
    out.push_str("</svg>\n");
    out
}

fn arc_point(p: &[f64; 3], q: &[f64; 3], t: f64) -> [f64; 3] {
    let (s, c) = t.sin_cos();
    [
        c * p[0] + s * q[0],
        c * p[1] + s * q[1],
        c * p[2] + s * q[2],
    ]
}

pub fn run(args: &PlotArgs) -> CliResult<Status> {
    let sys = load_system(&args.input)?;
    if !(2..=3).contains(&sys.dim()) {
        return Err(Failure::usage(anyhow!(
            "unsupported dimension {}: plots need a system in R^2 or R^3",
            sys.dim()
        )));
    }
    let es = match &args.extrema {
        Some(path) => load_extrema(path, &sys)?,
        None => enumerate(&sys, &args.solver)?,
    };
    let svg = if sys.dim() == 2 {
        render_planar(&sys, &es)
    } else {
        let s = 1.0 / 3f64.sqrt();
        render_sphere(&sys, &es, &args.view.unwrap_or([s, s, s]))
    };
    write_output(&args.output, &svg)?;
    say!(
        "{} curves, {} points written to {}",
        sys.n(),
        es.len(),
        args.output.display()
    );
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use polarize_core::extrema::enumerate_extrema;
    use polarize_core::systems::make_orthonormal;

    #[test]
    fn numbers_are_rounded_without_negative_zero() {
        assert_eq!(num(-1e-9), "0.000000");
        assert_eq!(num(0.1234567), "0.123457");
        assert_eq!(num(-0.5), "-0.500000");
    }

    #[test]
    fn view_parsing() {
        let v = parse_view("0,0,2").unwrap();
        assert_eq!(v, [0.0, 0.0, 1.0]);
        assert!(parse_view("0,0,0").is_err());
        assert!(parse_view("1,2").is_err());
        assert!(parse_view("1,x,2").is_err());
    }

    #[test]
    fn screen_frame_is_right_handed_and_orthonormal() {
        let s = 1.0 / 3f64.sqrt();
        for view in [
            [s, s, s],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0],
        ] {
            let (r, u) = screen_frame(&view);
            assert!((norm(&r) - 1.0).abs() < 1e-12 && (norm(&u) - 1.0).abs() < 1e-12);
            assert!(dot(&r, &u).abs() < 1e-12 && dot(&r, &view).abs() < 1e-12);
            let c = cross(&r, &u);
            assert!((dot(&c, &view) - 1.0).abs() < 1e-12);
        }
        // z projects straight up in the default view.
        let (r, u) = screen_frame(&[s, s, s]);
        assert!(dot(&[0.0, 0.0, 1.0], &r).abs() < 1e-12 && dot(&[0.0, 0.0, 1.0], &u) > 0.0);
    }

    #[test]
    fn arcs_lie_on_their_circle_and_split_at_the_silhouette() {
        // For e_1 viewed from (1,1,1)/√3 the circle is x = 0; its front half has y + z ≥ 0.
        let sys = make_orthonormal(3).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let svg = render_sphere(&sys, &es, &[s, s, s]);
        assert_eq!(svg.matches("<path class=\"front\"").count(), 3);
        assert_eq!(svg.matches("<path class=\"back\"").count(), 3);
        assert_eq!(svg.matches("<circle cx").count(), 8);
        // Octant points: exactly (+,+,+) faces the viewer fully; the three with one minus are
        // still in front ((1+1-1)/√3 > 0), so 4 front and 4 back.
        let front = svg.split("class=\"extrema front\"").nth(1).unwrap();
        assert_eq!(
            front
                .split("</g>")
                .next()
                .unwrap()
                .matches("<circle")
                .count(),
            4
        );
    }

    #[test]
    fn planar_figure_has_one_diameter_per_vector() {
        let sys = make_orthonormal(2).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        let svg = render_planar(&sys, &es);
        assert_eq!(svg.matches("class=\"diameter\"").count(), 2);
        assert_eq!(svg.matches("<circle cx").count(), 4);
        // e_1^⊥ is the vertical diameter.
        assert!(svg.contains("d=\"M 0.000000 1.000000 L 0.000000 -1.000000\""));
    }

    #[test]
    fn silhouette_circle_is_drawn_closed() {
        let sys = make_orthonormal(3).unwrap();
        let es = enumerate_extrema(&sys).unwrap();
        let svg = render_sphere(&sys, &es, &[0.0, 0.0, 1.0]);
        assert_eq!(svg.matches("<path class=\"front\"").count(), 3);
        assert_eq!(svg.matches("<path class=\"back\"").count(), 2);
        assert_eq!(svg.matches(" Z\"").count(), 1);
    }
}
