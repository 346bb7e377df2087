//! CSV and SVG export. Values stay exact in the CSV files; only SVG coordinates are
//! rounded, to 12 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use takagi_lab::evaluation::{GeneralizedTakagi, Side};
use takagi_lab::Rational;

const WIDTH: i64 = 800;
const HEIGHT: i64 = 400;
const MARGIN: i64 = 20;
const DIGITS: usize = 12;

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: &Rational, hi: &Rational, count: usize) -> Vec<Rational> {
    let span = hi - lo;
    let steps = Rational::from(count as i64 - 1);
    (0..count)
        .map(|i| lo + &(&span * &Rational::from(i as i64) / &steps))
        .collect()
}

/// Polyline through `(x, y)` pairs, scaled to the drawing area.
pub fn svg_polyline(points: &[(Rational, Rational)], title: &str) -> String {
    let (x_lo, x_hi) = bounds(points.iter().map(|p| &p.0));
    let (y_lo, y_hi) = bounds(points.iter().map(|p| &p.1));
    let sx = Rational::from(WIDTH - 2 * MARGIN) / (&x_hi - &x_lo);
    let sy = Rational::from(HEIGHT - 2 * MARGIN) / (&y_hi - &y_lo);
    let mut coords = String::new();
    for (x, y) in points {
        let px = Rational::from(MARGIN) + (x - &x_lo) * &sx;
        let py = Rational::from(HEIGHT - MARGIN) - (y - &y_lo) * &sy;
        let _ = write!(coords, "{},{} ", px.to_sig_digits(DIGITS), py.to_sig_digits(DIGITS));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <title>{title}</title>\n\
         <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{}\"/>\n\
         </svg>\n",
        coords.trim_end()
    )
}

/// Data range, widened by one on each side when flat.
fn bounds<'a>(values: impl Iterator<Item = &'a Rational>) -> (Rational, Rational) {
    let v: Vec<&Rational> = values.collect();
    let lo = v.iter().min().map(|r| (*r).clone()).unwrap_or_else(Rational::zero);
    let hi = v.iter().max().map(|r| (*r).clone()).unwrap_or_else(Rational::one);
    if lo == hi {
        (&lo - &Rational::one(), &hi + &Rational::one())
    } else {
        (lo, hi)
    }
}

/// Writes `PREFIX.csv` and `PREFIX.svg`, plus `PREFIX-quotients.{csv,svg}` when `base` is
/// given. Returns the paths written.
pub fn plot(t: &GeneralizedTakagi, resolution: usize, base: Option<&Rational>, out: &Path) -> Result<Vec<PathBuf>> {
    if resolution < 2 {
        bail!("resolution must be at least 2");
    }
    let d = t.decomposition();
    let grid = uniform_grid(d.lo(), d.hi(), resolution);
    let mut csv = String::from("x,lower,upper\n");
    let mut mids = Vec::with_capacity(resolution);
    for x in &grid {
        let e = t.enclosure(t.depth(), x)?;
        let _ = writeln!(csv, "{x},{},{}", e.interval.lo(), e.interval.hi());
        mids.push((x.clone(), e.midpoint()));
    }
    let mut written = Vec::new();
    let csv_path = with_suffix(out, ".csv");
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    written.push(csv_path);
    let svg_path = with_suffix(out, ".svg");
    fs::write(&svg_path, svg_polyline(&mids, "enclosure midpoints"))
        .with_context(|| format!("writing {}", svg_path.display()))?;
    written.push(svg_path);

    if let Some(x) = base {
        let quotients = quotient_series(t, x)?;
        let mut qcsv = String::from("n,quotient\n");
        for (n, v) in &quotients {
            let _ = writeln!(qcsv, "{n},{v}");
        }
        let qcsv_path = with_suffix(out, "-quotients.csv");
        fs::write(&qcsv_path, qcsv).with_context(|| format!("writing {}", qcsv_path.display()))?;
        written.push(qcsv_path);
        let qsvg_path = with_suffix(out, "-quotients.svg");
        fs::write(
            &qsvg_path,
            svg_polyline(&quotients, &format!("difference quotients at {x}")),
        )
        .with_context(|| format!("writing {}", qsvg_path.display()))?;
        written.push(qsvg_path);
    }
    Ok(written)
}

/// `(n, Δ_n)` for points of `D`, parity chords otherwise.
fn quotient_series(t: &GeneralizedTakagi, x: &Rational) -> Result<Vec<(Rational, Rational)>> {
    use takagi_lab::sequences::{delta_trace, parity_trace, reduce_to_d1};
    let trace = if t.decomposition().first_level_containing(x).is_some() {
        delta_trace(&reduce_to_d1(t, x)?.residual, x, Side::Right, t.depth())?
    } else {
        parity_trace(t, x, t.depth())?
    };
    if trace.rows.len() < 2 {
        bail!("fewer than two quotients at {x}");
    }
    Ok(trace
        .rows
        .iter()
        .map(|r| (Rational::from(r.n as i64), r.quotient.clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_both_ends() {
        let g = uniform_grid(&Rational::from(-1), &Rational::one(), 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], Rational::from(-1));
        assert_eq!(g[2], Rational::zero());
        assert_eq!(g[4], Rational::one());
    }

    #[test]
    fn flat_polyline_is_level() {
        let pts: Vec<_> = uniform_grid(&Rational::zero(), &Rational::one(), 3)
            .into_iter()
            .map(|x| (x, Rational::zero()))
            .collect();
        let svg = svg_polyline(&pts, "flat");
        assert!(svg.contains("points=\"20,200 400,200 780,200\""), "{svg}");
    }
}
