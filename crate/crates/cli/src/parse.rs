//! Argument and grid-file parsing.

use std::path::Path;

use geyor_core::GPoint;
use serde::Deserialize;

use crate::CliError;

pub fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("{what}: cannot parse {s:?}: {e}")))?;
    if v.len() != n {
        return Err(CliError::Usage(format!(
            "{what}: expected {n} comma-separated numbers, got {}",
            v.len()
        )));
    }
    Ok(v)
}

pub fn triple(s: &str, what: &str) -> Result<[f64; 3], CliError> {
    let v = floats(s, 3, what)?;
    Ok([v[0], v[1], v[2]])
}

pub fn point(s: &str, what: &str) -> Result<GPoint, CliError> {
    let [x, y, t] = triple(s, what)?;
    Ok(GPoint::new(x, y, t)?)
}

/// One `a:b:n` axis.
pub fn axis(s: &str, what: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Usage(format!("{what}: expected a:b:n, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let b = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    let n = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}

pub fn axes<const N: usize>(s: &str, what: &str) -> Result<[(f64, f64, usize); N], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(CliError::Usage(format!(
            "{what}: expected {N} axes, got {}",
            parts.len()
        )));
    }
    let mut out = [(0.0, 0.0, 0); N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = axis(p, what)?;
    }
    Ok(out)
}

/// `x0:x1:nx,y0:y1:ny,t0:t1:nt`, x-major with endpoints.
pub fn box_grid(s: &str) -> Result<Vec<GPoint>, CliError> {
    let [x, y, t] = axes::<3>(s, "--box")?;
    Ok(geyor_core::bounds::box_grid(
        [x.0, y.0, t.0],
        [x.1, y.1, t.1],
        [x.2, y.2, t.2],
    )?)
}

#[derive(Debug, Deserialize)]
struct PairRow {
    x: f64,
    y: f64,
    t: f64,
    x0: f64,
    y0: f64,
    t0: f64,
}

#[derive(Debug, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
    t: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// A `(point, pole)` pair of raw triples.
pub type Pair = ([f64; 3], [f64; 3]);

/// Rows `x,y,t,x0,y0,t0` as raw triples.
pub fn pair_grid(path: &Path) -> Result<Vec<Pair>, CliError> {
    Ok(read_rows::<PairRow>(path)?
        .into_iter()
        .map(|r| ([r.x, r.y, r.t], [r.x0, r.y0, r.t0]))
        .collect())
}

/// Rows `x,y,t`.
pub fn point_grid(path: &Path) -> Result<Vec<GPoint>, CliError> {
    read_rows::<PointRow>(path)?
        .into_iter()
        .map(|r| GPoint::new(r.x, r.y, r.t).map_err(CliError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_negative_triples() {
        assert_eq!(triple("1,-1, 0.5", "p").unwrap(), [1.0, -1.0, 0.5]);
        assert!(triple("1,2", "p").is_err());
        assert!(triple("1,a,2", "p").is_err());
    }

    #[test]
    fn parses_axes() {
        let [a, b] = axes::<2>("0.1:3:30,-2:-0.5:4", "d").unwrap();
        assert_eq!(a, (0.1, 3.0, 30));
        assert_eq!(b, (-2.0, -0.5, 4));
        assert!(axes::<2>("0:1:0,0:1:2", "d").is_err());
    }

    #[test]
    fn box_is_x_major() {
        let g = box_grid("1:2:2,-1:-0.5:2,1:1:1").unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[1].x(), 1.0);
        assert_eq!(g[1].y(), -0.5);
        assert_eq!(g[2].x(), 2.0);
    }
}
