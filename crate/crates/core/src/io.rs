//! JSON and CSV formats. Every float is written with 17 significant digits,
//! which round-trips exactly.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::complex::{Complex, LogComplex};
use crate::error::{FockError, Result};
use crate::interpolation::InterpolationProblem;
use crate::pointsets::{closeness, PointSet, SquareLattice};
use crate::sampling::FrameEstimate;
use crate::space::{FockFunction, FockParameter, Representation};

/// `x` with 17 significant digits in exponent notation.
pub fn f17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON formatter writing floats via [`f17`].
struct F17Formatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for F17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(f17(value).as_bytes())
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Pretty JSON with 17-digit floats (non-finite floats become `null`).
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, F17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| FockError::Format(e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn pair(z: Complex) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: &[f64; 2]) -> Complex {
    Complex::new(p[0], p[1])
}

/// Wire form of a [`FockFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockFunctionJson {
    pub alpha: f64,
    pub repr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<[f64; 2]>>,
}

impl From<&FockFunction> for FockFunctionJson {
    fn from(f: &FockFunction) -> Self {
        let alpha = f.alpha().value();
        match f.repr() {
            Representation::Monomial { coeffs } => FockFunctionJson {
                alpha,
                repr: "monomial".into(),
                coeffs: Some(coeffs.iter().copied().map(pair).collect()),
                nodes: None,
                weights: None,
            },
            Representation::Kernel { nodes, weights } => FockFunctionJson {
                alpha,
                repr: "kernel".into(),
                coeffs: None,
                nodes: Some(nodes.iter().copied().map(pair).collect()),
                weights: Some(weights.iter().copied().map(pair).collect()),
            },
        }
    }
}

impl TryFrom<FockFunctionJson> for FockFunction {
    type Error = FockError;
    fn try_from(j: FockFunctionJson) -> Result<Self> {
        let alpha = FockParameter::new(j.alpha)?;
        let list = |v: Option<Vec<[f64; 2]>>, name: &'static str| {
            v.map(|v| v.iter().map(unpair).collect::<Vec<_>>())
                .ok_or_else(|| FockError::Format(format!("missing `{name}`")))
        };
        match j.repr.as_str() {
            "monomial" => FockFunction::monomial(alpha, list(j.coeffs, "coeffs")?),
            "kernel" => FockFunction::kernel_combo(alpha, list(j.nodes, "nodes")?, list(j.weights, "weights")?),
            other => Err(FockError::Format(format!("unknown representation `{other}`"))),
        }
    }
}

pub fn function_to_json(f: &FockFunction) -> Result<String> {
    to_json_string(&FockFunctionJson::from(f))
}

pub fn function_from_json(text: &str) -> Result<FockFunction> {
    let j: FockFunctionJson = serde_json::from_str(text)?;
    j.try_into()
}

/// Wire form of a [`PointSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSetJson {
    pub window_radius: f64,
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<Vec<[i64; 2]>>,
}

impl From<&PointSet> for PointSetJson {
    fn from(g: &PointSet) -> Self {
        PointSetJson {
            window_radius: g.window_radius(),
            points: g.points().iter().copied().map(pair).collect(),
            index: g.lattice_index().map(|idx| idx.iter().map(|&(m, n)| [m, n]).collect()),
        }
    }
}

impl TryFrom<PointSetJson> for PointSet {
    type Error = FockError;
    fn try_from(j: PointSetJson) -> Result<Self> {
        let points = j.points.iter().map(unpair).collect();
        match j.index {
            Some(idx) => PointSet::with_index(points, idx.iter().map(|p| (p[0], p[1])).collect(), j.window_radius),
            None => PointSet::new(points, j.window_radius),
        }
    }
}

/// Point-set CSV: header `x,y` (plus `m,n` when indexed), one row per point.
pub fn pointset_to_csv<W: Write>(g: &PointSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    match g.lattice_index() {
        Some(idx) => {
            w.write_record(["x", "y", "m", "n"])?;
            for (z, (m, n)) in g.points().iter().zip(idx) {
                w.write_record([f17(z.re), f17(z.im), m.to_string(), n.to_string()])?;
            }
        }
        None => {
            w.write_record(["x", "y"])?;
            for z in g.points() {
                w.write_record([f17(z.re), f17(z.im)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a point-set CSV; the window defaults to the largest modulus.
pub fn pointset_from_csv<R: io::Read>(reader: R, window_radius: Option<f64>) -> Result<PointSet> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (x, y) = match (col("x"), col("y")) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(FockError::Format("point CSV needs columns x,y".into())),
    };
    let mn = col("m").zip(col("n"));
    let parse_f = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| FockError::Format(format!("{s:?}: {e}")))
    };
    let parse_i = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|e| FockError::Format(format!("{s:?}: {e}")))
    };
    let mut points = Vec::new();
    let mut index = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        points.push(Complex::new(parse_f(&rec[x])?, parse_f(&rec[y])?));
        if let Some((m, n)) = mn {
            index.push((parse_i(&rec[m])?, parse_i(&rec[n])?));
        }
    }
    let window = window_radius.unwrap_or_else(|| points.iter().map(|z| z.norm()).fold(0.0, f64::max));
    if mn.is_some() {
        PointSet::with_index(points, index, window)
    } else {
        PointSet::new(points, window)
    }
}

/// Wire form of an [`InterpolationProblem`]. Without `index` each node gets
/// the index of its nearest lattice point; without `window_radius` the
/// window is the largest node modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemJson {
    pub alpha: f64,
    pub lattice_spacing: f64,
    pub nodes: Vec<[f64; 2]>,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<Vec<[i64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<f64>,
}

impl From<&InterpolationProblem> for ProblemJson {
    fn from(p: &InterpolationProblem) -> Self {
        let g = p.gamma();
        ProblemJson {
            alpha: p.alpha().value(),
            lattice_spacing: p.lattice().spacing(),
            nodes: g.points().iter().copied().map(pair).collect(),
            data: p.data().iter().copied().map(pair).collect(),
            index: g.lattice_index().map(|idx| idx.iter().map(|&(m, n)| [m, n]).collect()),
            window_radius: Some(g.window_radius()),
        }
    }
}

impl TryFrom<ProblemJson> for InterpolationProblem {
    type Error = FockError;
    fn try_from(j: ProblemJson) -> Result<Self> {
        let alpha = FockParameter::new(j.alpha)?;
        let lattice = SquareLattice::new(j.lattice_spacing)?;
        let points: Vec<Complex> = j.nodes.iter().map(unpair).collect();
        let window = j
            .window_radius
            .unwrap_or_else(|| points.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let index = match j.index {
            Some(idx) => idx.iter().map(|p| (p[0], p[1])).collect(),
            None => closeness(&PointSet::new(points.clone(), window)?, &lattice)?.matching,
        };
        let gamma = PointSet::with_index(points, index, window)?;
        InterpolationProblem::new(gamma, lattice, alpha, j.data.iter().map(unpair).collect())
    }
}

/// Convergence table CSV: `N,A_N,B_N`.
pub fn frame_table_to_csv<W: Write>(est: &FrameEstimate, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["N", "A_N", "B_N"])?;
    for &(n, a, b) in &est.convergence_table {
        w.write_record([n.to_string(), f17(a), f17(b)])?;
    }
    w.flush()?;
    Ok(())
}

/// Value grid CSV: `x,y,re,im,weighted_mag`.
pub fn value_grid_to_csv<W: Write>(rows: &[(Complex, Complex, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "re", "im", "weighted_mag"])?;
    for (z, v, m) in rows {
        w.write_record([f17(z.re), f17(z.im), f17(v.re), f17(v.im), f17(*m)])?;
    }
    w.flush()?;
    Ok(())
}

/// Log-value grid CSV: `x,y,log_mag,phase`; an exact zero has
/// `log_mag = -inf`.
pub fn log_grid_to_csv<W: Write>(rows: &[(Complex, LogComplex)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "log_mag", "phase"])?;
    for (z, v) in rows {
        w.write_record([f17(z.re), f17(z.im), f17(v.log_mag), f17(v.phase)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointsets::{perturb, square_lattice};

    #[test]
    fn seventeen_digits() {
        assert_eq!(f17(1.0), "1.0000000000000000e0");
        assert_eq!(f17(0.1).parse::<f64>().unwrap(), 0.1);
        let text = to_json_string(&[0.1, 1e-300, -2.5]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![0.1, 1e-300, -2.5]);
    }

    #[test]
    fn function_round_trip() {
        let a = FockParameter::new(0.7).unwrap();
        let f = FockFunction::kernel_combo(
            a,
            vec![Complex::new(0.1, 0.2), Complex::new(-1.0, 0.3)],
            vec![Complex::new(1.0, -1.0), Complex::new(0.25, 0.0)],
        )
        .unwrap();
        assert_eq!(function_from_json(&function_to_json(&f).unwrap()).unwrap(), f);
        let g = FockFunction::basis(a, 3);
        assert_eq!(function_from_json(&function_to_json(&g).unwrap()).unwrap(), g);
        assert!(function_from_json(r#"{"alpha": 1.0, "repr": "kernel", "nodes": [[0, 0]]}"#).is_err());
    }

    #[test]
    fn pointset_csv_round_trip() {
        let g = perturb(&square_lattice(1.0, 3.0).unwrap(), 0.2, 3).unwrap();
        let mut buf = Vec::new();
        pointset_to_csv(&g, &mut buf).unwrap();
        let back = pointset_from_csv(buf.as_slice(), Some(g.window_radius())).unwrap();
        assert_eq!(back, g);
        let j: PointSetJson = (&g).into();
        assert_eq!(PointSet::try_from(j).unwrap(), g);
    }

    #[test]
    fn problem_indexes_nodes_by_nearest_lattice_point() {
        let text = r#"{"alpha": 1.0, "lattice_spacing": 2.0,
            "nodes": [[0, 0], [2.1, 0], [0, -1.9]], "data": [[1, 0], [0, 1], [0.5, 0.5]]}"#;
        let j: ProblemJson = serde_json::from_str(text).unwrap();
        let p = InterpolationProblem::try_from(j).unwrap();
        assert_eq!(p.gamma().lattice_index().unwrap(), &[(0, 0), (1, 0), (0, -1)]);
        let again = InterpolationProblem::try_from(ProblemJson::from(&p)).unwrap();
        assert_eq!(again, p);
    }
}
