//! File formats: basis JSON, Latin-square CSV and fixed-precision CSV cells.
//!
//! Complex numbers are `[re, im]` pairs. Matrices are lists of rows, so the
//! basis vectors are the columns. Floats in JSON use the shortest decimal
//! that round-trips, so reading back yields the identical `f64`.

use serde::{Deserialize, Serialize};

use crate::basis::{Basis, Frame};
use crate::error::{Error, Result};
use crate::families::FamilyParams;
use crate::highdim::LatinSquare;
use crate::qla::{Operator, C64};

/// Serde adapter for `Operator` as rows of `[re, im]`.
pub mod operator_json {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(op: &Operator, s: S) -> std::result::Result<S::Ok, S::Error> {
        operator_rows(op).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Operator, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        operator_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub fn operator_rows(op: &Operator) -> Vec<Vec<[f64; 2]>> {
    let m = op.matrix();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn operator_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Operator> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("non-finite entry in row {i}")));
            }
            flat.push(C64::new(re, im));
        }
    }
    Operator::from_rows(n, &flat)
}

/// On-disk basis: `{"dims": [dA, dB], "frame": ..., "matrix": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    #[serde(default = "computational")]
    pub frame: Frame,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

fn computational() -> Frame {
    Frame::Computational
}

impl BasisFile {
    pub fn from_basis(b: &Basis) -> Self {
        let (da, db) = b.dims();
        Self {
            dims: Some([da, db]),
            frame: b.frame(),
            matrix: operator_rows(b.matrix()),
        }
    }

    /// Builds the basis without checking orthonormality; callers decide the tolerance.
    pub fn into_basis(self) -> Result<Basis> {
        let op = operator_from_rows(&self.matrix)?;
        match (self.dims, self.frame) {
            (None, f) | (Some([2, 2]), f) => Basis::new(op, f),
            (Some([da, db]), Frame::Computational) => Basis::bipartite(op, (da, db)),
            (Some(d), Frame::Skewed { .. }) => {
                Err(Error::Shape(format!("skewed frame needs dims [2, 2], got {d:?}")))
            }
        }
    }
}

pub fn parse_basis_json(text: &str) -> Result<Basis> {
    let f: BasisFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.into_basis()
}

pub fn basis_json(b: &Basis) -> String {
    serde_json::to_string_pretty(&BasisFile::from_basis(b)).expect("finite floats serialize")
}

pub fn parse_family_params(text: &str) -> Result<FamilyParams> {
    let p: FamilyParams = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let finite = match p {
        FamilyParams::SkewedProduct { tau } => [tau, 0.0, 0.0].map(f64::is_finite),
        FamilyParams::Elegant { theta, zeta } => [theta, zeta, 0.0].map(f64::is_finite),
        FamilyParams::Bell { delta, zeta, tau } => [delta, zeta, tau].map(f64::is_finite),
        FamilyParams::General { delta, theta, beta, .. } => [delta, theta, beta].map(f64::is_finite),
        FamilyParams::BellCanonical { x, y, z, .. } => [x, y, z].map(f64::is_finite),
        FamilyParams::I5 { phi } => [phi, 0.0, 0.0].map(f64::is_finite),
    };
    if finite.iter().all(|&f| f) {
        Ok(p)
    } else {
        Err(Error::InvalidParameter("angles must be finite".into()))
    }
}

/// `x` in positional decimal with 12 significant digits; `-0` prints as `0`.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let mut s = fixed(x, exp);
    // rounding can carry into a new leading digit, e.g. 9.9999999999996
    if s.trim_start_matches('-').trim_start_matches('0').starts_with('1')
        && s.parse::<f64>().map(|v| v.abs().log10().floor() as i32 > exp).unwrap_or(false)
    {
        s = fixed(x, exp + 1);
    }
    if s.parse::<f64>() == Ok(0.0) {
        s = s.trim_start_matches('-').to_string();
    }
    s
}

fn fixed(x: f64, exp: i32) -> String {
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Writes `header` and rows as LF-terminated CSV.
pub fn write_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn latin_csv(ls: &LatinSquare) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in ls.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

/// Headerless integer CSV, validated as a Latin square.
pub fn parse_latin_csv(text: &str) -> Result<LatinSquare> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let row = rec
            .iter()
            .map(|c| c.parse::<usize>().map_err(|e| Error::Parse(format!("{c:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    LatinSquare::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::gen_family;

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(1.0 / 64.0), "0.0156250000000");
        assert_eq!(format_sig12(25.0 / 256.0), "0.0976562500000");
        assert_eq!(format_sig12(-0.0), "0");
        assert_eq!(format_sig12(-1e-30), "-0.00000000000000000000000000000100000000000");
        assert_eq!(format_sig12(1.0), "1.00000000000");
        assert_eq!(format_sig12(9.99999999999996), "10.0000000000");
        assert_eq!(format_sig12(-3.25), "-3.25000000000");
        assert_eq!(format_sig12(123456.0), "123456.000000");
    }

    #[test]
    fn basis_json_round_trip() {
        let b = gen_family(&FamilyParams::ejm()).unwrap();
        let text = basis_json(&b);
        let back = parse_basis_json(&text).unwrap();
        assert_eq!(back, b);
        let skewed = gen_family(&FamilyParams::General {
            delta: 0.3,
            theta: 0.7,
            beta: 0.4,
            sign: Default::default(),
        })
        .unwrap();
        assert_eq!(parse_basis_json(&basis_json(&skewed)).unwrap(), skewed);
    }

    #[test]
    fn basis_json_rejects_bad_input() {
        assert!(parse_basis_json(r#"{"matrix": [[[1,0]]], "extra": 1}"#).is_err());
        assert!(parse_basis_json(r#"{"matrix": [[[1,0],[0,0]],[[0,0]]]}"#).is_err());
        assert!(parse_basis_json(r#"{"matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#).is_err());
        assert!(parse_basis_json(r#"{"matrix": []}"#).is_err());
        assert!(parse_basis_json("not json").is_err());
    }

    #[test]
    fn family_params_json() {
        let p = parse_family_params(r#"{"family": "elegant", "theta": 0.7853981, "zeta": 1.5707963}"#).unwrap();
        assert_eq!(p, FamilyParams::Elegant { theta: 0.7853981, zeta: 1.5707963 });
        let text = serde_json::to_string(&FamilyParams::ejm()).unwrap();
        assert_eq!(parse_family_params(&text).unwrap(), FamilyParams::ejm());
        assert!(parse_family_params(r#"{"family": "elegant", "theta": 1, "zeta": 1, "tau": 2}"#).is_err());
        assert!(parse_family_params(r#"{"family": "nope"}"#).is_err());
    }

    #[test]
    fn latin_csv_round_trip() {
        let ls = LatinSquare::seeded(5, 2).unwrap();
        assert_eq!(parse_latin_csv(&latin_csv(&ls)).unwrap(), ls);
        assert_eq!(latin_csv(&LatinSquare::cyclic(2).unwrap()), "0,1\n1,0\n");
        assert!(parse_latin_csv("0,1\n0,1\n").is_err());
        assert!(parse_latin_csv("0,x\n1,0\n").is_err());
        assert!(parse_latin_csv("0,1,2\n1,0\n").is_err());
    }

    #[test]
    fn csv_writer_uses_lf() {
        let s = write_csv(&["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(s, "a,b\n1,2\n");
    }
}
