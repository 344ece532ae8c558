use std::path::Path;

use crate::error::{Error, Result};

/// One polynomial piece `Σ_j c_j (s - l)^j` on `[l, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub l: f64,
    pub r: f64,
    pub coeffs: Vec<f64>,
}

impl Piece {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        let x = s - self.l;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `∫_a^b p(s) ds` for `l <= a <= b <= r`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        antiderivative(&self.coeffs, b - self.l) - antiderivative(&self.coeffs, a - self.l)
    }

    /// `∫_a^b p(s)^2 ds`.
    pub fn integral_sq(&self, a: f64, b: f64) -> f64 {
        let sq = square(&self.coeffs);
        antiderivative(&sq, b - self.l) - antiderivative(&sq, a - self.l)
    }

    pub fn sup_abs(&self) -> f64 {
        // crude but safe: sum of |c_j| (r - l)^j
        let w = self.r - self.l;
        self.coeffs.iter().enumerate().map(|(j, c)| c.abs() * w.powi(j as i32)).sum()
    }
}

fn antiderivative(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().rev().fold(0.0, |acc, (j, cj)| acc * x + cj / (j as f64 + 1.0)) * x
}

fn square(c: &[f64]) -> Vec<f64> {
    if c.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; 2 * c.len() - 1];
    for (i, a) in c.iter().enumerate() {
        for (j, b) in c.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Piecewise polynomial on disjoint sorted pieces, zero outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTable {
    pub pieces: Vec<Piece>,
    /// File the table was read from, kept for round-tripping specs.
    pub source: Option<String>,
}

impl PiecewiseTable {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.sort_by(|a, b| a.l.total_cmp(&b.l));
        for p in &pieces {
            if !(p.l.is_finite() && p.r.is_finite() && p.l >= 0.0 && p.r > p.l) {
                return Err(Error::InvalidIntegrand(format!("table piece [{}, {}) is not a finite nonempty interval in [0, ∞)", p.l, p.r)));
            }
            if p.coeffs.is_empty() || !p.coeffs.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidIntegrand(format!("table piece [{}, {}) needs finite coefficients", p.l, p.r)));
            }
        }
        for w in pieces.windows(2) {
            if w[1].l < w[0].r {
                return Err(Error::InvalidIntegrand(format!("table pieces overlap at {}", w[1].l)));
            }
        }
        if pieces.is_empty() {
            return Err(Error::InvalidIntegrand("table has no pieces".into()));
        }
        Ok(Self { pieces, source: None })
    }

    /// Rows `l,r,c0,c1,...`; a header row is allowed.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut pieces = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidIntegrand(format!("table csv: {e}")))?;
            let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let nums = match nums {
                Ok(v) => v,
                Err(_) if i == 0 => continue,
                Err(e) => return Err(Error::InvalidIntegrand(format!("table csv line {}: {e}", i + 1))),
            };
            if nums.len() < 3 {
                return Err(Error::InvalidIntegrand(format!("table csv line {}: need l,r,c0[,c1,...]", i + 1)));
            }
            pieces.push(Piece { l: nums[0], r: nums[1], coeffs: nums[2..].to_vec() });
        }
        Self::new(pieces)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidIntegrand(format!("cannot read table {}: {e}", path.display())))?;
        let mut t = Self::from_csv_str(&text)?;
        t.source = Some(path.display().to_string());
        Ok(t)
    }

    pub fn start(&self) -> f64 {
        self.pieces[0].l
    }

    pub fn end(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].r
    }

    fn piece_at(&self, s: f64) -> Option<&Piece> {
        let i = self.pieces.partition_point(|p| p.r <= s);
        self.pieces.get(i).filter(|p| p.l <= s)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.piece_at(s).map_or(0.0, |p| p.eval(s))
    }

    pub fn edges(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().flat_map(|p| [p.l, p.r]).collect();
        v.dedup();
        v
    }

    /// Pieces clipped to `[a, b)`.
    pub fn clipped(&self, a: f64, b: f64) -> impl Iterator<Item = (&Piece, f64, f64)> {
        self.pieces.iter().filter_map(move |p| {
            let (l, r) = (p.l.max(a), p.r.min(b));
            (r > l).then_some((p, l, r))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_integrals() {
        let t = PiecewiseTable::from_csv_str("l,r,c0,c1\n0,1,1,0\n1,3,2,-1\n").unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(2.0), 1.0);
        assert_eq!(t.eval(3.0), 0.0);
        let p = &t.pieces[1];
        // ∫_1^3 (2 - (s-1)) ds = 2
        assert!((p.integral(1.0, 3.0) - 2.0).abs() < 1e-15);
        // ∫_0^2 (2-x)^2 dx = 8/3
        assert!((p.integral_sq(1.0, 3.0) - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_overlap() {
        assert!(PiecewiseTable::from_csv_str("0,2,1\n1,3,1\n").is_err());
    }
}
