use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

/// Generates the intervals of a set inside a window `[lo, hi)`.
pub type IntervalOracle = dyn Fn(f64, f64) -> Result<Vec<(f64, f64)>> + Send + Sync;

/// Which sign set a lazily generated mask describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
    Zero,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "+",
            Side::Minus => "-",
            Side::Zero => "0",
        })
    }
}

/// Where a lazily generated mask came from: the sign set `{s : ± h_j(s) > 0}`
/// of the drift function of a fixed `(μ, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSetOrigin {
    /// Stable description of the `(μ, f)` pair whose drift function was used.
    pub fingerprint: String,
    pub coordinate: usize,
    pub side: Side,
    /// Left end of the region where the sign set is defined.
    pub start: f64,
}

struct Cache {
    covered: f64,
    intervals: Vec<(f64, f64)>,
}

/// A set generated window by window and cached; concurrent queries are
/// serialized through the cache lock.
pub struct LazySet {
    pub origin: SignSetOrigin,
    oracle: Box<IntervalOracle>,
    cache: Mutex<Cache>,
}

impl fmt::Debug for LazySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazySet").field("origin", &self.origin).finish()
    }
}

impl LazySet {
    pub fn new(origin: SignSetOrigin, oracle: Box<IntervalOracle>) -> Self {
        let start = origin.start;
        Self { origin, oracle, cache: Mutex::new(Cache { covered: start, intervals: Vec::new() }) }
    }

    /// Intervals of the set meeting `[lo, hi)`, materialized as needed.
    pub fn window(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        let mut cache = self.cache.lock().expect("mask cache poisoned");
        if hi > cache.covered {
            let from = cache.covered;
            let to = if hi.is_finite() { hi.max(2.0 * from.max(1.0)) } else { f64::INFINITY };
            if !to.is_finite() {
                return Err(Error::RootIsolationFailure("sign set queried on an unbounded window".into()));
            }
            let fresh = (self.oracle)(from, to)?;
            for (l, r) in fresh {
                match cache.intervals.last_mut() {
                    Some(last) if last.1 >= l => last.1 = last.1.max(r),
                    _ => cache.intervals.push((l, r)),
                }
            }
            cache.covered = to;
        }
        Ok(clip(&cache.intervals, lo, hi))
    }

    pub fn covered(&self) -> f64 {
        self.cache.lock().expect("mask cache poisoned").covered
    }
}

fn clip(list: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let start = list.partition_point(|iv| iv.1 <= lo);
    list[start..]
        .iter()
        .take_while(|iv| iv.0 < hi)
        .map(|&(l, r)| (l.max(lo), r.min(hi)))
        .filter(|(l, r)| r > l)
        .collect()
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let l = a[i].0.max(b[j].0);
        let r = a[i].1.min(b[j].1);
        if r > l {
            out.push((l, r));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Union of disjoint half-open intervals `[l, r)`, optionally intersected
/// with a lazily generated set.
#[derive(Clone)]
pub struct MaskSet {
    intervals: Vec<(f64, f64)>,
    lazy: Option<Arc<LazySet>>,
}

impl fmt::Debug for MaskSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MaskSet({}", self)?;
        if let Some(l) = &self.lazy {
            write!(f, " ∩ {:?}", l.origin)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MaskSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(l, r)| format!("{},{}", fmt_num(*l), fmt_num(*r)))
            .collect();
        write!(f, "{}", parts.join(";"))?;
        if let Some(l) = &self.lazy {
            write!(f, "&sign[{}:{}]", l.origin.coordinate, l.origin.side)?;
        }
        Ok(())
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

impl PartialEq for MaskSet {
    fn eq(&self, other: &Self) -> bool {
        self.intervals == other.intervals
            && match (&self.lazy, &other.lazy) {
                (None, None) => true,
                (Some(a), Some(b)) => a.origin == b.origin,
                _ => false,
            }
    }
}

impl MaskSet {
    /// Sorts and merges the given intervals; rejects empty or reversed ones.
    pub fn from_intervals(mut list: Vec<(f64, f64)>) -> Result<Self> {
        for &(l, r) in &list {
            if l.is_nan() || r.is_nan() || l < 0.0 || r <= l || l.is_infinite() {
                return Err(Error::InvalidIntegrand(format!("bad mask interval [{l}, {r})")));
            }
        }
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(list.len());
        for (l, r) in list {
            match merged.last_mut() {
                Some(last) if last.1 >= l => last.1 = last.1.max(r),
                _ => merged.push((l, r)),
            }
        }
        Ok(Self { intervals: merged, lazy: None })
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new(), lazy: None }
    }

    /// `[a, ∞)`.
    pub fn from(a: f64) -> Self {
        Self { intervals: vec![(a.max(0.0), f64::INFINITY)], lazy: None }
    }

    pub fn lazy(set: LazySet) -> Self {
        let start = set.origin.start;
        Self { intervals: vec![(start, f64::INFINITY)], lazy: Some(Arc::new(set)) }
    }

    /// Parses `mask:l1,r1;l2,r2;...` (the `mask:` prefix is optional).
    pub fn parse(spec: &str) -> Result<Self> {
        let body = spec.strip_prefix("mask:").unwrap_or(spec).trim();
        if body.is_empty() {
            return Ok(Self::empty());
        }
        let mut list = Vec::new();
        for part in body.split(';') {
            let mut it = part.split(',');
            let (Some(l), Some(r), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::InvalidIntegrand(format!("mask interval `{part}` is not `l,r`")));
            };
            let num = |s: &str| -> Result<f64> {
                let s = s.trim();
                if s.eq_ignore_ascii_case("inf") {
                    return Ok(f64::INFINITY);
                }
                s.parse::<f64>().map_err(|_| Error::InvalidIntegrand(format!("bad mask bound `{s}`")))
            };
            list.push((num(l)?, num(r)?));
        }
        Self::from_intervals(list)
    }

    pub fn explicit(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn lazy_part(&self) -> Option<&Arc<LazySet>> {
        self.lazy.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// True when the set is contained in a bounded interval.
    pub fn is_bounded(&self) -> bool {
        self.intervals.last().is_none_or(|iv| iv.1.is_finite())
    }

    /// True when the set contains `[c, ∞)` for some `c` (explicit part only,
    /// no lazy factor).
    pub fn is_cofinite(&self) -> bool {
        self.lazy.is_none() && self.intervals.last().is_some_and(|iv| iv.1.is_infinite())
    }

    pub fn intersect(&self, other: &MaskSet) -> Result<MaskSet> {
        let lazy = match (&self.lazy, &other.lazy) {
            (Some(a), Some(b)) if a.origin != b.origin => {
                return Err(Error::InvalidIntegrand("cannot intersect two different sign sets".into()))
            }
            (Some(a), _) => Some(a.clone()),
            (None, b) => b.clone(),
        };
        Ok(MaskSet { intervals: intersect(&self.intervals, &other.intervals), lazy })
    }

    /// Intervals of the set inside `[lo, hi)`.
    pub fn window(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        let ex = clip(&self.intervals, lo, hi);
        match &self.lazy {
            None => Ok(ex),
            Some(l) => {
                if ex.is_empty() {
                    return Ok(ex);
                }
                let top = ex.last().map_or(hi, |iv| iv.1);
                let lz = l.window(ex[0].0, top)?;
                Ok(intersect(&ex, &lz))
            }
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 <= s);
        let inside = i < self.intervals.len() && self.intervals[i].0 <= s;
        if !inside {
            return false;
        }
        match &self.lazy {
            None => true,
            Some(l) => {
                let hi = if s < l.covered() { s + 1.0 } else { 2.0 * s + 1.0 };
                l.window(s, hi).map(|w| w.first().is_some_and(|iv| iv.0 <= s)).unwrap_or(false)
            }
        }
    }

    /// Endpoints of the set inside `(lo, hi)`.
    pub fn edges(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for (l, r) in self.window(lo, hi)? {
            if l > lo && l < hi {
                out.push(l);
            }
            if r > lo && r < hi {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Total length inside `[lo, hi)`.
    pub fn length(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.window(lo, hi)?.iter().map(|(l, r)| r - l).sum())
    }

    /// True when every point of `self` inside the window lies in `other`.
    pub fn subset_of(&self, other: &MaskSet, lo: f64, hi: f64) -> Result<bool> {
        let mine = self.window(lo, hi)?;
        let theirs = other.window(lo, hi)?;
        let inter: f64 = intersect(&mine, &theirs).iter().map(|(l, r)| r - l).sum();
        let total: f64 = mine.iter().map(|(l, r)| r - l).sum();
        Ok((total - inter).abs() <= 1e-12 * total.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_merge() {
        let m = MaskSet::parse("mask:3,4;1,2;1.5,2.5").unwrap();
        assert_eq!(m.explicit(), &[(1.0, 2.5), (3.0, 4.0)]);
        assert!(m.contains(1.0));
        assert!(!m.contains(2.5));
        assert!(m.is_bounded());
        let c = MaskSet::parse("mask:0,1;5,inf").unwrap();
        assert!(c.is_cofinite());
        assert!(c.contains(1e9));
    }

    #[test]
    fn rejects_reversed_interval() {
        assert!(MaskSet::parse("mask:2,1").is_err());
        assert!(MaskSet::parse("mask:1").is_err());
    }

    #[test]
    fn lazy_windows_are_cached() {
        let calls = Arc::new(Mutex::new(0));
        let c2 = calls.clone();
        let origin = SignSetOrigin { fingerprint: "t".into(), coordinate: 0, side: Side::Plus, start: 1.0 };
        // even unit intervals
        let set = LazySet::new(
            origin,
            Box::new(move |lo, hi| {
                *c2.lock().unwrap() += 1;
                let mut v = Vec::new();
                let mut k = (lo.floor() as i64 / 2) * 2;
                while (k as f64) < hi {
                    let (l, r) = ((k as f64).max(lo), ((k + 1) as f64).min(hi));
                    if r > l {
                        v.push((l, r));
                    }
                    k += 2;
                }
                Ok(v)
            }),
        );
        let m = MaskSet::lazy(set);
        assert!(m.contains(2.5));
        assert!(!m.contains(3.5));
        let w = m.window(1.0, 8.0).unwrap();
        assert_eq!(w, vec![(2.0, 3.0), (4.0, 5.0), (6.0, 7.0)]);
        let before = *calls.lock().unwrap();
        let _ = m.window(1.0, 8.0).unwrap();
        assert_eq!(*calls.lock().unwrap(), before);
    }
}
