use std::fmt;
use std::sync::Arc;

/// How atoms are weighted in a radial functional `Σ w(x) g(|x|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// `∫ g(|x|) ν(dx)`.
    Mass,
    /// `∫ x g(|x|) ν(dx)` (vector valued).
    Signed,
    /// `∫ |x| g(|x|) ν(dx)`.
    Abs,
}

/// A radial function `g(r)`, `r >= 0`, together with the metadata the
/// series evaluators need: its limit as `r → ∞`, a radius beyond which it is
/// within `O((scale/r)^2)` of that limit, and points where it is not smooth.
#[derive(Clone)]
pub struct RadialKernel {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub limit: f64,
    pub scale: f64,
    pub breaks: Vec<f64>,
}

impl fmt::Debug for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialKernel")
            .field("limit", &self.limit)
            .field("scale", &self.scale)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl RadialKernel {
    pub fn new<F>(f: F, limit: f64, scale: f64, breaks: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { f: Arc::new(f), limit, scale: scale.max(1.0), breaks }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, c, 1.0, vec![])
    }

    /// `1/(1+r^2)`, the centering in the cumulant.
    pub fn centering() -> Self {
        Self::new(|r| 1.0 / (1.0 + r * r), 0.0, 1.0, vec![])
    }

    /// `r^2/(1+r^2)`; with `Weight::Signed` this turns the location into the mean.
    pub fn mean_correction() -> Self {
        Self::new(|r| r * r / (1.0 + r * r), 1.0, 1.0, vec![])
    }

    /// `u (1/(1+u^2 r^2) - 1/(1+r^2))`, the location shift under `x ↦ ux`.
    pub fn scale_correction(u: f64) -> Self {
        let scale = if u == 0.0 { 1.0 } else { 1.0 / u.abs() };
        Self::new(
            move |r| {
                let ur = u * r;
                // u r^2 (1 - u^2) / ((1+u^2 r^2)(1+r^2)), cancellation free
                u * r * r * (1.0 - u * u) / ((1.0 + ur * ur) * (1.0 + r * r))
            },
            0.0,
            scale,
            vec![],
        )
    }

    /// `u (u r)^2 / (1 + (u r)^2)`; the drift integrand of a mean-zero law at scale `u`.
    pub fn saturation(u: f64) -> Self {
        let scale = if u == 0.0 { 1.0 } else { 1.0 / u.abs() };
        Self::new(
            move |r| {
                let ur2 = (u * r) * (u * r);
                u * ur2 / (1.0 + ur2)
            },
            u,
            scale,
            vec![],
        )
    }

    /// `1{r > s}`.
    pub fn above(s: f64) -> Self {
        Self::new(move |r| if r > s { 1.0 } else { 0.0 }, 1.0, s, vec![s])
    }

    /// `1{r <= s}`.
    pub fn at_most(s: f64) -> Self {
        Self::new(move |r| if r <= s { 1.0 } else { 0.0 }, 0.0, s, vec![s])
    }

    /// `min(u^2 r^2, 1)`.
    pub fn truncated_second(u: f64) -> Self {
        let br = if u == 0.0 { f64::INFINITY } else { 1.0 / u.abs() };
        Self::new(
            move |r| {
                let v = u * r;
                (v * v).min(1.0)
            },
            if u == 0.0 { 0.0 } else { 1.0 },
            br.min(1e300),
            if br.is_finite() { vec![br] } else { vec![] },
        )
    }

    /// `r ↦ c · g(|u| r)`, the kernel seen through the pushforward `x ↦ u x`.
    pub fn rescaled(&self, u: f64, c: f64) -> Self {
        let inner = self.f.clone();
        let au = u.abs();
        let breaks = if au == 0.0 {
            vec![]
        } else {
            self.breaks.iter().map(|b| b / au).collect()
        };
        let scale = if au == 0.0 { 1.0 } else { self.scale / au };
        let limit = if au == 0.0 { c * inner(0.0) } else { c * self.limit };
        Self::new(move |r| c * inner(au * r), limit, scale, breaks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_correction_matches_naive() {
        let u = 0.37;
        let k = RadialKernel::scale_correction(u);
        for r in [0.1, 1.0, 3.0, 50.0] {
            let naive = u * (1.0 / (1.0 + u * u * r * r) - 1.0 / (1.0 + r * r));
            assert!((k.eval(r) - naive).abs() < 1e-15);
        }
    }

    #[test]
    fn rescaled_moves_breaks() {
        let k = RadialKernel::above(2.0).rescaled(0.5, 1.0);
        assert_eq!(k.breaks, vec![4.0]);
        assert_eq!(k.eval(3.0), 0.0);
        assert_eq!(k.eval(5.0), 1.0);
    }
}
