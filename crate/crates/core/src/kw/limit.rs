use super::problem::EXPONENT_GUARD;
use super::{KWProblem, KwError, Result};
use crate::field::{RegionMask, ScalarField};

/// Coefficient sums below this are treated as vanishing.
const SINGULAR_THRESHOLD: f64 = 1e-300;

/// Pointwise root of the `ε = 0` equation. Excluded samples hold `0.0` in `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitProfile {
    pub f: ScalarField,
    pub excluded: Vec<bool>,
}

impl LimitProfile {
    /// Full-torus mask with the excluded samples removed.
    pub fn mask(&self) -> Result<RegionMask> {
        Ok(RegionMask::full(*self.f.geometry(), *self.f.grid())
            .excluding_samples(&self.excluded)?)
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|&&e| e).count()
    }
}

struct Sample {
    plus: Vec<(f64, f64)>,
    minus: Vec<(f64, f64)>,
    w: f64,
}

impl Sample {
    fn eval(&self, y: f64) -> (f64, f64) {
        let mut g = self.w;
        let mut dg = 0.0;
        for &(c, a) in &self.plus {
            let e = c * (a * y).exp();
            g += e;
            dg += a * e;
        }
        for &(c, b) in &self.minus {
            let e = c * (-b * y).exp();
            g -= e;
            dg += b * e;
        }
        (g, dg)
    }

    fn max_rate(&self) -> f64 {
        self.plus
            .iter()
            .chain(&self.minus)
            .map(|&(_, a)| a)
            .fold(0.0, f64::max)
    }

    /// Closed form for one term on each side and `w = 0`.
    fn closed_form(&self) -> Option<f64> {
        match (self.plus.as_slice(), self.minus.as_slice()) {
            ([(a, alpha)], [(b, beta)]) if self.w == 0.0 => Some((b / a).ln() / (alpha + beta)),
            _ => None,
        }
    }

    /// Root of the strictly increasing balance function by bracketing and
    /// safeguarded Newton.
    fn root(&self) -> Option<f64> {
        if let Some(y) = self.closed_form() {
            return Some(y);
        }
        let limit = EXPONENT_GUARD / self.max_rate();
        let (mut lo, mut hi) = (0.0, 0.0);
        let g0 = self.eval(0.0).0;
        if g0 == 0.0 {
            return Some(0.0);
        }
        let mut width: f64 = 1.0;
        if g0 < 0.0 {
            loop {
                hi = width.min(limit);
                if self.eval(hi).0 > 0.0 {
                    break;
                }
                lo = hi;
                if hi >= limit {
                    return None;
                }
                width *= 2.0;
            }
        } else {
            loop {
                lo = (-width).max(-limit);
                if self.eval(lo).0 < 0.0 {
                    break;
                }
                hi = lo;
                if lo <= -limit {
                    return None;
                }
                width *= 2.0;
            }
        }
        let mut y = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (g, dg) = self.eval(y);
            if g == 0.0 {
                return Some(y);
            }
            if g < 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let newton = y - g / dg;
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - y).abs() <= 4.0 * f64::EPSILON * (1.0 + y.abs())
                || hi - lo <= 4.0 * f64::EPSILON * (1.0 + y.abs())
            {
                return Some(next);
            }
            y = next;
        }
        Some(y)
    }
}

/// Solves `Σ A_j e^{α_j f} - Σ B_j e^{-β_j f} + w = 0` sample by sample.
///
/// A sample is excluded when a side that has terms in the problem sums to
/// zero there (the singular set of the degenerate coefficients). For a
/// problem with terms on one side only, samples without a root raise
/// [`KwError::NoRoot`].
pub fn kw_limit(problem: &KWProblem) -> Result<LimitProfile> {
    if problem.epsilon() != 0.0 {
        return Err(KwError::InvalidProblem(format!(
            "kw_limit needs epsilon = 0, got {}",
            problem.epsilon()
        )));
    }
    let has_plus = !problem.plus_terms().is_empty();
    let has_minus = !problem.minus_terms().is_empty();
    if !has_plus && !has_minus {
        return Err(KwError::Unsolvable("no exponential terms".into()));
    }
    let n = problem.w().len();
    let mut values = vec![0.0; n];
    let mut excluded = vec![false; n];
    for k in 0..n {
        let collect = |terms: &[super::ExpTerm]| -> Vec<(f64, f64)> {
            terms
                .iter()
                .map(|t| (t.coefficient.values()[k], t.exponent))
                .filter(|&(c, _)| c > 0.0)
                .collect()
        };
        let sample = Sample {
            plus: collect(problem.plus_terms()),
            minus: collect(problem.minus_terms()),
            w: problem.w().values()[k],
        };
        let sum = |v: &[(f64, f64)]| v.iter().map(|p| p.0).sum::<f64>();
        if (has_plus && sum(&sample.plus) < SINGULAR_THRESHOLD)
            || (has_minus && sum(&sample.minus) < SINGULAR_THRESHOLD)
        {
            excluded[k] = true;
            continue;
        }
        values[k] = sample.root().ok_or(KwError::NoRoot { index: k })?;
    }
    Ok(LimitProfile {
        f: ScalarField::from_values(*problem.geometry(), *problem.grid(), values)?,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GridSpec, TorusGeometry};
    use crate::kw::ExpTerm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (TorusGeometry, GridSpec) {
        (TorusGeometry::unit(), GridSpec::square(16).unwrap())
    }

    #[test]
    fn symmetric_limit_is_zero() {
        let (g, grid) = setup();
        let one = ScalarField::constant(g, grid, 1.0);
        let p = KWProblem::new(
            0.0,
            vec![ExpTerm::new(one.clone(), 1.0)],
            vec![ExpTerm::new(one, 1.0)],
            ScalarField::zeros(g, grid),
        )
        .unwrap();
        let lim = kw_limit(&p).unwrap();
        assert_eq!(lim.f.sup_abs(), 0.0);
        assert_eq!(lim.excluded_count(), 0);
    }

    /// Plain bisection on the pointwise balance.
    fn bisect(plus: &[(f64, f64)], minus: &[(f64, f64)], w: f64) -> f64 {
        let g = |y: f64| {
            w + plus.iter().map(|&(c, a)| c * (a * y).exp()).sum::<f64>()
                - minus.iter().map(|&(c, b)| c * (-b * y).exp()).sum::<f64>()
        };
        let (mut lo, mut hi) = (-60.0, 60.0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn agrees_with_bisection() {
        let (g, grid) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut field = |lo: f64, hi: f64| {
            let v: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect();
            ScalarField::from_values(g, grid, v).unwrap()
        };
        let plus = vec![
            ExpTerm::new(field(0.1, 2.0), 1.0),
            ExpTerm::new(field(0.1, 2.0), 0.5),
            ExpTerm::new(field(0.1, 2.0), 2.5),
        ];
        let minus = vec![ExpTerm::new(field(0.1, 2.0), 1.5)];
        let w = field(-3.0, 3.0);
        let p = KWProblem::new(0.0, plus, minus, w).unwrap();
        let lim = kw_limit(&p).unwrap();
        for k in 0..grid.len() {
            let pick = |ts: &[ExpTerm]| {
                ts.iter()
                    .map(|t| (t.coefficient.values()[k], t.exponent))
                    .collect::<Vec<_>>()
            };
            let oracle = bisect(
                &pick(p.plus_terms()),
                &pick(p.minus_terms()),
                p.w().values()[k],
            );
            assert!((lim.f.values()[k] - oracle).abs() < 1e-10, "sample {k}");
        }
    }

    #[test]
    fn singular_samples_excluded() {
        let (g, grid) = setup();
        let a = ScalarField::from_fn(g, grid, |x, y| if x == 0.0 && y == 0.0 { 0.0 } else { 1.0 })
            .unwrap();
        let p = KWProblem::new(
            0.0,
            vec![ExpTerm::new(a, 1.0)],
            vec![ExpTerm::new(ScalarField::constant(g, grid, 4.0), 1.0)],
            ScalarField::zeros(g, grid),
        )
        .unwrap();
        let lim = kw_limit(&p).unwrap();
        assert!(lim.excluded[0]);
        assert_eq!(lim.excluded_count(), 1);
        assert!((lim.f.values()[1] - 0.5 * 4.0f64.ln()).abs() < 1e-15);
        assert!(lim.mask().unwrap().area() < 1.0);
    }

    #[test]
    fn one_sided_without_root() {
        let (g, grid) = setup();
        let p = KWProblem::new(
            0.0,
            vec![ExpTerm::new(ScalarField::constant(g, grid, 1.0), 1.0)],
            vec![],
            ScalarField::constant(g, grid, 0.5),
        )
        .unwrap();
        assert!(matches!(kw_limit(&p), Err(KwError::NoRoot { index: 0 })));
        let p = KWProblem::new(
            0.0,
            vec![ExpTerm::new(ScalarField::constant(g, grid, 1.0), 1.0)],
            vec![],
            ScalarField::constant(g, grid, -2.0),
        )
        .unwrap();
        let lim = kw_limit(&p).unwrap();
        assert!((lim.f.max() - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn requires_zero_epsilon() {
        let (g, grid) = setup();
        let one = ScalarField::constant(g, grid, 1.0);
        let p = KWProblem::new(
            0.1,
            vec![ExpTerm::new(one.clone(), 1.0)],
            vec![ExpTerm::new(one, 1.0)],
            ScalarField::zeros(g, grid),
        )
        .unwrap();
        assert!(matches!(kw_limit(&p), Err(KwError::InvalidProblem(_))));
    }
}
