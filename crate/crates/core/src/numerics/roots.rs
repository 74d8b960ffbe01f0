use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Solves `F(x) = target` for a nondecreasing `F` on `[lo, hi]`.
///
/// `eval` returns `(F(x), F'(x))`. Newton steps are taken from `guess` and
/// fall back to bisection whenever a step leaves the current bracket, so the
/// iteration always converges once `F(lo) ≤ target ≤ F(hi)`. Iteration stops
/// when `|F(x) - target| ≤ tol` or the bracket collapses to a few ulps.
pub fn invert_monotone<E>(eval: E, target: f64, lo: f64, hi: f64, guess: f64, tol: f64) -> Result<f64>
where
    E: Fn(f64) -> (f64, f64),
{
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut a = lo;
    let mut b = hi;
    let mut x = if guess > a && guess < b { guess } else { 0.5 * (a + b) };
    for _ in 0..MAX_ITER {
        let (fx, dfx) = eval(x);
        let r = fx - target;
        if r.abs() <= tol {
            return Ok(x);
        }
        if r > 0.0 {
            b = x;
        } else {
            a = x;
        }
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(a.abs()) {
            return Ok(0.5 * (a + b));
        }
        let newton = x - r / dfx;
        x = if dfx > 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    Err(Error::Numeric(format!(
        "monotone inversion for target {target} did not converge in [{lo}, {hi}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_cubic() {
        let x = invert_monotone(|x| (x * x * x, 3.0 * x * x), 8.0, 0.0, 5.0, 4.9, 1e-14).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn survives_zero_derivative() {
        // flat start forces bisection
        let x = invert_monotone(|x| (x.powi(5), 5.0 * x.powi(4)), 0.5f64.powi(5), 0.0, 1.0, 0.0, 1e-15).unwrap();
        assert!((x - 0.5).abs() < 1e-3);
    }

    #[test]
    fn empty_bracket_is_error() {
        assert!(invert_monotone(|x| (x, 1.0), 0.0, 1.0, 1.0, 1.0, 1e-12).is_err());
    }
}
