//! Tridiagonal systems and the Thomas elimination that solves them.

use thiserror::Error;

/// A tridiagonal linear system in aligned-diagonal storage: row `i` reads
/// `sub[i]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = rhs[i]`, with `sub[0]`
/// and `sup[n-1]` ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    /// Zero-initialized system of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        TridiagonalSystem {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Residual `A x - rhs` of a candidate solution.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut r = vec![0.0; n];
        for i in 0..n {
            let mut ax = self.diag[i] * x[i];
            if i > 0 {
                ax += self.sub[i] * x[i - 1];
            }
            if i + 1 < n {
                ax += self.sup[i] * x[i + 1];
            }
            r[i] = ax - self.rhs[i];
        }
        r
    }
}

/// Elimination failure: a pivot vanished relative to the row's scale, so
/// forward elimination cannot continue without pivoting.
#[derive(Debug, Error, PartialEq)]
#[error("tridiagonal pivot breakdown at row {row}: |pivot| = {pivot_magnitude:.3e}")]
pub struct PivotBreakdown {
    pub row: usize,
    pub pivot_magnitude: f64,
}

/// Solves the system by the Thomas algorithm (non-pivoting Gaussian
/// elimination specialized to tridiagonal structure).
///
/// All systems assembled in this crate are irreducibly diagonally dominant,
/// for which the elimination is backward stable; a vanishing pivot is
/// reported rather than propagated as NaN.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>, PivotBreakdown> {
    let n = sys.len();
    assert!(
        n >= 1 && sys.sub.len() == n && sys.sup.len() == n && sys.rhs.len() == n,
        "malformed tridiagonal system"
    );
    let mut c_star = vec![0.0; n];
    let mut d_star = vec![0.0; n];
    let mut denom = sys.diag[0];
    let scale = sys.diag[0].abs() + sys.sup[0].abs();
    if denom.abs() <= f64::MIN_POSITIVE.max(1e-300 * scale) {
        return Err(PivotBreakdown {
            row: 0,
            pivot_magnitude: denom.abs(),
        });
    }
    c_star[0] = sys.sup[0] / denom;
    d_star[0] = sys.rhs[0] / denom;
    for i in 1..n {
        denom = sys.diag[i] - sys.sub[i] * c_star[i - 1];
        let scale = sys.diag[i].abs() + sys.sub[i].abs() + sys.sup[i].abs();
        if denom.abs() <= f64::MIN_POSITIVE.max(1e-14 * scale) {
            return Err(PivotBreakdown {
                row: i,
                pivot_magnitude: denom.abs(),
            });
        }
        c_star[i] = sys.sup[i] / denom;
        d_star[i] = (sys.rhs[i] - sys.sub[i] * d_star[i - 1]) / denom;
    }
    let mut x = d_star;
    for i in (0..n - 1).rev() {
        let correction = c_star[i] * x[i + 1];
        x[i] -= correction;
    }
    Ok(x)
}
