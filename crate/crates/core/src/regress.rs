//! OLS via column-equilibrated QR, Wald tests of linear restrictions,
//! Cholesky factorization, and sample correlation matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stat_core::{chi_squared_sf, student_t_sf};

/// Relative size of the smallest admissible `|R_jj|` after equilibration.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Largest condition number accepted for `R·Cov·Rᵀ` in a Wald test.
pub const MAX_RESTRICTION_CONDITION: f64 = 1e12;

/// Coefficient covariance estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    /// `s² (XᵀX)⁻¹`
    #[default]
    Homoskedastic,
    /// White sandwich with the `T / (T - p)` small-sample factor.
    HeteroskedasticHc1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `sqrt(RSS / (T - p))`
    pub rmse: f64,
    pub coef_cov: DMatrix<f64>,
    pub dof: usize,
}

impl OlsFit {
    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    pub fn std_error(&self, j: usize) -> f64 {
        self.coef_cov[(j, j)].max(0.0).sqrt()
    }

    /// Two-sided t-test of `coefficient[j] = 0` against Student-t(dof).
    pub fn coefficient_test(&self, j: usize) -> Result<CoefficientTest> {
        let estimate = self.coefficients[j];
        let std_error = self.std_error(j);
        if !(std_error > 0.0) {
            return Err(Error::SingularRestriction {
                condition: f64::INFINITY,
            });
        }
        let t_statistic = estimate / std_error;
        let dof = u32::try_from(self.dof).unwrap_or(u32::MAX);
        let p_value = (2.0 * student_t_sf(t_statistic.abs(), dof)?).min(1.0);
        Ok(CoefficientTest {
            estimate,
            std_error,
            t_statistic,
            p_value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTest {
    pub estimate: f64,
    pub std_error: f64,
    pub t_statistic: f64,
    pub p_value: f64,
}

/// Outcome of a Wald test of `Rθ = r`; `p_value` is the chi-squared(df) tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldOutcome {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub restriction: String,
}

impl WaldOutcome {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Builds `[1, c₁, c₂, ...]` from column slices of equal length.
pub fn design_with_intercept<'a, I>(n: usize, columns: I) -> DMatrix<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut data = vec![1.0; n];
    let mut width = 1;
    for column in columns {
        assert_eq!(column.len(), n, "design column length mismatch");
        data.extend_from_slice(column);
        width += 1;
    }
    DMatrix::from_vec(n, width, data)
}

pub fn ols_fit(design: &DMatrix<f64>, response: &[f64]) -> Result<OlsFit> {
    ols_fit_with(design, response, CovarianceKind::Homoskedastic)
}

pub fn ols_fit_with(
    design: &DMatrix<f64>,
    response: &[f64],
    covariance: CovarianceKind,
) -> Result<OlsFit> {
    let (n, p) = design.shape();
    if response.len() != n {
        return Err(Error::InvalidParameter(format!(
            "response has {} rows, design has {n}",
            response.len()
        )));
    }
    if n <= p {
        return Err(Error::InsufficientData {
            observations: n,
            parameters: p,
        });
    }

    let mut scaled = design.clone();
    let mut scales = Vec::with_capacity(p);
    for (j, mut column) in scaled.column_iter_mut().enumerate() {
        let norm = column.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::RankDeficient {
                column: j,
                hint: None,
            });
        }
        column /= norm;
        scales.push(norm);
    }

    let qr = scaled.qr();
    let r = qr.r();
    let largest = (0..p).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if let Some(j) = (0..p).find(|&j| r[(j, j)].abs() < RANK_TOLERANCE * largest) {
        return Err(Error::RankDeficient {
            column: j,
            hint: None,
        });
    }

    let y = DVector::from_column_slice(response);
    let qty = qr.q().transpose() * &y;
    let scaled_beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let coefficients =
        DVector::from_iterator(p, scaled_beta.iter().zip(&scales).map(|(b, s)| b / s));
    let residuals = &y - design * &coefficients;
    let dof = n - p;
    let rss = residuals.norm_squared();
    let rmse = (rss / dof as f64).sqrt();

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Numerical("triangular inverse failed".into()))?;
    // (XᵀX)⁻¹ = D⁻¹ R⁻¹ R⁻ᵀ D⁻¹ for the equilibrated design X D⁻¹ = QR
    let mut xtx_inv = &r_inv * r_inv.transpose();
    for i in 0..p {
        for j in 0..p {
            xtx_inv[(i, j)] /= scales[i] * scales[j];
        }
    }

    let mut coef_cov = match covariance {
        CovarianceKind::Homoskedastic => xtx_inv * (rmse * rmse),
        CovarianceKind::HeteroskedasticHc1 => {
            let mut meat = DMatrix::zeros(p, p);
            for (t, e) in residuals.iter().enumerate() {
                let row = design.row(t);
                meat += row.transpose() * row * (e * e);
            }
            (&xtx_inv * meat * &xtx_inv) * (n as f64 / dof as f64)
        }
    };
    symmetrize(&mut coef_cov);

    Ok(OlsFit {
        coefficients,
        residuals,
        rmse,
        coef_cov,
        dof,
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Wald test of `R θ = r` using the fit's coefficient covariance.
pub fn wald_linear(
    fit: &OlsFit,
    restriction: &DMatrix<f64>,
    target: &DVector<f64>,
) -> Result<WaldOutcome> {
    let (q, p) = restriction.shape();
    if p != fit.n_params() || q == 0 || q > p || target.len() != q {
        return Err(Error::InvalidParameter(format!(
            "restriction is {q}x{p} with {} targets for {} coefficients",
            target.len(),
            fit.n_params()
        )));
    }
    let mut middle = restriction * &fit.coef_cov * restriction.transpose();
    symmetrize(&mut middle);
    let eigen = middle.symmetric_eigen();
    let largest = eigen.eigenvalues.max();
    let smallest = eigen.eigenvalues.min();
    let condition = if smallest > 0.0 {
        largest / smallest
    } else {
        f64::INFINITY
    };
    if !(largest > 0.0) || condition > MAX_RESTRICTION_CONDITION {
        return Err(Error::SingularRestriction { condition });
    }
    let discrepancy = restriction * &fit.coefficients - target;
    let projected = eigen.eigenvectors.transpose() * &discrepancy;
    let statistic = projected
        .iter()
        .zip(eigen.eigenvalues.iter())
        .map(|(v, l)| v * v / l)
        .sum::<f64>()
        .max(0.0);
    let p_value = chi_squared_sf(statistic, q as u32)?;
    Ok(WaldOutcome {
        statistic,
        df: q,
        p_value,
        restriction: describe_restriction(restriction, target),
    })
}

fn describe_restriction(restriction: &DMatrix<f64>, target: &DVector<f64>) -> String {
    let rows: Vec<String> = restriction
        .row_iter()
        .zip(target.iter())
        .map(|(row, t)| {
            let terms: Vec<String> = row
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, c)| format!("{c:.6}*b{j}"))
                .collect();
            format!("{} = {t}", terms.join(" + "))
        })
        .collect();
    rows.join("; ")
}

/// Lower-triangular `L` with `L Lᵀ = A`.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > 1e-14 * scale) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / diag;
        }
    }
    Ok(l)
}

/// Pearson correlation matrix of equally long columns.
pub fn sample_correlation_matrix<C: AsRef<[f64]>>(columns: &[C]) -> Result<DMatrix<f64>> {
    let k = columns.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    let n = columns[0].as_ref().len();
    if n < 2 {
        return Err(Error::InsufficientData {
            observations: n,
            parameters: 2,
        });
    }
    let mut centered = Vec::with_capacity(k);
    for (j, column) in columns.iter().enumerate() {
        let column = column.as_ref();
        if column.len() != n {
            return Err(Error::InvalidParameter(format!(
                "column {j} has {} rows, expected {n}",
                column.len()
            )));
        }
        let mean = column.iter().sum::<f64>() / n as f64;
        let dev: Vec<f64> = column.iter().map(|v| v - mean).collect();
        let norm = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::DegenerateColumn {
                column: format!("#{j}"),
            });
        }
        centered.push(dev.into_iter().map(|d| d / norm).collect::<Vec<f64>>());
    }
    let mut out = DMatrix::identity(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let r: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let r = r.clamp(-1.0, 1.0);
            out[(i, j)] = r;
            out[(j, i)] = r;
        }
    }
    Ok(out)
}

/// Pearson correlation of two columns.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(sample_correlation_matrix(&[a, b])?[(0, 1)])
}
