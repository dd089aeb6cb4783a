//! Ordinary least squares with standard errors and two-sided p-values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Condition-number estimate above which a fit logs a warning.
pub const CONDITION_WARNING: f64 = 1e8;

pub const PREDICTOR_NAMES: [&str; 3] = ["non_support", "low_commitment", "high_commitment"];

/// `ln(1 + count)`.
pub fn log1p_counts<T: Scalar>(count: i64) -> Result<T> {
    if count < 0 {
        return Err(Error::InvalidArgument(format!("negative count {count}")));
    }
    Ok(T::from_i64(count).expect("count representable").ln_1p())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Reflection: Γ(x) Γ(1 - x) = π / sin(πx).
        let pi = T::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction<T: Scalar>(a: T, b: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let one = T::one();
    let two = T::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=500 {
        let m = T::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`,
/// `0 <= x <= 1`.
pub fn regularized_incomplete_beta<T: Scalar>(x: T, a: T, b: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::InvalidArgument("incomplete beta needs positive shape parameters".into()));
    }
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::InvalidArgument(format!("incomplete beta argument {x} outside [0, 1]")));
    }
    if x == T::zero() || x == T::one() {
        return Ok(x);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    let front = ln_front.exp();
    // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        Ok(front * beta_continued_fraction(a, b, x) / a)
    } else {
        Ok(T::one() - front * beta_continued_fraction(b, a, T::one() - x) / b)
    }
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided_p<T: Scalar>(t: T, df: usize) -> Result<T> {
    if df < 1 {
        return Err(Error::InvalidArgument("degrees of freedom must be at least 1".into()));
    }
    if t.is_nan() {
        return Err(Error::NonFinite("t statistic"));
    }
    if t.is_infinite() {
        return Ok(T::zero());
    }
    let nu = T::from_count(df);
    let x = nu / (nu + t * t);
    let p = regularized_incomplete_beta(x, nu / T::lit(2.0), T::lit(0.5))?;
    Ok(p.max(T::zero()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RegressionResult<T> {
    /// `intercept` followed by the predictor names.
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    pub standard_errors: Vec<T>,
    pub t_statistics: Vec<T>,
    pub p_values: Vec<T>,
    pub r_squared: T,
    pub n: usize,
    pub df_residual: usize,
    pub residuals: Vec<T>,
    /// `||R||_F · ||R⁻¹||_F` of the QR factor, an upper bound on the
    /// 2-norm condition number up to a factor of the column count.
    pub condition_estimate: T,
}

impl<T: Scalar> RegressionResult<T> {
    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    /// One row per term: `term,coef,std_err,t_stat,p_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,coef,std_err,t_stat,p_value\n");
        for i in 0..self.names.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.names[i], self.coefficients[i], self.standard_errors[i], self.t_statistics[i], self.p_values[i]
            ));
        }
        out
    }
}

/// Householder QR of a column-major `n × m` matrix; `a` is overwritten with
/// R in its upper triangle. Returns the reflectors.
fn householder_qr<T: Scalar>(a: &mut [Vec<T>], n: usize) -> Vec<Vec<T>> {
    let m = a.len();
    let mut reflectors = Vec::with_capacity(m);
    for j in 0..m {
        let norm = a[j][j..n].iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
        let mut v: Vec<T> = a[j][j..n].to_vec();
        if norm == T::zero() {
            reflectors.push(v.iter().map(|_| T::zero()).collect());
            continue;
        }
        let alpha = if v[0] >= T::zero() { -norm } else { norm };
        v[0] = v[0] - alpha;
        let vnorm_sq = v.iter().fold(T::zero(), |s, &x| s + x * x);
        if vnorm_sq > T::zero() {
            for col in a.iter_mut().skip(j) {
                let proj = v.iter().zip(&col[j..n]).fold(T::zero(), |s, (&vi, &ci)| s + vi * ci);
                let f = T::lit(2.0) * proj / vnorm_sq;
                for (ci, &vi) in col[j..n].iter_mut().zip(&v) {
                    *ci = *ci - f * vi;
                }
            }
        }
        reflectors.push(v);
    }
    reflectors
}

fn apply_qt<T: Scalar>(reflectors: &[Vec<T>], y: &mut [T]) {
    for (j, v) in reflectors.iter().enumerate() {
        let vnorm_sq = v.iter().fold(T::zero(), |s, &x| s + x * x);
        if vnorm_sq == T::zero() {
            continue;
        }
        let proj = v.iter().zip(&y[j..]).fold(T::zero(), |s, (&vi, &yi)| s + vi * yi);
        let f = T::lit(2.0) * proj / vnorm_sq;
        for (yi, &vi) in y[j..].iter_mut().zip(v) {
            *yi = *yi - f * vi;
        }
    }
}

/// Solves the upper-triangular system `R[..k, ..k] x = rhs`.
fn back_substitute<T: Scalar>(r: &[Vec<T>], rhs: &[T]) -> Vec<T> {
    let k = rhs.len();
    let mut x = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = rhs[i];
        for j in i + 1..k {
            s = s - r[j][i] * x[j];
        }
        x[i] = s / r[i][i];
    }
    x
}

/// OLS with an intercept. `rows[i]` holds the predictor values of sample `i`.
///
/// Solved by Householder QR. Requires `n >= p + 2` and a full-rank design;
/// otherwise the error names the offending columns.
pub fn ols<T: Scalar, S: AsRef<str>>(rows: &[Vec<T>], y: &[T], predictor_names: &[S]) -> Result<RegressionResult<T>> {
    let p = predictor_names.len();
    let n = rows.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if n < p + 2 {
        return Err(Error::TooFewSamples { n, columns: p + 1 });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch { expected: p, found: r.len() });
    }
    if rows.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression data"));
    }
    let names: Vec<String> = std::iter::once("intercept".to_string())
        .chain(predictor_names.iter().map(|s| s.as_ref().to_string()))
        .collect();
    let m = p + 1;

    let design: Vec<Vec<T>> = std::iter::once(vec![T::one(); n])
        .chain((0..p).map(|j| rows.iter().map(|r| r[j]).collect()))
        .collect();
    let mut r = design.clone();
    let reflectors = householder_qr(&mut r, n);

    let scale = (0..m).map(|i| r[i][i].abs()).fold(T::zero(), T::max);
    let tol = scale * T::epsilon() * T::from_count(n.max(m)) * T::lit(10.0);
    for j in 0..m {
        if r[j][j].abs() <= tol {
            let coeffs = back_substitute(&r, &r[j][..j]);
            let others = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.abs() > T::lit(1e-6))
                .map(|(i, _)| names[i].clone())
                .collect();
            return Err(Error::RankDeficient { column: names[j].clone(), others });
        }
    }

    let mut qty = y.to_vec();
    apply_qt(&reflectors, &mut qty);
    let beta = back_substitute(&r, &qty[..m]);

    let residuals: Vec<T> = (0..n)
        .map(|i| y[i] - (0..m).fold(T::zero(), |s, j| s + design[j][i] * beta[j]))
        .collect();
    let ssr = residuals.iter().fold(T::zero(), |s, &e| s + e * e);
    let mean_y = y.iter().copied().sum::<T>() / T::from_count(n);
    let sst = y.iter().fold(T::zero(), |s, &v| s + (v - mean_y) * (v - mean_y));
    let r_squared = if sst > T::zero() { (T::one() - ssr / sst).max(T::zero()).min(T::one()) } else { T::one() };

    let df = n - m;
    let sigma2 = ssr / T::from_count(df);

    // Columns of R⁻¹; row norms give the diagonal of (XᵀX)⁻¹ = R⁻¹R⁻ᵀ.
    let mut r_inv = vec![vec![T::zero(); m]; m];
    for (k, col) in r_inv.iter_mut().enumerate() {
        let mut e = vec![T::zero(); k + 1];
        e[k] = T::one();
        col[..=k].copy_from_slice(&back_substitute(&r, &e));
    }
    let mut standard_errors = Vec::with_capacity(m);
    let mut t_statistics = Vec::with_capacity(m);
    let mut p_values = Vec::with_capacity(m);
    for (i, &b) in beta.iter().enumerate() {
        let diag = r_inv.iter().fold(T::zero(), |s, col| s + col[i] * col[i]);
        let se = (sigma2 * diag).sqrt();
        let t = if se > T::zero() {
            b / se
        } else if b == T::zero() {
            T::zero()
        } else {
            b.signum() * T::infinity()
        };
        standard_errors.push(se);
        t_statistics.push(t);
        p_values.push(student_t_two_sided_p(t, df)?);
    }

    let frob = |cols: &[Vec<T>]| cols.iter().flatten().fold(T::zero(), |s, &v| s + v * v).sqrt();
    let r_upper: Vec<Vec<T>> = (0..m).map(|j| (0..m).map(|i| if i <= j { r[j][i] } else { T::zero() }).collect()).collect();
    let condition_estimate = frob(&r_upper) * frob(&r_inv);
    if condition_estimate.to_f64_lossy() > CONDITION_WARNING {
        log::warn!("ill-conditioned design: condition estimate {condition_estimate}");
    }

    Ok(RegressionResult {
        names,
        coefficients: beta,
        standard_errors,
        t_statistics,
        p_values,
        r_squared,
        n,
        df_residual: df,
        residuals,
        condition_estimate,
    })
}

/// One entity's regression inputs: log-transformed class counts and its
/// third-party rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EntityDesignRow<T> {
    pub entity_id: String,
    pub non_support: T,
    pub low_commitment: T,
    pub high_commitment: T,
    pub rating: T,
}

impl<T: Scalar> EntityDesignRow<T> {
    pub fn from_counts(entity_id: &str, non_support: i64, low: i64, high: i64, rating: T) -> Result<Self> {
        if !rating.is_finite() {
            return Err(Error::NonFinite("rating"));
        }
        Ok(Self {
            entity_id: entity_id.to_string(),
            non_support: log1p_counts(non_support)?,
            low_commitment: log1p_counts(low)?,
            high_commitment: log1p_counts(high)?,
            rating,
        })
    }

    pub fn predictors(&self) -> Vec<T> {
        vec![self.non_support, self.low_commitment, self.high_commitment]
    }
}

/// `rating = β0 + β1·x_non_support + β2·x_low + β3·x_high`.
pub fn ols_fit<T: Scalar>(rows: &[EntityDesignRow<T>]) -> Result<RegressionResult<T>> {
    let x: Vec<Vec<T>> = rows.iter().map(EntityDesignRow::predictors).collect();
    let y: Vec<T> = rows.iter().map(|r| r.rating).collect();
    ols(&x, &y, &PREDICTOR_NAMES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log1p_examples() {
        assert_eq!(log1p_counts::<f64>(0).unwrap(), 0.0);
        assert_relative_eq!(log1p_counts::<f64>(1).unwrap(), std::f64::consts::LN_2, epsilon = 1e-12);
        assert!(log1p_counts::<f64>(-1).is_err());
        assert!(log1p_counts::<f64>(3).unwrap() < log1p_counts::<f64>(4).unwrap());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0f64), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(5.0f64), 24.0f64.ln(), epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(0.5f64), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(0.1f64), 2.252_712_651_734_206, epsilon = 1e-12);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1 - x)^b.
        for &x in &[0.0, 0.1, 0.5, 0.77, 1.0f64] {
            assert_relative_eq!(regularized_incomplete_beta(x, 1.0, 1.0).unwrap(), x, epsilon = 1e-14);
            assert_relative_eq!(regularized_incomplete_beta(x, 3.0, 1.0).unwrap(), x.powi(3), epsilon = 1e-14);
            assert_relative_eq!(regularized_incomplete_beta(x, 1.0, 2.5).unwrap(), 1.0 - (1.0 - x).powf(2.5), epsilon = 1e-14);
        }
        assert!(regularized_incomplete_beta(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn t_p_value_basics() {
        for df in [1, 2, 7, 30, 1000] {
            assert_eq!(student_t_two_sided_p(0.0f64, df).unwrap(), 1.0);
            assert_eq!(student_t_two_sided_p(2.5f64, df).unwrap(), student_t_two_sided_p(-2.5f64, df).unwrap());
        }
        // df = 1 is Cauchy: p = 1 - 2 atan(|t|) / π.
        let p = student_t_two_sided_p(1.0f64, 1).unwrap();
        assert_relative_eq!(p, 0.5, epsilon = 1e-14);
        // df = 2: p = 1 - |t| / sqrt(t² + 2).
        let t = 1.7f64;
        assert_relative_eq!(student_t_two_sided_p(t, 2).unwrap(), 1.0 - t / (t * t + 2.0).sqrt(), epsilon = 1e-13);
        assert!(student_t_two_sided_p(1.0f64, 0).is_err());
        assert_eq!(student_t_two_sided_p(f64::INFINITY, 3).unwrap(), 0.0);
    }

    #[test]
    fn noiseless_fit_is_exact() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.5]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 + 3.0 * r[0]).collect();
        let fit = ols(&x, &y, &["x1"]).unwrap();
        assert_relative_eq!(fit.coefficients[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.coefficients[1], 3.0, epsilon = 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-10));
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64, (i * i) as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        match ols(&x, &y, &["a", "b", "c"]) {
            Err(Error::RankDeficient { column, others }) => {
                assert_eq!(column, "b");
                assert_eq!(others, vec!["a".to_string()]);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let zero_cols: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 0.0]).collect();
        assert!(matches!(ols(&zero_cols, &y, &["a", "z"]), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn too_few_samples() {
        let x = vec![vec![1.0, 2.0, 3.0]; 4];
        assert!(matches!(ols(&x, &[1.0; 4], &["a", "b", "c"]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn csv_layout() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y = [1.0, 3.0, 2.0, 5.0, 4.0];
        let csv = ols(&x, &y, &["x"]).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "term,coef,std_err,t_stat,p_value");
        assert!(lines[1].starts_with("intercept,"));
        assert!(lines[2].starts_with("x,"));
    }
}
