use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

/// Right interpolation points `σᵢ` with tangent directions `bᵢ`, closed under
/// conjugation.
///
/// Stored in canonical order: real points keep their position, and every
/// non-real point with positive imaginary part is immediately followed by
/// its conjugate partner.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationData<T: Real> {
    points: Vec<Complex<T>>,
    directions: Vec<DVector<Complex<T>>>,
}

fn close<T: Real>(a: Complex<T>, b: Complex<T>, tol: f64) -> bool {
    (a - b).modulus().as_f64() <= tol * (1.0 + a.modulus().as_f64())
}

fn vec_close<T: Real>(a: &DVector<Complex<T>>, b: &DVector<Complex<T>>, tol: f64) -> bool {
    (a - b).norm().as_f64() <= tol * (1.0 + a.norm().as_f64())
}

const PAIR_TOL: f64 = 1e-12;

impl<T: Real> InterpolationData<T> {
    /// Validates closure under conjugation; real points need real directions.
    pub fn new(points: Vec<Complex<T>>, directions: Vec<DVector<Complex<T>>>) -> Result<Self> {
        Self::check_shape(&points, &directions)?;
        let n = points.len();
        let mut used = vec![false; n];
        let mut out_p = Vec::with_capacity(n);
        let mut out_d = Vec::with_capacity(n);
        for i in 0..n {
            if used[i] {
                continue;
            }
            let (s, b) = (points[i], &directions[i]);
            if s.im == T::zero() {
                if b.iter().any(|z| z.im != T::zero()) {
                    return Err(Error::InterpolationData(format!(
                        "real point #{i} ({}) has a complex direction",
                        s.re
                    )));
                }
                used[i] = true;
                out_p.push(s);
                out_d.push(b.clone());
                continue;
            }
            let bc = b.map(|z| z.conj());
            let partner = (0..n).find(|&j| {
                j != i
                    && !used[j]
                    && close(points[j], s.conj(), PAIR_TOL)
                    && vec_close(&directions[j], &bc, PAIR_TOL)
            });
            let Some(j) = partner else {
                return Err(Error::InterpolationData(format!(
                    "point #{i} ({} {:+}i) has no conjugate partner with conjugate direction",
                    s.re, s.im
                )));
            };
            used[i] = true;
            used[j] = true;
            let (up, upd) = if s.im > T::zero() {
                (s, b.clone())
            } else {
                (s.conj(), bc)
            };
            out_p.push(up);
            out_d.push(upd.clone());
            out_p.push(up.conj());
            out_d.push(upd.map(|z| z.conj()));
        }
        Ok(Self {
            points: out_p,
            directions: out_d,
        })
    }

    /// Adds any missing conjugate partners and makes real-point directions real.
    ///
    /// Non-real points within `1e-12` of their partner are matched rather
    /// than duplicated.
    pub fn with_closure(
        points: Vec<Complex<T>>,
        directions: Vec<DVector<Complex<T>>>,
    ) -> Result<Self> {
        Self::check_shape(&points, &directions)?;
        let mut p = Vec::with_capacity(points.len() * 2);
        let mut d: Vec<DVector<Complex<T>>> = Vec::with_capacity(points.len() * 2);
        let mut used = vec![false; points.len()];
        for i in 0..points.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let s = points[i];
            if s.im == T::zero() {
                p.push(s);
                d.push(directions[i].map(|z| cplx(z.re, T::zero())));
                continue;
            }
            let partner =
                (i + 1..points.len()).find(|&j| !used[j] && close(points[j], s.conj(), PAIR_TOL));
            if let Some(j) = partner {
                used[j] = true;
            }
            let (up, ub) = if s.im > T::zero() {
                (s, directions[i].clone())
            } else {
                (s.conj(), directions[i].map(|z| z.conj()))
            };
            p.push(up);
            d.push(ub.clone());
            p.push(up.conj());
            d.push(ub.map(|z| z.conj()));
        }
        Self::new(p, d)
    }

    /// Real points with real directions.
    pub fn real(points: &[T], directions: &[DVector<T>]) -> Result<Self> {
        let p = points.iter().map(|&s| cplx(s, T::zero())).collect();
        let d = directions
            .iter()
            .map(|b| b.map(|x| cplx(x, T::zero())))
            .collect();
        Self::new(p, d)
    }

    /// `r` log-spaced real points on `[lo, hi]` with all-ones directions.
    pub fn logspace(lo: f64, hi: f64, r: usize, m: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InterpolationData(
                "at least one interpolation point is required".into(),
            ));
        }
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InterpolationData(format!(
                "invalid interval [{lo}, {hi}]"
            )));
        }
        let points: Vec<T> = if r == 1 {
            vec![T::lit((lo * hi).sqrt())]
        } else {
            let (a, b) = (lo.log10(), hi.log10());
            (0..r)
                .map(|k| T::lit(10f64.powf(a + (b - a) * k as f64 / (r - 1) as f64)))
                .collect()
        };
        let dirs = vec![DVector::from_element(m, T::one()); r];
        Self::real(&points, &dirs)
    }

    fn check_shape(points: &[Complex<T>], directions: &[DVector<Complex<T>>]) -> Result<()> {
        if points.is_empty() {
            return Err(Error::InterpolationData(
                "at least one interpolation point is required".into(),
            ));
        }
        if points.len() != directions.len() {
            return Err(Error::InterpolationData(format!(
                "{} points but {} directions",
                points.len(),
                directions.len()
            )));
        }
        let m = directions[0].len();
        if m == 0 || directions.iter().any(|b| b.len() != m) {
            return Err(Error::InterpolationData(
                "directions must share one nonzero length".into(),
            ));
        }
        if points
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
            || directions
                .iter()
                .any(|b| b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())))
        {
            return Err(Error::InterpolationData(
                "non-finite point or direction".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn directions(&self) -> &[DVector<Complex<T>>] {
        &self.directions
    }

    pub fn input_dim(&self) -> usize {
        self.directions[0].len()
    }

    pub fn check_inputs(&self, m: usize) -> Result<()> {
        if self.input_dim() != m {
            return Err(Error::InterpolationData(format!(
                "directions have length {}, system has {m} inputs",
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Indices of the points that need a solve: real points and the
    /// positive-imaginary member of each pair.
    pub(crate) fn representatives(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.points[i].im >= T::zero())
            .collect()
    }

    /// Real direction matrix `𝔅` (m × r) matching the realified basis column order.
    pub(crate) fn real_directions(&self) -> DMatrix<T> {
        let m = self.input_dim();
        let mut out = DMatrix::zeros(m, self.len());
        let mut k = 0;
        while k < self.len() {
            let b = &self.directions[k];
            if self.points[k].im == T::zero() {
                out.set_column(k, &b.map(|z| z.re));
                k += 1;
            } else {
                out.set_column(k, &b.map(|z| z.re));
                out.set_column(k + 1, &b.map(|z| z.im));
                k += 2;
            }
        }
        out
    }
}
