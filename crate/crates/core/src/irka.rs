//! Iterative selection of interpolation points around the structured reducers.

use std::io::Write;

use nalgebra::{Complex, ComplexField, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::PhdaeSystem;
use crate::reduce::{reduce, BasisOptions, Blocks, InterpolationData, Method, ReducedModel};
use crate::scalar::{cplx, Real};
use crate::transfer::csv_error;

/// Poles this close to the imaginary axis are moved before mirroring.
pub const AXIS_GUARD: f64 = 1e-8;

/// Where the iteration starts.
#[derive(Debug, Clone, PartialEq)]
pub enum IrkaInit<T: Real> {
    Data(InterpolationData<T>),
    /// `r` log-spaced real points on `[lo, hi]`; all-ones directions unless
    /// a seed for random directions is given.
    LogSpaced {
        lo: f64,
        hi: f64,
        direction_seed: Option<u64>,
    },
}

impl<T: Real> Default for IrkaInit<T> {
    fn default() -> Self {
        IrkaInit::LogSpaced {
            lo: 1e-2,
            hi: 1e4,
            direction_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrkaConfig<T: Real> {
    pub r: usize,
    pub max_iterations: usize,
    /// Bound on [`convergence_metric`] between successive point sets.
    pub tol: f64,
    pub init: IrkaInit<T>,
    pub basis: BasisOptions,
}

impl<T: Real> IrkaConfig<T> {
    pub fn new(r: usize) -> Self {
        Self {
            r,
            max_iterations: 100,
            tol: 1e-6,
            init: IrkaInit::default(),
            basis: BasisOptions::default(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::Config("reduced order r must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn initial_data(&self, m: usize) -> Result<InterpolationData<T>> {
        match &self.init {
            IrkaInit::Data(d) => {
                d.check_inputs(m)?;
                Ok(d.clone())
            }
            IrkaInit::LogSpaced {
                lo,
                hi,
                direction_seed,
            } => {
                let base = InterpolationData::<T>::logspace(*lo, *hi, self.r, m)?;
                let Some(seed) = direction_seed else {
                    return Ok(base);
                };
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let dirs: Vec<DVector<T>> = (0..self.r)
                    .map(|_| DVector::from_fn(m, |_, _| T::lit(rng.random_range(-1.0..1.0))))
                    .collect();
                let pts: Vec<T> = base.points().iter().map(|z| z.re).collect();
                InterpolationData::real(&pts, &dirs)
            }
        }
    }
}

/// One iteration of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IrkaIteration {
    pub iteration: usize,
    /// Points used to build this iterate.
    pub points: Vec<Complex<f64>>,
    pub poles: Vec<Complex<f64>>,
    /// Change from `points` to the mirrored poles.
    pub metric: f64,
    pub ph_valid: bool,
    pub min_eig_w: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrkaTrace {
    pub iterations: Vec<IrkaIteration>,
    pub converged: bool,
    /// Iteration whose model was returned.
    pub selected: usize,
}

impl IrkaTrace {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// CSV: `iteration, metric, min_eig_W`, then `re_sigma_k, im_sigma_k`
    /// pairs (padded when the order shrank).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let width = self
            .iterations
            .iter()
            .map(|it| it.points.len())
            .max()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iteration".to_string(), "metric".into(), "min_eig_W".into()];
        for k in 1..=width {
            header.push(format!("re_sigma_{k}"));
            header.push(format!("im_sigma_{k}"));
        }
        w.write_record(&header).map_err(csv_error)?;
        for it in &self.iterations {
            let mut row = vec![
                it.iteration.to_string(),
                format!("{:e}", it.metric),
                format!("{:e}", it.min_eig_w),
            ];
            for k in 0..width {
                match it.points.get(k) {
                    Some(z) => {
                        row.push(format!("{:e}", z.re));
                        row.push(format!("{:e}", z.im));
                    }
                    None => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                }
            }
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<irka trace>".into(),
            source: e,
        })
    }
}

/// `σᵢ = −λᵢ`, with poles on or within [`AXIS_GUARD`] of the imaginary axis
/// first moved to real part `−AXIS_GUARD`.
///
/// Unstable poles (possible only when the reducer does not enforce `Ŵ ⪰ 0`)
/// are reflected to `Re λᵢ − i Im λᵢ` so every point stays in the right half
/// plane.
pub fn mirror_and_sanitize<T: Real>(poles: &[Complex<T>]) -> Vec<Complex<T>> {
    let guard = T::lit(AXIS_GUARD);
    let mut unstable = 0;
    let out = poles
        .iter()
        .map(|l| {
            let re = if l.re.abs() <= guard {
                guard
            } else if l.re > T::zero() {
                unstable += 1;
                l.re
            } else {
                -l.re
            };
            cplx(re, -l.im)
        })
        .collect();
    if unstable > 0 {
        log::warn!("{unstable} unstable reduced pole(s) reflected into the right half plane");
    }
    out
}

/// Largest relative move `|σᵢ − σ'_π(i)| / (1 + |σᵢ|)` under a matching `π`.
///
/// Up to 20 points the matching is greedy on the relative distance; beyond
/// that, both sets are sorted by `(|σ|, arg σ)` and matched in order.
pub fn convergence_metric<T: Real>(prev: &[Complex<T>], next: &[Complex<T>]) -> Result<f64> {
    if prev.len() != next.len() {
        return Err(Error::dim(format!(
            "point sets have {} and {} elements",
            prev.len(),
            next.len()
        )));
    }
    let a: Vec<Complex<f64>> = prev
        .iter()
        .map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))
        .collect();
    let b: Vec<Complex<f64>> = next
        .iter()
        .map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))
        .collect();
    let rel = |x: Complex<f64>, y: Complex<f64>| (x - y).norm() / (1.0 + x.norm());
    if a.len() > 20 {
        let key = |z: &Complex<f64>| (z.norm(), z.arg());
        let mut sa = a.clone();
        let mut sb = b.clone();
        sa.sort_by(|x, y| {
            key(x)
                .partial_cmp(&key(y))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        sb.sort_by(|x, y| {
            key(x)
                .partial_cmp(&key(y))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        return Ok(sa
            .iter()
            .zip(&sb)
            .map(|(x, y)| rel(*x, *y))
            .fold(0.0, f64::max));
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push((rel(*x, *y), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn to_f64<T: Real>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

/// Reduces with `data` and returns the model with the next interpolation data
/// (mirrored poles, residue directions).
pub fn irka_step<T: Real>(
    sys: &PhdaeSystem<T>,
    method: Method,
    blocks: Blocks,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<(ReducedModel<T>, InterpolationData<T>)> {
    let red = reduce(sys, method, blocks, data, opts)?;
    let pr = red.pole_residue().map_err(|e| match e {
        Error::NotPositiveDefinite(_) => Error::DegenerateBasis(format!(
            "reduced E became singular at points [{}] ({e}); `{}` does not keep it definite",
            data.points()
                .iter()
                .map(|z| format!("{:.3e}", to_f64(z)))
                .collect::<Vec<_>>()
                .join(", "),
            method.name()
        )),
        e => e,
    })?;
    if pr.poles.is_empty() {
        return Err(Error::DegenerateBasis(
            "reduced model has no finite poles".into(),
        ));
    }
    let points = mirror_and_sanitize(&pr.poles);
    let m = sys.m();
    let dirs: Vec<DVector<Complex<T>>> = pr
        .right
        .iter()
        .map(|b| {
            if b.iter().all(|z| z.modulus() == T::zero()) {
                DVector::from_element(m, cplx(T::one(), T::zero()))
            } else {
                b.clone()
            }
        })
        .collect();
    let next = InterpolationData::with_closure(points, dirs)?;
    Ok((red, next))
}

/// Iterates [`irka_step`] until the point sets stop moving.
///
/// When `max_iterations` is reached the iterate with the smallest point change
/// is returned and the trace is marked as not converged.
pub fn irka_reduce<T: Real>(
    sys: &PhdaeSystem<T>,
    method: Method,
    blocks: Blocks,
    cfg: &IrkaConfig<T>,
) -> Result<(ReducedModel<T>, IrkaTrace)> {
    cfg.check()?;
    let mut data = cfg.initial_data(sys.m())?;
    let mut trace = IrkaTrace::default();
    let mut best: Option<(f64, ReducedModel<T>, usize)> = None;
    for it in 1..=cfg.max_iterations {
        let (red, next) = irka_step(sys, method, blocks, &data, &cfg.basis)?;
        let metric = if next.len() == data.len() {
            convergence_metric(data.points(), next.points())?
        } else {
            f64::INFINITY
        };
        let pr_poles: Vec<Complex<f64>> = next.points().iter().map(|s| -to_f64(s)).collect();
        trace.iterations.push(IrkaIteration {
            iteration: it,
            points: data.points().iter().map(to_f64).collect(),
            poles: pr_poles,
            metric,
            ph_valid: red.ph_valid,
            min_eig_w: red.min_eig_w.as_f64(),
        });
        log::debug!(
            "irka iteration {it}: metric {metric:.3e}, order {}",
            red.order()
        );
        if metric <= cfg.tol {
            trace.converged = true;
            trace.selected = it;
            return Ok((red, trace));
        }
        if best.as_ref().is_none_or(|(m, _, _)| metric < *m) {
            best = Some((metric, red, it));
        }
        data = next;
    }
    let (metric, red, it) = best.ok_or(Error::NoConvergence)?;
    log::warn!(
        "irka did not converge in {} iterations; returning iteration {it} (metric {metric:.3e})",
        cfg.max_iterations
    );
    trace.selected = it;
    Ok((red, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, DMatrix};

    fn fixture() -> PhdaeSystem<f64> {
        PhdaeSystem::collocated(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0])),
            dmatrix![0.0, 1.0, 0.0; -1.0, 0.0, 1.0; 0.0, -1.0, 0.0],
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0])),
            dmatrix![1.0; 0.0; 0.0],
        )
        .unwrap()
    }

    #[test]
    fn mirror_examples() {
        let s = mirror_and_sanitize(&[cplx(-1.0, 0.0)]);
        assert_eq!(s[0], cplx(1.0, 0.0));
        let s = mirror_and_sanitize(&[cplx(0.0, 1.0), cplx(0.0, -1.0)]);
        assert_eq!(s, vec![cplx(1e-8, -1.0), cplx(1e-8, 1.0)]);
        let s = mirror_and_sanitize(&[cplx(-1.0, 2.0), cplx(-1.0, -2.0)]);
        assert_eq!(s, vec![cplx(1.0, -2.0), cplx(1.0, 2.0)]);
        // the guard never moves a point by more than 2e-8
        let s = mirror_and_sanitize(&[cplx(9e-9, 3.0)]);
        assert!((s[0] - cplx(-9e-9, -3.0)).norm() <= 2e-8);
        let s = mirror_and_sanitize(&[cplx(2.0, 1.0)]);
        assert_eq!(s[0], cplx(2.0, -1.0));
    }

    #[test]
    fn metric_examples() {
        let a = [cplx(1.0, 0.0), cplx(2.0, 0.0)];
        let b = [cplx(2.0, 0.0), cplx(1.0, 0.0)];
        assert_eq!(convergence_metric(&a, &b).unwrap(), 0.0);
        let m = convergence_metric(&[cplx(1.0, 0.0)], &[cplx(1.001, 0.0)]).unwrap();
        assert!((m - 5e-4).abs() < 1e-12);
        assert_eq!(
            convergence_metric(&[cplx(1.0, 0.0)], &[cplx(10.0, 0.0)]).unwrap(),
            4.5
        );
        assert!(convergence_metric(&a, &b[..1]).is_err());
    }

    #[test]
    fn index2_fixture_converges_in_two_steps() {
        let sys = fixture();
        for s0 in [1e-2, 0.3, 1.0, 5.0, 1e2] {
            let mut cfg = IrkaConfig::new(1);
            cfg.init = IrkaInit::Data(
                InterpolationData::real(&[s0], &[DVector::from_element(1, 1.0)]).unwrap(),
            );
            let (red, trace) =
                irka_reduce(&sys, Method::Index2, Blocks { n1: 2, n2: 0 }, &cfg).unwrap();
            assert!(trace.converged);
            assert!(trace.len() <= 2, "{s0}: {} iterations", trace.len());
            assert!(
                (trace.iterations.last().unwrap().points[0] - Complex::new(1.0, 0.0)).norm()
                    < 1e-12
            );
            let pr = red.pole_residue().unwrap();
            assert!((pr.poles[0] - cplx(-1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_csv_layout() {
        let sys = fixture();
        let cfg = IrkaConfig::new(1);
        let (_, trace) = irka_reduce(&sys, Method::Index2, Blocks { n1: 2, n2: 0 }, &cfg).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,metric,min_eig_W,re_sigma_1,im_sigma_1"
        );
        assert_eq!(lines.count(), trace.len());
    }

    #[test]
    fn bad_config_is_rejected() {
        let sys = fixture();
        let mut cfg = IrkaConfig::new(0);
        assert!(irka_reduce(&sys, Method::Index2, Blocks { n1: 2, n2: 0 }, &cfg).is_err());
        cfg.r = 1;
        cfg.tol = 0.0;
        assert!(irka_reduce(&sys, Method::Index2, Blocks { n1: 2, n2: 0 }, &cfg).is_err());
    }
}
