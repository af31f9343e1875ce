//! On-disk system container: a directory holding `manifest.txt`
//! (`key = value` lines) and one Matrix Market file per nonzero matrix.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use nalgebra_sparse::io::{load_coo_from_matrix_market_file, save_to_matrix_market_file};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::bench::{dense_to_csr, Benchmark, SparsePhdae, Structure};
use crate::error::{Error, Result};
use crate::reduce::{Layout, ReducedModel};
use crate::scalar::Real;

pub const MANIFEST: &str = "manifest.txt";

/// Ordered key/value manifest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut m = Manifest::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: expected `key = value`, got `{line}`", no + 1),
            })?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Parsed `usize` field; `Ok(None)` when absent.
    pub fn usize_field(&self, key: &str, path: &Path) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("manifest field `{key}` is not a non-negative integer: `{v}`"),
                })
            })
            .transpose()
    }

    /// Block structure recorded by `structure`, `n1` and `n2`.
    pub fn structure(&self, path: &Path) -> Result<Option<Structure>> {
        let n1 = self.usize_field("n1", path)?;
        let n2 = self.usize_field("n2", path)?;
        let need = |v: Option<usize>, k: &str| {
            v.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("manifest field `{k}` is required by the structure"),
            })
        };
        Ok(match self.get("structure") {
            None | Some("none") => None,
            Some("index1") => Some(Structure::Index1 {
                n1: need(n1, "n1")?,
            }),
            Some("index2") => Some(Structure::Index2 {
                n1: need(n1, "n1")?,
            }),
            Some("mixed") => Some(Structure::Mixed {
                n1: need(n1, "n1")?,
                n2: need(n2, "n2")?,
            }),
            Some(other) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("unknown structure `{other}`"),
                })
            }
        })
    }

    fn set_structure(&mut self, s: Structure) {
        match s {
            Structure::Index1 { n1 } => {
                self.set("structure", "index1").set("n1", n1);
            }
            Structure::Index2 { n1 } => {
                self.set("structure", "index2").set("n1", n1);
            }
            Structure::Mixed { n1, n2 } => {
                self.set("structure", "mixed").set("n1", n1).set("n2", n2);
            }
        }
    }
}

/// A system read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Container<T: Real> {
    pub system: SparsePhdae<T>,
    pub manifest: Manifest,
    /// Matrix files that were absent and defaulted to zero.
    pub defaulted: Vec<&'static str>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csr<T: Real>(path: &Path, m: &CsrMatrix<T>) -> Result<()> {
    let mut coo = CooMatrix::<f64>::new(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        coo.push(i, j, v.as_f64());
    }
    save_to_matrix_market_file(&coo, path).map_err(io_err(path))
}

fn write_dense<T: Real>(path: &Path, m: &DMatrix<T>) -> Result<()> {
    write_csr(path, &dense_to_csr(m))
}

fn read_coo<T: Real>(path: &Path, shape: (usize, usize)) -> Result<CooMatrix<T>> {
    let coo = load_coo_from_matrix_market_file::<f64, _>(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if (coo.nrows(), coo.ncols()) != shape {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!(
                "matrix is {}x{}, manifest implies {}x{}",
                coo.nrows(),
                coo.ncols(),
                shape.0,
                shape.1
            ),
        });
    }
    let mut out = CooMatrix::new(shape.0, shape.1);
    for (i, j, &v) in coo.triplet_iter() {
        if !v.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("non-finite entry at ({}, {})", i + 1, j + 1),
            });
        }
        out.push(i, j, T::lit(v));
    }
    Ok(out)
}

fn coo_dense<T: Real>(coo: &CooMatrix<T>) -> DMatrix<T> {
    let mut d = DMatrix::zeros(coo.nrows(), coo.ncols());
    for (i, j, &v) in coo.triplet_iter() {
        d[(i, j)] += v;
    }
    d
}

fn is_zero_csr<T: Real>(m: &CsrMatrix<T>) -> bool {
    m.values().iter().all(|v| *v == T::zero())
}

/// Writes the matrices and `manifest` (with `n` and `m` filled in) to `dir`.
/// Zero matrices are omitted.
pub fn write_system<T: Real>(dir: &Path, sys: &SparsePhdae<T>, manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = manifest.clone();
    manifest.set("n", sys.n()).set("m", sys.m());
    let sparse = [("E", &sys.e), ("J", &sys.j), ("R", &sys.r)];
    let dense = [("B", &sys.b), ("P", &sys.p), ("S", &sys.s), ("N", &sys.n)];
    for (name, m) in sparse {
        let path = dir.join(format!("{name}.mtx"));
        remove_stale(&path)?;
        if !is_zero_csr(m) {
            write_csr(&path, m)?;
        }
    }
    for (name, m) in dense {
        let path = dir.join(format!("{name}.mtx"));
        remove_stale(&path)?;
        if m.iter().any(|v| *v != T::zero()) {
            write_dense(&path, m)?;
        }
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest.render()).map_err(io_err(&path))
}

fn remove_stale(path: &Path) -> Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(io_err(path)(e)),
        _ => Ok(()),
    }
}

pub fn write_benchmark<T: Real>(dir: &Path, bench: &Benchmark<T>) -> Result<()> {
    let mut m = Manifest::new();
    m.set("name", &bench.name);
    m.set_structure(bench.structure);
    write_system(dir, &bench.system, &m)
}

/// Reduced models carry their method, structure evidence and polynomial part
/// (`P0.mtx`, `P1.mtx`, and `D1.mtx` for the coefficient of `u̇`).
pub fn write_reduced<T: Real>(dir: &Path, red: &ReducedModel<T>) -> Result<()> {
    let mut m = Manifest::new();
    m.set("theorem", red.method.theorem_tag())
        .set("method", red.method.name())
        .set("order", red.order())
        .set("ph_valid", red.ph_valid)
        .set("min_eig_w", format!("{:e}", red.min_eig_w.as_f64()))
        .set("augmented_input", red.augmented_input())
        .set("dropped_columns", red.dropped_columns)
        .set("interpolation_points", red.data.len());
    match red.layout {
        Layout::Ode => {
            m.set("structure", "none");
        }
        Layout::Index1 { n1, .. } => m.set_structure(Structure::Index1 { n1 }),
        Layout::Mixed { n1, n2, .. } => m.set_structure(Structure::Mixed { n1, n2 }),
    }
    write_system(dir, &SparsePhdae::from_dense(&red.system), &m)?;
    let pp = &red.polynomial_part;
    for (name, mat) in [
        ("P0", Some(&pp.p0)),
        ("P1", Some(&pp.p1)),
        ("D1", red.d1.as_ref()),
    ] {
        let path = dir.join(format!("{name}.mtx"));
        remove_stale(&path)?;
        if let Some(mat) = mat {
            if mat.iter().any(|v| *v != T::zero()) {
                write_dense(&path, mat)?;
            }
        }
    }
    Ok(())
}

/// Reads a container. `n` and `m` come from the manifest; missing matrix
/// files default to zero and are listed in [`Container::defaulted`].
pub fn read_system<T: Real>(dir: &Path) -> Result<Container<T>> {
    if !dir.is_dir() {
        return Err(Error::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "container directory not found",
            ),
        });
    }
    let mpath = dir.join(MANIFEST);
    let text = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    let manifest = Manifest::parse(&mpath, &text)?;
    let need = |k: &str| -> Result<usize> {
        manifest
            .usize_field(k, &mpath)?
            .ok_or_else(|| Error::Parse {
                path: mpath.clone(),
                message: format!("manifest field `{k}` is missing"),
            })
    };
    let (n, m) = (need("n")?, need("m")?);
    let mut defaulted = Vec::new();
    let mut load = |name: &'static str, shape: (usize, usize)| -> Result<CooMatrix<T>> {
        let path: PathBuf = dir.join(format!("{name}.mtx"));
        if path.exists() {
            read_coo(&path, shape)
        } else {
            defaulted.push(name);
            Ok(CooMatrix::new(shape.0, shape.1))
        }
    };
    let e = CsrMatrix::from(&load("E", (n, n))?);
    let j = CsrMatrix::from(&load("J", (n, n))?);
    let r = CsrMatrix::from(&load("R", (n, n))?);
    let b = coo_dense(&load("B", (n, m))?);
    let p = coo_dense(&load("P", (n, m))?);
    let s = coo_dense(&load("S", (m, m))?);
    let nn = coo_dense(&load("N", (m, m))?);
    Ok(Container {
        system: SparsePhdae {
            e,
            j,
            r,
            b,
            p,
            s,
            n: nn,
        },
        manifest,
        defaulted,
    })
}

/// Reads an optional extra dense matrix (such as `P0`) from a container.
pub fn read_extra<T: Real>(
    dir: &Path,
    name: &str,
    shape: (usize, usize),
) -> Result<Option<DMatrix<T>>> {
    let path = dir.join(format!("{name}.mtx"));
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(coo_dense(&read_coo(&path, shape)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{mass_spring_chain, MassSpringSpec};

    #[test]
    fn chain_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = mass_spring_chain::<f64>(&MassSpringSpec::random(6, 3)).unwrap();
        write_benchmark(dir.path(), &b).unwrap();
        assert!(!dir.path().join("P.mtx").exists());
        let c = read_system::<f64>(dir.path()).unwrap();
        assert_eq!(c.system, b.system);
        assert_eq!(c.manifest.structure(dir.path()).unwrap(), Some(b.structure));
        assert_eq!(c.defaulted, vec!["P", "S", "N"]);
    }

    #[test]
    fn missing_matrices_default_to_zero() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(MANIFEST), "# tiny\nn = 2\nm = 1\n").unwrap();
        let c = read_system::<f64>(dir.path()).unwrap();
        assert_eq!(c.defaulted.len(), 7);
        assert_eq!(c.system.n(), 2);
        assert_eq!(c.system.to_dense().unwrap().e().amax(), 0.0);
    }

    #[test]
    fn parse_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(MANIFEST), "n = 2\nm: 1\n").unwrap();
        let err = read_system::<f64>(dir.path()).unwrap_err().to_string();
        assert!(
            err.contains("manifest.txt") && err.contains("line 2"),
            "{err}"
        );

        fs::write(dir.path().join(MANIFEST), "n = 2\nm = 1\n").unwrap();
        fs::write(
            dir.path().join("E.mtx"),
            "%%MatrixMarket matrix coordinate real general\n3 3 1\n1 1 1.0\n",
        )
        .unwrap();
        let err = read_system::<f64>(dir.path()).unwrap_err().to_string();
        assert!(err.contains("E.mtx"), "{err}");

        let err = read_system::<f64>(&dir.path().join("nope"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("nope"));
    }
}
