//! Structure-preserving interpolatory model reduction for linear
//! port-Hamiltonian descriptor systems.

pub mod bench;
pub mod error;
pub mod io;
pub mod irka;
pub mod linalg;
pub mod model;
pub mod reduce;
pub mod regularize;
pub mod scalar;
pub mod transfer;

pub use error::{Error, Result};
pub use scalar::Real;

pub use bench::{Benchmark, MassSpringSpec, OseenSpec, SparsePhdae, Structure};
pub use irka::{irka_reduce, IrkaConfig, IrkaInit, IrkaTrace};
pub use model::{GenericLti, PhdaeSystem};
pub use reduce::{reduce, BasisOptions, Blocks, InterpolationData, Method, ReducedModel};
pub use transfer::Transfer;

/// Double-precision aliases.
pub type System = PhdaeSystem<f64>;
pub type Lti = GenericLti<f64>;
pub type Reduced = ReducedModel<f64>;
pub type Data = InterpolationData<f64>;
pub type SparseSystem = SparsePhdae<f64>;
pub type Bench = Benchmark<f64>;
pub type Irka = IrkaConfig<f64>;
