pub mod datasets;
pub mod dbn;
pub mod error;
pub mod model_io;
pub mod numerics;
pub mod options;
pub mod rbm;

pub use datasets::{builtin, Dataset};
pub use dbn::{Dbn, LayerGradient, SupervisedTrace};
pub use error::{Error, Result};
pub use model_io::{load_model, save_model, Metadata};
pub use numerics::{Matrix, RngState};
pub use options::{Objective, TrainOptions, TrainTrace};
pub use rbm::{CdGradients, Rbm, Reconstruction};
