pub mod compactness;
pub mod families;
pub mod graph;
pub mod kernel;
pub mod measure;
pub mod metric;
pub mod scalar;
pub mod transport;
