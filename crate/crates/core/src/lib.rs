pub mod checkpoint;
pub mod dataset;
pub mod featurize;
pub mod frontend;
pub mod lang;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod run;
pub mod tensor;
pub mod train;
