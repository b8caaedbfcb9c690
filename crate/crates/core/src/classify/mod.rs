//! SVM classification under repeated stratified 70/30 splits.

pub mod eval;
pub mod svm;

pub use eval::{accuracy, evaluate, make_splits, micro_f, EvalResult, Split, SplitPlan, REPETITIONS, TEST_FRACTION};
pub use svm::{train_svm, Gamma, Kernel, KernelSpec, Standardizer, SvmModel, SvmParams};
