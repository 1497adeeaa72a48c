//! Operators: the Bergman projection, the positive operator, the maximal
//! function and the experiments built on them.

pub mod good_lambda;
pub mod lemmas;
pub mod maximal;
pub mod necessity;
pub mod norms;
pub mod projection;
pub mod test_function;

pub(crate) use good_lambda::slope;
pub use good_lambda::{good_lambda_experiment, GoodLambdaReport, GoodLambdaSpec, RatioCell};
pub use lemmas::{regularizer_lemma_suite, LemmaContext, LemmaSpec, LemmaSuiteReport};
pub use maximal::{maximal_function, maximal_many, DictionarySpec, MaximalDictionary, MaximalFunction};
pub use necessity::{
    ball_pair, necessity_probe, two_ball_lower_bound, NecessityReport, NecessityRow, NecessitySpec, Selection, TwoBallReport,
    TwoBallSpec,
};
pub use norms::{norm_ratios, probe_grid, random_bundle, weighted_norm_ratio, NormRatioReport, NormSpec, OperatorTag};
pub use projection::{bergman_project, positive_project, BundleValues, Projector};
pub use test_function::{Bump, TestFunction};
