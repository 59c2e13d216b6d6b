//! Count-based (SPPMI) and prediction-based (SGNS) word embeddings, plus two
//! evaluation harnesses: compositional relation identification and
//! similarity-vote dialect identification.
//!
//! The pipeline runs corpus → [`corpus::Vocabulary`] → either
//! [`cooc::CoocMatrix`] → [`sppmi::SparseEmbeddings`] or
//! [`sgns::train`] → [`embedspace::DenseEmbeddings`]. Both embedding kinds
//! implement [`embedspace::EmbeddingSpace`], which is all the evaluation
//! modules need.

pub mod cooc;
pub mod corpus;
pub mod dialect;
pub mod embedspace;
pub mod error;
pub mod releval;
pub mod sgns;
pub mod sppmi;

pub use cooc::{count_cooccurrences, merge_counts, CoocConfig, CoocMatrix};
pub use corpus::{
    build_vocabulary, intersect_vocabularies, normalize_sentence, CorpusFiles, Normalized,
    PreprocessConfig, SentenceSource, Vocabulary,
};
pub use dialect::{
    dedup_dictionaries, evaluate_dialect, DialectClassifier, DialectDictionary, DialectReport,
    DictionaryClassifier, EmbeddingClassifier, LabeledPost, Method, TargetSet,
};
pub use embedspace::{
    analogy_query, cosine, nearest_neighbors, AnalogyOptions, Cosine, DenseEmbeddings,
    EmbeddingSpace, Neighbor, WordIndex,
};
pub use error::{Error, Result};
pub use releval::{
    evaluate_relations, generate_questions, parse_tuple_file, vet_dataset, AnalogyCategory,
    AnalogyQuestion, RelationKind, RelationReport,
};
pub use sgns::{init_model, train, SgnsConfig, SgnsModel, TrainReport};
pub use sppmi::{build_sppmi, SparseEmbeddings, SppmiConfig};
