#pragma once
// Rotating train/dev/test cross-validation of the regressor, scored with
// Spearman correlation against human scores.

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "cskit/features.hpp"
#include "cskit/mlp.hpp"
#include "cskit/spearman.hpp"

namespace cskit {

struct CvOptions {
  std::size_t folds = 10;
  Hyper hyper;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;  // folds trained concurrently; results do not depend on it
};

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

// Indices are shuffled once by seed and cut into `folds` contiguous blocks;
// rotation k tests on block k, early-stops on block k+1 and trains on the
// rest. Throws std::invalid_argument when a test block would hold fewer
// than 3 examples.
std::vector<FoldSplit> make_folds(std::size_t n, std::size_t folds, std::uint64_t seed);
std::size_t min_dataset_size(std::size_t folds);

struct FoldResult {
  std::size_t fold = 0;
  Correlation corr;
};

struct EvaluationReport {
  FeatureMask mask = FeatureMask::all;
  Correlation pooled;
  std::vector<FoldResult> folds;
  std::vector<double> predictions;  // test-time prediction for each example
};

EvaluationReport cross_validate(std::span<const TrainExample> data, FeatureMask mask, const CvOptions& options);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);

std::vector<TrainExample> to_train_examples(std::span<const FeaturizedExample> rows);

}  // namespace cskit
