#include "cskit/evaluation.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "cskit/parallel.hpp"
#include "cskit/rng.hpp"

namespace cskit {

std::size_t min_dataset_size(std::size_t folds) { return 3 * folds; }

std::vector<FoldSplit> make_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (n < min_dataset_size(folds)) {
    throw std::invalid_argument("dataset too small for " + std::to_string(folds) + "-fold cross-validation: " +
                                std::to_string(n) + " examples, need at least " +
                                std::to_string(min_dataset_size(folds)));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  auto block = [&](std::size_t k) {
    return std::span<const std::size_t>(order).subspan(k * n / folds, (k + 1) * n / folds - k * n / folds);
  };
  std::vector<FoldSplit> splits(folds);
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t dev_block = (k + 1) % folds;
    for (std::size_t b = 0; b < folds; ++b) {
      auto ids = block(b);
      auto& dst = b == k ? splits[k].test : b == dev_block ? splits[k].dev : splits[k].train;
      dst.insert(dst.end(), ids.begin(), ids.end());
    }
  }
  return splits;
}

EvaluationReport cross_validate(std::span<const TrainExample> data, FeatureMask mask, const CvOptions& options) {
  const auto splits = make_folds(data.size(), options.folds, options.seed);
  EvaluationReport report;
  report.mask = mask;
  report.predictions.assign(data.size(), 0.0);
  report.folds.resize(splits.size());

  auto gather = [&](const std::vector<std::size_t>& ids) {
    std::vector<TrainExample> out;
    out.reserve(ids.size());
    for (std::size_t i : ids) out.push_back(data[i]);
    return out;
  };

  // Each fold writes disjoint prediction slots.
  parallel_for(splits.size(), options.jobs, [&](std::size_t k) {
    const FoldSplit& s = splits[k];
    const auto train_set = gather(s.train);
    const auto dev_set = gather(s.dev);
    const RegressorModel model = train(train_set, dev_set, mask, options.hyper, options.seed + k);
    std::vector<double> pred, gold;
    for (std::size_t i : s.test) {
      report.predictions[i] = model.predict(data[i].features);
      pred.push_back(report.predictions[i]);
      gold.push_back(data[i].score);
    }
    report.folds[k] = {k, spearman(pred, gold)};
  });

  std::vector<double> gold;
  gold.reserve(data.size());
  for (const auto& e : data) gold.push_back(e.score);
  report.pooled = spearman(report.predictions, gold);
  return report;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  using nlohmann::ordered_json;
  auto corr = [](const Correlation& c) { return ordered_json{{"rho", c.rho}, {"p", c.p}, {"n", c.n}}; };
  ordered_json j;
  j["pooled"] = corr(report.pooled);
  j["folds"] = ordered_json::array();
  for (const auto& f : report.folds) {
    ordered_json fj{{"fold", f.fold}};
    fj.update(corr(f.corr));
    j["folds"].push_back(std::move(fj));
  }
  j["mask"] = to_string(report.mask);
  return j;
}

std::vector<TrainExample> to_train_examples(std::span<const FeaturizedExample> rows) {
  std::vector<TrainExample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.features, r.human_score});
  return out;
}

}  // namespace cskit
