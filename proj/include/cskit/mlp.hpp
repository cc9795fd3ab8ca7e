#pragma once
// Small fully connected regressor (active features -> 32 ReLU -> 32 ReLU -> 1)
// trained with Adam on mean squared error, with early stopping on a dev split.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cskit/features.hpp"

namespace cskit {

inline constexpr int kModelSchemaVersion = 1;

struct Hyper {
  std::size_t hidden = 32;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 500;
  std::size_t patience = 25;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const Hyper&, const Hyper&) = default;
};

// Dense layer, y = W x + b with W row-major rows x cols.
struct Layer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Standardization {
  Feature feature;
  double mean = 0.0;
  double std = 1.0;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct TrainExample {
  FeatureVector features;
  double score = 0.0;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegressorModel {
  FeatureMask mask = FeatureMask::all;
  std::vector<Standardization> standardization;  // one per active feature
  std::vector<Layer> layers;
  std::uint64_t seed = 0;
  Hyper hyper;

  // Pure; reads only the active features.
  double predict(const FeatureVector& features) const;
  std::vector<double> standardize(const FeatureVector& features) const;

  nlohmann::ordered_json to_json() const;
  // Throws ModelError on unknown schema_version or inconsistent shapes.
  static RegressorModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RegressorModel load(const std::filesystem::path& path);

  friend bool operator==(const RegressorModel&, const RegressorModel&) = default;
};

struct TrainReport {
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  double best_dev_loss = 0.0;
  std::size_t best_epoch = 0;  // 0 = initialization was never beaten
  std::size_t epochs_run = 0;
};

// Standardization fitted on `train`. With an empty dev split, early stopping
// watches the training loss. Throws std::invalid_argument with fewer than 2
// training examples. Deterministic for fixed inputs and seed.
RegressorModel train(std::span<const TrainExample> train, std::span<const TrainExample> dev, FeatureMask mask,
                     const Hyper& hyper, std::uint64_t seed, TrainReport* report = nullptr);

namespace mlp {

// Per-layer gradients shaped like the layers.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

std::vector<Layer> init_layers(std::size_t inputs, std::size_t hidden, double output_bias, std::uint64_t seed);
double forward(const std::vector<Layer>& layers, std::span<const double> x);
// Mean squared error over the batch rows (standardized inputs); fills grad
// when non-null.
double loss_and_gradient(const std::vector<Layer>& layers, const std::vector<std::vector<double>>& xs,
                         std::span<const double> ys, Gradients* grad);
std::vector<Standardization> fit_standardization(std::span<const TrainExample> data, FeatureMask mask);

}  // namespace mlp

}  // namespace cskit
