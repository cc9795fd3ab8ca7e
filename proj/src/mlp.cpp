#include "cskit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cskit/atomic_file.hpp"
#include "cskit/rng.hpp"
#include "cskit/text_util.hpp"

namespace cskit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace mlp {

std::vector<Layer> init_layers(std::size_t inputs, std::size_t hidden, double output_bias, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t shape[][2] = {{hidden, inputs}, {hidden, hidden}, {1, hidden}};
  std::vector<Layer> layers;
  for (const auto& s : shape) {
    Layer l;
    l.rows = s[0];
    l.cols = s[1];
    const double limit = std::sqrt(6.0 / static_cast<double>(l.rows + l.cols));
    l.weights.resize(l.rows * l.cols);
    for (double& w : l.weights) w = rng.uniform(-limit, limit);
    l.bias.assign(l.rows, 0.0);
    layers.push_back(std::move(l));
  }
  layers.back().bias[0] = output_bias;
  return layers;
}

namespace {

// Activations after each layer; the last one is the linear output.
void forward_all(const std::vector<Layer>& layers, std::span<const double> x, std::vector<std::vector<double>>& acts) {
  acts.resize(layers.size());
  std::span<const double> in = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    auto& out = acts[k];
    out.assign(l.rows, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      double s = l.bias[r];
      const double* w = &l.weights[r * l.cols];
      for (std::size_t c = 0; c < l.cols; ++c) s += w[c] * in[c];
      out[r] = (k + 1 < layers.size() && s < 0.0) ? 0.0 : s;
    }
    in = out;
  }
}

}  // namespace

double forward(const std::vector<Layer>& layers, std::span<const double> x) {
  std::vector<std::vector<double>> acts;
  forward_all(layers, x, acts);
  return acts.back()[0];
}

double loss_and_gradient(const std::vector<Layer>& layers, const std::vector<std::vector<double>>& xs,
                         std::span<const double> ys, Gradients* grad) {
  const double n = static_cast<double>(xs.size());
  if (grad) {
    grad->weights.resize(layers.size());
    grad->bias.resize(layers.size());
    for (std::size_t k = 0; k < layers.size(); ++k) {
      grad->weights[k].assign(layers[k].weights.size(), 0.0);
      grad->bias[k].assign(layers[k].bias.size(), 0.0);
    }
  }
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    forward_all(layers, xs[i], acts);
    const double err = acts.back()[0] - ys[i];
    loss += err * err;
    if (!grad) continue;
    delta.assign(1, 2.0 * err / n);
    for (std::size_t k = layers.size(); k-- > 0;) {
      const Layer& l = layers[k];
      std::span<const double> in = k == 0 ? std::span<const double>(xs[i]) : std::span<const double>(acts[k - 1]);
      auto& gw = grad->weights[k];
      auto& gb = grad->bias[k];
      for (std::size_t r = 0; r < l.rows; ++r) {
        gb[r] += delta[r];
        for (std::size_t c = 0; c < l.cols; ++c) gw[r * l.cols + c] += delta[r] * in[c];
      }
      if (k == 0) break;
      prev_delta.assign(l.cols, 0.0);
      for (std::size_t r = 0; r < l.rows; ++r) {
        for (std::size_t c = 0; c < l.cols; ++c) prev_delta[c] += l.weights[r * l.cols + c] * delta[r];
      }
      // ReLU gate of the layer below.
      for (std::size_t c = 0; c < l.cols; ++c) {
        if (acts[k - 1][c] <= 0.0) prev_delta[c] = 0.0;
      }
      std::swap(delta, prev_delta);
    }
  }
  return loss / n;
}

std::vector<Standardization> fit_standardization(std::span<const TrainExample> data, FeatureMask mask) {
  std::vector<Standardization> out;
  const double n = static_cast<double>(data.size());
  for (Feature f : active_features(mask)) {
    double sum = 0.0;
    for (const auto& e : data) sum += e.features[f];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& e : data) {
      const double d = e.features[f] - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / n);
    if (!(sd > 0.0) || !std::isfinite(sd)) sd = 1.0;
    out.push_back({f, mean, sd});
  }
  return out;
}

}  // namespace mlp

std::vector<double> RegressorModel::standardize(const FeatureVector& features) const {
  std::vector<double> x;
  x.reserve(standardization.size());
  for (const auto& s : standardization) x.push_back((features[s.feature] - s.mean) / s.std);
  return x;
}

double RegressorModel::predict(const FeatureVector& features) const {
  return mlp::forward(layers, standardize(features));
}

namespace {

struct Adam {
  std::vector<std::vector<double>> m, v;
  std::uint64_t t = 0;
};

void adam_step(std::vector<double>& params, const std::vector<double>& g, std::vector<double>& m,
               std::vector<double>& v, const Hyper& h, double corr1, double corr2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double mhat = m[i] / corr1;
    const double vhat = v[i] / corr2;
    params[i] -= h.learning_rate * mhat / (std::sqrt(vhat) + h.epsilon);
  }
}

}  // namespace

RegressorModel train(std::span<const TrainExample> train_set, std::span<const TrainExample> dev, FeatureMask mask,
                     const Hyper& hyper, std::uint64_t seed, TrainReport* report) {
  if (train_set.size() < 2) throw std::invalid_argument("training needs at least 2 examples");
  if (hyper.hidden == 0 || hyper.batch_size == 0) throw std::invalid_argument("hidden and batch_size must be > 0");

  RegressorModel model;
  model.mask = mask;
  model.seed = seed;
  model.hyper = hyper;
  model.standardization = mlp::fit_standardization(train_set, mask);

  std::vector<std::vector<double>> xs, dev_xs;
  std::vector<double> ys, dev_ys;
  for (const auto& e : train_set) {
    xs.push_back(model.standardize(e.features));
    ys.push_back(e.score);
  }
  for (const auto& e : dev) {
    dev_xs.push_back(model.standardize(e.features));
    dev_ys.push_back(e.score);
  }
  const double target_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  model.layers = mlp::init_layers(model.standardization.size(), hyper.hidden, target_mean, seed);
  // Identical targets: the output bias alone is the answer, for any input.
  if (std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); })) {
    std::fill(model.layers.back().weights.begin(), model.layers.back().weights.end(), 0.0);
    model.layers.back().bias[0] = ys.front();
  }

  const bool use_dev = !dev_xs.empty();
  auto monitored = [&](const std::vector<Layer>& layers) {
    return use_dev ? mlp::loss_and_gradient(layers, dev_xs, dev_ys, nullptr)
                   : mlp::loss_and_gradient(layers, xs, ys, nullptr);
  };

  Adam adam;
  for (const Layer& l : model.layers) {
    adam.m.emplace_back(l.weights.size(), 0.0);
    adam.m.emplace_back(l.bias.size(), 0.0);
  }
  adam.v = adam.m;

  TrainReport rep;
  rep.initial_train_loss = mlp::loss_and_gradient(model.layers, xs, ys, nullptr);
  std::vector<Layer> best = model.layers;
  double best_loss = monitored(model.layers);
  std::size_t since_best = 0;

  // Separate stream from the one used for initialization.
  Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> bx;
  std::vector<double> by;
  mlp::Gradients grad;

  for (std::size_t epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      bx.clear();
      by.clear();
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(xs[order[i]]);
        by.push_back(ys[order[i]]);
      }
      mlp::loss_and_gradient(model.layers, bx, by, &grad);
      ++adam.t;
      const double corr1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(adam.t));
      const double corr2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(adam.t));
      for (std::size_t k = 0; k < model.layers.size(); ++k) {
        adam_step(model.layers[k].weights, grad.weights[k], adam.m[2 * k], adam.v[2 * k], hyper, corr1, corr2);
        adam_step(model.layers[k].bias, grad.bias[k], adam.m[2 * k + 1], adam.v[2 * k + 1], hyper, corr1, corr2);
      }
    }
    rep.epochs_run = epoch;
    const double loss = monitored(model.layers);
    if (loss < best_loss) {
      best_loss = loss;
      best = model.layers;
      rep.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }

  model.layers = std::move(best);
  rep.best_dev_loss = best_loss;
  rep.final_train_loss = mlp::loss_and_gradient(model.layers, xs, ys, nullptr);
  if (report) *report = rep;
  return model;
}

ordered_json RegressorModel::to_json() const {
  ordered_json j;
  j["schema_version"] = kModelSchemaVersion;
  j["mask"] = to_string(mask);
  j["standardization"] = ordered_json::array();
  for (const auto& s : standardization) {
    j["standardization"].push_back(ordered_json{{"feature", to_string(s.feature)}, {"mean", s.mean}, {"std", s.std}});
  }
  j["layers"] = ordered_json::array();
  for (const Layer& l : layers) {
    j["layers"].push_back(
        ordered_json{{"rows", l.rows}, {"cols", l.cols}, {"weights", l.weights}, {"bias", l.bias}});
  }
  j["seed"] = seed;
  j["hyper"] = ordered_json{{"hidden", hyper.hidden},         {"learning_rate", hyper.learning_rate},
                            {"batch_size", hyper.batch_size}, {"max_epochs", hyper.max_epochs},
                            {"patience", hyper.patience},     {"beta1", hyper.beta1},
                            {"beta2", hyper.beta2},           {"epsilon", hyper.epsilon}};
  return j;
}

RegressorModel RegressorModel::from_json(const json& j) {
  RegressorModel m;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw ModelError("unsupported model schema_version " + std::to_string(version) + " (expected " +
                       std::to_string(kModelSchemaVersion) + ")");
    }
    m.mask = parse_mask(j.at("mask").get<std::string>());
    for (const auto& s : j.at("standardization")) {
      m.standardization.push_back(
          {parse_feature(s.at("feature").get<std::string>()), s.at("mean").get<double>(), s.at("std").get<double>()});
    }
    for (const auto& l : j.at("layers")) {
      Layer layer;
      layer.rows = l.at("rows").get<std::size_t>();
      layer.cols = l.at("cols").get<std::size_t>();
      layer.weights = l.at("weights").get<std::vector<double>>();
      layer.bias = l.at("bias").get<std::vector<double>>();
      m.layers.push_back(std::move(layer));
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& h = j.at("hyper");
    m.hyper.hidden = h.at("hidden").get<std::size_t>();
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.batch_size = h.at("batch_size").get<std::size_t>();
    m.hyper.max_epochs = h.at("max_epochs").get<std::size_t>();
    m.hyper.patience = h.at("patience").get<std::size_t>();
    m.hyper.beta1 = h.at("beta1").get<double>();
    m.hyper.beta2 = h.at("beta2").get<double>();
    m.hyper.epsilon = h.at("epsilon").get<double>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("malformed model: ") + e.what());
  }

  const auto active = active_features(m.mask);
  if (m.standardization.size() != active.size()) throw ModelError("model standardization does not match its mask");
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (m.standardization[i].feature != active[i]) throw ModelError("model standardization does not match its mask");
    if (!(m.standardization[i].std > 0.0)) throw ModelError("model standardization has a non-positive std");
  }
  if (m.layers.empty()) throw ModelError("model has no layers");
  std::size_t in = active.size();
  for (const Layer& l : m.layers) {
    if (l.cols != in || l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows) {
      throw ModelError("model layer shapes are inconsistent");
    }
    in = l.rows;
  }
  if (in != 1) throw ModelError("model output layer must have one unit");
  return m;
}

void RegressorModel::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json().dump(1) + "\n"); }

RegressorModel RegressorModel::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    return from_json(j);
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

}  // namespace cskit
