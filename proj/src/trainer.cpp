#include "geolink/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include <spdlog/spdlog.h>

#include "geolink/error.hpp"
#include "geolink/metrics.hpp"
#include "geolink/rng.hpp"

namespace geolink {

void validate(const TrainConfig& c) {
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate))
    throw UsageError("learning_rate must be finite and >= 0");
  if (c.batch_size == 0) throw UsageError("batch_size must be >= 1");
  if (c.patience == 0) throw UsageError("patience must be >= 1");
  if (c.threads == 0) throw UsageError("threads must be >= 1");
}

namespace {

void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v,
                 std::uint64_t step, double lr) {
  using A = AdamConstants;
  const double c1 = 1.0 - std::pow(A::beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(A::beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = A::beta1 * m[i] + (1.0 - A::beta1) * g[i];
    v[i] = A::beta2 * v[i] + (1.0 - A::beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + A::eps);
  }
}

void optimizer_step(nn::Model<double>& model, const nn::Model<double>& grads, OptimizerState& state,
                    const TrainConfig& config) {
  auto params = model.parameter_blocks();
  const auto g = grads.parameter_blocks();
  if (config.optimizer == OptimizerKind::sgd) {
    for (std::size_t b = 0; b < params.size(); ++b) sgd_step(params[b], g[b], config.learning_rate);
    return;
  }
  const auto n = model.parameter_count();
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  ++state.step;
  std::size_t offset = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto len = params[b].size();
    adam_update(params[b], g[b], std::span(state.m).subspan(offset, len), std::span(state.v).subspan(offset, len),
                state.step, config.learning_rate);
    offset += len;
  }
}

}  // namespace

void sgd_step(std::span<double> params, std::span<const double> grads, double learning_rate) {
  if (params.size() != grads.size()) throw ShapeError("sgd_step: parameter and gradient sizes differ");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grads[i];
}

void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state, double learning_rate) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter and gradient sizes differ");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.step;
  adam_update(params, grads, state.m, state.v, state.step, learning_rate);
}

nn::FeatureMap<double> PairTensorSource::operator()(const std::string& text_user,
                                                    const std::string& location_user) const {
  static const TextSequence kNoText{};
  static const LocationSequence kNoLocation{};
  auto t = text_.find(text_user);
  auto l = location_.find(location_user);
  const auto& ts = t == text_.end() ? kNoText : t->second;
  const auto& ls = l == location_.end() ? kNoLocation : l->second;
  return build_tensor(ts, ls, matrix_, config_).as_feature_map<double>();
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& f) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += threads) f(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> score_pairs(const nn::Model<double>& model, const std::vector<LabeledPair>& pairs,
                                const PairTensorSource& source, std::size_t threads) {
  std::vector<double> scores(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) { scores[i] = model.predict(source(pairs[i])); });
  return scores;
}

double batch_gradient(const nn::Model<double>& model, const std::vector<nn::FeatureMap<double>>& inputs,
                      std::span<const double> labels, nn::Reduction reduction, nn::Model<double>& grads,
                      std::size_t threads) {
  const auto n = inputs.size();
  if (n == 0 || labels.size() != n) throw ShapeError("batch_gradient: need equal non-empty inputs and labels");
  grads.set_zero();
  std::vector<double> probs(n);
  const double scale = reduction == nn::Reduction::mean ? 1.0 / static_cast<double>(n) : 1.0;

  // Each sample's gradient goes to its own buffer and buffers are summed in
  // sample order, so the floating-point result does not depend on `threads`.
  auto accumulate = [&](const nn::Model<double>& sample) {
    auto total = grads.parameter_blocks();
    const auto blocks = sample.parameter_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (std::size_t j = 0; j < blocks[b].size(); ++j) total[b][j] += blocks[b][j];
  };
  if (threads <= 1 || n == 1) {
    nn::Model<double>::Tape tape;
    nn::Model<double> sample(model.arch);
    for (std::size_t i = 0; i < n; ++i) {
      sample.set_zero();
      probs[i] = model.forward(inputs[i], tape);
      model.backward(tape, scale * nn::bce_grad_logit(probs[i], labels[i]), sample);
      accumulate(sample);
    }
  } else {
    std::vector<nn::Model<double>> per_sample(n, nn::Model<double>(model.arch));
    parallel_for(n, threads, [&](std::size_t i) {
      nn::Model<double>::Tape tape;
      per_sample[i].set_zero();
      probs[i] = model.forward(inputs[i], tape);
      model.backward(tape, scale * nn::bce_grad_logit(probs[i], labels[i]), per_sample[i]);
    });
    for (const auto& g : per_sample) accumulate(g);
  }
  return nn::bce_loss<double>(probs, labels, reduction);
}

TrainResult train(const PairDataset& dataset, const PairTensorSource& source, const nn::ArchitectureConfig& arch,
                  const TrainConfig& config, const TrainerState* resume, const EpochCallback& on_epoch) {
  validate(config);
  const auto train_pairs = dataset.in_split(Split::train);
  const auto valid_pairs = dataset.in_split(Split::valid);
  if (train_pairs.empty() || valid_pairs.empty()) throw Error("training needs non-empty train and valid splits");
  std::vector<int> valid_labels;
  for (const auto& p : valid_pairs) valid_labels.push_back(p.label);

  TrainerState state{nn::Model<double>(arch), nn::Model<double>(arch), {}, 0,
                     -std::numeric_limits<double>::infinity(), 0, {}};
  if (resume) {
    if (!(resume->model.arch == arch)) throw ShapeError("resume state was trained with a different architecture");
    state = *resume;
  } else {
    state.model.initialize(config.seed);
    state.best_model = state.model;
  }

  nn::Model<double> grads(arch);
  while (state.epochs_done < config.max_epochs) {
    const std::size_t epoch = state.epochs_done + 1;
    std::vector<std::size_t> order(train_pairs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, "shuffle", epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const auto end = std::min(order.size(), start + config.batch_size);
      std::vector<nn::FeatureMap<double>> inputs(end - start);
      std::vector<double> labels(end - start);
      parallel_for(end - start, config.threads, [&](std::size_t i) {
        inputs[i] = source(train_pairs[order[start + i]]);
        labels[i] = train_pairs[order[start + i]].label;
      });
      const double loss = batch_gradient(state.model, inputs, labels, config.loss_reduction, grads, config.threads);
      if (!std::isfinite(loss)) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "non-finite training loss at epoch %zu, batch %zu (learning rate %g)", epoch,
                      batch, config.learning_rate);
        throw Error(msg);
      }
      loss_sum += config.loss_reduction == nn::Reduction::mean ? loss * static_cast<double>(end - start) : loss;
      optimizer_step(state.model, grads, state.optimizer, config);
    }

    const auto scores = score_pairs(state.model, valid_pairs, source, config.threads);
    std::vector<double> y(valid_labels.begin(), valid_labels.end());
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_pairs.size());
    rec.valid_loss = nn::bce_loss<double>(scores, y, nn::Reduction::mean);
    const auto auc = auc_rank(scores, valid_labels);
    rec.valid_auc = auc.value_or(std::numeric_limits<double>::quiet_NaN());
    if (config.selection == Selection::auc && !auc)
      throw Error("validation split contains a single class; AUC-based selection is impossible");

    const double score = config.selection == Selection::auc ? rec.valid_auc : -rec.valid_loss;
    if (score > state.best_score) {
      state.best_score = score;
      state.best_model = state.model;
      state.since_improvement = 0;
    } else {
      ++state.since_improvement;
    }
    state.history.push_back(rec);
    state.epochs_done = epoch;
    spdlog::debug("epoch {:3d}  train_loss {:.5f}  valid_auc {:.4f}  valid_loss {:.5f}", epoch, rec.train_loss,
                  rec.valid_auc, rec.valid_loss);
    if (on_epoch) on_epoch(rec);
    if (state.since_improvement >= config.patience) break;
    if (config.target_train_loss > 0.0 && rec.train_loss < config.target_train_loss) break;
  }
  return {state.best_model, state.history, state};
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "epoch,train_loss,valid_auc\n";
  char buf[96];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.epoch, r.train_loss, r.valid_auc);
    out << buf;
  }
}

}  // namespace geolink
