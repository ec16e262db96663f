#include "geolink/pipeline.hpp"

#include <spdlog/spdlog.h>

#include "geolink/error.hpp"

namespace geolink {

Platforms load_platforms(const RunConfig& config) {
  TextLoadOptions options;
  options.max_len = config.tensor.doc_len;
  if (!config.stopwords_path.empty()) options.stopwords = load_stopwords(config.stopwords_path);
  auto text = load_text_platform(config.text_path, options);
  auto location = load_location_platform(config.location_path);
  spdlog::info("loaded {} posts from {} text users, {} check-ins from {} location users", text.report.records_out,
               text.platform.size(), location.report.records_out, location.platform.size());
  return {std::move(text.platform), std::move(location.platform), text.report, location.report};
}

Workspace load_workspace(const RunConfig& config) {
  Workspace ws;
  ws.platforms = load_platforms(config);
  ws.links = load_links(config.links_path);
  if (config.drop_same_timestamp) {
    const auto n = drop_same_timestamp(ws.platforms.text, ws.platforms.location, ws.links);
    spdlog::info("dropped {} same-timestamp records of linked pairs", n);
  }
  ws.dataset = make_pair_dataset(ws.links, ws.platforms.text, ws.platforms.location, config.negative_ratio,
                                 config.fractions, config.seed);
  return ws;
}

CorrelationMatrix build_correlation(const Platforms& platforms, const std::vector<Link>& links,
                                    const RunConfig& config, const std::vector<TokenizedPair>* external) {
  const auto categories = location_index(platforms.location, config.location_key);
  auto counts = count_cooccurrences(links, platforms.text, platforms.location, categories, config.window_seconds,
                                    config.location_key);
  if (external) {
    auto delta = ingest_external_pairs(*external, categories);
    counts.merge(delta.delta);
  }
  return build_matrix(counts.compacted(config.min_count), config.epsilon, config.location_key);
}

TrainResult train_classifier(const Platforms& platforms, const PairDataset& dataset,
                             const CorrelationMatrix& matrix, const RunConfig& config, const TrainerState* resume) {
  const PairTensorSource source(platforms.text, platforms.location, matrix, config.tensor);
  return train(dataset, source, config.arch, config.train, resume);
}

EvalReport evaluate_split(const nn::Model<double>& model, const Platforms& platforms, const PairDataset& dataset,
                          Split split, const CorrelationMatrix& matrix, const TensorConfig& tensor,
                          std::size_t threads) {
  const auto pairs = dataset.in_split(split);
  if (pairs.empty()) throw Error(std::string("split '") + to_string(split) + "' is empty");
  const PairTensorSource source(platforms.text, platforms.location, matrix, tensor);
  const auto scores = score_pairs(model, pairs, source, threads);
  std::vector<int> labels;
  for (const auto& p : pairs) labels.push_back(p.label);
  return evaluate(scores, labels);
}

}  // namespace geolink
