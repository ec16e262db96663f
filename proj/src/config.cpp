#include "geolink/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "geolink/error.hpp"

namespace geolink {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw UsageError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " + expected);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto v = trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, value, "a number");
  return out;
}

template <class T>
T parse_positive(std::string_view key, std::string_view value) {
  const auto v = parse_number<T>(key, value);
  if (!(v > T(0))) bad_value(key, value, "a positive number");
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const auto v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "a boolean");
}

std::vector<std::string_view> split_list(std::string_view v, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = v.find(sep);
    out.push_back(trim(v.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    v.remove_prefix(pos + 1);
  }
  return out;
}

nn::Shape3 parse_shape(std::string_view key, std::string_view value) {
  const auto parts = split_list(trim(value), 'x');
  if (parts.size() != 3) bad_value(key, value, "a shape DxHxW");
  return {parse_positive<nn::Index>(key, parts[0]), parse_positive<nn::Index>(key, parts[1]),
          parse_positive<nn::Index>(key, parts[2])};
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

template <class T>
Setter number(T RunConfig::*field) {
  return [field](RunConfig& c, std::string_view k, std::string_view v) { c.*field = parse_number<T>(k, v); };
}

Setter path(std::string RunConfig::*field) {
  return [field](RunConfig& c, std::string_view, std::string_view v) { c.*field = std::string(trim(v)); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"text", path(&RunConfig::text_path)},
      {"location", path(&RunConfig::location_path)},
      {"links", path(&RunConfig::links_path)},
      {"stopwords", path(&RunConfig::stopwords_path)},
      {"external", path(&RunConfig::external_path)},
      {"matrix", path(&RunConfig::matrix_path)},
      {"matrix_csv", path(&RunConfig::matrix_csv_path)},
      {"checkpoint", path(&RunConfig::checkpoint_path)},
      {"history", path(&RunConfig::history_path)},
      {"report", path(&RunConfig::report_path)},
      {"sweep_out", path(&RunConfig::sweep_path)},
      {"explain_out", path(&RunConfig::explain_path)},
      {"seed", number(&RunConfig::seed)},
      {"threads", [](RunConfig& c, auto k, auto v) { c.threads = parse_positive<std::size_t>(k, v); }},
      {"negative_ratio", [](RunConfig& c, auto k, auto v) { c.negative_ratio = parse_positive<std::size_t>(k, v); }},
      {"split_train", [](RunConfig& c, auto k, auto v) { c.fractions.train = parse_number<double>(k, v); }},
      {"split_valid", [](RunConfig& c, auto k, auto v) { c.fractions.valid = parse_number<double>(k, v); }},
      {"split_test", [](RunConfig& c, auto k, auto v) { c.fractions.test = parse_number<double>(k, v); }},
      {"drop_same_timestamp", [](RunConfig& c, auto k, auto v) { c.drop_same_timestamp = parse_bool(k, v); }},
      {"epsilon", [](RunConfig& c, auto k, auto v) { c.epsilon = parse_positive<double>(k, v); }},
      {"window_seconds", [](RunConfig& c, auto k, auto v) { c.window_seconds = parse_positive<std::int64_t>(k, v); }},
      {"min_count", number(&RunConfig::min_count)},
      {"location_key", [](RunConfig& c, auto, auto v) { c.location_key = parse_location_key(trim(v)); }},
      {"doc_len", [](RunConfig& c, auto k, auto v) { c.tensor.doc_len = parse_positive<std::size_t>(k, v); }},
      {"max_docs", [](RunConfig& c, auto k, auto v) { c.tensor.max_docs = parse_positive<std::size_t>(k, v); }},
      {"max_checkins", [](RunConfig& c, auto k, auto v) { c.tensor.max_checkins = parse_positive<std::size_t>(k, v); }},
      {"time_transform", [](RunConfig& c, auto, auto v) { c.tensor.time_transform = parse_time_transform(trim(v)); }},
      {"time_scale", [](RunConfig& c, auto k, auto v) { c.tensor.time_scale = parse_positive<double>(k, v); }},
      {"conv1_channels", [](RunConfig& c, auto k, auto v) { c.arch.conv1_channels = parse_positive<nn::Index>(k, v); }},
      {"conv2_channels", [](RunConfig& c, auto k, auto v) { c.arch.conv2_channels = parse_positive<nn::Index>(k, v); }},
      {"kernel", [](RunConfig& c, auto k, auto v) { c.arch.kernel = parse_shape(k, v); }},
      {"padding", [](RunConfig& c, auto k, auto v) { c.arch.padding = parse_number<nn::Index>(k, v); }},
      {"pool1", [](RunConfig& c, auto k, auto v) { c.arch.pool1 = parse_shape(k, v); }},
      {"pool2", [](RunConfig& c, auto k, auto v) { c.arch.pool2 = parse_shape(k, v); }},
      {"hidden",
       [](RunConfig& c, auto k, auto v) {
         c.arch.hidden.clear();
         if (trim(v).empty() || trim(v) == "none") return;
         for (auto part : split_list(v, ',')) c.arch.hidden.push_back(parse_positive<nn::Index>(k, part));
       }},
      {"learning_rate", [](RunConfig& c, auto k, auto v) { c.train.learning_rate = parse_number<double>(k, v); }},
      {"batch_size", [](RunConfig& c, auto k, auto v) { c.train.batch_size = parse_positive<std::size_t>(k, v); }},
      {"max_epochs", [](RunConfig& c, auto k, auto v) { c.train.max_epochs = parse_number<std::size_t>(k, v); }},
      {"patience", [](RunConfig& c, auto k, auto v) { c.train.patience = parse_positive<std::size_t>(k, v); }},
      {"target_train_loss", [](RunConfig& c, auto k, auto v) { c.train.target_train_loss = parse_number<double>(k, v); }},
      {"optimizer",
       [](RunConfig& c, auto k, auto v) {
         const auto s = trim(v);
         if (s == "adam") c.train.optimizer = OptimizerKind::adam;
         else if (s == "sgd") c.train.optimizer = OptimizerKind::sgd;
         else bad_value(k, v, "'adam' or 'sgd'");
       }},
      {"loss_reduction",
       [](RunConfig& c, auto k, auto v) {
         const auto s = trim(v);
         if (s == "mean") c.train.loss_reduction = nn::Reduction::mean;
         else if (s == "sum") c.train.loss_reduction = nn::Reduction::sum;
         else bad_value(k, v, "'mean' or 'sum'");
       }},
      {"selection",
       [](RunConfig& c, auto k, auto v) {
         const auto s = trim(v);
         if (s == "auc") c.train.selection = Selection::auc;
         else if (s == "loss") c.train.selection = Selection::loss;
         else bad_value(k, v, "'auc' or 'loss'");
       }},
      {"synth.n_users", [](RunConfig& c, auto k, auto v) { c.synth.n_users = parse_positive<std::size_t>(k, v); }},
      {"synth.vocab_size", [](RunConfig& c, auto k, auto v) { c.synth.vocab_size = parse_positive<std::size_t>(k, v); }},
      {"synth.n_categories", [](RunConfig& c, auto k, auto v) { c.synth.n_categories = parse_positive<std::size_t>(k, v); }},
      {"synth.signal_strength", [](RunConfig& c, auto k, auto v) { c.synth.signal_strength = parse_number<double>(k, v); }},
      {"synth.records_per_user",
       [](RunConfig& c, auto k, auto v) { c.synth.records_per_user = parse_positive<std::size_t>(k, v); }},
      {"synth.span_days", [](RunConfig& c, auto k, auto v) { c.synth.span_days = parse_positive<double>(k, v); }},
      {"synth.time_slots", [](RunConfig& c, auto k, auto v) { c.synth.time_slots = parse_positive<std::size_t>(k, v); }},
      {"synth.jitter_seconds", [](RunConfig& c, auto k, auto v) { c.synth.jitter_seconds = parse_number<std::int64_t>(k, v); }},
      {"synth.words_per_post",
       [](RunConfig& c, auto k, auto v) { c.synth.words_per_post = parse_positive<std::size_t>(k, v); }},
      {"synth.external_words",
       [](RunConfig& c, auto k, auto v) { c.synth.external_words = parse_positive<std::size_t>(k, v); }},
      {"synth.favorite_categories",
       [](RunConfig& c, auto k, auto v) { c.synth.favorite_categories = parse_positive<std::size_t>(k, v); }},
      {"synth.external_pairs", [](RunConfig& c, auto k, auto v) { c.synth_external_pairs = parse_number<std::size_t>(k, v); }},
      {"sweep_ratios",
       [](RunConfig& c, auto k, auto v) {
         c.sweep_ratios.clear();
         if (trim(v).empty()) return;
         for (auto part : split_list(v, ',')) c.sweep_ratios.push_back(parse_number<double>(k, part));
       }},
      {"explain_top_n", [](RunConfig& c, auto k, auto v) { c.explain_top_n = parse_positive<std::size_t>(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::finalize() {
  train.seed = seed;
  train.threads = threads;
  synth.seed = seed;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const auto& table = setters();
  auto it = table.find(trim(key));
  if (it == table.end()) throw UsageError("unknown config key '" + std::string(trim(key)) + "'");
  it->second(config, trim(key), value);
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    apply_setting(config, v.substr(0, eq), v.substr(eq + 1));
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

}  // namespace geolink
