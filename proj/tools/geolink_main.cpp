// geolink: link text-platform accounts to check-in-platform accounts.
//
//   geolink synth   --config run.cfg
//   geolink corr    --config run.cfg
//   geolink train   --config run.cfg
//   geolink eval    --config run.cfg
//   geolink predict --config run.cfg TEXT_USER LOCATION_USER
//   geolink explain --config run.cfg TEXT_USER LOCATION_USER
//   geolink sweep   --config run.cfg

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "geolink/checkpoint.hpp"
#include "geolink/config.hpp"
#include "geolink/error.hpp"
#include "geolink/io.hpp"
#include "geolink/pipeline.hpp"

namespace {

using namespace geolink;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool verbose = false;
  std::vector<std::string> settings;
  std::map<std::string, std::string> paths;  // config key -> flag value
  std::string text_user;
  std::string location_user;
  std::string resume;
};

void require_file(const std::string& path, const char* key) {
  if (path.empty()) throw UsageError(std::string("missing required path '") + key + "'");
  if (!std::filesystem::exists(path)) throw UsageError(std::string(key) + " file does not exist: " + path);
}

void require_output(const std::string& path, const char* key) {
  if (path.empty()) throw UsageError(std::string("missing required output path '") + key + "'");
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (!f.config_path.empty()) apply_config_file(c, f.config_path);
  for (const auto& [key, value] : f.paths)
    if (!value.empty()) apply_setting(c, key, value);
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  c.finalize();
  return c;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

std::vector<TokenizedPair> load_external(const RunConfig& c) {
  StopwordSet stopwords;
  if (!c.stopwords_path.empty()) stopwords = load_stopwords(c.stopwords_path);
  return load_external_pairs(c.external_path, stopwords, c.tensor.doc_len);
}

int cmd_synth(const RunConfig& c) {
  require_output(c.text_path, "text");
  require_output(c.location_path, "location");
  require_output(c.links_path, "links");
  const auto corpus = generate_synthetic(c.synth);
  write_synthetic(corpus, {c.text_path, c.location_path, c.links_path});
  if (c.synth_external_pairs > 0) {
    require_output(c.external_path, "external");
    write_external_pairs(generate_external_pairs(c.synth, c.synth_external_pairs, derive_seed(c.seed, "external-file")),
                         c.external_path);
  }
  spdlog::info("wrote {} posts, {} check-ins, {} links", corpus.text.size(), corpus.location.size(),
               corpus.links.size());
  return 0;
}

int cmd_corr(const RunConfig& c) {
  require_file(c.text_path, "text");
  require_file(c.location_path, "location");
  require_file(c.links_path, "links");
  require_output(c.matrix_path, "matrix");
  if (!c.external_path.empty()) require_file(c.external_path, "external");
  const auto ws = load_workspace(c);
  std::vector<TokenizedPair> external;
  if (!c.external_path.empty()) external = load_external(c);
  const auto matrix = build_correlation(ws.platforms, ws.dataset.positive_links(Split::train), c,
                                        c.external_path.empty() ? nullptr : &external);
  save_matrix(matrix, c.matrix_path);
  if (!c.matrix_csv_path.empty()) export_matrix_csv(matrix, c.matrix_csv_path);
  spdlog::info("correlation matrix {} words x {} locations, hash {}", matrix.values.rows(), matrix.values.cols(),
               hex64(matrix.content_hash()));
  return 0;
}

int cmd_train(const RunConfig& c, const std::string& resume_path) {
  require_file(c.text_path, "text");
  require_file(c.location_path, "location");
  require_file(c.links_path, "links");
  require_file(c.matrix_path, "matrix");
  require_output(c.checkpoint_path, "checkpoint");
  const auto matrix = load_matrix(c.matrix_path);
  std::optional<Checkpoint> resume;
  if (!resume_path.empty()) {
    require_file(resume_path, "resume");
    resume = load_checkpoint(resume_path);
    require_matching_matrix(*resume, matrix, resume_path, c.matrix_path);
    if (!resume->trainer) throw Error(resume_path + " holds no trainer state to resume from");
  }
  const auto ws = load_workspace(c);
  const auto result =
      train_classifier(ws.platforms, ws.dataset, matrix, c, resume ? &*resume->trainer : nullptr);
  save_checkpoint({c.tensor, matrix.content_hash(), result.best, result.state}, c.checkpoint_path);
  if (!c.history_path.empty()) write_history_csv(result.history, c.history_path);
  spdlog::info("trained {} epoch(s); best validation score {:.4f}", result.history.size(), result.state.best_score);
  return 0;
}

int cmd_eval(const RunConfig& c) {
  require_file(c.text_path, "text");
  require_file(c.location_path, "location");
  require_file(c.links_path, "links");
  require_file(c.matrix_path, "matrix");
  require_file(c.checkpoint_path, "checkpoint");
  const auto matrix = load_matrix(c.matrix_path);
  const auto ckpt = load_checkpoint(c.checkpoint_path);
  require_matching_matrix(ckpt, matrix, c.checkpoint_path, c.matrix_path);
  RunConfig run = c;
  run.tensor = ckpt.tensor;
  const auto ws = load_workspace(run);
  const auto report = evaluate_split(ckpt.model, ws.platforms, ws.dataset, Split::test, matrix, ckpt.tensor, c.threads);
  const auto json = to_json(report).dump(2) + "\n";
  if (c.report_path.empty())
    std::cout << json;
  else
    write_text(c.report_path, json);
  return 0;
}

int cmd_predict(const RunConfig& c, const Flags& f, bool explain_mode) {
  require_file(c.text_path, "text");
  require_file(c.location_path, "location");
  require_file(c.matrix_path, "matrix");
  const auto matrix = load_matrix(c.matrix_path);
  RunConfig run = c;
  std::optional<Checkpoint> ckpt;
  if (!explain_mode || !c.checkpoint_path.empty()) {
    require_file(c.checkpoint_path, "checkpoint");
    ckpt = load_checkpoint(c.checkpoint_path);
    require_matching_matrix(*ckpt, matrix, c.checkpoint_path, c.matrix_path);
    run.tensor = ckpt->tensor;
  }
  const auto platforms = load_platforms(run);
  auto t = platforms.text.find(f.text_user);
  auto l = platforms.location.find(f.location_user);
  if (t == platforms.text.end()) throw Error("unknown text user '" + f.text_user + "'");
  if (l == platforms.location.end()) throw Error("unknown location user '" + f.location_user + "'");

  if (explain_mode) {
    const auto evidence = explain(t->second, l->second, matrix, run.tensor, c.explain_top_n);
    if (c.explain_path.empty()) {
      write_explain_csv(evidence, std::cout);
    } else {
      std::ofstream out(c.explain_path, std::ios::binary);
      if (!out) throw Error("cannot write " + c.explain_path);
      write_explain_csv(evidence, out);
    }
    return 0;
  }
  const double p = ckpt->model.predict(build_tensor(t->second, l->second, matrix, run.tensor).as_feature_map<double>());
  std::printf("%.17g\n", p);
  return 0;
}

int cmd_sweep(const RunConfig& c) {
  require_file(c.text_path, "text");
  require_file(c.location_path, "location");
  require_file(c.links_path, "links");
  require_output(c.sweep_path, "sweep_out");
  if (!c.external_path.empty()) require_file(c.external_path, "external");
  if (c.sweep_ratios.empty()) {
    write_sweep_csv({}, c.sweep_path);
    return 0;
  }
  const auto ws = load_workspace(c);
  std::vector<TokenizedPair> external;
  if (!c.external_path.empty()) external = load_external(c);
  const auto rows = label_ratio_sweep(ws, c, c.sweep_ratios, c.external_path.empty() ? nullptr : &external);
  write_sweep_csv(rows, c.sweep_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-platform identity linkage from posts and check-ins"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config_path, "key = value configuration file");
  app.add_option("--seed", flags.seed, "seed for every random stream");
  app.add_option("--threads", flags.threads, "worker threads for per-sample work")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", flags.verbose, "log progress and per-epoch metrics");
  app.add_option("--set", flags.settings, "override any config key (key=value), repeatable");

  auto path_option = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option("--" + name, flags.paths[key], help);
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted correlations");
  path_option(synth, "text", "text", "output text platform JSONL");
  path_option(synth, "location", "location", "output location platform JSONL");
  path_option(synth, "links", "links", "output link CSV");
  path_option(synth, "external", "external", "output external pairs JSONL (with synth.external_pairs > 0)");

  auto* corr = app.add_subcommand("corr", "build the word-location correlation matrix");
  auto* train_cmd = app.add_subcommand("train", "train the classifier");
  auto* eval_cmd = app.add_subcommand("eval", "score the test split and write a JSON report");
  auto* predict = app.add_subcommand("predict", "print the link probability of one pair");
  auto* explain_cmd = app.add_subcommand("explain", "export the strongest word-location evidence of one pair");
  auto* sweep = app.add_subcommand("sweep", "retrain over fractions of training links");
  for (auto* sub : {corr, train_cmd, eval_cmd, predict, explain_cmd, sweep}) {
    path_option(sub, "text", "text", "text platform JSONL");
    path_option(sub, "location", "location", "location platform JSONL");
    path_option(sub, "stopwords", "stopwords", "stopword list");
    path_option(sub, "matrix", "matrix", "correlation matrix file");
  }
  for (auto* sub : {corr, train_cmd, eval_cmd, sweep}) path_option(sub, "links", "links", "link CSV");
  for (auto* sub : {corr, sweep}) path_option(sub, "external", "external", "external text-category pairs JSONL");
  path_option(corr, "matrix-csv", "matrix_csv", "optional CSV export of nonzero entries");
  for (auto* sub : {train_cmd, eval_cmd, predict, explain_cmd})
    path_option(sub, "checkpoint", "checkpoint", "model checkpoint");
  path_option(train_cmd, "history", "history", "per-epoch history CSV");
  train_cmd->add_option("--resume", flags.resume, "continue from a checkpoint holding trainer state");
  path_option(eval_cmd, "report", "report", "report JSON (stdout when omitted)");
  path_option(sweep, "out", "sweep_out", "sweep CSV");
  path_option(explain_cmd, "out", "explain_out", "explain CSV (stdout when omitted)");
  for (auto* sub : {predict, explain_cmd}) {
    sub->add_option("text_user", flags.text_user, "text platform user id")->required();
    sub->add_option("location_user", flags.location_user, "location platform user id")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  spdlog::set_level(flags.verbose ? spdlog::level::debug : spdlog::level::warn);
  spdlog::set_pattern("%^[%l]%$ %v");
  try {
    const RunConfig config = resolve(flags);
    if (synth->parsed()) return cmd_synth(config);
    if (corr->parsed()) return cmd_corr(config);
    if (train_cmd->parsed()) return cmd_train(config, flags.resume);
    if (eval_cmd->parsed()) return cmd_eval(config);
    if (predict->parsed()) return cmd_predict(config, flags, false);
    if (explain_cmd->parsed()) return cmd_predict(config, flags, true);
    if (sweep->parsed()) return cmd_sweep(config);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
