#include <cstdio>
#include <fstream>

#include <spdlog/spdlog.h>

#include "geolink/error.hpp"
#include "geolink/pipeline.hpp"

namespace geolink {

std::vector<SweepRow> label_ratio_sweep(const Workspace& workspace, const RunConfig& config,
                                        const std::vector<double>& ratios,
                                        const std::vector<TokenizedPair>* external) {
  std::vector<SweepRow> rows;
  for (const double ratio : ratios) {
    const auto subset = subsample_training(workspace.dataset, ratio, config.seed);
    const auto links = subset.positive_links(Split::train);
    if (links.size() < 2) {
      spdlog::warn("ratio {}: only {} training link(s); skipped", ratio, links.size());
      continue;
    }
    for (const bool with_external : {false, true}) {
      if (with_external && !external) continue;
      const auto matrix = build_correlation(workspace.platforms, links, config, with_external ? external : nullptr);
      const auto result = train_classifier(workspace.platforms, subset, matrix, config);
      const auto report =
          evaluate_split(result.best, workspace.platforms, subset, Split::test, matrix, config.tensor, config.threads);
      spdlog::info("sweep ratio {:.2f} external {}: test AUC {:.4f}", ratio, with_external, report.auc.value_or(-1.0));
      rows.push_back({ratio, with_external, report.auc});
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "ratio,external,auc\n";
  char buf[96];
  for (const auto& r : rows) {
    if (r.auc)
      std::snprintf(buf, sizeof buf, "%g,%d,%.17g\n", r.ratio, r.external ? 1 : 0, *r.auc);
    else
      std::snprintf(buf, sizeof buf, "%g,%d,nan\n", r.ratio, r.external ? 1 : 0);
    out << buf;
  }
}

}  // namespace geolink
