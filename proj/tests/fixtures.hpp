#pragma once

#include "geolink/correlation.hpp"
#include "geolink/corpus.hpp"
#include "geolink/pipeline.hpp"
#include "geolink/synthetic.hpp"

namespace geolink::test {

/// In-memory platforms equivalent to writing the corpus out and loading it.
inline Platforms to_platforms(const SyntheticCorpus& corpus, std::size_t max_len = 50) {
  Platforms p;
  for (const auto& r : corpus.text) {
    auto tokens = preprocess_text(r.text, {}, max_len);
    if (tokens.empty()) continue;
    auto& s = p.text[r.user_id];
    s.user_id = r.user_id;
    s.records.push_back({r.user_id, r.time, std::move(tokens)});
  }
  for (const auto& r : corpus.location) {
    auto& s = p.location[r.user_id];
    s.user_id = r.user_id;
    s.records.push_back(r);
  }
  return p;
}

inline SynthConfig tiny_synth(std::size_t users = 40) {
  SynthConfig c;
  c.n_users = users;
  c.vocab_size = 300;
  c.n_categories = 5;
  c.records_per_user = 12;
  c.signal_strength = 0.9;
  return c;
}

inline TensorConfig tiny_tensor() {
  TensorConfig t;
  t.doc_len = 8;
  t.max_docs = 12;
  t.max_checkins = 12;
  return t;
}

inline nn::ArchitectureConfig tiny_architecture() {
  nn::ArchitectureConfig a;
  a.conv1_channels = 3;
  a.conv2_channels = 3;
  a.pool1 = {4, 4, 4};
  a.pool2 = {2, 2, 2};
  a.hidden = {8};
  return a;
}

}  // namespace geolink::test
