#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "geolink/correlation.hpp"
#include "geolink/network/model.hpp"
#include "geolink/tensor.hpp"
#include "geolink/trainer.hpp"

namespace geolink {

struct Checkpoint {
  TensorConfig tensor;
  std::uint64_t matrix_hash = 0;
  nn::Model<double> model;
  std::optional<TrainerState> trainer;
};

/// Magic, version, architecture and tensor shapes, matrix hash, then all
/// parameters as float64 in declaration order; optional trainer state; checksum.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Throws Error naming both files when the checkpoint was trained against a
/// different correlation matrix.
void require_matching_matrix(const Checkpoint& checkpoint, const CorrelationMatrix& matrix,
                             const std::string& checkpoint_path, const std::string& matrix_path);

}  // namespace geolink
