#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "occur/network.hpp"
#include "occur/tensor.hpp"

namespace occur {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelState model;
  /// Generator state at save time, when the caller wants to resume a run.
  std::optional<Rng> rng;
};

/// JSON container, see docs/checkpoint-format.md. Doubles are written in
/// shortest round-trip form so a load restores params bit-exactly.
std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace occur
