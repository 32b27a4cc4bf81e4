#pragma once

#include <string>

#include "gps/trainer.hpp"

namespace gps {

// Versioned binary container: magic, format version, config echo, epoch,
// rng state, then named tensors with raw 64-bit payloads. Round-trips are
// bitwise exact. Truncation or garbage raises FormatError; an unknown
// format version raises VersionError.
void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

}  // namespace gps
