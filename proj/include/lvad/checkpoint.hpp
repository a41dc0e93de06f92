#pragma once

#include <string>

#include "lvad/optimizer.hpp"
#include "lvad/params.hpp"

namespace lvad {

struct CheckpointMeta {
  std::string config_text;
  uint64_t step = 0;
};

// Self-describing binary container: format version, config echo, parameter
// names/shapes/values, optimizer moments and step counter. Byte layout is
// documented in docs/FORMATS.md. Writing the same state twice produces
// identical bytes.
void save_checkpoint(const std::string& path, const ParamStore& params, const AdamW* optimizer,
                     const CheckpointMeta& meta);

// Loads values into an existing store; names, order and shapes must match or
// the load fails with IncompatibleCheckpoint.
CheckpointMeta load_checkpoint(const std::string& path, ParamStore& params, AdamW* optimizer);

// Reads only the embedded config text.
std::string read_checkpoint_config(const std::string& path);

}  // namespace lvad
