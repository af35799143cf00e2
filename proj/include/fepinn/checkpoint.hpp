#ifndef FEPINN_CHECKPOINT_HPP
#define FEPINN_CHECKPOINT_HPP

#include <iosfwd>
#include <string>

#include "fepinn/network.hpp"

namespace fepinn {

struct Checkpoint {
    Architecture arch;
    Parameters params;
};

/// Text header (version, shape, per-layer provenance tags, value count)
/// followed by the raw double payload. Round-trips bit-exactly.
void save_checkpoint(std::ostream& os, const Checkpoint& ckpt);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

/// Rejects unknown versions, malformed headers, truncated or oversized
/// payloads, and value counts that do not match the declared architecture.
Checkpoint load_checkpoint(std::istream& is);
Checkpoint load_checkpoint(const std::string& path);

} // namespace fepinn

#endif
