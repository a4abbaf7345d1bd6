#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cqg/param_store.hpp"

namespace cqg {

/// Checkpoint header fields.
struct CheckpointInfo {
  std::uint64_t rng_seed = 0;
  std::uint64_t config_hash = 0;
  std::string meta_json;  // config + vocabulary snapshot
};

/// Write every parameter (values, Adam moments, step) plus the store seed,
/// a config hash and a meta JSON blob into a single binary container with
/// magic header "CQGKIT1". Little-endian, checksummed.
void write_checkpoint(const std::string& path, const ParameterStore& store,
                      std::uint64_t config_hash, const std::string& meta_json);

/// Header without the parameter payload.
CheckpointInfo peek_checkpoint(const std::string& path);

/// Load parameter values and Adam state into an existing store. With
/// strict=true the file must cover exactly the store's parameters; otherwise
/// the intersection is applied. Returns the names applied.
std::vector<std::string> apply_checkpoint(const std::string& path, ParameterStore& store,
                                          bool strict);

/// FNV-1a 64-bit hash, used for config hashes and input fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace cqg
