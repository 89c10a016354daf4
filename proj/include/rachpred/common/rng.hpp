#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rachpred {

using Rng = std::mt19937_64;

/// Expands a root seed into an independent substream seed identified by a
/// label such as "sim/channel" or "train/dropout".
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

inline Rng make_rng(std::uint64_t root, std::string_view label) {
  return Rng(derive_seed(root, label));
}

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace rachpred
