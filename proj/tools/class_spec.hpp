#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mddlab/data.hpp"
#include "mddlab/hypothesis.hpp"

namespace mddlab::cli {

/// Class spec grammar: NAME[:key=value[:key=value...]], list values comma
/// separated.
///
///   relu[:a=-2,0,2][:b=-2,0,2]                      binary ReLU comparison class
///   threshold:t=LIST[:axis=0][:signs=both|pos|neg]  1-D threshold labelers
///   linear-random[:size=64][:scale=1]               seeded random linear scorers
///   tabular:path=FILE                               score tables over source rows then target rows
///
/// `seed` is consulted only by linear-random; the caller must supply it.
FiniteScoringClass build_class(const std::string& spec, const LabeledSample& source,
                               const LabeledSample& target, std::optional<std::uint64_t> seed);

bool class_needs_seed(const std::string& spec);

}  // namespace mddlab::cli
