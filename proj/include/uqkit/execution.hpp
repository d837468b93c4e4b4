#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace uqkit {

/// Whether independent work items (folds, members, samples) run on OpenMP threads.
/// Both settings produce identical results.
enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, count). Exceptions are captured per item and the one
/// with the lowest index is rethrown after all items finished.
void for_each_index(std::size_t count, Execution exec, const std::function<void(std::size_t)>& body);

} // namespace uqkit
