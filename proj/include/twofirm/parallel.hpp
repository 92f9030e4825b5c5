#pragma once

#include <cstddef>
#include <exception>
#include <limits>
#include <span>

namespace twofirm {

enum class ExecPolicy { serial, parallel };

// Runs f(i, workspace) for i in [0, n). Each thread owns one Workspace.
// Results must be written to index-addressed slots so the outcome does not
// depend on scheduling. An exception from the parallel loop is rethrown after
// the loop; if several indices throw, the lowest index wins.
template <class Workspace, class F>
void for_each_index(std::size_t n, ExecPolicy policy, F&& f) {
  if (policy == ExecPolicy::serial) {
    Workspace ws{};
    for (std::size_t i = 0; i < n; ++i) f(i, ws);
    return;
  }
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel
  {
    Workspace ws{};
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      try {
        f(static_cast<std::size_t>(i), ws);
      } catch (...) {
#pragma omp critical(twofirm_for_each_error)
        if (static_cast<std::size_t>(i) < error_index) {
          error_index = static_cast<std::size_t>(i);
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

struct NoWorkspace {};

template <class F>
void for_each_index(std::size_t n, ExecPolicy policy, F&& f) {
  for_each_index<NoWorkspace>(n, policy,
                              [&](std::size_t i, NoWorkspace&) { f(i); });
}

// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> xs);

int max_threads();

}  // namespace twofirm
