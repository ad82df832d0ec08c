#pragma once

#include <cstddef>

#include "sgee/nemytskij.hpp"

namespace sgee::detail {

// Vectorised pointwise kernels for the catalog nonlinearities, operating on
// raw physical-space buffers.  `nodes` are the grid abscissae (used by the
// xi-dependent entries).  Kind::custom is handled by the caller.

void apply_f(NemytskijSpec::Kind kind, double scale, const double* nodes,
             const double* u, double* out, std::size_t m);

void apply_df(NemytskijSpec::Kind kind, double scale, const double* nodes,
              const double* u, const double* w, double* out, std::size_t m);

void apply_d2f(NemytskijSpec::Kind kind, double scale, const double* nodes,
               const double* u, const double* w1, const double* w2, double* out,
               std::size_t m);

}  // namespace sgee::detail
