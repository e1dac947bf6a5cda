#pragma once

#include "cyclegap/chain.hpp"

namespace fixtures {

/// expand() with the arc-end edges sent one arc too far, (j,L_j) -> (i+2,1).
/// Still doubly stochastic, but no longer the chain the condensed equation describes.
inline cyclegap::StochasticMatrix broken_shift_expand(const cyclegap::CondensedChain& chain) {
  const auto good = cyclegap::expand(chain);
  const int k = chain.k();
  std::vector<cyclegap::StochasticMatrix::Entry> entries;
  for (const auto& e : good.entries()) {
    const auto [arc, pos] = good.node_of(e.col);
    if (pos == chain.lengths()[arc]) {
      const int dest_arc = good.node_of(e.row).first;
      entries.push_back({good.flat_index((dest_arc + 1) % k, 1), e.col, e.value});
    } else {
      entries.push_back(e);
    }
  }
  const auto offsets = good.arc_offsets();
  return cyclegap::StochasticMatrix(good.size(), std::move(entries),
                                    std::vector<std::int64_t>(offsets.begin(), offsets.end()));
}

}  // namespace fixtures
