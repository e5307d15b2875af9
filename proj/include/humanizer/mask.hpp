#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "humanizer/annotation.hpp"
#include "humanizer/rng.hpp"

namespace humanizer {

/// Ordered list of distinct mutable positions. The order is the sampling
/// visit order; builders shuffle it, samplers consume it verbatim so tests
/// can pin an exact order.
struct MutableMask {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  bool contains(std::size_t pos) const;
};

/// Every position outside the CDR intervals, in shuffled order.
struct FrameworkAll {};

/// Uniformly chosen distinct positions: at most `max_total` overall, at most
/// `max_cdr` of them inside CDR intervals.
struct RandomBounded {
  std::size_t max_total = 6;
  std::size_t max_cdr = 2;
};

using MaskPolicy = std::variant<FrameworkAll, RandomBounded>;

MutableMask build_mutable_mask(std::size_t length, const RegionAnnotation& annotation,
                               const MaskPolicy& policy, Rng& rng);

}  // namespace humanizer
