#include "humanizer/mask.hpp"

#include <algorithm>

#include "humanizer/error.hpp"

namespace humanizer {

bool MutableMask::contains(std::size_t pos) const {
  return std::find(indices.begin(), indices.end(), pos) != indices.end();
}

namespace {

MutableMask build_framework_all(std::size_t length, const RegionAnnotation& annotation,
                                Rng& rng) {
  MutableMask mask;
  for (std::size_t pos = 0; pos < length; ++pos) {
    if (!annotation.is_cdr(pos)) mask.indices.push_back(pos);
  }
  rng.shuffle(mask.indices);
  return mask;
}

MutableMask build_random_bounded(std::size_t length, const RegionAnnotation& annotation,
                                 const RandomBounded& policy, Rng& rng) {
  require(policy.max_total > 0, "random_bounded: max_total must be positive");
  require(policy.max_cdr <= policy.max_total,
          "random_bounded: max_cdr (", policy.max_cdr, ") exceeds max_total (",
          policy.max_total, ")");

  std::vector<std::size_t> framework_pool;
  std::vector<std::size_t> cdr_pool;
  for (std::size_t pos = 0; pos < length; ++pos) {
    (annotation.is_cdr(pos) ? cdr_pool : framework_pool).push_back(pos);
  }

  const std::size_t initial_cdr_budget = std::min(policy.max_cdr, cdr_pool.size());
  require(framework_pool.size() + initial_cdr_budget > 0,
          "random_bounded: no eligible framework positions (CDR intervals cover the "
          "whole sequence and max_cdr is 0)");

  MutableMask mask;
  std::size_t cdr_chosen = 0;
  while (mask.indices.size() < policy.max_total) {
    const bool cdr_open = cdr_chosen < policy.max_cdr && !cdr_pool.empty();
    const std::size_t eligible = framework_pool.size() + (cdr_open ? cdr_pool.size() : 0);
    if (eligible == 0) break;
    std::size_t pick = rng.next_below(eligible);
    if (pick < framework_pool.size()) {
      mask.indices.push_back(framework_pool[pick]);
      std::swap(framework_pool[pick], framework_pool.back());
      framework_pool.pop_back();
    } else {
      pick -= framework_pool.size();
      mask.indices.push_back(cdr_pool[pick]);
      std::swap(cdr_pool[pick], cdr_pool.back());
      cdr_pool.pop_back();
      ++cdr_chosen;
    }
  }
  rng.shuffle(mask.indices);
  return mask;
}

}  // namespace

MutableMask build_mutable_mask(std::size_t length, const RegionAnnotation& annotation,
                               const MaskPolicy& policy, Rng& rng) {
  annotation.validate_for_length(length);
  if (const auto* bounded = std::get_if<RandomBounded>(&policy)) {
    return build_random_bounded(length, annotation, *bounded, rng);
  }
  return build_framework_all(length, annotation, rng);
}

}  // namespace humanizer
