#include "humanizer/filters.hpp"

#include "humanizer/error.hpp"

namespace humanizer {

bool FilterReport::passed() const {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

std::string FilterReport::failures_string() const {
  std::string s;
  for (const auto& r : results) {
    if (r.passed) continue;
    for (std::size_t pos : r.positions) {
      if (!s.empty()) s.push_back(';');
      s += r.name;
      s.push_back('@');
      s += std::to_string(pos + 1);
    }
  }
  return s;
}

FilterReport filter_liabilities(const AntibodySequence& seq,
                                const RegionAnnotation& annotation,
                                const LiabilityFilterConfig& config) {
  require(!seq.contains_mask(), "filter_liabilities: sequence '", seq.id,
          "' contains MASK");
  annotation.validate_for_length(seq.length());

  const auto res = [&](std::size_t i) { return residue_to_char(seq.residues[i]); };
  FilterReport report;

  if (config.ddd_isomerization) {
    FilterResult r{"ddd", true, {}};
    for (std::size_t i = 0; i + 3 <= seq.length(); ++i) {
      if (res(i) == 'D' && res(i + 1) == 'D' && res(i + 2) == 'D') {
        r.positions.push_back(i);
      }
    }
    r.passed = r.positions.empty();
    report.results.push_back(std::move(r));
  }

  if (config.n_glycosylation) {
    FilterResult r{"nglyc", true, {}};
    for (std::size_t i = 0; i + 3 <= seq.length(); ++i) {
      const char x = res(i + 1);
      const char third = res(i + 2);
      if (res(i) == 'N' && x != 'P' && (third == 'S' || third == 'T')) {
        r.positions.push_back(i);
      }
    }
    r.passed = r.positions.empty();
    report.results.push_back(std::move(r));
  }

  if (config.non_canonical_cysteine) {
    FilterResult r{"cys", true, {}};
    for (std::size_t i = 0; i < seq.length(); ++i) {
      if (res(i) == 'C' && !annotation.is_canonical_cysteine(i)) {
        r.positions.push_back(i);
      }
    }
    r.passed = r.positions.empty();
    report.results.push_back(std::move(r));
  }

  return report;
}

}  // namespace humanizer
