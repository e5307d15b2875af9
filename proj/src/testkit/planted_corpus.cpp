#include "humanizer/testkit/planted_corpus.hpp"

#include <algorithm>

#include "humanizer/error.hpp"
#include "humanizer/filters.hpp"
#include "humanizer/rng.hpp"

namespace humanizer::testkit {

namespace {

// Residues used for base sequences: everything except C, which appears only
// at the annotated canonical positions or as a planted liability.
constexpr std::string_view kBaseAlphabet = "ADEFGHIKLMNPQRSTVWY";

char draw_base(Rng& rng) { return kBaseAlphabet[rng.next_below(kBaseAlphabet.size())]; }

bool is_st(char c) { return c == 'S' || c == 'T'; }

/// Rewrites the few residues forming accidental DDD or sequon motifs until a
/// scan comes up clean.
void scrub(std::string& s) {
  for (int pass = 0; pass < 16; ++pass) {
    bool dirty = false;
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
      if (s[i] == 'D' && s[i + 1] == 'D' && s[i + 2] == 'D') {
        s[i + 1] = 'G';
        dirty = true;
      }
      if (s[i] == 'N' && s[i + 1] != 'P' && is_st(s[i + 2])) {
        s[i] = 'Q';
        dirty = true;
      }
    }
    if (!dirty) return;
  }
  fail("make_planted_corpus: could not scrub base sequence");
}

struct PlantSite {
  std::string filter;
  std::size_t position;
};

}  // namespace

PlantedCorpus make_planted_corpus(std::uint64_t seed, std::size_t n_subjects,
                                  std::size_t length, double liability_rate) {
  require(length >= 9, "make_planted_corpus: length must be at least 9, got ", length);
  require(n_subjects > 0, "make_planted_corpus: need at least one subject");
  require(liability_rate >= 0 && liability_rate <= 1,
          "make_planted_corpus: liability_rate must be in [0, 1]");

  const std::vector<std::size_t> canonical_cys = {5, length - 7};
  PlantedCorpus corpus;
  corpus.annotation = make_annotation({{2, 5}}, canonical_cys, ChainType::vhh);
  Rng rng(seed);

  const std::vector<std::string> classes = {"ddd", "nglyc", "cys"};

  for (std::size_t subject = 0; subject < n_subjects; ++subject) {
    std::string text;
    std::vector<PlantSite> plants;
    bool valid = false;
    for (int attempt = 0; attempt < 100 && !valid; ++attempt) {
      text.clear();
      for (std::size_t i = 0; i < length; ++i) text.push_back(draw_base(rng));
      for (std::size_t pos : canonical_cys) text[pos] = 'C';
      scrub(text);

      plants.clear();
      auto too_close = [&](std::size_t pos) {
        for (const auto& p : plants) {
          const std::size_t lo = std::min(p.position, pos);
          const std::size_t hi = std::max(p.position, pos);
          if (hi - lo < 4) return true;
        }
        for (std::size_t cys : canonical_cys) {
          const std::size_t lo = std::min(cys, pos);
          const std::size_t hi = std::max(cys, pos);
          if (hi - lo < 4) return true;
        }
        return false;
      };
      for (const auto& cls : classes) {
        if (rng.next_double() >= liability_rate) continue;
        for (int site_try = 0; site_try < 50; ++site_try) {
          const std::size_t pos = 1 + rng.next_below(length - 5);
          if (too_close(pos)) continue;
          if (cls == "ddd") {
            if (text[pos - 1] == 'D' || text[pos + 3] == 'D') continue;
            text.replace(pos, 3, "DDD");
          } else if (cls == "nglyc") {
            text.replace(pos, 3, "NAS");
          } else {
            if (text[pos - 1] == 'N' && is_st(text[pos + 1])) continue;
            text[pos] = 'C';
          }
          plants.push_back({cls, pos});
          break;
        }
      }

      // The plants must be exactly what the filters detect.
      const auto seq = AntibodySequence::from_string("probe", text);
      const FilterReport report = filter_liabilities(seq, corpus.annotation);
      std::vector<PlantSite> flagged;
      for (const auto& result : report.results) {
        for (std::size_t pos : result.positions) flagged.push_back({result.name, pos});
      }
      auto key = [](const PlantSite& p) { return std::make_pair(p.filter, p.position); };
      auto by_key = [&](const PlantSite& a, const PlantSite& b) { return key(a) < key(b); };
      std::sort(plants.begin(), plants.end(), by_key);
      std::sort(flagged.begin(), flagged.end(), by_key);
      valid = plants.size() == flagged.size() &&
              std::equal(plants.begin(), plants.end(), flagged.begin(),
                         [&](const PlantSite& a, const PlantSite& b) { return key(a) == key(b); });
    }
    require(valid, "make_planted_corpus: failed to build subject ", subject);

    const std::string id = "s" + std::to_string(subject);
    corpus.subjects.push_back({id, {AntibodySequence::from_string(id, text)}});
    for (const auto& plant : plants) {
      corpus.motifs.push_back({subject, 0, plant.filter, plant.position});
    }
  }
  return corpus;
}

}  // namespace humanizer::testkit
