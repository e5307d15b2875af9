#include "humanizer/ninemer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "humanizer/error.hpp"

namespace humanizer {

namespace {
constexpr std::size_t kNinemer = 9;
}

NinemerDatabase build_ninemer_db(const SubjectCorpus& corpus, double threshold) {
  require(!corpus.empty(), "build_ninemer_db: empty corpus");
  require(threshold >= 0 && threshold <= 1, "build_ninemer_db: threshold must be in [0, 1]");
  std::unordered_map<std::string, std::size_t> subject_counts;
  for (const auto& [subject_id, sequences] : corpus) {
    std::unordered_set<std::string> seen;  // count once per subject
    for (const auto& seq : sequences) {
      require(seq.length() >= kNinemer, "build_ninemer_db: sequence '", seq.id,
              "' of subject '", subject_id, "' is shorter than 9 residues");
      require(!seq.contains_mask(), "build_ninemer_db: sequence '", seq.id,
              "' contains MASK");
      const std::string text = seq.to_string();
      for (std::size_t i = 0; i + kNinemer <= text.size(); ++i) {
        seen.insert(text.substr(i, kNinemer));
      }
    }
    for (const auto& ninemer : seen) ++subject_counts[ninemer];
  }
  NinemerDatabase db;
  db.subject_count = corpus.size();
  db.prevalence_threshold = threshold;
  const double n = static_cast<double>(corpus.size());
  db.prevalence.reserve(subject_counts.size());
  for (const auto& [ninemer, count] : subject_counts) {
    db.prevalence.emplace(ninemer, static_cast<double>(count) / n);
  }
  return db;
}

SubjectCorpus group_by_subject(const std::vector<AntibodySequence>& records) {
  SubjectCorpus corpus;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& record : records) {
    auto [it, inserted] = index.emplace(record.id, corpus.size());
    if (inserted) corpus.push_back({record.id, {}});
    corpus[it->second].second.push_back(record);
  }
  return corpus;
}

double ninemer_score(const AntibodySequence& seq, const NinemerDatabase& db) {
  require(seq.length() >= kNinemer, "ninemer_score: sequence '", seq.id,
          "' is shorter than 9 residues");
  require(!seq.contains_mask(), "ninemer_score: sequence '", seq.id, "' contains MASK");
  const std::string text = seq.to_string();
  const std::size_t windows = text.size() - kNinemer + 1;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < windows; ++i) {
    const auto it = db.prevalence.find(text.substr(i, kNinemer));
    const double prevalence = it != db.prevalence.end() ? it->second : 0.0;
    if (prevalence >= db.prevalence_threshold) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(windows);
}

void save_ninemer_db(const std::string& path, const NinemerDatabase& db) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: ", path);
  char buf[96];
  std::snprintf(buf, sizeof buf, "# subjects=%zu threshold=%.17g\n", db.subject_count,
                db.prevalence_threshold);
  out << buf << "ninemer\tprevalence\n";
  std::vector<std::string> keys;
  keys.reserve(db.prevalence.size());
  for (const auto& [ninemer, prevalence] : db.prevalence) keys.push_back(ninemer);
  std::sort(keys.begin(), keys.end());
  for (const auto& key : keys) {
    std::snprintf(buf, sizeof buf, "%.17g", db.prevalence.at(key));
    out << key << '\t' << buf << '\n';
  }
  require(out.good(), "error writing ninemer db: ", path);
}

NinemerDatabase load_ninemer_db(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open ninemer db: ", path);
  NinemerDatabase db;
  std::string line;
  bool meta_seen = false;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t subjects = 0;
      double threshold = 0;
      require(std::sscanf(line.c_str(), "# subjects=%zu threshold=%lg", &subjects,
                          &threshold) == 2,
              "ninemer db ", path, ": bad metadata line '", line, "'");
      db.subject_count = subjects;
      db.prevalence_threshold = threshold;
      meta_seen = true;
      continue;
    }
    if (!header_seen) {
      require(line == "ninemer\tprevalence", "ninemer db ", path,
              ": expected header 'ninemer\\tprevalence'");
      header_seen = true;
      continue;
    }
    const auto tab = line.find('\t');
    require(tab != std::string::npos, "ninemer db ", path, " line ", line_no,
            ": expected tab-separated row");
    const std::string ninemer = line.substr(0, tab);
    require(ninemer.size() == 9, "ninemer db ", path, " line ", line_no,
            ": key must have length 9");
    for (char c : ninemer) {
      const auto r = residue_from_char(c);
      require(r.has_value() && is_canonical(*r), "ninemer db ", path, " line ", line_no,
              ": illegal character '", c, "' in key");
    }
    const double prevalence = std::stod(line.substr(tab + 1));
    require(prevalence >= 0 && prevalence <= 1, "ninemer db ", path, " line ", line_no,
            ": prevalence out of [0, 1]");
    db.prevalence.emplace(ninemer, prevalence);
  }
  require(meta_seen && header_seen, "ninemer db ", path, ": missing metadata or header");
  return db;
}

}  // namespace humanizer
