#include "humanizer/context_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "humanizer/error.hpp"

namespace humanizer {

namespace {

std::string context_key_string(std::uint16_t key) {
  std::string s;
  s.push_back(residue_to_char(static_cast<Residue>(key / kAlphabetSize)));
  s.push_back(residue_to_char(static_cast<Residue>(key % kAlphabetSize)));
  return s;
}

std::uint16_t context_key_from_string(const std::string& s) {
  require(s.size() == 2, "model file: bad context key '", s, "'");
  const auto left = residue_from_char(s[0]);
  const auto right = residue_from_char(s[1]);
  require(left && right && is_canonical(*left) && is_canonical(*right),
          "model file: bad context key '", s, "'");
  return static_cast<std::uint16_t>(*left * kAlphabetSize + *right);
}

}  // namespace

ContextProfileModel train_context_profile(std::span<const AntibodySequence> corpus,
                                          double alpha, double lambda) {
  require(!corpus.empty(), "train_context_profile: empty corpus");
  require(alpha > 0, "train_context_profile: alpha must be positive, got ", alpha);
  require(lambda >= 0 && lambda <= 1,
          "train_context_profile: lambda must be in [0, 1], got ", lambda);
  const std::size_t length = corpus.front().length();
  require(length > 0, "train_context_profile: zero-length sequences");
  for (const auto& seq : corpus) {
    require(seq.length() == length, "train_context_profile: ragged corpus, sequence '",
            seq.id, "' has length ", seq.length(), ", expected ", length);
    require(!seq.contains_mask(), "train_context_profile: sequence '", seq.id,
            "' contains MASK");
  }

  std::vector<std::array<std::size_t, kAlphabetSize>> unigram_counts(
      length, std::array<std::size_t, kAlphabetSize>{});
  std::vector<std::unordered_map<std::uint16_t, std::array<std::size_t, kAlphabetSize>>>
      context_counts(length);

  for (const auto& seq : corpus) {
    for (std::size_t l = 0; l < length; ++l) {
      const Residue r = seq.residues[l];
      ++unigram_counts[l][r];
      if (l > 0 && l + 1 < length) {
        const std::uint16_t key = static_cast<std::uint16_t>(
            seq.residues[l - 1] * kAlphabetSize + seq.residues[l + 1]);
        ++context_counts[l][key][r];
      }
    }
  }

  ContextProfileModel model;
  model.alpha_ = alpha;
  model.lambda_ = lambda;
  model.corpus_size_ = corpus.size();
  model.log_unseen_ = -std::log(static_cast<double>(kAlphabetSize));
  model.unigram_.resize(length);
  model.contexts_.resize(length);

  const double n = static_cast<double>(corpus.size());
  for (std::size_t l = 0; l < length; ++l) {
    for (std::size_t r = 0; r < kAlphabetSize; ++r) {
      model.unigram_[l][r] =
          std::log((unigram_counts[l][r] + alpha) / (n + kAlphabetSize * alpha));
    }
    for (const auto& [key, counts] : context_counts[l]) {
      double total = 0;
      for (std::size_t c : counts) total += static_cast<double>(c);
      LogitsRow row;
      for (std::size_t r = 0; r < kAlphabetSize; ++r) {
        row[r] = std::log((counts[r] + alpha) / (total + kAlphabetSize * alpha));
      }
      model.contexts_[l].emplace(key, row);
    }
  }
  return model;
}

LogitsRow ContextProfileModel::row_for(std::size_t l, Residue left, Residue right) const {
  const LogitsRow& u = unigram_[l];
  if (lambda_ == 0 || !is_canonical(left) || !is_canonical(right)) {
    return u;  // back off to the unigram profile
  }
  const std::uint16_t key = static_cast<std::uint16_t>(left * kAlphabetSize + right);
  const auto it = contexts_[l].find(key);
  LogitsRow out;
  for (std::size_t r = 0; r < kAlphabetSize; ++r) {
    const double c_term = it != contexts_[l].end() ? std::exp(it->second[r])
                                                   : std::exp(log_unseen_);
    out[r] = std::log(lambda_ * c_term + (1 - lambda_) * std::exp(u[r]));
  }
  return out;
}

LogitsMatrix ContextProfileModel::score(const AntibodySequence& seq) const {
  require(seq.length() == length(), "ContextProfileModel: sequence length ", seq.length(),
          " does not match model length ", length());
  LogitsMatrix z;
  z.rows.resize(seq.length());
  for (std::size_t l = 0; l < seq.length(); ++l) {
    const Residue left = l > 0 ? seq.residues[l - 1] : kMaskResidue;
    const Residue right = l + 1 < seq.length() ? seq.residues[l + 1] : kMaskResidue;
    z[l] = row_for(l, left, right);
  }
  return z;
}

void ContextProfileModel::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "context_profile";
  j["version"] = 1;
  j["length"] = length();
  j["alpha"] = alpha_;
  j["lambda"] = lambda_;
  j["corpus_size"] = corpus_size_;
  j["unigram"] = unigram_;
  nlohmann::json ctxs = nlohmann::json::array();
  for (const auto& context_map : contexts_) {
    std::vector<std::uint16_t> keys;
    keys.reserve(context_map.size());
    for (const auto& [key, row] : context_map) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    nlohmann::json entry = nlohmann::json::array();
    for (std::uint16_t key : keys) {
      entry.push_back({context_key_string(key), context_map.at(key)});
    }
    ctxs.push_back(std::move(entry));
  }
  j["contexts"] = std::move(ctxs);

  std::ofstream out(path);
  require(out.good(), "cannot open model file for writing: ", path);
  out << j.dump() << '\n';
  require(out.good(), "error writing model file: ", path);
}

ContextProfileModel ContextProfileModel::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open model file: ", path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("model file ", path, ": invalid JSON: ", e.what());
  }
  require(j.value("format", "") == "context_profile", "model file ", path,
          ": not a context_profile model");

  ContextProfileModel model;
  model.alpha_ = j.at("alpha").get<double>();
  model.lambda_ = j.at("lambda").get<double>();
  model.corpus_size_ = j.at("corpus_size").get<std::size_t>();
  model.log_unseen_ = -std::log(static_cast<double>(kAlphabetSize));
  model.unigram_ = j.at("unigram").get<std::vector<LogitsRow>>();
  const std::size_t length = j.at("length").get<std::size_t>();
  require(model.unigram_.size() == length, "model file ", path, ": length mismatch");
  model.contexts_.resize(length);
  const auto& ctxs = j.at("contexts");
  require(ctxs.size() == length, "model file ", path, ": contexts length mismatch");
  for (std::size_t l = 0; l < length; ++l) {
    for (const auto& entry : ctxs[l]) {
      require(entry.is_array() && entry.size() == 2, "model file ", path,
              ": bad context entry");
      model.contexts_[l].emplace(context_key_from_string(entry[0].get<std::string>()),
                                 entry[1].get<LogitsRow>());
    }
  }
  return model;
}

}  // namespace humanizer
