// Test double for the external-scorer protocol. Modes select well-formed or
// deliberately broken behavior:
//   ok (default) - deterministic logits derived from the sequence
//   bad-shape    - rows with 19 columns
//   non-numeric  - a null in place of a logit
//   overflow     - a literal 1e999 (parses to infinity or fails outright)
//   garbage      - a non-JSON line
//   die          - exit after reading the first request
//   hang         - sleep 5 s before answering

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

namespace {

constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";

double logit_for(const std::string& seq, std::size_t l, std::size_t i) {
  double v = 0.1 * static_cast<double>((l * 7 + i * 3) % 11);
  if (seq[l] == kAlphabet[i]) v += 1.0;
  if (seq[l] == '#') v -= 0.25;  // masked positions score differently
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "ok";
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "die") return 0;
    if (mode == "hang") std::this_thread::sleep_for(std::chrono::seconds(5));
    if (mode == "garbage") {
      std::cout << "not json at all\n" << std::flush;
      continue;
    }
    const auto request = nlohmann::json::parse(line);
    const std::string seq = request.at("seq").get<std::string>();
    if (mode == "overflow") {
      std::string row = "[1e999";
      for (int i = 1; i < 20; ++i) row += ",0";
      row += "]";
      std::cout << "{\"logits\":[";
      for (std::size_t l = 0; l < seq.size(); ++l) {
        if (l > 0) std::cout << ',';
        std::cout << row;
      }
      std::cout << "]}\n" << std::flush;
      continue;
    }
    nlohmann::json logits = nlohmann::json::array();
    const std::size_t columns = mode == "bad-shape" ? 19 : 20;
    for (std::size_t l = 0; l < seq.size(); ++l) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t i = 0; i < columns; ++i) row.push_back(logit_for(seq, l, i));
      if (mode == "non-numeric" && l == 0) row[0] = nullptr;
      logits.push_back(std::move(row));
    }
    nlohmann::json response;
    response["logits"] = std::move(logits);
    std::cout << response.dump() << "\n" << std::flush;
  }
  return 0;
}
