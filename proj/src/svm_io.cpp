#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sfbc/classify.hpp"
#include "sfbc/errors.hpp"

namespace sfbc {

std::string SvmModel::to_json() const {
  if (!trained) throw StateError("SVM model is not trained");
  nlohmann::json j{{"format", "sfbc-svm"},
                   {"version", 1},
                   {"w", w},
                   {"b", b},
                   {"C", c},
                   {"D", pair_count},
                   {"feature", to_string(kind)},
                   {"positive", to_string(positive)},
                   {"negative", to_string(negative)},
                   {"digest", digest}};
  return j.dump(2);
}

SvmModel SvmModel::from_json(const std::string& text) {
  SvmModel m;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "sfbc-svm") throw ConfigError("not an SVM model file");
    m.w = j.at("w").get<double>();
    m.b = j.at("b").get<double>();
    m.c = j.at("C").get<double>();
    m.pair_count = j.at("D").get<int>();
    m.kind = parse_statistic_kind(j.at("feature").get<std::string>());
    m.positive = parse_code(j.at("positive").get<std::string>());
    m.negative = parse_code(j.at("negative").get<std::string>());
    m.digest = j.value("digest", "");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed SVM model: ") + e.what());
  }
  if (m.pair_count < 1) throw ConfigError("SVM model has an invalid D");
  m.trained = true;
  return m;
}

void SvmModel::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << to_json() << '\n';
}

SvmModel SvmModel::load(const std::string& path, int expected_pair_count) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  auto m = from_json(ss.str());
  if (expected_pair_count > 0 && m.pair_count != expected_pair_count)
    throw ConfigError("SVM model was trained with D=" + std::to_string(m.pair_count) +
                      " but the configuration has D=" + std::to_string(expected_pair_count));
  return m;
}

}  // namespace sfbc
