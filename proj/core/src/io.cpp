#include "abstain/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "abstain/errors.hpp"

namespace abstain {

namespace {

int annotation_from_json(const nlohmann::json& a, std::size_t index, TitlePolicy title) {
  if (a.is_number_integer()) return a.get<int>();
  if (a.is_number()) {
    const double v = a.get<double>();
    if (v == 1.0) return 1;
    if (v == -1.0) return -1;
    throw ValidationError(index, "invalid annotation " + a.dump());
  }
  if (a.is_string()) {
    const auto s = a.get<std::string>();
    if (s == "yes") return 1;
    if (s == "no") return -1;
    if (s == "title") return title == TitlePolicy::kAsYes ? 1 : -1;
  }
  throw ValidationError(index, "invalid annotation " + a.dump());
}

}  // namespace

Example example_from_json(const nlohmann::json& j, std::size_t index, TitlePolicy title) {
  if (!j.is_object()) throw ValidationError(index, "record is not a JSON object");
  Example e;
  const auto f = j.find("features");
  if (f == j.end() || !f->is_array()) throw ValidationError(index, "missing features array");
  e.features.reserve(f->size());
  for (const auto& v : *f) {
    if (!v.is_number()) throw ValidationError(index, "non-numeric feature value");
    e.features.push_back(v.get<double>());
  }
  const auto a = j.find("annotation");
  if (a == j.end()) throw ValidationError(index, "missing annotation");
  e.annotation = annotation_from_json(*a, index, title);
  if (auto s = j.find("score"); s != j.end() && !s->is_null()) {
    if (!s->is_number()) throw ValidationError(index, "score must be a number");
    e.score = s->get<double>();
  }
  if (auto m = j.find("meta"); m != j.end() && !m->is_null()) {
    if (!m->is_string()) throw ValidationError(index, "meta must be a string");
    e.meta = m->get<std::string>();
  }
  return e;
}

nlohmann::json example_to_json(const Example& e) {
  nlohmann::json j;
  j["features"] = e.features;
  j["annotation"] = e.annotation;
  if (e.score) j["score"] = *e.score;
  if (e.meta) j["meta"] = *e.meta;
  return j;
}

Dataset parse_jsonl(std::istream& in, TitlePolicy title) {
  std::vector<Example> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::size_t index = records.size();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw ValidationError(index, std::string("malformed JSON: ") + err.what());
    }
    records.push_back(example_from_json(j, index, title));
  }
  return make_dataset(std::move(records));
}

Dataset read_jsonl(const std::filesystem::path& path, TitlePolicy title) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return parse_jsonl(in, title);
}

void write_jsonl(std::ostream& out, const Dataset& dataset) {
  for (const auto& e : dataset.examples()) out << example_to_json(e).dump() << '\n';
}

void write_jsonl(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_jsonl(out, dataset);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace abstain
