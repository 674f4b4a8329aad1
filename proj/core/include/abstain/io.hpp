#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "abstain/core.hpp"

namespace abstain {

/// How textual "title" annotations are mapped. "yes" is always +1 and "no" -1.
enum class TitlePolicy { kAsYes, kAsNo };

/// Decodes {"features":[...], "annotation": 1|-1|"yes"|"title"|"no",
/// "score": number?, "meta": string?}. `index` is used in error messages.
Example example_from_json(const nlohmann::json& j, std::size_t index,
                          TitlePolicy title = TitlePolicy::kAsYes);
nlohmann::json example_to_json(const Example& e);

Dataset parse_jsonl(std::istream& in, TitlePolicy title = TitlePolicy::kAsYes);
Dataset read_jsonl(const std::filesystem::path& path, TitlePolicy title = TitlePolicy::kAsYes);

void write_jsonl(std::ostream& out, const Dataset& dataset);
void write_jsonl(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace abstain
