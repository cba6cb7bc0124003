#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "psm/core.hpp"

namespace psm {

// Dataset document:
//   {"scales":[N1,...], "round0":[q1,...],
//    "observations":[{"corner":[...], "prices":[[n,d],...], "budget":[n,d], "answer":[...]}, ...],
//    "excluded_rounds":[{"corner":[...], "prices":[...], "budget":[n,d]}, ...]}   (optional)
// Unknown fields are rejected; rationals are [numerator, denominator] with den > 0.

nlohmann::json rational_to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json round_to_json(const Round& r);
Round round_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json dataset_to_json(const Dataset& d);
/// Parses and validates; throws Error(Errc::schema) or Error(Errc::invariant).
Dataset dataset_from_json(const nlohmann::json& j);

Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::filesystem::path& path);
std::string save_dataset(const Dataset& d);
void save_dataset_file(const Dataset& d, const std::filesystem::path& path);

} // namespace psm
