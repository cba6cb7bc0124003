#include "psm/dataset_io.hpp"

#include <fstream>
#include <initializer_list>
#include <istream>
#include <limits>
#include <sstream>

#include "psm/error.hpp"

namespace psm {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(Errc::schema, where + ": " + what);
}

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> required,
                    std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) schema_error(where, "expected an object");
    for (const char* key : required)
        if (!j.contains(key)) schema_error(where, std::string("missing field \"") + key + "\"");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : required) known = known || item.key() == key;
        for (const char* key : optional) known = known || item.key() == key;
        if (!known) schema_error(where, "unknown field \"" + item.key() + "\"");
    }
}

std::vector<int> int_vector(const json& j, const std::string& where) {
    if (!j.is_array()) schema_error(where, "expected an array of integers");
    std::vector<int> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number_integer()) schema_error(where, "expected an integer");
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
            schema_error(where, "integer out of range");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

} // namespace

json rational_to_json(const Rational& r) { return json::array({r.num(), r.den()}); }

Rational rational_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        schema_error(where, "expected a [numerator, denominator] pair of integers");
    const auto den = j[1].get<std::int64_t>();
    if (den <= 0) schema_error(where, "denominator must be positive");
    return Rational(j[0].get<std::int64_t>(), den);
}

json round_to_json(const Round& r) {
    json prices = json::array();
    for (const auto& p : r.prices) prices.push_back(rational_to_json(p));
    return json{{"corner", r.corner.coords}, {"prices", prices}, {"budget", rational_to_json(r.budget)}};
}

namespace {

Round round_fields(const json& j, const std::string& where) {
    Round r;
    r.corner = Corner{int_vector(j.at("corner"), where + ".corner")};
    const auto& prices = j.at("prices");
    if (!prices.is_array()) schema_error(where + ".prices", "expected an array");
    for (std::size_t s = 0; s < prices.size(); ++s)
        r.prices.push_back(rational_from_json(prices[s], where + ".prices[" + std::to_string(s) + "]"));
    r.budget = rational_from_json(j.at("budget"), where + ".budget");
    return r;
}

} // namespace

Round round_from_json(const json& j, const std::string& where) {
    require_object(j, where, {"corner", "prices", "budget"});
    return round_fields(j, where);
}

json dataset_to_json(const Dataset& d) {
    json obs = json::array();
    for (const auto& o : d.observations) {
        json row = round_to_json(o.round);
        row["answer"] = o.answer.values;
        obs.push_back(std::move(row));
    }
    json doc{{"scales", std::vector<int>(d.space.scales().begin(), d.space.scales().end())},
             {"round0", d.round0.values},
             {"observations", std::move(obs)}};
    if (!d.excluded_rounds.empty()) {
        json ex = json::array();
        for (const auto& r : d.excluded_rounds) ex.push_back(round_to_json(r));
        doc["excluded_rounds"] = std::move(ex);
    }
    return doc;
}

Dataset dataset_from_json(const json& j) {
    require_object(j, "dataset", {"scales", "round0", "observations"}, {"excluded_rounds"});
    Dataset d;
    try {
        d.space = AnswerSpace(int_vector(j.at("scales"), "dataset.scales"));
    } catch (const Error& e) {
        if (e.code() == Errc::schema) throw;
        schema_error("dataset.scales", e.what());
    }
    d.round0 = Answer{int_vector(j.at("round0"), "dataset.round0")};
    const auto& obs = j.at("observations");
    if (!obs.is_array()) schema_error("dataset.observations", "expected an array");
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const std::string where = "observations[" + std::to_string(k) + "]";
        require_object(obs[k], where, {"corner", "prices", "budget", "answer"});
        Observation o{round_fields(obs[k], where), Answer{int_vector(obs[k].at("answer"), where + ".answer")}};
        d.observations.push_back(std::move(o));
    }
    if (j.contains("excluded_rounds")) {
        const auto& ex = j.at("excluded_rounds");
        if (!ex.is_array()) schema_error("dataset.excluded_rounds", "expected an array");
        for (std::size_t k = 0; k < ex.size(); ++k)
            d.excluded_rounds.push_back(round_from_json(ex[k], "excluded_rounds[" + std::to_string(k) + "]"));
    }
    validate(d);
    return d;
}

Dataset load_dataset(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::schema, std::string("malformed document: ") + e.what());
    }
    return dataset_from_json(j);
}

Dataset load_dataset_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    return load_dataset(in);
}

std::string save_dataset(const Dataset& d) { return dataset_to_json(d).dump(2) + "\n"; }

void save_dataset_file(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write " + path.string());
    out << save_dataset(d);
}

} // namespace psm
