#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "biomeval/evaluation.hpp"
#include "biomeval/simulator.hpp"
#include "test_support.hpp"

using namespace biomeval;
using nlohmann::json;

namespace {

// Validator for the JSON-Schema subset the shipped schema uses: $ref into
// definitions, type, enum, required, properties, additionalProperties,
// items, minItems, minimum, maximum.
class SchemaValidator {
public:
    explicit SchemaValidator(const json& root) : root_(root) {}

    bool validate(const json& schema, const json& value, const std::string& path,
                  std::string& error) const {
        if (schema.contains("$ref")) {
            const std::string ref = schema["$ref"].get<std::string>();
            const std::string prefix = "#/definitions/";
            REQUIRE(ref.rfind(prefix, 0) == 0);
            return validate(root_["definitions"][ref.substr(prefix.size())], value, path, error);
        }
        if (schema.contains("enum")) {
            for (const auto& allowed : schema["enum"])
                if (value == allowed) return true;
            error = path + ": value not in enum";
            return false;
        }
        if (schema.contains("type") && !check_type(schema["type"].get<std::string>(), value)) {
            error = path + ": expected " + schema["type"].get<std::string>();
            return false;
        }
        if (value.is_number()) {
            const double x = value.get<double>();
            if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
                error = path + ": below minimum";
                return false;
            }
            if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
                error = path + ": above maximum";
                return false;
            }
        }
        if (value.is_object()) {
            if (schema.contains("required"))
                for (const auto& key : schema["required"])
                    if (!value.contains(key.get<std::string>())) {
                        error = path + ": missing required key " + key.get<std::string>();
                        return false;
                    }
            const json empty = json::object();
            const json& properties = schema.contains("properties") ? schema["properties"] : empty;
            for (const auto& [key, child] : value.items()) {
                if (properties.contains(key)) {
                    if (!validate(properties[key], child, path + "/" + key, error)) return false;
                } else if (schema.contains("additionalProperties")) {
                    const auto& extra = schema["additionalProperties"];
                    if (extra.is_boolean() && !extra.get<bool>()) {
                        error = path + ": unexpected key " + key;
                        return false;
                    }
                    if (extra.is_object() &&
                        !validate(extra, child, path + "/" + key, error))
                        return false;
                }
            }
        }
        if (value.is_array()) {
            if (schema.contains("minItems") && value.size() < schema["minItems"].get<std::size_t>()) {
                error = path + ": too few items";
                return false;
            }
            if (schema.contains("items"))
                for (std::size_t i = 0; i < value.size(); ++i)
                    if (!validate(schema["items"], value[i], path + "/" + std::to_string(i),
                                  error))
                        return false;
        }
        return true;
    }

private:
    static bool check_type(const std::string& type, const json& value) {
        if (type == "object") return value.is_object();
        if (type == "array") return value.is_array();
        if (type == "string") return value.is_string();
        if (type == "boolean") return value.is_boolean();
        if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
        if (type == "number") return value.is_number();
        return false;
    }

    const json& root_;
};

json load_schema() {
    std::ifstream in(std::string(BIOMEVAL_SOURCE_DIR) + "/schema/report.schema.json");
    REQUIRE(in.good());
    return json::parse(in);
}

} // namespace

TEST_CASE("report JSON validates against the shipped schema") {
    const auto schema = load_schema();
    const SchemaValidator validator(schema);

    const auto dataset = simulate_dataset(testsup::standard_fixture_config(2, 64));
    EvaluationParams params;
    params.seed = 7;

    std::string error;

    SUBCASE("plain evaluate report") {
        const auto doc = json::parse(report_json(evaluate_dataset(dataset, params)));
        CHECK_MESSAGE(validator.validate(schema, doc, "", error), error);
    }

    SUBCASE("report with demographic breakdown") {
        params.group_by = GroupKey::EthnicityGender;
        const auto doc = json::parse(report_json(evaluate_dataset(dataset, params)));
        CHECK_MESSAGE(validator.validate(schema, doc, "", error), error);
    }

    SUBCASE("compare report: both embedded dataset blocks validate") {
        const auto other = simulate_dataset(testsup::standard_fixture_config(3, 64));
        auto candidate = evaluate_dataset(other, params);
        const auto reference = evaluate_dataset(dataset, params);
        attach_kl(candidate, reference);
        const auto doc = json::parse(comparison_json(candidate, reference));
        CHECK_MESSAGE(validator.validate(schema, doc["candidate"], "candidate", error), error);
        CHECK_MESSAGE(validator.validate(schema, doc["reference"], "reference", error), error);
        CHECK(doc["candidate"].contains("kl_mated"));
    }

    SUBCASE("the validator actually rejects malformed documents") {
        auto doc = json::parse(report_json(evaluate_dataset(dataset, params)));
        doc.erase("eer");
        CHECK(!validator.validate(schema, doc, "", error));
        doc = json::parse(report_json(evaluate_dataset(dataset, params)));
        doc["unexpected"] = 1;
        CHECK(!validator.validate(schema, doc, "", error));
        doc = json::parse(report_json(evaluate_dataset(dataset, params)));
        doc["eer"]["eer"] = 2.0;
        CHECK(!validator.validate(schema, doc, "", error));
    }
}
