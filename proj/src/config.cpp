#include "fedwh/config.hpp"

#include <filesystem>

#include <json.hpp>

#include "csv.hpp"
#include "fedwh/error.hpp"

namespace fedwh {

namespace fs = std::filesystem;
using nlohmann::json;

FederationConfig load_config(const std::string& path) {
    json doc = json::parse(text::read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw FedError(ErrorCode::config_error, "'" + path + "' is not a JSON object");

    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path candidate(p);
        return candidate.is_absolute() ? candidate.string() : (base / candidate).string();
    };

    FederationConfig config;
    for (const auto& entry : doc.value("components", json::array())) {
        if (!entry.is_string())
            throw FedError(ErrorCode::config_error, "'components' entries must be strings");
        config.component_dirs.push_back(resolve(entry.get<std::string>()));
    }
    if (config.component_dirs.empty())
        throw FedError(ErrorCode::config_error, "at least one component directory is required");
    for (const auto& entry : doc.value("ontologies", json::array())) {
        if (!entry.is_string())
            throw FedError(ErrorCode::config_error, "'ontologies' entries must be strings");
        config.ontology_files.push_back(resolve(entry.get<std::string>()));
    }
    if (doc.contains("overrides")) config.override_file = resolve(doc["overrides"].get<std::string>());
    if (doc.contains("catalog_out")) config.catalog_out = resolve(doc["catalog_out"].get<std::string>());

    for (const auto& dir : config.component_dirs)
        if (!fs::is_directory(dir))
            throw FedError(ErrorCode::config_error, "component directory '" + dir + "' not found");
    for (const auto& file : config.ontology_files)
        if (!fs::is_regular_file(file))
            throw FedError(ErrorCode::config_error, "ontology file '" + file + "' not found");
    if (config.override_file && !fs::is_regular_file(*config.override_file))
        throw FedError(ErrorCode::config_error,
                       "override file '" + *config.override_file + "' not found");
    return config;
}

}  // namespace fedwh
