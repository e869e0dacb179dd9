#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fedwh {

/// Federation build configuration. Relative paths inside the file resolve
/// against the config file's own directory.
struct FederationConfig {
    std::vector<std::string> component_dirs;
    std::vector<std::string> ontology_files;
    std::optional<std::string> override_file;
    std::string catalog_out = "catalog.json";
};

/// Loads and validates fed.json. Throws FedError(config_error) when no
/// component directory is listed or a referenced path is unreadable.
FederationConfig load_config(const std::string& path);

}  // namespace fedwh
