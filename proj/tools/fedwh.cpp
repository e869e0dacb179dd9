#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fedwh/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fedwh — ontology-based data warehouse federation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string catalog_path = "catalog.json";
    std::string out_path;
    std::string query_text;
    std::string format = "csv";
    bool explain_only = false;

    CLI::App* integrate = app.add_subcommand("integrate", "build the federation catalog");
    integrate->add_option("--config", config_path, "federation config (fed.json)")->required();
    integrate->add_option("--out", out_path, "catalog output path (overrides config)");

    CLI::App* query = app.add_subcommand("query", "run a federated query");
    query->add_option("--catalog", catalog_path, "catalog file written by integrate")->required();
    query->add_option("--config", config_path, "federation config (fed.json)")->required();
    query->add_option("--format", format, "output format: csv or json");
    query->add_flag("--explain", explain_only, "print the plan instead of executing");
    query->add_option("query", query_text, "query text")->required();

    CLI::App* check = app.add_subcommand("check", "validate inputs without building");
    check->add_option("--config", config_path, "federation config (fed.json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fedwh::exit_usage_error;
    }

    if (integrate->parsed())
        return fedwh::cmd_integrate(config_path, out_path, std::cout, std::cerr);
    if (query->parsed())
        return fedwh::cmd_query(catalog_path, config_path, query_text, format, explain_only,
                                std::cout, std::cerr);
    return fedwh::cmd_check(config_path, std::cout, std::cerr);
}
