// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "fedwh/error.hpp"
#include "fedwh/executor.hpp"
#include "fedwh/integrator.hpp"
#include "fedwh/ontology.hpp"
#include "fedwh/query_planner.hpp"
#include "support/fixtures.hpp"
#include "support/random_federation.hpp"

using namespace fedwh;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << "\n";
    if (!ok) ++failures;
}

struct Hotel {
    OntologyRepository repo;
    ComponentSchema dw1;
    ComponentSchema dw2;

    Hotel()
        : repo(OntologyRepository::build(
              parse_ontology(fedwh_test::slurp(fedwh_test::hotel_dir() + "/ontology.triples")))),
          dw1(parse_component(fedwh_test::slurp(fedwh_test::hotel_dir() + "/dw1/schema.json"),
                              fedwh_test::hotel_dir() + "/dw1")),
          dw2(parse_component(fedwh_test::slurp(fedwh_test::hotel_dir() + "/dw2/schema.json"),
                              fedwh_test::hotel_dir() + "/dw2")) {}
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. Hotel fixtures: star dw1 + snowflake dw2 integrate into one catalog
//    with the Client/Customer merge, the folded geography and the Category
//    hierarchy. Must finish under a second.
void criterion_1() {
    auto start = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool ok = true;
    try {
        Hotel hotel;
        auto catalog = build_federation({hotel.dw1, hotel.dw2}, hotel.repo);

        int client_dims = 0;
        const FederatedDimension* client = nullptr;
        for (const auto& dim : catalog.dimensions)
            if (dim.concept_id == hotel.repo.concept_of("Client") ||
                dim.concept_id == hotel.repo.concept_of("Customer")) {
                ++client_dims;
                client = &dim;
            }
        if (client_dims != 1 || !client) {
            ok = false;
            detail << "expected exactly one Client/Customer dimension, found " << client_dims
                   << "; ";
        } else if (client->source_tables !=
                   std::set<std::pair<std::string, std::string>>{{"dw1", "Client"},
                                                                 {"dw2", "Customer"}}) {
            ok = false;
            detail << "Client dimension does not cover both components; ";
        }

        for (const char* term : {"country", "region", "city"}) {
            bool found = false;
            for (const auto& dim : catalog.dimensions)
                for (const auto& attr : dim.attributes)
                    if (attr.concept_id == hotel.repo.concept_of(term))
                        for (const auto& loc : attr.locations)
                            if (loc.component_id == "dw1" && loc.table == "Client") found = true;
            if (!found) {
                ok = false;
                detail << "no dw1 location for attribute '" << term << "'; ";
            }
        }

        bool edge = false;
        for (const auto& e : catalog.hierarchy_edges)
            if (e.child == hotel.repo.concept_of("sub_Category") &&
                e.parent == hotel.repo.concept_of("Category"))
                edge = true;
        if (!edge) {
            ok = false;
            detail << "missing sub_Category -> Category hierarchy edge; ";
        }
    } catch (const std::exception& e) {
        ok = false;
        detail << "exception: " << e.what() << "; ";
    }
    double elapsed = seconds_since(start);
    if (elapsed >= 1.0) ok = false;
    detail << "hotel fixtures integrated in " << elapsed << "s (limit 1s)";
    report(1, ok, detail.str());
}

// 2. Information preservation over >= 1000 random component sets.
void criterion_2() {
    const int sets = 1000;
    int violations = 0;
    for (std::uint32_t seed = 0; seed < sets; ++seed) {
        auto fed = fedwh_test::make_random_federation(seed);
        auto catalog = build_federation(fed.components, fed.repo);
        if (!fedwh_test::information_preserved(fed.components, catalog)) ++violations;
    }
    report(2, violations == 0,
           "location multiset == declared multiset on " + std::to_string(sets) +
               " random component sets, " + std::to_string(violations) + " violations");
}

// 3. Concept-level order independence across all permutations of <= 3
//    components, >= 200 random sets.
void criterion_3() {
    const int sets = 200;
    int violations = 0;
    fedwh_test::GeneratorOptions options;
    options.min_components = 1;
    options.max_components = 3;
    for (std::uint32_t seed = 0; seed < sets; ++seed) {
        auto fed = fedwh_test::make_random_federation(seed + 50000, options);
        auto reference = fedwh_test::canonicalize(build_federation(fed.components, fed.repo));

        std::vector<std::size_t> order(fed.components.size());
        std::iota(order.begin(), order.end(), 0);
        bool all_equal = true;
        do {
            std::vector<ComponentSchema> permuted;
            for (std::size_t i : order) permuted.push_back(fed.components[i]);
            if (!(fedwh_test::canonicalize(build_federation(permuted, fed.repo)) == reference))
                all_equal = false;
        } while (std::next_permutation(order.begin(), order.end()));
        if (!all_equal) ++violations;
    }
    report(3, violations == 0,
           "all permutations agree on " + std::to_string(sets) + " random sets, " +
               std::to_string(violations) + " violations");
}

// 4. Re-integration with a reused component_id leaves inventories unchanged,
//    >= 500 random schemas.
void criterion_4() {
    const int sets = 500;
    int violations = 0;
    for (std::uint32_t seed = 0; seed < sets; ++seed) {
        auto fed = fedwh_test::make_random_federation(seed + 90000);
        auto catalog = build_federation(fed.components, fed.repo);
        auto before = fedwh_test::canonicalize(catalog);
        integrate_component(catalog, fed.components[seed % fed.components.size()], fed.repo);
        if (!(fedwh_test::canonicalize(catalog) == before)) ++violations;
    }
    report(4, violations == 0,
           "re-integration is a no-op on " + std::to_string(sets) + " random schemas, " +
               std::to_string(violations) + " violations");
}

// 5. Oracle equivalence on >= 100 randomized (schema, data, query)
//    instances; SUM/COUNT/MIN/MAX exact, AVG within 1e-9 relative; < 60s.
void criterion_5() {
    auto start = std::chrono::steady_clock::now();
    const int wanted = 100;
    int executed = 0;
    int unanswerable = 0;
    int mismatches = 0;
    std::string first_mismatch;

    fedwh_test::GeneratorOptions options;
    options.with_data = true;
    for (std::uint32_t seed = 0; executed < wanted; ++seed) {
        auto fed = fedwh_test::make_random_federation(seed + 130000, options);
        auto catalog = build_federation(fed.components, fed.repo);
        std::mt19937 rng(seed * 2654435761u + 1013904223u);
        std::string query_text = fedwh_test::make_random_query(rng, catalog);

        FederatedQuery query;
        try {
            query = parse_query(query_text);
        } catch (const FedError&) {
            continue;
        }
        try {
            auto fed_result = execute_federated(query, catalog, fed.repo, fed.tables);
            auto oracle = execute_global_oracle(query, catalog, fed.repo, fed.tables);
            std::string diff = fedwh_test::compare_results(fed_result.table, oracle.table, 1e-9);
            if (diff.empty() && fed_result.dangling_dropped != oracle.dangling_dropped)
                diff = "dangling counters differ";
            if (!diff.empty()) {
                ++mismatches;
                if (first_mismatch.empty())
                    first_mismatch = " [seed " + std::to_string(seed) + ": " + query_text +
                                     " -> " + diff + "]";
            }
            ++executed;
        } catch (const FedError& e) {
            if (e.code() != ErrorCode::unanswerable) continue;
            try {
                execute_global_oracle(query, catalog, fed.repo, fed.tables);
                ++mismatches;  // the oracle answered what the engine refused
            } catch (const FedError& oe) {
                if (oe.code() == ErrorCode::unanswerable) ++unanswerable;
                else ++mismatches;
            }
        }
    }

    // A second pass with injected dangling foreign keys compares the
    // diagnostics counters (results must still agree cell-for-cell since
    // both sides drop the same rows).
    options.dangling_rate = 0.08;
    int dangling_checked = 0;
    for (std::uint32_t seed = 0; dangling_checked < 20; ++seed) {
        auto fed = fedwh_test::make_random_federation(seed + 170000, options);
        auto catalog = build_federation(fed.components, fed.repo);
        std::mt19937 rng(seed * 69069u + 12345u);
        std::string query_text = fedwh_test::make_random_query(rng, catalog);
        try {
            FederatedQuery query = parse_query(query_text);
            auto fed_result = execute_federated(query, catalog, fed.repo, fed.tables);
            auto oracle = execute_global_oracle(query, catalog, fed.repo, fed.tables);
            if (fed_result.dangling_dropped != oracle.dangling_dropped) ++mismatches;
            if (!fedwh_test::compare_results(fed_result.table, oracle.table, 1e-9).empty())
                ++mismatches;
            ++dangling_checked;
        } catch (const FedError&) {
            continue;
        }
    }

    double elapsed = seconds_since(start);
    bool ok = mismatches == 0 && elapsed < 60.0;
    report(5, ok,
           std::to_string(executed) + " oracle-checked instances (+" +
               std::to_string(unanswerable) + " mutually unanswerable, " +
               std::to_string(dangling_checked) + " dangling-fk instances), " +
               std::to_string(mismatches) + " mismatches" + first_mismatch + ", " +
               std::to_string(elapsed) + "s (limit 60s)");
}

// 6. sameValue spellings collapse into one row whose measure is the sum of
//    both partials (hand-computed fixture arithmetic).
void criterion_6() {
    std::ostringstream detail;
    bool ok = true;
    try {
        Hotel hotel;
        auto catalog = build_federation({hotel.dw1, hotel.dw2}, hotel.repo);
        std::map<std::string, ComponentTables> tables;
        tables.emplace("dw1", load_tables(hotel.dw1));
        tables.emplace("dw2", load_tables(hotel.dw2));

        auto result = execute_federated(parse_query("SELECT SUM(price), COUNT(price) GROUP BY country"),
                                        catalog, hotel.repo, tables);
        // dw1 Morocco=2400 (3 rows), dw2 Maroc=1500 (3 rows) -> Maroc 3900/6;
        // dw1 United_Kingdom=2450 (2 rows), dw2 UK=2200 (1 row) -> UK 4650/3.
        auto cell = [&](std::size_t r, std::size_t c) {
            return std::get<double>(result.table.rows.at(r).at(c));
        };
        auto key = [&](std::size_t r) { return std::get<std::string>(result.table.rows.at(r).at(0)); };
        if (result.table.rows.size() != 2) {
            ok = false;
            detail << "expected 2 merged country rows, got " << result.table.rows.size();
        } else if (key(0) != "Maroc" || key(1) != "UK") {
            ok = false;
            detail << "unexpected canonical keys " << key(0) << ", " << key(1);
        } else if (cell(0, 1) != 3900 || cell(0, 2) != 6 || cell(1, 1) != 4650 ||
                   cell(1, 2) != 3) {
            ok = false;
            detail << "merged values differ from hand-computed 3900/6 and 4650/3";
        } else {
            detail << "Maroc+Morocco and UK+United_Kingdom each collapse to one row "
                      "(3900/6, 4650/3)";
        }
    } catch (const std::exception& e) {
        ok = false;
        detail << "exception: " << e.what();
    }
    report(6, ok, detail.str());
}

// 7. Cyclic and conflicting inputs are rejected with their error identities.
void criterion_7() {
    std::ostringstream detail;
    bool ok = true;
    auto expect = [&](ErrorCode want, const char* label, const std::function<void()>& fn) {
        try {
            fn();
            ok = false;
            detail << label << " not rejected; ";
        } catch (const FedError& e) {
            if (e.code() != want) {
                ok = false;
                detail << label << " raised " << error_code_name(e.code()) << "; ";
            }
        }
    };

    expect(ErrorCode::hierarchy_cycle, "cyclic parentOf ontology", [] {
        OntologyRepository::build(parse_ontology("A parentOf B\nB parentOf A"));
    });
    expect(ErrorCode::parent_cycle, "cyclic schema parents", [] {
        parse_component(
            R"({"component_id":"c","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],"links":[]},
                "dimensions":[{"name":"A","attributes":[{"name":"a_id","key":true},{"name":"fb","key":true}],"parents":[{"dimension":"B","fk":"fb"}]},
                              {"name":"B","attributes":[{"name":"b_id","key":true},{"name":"fa","key":true}],"parents":[{"dimension":"A","fk":"fa"}]}]})");
    });
    expect(ErrorCode::aggregation_conflict, "aggregation conflict", [] {
        auto repo = OntologyRepository::build({});
        auto a = parse_component(
            R"({"component_id":"c1","fact":{"name":"f","measures":[{"name":"price","agg":"SUM"}],"links":[]},"dimensions":[]})");
        auto b = parse_component(
            R"({"component_id":"c2","fact":{"name":"f","measures":[{"name":"price","agg":"AVG"}],"links":[]},"dimensions":[]})");
        build_federation({a, b}, repo);
    });
    expect(ErrorCode::hierarchy_conflict, "federated hierarchy cycle", [] {
        auto repo = OntologyRepository::build({});
        auto up = parse_component(
            R"({"component_id":"c1","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],"links":[{"dimension":"A","fk":"fa"}]},
                "dimensions":[{"name":"A","attributes":[{"name":"a_id","key":true},{"name":"fb","key":true}],"parents":[{"dimension":"B","fk":"fb"}]},
                              {"name":"B","attributes":[{"name":"b_id","key":true}],"parents":[]}]})");
        auto down = parse_component(
            R"({"component_id":"c2","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],"links":[{"dimension":"B","fk":"fb"}]},
                "dimensions":[{"name":"B","attributes":[{"name":"b_id","key":true},{"name":"fa","key":true}],"parents":[{"dimension":"A","fk":"fa"}]},
                              {"name":"A","attributes":[{"name":"a_id","key":true}],"parents":[]}]})");
        build_federation({up, down}, repo);
    });

    if (ok) detail << "hierarchy cycles and aggregation conflicts rejected with their identities";
    report(7, ok, detail.str());
}

// 8. Two consecutive `fedwh integrate` runs produce byte-identical catalogs.
void criterion_8() {
    std::ostringstream detail;
    bool ok = true;
    fs::path tmp = fs::temp_directory_path() / "fedwh_acceptance_determinism";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    std::string config = fedwh_test::hotel_dir() + "/fed.json";
    std::string cli = FEDWH_CLI_PATH;

    auto run = [&](const std::string& out_name) {
        std::string command = "\"" + cli + "\" integrate --config \"" + config + "\" --out \"" +
                              (tmp / out_name).string() + "\" > \"" +
                              (tmp / (out_name + ".stdout")).string() + "\" 2> \"" +
                              (tmp / (out_name + ".stderr")).string() + "\"";
        return std::system(command.c_str());
    };
    if (run("a.json") != 0 || run("b.json") != 0) {
        ok = false;
        detail << "fedwh integrate exited nonzero";
    } else {
        std::string a = fedwh_test::slurp((tmp / "a.json").string());
        std::string b = fedwh_test::slurp((tmp / "b.json").string());
        if (a != b || a.empty()) {
            ok = false;
            detail << "catalog.json differs between runs";
        } else {
            detail << "two fedwh integrate runs emitted byte-identical catalogs ("
                   << a.size() << " bytes)";
        }
    }
    fs::remove_all(tmp);
    report(8, ok, detail.str());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
